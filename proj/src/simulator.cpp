#include "blip/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "blip/kalman.hpp"
#include "blip/localization.hpp"
#include "blip/pathloss.hpp"

namespace blip {

EnvironmentProfile laboratory_profile() { return {"laboratory", laboratory_model()}; }

EnvironmentProfile corridor_profile() { return {"corridor", corridor_model()}; }

EnvironmentProfile profile_by_name(const std::string& name) {
  if (name == "lab" || name == "laboratory") return laboratory_profile();
  if (name == "corridor") return corridor_profile();
  throw ValidationError("environment: unknown name \"" + name +
                        "\" (expected lab|laboratory|corridor)");
}

void validate(const Trajectory& trajectory) {
  if (trajectory.waypoints.empty())
    throw ValidationError("trajectory: need at least one waypoint");
  for (std::size_t i = 0; i < trajectory.waypoints.size(); ++i) {
    validate(trajectory.waypoints[i].position,
             "trajectory.waypoints[" + std::to_string(i) + "]");
    if (trajectory.waypoints[i].arrival_ms < 0)
      throw ValidationError("trajectory.waypoints[" + std::to_string(i) +
                            "].arrival_ms: negative");
    if (i > 0 && trajectory.waypoints[i].arrival_ms <=
                     trajectory.waypoints[i - 1].arrival_ms)
      throw ValidationError("trajectory.waypoints[" + std::to_string(i) +
                            "].arrival_ms: not strictly increasing");
  }
}

Position2D position_at(const Trajectory& trajectory, std::int64_t t_ms) {
  validate(trajectory);
  const auto& wp = trajectory.waypoints;
  if (t_ms <= wp.front().arrival_ms) return wp.front().position;
  if (t_ms >= wp.back().arrival_ms) return wp.back().position;
  for (std::size_t i = 1; i < wp.size(); ++i) {
    if (t_ms <= wp[i].arrival_ms) {
      const double span =
          static_cast<double>(wp[i].arrival_ms - wp[i - 1].arrival_ms);
      const double f = static_cast<double>(t_ms - wp[i - 1].arrival_ms) / span;
      return {wp[i - 1].position.x + f * (wp[i].position.x - wp[i - 1].position.x),
              wp[i - 1].position.y + f * (wp[i].position.y - wp[i - 1].position.y)};
    }
  }
  return wp.back().position;
}

double sample_rssi(const PathLossModel& model, double distance_m, Rng& rng) {
  const double mean = predict_rssi(model, distance_m);
  if (model.sigma_db == 0.0) return mean;
  std::normal_distribution<double> shadowing(0.0, model.sigma_db);
  return mean + shadowing(rng);
}

namespace {

constexpr double kMinSimDistanceM = 1e-3;  // 1 mm clamp at a beacon position

void sort_chronologically(std::vector<RssiSample>& samples) {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const RssiSample& a, const RssiSample& b) {
                     if (a.timestamp_ms != b.timestamp_ms)
                       return a.timestamp_ms < b.timestamp_ms;
                     return a.beacon < b.beacon;
                   });
}

template <typename PositionFn>
std::vector<RssiSample> simulate_ticks(const BeaconMap& map,
                                       std::int64_t end_ms, Rng& rng,
                                       PositionFn&& position_of) {
  std::vector<RssiSample> samples;
  for (const auto& beacon : map.beacons) {
    for (std::int64_t t = 0; t < end_ms; t += beacon.adv_interval_ms) {
      const Position2D p = position_of(t);
      const double d = std::max(
          distance_between(p, {beacon.x_m, beacon.y_m}), kMinSimDistanceM);
      samples.push_back({beacon.beacon, t, sample_rssi(map.environment, d, rng)});
    }
  }
  sort_chronologically(samples);
  return samples;
}

}  // namespace

std::vector<RssiSample> simulate_static(const BeaconMap& map,
                                        const Position2D& position,
                                        std::int64_t duration_ms, Rng& rng) {
  validate_beacon_map(map);
  validate(position);
  if (duration_ms <= 0) throw ValidationError("duration_ms: must be > 0");
  return simulate_ticks(map, duration_ms, rng,
                        [&](std::int64_t) { return position; });
}

std::vector<RssiSample> simulate_walk(const BeaconMap& map,
                                      const Trajectory& trajectory, Rng& rng) {
  validate_beacon_map(map);
  validate(trajectory);
  const std::int64_t end_ms = trajectory.waypoints.back().arrival_ms;
  return simulate_ticks(map, end_ms, rng,
                        [&](std::int64_t t) { return position_at(trajectory, t); });
}

// ---- experiment harnesses -------------------------------------------------

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// nearest-rank percentiles on a copy
double percentile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const auto rank = static_cast<std::size_t>(
      std::ceil(p / 100.0 * static_cast<double>(v.size())));
  return v[std::min(rank == 0 ? 0 : rank - 1, v.size() - 1)];
}

double median_of(const std::vector<double>& v) { return percentile(v, 50.0); }

std::string format_distance(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", d);
  return buf;
}

std::map<std::string, double> error_metrics(const std::vector<double>& errs) {
  return {{"mean_m", mean_of(errs)},
          {"median_m", median_of(errs)},
          {"p95_m", percentile(errs, 95.0)}};
}

}  // namespace

ExperimentReport run_proximity_experiment(const ProximityExperimentConfig& config,
                                          std::uint64_t seed,
                                          std::vector<double>* pooled_raw,
                                          std::vector<double>* pooled_kalman) {
  validate(config.env.model, "env.model");
  if (config.samples_per_distance < 1)
    throw ValidationError("samples_per_distance: must be >= 1");
  if (config.trials < 1) throw ValidationError("trials: must be >= 1");

  std::vector<double> distances = config.distances_m;
  if (distances.empty())
    for (int i = 1; i <= 10; ++i) distances.push_back(0.5 * i);
  for (double d : distances)
    if (!(d > 0.0)) throw ValidationError("distances_m: must be > 0");

  const PathLossModel& model = config.env.model;
  const KalmanParams params = default_params_for_sigma(model.sigma_db);

  std::map<double, std::vector<double>> raw_err, kal_err;
  std::vector<double> all_raw, all_kal;

  for (int trial = 0; trial < config.trials; ++trial) {
    Rng rng(seed + static_cast<std::uint64_t>(trial));
    for (double d : distances) {
      std::vector<RssiSample> trace;
      trace.reserve(config.samples_per_distance);
      for (int i = 0; i < config.samples_per_distance; ++i)
        trace.push_back({"b", static_cast<std::int64_t>(i) * 100,
                         sample_rssi(model, d, rng)});
      for (const auto& s : trace) {
        const double err =
            std::abs(distance_noise_corrected(model, s.rssi_dbm) - d);
        raw_err[d].push_back(err);
        all_raw.push_back(err);
      }
      for (const auto& [ts, estimate] : filter_trace(params, trace)) {
        (void)ts;
        const double err =
            std::abs(distance_noise_corrected(model, estimate) - d);
        kal_err[d].push_back(err);
        all_kal.push_back(err);
      }
    }
  }

  ExperimentReport report;
  report.experiment = "proximity";
  report.environment = config.env.name;
  report.seed = seed;
  report.trials = config.trials;
  report.geometry.beacons.emplace_back("b", Position2D{0.0, 0.0});
  for (double d : distances)
    report.geometry.locations.emplace_back("d=" + format_distance(d),
                                           Position2D{d, 0.0});
  report.geometry.params["samples_per_distance"] =
      static_cast<double>(config.samples_per_distance);
  report.geometry.params["sigma_db"] = model.sigma_db;

  for (double d : distances) {
    report.conditions.push_back(
        {"d=" + format_distance(d) + ",raw", error_metrics(raw_err[d]), {}});
    report.conditions.push_back(
        {"d=" + format_distance(d) + ",kalman", error_metrics(kal_err[d]), {}});
  }
  report.conditions.push_back({"all,raw", error_metrics(all_raw), {}});
  report.conditions.push_back({"all,kalman", error_metrics(all_kal), {}});

  if (pooled_raw != nullptr) *pooled_raw = std::move(all_raw);
  if (pooled_kalman != nullptr) *pooled_kalman = std::move(all_kal);
  return report;
}

std::vector<std::pair<std::string, Position2D>> default_localization_locations(
    double d1_m, double d2_m) {
  const Position2D equidistant{d1_m / 2.0, d2_m / 2.0};  // circumcenter
  const auto midway = [&](Position2D v) -> Position2D {
    return {(v.x + equidistant.x) / 2.0, (v.y + equidistant.y) / 2.0};
  };
  return {{"A", midway({0.0, 0.0})},
          {"B", midway({d1_m, 0.0})},
          {"C", midway({0.0, d2_m})},
          {"D", equidistant}};
}

ExperimentReport run_localization_experiment(
    const LocalizationExperimentConfig& config, std::uint64_t seed) {
  validate(config.env.model, "env.model");
  if (!(config.d1_m > 0.0) || !(config.d2_m > 0.0))
    throw ValidationError("d1/d2: must be > 0");
  if (config.trial_duration_ms <= 0)
    throw ValidationError("trial_duration_ms: must be > 0");
  if (config.trials < 1) throw ValidationError("trials: must be >= 1");

  BeaconMap map;
  map.environment = config.env.model;
  map.beacons = {{"A", 0.0, 0.0, config.adv_interval_ms, 0.0},
                 {"B", config.d1_m, 0.0, config.adv_interval_ms, 0.0},
                 {"C", 0.0, config.d2_m, config.adv_interval_ms, 0.0}};
  validate_beacon_map(map);

  auto locations = config.locations;
  if (locations.empty())
    locations = default_localization_locations(config.d1_m, config.d2_m);

  const std::int64_t rounds = config.trial_duration_ms / config.adv_interval_ms;
  if (rounds < 1) throw ValidationError("trial_duration_ms: shorter than one round");

  std::map<std::string, std::vector<double>> trial_errors;
  for (int trial = 0; trial < config.trials; ++trial) {
    Rng rng(seed + static_cast<std::uint64_t>(trial));
    for (const auto& [label, truth] : locations) {
      std::vector<double> round_errors;
      round_errors.reserve(rounds);
      for (std::int64_t round = 0; round < rounds; ++round) {
        std::vector<RangeObservation> ranges;
        ranges.reserve(map.beacons.size());
        for (const auto& beacon : map.beacons) {
          const double d = std::max(
              distance_between(truth, {beacon.x_m, beacon.y_m}), 1e-3);
          const double rssi = sample_rssi(map.environment, d, rng);
          ranges.push_back(
              {beacon.beacon, distance_noise_corrected(map.environment, rssi)});
        }
        const PositionFix fix = localize(map, ranges);
        round_errors.push_back(position_error(fix.position, truth));
      }
      trial_errors[label].push_back(mean_of(round_errors));
    }
  }

  ExperimentReport report;
  report.experiment = "localization";
  report.environment = config.env.name;
  report.seed = seed;
  report.trials = config.trials;
  for (const auto& beacon : map.beacons)
    report.geometry.beacons.emplace_back(beacon.beacon,
                                         Position2D{beacon.x_m, beacon.y_m});
  report.geometry.locations = locations;
  report.geometry.params = {
      {"d1_m", config.d1_m},
      {"d2_m", config.d2_m},
      {"adv_interval_ms", static_cast<double>(config.adv_interval_ms)},
      {"trial_duration_ms", static_cast<double>(config.trial_duration_ms)}};

  for (const auto& [label, truth] : locations) {
    (void)truth;
    report.conditions.push_back({label, error_metrics(trial_errors[label]), {}});
  }
  return report;
}

ExperimentReport run_detection_experiment(const DetectionExperimentConfig& config,
                                          std::uint64_t seed) {
  validate(config.env.model, "env.model");
  if (config.readings < 1) throw ValidationError("readings: must be >= 1");
  if (config.trials < 1) throw ValidationError("trials: must be >= 1");
  if (!(config.spacing_m > 0.0)) throw ValidationError("spacing_m: must be > 0");

  const double d = config.spacing_m;
  std::vector<std::pair<std::string, Position2D>> beacons = config.beacons;
  std::vector<std::pair<std::string, Position2D>> locations = config.locations;
  switch (config.topology) {
    case DetectionTopology::lab6:
      beacons = {{"A", {0.0, 0.0}}, {"B", {d, 0.0}}, {"C", {2.0 * d, 0.0}}};
      if (locations.empty())
        locations = {{"L1", {0.0, 0.5}}, {"L2", {0.0, 1.0}}, {"L3", {0.0, 1.5}},
                     {"L4", {d, 0.5}},   {"L5", {d, 1.0}},   {"L6", {d, 1.5}}};
      break;
    case DetectionTopology::corridor4:
      beacons = {{"A", {0.0, 0.0}},
                 {"B", {d, 0.0}},
                 {"C", {2.0 * d, 0.0}},
                 {"D", {d, config.corridor_width_m}}};
      if (locations.empty())
        locations = {{"L1", {0.0, 0.5}}, {"L2", {0.0, 1.0}}};
      break;
    case DetectionTopology::custom:
      if (beacons.empty() || locations.empty())
        throw ValidationError("custom topology: beacons and locations required");
      break;
  }

  const PathLossModel& model = config.env.model;
  const KalmanParams params = default_params_for_sigma(model.sigma_db);

  std::map<std::string, std::vector<double>> accuracy_pct;
  std::map<std::string, std::map<std::string, std::int64_t>> counts;

  for (int trial = 0; trial < config.trials; ++trial) {
    Rng rng(seed + static_cast<std::uint64_t>(trial));
    for (const auto& [label, receiver] : locations) {
      // ground truth is the geometrically closest beacon
      std::string truth;
      double best = 0.0;
      std::map<std::string, double> dist;
      for (const auto& [id, pos] : beacons) {
        dist[id] = std::max(distance_between(receiver, pos), kMinSimDistanceM);
        if (truth.empty() || dist[id] < best ||
            (dist[id] == best && id < truth)) {
          truth = id;
          best = dist[id];
        }
      }

      std::map<std::string, KalmanState> filters;
      std::map<std::string, double> running_sum;
      int hits = 0;
      for (int reading = 0; reading < config.readings; ++reading) {
        std::map<BeaconId, double> snap;
        for (const auto& [id, pos] : beacons) {
          (void)pos;
          const double z = sample_rssi(model, dist[id], rng);
          switch (config.reducer) {
            case Reducer::last:
              snap[id] = z;
              break;
            case Reducer::mean:
              running_sum[id] += z;
              snap[id] = running_sum[id] / static_cast<double>(reading + 1);
              break;
            case Reducer::kalman: {
              auto it = filters.find(id);
              if (it == filters.end()) {
                KalmanParams p = params;
                if (p.seed_from_first) p.initial_estimate_dbm = z;
                it = filters.emplace(id, kalman_init(p)).first;
              }
              it->second = kalman_update(it->second, z, params);
              snap[id] = it->second.estimate_dbm;
              break;
            }
          }
        }
        const auto predicted = nearest_beacon(snap);
        counts[label][*predicted] += 1;
        if (*predicted == truth) ++hits;
      }
      accuracy_pct[label].push_back(100.0 * hits /
                                    static_cast<double>(config.readings));
    }
  }

  ExperimentReport report;
  report.experiment = "detection";
  report.environment = config.env.name;
  report.seed = seed;
  report.trials = config.trials;
  report.geometry.beacons = beacons;
  report.geometry.locations = locations;
  report.geometry.params["spacing_m"] = d;
  report.geometry.params["readings"] = static_cast<double>(config.readings);
  if (config.topology == DetectionTopology::corridor4)
    report.geometry.params["corridor_width_m"] = config.corridor_width_m;

  for (const auto& [label, receiver] : locations) {
    (void)receiver;
    ConditionStats stats;
    stats.label = label;
    stats.metrics["accuracy_pct_mean"] = mean_of(accuracy_pct[label]);
    stats.metrics["accuracy_pct_median"] = median_of(accuracy_pct[label]);
    stats.counts = counts[label];
    report.conditions.push_back(std::move(stats));
  }
  return report;
}

}  // namespace blip
