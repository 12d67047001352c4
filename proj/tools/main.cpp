// blip - BLE beacon positioning toolkit: calibration, ranging, localization,
// proximity detection, experiment replication, and visit analytics.

#include <algorithm>
#include <cinttypes>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "blip/analytics.hpp"
#include "blip/core.hpp"
#include "blip/io.hpp"
#include "blip/kalman.hpp"
#include "blip/localization.hpp"
#include "blip/pathloss.hpp"
#include "blip/proximity.hpp"
#include "blip/simulator.hpp"

namespace fs = std::filesystem;

namespace {

// exit codes: 0 ok, 1 usage, 2 data, 3 internal
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

void write_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  blip::io::write_text_file(path, text);
}

// --distances accepts @file, a file path, or inline "from-to:m,..."
std::vector<blip::io::CalibrationSegment> load_segments(const std::string& spec) {
  if (!spec.empty() && spec.front() == '@') {
    std::ifstream in(spec.substr(1), std::ios::binary);
    if (!in) throw blip::ParseError("cannot open segments file: " + spec.substr(1));
    return blip::io::read_segments(in);
  }
  if (fs::exists(spec)) {
    std::ifstream in(spec, std::ios::binary);
    if (!in) throw blip::ParseError("cannot open segments file: " + spec);
    return blip::io::read_segments(in);
  }
  if (spec.find(':') != std::string::npos)
    return blip::io::parse_segments_inline(spec);
  throw blip::ParseError("cannot open segments file: " + spec);
}

// ---- fit --------------------------------------------------------------------

int cmd_fit(const std::string& trace_path, const std::string& distances,
            double d0, const std::string& out) {
  const auto samples = blip::io::read_trace_file(trace_path);
  const auto segments = load_segments(distances);
  const auto points = blip::io::apply_segments(samples, segments);
  const auto fit = blip::fit_path_loss(points, d0);

  std::ostringstream doc;
  blip::io::write_fit_result(doc, fit);
  write_file(out, doc.str());

  std::printf("fit: n=%.6f rssi0=%.6f dBm sigma=%.6f dB rmse=%.6f dB points=%d\n",
              fit.model.n, fit.model.rssi0_dbm, fit.model.sigma_db, fit.rmse_db,
              fit.point_count);
  return kExitOk;
}

// ---- localize ----------------------------------------------------------------

int cmd_localize(const std::string& map_path, const std::string& trace_path,
                 std::int64_t window_ms, const std::string& filter,
                 const std::string& out) {
  const auto map = blip::io::read_beacon_map_file(map_path);
  if (map.beacons.size() < 3)
    throw blip::GeometryError("insufficient anchors: map has fewer than 3 beacons");
  auto samples = blip::io::read_trace_file(trace_path);
  std::stable_sort(samples.begin(), samples.end(),
                   [](const blip::RssiSample& a, const blip::RssiSample& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  const blip::Reducer reducer =
      filter == "kalman" ? blip::Reducer::kalman : blip::Reducer::mean;
  const blip::KalmanParams params =
      blip::default_params_for_sigma(map.environment.sigma_db);

  std::ostringstream csv;
  csv << "window_start_ms,x_m,y_m,residual_m,beacons\n";
  int fixes = 0, skipped = 0;
  if (!samples.empty()) {
    const std::int64_t t0 = samples.front().timestamp_ms;
    const std::int64_t t_last = samples.back().timestamp_ms;
    const std::int64_t windows = (t_last - t0) / window_ms + 1;
    std::vector<blip::RssiSample> seen;  // prefix with timestamps <= now
    std::size_t next = 0;
    for (std::int64_t w = 0; w < windows; ++w) {
      // integer shift makes the window [t0 + w*win, t0 + (w+1)*win)
      const std::int64_t now = t0 - 1 + (w + 1) * window_ms;
      while (next < samples.size() && samples[next].timestamp_ms <= now)
        seen.push_back(samples[next++]);
      const auto snap = blip::snapshot(seen, window_ms, now, reducer, params);
      if (snap.size() < 3) {
        ++skipped;
        continue;
      }
      std::vector<blip::RangeObservation> ranges;
      for (const auto& [id, rssi] : snap)
        ranges.push_back(
            {id, blip::distance_noise_corrected(map.environment, rssi)});
      const auto fix = blip::localize(map, ranges);
      csv << t0 + w * window_ms << ',' << fmt("%.6f", fix.position.x) << ','
          << fmt("%.6f", fix.position.y) << ',' << fmt("%.6f", fix.residual_m)
          << ',';
      for (std::size_t i = 0; i < fix.source_beacons.size(); ++i)
        csv << (i > 0 ? ";" : "") << fix.source_beacons[i];
      csv << '\n';
      ++fixes;
    }
  }
  if (fixes == 0)
    throw blip::GeometryError(
        "insufficient anchors: fewer than 3 beacons heard in every window");
  write_file(out, csv.str());
  std::printf("localize: %d fixes, %d windows skipped (filter=%s, window=%" PRId64
              " ms)\n",
              fixes, skipped, filter.c_str(), window_ms);
  return kExitOk;
}

// ---- detect ---------------------------------------------------------------------

int cmd_detect(const std::string& map_path, const std::string& trace_path,
               const std::string& visitor, std::int64_t batch_ms,
               const std::vector<double>& threshold_values,
               const std::string& out) {
  const auto map = blip::io::read_beacon_map_file(map_path);
  auto samples = blip::io::read_trace_file(trace_path);
  std::stable_sort(samples.begin(), samples.end(),
                   [](const blip::RssiSample& a, const blip::RssiSample& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  blip::ZoneThresholds thresholds;
  if (!threshold_values.empty()) {
    if (threshold_values.size() != 3)
      throw UsageError("--thresholds needs immediate,near,range");
    thresholds = {threshold_values[0], threshold_values[1], threshold_values[2]};
  }

  auto session = blip::make_session(map);
  std::vector<std::pair<blip::VisitorId, blip::ProximityEvent>> events;
  if (!samples.empty()) {
    const std::int64_t t0 = samples.front().timestamp_ms;
    std::int64_t t_last = t0;
    for (const auto& s : samples) t_last = std::max(t_last, s.timestamp_ms);
    std::size_t i = 0;
    for (std::int64_t start = t0; start <= t_last; start += batch_ms) {
      const std::int64_t end = start + batch_ms;  // exclusive
      std::vector<blip::RssiSample> batch;
      while (i < samples.size() && samples[i].timestamp_ms < end)
        batch.push_back(samples[i++]);
      for (auto& e : blip::update_session(session, batch, end - 1, map, thresholds))
        events.emplace_back(visitor, std::move(e));
    }
  }

  std::ostringstream doc;
  blip::io::write_events(doc, events);
  write_file(out, doc.str());

  std::map<std::string, int> kind_counts;
  for (const auto& [v, e] : events) {
    (void)v;
    kind_counts[blip::to_string(e.kind)] += 1;
  }
  std::printf("detect: %zu events (", events.size());
  bool first = true;
  for (const auto& [kind, count] : kind_counts) {
    std::printf("%s%s=%d", first ? "" : ", ", kind.c_str(), count);
    first = false;
  }
  std::printf(")\n");
  return kExitOk;
}

// ---- simulate -------------------------------------------------------------------

blip::Trajectory parse_waypoints(const std::string& text) {
  // "x,y@t;x,y@t;..."
  blip::Trajectory trajectory;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ';')) {
    const auto comma = item.find(',');
    const auto at = item.find('@');
    if (comma == std::string::npos || at == std::string::npos || at < comma)
      throw UsageError("--waypoints: expected x,y@t_ms;... got \"" + item + "\"");
    blip::Waypoint wp;
    try {
      wp.position.x = std::stod(item.substr(0, comma));
      wp.position.y = std::stod(item.substr(comma + 1, at - comma - 1));
      wp.arrival_ms = std::stoll(item.substr(at + 1));
    } catch (const std::exception&) {
      throw UsageError("--waypoints: bad number in \"" + item + "\"");
    }
    trajectory.waypoints.push_back(wp);
  }
  return trajectory;
}

int cmd_simulate_static(const std::string& map_path, double x, double y,
                        std::int64_t duration_ms, std::uint64_t seed,
                        const std::string& out) {
  const auto map = blip::io::read_beacon_map_file(map_path);
  for (const auto& b : map.beacons)
    if (blip::distance_between({x, y}, {b.x_m, b.y_m}) < 1e-3)
      std::fprintf(stderr,
                   "warning: position within 1 mm of beacon \"%s\"; "
                   "distance clamped to 1 mm\n",
                   b.beacon.c_str());
  blip::Rng rng(seed);
  const auto samples = blip::simulate_static(map, {x, y}, duration_ms, rng);
  std::ostringstream doc;
  blip::io::write_trace(doc, samples);
  write_file(out, doc.str());
  std::printf("simulate static: %zu samples over %" PRId64 " ms\n", samples.size(),
              duration_ms);
  return kExitOk;
}

int cmd_simulate_walk(const std::string& map_path, const std::string& waypoints,
                      std::uint64_t seed, const std::string& out) {
  const auto map = blip::io::read_beacon_map_file(map_path);
  const auto trajectory = parse_waypoints(waypoints);
  blip::Rng rng(seed);
  const auto samples = blip::simulate_walk(map, trajectory, rng);
  std::ostringstream doc;
  blip::io::write_trace(doc, samples);
  write_file(out, doc.str());
  std::printf("simulate walk: %zu samples, %zu waypoints\n", samples.size(),
              trajectory.waypoints.size());
  return kExitOk;
}

int cmd_simulate_calibration(const std::string& env_name, double from, double to,
                             double step, std::int64_t per_point_ms,
                             std::int64_t interval_ms, std::uint64_t seed,
                             const std::string& out,
                             const std::string& segments_out) {
  const auto env = blip::profile_by_name(env_name);
  if (!(from > 0.0) || !(to >= from) || !(step > 0.0))
    throw UsageError("calibration grid: need 0 < from <= to and step > 0");

  blip::Rng rng(seed);
  std::vector<blip::RssiSample> samples;
  std::vector<blip::io::CalibrationSegment> segments;
  std::int64_t base = 0;
  for (int i = 0;; ++i) {
    const double d = from + step * i;
    if (d > to + 1e-9) break;
    segments.push_back({base, base + per_point_ms, d});
    for (std::int64_t t = 0; t < per_point_ms; t += interval_ms)
      samples.push_back({"b", base + t, blip::sample_rssi(env.model, d, rng)});
    base += per_point_ms;
  }

  std::ostringstream trace_doc;
  blip::io::write_trace(trace_doc, samples);
  write_file(out, trace_doc.str());
  if (!segments_out.empty()) {
    std::ostringstream seg_doc;
    blip::io::write_segments(seg_doc, segments);
    write_file(segments_out, seg_doc.str());
  }
  std::printf("simulate calibration: %zu samples at %zu distances (%s)\n",
              samples.size(), segments.size(), env.name.c_str());
  return kExitOk;
}

// ---- replicate ---------------------------------------------------------------------

std::string report_json(const blip::ExperimentReport& report) {
  std::ostringstream doc;
  blip::io::write_report(doc, report);
  return doc.str();
}

std::string cdf_csv(std::vector<double> errors) {
  std::sort(errors.begin(), errors.end());
  std::ostringstream csv;
  csv << "error_m,cumulative_probability\n";
  const double count = static_cast<double>(errors.size());
  for (std::size_t i = 0; i < errors.size(); ++i)
    csv << fmt("%.6f", errors[i]) << ','
        << fmt("%.6f", static_cast<double>(i + 1) / count) << '\n';
  return csv.str();
}

int cmd_replicate(const std::string& experiment, const std::string& env_name,
                  std::uint64_t seed, const std::string& out_dir, int trials,
                  int readings, std::int64_t duration_ms) {
  const auto env = blip::profile_by_name(env_name);
  fs::create_directories(out_dir);
  const auto out = [&](const std::string& name) { return out_dir + "/" + name; };

  if (experiment == "proximity") {
    blip::ProximityExperimentConfig config;
    config.env = env;
    config.samples_per_distance = readings;
    config.trials = trials;
    std::vector<double> raw, kalman;
    const auto report = blip::run_proximity_experiment(config, seed, &raw, &kalman);
    write_file(out("report.json"), report_json(report));
    write_file(out("cdf_raw.csv"), cdf_csv(raw));
    write_file(out("cdf_kalman.csv"), cdf_csv(kalman));
    std::ostringstream csv;
    csv << "condition,mean_m,median_m,p95_m\n";
    for (const auto& c : report.conditions)
      csv << c.label << ',' << fmt("%.6f", c.metrics.at("mean_m")) << ','
          << fmt("%.6f", c.metrics.at("median_m")) << ','
          << fmt("%.6f", c.metrics.at("p95_m")) << '\n';
    write_file(out("conditions.csv"), csv.str());
    std::printf("replicate proximity (%s): %zu conditions -> %s\n",
                env.name.c_str(), report.conditions.size(), out_dir.c_str());
    return kExitOk;
  }

  if (experiment == "localization") {
    const std::vector<std::pair<double, double>> topologies = {{1.0, 2.0},
                                                               {3.0, 4.0}};
    std::ostringstream csv;
    csv << "d1_m,d2_m,location,x_m,y_m,mean_m,median_m,p95_m\n";
    for (std::size_t i = 0; i < topologies.size(); ++i) {
      blip::LocalizationExperimentConfig config;
      config.env = env;
      config.d1_m = topologies[i].first;
      config.d2_m = topologies[i].second;
      config.trial_duration_ms = duration_ms;
      config.trials = trials;
      const auto report = blip::run_localization_experiment(config, seed);
      write_file(out("report_topology" + std::to_string(i + 1) + ".json"),
                 report_json(report));
      for (const auto& c : report.conditions) {
        blip::Position2D p;
        for (const auto& [label, pos] : report.geometry.locations)
          if (label == c.label) p = pos;
        csv << fmt("%g", config.d1_m) << ',' << fmt("%g", config.d2_m) << ','
            << c.label << ',' << fmt("%.6f", p.x) << ',' << fmt("%.6f", p.y)
            << ',' << fmt("%.6f", c.metrics.at("mean_m")) << ','
            << fmt("%.6f", c.metrics.at("median_m")) << ','
            << fmt("%.6f", c.metrics.at("p95_m")) << '\n';
      }
    }
    write_file(out("errors.csv"), csv.str());
    std::printf("replicate localization (%s): 2 topologies x 4 locations -> %s\n",
                env.name.c_str(), out_dir.c_str());
    return kExitOk;
  }

  if (experiment == "detection") {
    const std::vector<double> spacings = {1.0, 1.5, 2.0};
    std::ostringstream csv;
    bool header_written = false;
    for (double d : spacings) {
      blip::DetectionExperimentConfig config;
      config.env = env;
      config.topology = env.name == "corridor" ? blip::DetectionTopology::corridor4
                                               : blip::DetectionTopology::lab6;
      config.spacing_m = d;
      config.readings = readings;
      config.trials = trials;
      const auto report = blip::run_detection_experiment(config, seed);
      write_file(out("report_d" + fmt("%g", d) + ".json"), report_json(report));
      if (!header_written) {
        csv << "d_m,location";
        for (const auto& [id, pos] : report.geometry.beacons) {
          (void)pos;
          csv << ",count_" << id;
        }
        csv << ",accuracy_pct_median,accuracy_pct_mean\n";
        header_written = true;
      }
      for (const auto& c : report.conditions) {
        csv << fmt("%g", d) << ',' << c.label;
        for (const auto& [id, pos] : report.geometry.beacons) {
          (void)pos;
          const auto it = c.counts.find(id);
          csv << ',' << (it != c.counts.end() ? it->second : 0);
        }
        csv << ',' << fmt("%.6f", c.metrics.at("accuracy_pct_median")) << ','
            << fmt("%.6f", c.metrics.at("accuracy_pct_mean")) << '\n';
      }
    }
    write_file(out("accuracy.csv"), csv.str());
    std::printf("replicate detection (%s): %zu spacings -> %s\n", env.name.c_str(),
                spacings.size(), out_dir.c_str());
    return kExitOk;
  }

  throw UsageError("unknown experiment \"" + experiment +
                   "\" (expected proximity|localization|detection)");
}

// ---- analyze -----------------------------------------------------------------------

int cmd_analyze(const std::string& events_path, std::int64_t from_ms,
                std::int64_t to_ms, const std::string& visitor,
                const std::string& catalog_arg, int limit,
                const std::string& out) {
  if (from_ms >= to_ms) throw UsageError("--from must be < --to");
  std::ifstream in(events_path, std::ios::binary);
  if (!in) throw blip::ParseError("cannot open events file: " + events_path);
  const auto events = blip::io::read_events(in);

  blip::EventStore store;
  std::map<blip::VisitorId, std::vector<blip::ProximityEvent>> per_visitor;
  for (const auto& [v, e] : events) per_visitor[v].push_back(e);
  for (const auto& [v, list] : per_visitor) store.ingest(v, list);

  const auto report = blip::retention_report(store, from_ms, to_ms);

  std::ostringstream doc;
  blip::io::write_retention_report(doc, report);
  std::string text = doc.str();

  std::int64_t total_visits = 0, total_dwell = 0;
  for (const auto& [id, r] : report.beacons) {
    (void)id;
    total_visits += r.visit_count;
    total_dwell += r.total_dwell_ms;
  }
  std::printf("analyze: %" PRId64 " completed visits, %" PRId64
              " ms total dwell, %zu beacons\n",
              total_visits, total_dwell, report.beacons.size());

  if (!visitor.empty()) {
    const auto path = blip::visitor_path(store, visitor);
    std::vector<blip::BeaconId> catalog;
    if (!catalog_arg.empty()) {
      std::stringstream ss(catalog_arg);
      std::string id;
      while (std::getline(ss, id, ',')) catalog.push_back(id);
    } else {
      std::set<blip::BeaconId> seen;
      for (const auto& [v, e] : store.records()) {
        (void)v;
        seen.insert(e.beacon);
      }
      catalog.assign(seen.begin(), seen.end());
    }
    const auto picks = blip::recommend(store, visitor, catalog, limit);

    nlohmann::json extra;
    extra["visitor"] = visitor;
    extra["path"] = nlohmann::json::array();
    for (const auto& v : path)
      extra["path"].push_back({{"beacon", v.beacon},
                               {"enter_ms", v.enter_ms},
                               {"dwell_ms", v.dwell_ms}});
    extra["recommendations"] = picks;
    nlohmann::json combined = nlohmann::json::parse(text);
    combined["visitor_report"] = extra;
    text = combined.dump(2) + "\n";
    std::printf("analyze: visitor %s: %zu visits, %zu recommendations\n",
                visitor.c_str(), path.size(), picks.size());
  }
  write_file(out, text);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BLE beacon positioning toolkit"};
  app.require_subcommand(1);

  // fit
  std::string fit_trace, fit_distances, fit_out;
  double fit_d0 = 1.0;
  auto* fit = app.add_subcommand("fit", "Fit a path loss model to a trace");
  fit->add_option("--trace", fit_trace, "RSSI trace CSV")->required();
  fit->add_option("--distances", fit_distances,
                  "segments CSV (or @file, or inline from-to:m,...)")
      ->required();
  fit->add_option("--d0", fit_d0, "reference distance (m)");
  fit->add_option("--out", fit_out, "output model JSON");

  // localize
  std::string loc_map, loc_trace, loc_filter = "kalman", loc_out;
  std::int64_t loc_window = 1000;
  auto* localize = app.add_subcommand("localize", "Trilaterate a trace");
  localize->add_option("--map", loc_map, "beacon map JSON")->required();
  localize->add_option("--trace", loc_trace, "RSSI trace CSV")->required();
  localize->add_option("--window", loc_window, "aggregation window (ms)");
  localize->add_option("--filter", loc_filter, "kalman|raw")
      ->check(CLI::IsMember({"kalman", "raw"}));
  localize->add_option("--out", loc_out, "output fixes CSV");

  // detect
  std::string det_map, det_trace, det_visitor = "visitor", det_out;
  std::int64_t det_batch = 1000;
  std::vector<double> det_thresholds;
  auto* detect = app.add_subcommand("detect", "Replay a trace into proximity events");
  detect->add_option("--map", det_map, "beacon map JSON")->required();
  detect->add_option("--trace", det_trace, "RSSI trace CSV")->required();
  detect->add_option("--visitor", det_visitor, "visitor id for emitted events");
  detect->add_option("--batch", det_batch, "ingestion batch (ms)");
  detect->add_option("--thresholds", det_thresholds,
                     "zone cutoffs: immediate near range (m)")
      ->expected(3);
  detect->add_option("--out", det_out, "output events JSONL");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate synthetic traces");
  simulate->require_subcommand(1);
  std::string sim_map, sim_out;
  double sim_x = 0.0, sim_y = 0.0;
  std::int64_t sim_duration = 10000;
  std::uint64_t sim_seed = 1;
  auto* sim_static = simulate->add_subcommand("static", "Stationary receiver");
  sim_static->add_option("--map", sim_map, "beacon map JSON")->required();
  sim_static->add_option("--x", sim_x, "receiver x (m)")->required();
  sim_static->add_option("--y", sim_y, "receiver y (m)")->required();
  sim_static->add_option("--duration", sim_duration, "duration (ms)");
  sim_static->add_option("--seed", sim_seed, "rng seed");
  sim_static->add_option("--out", sim_out, "output trace CSV");

  std::string walk_map, walk_waypoints, walk_out;
  std::uint64_t walk_seed = 1;
  auto* sim_walk = simulate->add_subcommand("walk", "Moving receiver");
  sim_walk->add_option("--map", walk_map, "beacon map JSON")->required();
  sim_walk->add_option("--waypoints", walk_waypoints, "x,y@t_ms;x,y@t_ms;...")
      ->required();
  sim_walk->add_option("--seed", walk_seed, "rng seed");
  sim_walk->add_option("--out", walk_out, "output trace CSV");

  std::string cal_env = "lab", cal_out, cal_segments_out;
  double cal_from = 0.2, cal_to = 5.0, cal_step = 0.2;
  std::int64_t cal_per_point = 60000, cal_interval = 100;
  std::uint64_t cal_seed = 1;
  auto* sim_cal =
      simulate->add_subcommand("calibration", "Grid measurement campaign");
  sim_cal->add_option("--env", cal_env, "lab|corridor");
  sim_cal->add_option("--from", cal_from, "first distance (m)");
  sim_cal->add_option("--to", cal_to, "last distance (m)");
  sim_cal->add_option("--step", cal_step, "grid step (m)");
  sim_cal->add_option("--per-point", cal_per_point, "dwell per distance (ms)");
  sim_cal->add_option("--interval", cal_interval, "advertising interval (ms)");
  sim_cal->add_option("--seed", cal_seed, "rng seed");
  sim_cal->add_option("--out", cal_out, "output trace CSV");
  sim_cal->add_option("--segments-out", cal_segments_out, "output segments CSV");

  // replicate
  std::string rep_experiment, rep_env = "lab", rep_out = "replicate-out";
  std::uint64_t rep_seed = 1;
  int rep_trials = 20, rep_readings = 100;
  std::int64_t rep_duration = 60000;
  auto* replicate =
      app.add_subcommand("replicate", "Re-run a measurement campaign in simulation");
  replicate->add_option("experiment", rep_experiment,
                        "proximity|localization|detection")
      ->required();
  replicate->add_option("--env", rep_env, "lab|corridor");
  replicate->add_option("--seed", rep_seed, "rng seed");
  replicate->add_option("--out", rep_out, "output directory");
  replicate->add_option("--trials", rep_trials, "seeded trials per condition");
  replicate->add_option("--readings", rep_readings, "readings per condition");
  replicate->add_option("--duration", rep_duration,
                        "localization trial duration (ms)");

  // analyze
  std::string an_events, an_visitor, an_catalog, an_out;
  std::int64_t an_from = 0, an_to = 0;
  int an_limit = 5;
  auto* analyze = app.add_subcommand("analyze", "Retention analytics over events");
  analyze->add_option("--events", an_events, "events JSONL")->required();
  analyze->add_option("--from", an_from, "interval start (ms)")->required();
  analyze->add_option("--to", an_to, "interval end (ms)")->required();
  analyze->add_option("--visitor", an_visitor, "visitor id for path/recommendations");
  analyze->add_option("--catalog", an_catalog, "comma-separated beacon catalog");
  analyze->add_option("--limit", an_limit, "max recommendations");
  analyze->add_option("--out", an_out, "output report JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // 0
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (fit->parsed()) return cmd_fit(fit_trace, fit_distances, fit_d0, fit_out);
    if (localize->parsed())
      return cmd_localize(loc_map, loc_trace, loc_window, loc_filter, loc_out);
    if (detect->parsed())
      return cmd_detect(det_map, det_trace, det_visitor, det_batch,
                        det_thresholds, det_out);
    if (simulate->parsed()) {
      if (sim_static->parsed())
        return cmd_simulate_static(sim_map, sim_x, sim_y, sim_duration, sim_seed,
                                   sim_out);
      if (sim_walk->parsed())
        return cmd_simulate_walk(walk_map, walk_waypoints, walk_seed, walk_out);
      if (sim_cal->parsed())
        return cmd_simulate_calibration(cal_env, cal_from, cal_to, cal_step,
                                        cal_per_point, cal_interval, cal_seed,
                                        cal_out, cal_segments_out);
    }
    if (replicate->parsed())
      return cmd_replicate(rep_experiment, rep_env, rep_seed, rep_out, rep_trials,
                           rep_readings, rep_duration);
    if (analyze->parsed())
      return cmd_analyze(an_events, an_from, an_to, an_visitor, an_catalog,
                         an_limit, an_out);
    std::cerr << "usage error: no command\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const blip::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
