#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "blip/core.hpp"
#include "blip/proximity.hpp"

namespace blip {

using Rng = std::mt19937_64;

struct EnvironmentProfile {
  std::string name;  // laboratory | corridor | custom
  PathLossModel model;
};

EnvironmentProfile laboratory_profile();
EnvironmentProfile corridor_profile();
// Accepts "lab", "laboratory", "corridor"; throws ValidationError otherwise.
EnvironmentProfile profile_by_name(const std::string& name);

struct Waypoint {
  Position2D position;
  std::int64_t arrival_ms = 0;
};

// Piecewise-linear path; arrival times strictly increasing, >= 1 waypoint.
struct Trajectory {
  std::vector<Waypoint> waypoints;
};

void validate(const Trajectory& trajectory);

// Interpolated position at t, clamped to the first/last waypoint outside
// the waypoint span.
Position2D position_at(const Trajectory& trajectory, std::int64_t t_ms);

// Named condition of an experiment with its summary statistics and, for
// detection runs, per-beacon classification counts.
struct ConditionStats {
  std::string label;
  std::map<std::string, double> metrics;
  std::map<std::string, std::int64_t> counts;
};

// Geometry echoed into every report so results are interpretable without
// the generating config.
struct GeometryEcho {
  std::vector<std::pair<std::string, Position2D>> beacons;
  std::vector<std::pair<std::string, Position2D>> locations;
  std::map<std::string, double> params;
};

struct ExperimentReport {
  std::string experiment;
  std::string environment;
  std::uint64_t seed = 0;
  int trials = 0;  // > 0
  GeometryEcho geometry;
  std::vector<ConditionStats> conditions;
};

// predict_rssi(model, distance) + v, v ~ N(0, sigma^2). Throws on
// distance <= 0.
double sample_rssi(const PathLossModel& model, double distance_m, Rng& rng);

// One sample per beacon per advertising tick (t = 0, interval, ... < duration),
// interleaved chronologically. Distances below 1 mm are clamped to 1 mm
// (receiver sitting on a beacon).
std::vector<RssiSample> simulate_static(const BeaconMap& map,
                                        const Position2D& position,
                                        std::int64_t duration_ms, Rng& rng);

// Same tick scheme over [0, last waypoint arrival), sampling the
// interpolated position at each tick. A single-waypoint trajectory
// reduces exactly to simulate_static.
std::vector<RssiSample> simulate_walk(const BeaconMap& map,
                                      const Trajectory& trajectory, Rng& rng);

// ---- experiment harnesses -------------------------------------------------

struct ProximityExperimentConfig {
  EnvironmentProfile env = laboratory_profile();
  std::vector<double> distances_m;  // empty -> 0.5, 1.0, ..., 5.0
  int samples_per_distance = 100;
  int trials = 20;
};

// Distance estimation at fixed ranges through the raw and Kalman-filtered
// pipelines. Conditions: one per (distance, pipeline) plus pooled
// "all,raw" / "all,kalman"; metrics mean_m, median_m, p95_m. Optional
// out-params collect the pooled absolute errors for CDF plotting.
ExperimentReport run_proximity_experiment(const ProximityExperimentConfig& config,
                                          std::uint64_t seed,
                                          std::vector<double>* pooled_raw = nullptr,
                                          std::vector<double>* pooled_kalman = nullptr);

struct LocalizationExperimentConfig {
  EnvironmentProfile env = laboratory_profile();
  double d1_m = 1.0;  // triangle legs: beacons at (0,0), (d1,0), (0,d2)
  double d2_m = 2.0;
  // empty -> defaults: A/B/C midway between each beacon and the
  // equidistant point D (the circumcenter).
  std::vector<std::pair<std::string, Position2D>> locations;
  std::int64_t trial_duration_ms = 60000;
  std::int64_t adv_interval_ms = 100;
  int trials = 20;
};

std::vector<std::pair<std::string, Position2D>> default_localization_locations(
    double d1_m, double d2_m);

// Right-triangle topology; per advertising round a raw (unfiltered) fix is
// trilaterated from the three fresh readings, and a trial's error is the
// mean position_error over rounds. Conditions: one per location; metrics
// mean_m, median_m, p95_m over trials.
ExperimentReport run_localization_experiment(
    const LocalizationExperimentConfig& config, std::uint64_t seed);

enum class DetectionTopology { lab6, corridor4, custom };

struct DetectionExperimentConfig {
  EnvironmentProfile env = laboratory_profile();
  DetectionTopology topology = DetectionTopology::lab6;
  double spacing_m = 1.0;        // inter-beacon distance d
  double corridor_width_m = 2.3; // corridor4 only
  // custom topology / locations; empty -> topology defaults
  std::vector<std::pair<std::string, Position2D>> beacons;
  std::vector<std::pair<std::string, Position2D>> locations;
  int readings = 100;
  Reducer reducer = Reducer::last;  // "last" classifies each reading alone
  int trials = 20;
};

// Nearest-beacon classification accuracy per location. Conditions: one per
// location; metrics accuracy_pct_mean / _median over trials; counts hold
// per-beacon classifications summed over trials.
ExperimentReport run_detection_experiment(const DetectionExperimentConfig& config,
                                          std::uint64_t seed);

}  // namespace blip
