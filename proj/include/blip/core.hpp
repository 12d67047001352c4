#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blip/error.hpp"

namespace blip {

// Opaque beacon identifier; non-empty, unique within a BeaconMap.
using BeaconId = std::string;

constexpr double kMinRssiDbm = -120.0;
constexpr double kMaxRssiDbm = 0.0;
constexpr std::int64_t kMinAdvIntervalMs = 100;
constexpr std::int64_t kMaxAdvIntervalMs = 10000;
constexpr double kMinTxPowerDbm = -23.0;
constexpr double kMaxTxPowerDbm = 0.0;

// One received advertisement.
struct RssiSample {
  BeaconId beacon;
  std::int64_t timestamp_ms = 0;  // since epoch, >= 0
  double rssi_dbm = 0.0;          // finite, within [-120, 0]
};

// Log-distance path loss parameters calibrated for one environment.
//   RSSI(d) = rssi0 - 10 n log10(d / d0) + v,  v ~ N(0, sigma^2)
struct PathLossModel {
  double n = 2.0;            // path loss exponent, > 0
  double rssi0_dbm = -60.0;  // expected RSSI at the reference distance
  double d0_m = 1.0;         // reference distance, > 0
  double sigma_db = 0.0;     // shadowing standard deviation, >= 0
};

struct BeaconPlacement {
  BeaconId beacon;
  double x_m = 0.0;
  double y_m = 0.0;
  std::int64_t adv_interval_ms = 100;  // [100, 10000]
  double tx_power_dbm = 0.0;           // [-23, 0]
};

struct BeaconMap {
  std::vector<BeaconPlacement> beacons;  // non-empty, ids unique
  PathLossModel environment;
};

struct Position2D {
  double x = 0.0;  // meters
  double y = 0.0;
};

struct PositionFix {
  Position2D position;
  double residual_m = 0.0;               // RMS range inconsistency, >= 0
  std::vector<BeaconId> source_beacons;  // distinct, length >= 3
};

// Each throws ValidationError naming the violated field. `path` prefixes
// the field path in messages.
void validate(const RssiSample& sample, const std::string& path = "sample");
void validate(const PathLossModel& model, const std::string& path = "environment");
void validate(const BeaconPlacement& placement, const std::string& path = "beacon");
void validate(const Position2D& position, const std::string& path = "position");
void validate(const PositionFix& fix, const std::string& path = "fix");

// Returns the map unchanged iff every invariant holds (idempotent).
const BeaconMap& validate_beacon_map(const BeaconMap& map);

// nullptr when the id is not in the map.
const BeaconPlacement* find_beacon(const BeaconMap& map, const BeaconId& id);

double distance_between(const Position2D& a, const Position2D& b);

}  // namespace blip
