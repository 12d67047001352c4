#include "blip/core.hpp"

#include <cmath>
#include <set>
#include <string>

namespace blip {

void validate(const RssiSample& sample, const std::string& path) {
  if (sample.beacon.empty())
    throw ValidationError(path + ".beacon: empty id");
  if (sample.timestamp_ms < 0)
    throw ValidationError(path + ".timestamp_ms: negative");
  if (!std::isfinite(sample.rssi_dbm))
    throw ValidationError(path + ".rssi_dbm: not finite");
  if (sample.rssi_dbm < kMinRssiDbm || sample.rssi_dbm > kMaxRssiDbm)
    throw ValidationError(path + ".rssi_dbm: outside [-120, 0] dBm");
}

void validate(const PathLossModel& model, const std::string& path) {
  if (!std::isfinite(model.n) || model.n <= 0.0)
    throw ValidationError(path + ".n: must be > 0");
  if (!std::isfinite(model.rssi0_dbm))
    throw ValidationError(path + ".rssi0_dbm: not finite");
  if (!std::isfinite(model.d0_m) || model.d0_m <= 0.0)
    throw ValidationError(path + ".d0_m: must be > 0");
  if (!std::isfinite(model.sigma_db) || model.sigma_db < 0.0)
    throw ValidationError(path + ".sigma_db: must be >= 0");
}

void validate(const BeaconPlacement& placement, const std::string& path) {
  if (placement.beacon.empty())
    throw ValidationError(path + ".id: empty id");
  if (!std::isfinite(placement.x_m) || !std::isfinite(placement.y_m))
    throw ValidationError(path + ": position not finite");
  if (placement.adv_interval_ms < kMinAdvIntervalMs ||
      placement.adv_interval_ms > kMaxAdvIntervalMs)
    throw ValidationError(path + ".adv_interval_ms: out of range [100, 10000]");
  if (!std::isfinite(placement.tx_power_dbm) ||
      placement.tx_power_dbm < kMinTxPowerDbm ||
      placement.tx_power_dbm > kMaxTxPowerDbm)
    throw ValidationError(path + ".tx_power_dbm: out of range [-23, 0]");
}

void validate(const Position2D& position, const std::string& path) {
  if (!std::isfinite(position.x) || !std::isfinite(position.y))
    throw ValidationError(path + ": coordinates must be finite");
}

void validate(const PositionFix& fix, const std::string& path) {
  validate(fix.position, path + ".position");
  if (!std::isfinite(fix.residual_m) || fix.residual_m < 0.0)
    throw ValidationError(path + ".residual_m: must be >= 0");
  if (fix.source_beacons.size() < 3)
    throw ValidationError(path + ".source_beacons: need at least 3");
  std::set<BeaconId> ids(fix.source_beacons.begin(), fix.source_beacons.end());
  if (ids.size() != fix.source_beacons.size())
    throw ValidationError(path + ".source_beacons: duplicate id");
}

const BeaconMap& validate_beacon_map(const BeaconMap& map) {
  validate(map.environment, "environment");
  if (map.beacons.empty())
    throw ValidationError("beacons: empty beacon list");
  std::set<BeaconId> ids;
  for (std::size_t i = 0; i < map.beacons.size(); ++i) {
    const std::string path = "beacons[" + std::to_string(i) + "]";
    validate(map.beacons[i], path);
    if (!ids.insert(map.beacons[i].beacon).second)
      throw ValidationError(path + ".id: duplicate id \"" +
                            map.beacons[i].beacon + "\"");
  }
  return map;
}

const BeaconPlacement* find_beacon(const BeaconMap& map, const BeaconId& id) {
  for (const auto& b : map.beacons)
    if (b.beacon == id) return &b;
  return nullptr;
}

double distance_between(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

}  // namespace blip
