#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blip/core.hpp"
#include "blip/kalman.hpp"

namespace blip {

// Ordered by distance: Immediate < Near < Far < OutOfRange.
enum class Zone { Immediate = 0, Near = 1, Far = 2, OutOfRange = 3 };

const char* to_string(Zone zone);
Zone zone_from_string(const std::string& s);

struct ZoneThresholds {
  double immediate_max_m = 0.5;
  double near_max_m = 4.0;
  double range_max_m = 10.0;
};

void validate(const ZoneThresholds& thresholds);

enum class EventKind { Enter, Exit, NearestChanged, Notification };

const char* to_string(EventKind kind);
EventKind event_kind_from_string(const std::string& s);

struct ProximityEvent {
  EventKind kind = EventKind::Enter;
  BeaconId beacon;
  Zone zone = Zone::OutOfRange;
  std::int64_t timestamp_ms = 0;
  std::int64_t dwell_ms = 0;  // Exit only: exit minus matching Enter timestamp

  bool operator==(const ProximityEvent&) const = default;
};

enum class Reducer { kalman, mean, last };

Reducer reducer_from_string(const std::string& s);

// One aggregate per beacon with at least one sample in (now - window, now].
// The kalman reducer runs a fresh filter over each beacon's in-window
// samples (seeded from the first) and reports the final estimate.
std::map<BeaconId, double> snapshot(const std::vector<RssiSample>& samples,
                                    std::int64_t window_ms, std::int64_t now_ms,
                                    Reducer reducer,
                                    const KalmanParams& params = {});

// Beacon with the strongest (least negative) aggregate; ties broken by
// lexicographically smaller id; nullopt on an empty snapshot.
std::optional<BeaconId> nearest_beacon(const std::map<BeaconId, double>& snap);

// Boundaries inclusive on the nearer zone. Throws on negative distance.
Zone classify_zone(double distance_m, const ZoneThresholds& thresholds);

// Per-visitor tracking state. Single-writer ordered ingestion; distinct
// sessions are independent.
struct SessionState {
  struct Track {
    KalmanState filter;
    Zone zone = Zone::OutOfRange;
    std::int64_t enter_ms = 0;      // valid while zone != OutOfRange
    std::int64_t last_seen_ms = 0;  // timestamp of newest consumed sample
  };

  KalmanParams filter_params;
  std::map<BeaconId, Track> tracks;
  std::optional<BeaconId> nearest;
  std::int64_t watermark_ms = -1;  // newest consumed timestamp
};

// Filter parameters derived from the map's environment sigma.
SessionState make_session(const BeaconMap& map);

// Consume one ordered batch, advance per-beacon filters, classify zones
// from noise-corrected distances, and emit events:
//   Enter          on OutOfRange -> any zone
//   Notification   on entering Near or Immediate from a farther zone
//   Exit           on any zone -> OutOfRange, or after 3x adv_interval of
//                  silence (stamped at last_seen + 3x interval); dwell is
//                  exit minus Enter timestamp
//   NearestChanged when the strongest in-range beacon changes
// Batch timestamps must be sorted, <= now, and >= the session watermark.
std::vector<ProximityEvent> update_session(SessionState& state,
                                           const std::vector<RssiSample>& batch,
                                           std::int64_t now_ms,
                                           const BeaconMap& map,
                                           const ZoneThresholds& thresholds = {});

}  // namespace blip
