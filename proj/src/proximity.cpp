#include "blip/proximity.hpp"

#include <algorithm>
#include <cmath>

#include "blip/pathloss.hpp"

namespace blip {

const char* to_string(Zone zone) {
  switch (zone) {
    case Zone::Immediate: return "Immediate";
    case Zone::Near: return "Near";
    case Zone::Far: return "Far";
    case Zone::OutOfRange: return "OutOfRange";
  }
  return "OutOfRange";
}

Zone zone_from_string(const std::string& s) {
  if (s == "Immediate") return Zone::Immediate;
  if (s == "Near") return Zone::Near;
  if (s == "Far") return Zone::Far;
  if (s == "OutOfRange") return Zone::OutOfRange;
  throw ParseError("zone: unknown value \"" + s + "\"");
}

const char* to_string(EventKind kind) {
  switch (kind) {
    case EventKind::Enter: return "Enter";
    case EventKind::Exit: return "Exit";
    case EventKind::NearestChanged: return "NearestChanged";
    case EventKind::Notification: return "Notification";
  }
  return "Enter";
}

EventKind event_kind_from_string(const std::string& s) {
  if (s == "Enter") return EventKind::Enter;
  if (s == "Exit") return EventKind::Exit;
  if (s == "NearestChanged") return EventKind::NearestChanged;
  if (s == "Notification") return EventKind::Notification;
  throw ParseError("kind: unknown value \"" + s + "\"");
}

Reducer reducer_from_string(const std::string& s) {
  if (s == "kalman") return Reducer::kalman;
  if (s == "mean") return Reducer::mean;
  if (s == "last") return Reducer::last;
  throw ValidationError("reducer: unknown value \"" + s + "\"");
}

void validate(const ZoneThresholds& thresholds) {
  if (!(thresholds.immediate_max_m > 0.0) ||
      !(thresholds.near_max_m > thresholds.immediate_max_m) ||
      !(thresholds.range_max_m > thresholds.near_max_m))
    throw ValidationError(
        "thresholds: need 0 < immediate_max < near_max < range_max");
}

std::map<BeaconId, double> snapshot(const std::vector<RssiSample>& samples,
                                    std::int64_t window_ms, std::int64_t now_ms,
                                    Reducer reducer, const KalmanParams& params) {
  if (window_ms <= 0) throw ValidationError("window_ms: must be > 0");
  std::map<BeaconId, std::vector<RssiSample>> per_beacon;
  for (const auto& s : samples) {
    validate(s);
    if (s.timestamp_ms > now_ms)
      throw ValidationError("samples: timestamp after now");
    if (s.timestamp_ms > now_ms - window_ms)  // (now - window, now]
      per_beacon[s.beacon].push_back(s);
  }

  std::map<BeaconId, double> out;
  for (auto& [id, group] : per_beacon) {
    std::stable_sort(group.begin(), group.end(),
                     [](const RssiSample& a, const RssiSample& b) {
                       return a.timestamp_ms < b.timestamp_ms;
                     });
    switch (reducer) {
      case Reducer::last:
        out[id] = group.back().rssi_dbm;
        break;
      case Reducer::mean: {
        double sum = 0.0;
        for (const auto& s : group) sum += s.rssi_dbm;
        out[id] = sum / static_cast<double>(group.size());
        break;
      }
      case Reducer::kalman:
        out[id] = filter_trace(params, group).back().second;
        break;
    }
  }
  return out;
}

std::optional<BeaconId> nearest_beacon(const std::map<BeaconId, double>& snap) {
  std::optional<BeaconId> best;
  double best_rssi = 0.0;
  for (const auto& [id, rssi] : snap) {  // id-sorted, so ties keep the smaller id
    if (!best || rssi > best_rssi) {
      best = id;
      best_rssi = rssi;
    }
  }
  return best;
}

Zone classify_zone(double distance_m, const ZoneThresholds& thresholds) {
  validate(thresholds);
  if (!(distance_m >= 0.0))
    throw ValidationError("distance_m: must be >= 0");
  if (distance_m <= thresholds.immediate_max_m) return Zone::Immediate;
  if (distance_m <= thresholds.near_max_m) return Zone::Near;
  if (distance_m <= thresholds.range_max_m) return Zone::Far;
  return Zone::OutOfRange;
}

SessionState make_session(const BeaconMap& map) {
  validate_beacon_map(map);
  SessionState state;
  state.filter_params = default_params_for_sigma(map.environment.sigma_db);
  return state;
}

namespace {

// argmax of filter estimate over in-range tracks; map order breaks ties
// toward the lexicographically smaller id
std::optional<BeaconId> strongest_in_range(
    const std::map<BeaconId, SessionState::Track>& tracks) {
  std::optional<BeaconId> best;
  double best_rssi = 0.0;
  for (const auto& [id, track] : tracks) {
    if (track.zone == Zone::OutOfRange) continue;
    if (!best || track.filter.estimate_dbm > best_rssi) {
      best = id;
      best_rssi = track.filter.estimate_dbm;
    }
  }
  return best;
}

void refresh_nearest(SessionState& state, std::int64_t ts,
                     std::vector<ProximityEvent>& events) {
  const auto next = strongest_in_range(state.tracks);
  if (next == state.nearest) return;
  state.nearest = next;
  if (next)  // losing the last in-range beacon is signalled by its Exit
    events.push_back({EventKind::NearestChanged, *next,
                      state.tracks.at(*next).zone, ts, 0});
}

}  // namespace

std::vector<ProximityEvent> update_session(SessionState& state,
                                           const std::vector<RssiSample>& batch,
                                           std::int64_t now_ms,
                                           const BeaconMap& map,
                                           const ZoneThresholds& thresholds) {
  validate_beacon_map(map);
  validate(thresholds);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    validate(batch[i]);
    if (batch[i].timestamp_ms > now_ms)
      throw ValidationError("batch: timestamp after now");
    if (i > 0 && batch[i].timestamp_ms < batch[i - 1].timestamp_ms)
      throw ValidationError("batch: unsorted timestamps");
    if (find_beacon(map, batch[i].beacon) == nullptr)
      throw ValidationError("batch: unknown beacon id \"" + batch[i].beacon + "\"");
  }
  if (!batch.empty() && batch.front().timestamp_ms < state.watermark_ms)
    throw ValidationError("batch: timestamps behind previously consumed ones");

  std::vector<ProximityEvent> events;

  for (const auto& s : batch) {
    auto [it, created] = state.tracks.try_emplace(s.beacon);
    SessionState::Track& track = it->second;
    if (created) {
      KalmanParams p = state.filter_params;
      if (p.seed_from_first) p.initial_estimate_dbm = s.rssi_dbm;
      track.filter = kalman_init(p);
    }
    track.filter = kalman_update(track.filter, s.rssi_dbm, state.filter_params);
    track.last_seen_ms = s.timestamp_ms;

    const double est_distance =
        distance_noise_corrected(map.environment, track.filter.estimate_dbm);
    const Zone zone = classify_zone(est_distance, thresholds);
    const Zone prev = track.zone;
    if (zone != prev) {
      if (prev == Zone::OutOfRange) {
        track.enter_ms = s.timestamp_ms;
        events.push_back({EventKind::Enter, s.beacon, zone, s.timestamp_ms, 0});
        if (zone <= Zone::Near)
          events.push_back(
              {EventKind::Notification, s.beacon, zone, s.timestamp_ms, 0});
      } else if (zone == Zone::OutOfRange) {
        events.push_back({EventKind::Exit, s.beacon, Zone::OutOfRange,
                          s.timestamp_ms, s.timestamp_ms - track.enter_ms});
      } else if (zone < prev && zone <= Zone::Near) {
        events.push_back(
            {EventKind::Notification, s.beacon, zone, s.timestamp_ms, 0});
      }
      track.zone = zone;
    }
    refresh_nearest(state, s.timestamp_ms, events);
    state.watermark_ms = std::max(state.watermark_ms, s.timestamp_ms);
  }

  // silence sweep: a beacon unheard for strictly more than 3 advertising
  // intervals has left; the exit is stamped at last_seen + 3 intervals
  bool lost_any = false;
  std::int64_t last_exit_ms = 0;
  for (auto it = state.tracks.begin(); it != state.tracks.end();) {
    const BeaconPlacement* placement = find_beacon(map, it->first);
    const std::int64_t deadline =
        it->second.last_seen_ms +
        3 * (placement != nullptr ? placement->adv_interval_ms : kMinAdvIntervalMs);
    if (now_ms > deadline) {
      if (it->second.zone != Zone::OutOfRange) {
        events.push_back({EventKind::Exit, it->first, Zone::OutOfRange, deadline,
                          deadline - it->second.enter_ms});
        lost_any = true;
        last_exit_ms = std::max(last_exit_ms, deadline);
        state.watermark_ms = std::max(state.watermark_ms, deadline);
      }
      it = state.tracks.erase(it);  // stale filter either way
    } else {
      ++it;
    }
  }
  if (lost_any) refresh_nearest(state, last_exit_ms, events);

  // timeout exits are stamped at last_seen + 3 intervals, which can predate
  // later samples of the same batch; keep the emitted stream chronological
  std::stable_sort(events.begin(), events.end(),
                   [](const ProximityEvent& a, const ProximityEvent& b) {
                     return a.timestamp_ms < b.timestamp_ms;
                   });
  return events;
}

}  // namespace blip
