#include "blip/analytics.hpp"

#include <algorithm>

namespace blip {

EventStore::Key EventStore::key(const VisitorId& v, const ProximityEvent& e) {
  return {v, static_cast<int>(e.kind), e.beacon, static_cast<int>(e.zone),
          e.timestamp_ms, e.dwell_ms};
}

void EventStore::ingest(const VisitorId& visitor,
                        const std::vector<ProximityEvent>& events) {
  if (visitor.empty()) throw ValidationError("visitor: empty id");

  // validate the whole batch against staged state, then commit
  auto staged_last = last_ts_;
  auto staged_open = open_visits_;
  std::vector<ProximityEvent> to_append;

  for (const auto& e : events) {
    if (e.beacon.empty()) throw ValidationError("event.beacon: empty id");
    if (e.timestamp_ms < 0) throw ValidationError("event.timestamp_ms: negative");
    if (seen_.count(key(visitor, e)) > 0) continue;  // at-least-once redelivery
    auto last = staged_last.find(visitor);
    if (last != staged_last.end() && e.timestamp_ms < last->second)
      throw ValidationError("events: timestamps behind prior ingestion");

    const auto visit_key = std::make_pair(visitor, e.beacon);
    if (e.kind == EventKind::Enter) {
      if (staged_open.count(visit_key) > 0)
        throw ValidationError("events: Enter for \"" + e.beacon +
                              "\" while a visit is open");
      staged_open[visit_key] = e.timestamp_ms;
    } else if (e.kind == EventKind::Exit) {
      auto open = staged_open.find(visit_key);
      if (open == staged_open.end())
        throw ValidationError("events: orphan exit for \"" + e.beacon + "\"");
      if (e.dwell_ms != e.timestamp_ms - open->second)
        throw ValidationError("events: Exit dwell inconsistent with Enter");
      staged_open.erase(open);
    }
    staged_last[visitor] = e.timestamp_ms;
    to_append.push_back(e);
  }

  for (const auto& e : to_append) {
    seen_.insert(key(visitor, e));
    records_.emplace_back(visitor, e);
  }
  last_ts_ = std::move(staged_last);
  open_visits_ = std::move(staged_open);
  visitors_.insert(visitor);
}

RetentionReport retention_report(const EventStore& store, std::int64_t from_ms,
                                 std::int64_t to_ms) {
  if (from_ms >= to_ms) throw ValidationError("interval: from must be < to");

  RetentionReport report;
  report.from_ms = from_ms;
  report.to_ms = to_ms;

  std::map<std::pair<VisitorId, BeaconId>, std::int64_t> open;
  for (const auto& [visitor, e] : store.records()) {
    if (e.kind == EventKind::Enter) {
      open[{visitor, e.beacon}] = e.timestamp_ms;
    } else if (e.kind == EventKind::Exit) {
      const std::int64_t enter_ms = open.at({visitor, e.beacon});
      open.erase({visitor, e.beacon});
      if (enter_ms < from_ms || enter_ms >= to_ms) continue;
      auto& r = report.beacons[e.beacon];
      r.visit_count += 1;
      r.total_dwell_ms += e.dwell_ms;
      r.dwell_ms_by_hour[(enter_ms / 3600000) % 24] += e.dwell_ms;
    }
  }
  for (const auto& [visit_key, enter_ms] : open)
    if (enter_ms >= from_ms && enter_ms < to_ms)
      report.beacons[visit_key.second].open_visits += 1;

  for (auto& [id, r] : report.beacons) {
    (void)id;
    r.mean_dwell_ms = r.visit_count > 0 ? static_cast<double>(r.total_dwell_ms) /
                                              static_cast<double>(r.visit_count)
                                        : 0.0;
  }
  return report;
}

std::vector<Visit> visitor_path(const EventStore& store, const VisitorId& visitor) {
  if (!store.has_visitor(visitor))
    throw ValidationError("visitor: unknown id \"" + visitor + "\"");

  std::map<BeaconId, std::int64_t> open;
  std::vector<Visit> path;
  for (const auto& [v, e] : store.records()) {
    if (v != visitor) continue;
    if (e.kind == EventKind::Enter) {
      open[e.beacon] = e.timestamp_ms;
    } else if (e.kind == EventKind::Exit) {
      path.push_back({e.beacon, open.at(e.beacon), e.dwell_ms});
      open.erase(e.beacon);
    }
  }
  std::sort(path.begin(), path.end(), [](const Visit& a, const Visit& b) {
    if (a.enter_ms != b.enter_ms) return a.enter_ms < b.enter_ms;
    return a.beacon < b.beacon;
  });
  return path;
}

std::vector<BeaconId> recommend(const EventStore& store, const VisitorId& visitor,
                                const std::vector<BeaconId>& catalog, int limit) {
  if (limit < 1) throw ValidationError("limit: must be >= 1");
  if (catalog.empty()) throw ValidationError("catalog: empty");

  std::set<BeaconId> visited;
  std::map<BeaconId, std::int64_t> dwell;  // popularity across all visitors
  for (const auto& [v, e] : store.records()) {
    if (e.kind != EventKind::Exit) continue;
    dwell[e.beacon] += e.dwell_ms;
    if (v == visitor) visited.insert(e.beacon);
  }

  std::vector<BeaconId> candidates;
  for (const auto& id : catalog)
    if (visited.count(id) == 0 &&
        std::find(candidates.begin(), candidates.end(), id) == candidates.end())
      candidates.push_back(id);

  std::sort(candidates.begin(), candidates.end(),
            [&](const BeaconId& a, const BeaconId& b) {
              const std::int64_t da = dwell.count(a) ? dwell.at(a) : 0;
              const std::int64_t db = dwell.count(b) ? dwell.at(b) : 0;
              if (da != db) return da > db;
              return a < b;
            });
  if (candidates.size() > static_cast<std::size_t>(limit))
    candidates.resize(static_cast<std::size_t>(limit));
  return candidates;
}

}  // namespace blip
