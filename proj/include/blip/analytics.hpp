#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "blip/proximity.hpp"

namespace blip {

// Opaque visitor identifier; non-empty.
using VisitorId = std::string;

// Append-only proximity event log. Ingestion validates per-visitor
// ordering and Enter/Exit alternation per (visitor, beacon); exact
// duplicate records are dropped (at-least-once delivery upstream).
class EventStore {
 public:
  void ingest(const VisitorId& visitor, const std::vector<ProximityEvent>& events);

  const std::vector<std::pair<VisitorId, ProximityEvent>>& records() const {
    return records_;
  }
  bool has_visitor(const VisitorId& visitor) const {
    return visitors_.count(visitor) > 0;
  }
  std::size_t size() const { return records_.size(); }

 private:
  using Key = std::tuple<VisitorId, int, BeaconId, int, std::int64_t, std::int64_t>;
  static Key key(const VisitorId& v, const ProximityEvent& e);

  std::vector<std::pair<VisitorId, ProximityEvent>> records_;
  std::set<Key> seen_;
  std::set<VisitorId> visitors_;
  std::map<VisitorId, std::int64_t> last_ts_;
  std::map<std::pair<VisitorId, BeaconId>, std::int64_t> open_visits_;  // enter ts
};

struct BeaconRetention {
  std::int64_t visit_count = 0;
  std::int64_t total_dwell_ms = 0;
  double mean_dwell_ms = 0.0;
  std::int64_t open_visits = 0;  // Enter in range but no Exit yet
  std::array<std::int64_t, 24> dwell_ms_by_hour{};  // keyed by Enter hour-of-day
};

struct RetentionReport {
  std::int64_t from_ms = 0;
  std::int64_t to_ms = 0;
  std::map<BeaconId, BeaconRetention> beacons;
};

// Aggregates completed visits whose Enter falls in [from, to); open visits
// are counted separately. Throws on from >= to.
RetentionReport retention_report(const EventStore& store, std::int64_t from_ms,
                                 std::int64_t to_ms);

struct Visit {
  BeaconId beacon;
  std::int64_t enter_ms = 0;
  std::int64_t dwell_ms = 0;

  bool operator==(const Visit&) const = default;
};

// Completed visits in Enter order. Throws on an unknown visitor.
std::vector<Visit> visitor_path(const EventStore& store, const VisitorId& visitor);

// Catalog beacons the visitor has not completed a visit to, ranked by
// total dwell across all visitors (descending, ties by id), truncated to
// limit. Throws on an empty catalog or limit < 1.
std::vector<BeaconId> recommend(const EventStore& store, const VisitorId& visitor,
                                const std::vector<BeaconId>& catalog, int limit);

}  // namespace blip
