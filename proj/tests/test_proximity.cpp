#include <doctest.h>

#include <cmath>
#include <random>

#include "blip/pathloss.hpp"
#include "blip/proximity.hpp"

using namespace blip;

namespace {

BeaconMap single_beacon_map(double sigma) {
  BeaconMap map;
  map.environment = {2.208, -68.99, 1.0, sigma};
  map.beacons = {{"B1", 0.0, 0.0, 100, 0.0}};
  return map;
}

// deterministic approach trace: distance shrinks from `from` to `to` over
// `steps` samples, then holds `hold` more samples at `to`
std::vector<RssiSample> approach_trace(const PathLossModel& model, double from,
                                       double to, int steps, int hold) {
  std::vector<RssiSample> out;
  for (int i = 0; i < steps + hold; ++i) {
    const double f = std::min(1.0, static_cast<double>(i) / (steps - 1));
    const double d = from + f * (to - from);
    out.push_back({"B1", static_cast<std::int64_t>(i) * 100,
                   predict_rssi(model, d)});
  }
  return out;
}

std::vector<ProximityEvent> events_for(const std::vector<ProximityEvent>& events,
                                       const BeaconId& beacon,
                                       std::initializer_list<EventKind> kinds) {
  std::vector<ProximityEvent> out;
  for (const auto& e : events) {
    if (e.beacon != beacon) continue;
    for (EventKind k : kinds)
      if (e.kind == k) out.push_back(e);
  }
  return out;
}

}  // namespace

TEST_SUITE("proximity") {

TEST_CASE("classify_zone boundaries are inclusive on the nearer zone") {
  const ZoneThresholds t;
  CHECK(classify_zone(0.3, t) == Zone::Immediate);
  CHECK(classify_zone(0.5, t) == Zone::Immediate);
  CHECK(classify_zone(0.51, t) == Zone::Near);
  CHECK(classify_zone(4.0, t) == Zone::Near);
  CHECK(classify_zone(7.0, t) == Zone::Far);
  CHECK(classify_zone(10.0, t) == Zone::Far);
  CHECK(classify_zone(10.01, t) == Zone::OutOfRange);
  CHECK_THROWS_AS(classify_zone(-0.1, t), ValidationError);
}

TEST_CASE("classify_zone is monotone in distance") {
  const ZoneThresholds t;
  Zone prev = classify_zone(0.0, t);
  for (double d = 0.05; d < 12.0; d += 0.05) {
    const Zone z = classify_zone(d, t);
    CHECK(static_cast<int>(z) >= static_cast<int>(prev));
    prev = z;
  }
}

TEST_CASE("threshold ordering is validated") {
  CHECK_THROWS_AS(classify_zone(1.0, {4.0, 0.5, 10.0}), ValidationError);
  CHECK_THROWS_AS(classify_zone(1.0, {0.5, 4.0, 4.0}), ValidationError);
}

TEST_CASE("nearest_beacon picks the strongest signal") {
  CHECK_FALSE(nearest_beacon({}).has_value());
  CHECK(nearest_beacon({{"A", -60.0}, {"B", -75.0}, {"C", -80.0}}) == "A");
  SUBCASE("ties break toward the lexicographically smaller id") {
    CHECK(nearest_beacon({{"A", -70.0}, {"B", -70.0}}) == "A");
    CHECK(nearest_beacon({{"Z", -70.0}, {"Y", -70.0}}) == "Y");
  }
}

TEST_CASE("nearest_beacon is invariant under a constant offset") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> rssi(-100.0, -40.0);
  std::uniform_real_distribution<double> offset(-20.0, 20.0);
  for (int i = 0; i < 200; ++i) {
    std::map<BeaconId, double> snap{
        {"A", rssi(rng)}, {"B", rssi(rng)}, {"C", rssi(rng)}};
    const double shift = offset(rng);
    std::map<BeaconId, double> shifted;
    for (const auto& [id, v] : snap) shifted[id] = v + shift;
    CHECK(nearest_beacon(snap) == nearest_beacon(shifted));
  }
}

TEST_CASE("snapshot windows and reducers") {
  const std::vector<RssiSample> samples = {
      {"A", 1000, -70.0}, {"A", 1500, -72.0}, {"A", 2000, -74.0},
      {"B", 1800, -80.0}};

  SUBCASE("empty window gives an empty map") {
    CHECK(snapshot(samples, 100, 5000, Reducer::last).empty());
  }
  SUBCASE("window is half-open: (now - window, now]") {
    const auto snap = snapshot(samples, 500, 2000, Reducer::last);
    REQUIRE(snap.count("A") == 1);
    CHECK(snap.at("A") == -74.0);  // 1500 excluded, 2000 included
    CHECK(snap.count("B") == 1);
  }
  SUBCASE("last picks the newest sample per beacon") {
    const auto snap = snapshot(samples, 2000, 2000, Reducer::last);
    CHECK(snap.at("A") == -74.0);
    CHECK(snap.at("B") == -80.0);
  }
  SUBCASE("mean averages the window") {
    const auto snap = snapshot(samples, 2000, 2000, Reducer::mean);
    CHECK(snap.at("A") == doctest::Approx(-72.0));
  }
  SUBCASE("kalman reduces to the filtered endpoint") {
    const auto snap =
        snapshot(samples, 2000, 2000, Reducer::kalman, default_params_for_sigma(2.0));
    CHECK(snap.at("A") < -70.0);  // pulled toward the later, weaker readings
    CHECK(snap.at("A") > -74.0);
    CHECK(snap.at("B") == doctest::Approx(-80.0));  // single sample
  }
  SUBCASE("future samples are rejected") {
    CHECK_THROWS_AS(snapshot(samples, 500, 1900, Reducer::last), ValidationError);
  }
}

TEST_CASE("sample mean concentrates within 0.6 dB in >= 95 of 100 trials") {
  // oracle: 0.6 dB = 3 sigma / sqrt(100)
  int hits = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::mt19937_64 rng(9000 + trial);
    std::normal_distribution<double> noise(0.0, 2.0);
    std::vector<RssiSample> samples;
    for (int i = 0; i < 100; ++i)
      samples.push_back({"A", 100 + i, -70.0 + noise(rng)});
    const auto snap = snapshot(samples, 1000, 1000, Reducer::mean);
    if (std::abs(snap.at("A") - -70.0) < 0.6) ++hits;
  }
  CHECK(hits >= 95);
}

TEST_CASE("walking toward a beacon raises the zone sequence in order") {
  const BeaconMap map = single_beacon_map(0.0);
  SessionState session = make_session(map);
  // 8 m down to 0.4 m over 15 s, then 5 s standing at 0.4 m
  const auto trace = approach_trace(map.environment, 8.0, 0.4, 150, 50);
  const auto events = update_session(session, trace, 20000, map);

  const auto zone_events = events_for(
      events, "B1", {EventKind::Enter, EventKind::Notification, EventKind::Exit});
  REQUIRE(zone_events.size() == 3);
  CHECK(zone_events[0].kind == EventKind::Enter);
  CHECK(zone_events[0].zone == Zone::Far);
  CHECK(zone_events[1].kind == EventKind::Notification);
  CHECK(zone_events[1].zone == Zone::Near);
  CHECK(zone_events[2].kind == EventKind::Notification);
  CHECK(zone_events[2].zone == Zone::Immediate);
  CHECK(zone_events[0].timestamp_ms < zone_events[1].timestamp_ms);
  CHECK(zone_events[1].timestamp_ms < zone_events[2].timestamp_ms);
}

TEST_CASE("a silent beacon exits after three advertising intervals") {
  const BeaconMap map = single_beacon_map(0.0);
  SessionState session = make_session(map);
  std::vector<RssiSample> trace;
  for (int i = 0; i < 600; ++i)  // 60 s at 1 m
    trace.push_back({"B1", static_cast<std::int64_t>(i) * 100,
                     predict_rssi(map.environment, 1.0)});
  auto events = update_session(session, trace, 59901, map);
  const auto enters = events_for(events, "B1", {EventKind::Enter});
  REQUIRE(enters.size() == 1);
  CHECK(enters[0].zone == Zone::Near);
  CHECK(events_for(events, "B1", {EventKind::Exit}).empty());

  // silence: the session notices at 3 x adv_interval past the last sample
  auto exits = events_for(update_session(session, {}, 61000, map), "B1",
                          {EventKind::Exit});
  REQUIRE(exits.size() == 1);
  CHECK(exits[0].timestamp_ms == 59900 + 300);
  CHECK(exits[0].dwell_ms == 60200);
  CHECK(std::abs(exits[0].dwell_ms - 60000) <= 300);
  CHECK(session.tracks.empty());
  CHECK_FALSE(session.nearest.has_value());
}

TEST_CASE("empty batch with no tracked beacons changes nothing") {
  const BeaconMap map = single_beacon_map(0.0);
  SessionState session = make_session(map);
  const auto events = update_session(session, {}, 1000, map);
  CHECK(events.empty());
  CHECK(session.tracks.empty());
  CHECK(session.watermark_ms == -1);
}

TEST_CASE("out-of-order ingestion is rejected") {
  const BeaconMap map = single_beacon_map(0.0);
  SessionState session = make_session(map);
  update_session(session, {{"B1", 1000, -70.0}}, 1000, map);
  CHECK_THROWS_AS(update_session(session, {{"B1", 500, -70.0}}, 2000, map),
                  ValidationError);
  CHECK_THROWS_AS(
      update_session(session, {{"B1", 3000, -70.0}, {"B1", 2500, -70.0}}, 3000, map),
      ValidationError);
  CHECK_THROWS_AS(update_session(session, {{"B1", 5000, -70.0}}, 4000, map),
                  ValidationError);
  CHECK_THROWS_AS(update_session(session, {{"??", 4000, -70.0}}, 4000, map),
                  ValidationError);
}

TEST_CASE("events alternate Enter/Exit with exact dwell bookkeeping") {
  BeaconMap map;
  map.environment = {2.208, -68.99, 1.0, 2.0};
  map.beacons = {{"B1", 0.0, 0.0, 100, 0.0}, {"B2", 25.0, 0.0, 100, 0.0}};

  // noisy walk past both beacons, batched per second
  std::mt19937_64 rng(77);
  std::normal_distribution<double> noise(0.0, 2.0);
  SessionState session = make_session(map);
  std::vector<ProximityEvent> all;
  const double speed = 1.0;  // m/s from x = -15
  for (int batch = 0; batch < 55; ++batch) {
    std::vector<RssiSample> samples;
    for (int i = 0; i < 10; ++i) {
      const std::int64_t ts = batch * 1000 + i * 100;
      const double x = -15.0 + speed * static_cast<double>(ts) / 1000.0;
      for (const auto& b : map.beacons) {
        const double d = std::max(std::hypot(x - b.x_m, 1.0), 1e-3);
        samples.push_back(
            {b.beacon, ts, predict_rssi(map.environment, d) + noise(rng)});
      }
    }
    for (auto& e :
         update_session(session, samples, batch * 1000 + 999, map))
      all.push_back(e);
  }

  for (const BeaconId id : {"B1", "B2"}) {
    const auto seq = events_for(all, id, {EventKind::Enter, EventKind::Exit});
    std::int64_t enter_ts = -1;
    for (const auto& e : seq) {
      if (e.kind == EventKind::Enter) {
        CHECK(enter_ts == -1);  // no double Enter
        enter_ts = e.timestamp_ms;
      } else {
        REQUIRE(enter_ts >= 0);  // no orphan Exit
        CHECK(e.dwell_ms == e.timestamp_ms - enter_ts);
        CHECK(e.dwell_ms >= 0);
        enter_ts = -1;
      }
    }
  }
  // emitted stream is non-decreasing in time, as analytics ingestion expects
  for (std::size_t i = 1; i < all.size(); ++i)
    CHECK(all[i].timestamp_ms >= all[i - 1].timestamp_ms);
}

TEST_CASE("mid-batch silence keeps the event stream chronological") {
  BeaconMap map;
  map.environment = {2.0, -60.0, 1.0, 0.0};
  map.beacons = {{"A", 0.0, 0.0, 100, 0.0}, {"B", 3.0, 0.0, 100, 0.0}};
  SessionState session = make_session(map);

  // A chirps for 2 s then dies; B keeps going for 20 s
  std::vector<RssiSample> batch;
  for (int i = 0; i < 200; ++i) {
    const std::int64_t ts = i * 100;
    if (i < 20) batch.push_back({"A", ts, predict_rssi(map.environment, 1.0)});
    batch.push_back({"B", ts, predict_rssi(map.environment, 2.0)});
  }
  const auto events = update_session(session, batch, 19999, map);

  const auto exits = events_for(events, "A", {EventKind::Exit});
  REQUIRE(exits.size() == 1);
  CHECK(exits[0].timestamp_ms == 1900 + 300);
  CHECK(exits[0].dwell_ms == 2200);
  for (std::size_t i = 1; i < events.size(); ++i)
    CHECK(events[i].timestamp_ms >= events[i - 1].timestamp_ms);
}

TEST_CASE("session replay is deterministic") {
  const BeaconMap map = single_beacon_map(0.0);
  const auto trace = approach_trace(map.environment, 9.0, 0.3, 120, 30);

  std::vector<ProximityEvent> first, second;
  for (auto* out : {&first, &second}) {
    SessionState session = make_session(map);
    std::vector<RssiSample> batch;
    for (const auto& s : trace) {
      batch.push_back(s);
      if (batch.size() == 25) {
        for (auto& e : update_session(session, batch,
                                      batch.back().timestamp_ms, map))
          out->push_back(e);
        batch.clear();
      }
    }
    if (!batch.empty())
      for (auto& e :
           update_session(session, batch, batch.back().timestamp_ms, map))
        out->push_back(e);
  }
  CHECK(first == second);
}

TEST_CASE("nearest beacon changes are announced") {
  BeaconMap map;
  map.environment = {2.0, -60.0, 1.0, 0.0};
  map.beacons = {{"A", 0.0, 0.0, 100, 0.0}, {"B", 6.0, 0.0, 100, 0.0}};
  SessionState session = make_session(map);

  // stand next to A, then next to B
  std::vector<RssiSample> batch1, batch2;
  for (int i = 0; i < 30; ++i) {
    const std::int64_t ts = i * 100;
    batch1.push_back({"A", ts, predict_rssi(map.environment, 1.0)});
    batch1.push_back({"B", ts, predict_rssi(map.environment, 5.0)});
  }
  for (int i = 30; i < 60; ++i) {
    const std::int64_t ts = i * 100;
    batch2.push_back({"A", ts, predict_rssi(map.environment, 5.0)});
    batch2.push_back({"B", ts, predict_rssi(map.environment, 1.0)});
  }
  auto events1 = update_session(session, batch1, 2999, map);
  CHECK(session.nearest == "A");
  const auto changes1 = events_for(events1, "A", {EventKind::NearestChanged});
  REQUIRE(!changes1.empty());

  auto events2 = update_session(session, batch2, 5999, map);
  CHECK(session.nearest == "B");
  CHECK(!events_for(events2, "B", {EventKind::NearestChanged}).empty());
}

}  // TEST_SUITE
