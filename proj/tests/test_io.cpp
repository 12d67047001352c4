#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "blip/io.hpp"
#include "blip/simulator.hpp"

using namespace blip;

namespace {

std::vector<RssiSample> random_samples(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> rssi(-119.0, -1.0);
  std::uniform_int_distribution<int> beacon(0, 4);
  std::uniform_int_distribution<std::int64_t> gap(0, 500);
  std::vector<RssiSample> samples;
  std::int64_t ts = 0;
  for (int i = 0; i < count; ++i) {
    ts += gap(rng);
    samples.push_back({"beacon-" + std::to_string(beacon(rng)), ts, rssi(rng)});
  }
  return samples;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("trace header-only round trip") {
  std::ostringstream out;
  io::write_trace(out, {});
  CHECK(out.str() == "timestamp_ms,beacon_id,rssi_dbm\n");
  std::istringstream in(out.str());
  CHECK(io::read_trace(in).empty());
}

TEST_CASE("trace rows preserve order and values") {
  std::istringstream in(
      "timestamp_ms,beacon_id,rssi_dbm\n"
      "0,B1,-70.5\n"
      "100,B2,-71.25\n"
      "200,B1,-72.125\n");
  const auto samples = io::read_trace(in);
  REQUIRE(samples.size() == 3);
  CHECK(samples[0].beacon == "B1");
  CHECK(samples[1].timestamp_ms == 100);
  CHECK(samples[2].rssi_dbm == doctest::Approx(-72.125));
}

TEST_CASE("trace parse errors carry line numbers") {
  SUBCASE("bad rssi on line 5") {
    std::istringstream in(
        "timestamp_ms,beacon_id,rssi_dbm\n"
        "0,B1,-70\n"
        "100,B1,-70\n"
        "200,B1,-70\n"
        "300,B1,abc\n");
    CHECK_THROWS_WITH_AS(io::read_trace(in),
                         "line 5: bad rssi_dbm \"abc\"", ParseError);
  }
  SUBCASE("wrong header") {
    std::istringstream in("time,beacon,rssi\n");
    CHECK_THROWS_AS(io::read_trace(in), ParseError);
  }
  SUBCASE("wrong column count") {
    std::istringstream in("timestamp_ms,beacon_id,rssi_dbm\n1,B1,-70,extra\n");
    CHECK_THROWS_AS(io::read_trace(in), ParseError);
  }
  SUBCASE("per-beacon timestamp regression") {
    std::istringstream in(
        "timestamp_ms,beacon_id,rssi_dbm\n"
        "100,B1,-70\n"
        "50,B1,-70\n");
    CHECK_THROWS_AS(io::read_trace(in), ParseError);
  }
  SUBCASE("out-of-range rssi") {
    std::istringstream in("timestamp_ms,beacon_id,rssi_dbm\n0,B1,-130\n");
    CHECK_THROWS_AS(io::read_trace(in), ParseError);
  }
}

TEST_CASE("trace round trip is within 1e-6 dB and deterministic") {
  const auto samples = random_samples(1, 1000);
  std::ostringstream out1, out2;
  io::write_trace(out1, samples);
  io::write_trace(out2, samples);
  CHECK(out1.str() == out2.str());

  std::istringstream in(out1.str());
  const auto back = io::read_trace(in);
  REQUIRE(back.size() == samples.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].beacon == samples[i].beacon);
    CHECK(back[i].timestamp_ms == samples[i].timestamp_ms);
    CHECK(std::abs(back[i].rssi_dbm - samples[i].rssi_dbm) <= 1e-6);
  }
}

TEST_CASE("beacon ids a writer cannot encode are rejected") {
  std::ostringstream out;
  CHECK_THROWS_AS(io::write_trace(out, {{"a,b", 0, -70.0}}), ValidationError);
  CHECK_THROWS_AS(io::write_trace(out, {{"a\nb", 0, -70.0}}), ValidationError);
}

TEST_CASE("beacon map presets fill in campaign parameters") {
  std::istringstream in(R"({
    "environment": {"name": "laboratory"},
    "beacons": [{"id": "B1", "x_m": 0.0, "y_m": 0.0}]
  })");
  const BeaconMap map = io::read_beacon_map(in);
  CHECK(map.environment.n == doctest::Approx(2.208));
  CHECK(map.environment.rssi0_dbm == doctest::Approx(-68.99));
  CHECK(map.beacons[0].adv_interval_ms == 100);

  SUBCASE("explicit fields override the preset") {
    std::istringstream in2(R"({
      "environment": {"name": "laboratory", "sigma_db": 0.5},
      "beacons": [{"id": "B1", "x_m": 0.0, "y_m": 0.0}]
    })");
    CHECK(io::read_beacon_map(in2).environment.sigma_db == doctest::Approx(0.5));
  }
}

TEST_CASE("beacon map schema violations carry field paths") {
  SUBCASE("custom environment needs parameters") {
    std::istringstream in(R"({"environment": {"name": "custom"},
                              "beacons": [{"id":"B1","x_m":0,"y_m":0}]})");
    CHECK_THROWS_AS(io::read_beacon_map(in), ParseError);
  }
  SUBCASE("negative advertising interval") {
    std::istringstream in(R"({
      "environment": {"name": "lab"},
      "beacons": [{"id": "B1", "x_m": 0, "y_m": 0, "adv_interval_ms": -5}]
    })");
    try {
      io::read_beacon_map(in);
      FAIL("expected a validation error");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("adv_interval_ms") != std::string::npos);
    }
  }
  SUBCASE("duplicate ids") {
    std::istringstream in(R"({
      "environment": {"name": "lab"},
      "beacons": [{"id": "B1", "x_m": 0, "y_m": 0},
                  {"id": "B1", "x_m": 1, "y_m": 0}]
    })");
    CHECK_THROWS_AS(io::read_beacon_map(in), ValidationError);
  }
  SUBCASE("not json at all") {
    std::istringstream in("not json");
    CHECK_THROWS_AS(io::read_beacon_map(in), ParseError);
  }
}

TEST_CASE("beacon map round trip") {
  BeaconMap map;
  map.environment = {2.341, -62.94, 1.0, 3.5};
  map.beacons = {{"B1", 0.25, -1.5, 250, -12.0}, {"B2", 3.0, 4.0, 100, 0.0}};
  std::ostringstream out;
  io::write_beacon_map(out, map);
  std::istringstream in(out.str());
  const BeaconMap back = io::read_beacon_map(in);
  CHECK(back.environment.n == map.environment.n);
  CHECK(back.environment.sigma_db == map.environment.sigma_db);
  REQUIRE(back.beacons.size() == 2);
  CHECK(back.beacons[0].beacon == "B1");
  CHECK(back.beacons[0].x_m == map.beacons[0].x_m);
  CHECK(back.beacons[0].adv_interval_ms == 250);
  CHECK(back.beacons[1].tx_power_dbm == 0.0);
}

TEST_CASE("events round trip structurally") {
  const std::vector<std::pair<VisitorId, ProximityEvent>> events = {
      {"v1", {EventKind::Enter, "B1", Zone::Far, 1000, 0}},
      {"v1", {EventKind::Notification, "B1", Zone::Near, 2000, 0}},
      {"v1", {EventKind::NearestChanged, "B1", Zone::Near, 2000, 0}},
      {"v1", {EventKind::Exit, "B1", Zone::OutOfRange, 61000, 60000}},
  };
  std::ostringstream out;
  io::write_events(out, events);
  std::istringstream in(out.str());
  const auto back = io::read_events(in);
  REQUIRE(back.size() == events.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].first == events[i].first);
    CHECK(back[i].second == events[i].second);
  }
}

TEST_CASE("unknown event fields are ignored for forward compatibility") {
  std::istringstream in(
      R"({"kind":"Enter","visitor":"v","beacon":"B","zone":"Far",)"
      R"("timestamp_ms":5,"battery_pct":88,"firmware":"2.1"})"
      "\n");
  const auto events = io::read_events(in);
  REQUIRE(events.size() == 1);
  CHECK(events[0].second.timestamp_ms == 5);
}

TEST_CASE("event parse errors carry line numbers") {
  std::istringstream in(
      R"({"kind":"Enter","visitor":"v","beacon":"B","zone":"Far","timestamp_ms":5})"
      "\n"
      R"({"kind":"Sideways","visitor":"v","beacon":"B","zone":"Far","timestamp_ms":6})"
      "\n");
  CHECK_THROWS_WITH_AS(io::read_events(in),
                       "line 2: kind: unknown value \"Sideways\"", ParseError);
}

TEST_CASE("fit result round trip") {
  FitResult fit;
  fit.model = {2.208, -68.99, 1.0, 2.031};
  fit.rmse_db = 2.02;
  fit.point_count = 2500;
  std::ostringstream out;
  io::write_fit_result(out, fit);
  std::istringstream in(out.str());
  const FitResult back = io::read_fit_result(in);
  CHECK(back.model.n == fit.model.n);
  CHECK(back.model.sigma_db == fit.model.sigma_db);
  CHECK(back.rmse_db == fit.rmse_db);
  CHECK(back.point_count == 2500);
}

TEST_CASE("experiment report round trip") {
  ExperimentReport report;
  report.experiment = "detection";
  report.environment = "laboratory";
  report.seed = 77;
  report.trials = 20;
  report.geometry.beacons = {{"A", {0.0, 0.0}}, {"B", {1.0, 0.0}}};
  report.geometry.locations = {{"L1", {0.0, 0.5}}};
  report.geometry.params = {{"spacing_m", 1.0}};
  report.conditions = {{"L1",
                        {{"accuracy_pct_mean", 98.5}},
                        {{"A", 197}, {"B", 3}}}};
  std::ostringstream out;
  io::write_report(out, report);
  std::istringstream in(out.str());
  const ExperimentReport back = io::read_report(in);
  CHECK(back.experiment == report.experiment);
  CHECK(back.seed == 77);
  CHECK(back.trials == 20);
  REQUIRE(back.conditions.size() == 1);
  CHECK(back.conditions[0].metrics.at("accuracy_pct_mean") == 98.5);
  CHECK(back.conditions[0].counts.at("A") == 197);
  CHECK(back.geometry.beacons[1].first == "B");
  CHECK(back.geometry.params.at("spacing_m") == 1.0);
}

TEST_CASE("calibration segments: file and inline forms agree") {
  const std::string inline_form = "0-600000:0.2,600000-1200000:0.4";
  const auto a = io::parse_segments_inline(inline_form);
  std::ostringstream out;
  io::write_segments(out, a);
  std::istringstream in(out.str());
  const auto b = io::read_segments(in);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  CHECK(a[1].from_ms == b[1].from_ms);
  CHECK(a[1].distance_m == doctest::Approx(b[1].distance_m));

  CHECK_THROWS_AS(io::parse_segments_inline("nonsense"), ParseError);
  CHECK_THROWS_AS(io::parse_segments_inline("5-4:1.0"), ParseError);
}

TEST_CASE("apply_segments maps windows onto calibration distances") {
  const auto segments = io::parse_segments_inline("0-100:0.5,100-200:1.5");
  const std::vector<RssiSample> samples = {
      {"b", 0, -60.0}, {"b", 99, -61.0}, {"b", 100, -70.0}, {"b", 250, -80.0}};
  const auto points = io::apply_segments(samples, segments);
  REQUIRE(points.size() == 3);  // the 250 ms sample falls outside
  CHECK(points[0].distance_m == doctest::Approx(0.5));
  CHECK(points[2].distance_m == doctest::Approx(1.5));
}

TEST_CASE("fuzz: random valid traces always round-trip") {
  for (int trial = 0; trial < 20; ++trial) {
    const auto samples = random_samples(100 + trial, 200);
    std::ostringstream out;
    io::write_trace(out, samples);
    std::istringstream in(out.str());
    const auto back = io::read_trace(in);
    REQUIRE(back.size() == samples.size());
    for (std::size_t i = 0; i < back.size(); ++i)
      CHECK(std::abs(back[i].rssi_dbm - samples[i].rssi_dbm) <= 1e-6);
  }
}

TEST_CASE("fuzz: byte noise errors out instead of crashing") {
  std::mt19937_64 rng(999);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> length(0, 300);
  int rejected = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::string noise = "timestamp_ms,beacon_id,rssi_dbm\n";
    const int len = length(rng);
    for (int i = 0; i < len; ++i)
      noise.push_back(static_cast<char>(byte(rng)));
    std::istringstream trace_in(noise);
    try {
      (void)io::read_trace(trace_in);
    } catch (const Error&) {
      ++rejected;
    }
    std::istringstream map_in(noise);
    try {
      (void)io::read_beacon_map(map_in);
    } catch (const Error&) {
    }
    std::istringstream events_in(noise);
    try {
      (void)io::read_events(events_in);
    } catch (const Error&) {
    }
  }
  CHECK(rejected > 0);  // the vast majority of noise must be rejected cleanly
}

}  // TEST_SUITE
