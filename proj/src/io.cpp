#include "blip/io.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace blip::io {

using nlohmann::json;

namespace {

constexpr const char* kTraceHeader = "timestamp_ms,beacon_id,rssi_dbm";
constexpr const char* kSegmentsHeader = "from_ms,to_ms,distance_m";

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::int64_t parse_int(const std::string& text, int line_no, const char* what) {
  std::int64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " \"" + text + "\"");
  return value;
}

double parse_double(const std::string& text, int line_no, const char* what) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what +
                     " \"" + text + "\"");
  return value;
}

std::string format_real(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", value);
  return buf;
}

void check_encodable_id(const std::string& id, const char* what) {
  if (id.find_first_of(",\r\n") != std::string::npos)
    throw ValidationError(std::string(what) +
                          ": id contains a comma or line break: \"" + id + "\"");
}

json parse_json(std::istream& in, const char* what) {
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

json parse_json_line(const std::string& line, int line_no) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
  }
}

template <typename T>
T get_field(const json& obj, const char* key, int line_no) {
  if (!obj.contains(key))
    throw ParseError("line " + std::to_string(line_no) + ": missing field \"" +
                     key + "\"");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": bad field \"" +
                     key + "\"");
  }
}

}  // namespace

// ---- trace CSV -------------------------------------------------------------

std::vector<RssiSample> read_trace(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader)
    throw ParseError("line 1: expected header \"" + std::string(kTraceHeader) +
                     "\"");
  std::vector<RssiSample> samples;
  std::map<BeaconId, std::int64_t> last_ts;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 3 columns, got " +
                       std::to_string(fields.size()));
    RssiSample s;
    s.timestamp_ms = parse_int(fields[0], line_no, "timestamp_ms");
    s.beacon = fields[1];
    s.rssi_dbm = parse_double(fields[2], line_no, "rssi_dbm");
    try {
      validate(s);
    } catch (const ValidationError& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    auto [it, first] = last_ts.try_emplace(s.beacon, s.timestamp_ms);
    if (!first) {
      if (s.timestamp_ms < it->second)
        throw ParseError("line " + std::to_string(line_no) +
                         ": timestamp regression for beacon \"" + s.beacon +
                         "\"");
      it->second = s.timestamp_ms;
    }
    samples.push_back(std::move(s));
  }
  return samples;
}

void write_trace(std::ostream& out, const std::vector<RssiSample>& samples) {
  out << kTraceHeader << "\n";
  std::map<BeaconId, std::int64_t> last_ts;
  for (const auto& s : samples) {
    validate(s);
    check_encodable_id(s.beacon, "beacon");
    auto [it, first] = last_ts.try_emplace(s.beacon, s.timestamp_ms);
    if (!first) {
      if (s.timestamp_ms < it->second)
        throw ValidationError("samples: timestamp regression for beacon \"" +
                              s.beacon + "\"");
      it->second = s.timestamp_ms;
    }
    out << s.timestamp_ms << ',' << s.beacon << ',' << format_real(s.rssi_dbm)
        << '\n';
  }
}

// ---- beacon map JSON ---------------------------------------------------------

BeaconMap read_beacon_map(std::istream& in) {
  const json doc = parse_json(in, "beacon map");
  if (!doc.is_object()) throw ParseError("beacon map: expected a JSON object");

  BeaconMap map;
  const std::string name =
      doc.contains("environment") && doc["environment"].contains("name")
          ? doc["environment"]["name"].get<std::string>()
          : "custom";
  if (name == "laboratory" || name == "lab") {
    map.environment = laboratory_model();
  } else if (name == "corridor") {
    map.environment = corridor_model();
  } else if (name == "custom") {
    map.environment = PathLossModel{0.0, 0.0, 1.0, 0.0};  // n must be given
  } else {
    throw ParseError("environment.name: unknown name \"" + name + "\"");
  }

  if (doc.contains("environment")) {
    const json& env = doc["environment"];
    try {
      if (env.contains("n")) map.environment.n = env["n"].get<double>();
      if (env.contains("rssi0_dbm"))
        map.environment.rssi0_dbm = env["rssi0_dbm"].get<double>();
      if (env.contains("d0_m")) map.environment.d0_m = env["d0_m"].get<double>();
      if (env.contains("sigma_db"))
        map.environment.sigma_db = env["sigma_db"].get<double>();
    } catch (const json::exception&) {
      throw ParseError("environment: non-numeric field");
    }
  }
  if (name == "custom" &&
      (!doc.contains("environment") || !doc["environment"].contains("n") ||
       !doc["environment"].contains("rssi0_dbm")))
    throw ParseError("environment: custom environment requires n and rssi0_dbm");

  if (!doc.contains("beacons") || !doc["beacons"].is_array())
    throw ParseError("beacons: missing or not an array");
  int index = 0;
  for (const json& b : doc["beacons"]) {
    const std::string path = "beacons[" + std::to_string(index) + "]";
    if (!b.is_object()) throw ParseError(path + ": expected an object");
    BeaconPlacement p;
    try {
      if (!b.contains("id")) throw ParseError(path + ".id: missing");
      p.beacon = b["id"].get<std::string>();
      if (!b.contains("x_m") || !b.contains("y_m"))
        throw ParseError(path + ": missing x_m or y_m");
      p.x_m = b["x_m"].get<double>();
      p.y_m = b["y_m"].get<double>();
      if (b.contains("adv_interval_ms"))
        p.adv_interval_ms = b["adv_interval_ms"].get<std::int64_t>();
      if (b.contains("tx_power_dbm"))
        p.tx_power_dbm = b["tx_power_dbm"].get<double>();
    } catch (const json::exception&) {
      throw ParseError(path + ": field of the wrong type");
    }
    map.beacons.push_back(std::move(p));
    ++index;
  }
  validate_beacon_map(map);
  return map;
}

void write_beacon_map(std::ostream& out, const BeaconMap& map,
                      const std::string& name) {
  validate_beacon_map(map);
  json doc;
  doc["environment"] = {{"name", name},
                        {"n", map.environment.n},
                        {"rssi0_dbm", map.environment.rssi0_dbm},
                        {"d0_m", map.environment.d0_m},
                        {"sigma_db", map.environment.sigma_db}};
  doc["beacons"] = json::array();
  for (const auto& b : map.beacons)
    doc["beacons"].push_back({{"id", b.beacon},
                              {"x_m", b.x_m},
                              {"y_m", b.y_m},
                              {"adv_interval_ms", b.adv_interval_ms},
                              {"tx_power_dbm", b.tx_power_dbm}});
  out << doc.dump(2) << "\n";
}

// ---- events JSONL --------------------------------------------------------------

std::vector<std::pair<VisitorId, ProximityEvent>> read_events(std::istream& in) {
  std::vector<std::pair<VisitorId, ProximityEvent>> events;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const json obj = parse_json_line(line, line_no);
    if (!obj.is_object())
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected a JSON object");
    ProximityEvent e;
    const auto visitor = get_field<std::string>(obj, "visitor", line_no);
    try {
      e.kind = event_kind_from_string(get_field<std::string>(obj, "kind", line_no));
      e.zone = zone_from_string(get_field<std::string>(obj, "zone", line_no));
    } catch (const ParseError& err) {
      throw ParseError("line " + std::to_string(line_no) + ": " + err.what());
    }
    e.beacon = get_field<std::string>(obj, "beacon", line_no);
    e.timestamp_ms = get_field<std::int64_t>(obj, "timestamp_ms", line_no);
    e.dwell_ms = e.kind == EventKind::Exit
                     ? get_field<std::int64_t>(obj, "dwell_ms", line_no)
                     : 0;
    if (visitor.empty() || e.beacon.empty())
      throw ParseError("line " + std::to_string(line_no) + ": empty id");
    if (e.timestamp_ms < 0 || e.dwell_ms < 0)
      throw ParseError("line " + std::to_string(line_no) + ": negative time");
    events.emplace_back(visitor, std::move(e));
  }
  return events;
}

void write_events(std::ostream& out,
                  const std::vector<std::pair<VisitorId, ProximityEvent>>& events) {
  for (const auto& [visitor, e] : events) {
    json obj = {{"kind", to_string(e.kind)},
                {"visitor", visitor},
                {"beacon", e.beacon},
                {"zone", to_string(e.zone)},
                {"timestamp_ms", e.timestamp_ms}};
    if (e.kind == EventKind::Exit) obj["dwell_ms"] = e.dwell_ms;
    out << obj.dump() << "\n";
  }
}

// ---- fitted model ---------------------------------------------------------------

void write_fit_result(std::ostream& out, const FitResult& fit) {
  const json doc = {{"model",
                     {{"n", fit.model.n},
                      {"rssi0_dbm", fit.model.rssi0_dbm},
                      {"d0_m", fit.model.d0_m},
                      {"sigma_db", fit.model.sigma_db}}},
                    {"rmse_db", fit.rmse_db},
                    {"point_count", fit.point_count}};
  out << doc.dump(2) << "\n";
}

FitResult read_fit_result(std::istream& in) {
  const json doc = parse_json(in, "fit result");
  FitResult fit;
  try {
    fit.model.n = doc.at("model").at("n").get<double>();
    fit.model.rssi0_dbm = doc.at("model").at("rssi0_dbm").get<double>();
    fit.model.d0_m = doc.at("model").at("d0_m").get<double>();
    fit.model.sigma_db = doc.at("model").at("sigma_db").get<double>();
    fit.rmse_db = doc.at("rmse_db").get<double>();
    fit.point_count = doc.at("point_count").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("fit result: ") + e.what());
  }
  validate(fit.model, "model");
  return fit;
}

// ---- experiment report ------------------------------------------------------------

namespace {

json geometry_to_json(const GeometryEcho& g) {
  json beacons = json::array();
  for (const auto& [id, p] : g.beacons)
    beacons.push_back({{"id", id}, {"x_m", p.x}, {"y_m", p.y}});
  json locations = json::array();
  for (const auto& [id, p] : g.locations)
    locations.push_back({{"id", id}, {"x_m", p.x}, {"y_m", p.y}});
  return {{"beacons", beacons}, {"locations", locations}, {"params", g.params}};
}

GeometryEcho geometry_from_json(const json& doc) {
  GeometryEcho g;
  for (const json& b : doc.at("beacons"))
    g.beacons.emplace_back(b.at("id").get<std::string>(),
                           Position2D{b.at("x_m").get<double>(),
                                      b.at("y_m").get<double>()});
  for (const json& l : doc.at("locations"))
    g.locations.emplace_back(l.at("id").get<std::string>(),
                             Position2D{l.at("x_m").get<double>(),
                                        l.at("y_m").get<double>()});
  if (doc.contains("params"))
    g.params = doc.at("params").get<std::map<std::string, double>>();
  return g;
}

}  // namespace

void write_report(std::ostream& out, const ExperimentReport& report) {
  json conditions = json::array();
  for (const auto& c : report.conditions) {
    json obj = {{"label", c.label}, {"metrics", c.metrics}};
    if (!c.counts.empty()) obj["counts"] = c.counts;
    conditions.push_back(std::move(obj));
  }
  const json doc = {{"experiment", report.experiment},
                    {"environment", report.environment},
                    {"seed", report.seed},
                    {"trials", report.trials},
                    {"geometry", geometry_to_json(report.geometry)},
                    {"conditions", conditions}};
  out << doc.dump(2) << "\n";
}

ExperimentReport read_report(std::istream& in) {
  const json doc = parse_json(in, "report");
  ExperimentReport report;
  try {
    report.experiment = doc.at("experiment").get<std::string>();
    report.environment = doc.at("environment").get<std::string>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.trials = doc.at("trials").get<int>();
    report.geometry = geometry_from_json(doc.at("geometry"));
    for (const json& c : doc.at("conditions")) {
      ConditionStats stats;
      stats.label = c.at("label").get<std::string>();
      stats.metrics = c.at("metrics").get<std::map<std::string, double>>();
      if (c.contains("counts"))
        stats.counts = c.at("counts").get<std::map<std::string, std::int64_t>>();
      report.conditions.push_back(std::move(stats));
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return report;
}

// ---- retention report ---------------------------------------------------------------

void write_retention_report(std::ostream& out, const RetentionReport& report) {
  json beacons = json::object();
  for (const auto& [id, r] : report.beacons) {
    json hours = json::array();
    for (const auto dwell : r.dwell_ms_by_hour) hours.push_back(dwell);
    beacons[id] = {{"visit_count", r.visit_count},
                   {"total_dwell_ms", r.total_dwell_ms},
                   {"mean_dwell_ms", r.mean_dwell_ms},
                   {"open_visits", r.open_visits},
                   {"dwell_ms_by_hour", hours}};
  }
  const json doc = {
      {"from_ms", report.from_ms}, {"to_ms", report.to_ms}, {"beacons", beacons}};
  out << doc.dump(2) << "\n";
}

// ---- calibration segments -------------------------------------------------------------

std::vector<CalibrationSegment> read_segments(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kSegmentsHeader)
    throw ParseError("line 1: expected header \"" +
                     std::string(kSegmentsHeader) + "\"");
  std::vector<CalibrationSegment> segments;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 3)
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 3 columns");
    CalibrationSegment s;
    s.from_ms = parse_int(fields[0], line_no, "from_ms");
    s.to_ms = parse_int(fields[1], line_no, "to_ms");
    s.distance_m = parse_double(fields[2], line_no, "distance_m");
    if (s.from_ms >= s.to_ms)
      throw ParseError("line " + std::to_string(line_no) +
                       ": from_ms must be < to_ms");
    if (!(s.distance_m > 0.0))
      throw ParseError("line " + std::to_string(line_no) +
                       ": distance_m must be > 0");
    segments.push_back(s);
  }
  return segments;
}

void write_segments(std::ostream& out,
                    const std::vector<CalibrationSegment>& segments) {
  out << kSegmentsHeader << "\n";
  for (const auto& s : segments)
    out << s.from_ms << ',' << s.to_ms << ',' << format_real(s.distance_m)
        << '\n';
}

std::vector<CalibrationSegment> parse_segments_inline(const std::string& text) {
  std::vector<CalibrationSegment> segments;
  std::stringstream ss(text);
  std::string item;
  int index = 0;
  while (std::getline(ss, item, ',')) {
    ++index;
    const std::string path = "segments[" + std::to_string(index) + "]";
    const std::size_t dash = item.find('-');
    const std::size_t colon = item.find(':');
    if (dash == std::string::npos || colon == std::string::npos || colon < dash)
      throw ParseError(path + ": expected from-to:distance, got \"" + item +
                       "\"");
    CalibrationSegment s;
    try {
      s.from_ms = parse_int(item.substr(0, dash), index, "from_ms");
      s.to_ms = parse_int(item.substr(dash + 1, colon - dash - 1), index, "to_ms");
      s.distance_m = parse_double(item.substr(colon + 1), index, "distance_m");
    } catch (const ParseError&) {
      throw ParseError(path + ": expected from-to:distance, got \"" + item +
                       "\"");
    }
    if (s.from_ms >= s.to_ms)
      throw ParseError(path + ": from_ms must be < to_ms");
    if (!(s.distance_m > 0.0))
      throw ParseError(path + ": distance_m must be > 0");
    segments.push_back(s);
  }
  if (segments.empty()) throw ParseError("segments: empty");
  return segments;
}

std::vector<CalibrationPoint> apply_segments(
    const std::vector<RssiSample>& samples,
    const std::vector<CalibrationSegment>& segments) {
  std::vector<CalibrationPoint> points;
  for (const auto& s : samples) {
    for (const auto& seg : segments) {
      if (s.timestamp_ms >= seg.from_ms && s.timestamp_ms < seg.to_ms) {
        points.push_back({seg.distance_m, s.rssi_dbm});
        break;
      }
    }
  }
  return points;
}

// ---- file helpers ----------------------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  out << text;
  if (!out) throw ParseError("write failed: " + path);
}

std::vector<RssiSample> read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file: " + path);
  return read_trace(in);
}

void write_trace_file(const std::string& path,
                      const std::vector<RssiSample>& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  write_trace(out, samples);
}

BeaconMap read_beacon_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open map file: " + path);
  return read_beacon_map(in);
}

void write_beacon_map_file(const std::string& path, const BeaconMap& map,
                           const std::string& name) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot open file for writing: " + path);
  write_beacon_map(out, map, name);
}

}  // namespace blip::io
