#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "blip/analytics.hpp"
#include "blip/core.hpp"
#include "blip/pathloss.hpp"
#include "blip/proximity.hpp"
#include "blip/simulator.hpp"

namespace blip::io {

// ---- RSSI trace: CSV with header `timestamp_ms,beacon_id,rssi_dbm` --------

// Parse errors name the line; per-beacon timestamp monotonicity enforced.
std::vector<RssiSample> read_trace(std::istream& in);
// Canonical form: newline-terminated rows, reals with 6 decimals.
void write_trace(std::ostream& out, const std::vector<RssiSample>& samples);

// ---- beacon map: JSON document ---------------------------------------------
// { "environment": {"name", "n", "rssi0_dbm", "d0_m", "sigma_db"},
//   "beacons": [{"id", "x_m", "y_m", "adv_interval_ms", "tx_power_dbm"}] }
// name laboratory/corridor fills unspecified environment fields from the
// presets; the result must pass validate_beacon_map.

BeaconMap read_beacon_map(std::istream& in);
void write_beacon_map(std::ostream& out, const BeaconMap& map,
                      const std::string& name = "custom");

// ---- proximity events: JSON lines -------------------------------------------
// {"kind","visitor","beacon","zone","timestamp_ms"[,"dwell_ms"]}
// Unknown fields are ignored on read.

std::vector<std::pair<VisitorId, ProximityEvent>> read_events(std::istream& in);
void write_events(std::ostream& out,
                  const std::vector<std::pair<VisitorId, ProximityEvent>>& events);

// ---- fitted model document (JSON) -------------------------------------------

void write_fit_result(std::ostream& out, const FitResult& fit);
FitResult read_fit_result(std::istream& in);

// ---- experiment report (JSON) ------------------------------------------------

void write_report(std::ostream& out, const ExperimentReport& report);
ExperimentReport read_report(std::istream& in);

// ---- retention report (JSON) ---------------------------------------------------

void write_retention_report(std::ostream& out, const RetentionReport& report);

// ---- calibration segments: CSV `from_ms,to_ms,distance_m` ---------------------
// Maps time windows of a trace to known distances for path-loss fitting.

struct CalibrationSegment {
  std::int64_t from_ms = 0;
  std::int64_t to_ms = 0;  // exclusive
  double distance_m = 1.0;
};

std::vector<CalibrationSegment> read_segments(std::istream& in);
void write_segments(std::ostream& out,
                    const std::vector<CalibrationSegment>& segments);
// Inline form "from-to:distance,from-to:distance,..." (milliseconds, meters).
std::vector<CalibrationSegment> parse_segments_inline(const std::string& text);

// Samples falling in a segment become calibration points at its distance.
std::vector<CalibrationPoint> apply_segments(
    const std::vector<RssiSample>& samples,
    const std::vector<CalibrationSegment>& segments);

// ---- file helpers ---------------------------------------------------------------

std::vector<RssiSample> read_trace_file(const std::string& path);
void write_trace_file(const std::string& path, const std::vector<RssiSample>& samples);
BeaconMap read_beacon_map_file(const std::string& path);
void write_beacon_map_file(const std::string& path, const BeaconMap& map,
                           const std::string& name = "custom");
std::string read_text_file(const std::string& path);  // throws ParseError if missing
void write_text_file(const std::string& path, const std::string& text);

}  // namespace blip::io
