#pragma once

#include <stdexcept>

namespace blip {

// Base type for all library errors. The CLI maps these to exit code 2
// (data error); anything else escaping to main is exit 3 (internal).
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid value or invariant violation. Messages name the offending
// field path, e.g. "beacons[2].adv_interval_ms".
struct ValidationError : Error {
  using Error::Error;
};

// Malformed input document. Messages carry a line number or field path.
struct ParseError : Error {
  using Error::Error;
};

// Degenerate geometry: collinear anchors, insufficient ranges.
struct GeometryError : Error {
  using Error::Error;
};

}  // namespace blip
