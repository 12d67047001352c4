#pragma once

#include <vector>

#include "blip/core.hpp"

namespace blip {

struct RangeObservation {
  BeaconId beacon;
  double radius_m = 1.0;  // > 0
};

// Rigid transform (translation + rotation + optional reflection) into the
// trilateration frame: anchor1 -> (0,0), anchor3 -> (k,0) with k > 0,
// anchor2 -> (l,m) with m > 0.
class CanonicalFrame {
 public:
  Position2D to_canonical(const Position2D& p) const;
  Position2D from_canonical(const Position2D& p) const;

  double k() const { return k_; }
  double l() const { return l_; }
  double m() const { return m_; }
  double rotation_rad() const { return rotation_; }
  Position2D translation() const { return {tx_, ty_}; }
  bool reflected() const { return reflected_; }

 private:
  friend CanonicalFrame build_canonical_frame(const Position2D&,
                                              const Position2D&,
                                              const Position2D&);
  double tx_ = 0.0, ty_ = 0.0;  // applied before rotation
  double rotation_ = 0.0;
  double cos_ = 1.0, sin_ = 0.0;
  bool reflected_ = false;
  double k_ = 0.0, l_ = 0.0, m_ = 0.0;
};

// Throws GeometryError when the anchors are collinear or coincident
// (triangle area <= 1e-9 m^2).
CanonicalFrame build_canonical_frame(const Position2D& a1, const Position2D& a2,
                                     const Position2D& a3);

// Closed-form intersection of three circles centered at (0,0), (l,m), (k,0):
//   x = (r1^2 - r3^2 + k^2) / (2k)
//   y = (r1^2 - r2^2 + l^2 + m^2) / (2m) - (l/m) x
// Throws GeometryError when k == 0 or m == 0.
Position2D trilaterate_canonical(double r1, double r2, double r3, double k,
                                 double l, double m);

// Exactly 3 ranges: canonicalize, trilaterate, transform back. More than 3:
// linear least-squares multilateration over all anchor pairs. The residual
// is the RMS of | |fix - anchor_i| - radius_i | over the used beacons.
PositionFix localize(const BeaconMap& map,
                     const std::vector<RangeObservation>& ranges);

// Euclidean distance between estimate and ground truth.
double position_error(const Position2D& estimated, const Position2D& real);

}  // namespace blip
