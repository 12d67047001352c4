#include "blip/localization.hpp"

#include <cmath>
#include <set>
#include <string>

namespace blip {

Position2D CanonicalFrame::to_canonical(const Position2D& p) const {
  const double ux = p.x + tx_, uy = p.y + ty_;
  double qx = cos_ * ux - sin_ * uy;
  double qy = sin_ * ux + cos_ * uy;
  if (reflected_) qy = -qy;
  return {qx, qy};
}

Position2D CanonicalFrame::from_canonical(const Position2D& p) const {
  double qx = p.x, qy = p.y;
  if (reflected_) qy = -qy;
  const double ux = cos_ * qx + sin_ * qy;
  const double uy = -sin_ * qx + cos_ * qy;
  return {ux - tx_, uy - ty_};
}

CanonicalFrame build_canonical_frame(const Position2D& a1, const Position2D& a2,
                                     const Position2D& a3) {
  validate(a1, "anchor1");
  validate(a2, "anchor2");
  validate(a3, "anchor3");
  const double v31x = a3.x - a1.x, v31y = a3.y - a1.y;
  const double v21x = a2.x - a1.x, v21y = a2.y - a1.y;
  const double area = 0.5 * std::abs(v31x * v21y - v31y * v21x);
  if (area <= 1e-9)
    throw GeometryError("anchors: collinear or coincident (area <= 1e-9 m^2)");

  CanonicalFrame f;
  f.tx_ = -a1.x;
  f.ty_ = -a1.y;
  f.rotation_ = -std::atan2(v31y, v31x);
  f.cos_ = std::cos(f.rotation_);
  f.sin_ = std::sin(f.rotation_);
  // anchor2's image decides the reflection; its y must come out positive
  const double q2y = f.sin_ * v21x + f.cos_ * v21y;
  f.reflected_ = q2y < 0.0;

  f.k_ = std::hypot(v31x, v31y);
  const Position2D q2 = f.to_canonical(a2);
  f.l_ = q2.x;
  f.m_ = q2.y;
  return f;
}

Position2D trilaterate_canonical(double r1, double r2, double r3, double k,
                                 double l, double m) {
  if (!(r1 > 0.0) || !(r2 > 0.0) || !(r3 > 0.0))
    throw ValidationError("radii: must be > 0");
  if (k == 0.0)
    throw GeometryError("k = 0: coincident anchors on the x-axis");
  if (m == 0.0)
    throw GeometryError("m = 0: collinear anchors");
  const double x = (r1 * r1 - r3 * r3 + k * k) / (2.0 * k);
  const double y =
      (r1 * r1 - r2 * r2 + l * l + m * m) / (2.0 * m) - (l / m) * x;
  return {x, y};
}

namespace {

struct Anchor {
  Position2D pos;
  double radius;
};

// Differencing the circle equations of every anchor pair gives the linear
// system 2(xj-xi) x + 2(yj-yi) y = ri^2 - rj^2 + xj^2 - xi^2 + yj^2 - yi^2,
// solved through its 2x2 normal equations.
Position2D least_squares_fix(const std::vector<Anchor>& anchors) {
  double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    for (std::size_t j = i + 1; j < anchors.size(); ++j) {
      const auto& ai = anchors[i];
      const auto& aj = anchors[j];
      const double cx = 2.0 * (aj.pos.x - ai.pos.x);
      const double cy = 2.0 * (aj.pos.y - ai.pos.y);
      const double rhs = ai.radius * ai.radius - aj.radius * aj.radius +
                         aj.pos.x * aj.pos.x - ai.pos.x * ai.pos.x +
                         aj.pos.y * aj.pos.y - ai.pos.y * ai.pos.y;
      a11 += cx * cx;
      a12 += cx * cy;
      a22 += cy * cy;
      b1 += cx * rhs;
      b2 += cy * rhs;
    }
  }
  const double det = a11 * a22 - a12 * a12;
  if (std::abs(det) <= 1e-12)
    throw GeometryError("anchors: degenerate geometry (collinear)");
  return {(a22 * b1 - a12 * b2) / det, (a11 * b2 - a12 * b1) / det};
}

}  // namespace

PositionFix localize(const BeaconMap& map,
                     const std::vector<RangeObservation>& ranges) {
  validate_beacon_map(map);

  std::vector<Anchor> anchors;
  std::vector<BeaconId> used;
  std::set<BeaconId> seen;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    const std::string path = "ranges[" + std::to_string(i) + "]";
    const BeaconPlacement* b = find_beacon(map, ranges[i].beacon);
    if (b == nullptr)
      throw ValidationError(path + ".beacon: unknown beacon id \"" +
                            ranges[i].beacon + "\"");
    if (!seen.insert(ranges[i].beacon).second)
      throw ValidationError(path + ".beacon: duplicate beacon id \"" +
                            ranges[i].beacon + "\"");
    if (!(ranges[i].radius_m > 0.0))
      throw ValidationError(path + ".radius_m: must be > 0");
    anchors.push_back({{b->x_m, b->y_m}, ranges[i].radius_m});
    used.push_back(ranges[i].beacon);
  }
  if (anchors.size() < 3)
    throw GeometryError("insufficient anchors: need at least 3 ranges");

  Position2D fix;
  if (anchors.size() == 3) {
    const CanonicalFrame frame = build_canonical_frame(
        anchors[0].pos, anchors[1].pos, anchors[2].pos);
    const Position2D c =
        trilaterate_canonical(anchors[0].radius, anchors[1].radius,
                              anchors[2].radius, frame.k(), frame.l(), frame.m());
    fix = frame.from_canonical(c);
  } else {
    fix = least_squares_fix(anchors);
  }

  double ss = 0.0;
  for (const auto& a : anchors) {
    const double miss = distance_between(fix, a.pos) - a.radius;
    ss += miss * miss;
  }
  return {fix, std::sqrt(ss / static_cast<double>(anchors.size())), used};
}

double position_error(const Position2D& estimated, const Position2D& real) {
  return std::hypot(estimated.x - real.x, estimated.y - real.y);
}

}  // namespace blip
