#include "blip/pathloss.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace blip {

double predict_rssi(const PathLossModel& model, double distance_m) {
  validate(model);
  if (!(distance_m > 0.0))
    throw ValidationError("distance_m: must be > 0");
  return model.rssi0_dbm - 10.0 * model.n * std::log10(distance_m / model.d0_m);
}

double distance_noiseless(const PathLossModel& model, double rssi_dbm) {
  validate(model);
  return model.d0_m * std::pow(10.0, (model.rssi0_dbm - rssi_dbm) / (10.0 * model.n));
}

double shadowing_shrink_factor(double n, double sigma_db) {
  const double a = sigma_db * std::numbers::ln10 / (10.0 * n);
  return std::exp(-0.5 * a * a);
}

double distance_noise_corrected(const PathLossModel& model, double rssi_dbm) {
  return distance_noiseless(model, rssi_dbm) *
         shadowing_shrink_factor(model.n, model.sigma_db);
}

FitResult fit_path_loss(const std::vector<CalibrationPoint>& points, double d0_m,
                        SigmaMode sigma_mode) {
  (void)sigma_mode;  // single mode: residual
  if (!(d0_m > 0.0)) throw ValidationError("d0_m: must be > 0");
  if (points.size() < 2)
    throw ValidationError("points: need at least 2 calibration points");

  std::set<double> distinct;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!(points[i].distance_m > 0.0))
      throw ValidationError("points[" + std::to_string(i) +
                            "].distance_m: must be > 0");
    if (!std::isfinite(points[i].rssi_dbm))
      throw ValidationError("points[" + std::to_string(i) +
                            "].rssi_dbm: not finite");
    distinct.insert(points[i].distance_m);
  }
  if (distinct.size() < 2)
    throw ValidationError("points: need >= 2 distinct distances (rank deficient)");

  // OLS of rssi = rssi0 - 10 n x with x = log10(d / d0).
  const double count = static_cast<double>(points.size());
  double sx = 0.0, sy = 0.0;
  for (const auto& p : points) {
    sx += std::log10(p.distance_m / d0_m);
    sy += p.rssi_dbm;
  }
  const double mx = sx / count, my = sy / count;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& p : points) {
    const double dx = std::log10(p.distance_m / d0_m) - mx;
    sxx += dx * dx;
    sxy += dx * (p.rssi_dbm - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;

  double ssr = 0.0;
  for (const auto& p : points) {
    const double r =
        p.rssi_dbm - (intercept + slope * std::log10(p.distance_m / d0_m));
    ssr += r * r;
  }

  FitResult fit;
  fit.model.n = -slope / 10.0;
  fit.model.rssi0_dbm = intercept;
  fit.model.d0_m = d0_m;
  fit.model.sigma_db =
      points.size() > 2 ? std::sqrt(ssr / (count - 2.0)) : 0.0;
  fit.rmse_db = std::sqrt(ssr / count);
  fit.point_count = static_cast<int>(points.size());
  if (!(fit.model.n > 0.0))
    throw ValidationError("fit: non-positive path loss exponent (rssi "
                          "increases with distance in the data)");
  return fit;
}

PathLossModel laboratory_model() { return {2.208, -68.99, 1.0, 2.0}; }

PathLossModel corridor_model() { return {2.341, -62.94, 1.0, 3.5}; }

}  // namespace blip
