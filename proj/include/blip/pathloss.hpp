#pragma once

#include <vector>

#include "blip/core.hpp"

namespace blip {

// One calibration measurement taken at a known distance from the beacon.
struct CalibrationPoint {
  double distance_m = 1.0;  // > 0
  double rssi_dbm = 0.0;
};

struct FitResult {
  PathLossModel model;
  double rmse_db = 0.0;  // sqrt(SSR / N) over the fitted points
  int point_count = 0;   // >= 2
};

enum class SigmaMode { residual };

// Mean of the shadowing model: rssi0 - 10 n log10(d / d0).
// Strictly decreasing in distance; throws on distance <= 0.
double predict_rssi(const PathLossModel& model, double distance_m);

// Inversion ignoring shadowing noise: d = d0 10^((rssi0 - rssi) / (10 n)).
// Exact inverse of predict_rssi.
double distance_noiseless(const PathLossModel& model, double rssi_dbm);

// Inversion for a noisy RSSI:
//   d = distance_noiseless * exp(-0.5 (sigma ln10 / (10 n))^2)
// Always <= the noiseless value; equal iff sigma == 0.
double distance_noise_corrected(const PathLossModel& model, double rssi_dbm);

// The correction ratio above; depends only on n and sigma.
double shadowing_shrink_factor(double n, double sigma_db);

// Ordinary least squares of rssi on log10(d / d0). sigma is the regression
// standard error sqrt(SSR / (N - 2)) (zero for N == 2 or an exact fit);
// rmse is sqrt(SSR / N). Multiple samples at one distance enter
// individually. Throws on fewer than two distinct distances.
FitResult fit_path_loss(const std::vector<CalibrationPoint>& points,
                        double d0_m = 1.0,
                        SigmaMode sigma_mode = SigmaMode::residual);

// Fitted parameters from the two measurement campaigns. The shadowing
// values are defaults for simulation (corridor noisier than laboratory)
// and can be overridden in any map file.
PathLossModel laboratory_model();  // n=2.208, rssi0=-68.99, sigma=2.0
PathLossModel corridor_model();    // n=2.341, rssi0=-62.94, sigma=3.5

}  // namespace blip
