#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "blip/core.hpp"
#include "blip/pathloss.hpp"

namespace blip {

// Scalar random-walk filter over an RSSI stream:
//   x_k = x_{k-1} + w,  w ~ N(0, q)
//   z_k = x_k + v,      v ~ N(0, r)
struct KalmanParams {
  double process_noise_q = 0.04;     // dB^2 per step, >= 0
  double measurement_noise_r = 4.0;  // dB^2, > 0
  double initial_estimate_dbm = -70.0;
  double initial_variance = 4.0;  // dB^2, > 0
  // Stream filters (filter_trace, snapshot, sessions) take the first sample
  // as the initial estimate, avoiding burn-in bias on short dwells;
  // kalman_init always uses initial_estimate_dbm.
  bool seed_from_first = true;
  bool degenerate = false;  // r was floored (calibration sigma == 0)
};

struct KalmanState {
  double estimate_dbm = 0.0;
  double variance = 1.0;  // > 0
  std::int64_t steps = 0;
};

void validate(const KalmanParams& params);

KalmanState kalman_init(const KalmanParams& params);

// One predict/update cycle:
//   prior = var + q; gain = prior / (prior + r)
//   est  += gain (z - est); var = (1 - gain) prior
KalmanState kalman_update(const KalmanState& state, double measurement_dbm,
                          const KalmanParams& params);

// Filtered estimate after each sample of a single-beacon trace sorted by
// timestamp. Output length equals input length.
std::vector<std::pair<std::int64_t, double>> filter_trace(
    const KalmanParams& params, const std::vector<RssiSample>& samples);

// r = sigma^2 from the calibration residuals, floored at 0.01 dB^2 (with
// the degenerate flag) when sigma == 0; q = r / 100; initial variance = r;
// estimate seeded from the first measurement.
KalmanParams default_params_from_fit(const FitResult& fit);
KalmanParams default_params_for_sigma(double sigma_db);

}  // namespace blip
