#include "blip/kalman.hpp"

#include <cmath>

namespace blip {

void validate(const KalmanParams& params) {
  if (!std::isfinite(params.process_noise_q) || params.process_noise_q < 0.0)
    throw ValidationError("params.process_noise_q: must be >= 0");
  if (!std::isfinite(params.measurement_noise_r) || params.measurement_noise_r <= 0.0)
    throw ValidationError("params.measurement_noise_r: must be > 0");
  if (!std::isfinite(params.initial_estimate_dbm))
    throw ValidationError("params.initial_estimate_dbm: not finite");
  if (!std::isfinite(params.initial_variance) || params.initial_variance <= 0.0)
    throw ValidationError("params.initial_variance: must be > 0");
}

KalmanState kalman_init(const KalmanParams& params) {
  validate(params);
  return {params.initial_estimate_dbm, params.initial_variance, 0};
}

KalmanState kalman_update(const KalmanState& state, double measurement_dbm,
                          const KalmanParams& params) {
  validate(params);
  if (!std::isfinite(measurement_dbm))
    throw ValidationError("measurement_dbm: not finite");
  const double prior_var = state.variance + params.process_noise_q;
  const double gain = prior_var / (prior_var + params.measurement_noise_r);
  KalmanState next;
  next.estimate_dbm = state.estimate_dbm + gain * (measurement_dbm - state.estimate_dbm);
  next.variance = (1.0 - gain) * prior_var;
  next.steps = state.steps + 1;
  return next;
}

std::vector<std::pair<std::int64_t, double>> filter_trace(
    const KalmanParams& params, const std::vector<RssiSample>& samples) {
  validate(params);
  std::vector<std::pair<std::int64_t, double>> out;
  if (samples.empty()) return out;

  for (std::size_t i = 0; i < samples.size(); ++i) {
    validate(samples[i]);
    if (samples[i].beacon != samples[0].beacon)
      throw ValidationError("samples: mixed beacon ids");
    if (i > 0 && samples[i].timestamp_ms < samples[i - 1].timestamp_ms)
      throw ValidationError("samples: unsorted timestamps");
  }

  KalmanParams p = params;
  if (p.seed_from_first) p.initial_estimate_dbm = samples[0].rssi_dbm;
  KalmanState state = kalman_init(p);
  out.reserve(samples.size());
  for (const auto& s : samples) {
    state = kalman_update(state, s.rssi_dbm, p);
    out.emplace_back(s.timestamp_ms, state.estimate_dbm);
  }
  return out;
}

KalmanParams default_params_for_sigma(double sigma_db) {
  KalmanParams p;
  p.degenerate = !(sigma_db > 0.0);
  const double r = p.degenerate ? 0.01 : sigma_db * sigma_db;
  p.measurement_noise_r = r;
  p.process_noise_q = r / 100.0;
  p.initial_variance = r;
  p.initial_estimate_dbm = 0.0;  // unused: seeded from the first measurement
  p.seed_from_first = true;
  return p;
}

KalmanParams default_params_from_fit(const FitResult& fit) {
  validate(fit.model);
  return default_params_for_sigma(fit.model.sigma_db);
}

}  // namespace blip
