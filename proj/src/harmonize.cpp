#include "harmofl/harmonize.hpp"

namespace harmofl {

AmplitudeState update_average(const AmplitudeState& state,
                              std::span<const Grid> batch_amps) {
  if (batch_amps.empty()) throw InputError("update_average: empty batch");
  Grid mean(batch_amps[0].shape());
  for (const Grid& a : batch_amps) {
    require_same_shape(mean, a, "update_average");
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i] < 0.0) throw InputError("update_average: negative amplitude");
      mean[i] += a[i];
    }
  }
  const double inv_m = 1.0 / static_cast<double>(batch_amps.size());
  for (std::size_t i = 0; i < mean.size(); ++i) mean[i] *= inv_m;

  AmplitudeState next = state;
  if (state.batches_seen == 0) {
    next.avg = std::move(mean);
  } else {
    require_same_shape(state.avg, mean, "update_average");
    const double v = state.decay;
    for (std::size_t i = 0; i < mean.size(); ++i)
      next.avg[i] = (1.0 - v) * state.avg[i] + v * mean[i];
  }
  next.batches_seen = state.batches_seen + 1;
  return next;
}

Image normalize_with_phase(const Grid& amplitude, const Grid& phase) {
  return idft2(recompose(amplitude, phase));
}

std::vector<Image> normalize_batch(const Grid& amplitude,
                                   std::span<const Image> batch) {
  std::vector<Image> out;
  out.reserve(batch.size());
  for (const Image& x : batch) {
    require_same_shape(amplitude, x, "normalize_batch");
    out.push_back(normalize_with_phase(amplitude, decompose(dft2(x)).phase));
  }
  return out;
}

GlobalAmplitude aggregate_amplitudes(std::span<const AmplitudeState> states) {
  if (states.empty()) throw InputError("aggregate_amplitudes: no clients");
  Grid sum(states[0].avg.shape());
  for (const AmplitudeState& s : states) {
    require_same_shape(sum, s.avg, "aggregate_amplitudes");
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += s.avg[i];
  }
  const double inv_n = 1.0 / static_cast<double>(states.size());
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] *= inv_n;
  return GlobalAmplitude{std::move(sum), false, 0};
}

}  // namespace harmofl
