#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "harmofl/fourier.hpp"

namespace harmofl {

// Per-client moving-average amplitude. batches_seen == 0 iff avg is all zero.
struct AmplitudeState {
  Grid avg;
  double decay = 0.1;
  long batches_seen = 0;

  static AmplitudeState zero(GridShape shape, double decay_v) {
    return AmplitudeState{Grid(shape), decay_v, 0};
  }
};

// Server-side average of client amplitudes. Once frozen it never changes.
// version increments on every update so cached normalizations can be keyed.
struct GlobalAmplitude {
  Grid avg;
  bool frozen = false;
  std::uint64_t version = 0;
};

// Moving-average update. The first batch bootstraps the average to the
// in-batch mean; afterwards avg <- (1-v)*avg + v*mean(batch).
AmplitudeState update_average(const AmplitudeState& state,
                              std::span<const Grid> batch_amps);

// Replace each image's amplitude with the shared grid, keep its own phase:
// x -> idft2(recompose(amp, phase(dft2(x)))).
std::vector<Image> normalize_batch(const Grid& amplitude,
                                   std::span<const Image> batch);

// Same operation when the image's phase is already known (spectra are cached
// by the federation loop; one image's phase never changes).
Image normalize_with_phase(const Grid& amplitude, const Grid& phase);

// Unweighted mean of client averages (Algorithm uses 1/N, not p_i).
GlobalAmplitude aggregate_amplitudes(std::span<const AmplitudeState> states);

}  // namespace harmofl
