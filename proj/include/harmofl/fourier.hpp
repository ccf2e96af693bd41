#pragma once

#include "harmofl/grid.hpp"

namespace harmofl {

// Complex frequency grid, split into real and imaginary planes.
struct Spectrum {
  Grid real;
  Grid imag;

  const GridShape& shape() const { return real.shape(); }
};

// Polar decomposition of a Spectrum. amplitude >= 0, phase in (-pi, pi].
struct AmpPhase {
  Grid amplitude;
  Grid phase;

  const GridShape& shape() const { return amplitude.shape(); }
};

// Forward 2D DFT, unnormalized, applied independently per channel.
// Dimensions must be powers of two (radix-2 transform).
Spectrum dft2(const Image& img);

// Inverse 2D DFT with 1/(H*W) normalization. Throws SpectralError if the
// imaginary residue of the result is not negligible relative to the largest
// output magnitude (malformed, non-conjugate-symmetric spectrum).
Image idft2(const Spectrum& spec);

// amplitude = sqrt(re^2 + im^2), phase = atan2(im, re); phase of a (0,0)
// cell is defined as 0.
AmpPhase decompose(const Spectrum& spec);

// real = amp*cos(phase), imag = amp*sin(phase). amp must be nonnegative.
Spectrum recompose(const Grid& amplitude, const Grid& phase);

}  // namespace harmofl
