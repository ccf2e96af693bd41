#include "harmofl/fourier.hpp"

#include <cmath>
#include <complex>
#include <vector>

namespace harmofl {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place iterative radix-2 Cooley-Tukey. sign = -1 forward, +1 inverse.
void fft_inplace(std::complex<double>* a, int n, int sign) {
  // bit-reversal permutation
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (int len = 2; len <= n; len <<= 1) {
    const double ang = sign * 2.0 * kPi / len;
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
}

// 2D transform of one channel held in a contiguous H*W complex buffer.
void fft2_channel(std::vector<std::complex<double>>& buf, int h, int w, int sign) {
  for (int r = 0; r < h; ++r) fft_inplace(buf.data() + static_cast<std::size_t>(r) * w, w, sign);
  std::vector<std::complex<double>> col(h);
  for (int c = 0; c < w; ++c) {
    for (int r = 0; r < h; ++r) col[r] = buf[static_cast<std::size_t>(r) * w + c];
    fft_inplace(col.data(), h, sign);
    for (int r = 0; r < h; ++r) buf[static_cast<std::size_t>(r) * w + c] = col[r];
  }
}

}  // namespace

Spectrum dft2(const Image& img) {
  const GridShape& s = img.shape();
  if (!is_pow2(s.height) || !is_pow2(s.width))
    throw DimensionError("dft2: dimensions must be powers of two");
  if (!all_finite(img)) throw InputError("dft2: non-finite image data");

  Spectrum out{Grid(s), Grid(s)};
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  std::vector<std::complex<double>> buf(plane);
  for (int c = 0; c < s.channels; ++c) {
    const double* src = img.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) buf[i] = {src[i], 0.0};
    fft2_channel(buf, s.height, s.width, -1);
    double* re = out.real.data().data() + c * plane;
    double* im = out.imag.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      re[i] = buf[i].real();
      im[i] = buf[i].imag();
    }
  }
  return out;
}

Image idft2(const Spectrum& spec) {
  const GridShape& s = spec.shape();
  if (!is_pow2(s.height) || !is_pow2(s.width))
    throw DimensionError("idft2: dimensions must be powers of two");
  require_same_shape(spec.real, spec.imag, "idft2");

  Image out(s);
  const std::size_t plane = static_cast<std::size_t>(s.height) * s.width;
  const double scale = 1.0 / (static_cast<double>(s.height) * s.width);
  std::vector<std::complex<double>> buf(plane);
  double max_mag = 0.0;
  double max_imag = 0.0;
  for (int c = 0; c < s.channels; ++c) {
    const double* re = spec.real.data().data() + c * plane;
    const double* im = spec.imag.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) buf[i] = {re[i], im[i]};
    fft2_channel(buf, s.height, s.width, +1);
    double* dst = out.data().data() + c * plane;
    for (std::size_t i = 0; i < plane; ++i) {
      const double r = buf[i].real() * scale;
      const double m = buf[i].imag() * scale;
      dst[i] = r;
      max_mag = std::max(max_mag, std::abs(std::complex<double>(r, m)));
      max_imag = std::max(max_imag, std::abs(m));
    }
  }
  if (max_imag > 1e-6 * max_mag)
    throw SpectralError("idft2: imaginary residue exceeds guard threshold");
  return out;
}

AmpPhase decompose(const Spectrum& spec) {
  require_same_shape(spec.real, spec.imag, "decompose");
  const GridShape& s = spec.shape();
  AmpPhase out{Grid(s), Grid(s)};
  for (std::size_t i = 0; i < spec.real.size(); ++i) {
    const double re = spec.real[i];
    const double im = spec.imag[i];
    out.amplitude[i] = std::hypot(re, im);
    if (re == 0.0 && im == 0.0) {
      out.phase[i] = 0.0;
    } else {
      double ph = std::atan2(im, re);
      if (ph <= -kPi) ph += 2.0 * kPi;  // keep range (-pi, pi]
      out.phase[i] = ph;
    }
  }
  return out;
}

Spectrum recompose(const Grid& amplitude, const Grid& phase) {
  require_same_shape(amplitude, phase, "recompose");
  const GridShape& s = amplitude.shape();
  Spectrum out{Grid(s), Grid(s)};
  for (std::size_t i = 0; i < amplitude.size(); ++i) {
    const double a = amplitude[i];
    if (a < 0.0) throw InputError("recompose: negative amplitude cell");
    out.real[i] = a * std::cos(phase[i]);
    out.imag[i] = a * std::sin(phase[i]);
  }
  return out;
}

}  // namespace harmofl
