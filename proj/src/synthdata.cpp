#include "harmofl/synthdata.hpp"

#include <algorithm>
#include <cmath>

#include "harmofl/rng.hpp"

namespace harmofl {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// Grayscale shape on a dark background, replicated across channels, plus
// per-pixel Gaussian noise. Label 0 = rectangle, 1 = ellipse.
Image render_sample(const DatasetSpec& spec, int label, CounterRng& geom,
                    CounterRng& noise) {
  const int h = spec.height;
  const int w = spec.width;
  Image img(GridShape{h, w, spec.channels});

  const double cy = geom.next_uniform(0.3, 0.7) * h;
  const double cx = geom.next_uniform(0.3, 0.7) * w;
  const double ry = geom.next_uniform(0.12, 0.30) * h;
  const double rx = geom.next_uniform(0.12, 0.30) * w;
  const double fg = geom.next_uniform(0.5, 0.9);
  const double bg = 0.1;

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double dy = (y + 0.5 - cy) / ry;
      const double dx = (x + 0.5 - cx) / rx;
      bool inside = label == 0 ? (std::abs(dy) <= 1.0 && std::abs(dx) <= 1.0)
                               : (dy * dy + dx * dx <= 1.0);
      const double base = inside ? fg : bg;
      for (int c = 0; c < spec.channels; ++c)
        img.at(y, x, c) = base + spec.noise_std * noise.next_gaussian();
    }
  }
  return img;
}

// Frequency radius in natural layout: distance to DC respecting wrap-around,
// so the same gain lands on a cell and its conjugate mirror.
double freq_radius(int u, int v, int h, int w) {
  const int fu = std::min(u, h - u);
  const int fv = std::min(v, w - v);
  return std::sqrt(static_cast<double>(fu) * fu + static_cast<double>(fv) * fv);
}

Image apply_shift(const Image& img, const ShiftProfile& p) {
  AmpPhase ap = decompose(dft2(img));
  const GridShape& s = img.shape();
  for (int c = 0; c < s.channels; ++c) {
    for (int u = 0; u < s.height; ++u) {
      for (int v = 0; v < s.width; ++v) {
        double& a = ap.amplitude.at(u, v, c);
        if (u == 0 && v == 0) {
          a = std::max(0.0, a + p.brightness_offset);
          continue;
        }
        a *= p.contrast_gain;
        const double r = freq_radius(u, v, s.height, s.width);
        for (const BandGain& b : p.band_gains)
          if (r >= b.radius_lo && r < b.radius_hi) a *= b.gain;
      }
    }
  }
  return idft2(recompose(ap.amplitude, ap.phase));
}

bool split_has_both_classes(const std::vector<int>& labels,
                            const std::vector<int>& idx) {
  bool c0 = false, c1 = false;
  for (int i : idx) (labels[i] == 0 ? c0 : c1) = true;
  return c0 && c1;
}

}  // namespace

void DatasetSpec::validate() const {
  if (num_clients < 1 || samples_per_client < 1)
    throw InputError("DatasetSpec: need at least one client and one sample");
  if (!is_pow2(height) || !is_pow2(width))
    throw DimensionError("DatasetSpec: dimensions must be powers of two");
  if (channels < 1) throw InputError("DatasetSpec: channels must be positive");
  if (!shifts.empty() && static_cast<int>(shifts.size()) != num_clients)
    throw InputError("DatasetSpec: shift profile count must match num_clients");
  for (const ShiftProfile& p : shifts) {
    if (p.contrast_gain <= 0.0) throw InputError("DatasetSpec: gains must be positive");
    for (const BandGain& b : p.band_gains)
      if (b.gain <= 0.0) throw InputError("DatasetSpec: gains must be positive");
  }
  if (noise_std < 0.0) throw InputError("DatasetSpec: noise_std must be nonnegative");
}

std::vector<ClientDataset> generate_clients(const DatasetSpec& spec,
                                            std::int64_t seed) {
  spec.validate();
  const ShiftProfile identity;

  std::vector<ClientDataset> out(spec.num_clients);
  for (int ci = 0; ci < spec.num_clients; ++ci) {
    const ShiftProfile& profile = spec.shifts.empty() ? identity : spec.shifts[ci];
    // In paired-content mode the render streams ignore the client index.
    const std::uint64_t render_client =
        spec.paired_content ? 0 : static_cast<std::uint64_t>(ci);

    ClientDataset ds;
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
      const std::uint64_t s =
          static_cast<std::uint64_t>(seed) + 1000003ull * attempt;
      ds = ClientDataset{};
      for (int m = 0; m < spec.samples_per_client; ++m) {
        CounterRng label_rng(StreamTag::kDatasetLabel, {s, render_client,
                                                        static_cast<std::uint64_t>(m)});
        CounterRng geom(StreamTag::kDatasetGeometry, {s, render_client,
                                                      static_cast<std::uint64_t>(m)});
        CounterRng noise(StreamTag::kDatasetNoise, {s, render_client,
                                                    static_cast<std::uint64_t>(m)});
        const int label = label_rng.next_double() < 0.5 ? 0 : 1;
        Image img = render_sample(spec, label, geom, noise);
        ds.images.push_back(apply_shift(img, profile));
        ds.labels.push_back(label);
      }
      const int n_eval = std::max(1, spec.samples_per_client / 5);
      for (int m = 0; m < spec.samples_per_client; ++m)
        (m < spec.samples_per_client - n_eval ? ds.train_idx : ds.eval_idx)
            .push_back(m);
      ok = split_has_both_classes(ds.labels, ds.train_idx) &&
           split_has_both_classes(ds.labels, ds.eval_idx);
    }
    if (!ok)
      throw DataError("generate_clients: could not produce both classes in both "
                      "splits after 10 attempts");
    out[ci] = std::move(ds);
  }
  return out;
}

double heterogeneity_metric(std::span<const ClientDataset> datasets) {
  if (datasets.size() < 2)
    throw InputError("heterogeneity_metric: need at least 2 clients");

  std::vector<Grid> means;
  means.reserve(datasets.size());
  for (const ClientDataset& ds : datasets) {
    if (ds.images.empty()) throw InputError("heterogeneity_metric: empty client");
    Grid mean(ds.images[0].shape());
    for (const Image& img : ds.images) {
      Grid amp = decompose(dft2(img)).amplitude;
      for (std::size_t i = 0; i < amp.size(); ++i) mean[i] += amp[i];
    }
    for (std::size_t i = 0; i < mean.size(); ++i)
      mean[i] /= static_cast<double>(ds.images.size());
    means.push_back(std::move(mean));
  }

  Grid grand(means[0].shape());
  for (const Grid& m : means) {
    require_same_shape(grand, m, "heterogeneity_metric");
    for (std::size_t i = 0; i < grand.size(); ++i) grand[i] += m[i];
  }
  double grand_norm = 0.0;
  for (std::size_t i = 0; i < grand.size(); ++i) {
    grand[i] /= static_cast<double>(means.size());
    grand_norm += grand[i] * grand[i];
  }
  grand_norm = std::sqrt(grand_norm);
  if (grand_norm == 0.0) return 0.0;

  double sum = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < means.size(); ++a) {
    for (std::size_t b = a + 1; b < means.size(); ++b) {
      double d = 0.0;
      for (std::size_t i = 0; i < means[a].size(); ++i) {
        const double diff = means[a][i] - means[b][i];
        d += diff * diff;
      }
      sum += std::sqrt(d);
      ++pairs;
    }
  }
  return sum / (static_cast<double>(pairs) * grand_norm);
}

}  // namespace harmofl
