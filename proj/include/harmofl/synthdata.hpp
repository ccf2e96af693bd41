#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "harmofl/fourier.hpp"

namespace harmofl {

// Amplitude annulus gain: cells with frequency radius in [radius_lo,
// radius_hi) get scaled. Never touches the DC cell.
struct BandGain {
  double radius_lo = 0.0;
  double radius_hi = 0.0;
  double gain = 1.0;
};

// Per-client appearance shift, applied entirely in the amplitude spectrum.
struct ShiftProfile {
  double contrast_gain = 1.0;     // multiplies all non-DC amplitudes
  double brightness_offset = 0.0; // added to the DC amplitude (clamped >= 0)
  std::vector<BandGain> band_gains;
};

enum class LabelRule { kShape };  // rectangle -> 0, ellipse -> 1

struct DatasetSpec {
  int num_clients = 1;
  int samples_per_client = 100;
  int height = 32;
  int width = 32;
  int channels = 3;
  std::vector<ShiftProfile> shifts;  // one per client; empty = identity for all
  double noise_std = 0.0;
  LabelRule label_rule = LabelRule::kShape;
  // All clients render the same underlying shapes; only shifts differ.
  bool paired_content = false;

  void validate() const;
};

struct ClientDataset {
  std::vector<Image> images;
  std::vector<int> labels;
  std::vector<int> train_idx;  // 80%
  std::vector<int> eval_idx;   // 20%
};

// Deterministic per (spec, seed). Throws DataError if after 10 reseeded
// attempts a client split is missing one of the classes.
std::vector<ClientDataset> generate_clients(const DatasetSpec& spec,
                                            std::int64_t seed);

// Mean pairwise L2 distance between clients' mean amplitude grids,
// normalized by the norm of the grand-mean amplitude.
double heterogeneity_metric(std::span<const ClientDataset> datasets);

}  // namespace harmofl
