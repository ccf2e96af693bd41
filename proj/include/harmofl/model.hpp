#pragma once

#include <cstdint>
#include <vector>

#include "harmofl/errors.hpp"

namespace harmofl {

enum class Activation { kTanh };

// Fully-connected classifier layout. Empty hidden_dims gives multinomial
// logistic regression (the convex mode).
struct MLPArch {
  int input_dim = 0;
  std::vector<int> hidden_dims;
  int num_classes = 2;
  Activation activation = Activation::kTanh;

  bool operator==(const MLPArch&) const = default;
  void validate() const;
  std::size_t param_count() const;
  // Layer dimension pairs (fan_in, fan_out) from input to logits.
  std::vector<std::pair<int, int>> layer_dims() const;
};

// Flat parameter vector. Layout per layer: weights (fan_out x fan_in,
// row-major), then biases (fan_out).
struct ParamVector {
  MLPArch arch;
  std::vector<double> values;
};

struct Batch {
  int input_dim = 0;
  std::vector<double> features;  // M x input_dim, row-major
  std::vector<int> labels;       // M class indices

  std::size_t size() const { return labels.size(); }
};

// Deterministic init: weights uniform in +-sqrt(6/(fan_in+fan_out)) from a
// counter-based stream keyed by seed; biases zero.
ParamVector init_params(const MLPArch& arch, std::int64_t seed);

// Mean softmax cross-entropy over the batch (log-sum-exp stabilized).
double forward_loss(const ParamVector& params, const Batch& batch);

struct BackwardResult {
  double loss = 0.0;
  ParamVector grad;
};

// Loss plus the exact analytic gradient of forward_loss.
BackwardResult backward(const ParamVector& params, const Batch& batch);

// Fraction of batch samples whose argmax logit matches the label.
double accuracy(const ParamVector& params, const Batch& batch);

// a*x + y elementwise.
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);
double norm2(const ParamVector& x);
// Squared Euclidean distance.
double dist2(const ParamVector& x, const ParamVector& y);

}  // namespace harmofl
