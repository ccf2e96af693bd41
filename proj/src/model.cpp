#include "harmofl/model.hpp"

#include <Eigen/Core>

#include <cmath>

#include "harmofl/rng.hpp"

namespace harmofl {

namespace {

using MatrixRM = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<MatrixRM>;
using MapConstMat = Eigen::Map<const MatrixRM>;
using MapVec = Eigen::Map<Eigen::VectorXd>;
using MapConstVec = Eigen::Map<const Eigen::VectorXd>;

void check_batch(const ParamVector& params, const Batch& batch) {
  if (batch.input_dim != params.arch.input_dim)
    throw ShapeError("batch feature dimension does not match model input");
  if (batch.size() == 0) throw InputError("empty batch");
  if (batch.features.size() != batch.size() * static_cast<std::size_t>(batch.input_dim))
    throw ShapeError("batch feature matrix size inconsistent with labels");
  for (int y : batch.labels)
    if (y < 0 || y >= params.arch.num_classes)
      throw InputError("label outside [0, num_classes)");
  for (double v : batch.features)
    if (!std::isfinite(v)) throw InputError("non-finite feature");
}

// Runs the forward pass; fills per-layer post-activation outputs when
// activations != nullptr (needed by backward). Returns the logits.
MatrixRM forward_layers(const ParamVector& params, const Batch& batch,
                        std::vector<MatrixRM>* activations) {
  const MLPArch& arch = params.arch;
  const auto dims = arch.layer_dims();
  const Eigen::Index m = static_cast<Eigen::Index>(batch.size());

  MatrixRM h = MapConstMat(batch.features.data(), m, arch.input_dim);
  std::size_t off = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    const auto [fan_in, fan_out] = dims[l];
    MapConstMat w(params.values.data() + off, fan_out, fan_in);
    off += static_cast<std::size_t>(fan_in) * fan_out;
    MapConstVec b(params.values.data() + off, fan_out);
    off += fan_out;
    MatrixRM z = h * w.transpose();
    z.rowwise() += b.transpose();
    if (l + 1 < dims.size()) z = z.array().tanh();
    if (activations) activations->push_back(z);
    h = std::move(z);
  }
  return h;
}

// Row-wise softmax cross-entropy; optionally emits d(loss)/d(logits).
double softmax_xent(const MatrixRM& logits, const std::vector<int>& labels,
                    MatrixRM* dlogits) {
  const Eigen::Index m = logits.rows();
  double loss = 0.0;
  if (dlogits) dlogits->resize(m, logits.cols());
  for (Eigen::Index r = 0; r < m; ++r) {
    const double zmax = logits.row(r).maxCoeff();
    double sum = 0.0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c)
      sum += std::exp(logits(r, c) - zmax);
    const double lse = std::log(sum) + zmax;
    loss += lse - logits(r, labels[r]);
    if (dlogits) {
      for (Eigen::Index c = 0; c < logits.cols(); ++c)
        (*dlogits)(r, c) = std::exp(logits(r, c) - lse) / static_cast<double>(m);
      (*dlogits)(r, labels[r]) -= 1.0 / static_cast<double>(m);
    }
  }
  return loss / static_cast<double>(m);
}

void check_arch_match(const ParamVector& x, const ParamVector& y, const char* what) {
  if (!(x.arch == y.arch))
    throw ShapeError(std::string(what) + ": parameter vectors have different architectures");
}

}  // namespace

void MLPArch::validate() const {
  if (input_dim <= 0) throw ShapeError("MLPArch: input_dim must be positive");
  for (int h : hidden_dims)
    if (h <= 0) throw ShapeError("MLPArch: hidden dims must be positive");
  if (num_classes < 2) throw ShapeError("MLPArch: need at least 2 classes");
}

std::vector<std::pair<int, int>> MLPArch::layer_dims() const {
  std::vector<std::pair<int, int>> dims;
  int in = input_dim;
  for (int h : hidden_dims) {
    dims.emplace_back(in, h);
    in = h;
  }
  dims.emplace_back(in, num_classes);
  return dims;
}

std::size_t MLPArch::param_count() const {
  std::size_t n = 0;
  for (auto [fan_in, fan_out] : layer_dims())
    n += static_cast<std::size_t>(fan_in) * fan_out + fan_out;
  return n;
}

ParamVector init_params(const MLPArch& arch, std::int64_t seed) {
  arch.validate();
  ParamVector p{arch, std::vector<double>(arch.param_count(), 0.0)};
  CounterRng rng(StreamTag::kParamInit, {static_cast<std::uint64_t>(seed)});
  std::size_t off = 0;
  for (auto [fan_in, fan_out] : arch.layer_dims()) {
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    const std::size_t wcount = static_cast<std::size_t>(fan_in) * fan_out;
    for (std::size_t i = 0; i < wcount; ++i)
      p.values[off + i] = rng.next_uniform(-bound, bound);
    off += wcount + fan_out;  // biases stay zero
  }
  return p;
}

double forward_loss(const ParamVector& params, const Batch& batch) {
  check_batch(params, batch);
  MatrixRM logits = forward_layers(params, batch, nullptr);
  return softmax_xent(logits, batch.labels, nullptr);
}

BackwardResult backward(const ParamVector& params, const Batch& batch) {
  check_batch(params, batch);
  const MLPArch& arch = params.arch;
  const auto dims = arch.layer_dims();
  const Eigen::Index m = static_cast<Eigen::Index>(batch.size());

  std::vector<MatrixRM> acts;
  acts.reserve(dims.size());
  MatrixRM logits = forward_layers(params, batch, &acts);

  BackwardResult result;
  result.grad = ParamVector{arch, std::vector<double>(params.values.size(), 0.0)};
  MatrixRM delta;
  result.loss = softmax_xent(logits, batch.labels, &delta);

  // Layer offsets for indexing the flat vector back-to-front.
  std::vector<std::size_t> offsets(dims.size());
  std::size_t off = 0;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    offsets[l] = off;
    off += static_cast<std::size_t>(dims[l].first) * dims[l].second + dims[l].second;
  }

  for (std::size_t l = dims.size(); l-- > 0;) {
    const auto [fan_in, fan_out] = dims[l];
    MapConstMat w(params.values.data() + offsets[l], fan_out, fan_in);
    MapMat dw(result.grad.values.data() + offsets[l], fan_out, fan_in);
    MapVec db(result.grad.values.data() + offsets[l] +
                  static_cast<std::size_t>(fan_in) * fan_out,
              fan_out);

    const bool first_layer = (l == 0);
    if (first_layer) {
      MapConstMat x(batch.features.data(), m, arch.input_dim);
      dw = delta.transpose() * x;
    } else {
      dw = delta.transpose() * acts[l - 1];
    }
    db = delta.colwise().sum();

    if (!first_layer) {
      // d/dz of tanh layer below: (delta @ W) * (1 - h^2)
      MatrixRM next = delta * w;
      next.array() *= (1.0 - acts[l - 1].array().square());
      delta = std::move(next);
    }
  }
  return result;
}

double accuracy(const ParamVector& params, const Batch& batch) {
  check_batch(params, batch);
  MatrixRM logits = forward_layers(params, batch, nullptr);
  std::size_t correct = 0;
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    Eigen::Index best = 0;
    logits.row(r).maxCoeff(&best);
    if (static_cast<int>(best) == batch.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(batch.size());
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
  check_arch_match(x, y, "axpy");
  ParamVector out = y;
  for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += a * x.values[i];
  return out;
}

double norm2(const ParamVector& x) {
  return MapConstVec(x.values.data(), static_cast<Eigen::Index>(x.values.size())).norm();
}

double dist2(const ParamVector& x, const ParamVector& y) {
  check_arch_match(x, y, "dist2");
  double s = 0.0;
  for (std::size_t i = 0; i < x.values.size(); ++i) {
    const double d = x.values[i] - y.values[i];
    s += d * d;
  }
  return s;
}

}  // namespace harmofl
