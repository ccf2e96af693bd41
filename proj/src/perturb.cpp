#include "harmofl/perturb.hpp"

#include <algorithm>
#include <cmath>

namespace harmofl {

namespace {

double vec_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool is_zero(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

std::vector<double> scaled_direction(const std::vector<double>& grad, double alpha,
                                     double grad_floor) {
  for (double g : grad)
    if (!std::isfinite(g)) throw InputError("perturbation: non-finite gradient");
  std::vector<double> delta(grad.size(), 0.0);
  const double gnorm = vec_norm(grad);
  if (alpha == 0.0 || gnorm < grad_floor) return delta;
  const double scale = alpha / gnorm;
  for (std::size_t i = 0; i < grad.size(); ++i) delta[i] = scale * grad[i];
  return delta;
}

}  // namespace

ParamVector perturbation(const ParamVector& grad, const PerturbConfig& cfg) {
  return ParamVector{grad.arch,
                     scaled_direction(grad.values, cfg.alpha, cfg.grad_floor)};
}

RawStepResult perturbed_step(const std::vector<double>& x, const LossGradFn& fn,
                             double eta_l, const PerturbConfig& cfg) {
  auto [loss, g1] = fn(x);
  StepTelemetry t;
  t.loss = loss;
  t.grad_norm = vec_norm(g1);

  std::vector<double> delta = scaled_direction(g1, cfg.alpha, cfg.grad_floor);
  std::vector<double> g_delta;
  if (is_zero(delta)) {
    g_delta = g1;  // same point, deterministic gradient: reuse pass one
  } else {
    std::vector<double> shifted = x;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += delta[i];
    g_delta = fn(shifted).second;
  }
  t.perturbed_grad_norm = vec_norm(g_delta);

  RawStepResult out{x, t};
  for (std::size_t i = 0; i < out.params.size(); ++i)
    out.params[i] -= eta_l * g_delta[i];
  return out;
}

std::pair<ParamVector, StepTelemetry> harmofl_step(const ParamVector& params,
                                                   const Batch& batch, double eta_l,
                                                   const PerturbConfig& cfg) {
  LossGradFn fn = [&](const std::vector<double>& v) {
    BackwardResult r = backward(ParamVector{params.arch, v}, batch);
    return std::make_pair(r.loss, std::move(r.grad.values));
  };
  RawStepResult r = perturbed_step(params.values, fn, eta_l, cfg);
  return {ParamVector{params.arch, std::move(r.params)}, r.telemetry};
}

std::pair<ParamVector, StepTelemetry> sgd_step(const ParamVector& params,
                                               const Batch& batch, double eta_l) {
  // Plain SGD is the alpha=0 collapse of the two-pass step; sharing the code
  // path keeps the two bitwise interchangeable.
  return harmofl_step(params, batch, eta_l, PerturbConfig{0.0, 1e-12});
}

}  // namespace harmofl
