#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "harmofl/model.hpp"

namespace harmofl {

struct PerturbConfig {
  double alpha = 0.05;
  double grad_floor = 1e-12;  // below this norm the gradient counts as zero
};

struct StepTelemetry {
  double loss = 0.0;
  double grad_norm = 0.0;            // ||g1|| at the unperturbed point
  double perturbed_grad_norm = 0.0;  // ||g_delta||
};

// alpha * g / ||g||_2, or the zero vector when ||g||_2 < grad_floor.
ParamVector perturbation(const ParamVector& grad, const PerturbConfig& cfg);

// Evaluates (loss, grad) at a parameter point. Used by the generic two-pass
// step so scalar toy objectives can exercise the same code path as the model.
using LossGradFn =
    std::function<std::pair<double, std::vector<double>>(const std::vector<double>&)>;

struct RawStepResult {
  std::vector<double> params;
  StepTelemetry telemetry;
};

// Two-pass perturbed descent on a flat vector: g1 at x, delta from g1, g_d at
// x + delta, then x - eta*g_d. The update is anchored at the unperturbed x.
// When delta is zero the second pass reuses g1, which keeps the alpha=0 case
// bitwise identical to a plain gradient step.
RawStepResult perturbed_step(const std::vector<double>& x, const LossGradFn& fn,
                             double eta_l, const PerturbConfig& cfg);

// The model-based HarmoFL local step (Eq. over a single sampled batch).
std::pair<ParamVector, StepTelemetry> harmofl_step(const ParamVector& params,
                                                   const Batch& batch, double eta_l,
                                                   const PerturbConfig& cfg);

// Plain SGD step on the same batch, for the baselines.
std::pair<ParamVector, StepTelemetry> sgd_step(const ParamVector& params,
                                               const Batch& batch, double eta_l);

}  // namespace harmofl
