#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "harmofl/harmonize.hpp"
#include "harmofl/model.hpp"
#include "harmofl/perturb.hpp"
#include "harmofl/synthdata.hpp"

namespace harmofl {

enum class Algorithm { kFedAvg, kFedAvgAmpNorm, kHarmoFL };

const char* algorithm_name(Algorithm a);
std::optional<Algorithm> algorithm_from_name(std::string_view name);

struct FedConfig {
  int rounds = 1;        // T
  int num_clients = 1;   // N
  int local_steps = 1;   // K mini-batch steps
  int batch_size = 1;    // M
  int local_epochs = 1;  // multiplies K
  double eta_l = 0.01;
  double eta_g = 1.0;
  double alpha = 0.0;
  double decay_v = 0.1;
  int amp_share_rounds = 1;
  std::vector<double> client_weights;  // empty resolves to uniform
  Algorithm algorithm = Algorithm::kFedAvg;
  std::int64_t seed = 0;

  // Checks ranges, resolves default weights, forces alpha=0 for the
  // non-perturbing algorithms.
  void validate();

  int effective_steps() const { return local_steps * local_epochs; }
  bool uses_ampnorm() const { return algorithm != Algorithm::kFedAvg; }
};

struct ClientState {
  int id = 0;
  ClientDataset dataset;
  AmplitudeState amp_state;

  // Derived caches; values are pure functions of the dataset and the
  // amplitude grid version, so they never change observable behavior.
  std::vector<AmpPhase> train_spectra;  // by position in train_idx
  std::vector<AmpPhase> eval_spectra;   // by position in eval_idx
  std::uint64_t cached_version = 0;     // frozen-amplitude version used below
  std::vector<std::vector<double>> norm_train_features;
  std::vector<double> norm_eval_features;
};

struct RoundRecord {
  int round = 0;  // 1-based
  ParamVector global_before;
  ParamVector global_after;
  std::vector<std::vector<double>> snapshots;  // [client][step] ||th_ik - th||^2
  std::vector<double> train_loss;              // per client, mean over steps
  std::vector<double> eval_accuracy;           // per client
  std::vector<double> eval_loss;               // per client
  double train_loss_mean = 0.0;
  double eval_accuracy_mean = 0.0;
  double gamma = 0.0;
  std::vector<double> gamma_i;

  // Filled only when RunOptions.record_gradients is set.
  bool has_gradients = false;
  std::vector<ParamVector> full_batch_grads;  // dF_i at global_before
  std::vector<double> sigma_hat;              // minibatch-gradient std per client
  std::vector<double> f_i;                    // full-batch client losses
  double f_value = 0.0;                       // weighted sum of f_i
  std::vector<Grid> record_amps;              // amplitude basis per client (empty for raw)

  // Filled only when RunOptions.retain_param_snapshots is set.
  std::vector<std::vector<ParamVector>> param_snapshots;
};

struct ClientUpdateResult {
  ParamVector final_params;
  AmplitudeState amp_state;
  std::vector<double> snapshots;
  std::vector<ParamVector> param_snapshots;
  double mean_train_loss = 0.0;
};

// One client's local training for one round. global_amp may be null (use the
// client's own running average). Batch sampling is keyed by
// (cfg.seed, client.id, round), so scheduling order cannot matter.
ClientUpdateResult client_update(ClientState& client, const ParamVector& global_params,
                                 const GlobalAmplitude* global_amp, const FedConfig& cfg,
                                 int round, bool retain_params = false);

// theta <- theta + eta_g * sum_i p_i (theta_i - theta). With eta_g = 1 this is
// exactly weighted parameter averaging.
ParamVector server_aggregate(const ParamVector& global_params,
                             std::span<const ParamVector> client_finals,
                             const FedConfig& cfg);

struct RunOptions {
  bool parallel_clients = true;
  bool record_gradients = false;
  bool retain_param_snapshots = false;
};

std::vector<RoundRecord> run_federation(const FedConfig& cfg, const MLPArch& arch,
                                        const std::vector<ClientDataset>& datasets,
                                        const RunOptions& opts = {});

// Full-batch loss/gradient of one client's train split at params, with
// features produced exactly as client_update would produce them (raw for
// fedavg, normalized with `amp` otherwise). Used for drift estimation and
// reference optimization.
BackwardResult client_full_gradient(ClientState& client, const ParamVector& params,
                                    const FedConfig& cfg, const Grid* amp);

// Assembles the feature matrix for a set of dataset positions (train or eval
// side), applying the algorithm's normalization.
Batch make_client_batch(ClientState& client, const FedConfig& cfg, const Grid* amp,
                        std::span<const int> positions, bool eval_side,
                        std::uint64_t cache_version);

}  // namespace harmofl
