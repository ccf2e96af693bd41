#include "harmofl/federation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include "harmofl/drift.hpp"
#include "harmofl/rng.hpp"

namespace harmofl {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kFedAvg: return "fedavg";
    case Algorithm::kFedAvgAmpNorm: return "fedavg_ampnorm";
    case Algorithm::kHarmoFL: return "harmofl";
  }
  return "?";
}

std::optional<Algorithm> algorithm_from_name(std::string_view name) {
  if (name == "fedavg") return Algorithm::kFedAvg;
  if (name == "fedavg_ampnorm") return Algorithm::kFedAvgAmpNorm;
  if (name == "harmofl") return Algorithm::kHarmoFL;
  return std::nullopt;
}

void FedConfig::validate() {
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (num_clients < 1) throw ConfigError("num_clients must be >= 1");
  if (local_steps < 1) throw ConfigError("local_steps must be >= 1");
  if (local_epochs < 1) throw ConfigError("local_epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  // eta_l = 0 is allowed so the no-movement drift base case is configurable.
  if (eta_l < 0.0 || !std::isfinite(eta_l)) throw ConfigError("eta_l must be >= 0");
  if (eta_g <= 0.0 || !std::isfinite(eta_g)) throw ConfigError("eta_g must be > 0");
  if (alpha < 0.0 || !std::isfinite(alpha)) throw ConfigError("alpha must be >= 0");
  if (decay_v < 0.0 || decay_v > 1.0) throw ConfigError("decay_v must be in [0,1]");
  if (amp_share_rounds < 0) throw ConfigError("amp_share_rounds must be >= 0");
  if (algorithm != Algorithm::kHarmoFL) alpha = 0.0;

  if (client_weights.empty()) {
    client_weights.assign(num_clients, 1.0 / static_cast<double>(num_clients));
  } else {
    if (static_cast<int>(client_weights.size()) != num_clients)
      throw ConfigError("client_weights length must equal num_clients");
    double sum = 0.0;
    for (double w : client_weights) {
      if (w < 0.0) throw ConfigError("client_weights must be nonnegative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ConfigError("client_weights must sum to 1");
  }
}

namespace {

void ensure_spectra(ClientState& client, bool eval_side) {
  auto& cache = eval_side ? client.eval_spectra : client.train_spectra;
  if (!cache.empty()) return;
  const auto& idx = eval_side ? client.dataset.eval_idx : client.dataset.train_idx;
  cache.reserve(idx.size());
  for (int i : idx) cache.push_back(decompose(dft2(client.dataset.images[i])));
}

void append_image(std::vector<double>& features, const Image& img) {
  features.insert(features.end(), img.data().begin(), img.data().end());
}

}  // namespace

Batch make_client_batch(ClientState& client, const FedConfig& cfg, const Grid* amp,
                        std::span<const int> positions, bool eval_side,
                        std::uint64_t cache_version) {
  const auto& idx = eval_side ? client.dataset.eval_idx : client.dataset.train_idx;
  const GridShape& shape = client.dataset.images.at(0).shape();
  const int dim = static_cast<int>(shape.size());

  Batch batch;
  batch.input_dim = dim;
  batch.features.reserve(positions.size() * static_cast<std::size_t>(dim));
  for (int pos : positions) batch.labels.push_back(client.dataset.labels[idx[pos]]);

  if (!cfg.uses_ampnorm() || amp == nullptr) {
    for (int pos : positions)
      append_image(batch.features, client.dataset.images[idx[pos]]);
    return batch;
  }

  ensure_spectra(client, eval_side);
  auto& spectra = eval_side ? client.eval_spectra : client.train_spectra;

  if (cache_version != 0 && client.cached_version != cache_version) {
    client.norm_train_features.assign(client.dataset.train_idx.size(), {});
    client.norm_eval_features.clear();
    client.cached_version = cache_version;
  }

  const bool cacheable = cache_version != 0;
  if (cacheable && eval_side) {
    if (client.norm_eval_features.empty()) {
      client.norm_eval_features.reserve(idx.size() * static_cast<std::size_t>(dim));
      for (std::size_t p = 0; p < idx.size(); ++p)
        append_image(client.norm_eval_features,
                     normalize_with_phase(*amp, spectra[p].phase));
    }
    for (int pos : positions)
      batch.features.insert(batch.features.end(),
                            client.norm_eval_features.begin() + pos * static_cast<std::ptrdiff_t>(dim),
                            client.norm_eval_features.begin() + (pos + 1) * static_cast<std::ptrdiff_t>(dim));
    return batch;
  }

  for (int pos : positions) {
    if (cacheable) {
      auto& cached = client.norm_train_features[pos];
      if (cached.empty())
        cached = normalize_with_phase(*amp, spectra[pos].phase).data();
      batch.features.insert(batch.features.end(), cached.begin(), cached.end());
    } else {
      append_image(batch.features, normalize_with_phase(*amp, spectra[pos].phase));
    }
  }
  return batch;
}

ClientUpdateResult client_update(ClientState& client, const ParamVector& global_params,
                                 const GlobalAmplitude* global_amp, const FedConfig& cfg,
                                 int round, bool retain_params) {
  if (client.dataset.train_idx.empty())
    throw DataError("client_update: empty client dataset");

  CounterRng rng(StreamTag::kBatchSampling,
                 {static_cast<std::uint64_t>(cfg.seed),
                  static_cast<std::uint64_t>(client.id),
                  static_cast<std::uint64_t>(round)});

  const std::size_t train_size = client.dataset.train_idx.size();
  const bool use_ampnorm = cfg.uses_ampnorm();
  const bool global_frozen = global_amp != nullptr && global_amp->frozen;
  const PerturbConfig pcfg{cfg.alpha, 1e-12};

  if (use_ampnorm) ensure_spectra(client, false);

  ClientUpdateResult result;
  result.final_params = global_params;
  const int steps = cfg.effective_steps();
  double loss_sum = 0.0;

  std::vector<int> positions(cfg.batch_size);
  for (int k = 0; k < steps; ++k) {
    for (int& p : positions)
      p = static_cast<int>(rng.next_below(train_size));

    const Grid* amp = nullptr;
    std::uint64_t version = 0;
    if (use_ampnorm) {
      std::vector<Grid> amps;
      amps.reserve(positions.size());
      for (int pos : positions) amps.push_back(client.train_spectra[pos].amplitude);
      client.amp_state = update_average(client.amp_state, amps);
      amp = global_frozen ? &global_amp->avg : &client.amp_state.avg;
      version = global_frozen ? global_amp->version : 0;
    }

    Batch batch = make_client_batch(client, cfg, amp, positions, false, version);

    StepTelemetry telemetry;
    if (cfg.algorithm == Algorithm::kHarmoFL) {
      auto [next, t] = harmofl_step(result.final_params, batch, cfg.eta_l, pcfg);
      result.final_params = std::move(next);
      telemetry = t;
    } else {
      auto [next, t] = sgd_step(result.final_params, batch, cfg.eta_l);
      result.final_params = std::move(next);
      telemetry = t;
    }
    loss_sum += telemetry.loss;
    result.snapshots.push_back(dist2(result.final_params, global_params));
    if (retain_params) result.param_snapshots.push_back(result.final_params);
  }

  result.amp_state = client.amp_state;
  result.mean_train_loss = loss_sum / static_cast<double>(steps);
  return result;
}

ParamVector server_aggregate(const ParamVector& global_params,
                             std::span<const ParamVector> client_finals,
                             const FedConfig& cfg) {
  if (client_finals.size() != static_cast<std::size_t>(cfg.num_clients))
    throw ShapeError("server_aggregate: expected one final per client");
  std::vector<double> delta(global_params.values.size(), 0.0);
  for (std::size_t i = 0; i < client_finals.size(); ++i) {
    if (!(client_finals[i].arch == global_params.arch))
      throw ShapeError("server_aggregate: architecture mismatch");
    const double p = cfg.client_weights[i];
    for (std::size_t j = 0; j < delta.size(); ++j)
      delta[j] += p * (client_finals[i].values[j] - global_params.values[j]);
  }
  ParamVector out = global_params;
  for (std::size_t j = 0; j < delta.size(); ++j)
    out.values[j] += cfg.eta_g * delta[j];
  return out;
}

BackwardResult client_full_gradient(ClientState& client, const ParamVector& params,
                                    const FedConfig& cfg, const Grid* amp) {
  std::vector<int> all(client.dataset.train_idx.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  Batch batch = make_client_batch(client, cfg, amp, all, false, 0);
  return backward(params, batch);
}

namespace {

// Amplitude grid to evaluate F_i against when no frozen global exists yet:
// the client's running average once it has seen a batch, otherwise the mean
// amplitude of the full train split (what the first-batch bootstrap yields).
Grid recording_amplitude(ClientState& client) {
  if (client.amp_state.batches_seen > 0) return client.amp_state.avg;
  ensure_spectra(client, false);
  Grid mean(client.train_spectra[0].amplitude.shape());
  for (const AmpPhase& ap : client.train_spectra)
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += ap.amplitude[i];
  for (std::size_t i = 0; i < mean.size(); ++i)
    mean[i] /= static_cast<double>(client.train_spectra.size());
  return mean;
}

void record_full_gradients(RoundRecord& rec, std::vector<ClientState>& states,
                           const ParamVector& params, const FedConfig& cfg,
                           const GlobalAmplitude* frozen) {
  rec.has_gradients = true;
  rec.f_value = 0.0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    ClientState& client = states[i];
    Grid local_amp;
    const Grid* amp = nullptr;
    if (cfg.uses_ampnorm()) {
      if (frozen != nullptr) {
        amp = &frozen->avg;
      } else {
        local_amp = recording_amplitude(client);
        amp = &local_amp;
      }
    }
    BackwardResult full = client_full_gradient(client, params, cfg, amp);
    rec.f_i.push_back(full.loss);
    rec.f_value += cfg.client_weights[i] * full.loss;

    // Minibatch gradient spread around the full-batch gradient, over the
    // deterministic chunking of the train split.
    const std::size_t n = client.dataset.train_idx.size();
    const std::size_t m = static_cast<std::size_t>(cfg.batch_size);
    double dev_sum = 0.0;
    std::size_t chunks = 0;
    for (std::size_t lo = 0; lo < n; lo += m, ++chunks) {
      const std::size_t hi = std::min(lo + m, n);
      std::vector<int> pos(hi - lo);
      for (std::size_t j = lo; j < hi; ++j) pos[j - lo] = static_cast<int>(j);
      Batch chunk = make_client_batch(client, cfg, amp, pos, false, 0);
      BackwardResult g = backward(params, chunk);
      dev_sum += dist2(g.grad, full.grad);
    }
    rec.sigma_hat.push_back(std::sqrt(dev_sum / static_cast<double>(chunks)));
    rec.full_batch_grads.push_back(std::move(full.grad));
  }
}

}  // namespace

std::vector<RoundRecord> run_federation(const FedConfig& cfg_in, const MLPArch& arch,
                                        const std::vector<ClientDataset>& datasets,
                                        const RunOptions& opts) {
  FedConfig cfg = cfg_in;
  cfg.validate();
  arch.validate();
  if (datasets.size() != static_cast<std::size_t>(cfg.num_clients))
    throw ConfigError("run_federation: dataset count must equal num_clients");
  for (const ClientDataset& ds : datasets) {
    if (ds.images.empty()) throw DataError("run_federation: empty client dataset");
    if (static_cast<int>(ds.images[0].shape().size()) != arch.input_dim)
      throw ShapeError("run_federation: image size does not match model input_dim");
  }

  const GridShape shape = datasets[0].images[0].shape();
  std::vector<ClientState> states;
  states.reserve(datasets.size());
  for (std::size_t i = 0; i < datasets.size(); ++i)
    states.push_back(ClientState{static_cast<int>(i), datasets[i],
                                 AmplitudeState::zero(shape, cfg.decay_v)});

  ParamVector params = init_params(arch, cfg.seed);
  std::optional<GlobalAmplitude> global_amp;
  std::uint64_t amp_version = 0;

  std::vector<RoundRecord> records;
  records.reserve(cfg.rounds);

  for (int t = 1; t <= cfg.rounds; ++t) {
    RoundRecord rec;
    rec.round = t;
    rec.global_before = params;

    const GlobalAmplitude* frozen =
        (global_amp.has_value() && global_amp->frozen) ? &*global_amp : nullptr;

    if (opts.record_gradients)
      record_full_gradients(rec, states, params, cfg, frozen);

    std::vector<ClientUpdateResult> results(states.size());
    auto run_client = [&](std::size_t i) {
      results[i] = client_update(states[i], params, frozen, cfg, t,
                                 opts.retain_param_snapshots);
    };
    if (opts.parallel_clients && states.size() > 1) {
      std::vector<std::thread> workers;
      std::vector<std::exception_ptr> errors(states.size());
      for (std::size_t i = 0; i < states.size(); ++i)
        workers.emplace_back([&, i] {
          try {
            run_client(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        });
      for (std::thread& w : workers) w.join();
      for (std::size_t i = 0; i < errors.size(); ++i) {
        if (errors[i]) {
          try {
            std::rethrow_exception(errors[i]);
          } catch (const std::exception& e) {
            throw Error("round " + std::to_string(t) + " client " +
                        std::to_string(i) + ": " + e.what());
          }
        }
      }
    } else {
      for (std::size_t i = 0; i < states.size(); ++i) {
        try {
          run_client(i);
        } catch (const std::exception& e) {
          throw Error("round " + std::to_string(t) + " client " +
                      std::to_string(i) + ": " + e.what());
        }
      }
    }

    std::vector<ParamVector> finals;
    finals.reserve(results.size());
    for (std::size_t i = 0; i < results.size(); ++i) {
      finals.push_back(results[i].final_params);
      rec.snapshots.push_back(std::move(results[i].snapshots));
      rec.train_loss.push_back(results[i].mean_train_loss);
      if (opts.retain_param_snapshots)
        rec.param_snapshots.push_back(std::move(results[i].param_snapshots));
    }

    ParamVector params_after = server_aggregate(params, finals, cfg);

    if (cfg.uses_ampnorm() && t <= cfg.amp_share_rounds) {
      std::vector<AmplitudeState> amp_states;
      amp_states.reserve(states.size());
      for (const ClientState& s : states) amp_states.push_back(s.amp_state);
      GlobalAmplitude agg = aggregate_amplitudes(amp_states);
      agg.version = ++amp_version;
      agg.frozen = (t == cfg.amp_share_rounds);
      global_amp = std::move(agg);
    }

    // Evaluation of the aggregated model on each client's held-out split.
    const GlobalAmplitude* ga_eval = nullptr;
    GlobalAmplitude fly;
    if (cfg.uses_ampnorm()) {
      if (global_amp.has_value()) {
        ga_eval = &*global_amp;
      } else {
        std::vector<AmplitudeState> amp_states;
        for (const ClientState& s : states) amp_states.push_back(s.amp_state);
        fly = aggregate_amplitudes(amp_states);
        ga_eval = &fly;
      }
    }
    for (ClientState& client : states) {
      std::vector<int> all(client.dataset.eval_idx.size());
      for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
      const Grid* amp = ga_eval != nullptr ? &ga_eval->avg : nullptr;
      const std::uint64_t version =
          (ga_eval != nullptr && ga_eval->frozen) ? ga_eval->version : 0;
      Batch eval_batch = make_client_batch(client, cfg, amp, all, true, version);
      rec.eval_accuracy.push_back(accuracy(params_after, eval_batch));
      rec.eval_loss.push_back(forward_loss(params_after, eval_batch));
    }

    double acc_sum = 0.0, loss_sum = 0.0;
    for (std::size_t i = 0; i < states.size(); ++i) {
      acc_sum += rec.eval_accuracy[i];
      loss_sum += rec.train_loss[i];
    }
    rec.eval_accuracy_mean = acc_sum / static_cast<double>(states.size());
    rec.train_loss_mean = loss_sum / static_cast<double>(states.size());

    GammaResult gamma = empirical_gamma(rec.snapshots);
    rec.gamma = gamma.gamma;
    rec.gamma_i = std::move(gamma.gamma_i);

    rec.global_after = params_after;
    params = std::move(params_after);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace harmofl
