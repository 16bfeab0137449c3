// Copyright 2026 The DPAC Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
// Monte Carlo harness: one config describes graph, data, budget, algorithm,
// crypto parameters, and trial count; trials are deterministic functions of
// (seed, trial index) and embarrassingly parallel.

#ifndef DPAC_EXPERIMENTS_HPP
#define DPAC_EXPERIMENTS_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "dpac/common.hpp"
#include "dpac/consensus.hpp"
#include "dpac/dishuf.hpp"
#include "dpac/graph.hpp"
#include "dpac/privacy.hpp"
#include "dpac/rng.hpp"
#include "dpac/simnet.hpp"

namespace dpac::experiments {

// Stream tags for the documented splitting rule: the stream for X is
// Rng(seed, {tag_X, ...}).
inline constexpr std::uint64_t kDataTag = 0x64617461;    // config data draw
inline constexpr std::uint64_t kKeysTag = 0x6b657973;    // shared keypair batch
inline constexpr std::uint64_t kTrialTag = 0x74726961;   // per-trial stream

struct DataSpec {
  std::vector<double> values;  // explicit when non-empty
  double low = 0.0;
  double high = 25.0;
  std::optional<double> force_mean;  // shift the draw so the mean is exact
};

enum class LimitMode { iterate, exact, automatic };

inline std::string to_string(LimitMode m) {
  switch (m) {
    case LimitMode::iterate: return "iterate";
    case LimitMode::exact: return "exact";
    case LimitMode::automatic: return "auto";
  }
  return "?";
}

inline LimitMode limit_mode_from_string(const std::string& s) {
  if (s == "iterate") return LimitMode::iterate;
  if (s == "exact") return LimitMode::exact;
  if (s == "auto") return LimitMode::automatic;
  throw ValidationError("unknown limit mode: " + s);
}

// States beyond this magnitude cannot carry a meaningful O(1) consensus
// limit through extended-precision iteration; trials switch to the exact
// integer-domain limit instead (the iteration limit equals mean(x0)).
inline constexpr Real kIterateSafeNorm = 1e17L;

struct ExperimentConfig {
  net::GraphSpec graph;
  DataSpec data;
  privacy::PrivacyBudget budget;
  privacy::Algorithm algorithm = privacy::Algorithm::dishuf_gaussian;
  double design_param = 0;  // g (> 0) or h (> 1) for the DiShuf algorithms
  long abar = 10000;
  dishuf::PaillierConfig paillier;
  long trials = 1;
  std::uint64_t seed = 0;
  bool seed_explicit = false;  // set when a config file or flag pinned the seed
  consensus::StopRule stop{200000, 1e-6, -1};
  int kstar = 0;  // 0-based agent index for the Laplace variant
  bool reuse_keypairs = false;
  int threads = 0;  // 0 = hardware concurrency
  long thin = 0;
  LimitMode limit_mode = LimitMode::automatic;
  bool record_transcript = false;
  std::optional<double> sigma_gamma_override;
  std::optional<double> sigma_eta_override;
  std::optional<double> sigma_xi_override;

  void validate() const {
    if (trials < 1) throw ValidationError("config: trials must be >= 1");
    budget.validate(privacy::family_of(algorithm));
    if (is_dishuf() && abar < 2) throw ValidationError("config: abar must be >= 2");
    if (kstar < 0 || kstar >= graph.n) throw ValidationError("config: k* out of range");
  }

  bool is_dishuf() const {
    return algorithm == privacy::Algorithm::dishuf_gaussian ||
           algorithm == privacy::Algorithm::dishuf_laplace;
  }

  privacy::NoisePlan plan() const {
    privacy::NoisePlan p;
    switch (algorithm) {
      case privacy::Algorithm::dishuf_gaussian:
        p = privacy::design_gaussian(budget, graph.n, static_cast<Real>(abar), design_param);
        break;
      case privacy::Algorithm::dishuf_laplace:
        p = privacy::design_laplace(budget, graph.n, static_cast<Real>(abar), design_param);
        break;
      default:
        p = privacy::design_baseline(budget, graph.n, algorithm);
        break;
    }
    if (sigma_gamma_override) p.sigma_gamma = *sigma_gamma_override;
    if (sigma_eta_override) p.sigma_eta = *sigma_eta_override;
    if (sigma_xi_override) p.sigma_xi = *sigma_xi_override;
    return p;
  }

  // The data vector is fixed across trials and deterministic in the seed.
  std::vector<Real> make_data() const {
    const int n = graph.n;
    std::vector<Real> d(n);
    if (!data.values.empty()) {
      if (static_cast<int>(data.values.size()) != n)
        throw ValidationError("config: explicit data size does not match n");
      for (int i = 0; i < n; ++i) d[i] = data.values[i];
    } else {
      Rng rng(seed, {kDataTag});
      for (int i = 0; i < n; ++i)
        d[i] = data.low + (data.high - data.low) * rng.uniform01();
    }
    if (data.force_mean) {
      Real mean = 0;
      for (Real v : d) mean += v;
      mean /= n;
      for (Real& v : d) v += (static_cast<Real>(*data.force_mean) - mean);
    }
    return d;
  }
};

struct TrialResult {
  double mean_sq_error = 0;
  double network_error = 0;
  long iterations = 0;
  bool converged = false;
  bool exact_limit = false;
};

// Context shared by all trials of one config (computed once).
struct TrialContext {
  net::WeightedGraph graph;
  std::vector<Real> data;
  Real dstar = 0;
  privacy::NoisePlan plan;
  std::vector<paillier::Keypair> shared_keys;  // only when reuse_keypairs

  explicit TrialContext(const ExperimentConfig& config)
      : graph(net::WeightedGraph::build(config.graph)),
        data(config.make_data()),
        plan(config.plan()) {
    for (Real v : data) dstar += v;
    dstar /= graph.n();
    if (config.reuse_keypairs && config.is_dishuf()) {
      Rng rng(config.seed, {kKeysTag});
      shared_keys = dishuf::generate_keypairs(graph.n(), config.paillier.key_bits, rng);
    }
  }
};

// Optional capture of everything a single verbose run produces.
struct TrialArtifacts {
  sim::Transcript transcript;
  consensus::ConsensusRun run;
  consensus::Initialization init;
  privacy::NoisePlan plan;
  Real published = 0;  // DPCA output
};

inline TrialResult run_trial(const ExperimentConfig& config, const TrialContext& ctx,
                             long index, TrialArtifacts* capture = nullptr) {
  Rng trial_rng(config.seed, {kTrialTag, static_cast<std::uint64_t>(index)});
  TrialResult result;
  const bool record = config.record_transcript || capture != nullptr;
  sim::Network net(ctx.graph, record);

  const auto finish_iterated = [&](consensus::Initialization init) {
    Real norm = 0;
    for (Real v : init.x0) norm = std::max(norm, std::fabs(v));
    const bool exact = config.limit_mode == LimitMode::exact ||
                       (config.limit_mode == LimitMode::automatic && norm >= kIterateSafeNorm);
    consensus::ErrorMetrics metrics;
    if (exact) {
      // Theorem-level limit: the iteration converges to mean(x0) * 1, and
      // the shuffle terms cancel exactly in the integer domain.
      std::vector<Real> limit(init.x0.size(), init.mean_exact);
      metrics = consensus::error_metrics(limit, ctx.dstar, true);
      result.exact_limit = true;
      result.converged = true;
      result.iterations = 0;
    } else {
      auto run = consensus::iterate(ctx.graph, init.x0, config.stop, record ? &net : nullptr,
                                    config.thin);
      metrics = consensus::error_metrics(run.final_state, ctx.dstar, run.converged);
      result.converged = run.converged;
      result.iterations = run.iterations;
      if (capture) capture->run = std::move(run);
    }
    result.mean_sq_error = static_cast<double>(metrics.mean_per_node);
    result.network_error = static_cast<double>(metrics.network_error);
    if (capture) capture->init = std::move(init);
  };

  switch (config.algorithm) {
    case privacy::Algorithm::dishuf_gaussian:
    case privacy::Algorithm::dishuf_laplace: {
      Rng rng_shuffle = trial_rng.fork(1);
      Rng rng_gamma = trial_rng.fork(2);
      const dishuf::EtaPlan eta_plan{ctx.plan.family, ctx.plan.sigma_eta};
      const auto outcome = dishuf::run_dishuf(
          net, ctx.data, eta_plan, config.abar, config.paillier, rng_shuffle,
          ctx.shared_keys.empty() ? nullptr : &ctx.shared_keys);
      auto init = config.algorithm == privacy::Algorithm::dishuf_gaussian
                      ? consensus::init_dishuf_gaussian(ctx.data, outcome, ctx.plan, rng_gamma)
                      : consensus::init_dishuf_laplace(ctx.data, outcome, ctx.plan,
                                                       config.kstar, rng_gamma);
      finish_iterated(std::move(init));
      break;
    }
    case privacy::Algorithm::osp_gaussian:
    case privacy::Algorithm::osp_laplace: {
      Rng rng_xi = trial_rng.fork(3);
      finish_iterated(consensus::init_osp(ctx.data, ctx.plan, rng_xi));
      break;
    }
    case privacy::Algorithm::dpca_gaussian:
    case privacy::Algorithm::dpca_laplace: {
      Rng rng_xi = trial_rng.fork(4);
      const Real x = consensus::run_dpca(ctx.data, ctx.plan, rng_xi);
      const auto metrics = consensus::error_metrics(x, ctx.graph.n(), ctx.dstar);
      result.mean_sq_error = static_cast<double>(metrics.mean_per_node);
      result.network_error = static_cast<double>(metrics.network_error);
      result.converged = true;
      if (capture) capture->published = x;
      break;
    }
  }
  if (capture) {
    capture->transcript = net.transcript();
    capture->plan = ctx.plan;
  }
  return result;
}

inline TrialResult run_trial(const ExperimentConfig& config, long index,
                             TrialArtifacts* capture = nullptr) {
  config.validate();
  return run_trial(config, TrialContext(config), index, capture);
}

struct Summary {
  ExperimentConfig config;          // echo
  long trials = 0;
  double dstar = 0;
  double mse_mean = 0;
  double mse_se = 0;                // sample std / sqrt(trials)
  double mse_theory = 0;
  double network_error_mean = 0;
  double iters_mean = 0;
  long unconverged = 0;
  long exact_limit_trials = 0;
  std::vector<double> per_trial;    // per-trial mean squared errors
};

inline Summary monte_carlo(const ExperimentConfig& config) {
  config.validate();
  const TrialContext ctx(config);

  std::vector<TrialResult> results(config.trials);
  int threads = config.threads;
  if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<int>(std::min<long>(threads, config.trials));

  std::atomic<long> cursor{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&]() {
    try {
      while (true) {
        const long i = cursor.fetch_add(1);
        if (i >= config.trials) break;
        results[i] = run_trial(config, ctx, i);
      }
    } catch (...) {
      std::scoped_lock lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      cursor.store(config.trials);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Summary s;
  s.config = config;
  s.trials = config.trials;
  s.dstar = static_cast<double>(ctx.dstar);
  s.mse_theory = static_cast<double>(privacy::predict_mse(ctx.plan, ctx.graph.n(), config.algorithm));
  s.per_trial.reserve(config.trials);
  // Fixed index order keeps aggregation bit-reproducible across thread counts.
  double sum = 0, net_sum = 0, iters_sum = 0;
  for (const auto& r : results) {
    s.per_trial.push_back(r.mean_sq_error);
    sum += r.mean_sq_error;
    net_sum += r.network_error;
    iters_sum += static_cast<double>(r.iterations);
    if (!r.converged) ++s.unconverged;
    if (r.exact_limit) ++s.exact_limit_trials;
  }
  s.mse_mean = sum / config.trials;
  s.network_error_mean = net_sum / config.trials;
  s.iters_mean = iters_sum / config.trials;
  double var = 0;
  for (const auto& r : results) {
    const double d = r.mean_sq_error - s.mse_mean;
    var += d * d;
  }
  s.mse_se = config.trials > 1 ? std::sqrt(var / (config.trials - 1)) / std::sqrt(double(config.trials)) : 0;
  return s;
}

struct SweepRow {
  std::string param_name;
  double param_value = 0;      // NaN for the appended baseline row
  std::optional<Summary> summary;
  std::string error;
};

// Sweeps one of {g, h, epsilon, n}. Invalid values produce per-row error
// entries and the sweep continues. A g- or h-sweep appends the
// matching-family DPCA row (the tables compare against it).
inline std::vector<SweepRow> sweep(const ExperimentConfig& base, const std::string& param,
                                   const std::vector<double>& values) {
  if (param != "g" && param != "h" && param != "epsilon" && param != "n")
    throw ValidationError("sweep: parameter must be one of g|h|epsilon|n");
  std::vector<SweepRow> rows;
  for (double v : values) {
    SweepRow row;
    row.param_name = param;
    row.param_value = v;
    try {
      ExperimentConfig config = base;
      if (param == "g") {
        if (config.algorithm != privacy::Algorithm::dishuf_gaussian)
          throw ValidationError("sweep: g applies to dishuf-gaussian only");
        config.design_param = v;
      } else if (param == "h") {
        if (config.algorithm != privacy::Algorithm::dishuf_laplace)
          throw ValidationError("sweep: h applies to dishuf-laplace only");
        config.design_param = v;
      } else if (param == "epsilon") {
        config.budget.epsilon = v;
      } else {
        if (v < 2 || v != std::floor(v)) throw ValidationError("sweep: n must be an integer >= 2");
        config.graph.n = static_cast<int>(v);
        if (config.kstar >= config.graph.n) config.kstar = 0;
      }
      row.summary = monte_carlo(config);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  if (!values.empty() && (param == "g" || param == "h")) {
    SweepRow row;
    row.param_name = param;
    row.param_value = std::numeric_limits<double>::quiet_NaN();
    try {
      ExperimentConfig config = base;
      config.algorithm = param == "g" ? privacy::Algorithm::dpca_gaussian
                                      : privacy::Algorithm::dpca_laplace;
      config.design_param = 0;
      row.summary = monte_carlo(config);
    } catch (const std::exception& e) {
      row.error = e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace dpac::experiments

#endif  // DPAC_EXPERIMENTS_HPP
