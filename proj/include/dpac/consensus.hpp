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
// The consensus iteration x_i(t+1) = x_i(t) + sum_j w_ij (x_j(t) - x_i(t))
// and the four initializations: shuffle + i.i.d. Gaussian noise, shuffle +
// single-agent Laplace noise, one-shot perturbation, and the centralized
// perturbed average. Also exact-rational evaluation for validation tests.

#ifndef DPAC_CONSENSUS_HPP
#define DPAC_CONSENSUS_HPP

#include <algorithm>
#include <cmath>
#include <ostream>
#include <vector>

#include "dpac/common.hpp"
#include "dpac/dishuf.hpp"
#include "dpac/graph.hpp"
#include "dpac/privacy.hpp"
#include "dpac/rng.hpp"
#include "dpac/simnet.hpp"

namespace dpac::consensus {

struct StopRule {
  long max_iters = 100000;
  // Stop when max_i x_i - min_i x_i <= tol. Negative means the default
  // 1e-9 * (1 + ||x0||_inf).
  double tol = -1;
  // >= 0: pure-protocol mode, run exactly this many rounds (agents cannot
  // see the mean; the simulator-side tolerance rule is not used).
  long fixed_rounds = -1;
};

struct ConsensusRun {
  std::vector<Real> x0;
  std::vector<Real> final_state;
  std::vector<std::vector<Real>> trajectory;  // thinned snapshots, optional
  std::vector<long> trajectory_rounds;
  long iterations = 0;
  bool converged = false;
};

namespace detail {
inline Real spread(const std::vector<Real>& x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}
}  // namespace detail

// Round count for pure-protocol mode, where agents cannot observe the mean:
// enough rounds to contract an initial disagreement below tol at rate beta.
inline long protocol_rounds(double beta, Real initial_spread, double tol) {
  if (beta <= 0 || beta >= 1) throw std::domain_error("protocol_rounds: beta outside (0,1)");
  if (tol <= 0) throw std::domain_error("protocol_rounds: tol must be positive");
  if (static_cast<double>(initial_spread) <= tol) return 0;
  const double t = std::log(tol / static_cast<double>(initial_spread)) / std::log(beta);
  return static_cast<long>(std::ceil(t));
}

// Runs the iteration until the stop rule fires. When a network handle is
// given, every round's states are routed through it (consensus phase) so
// the transcript shows what an eavesdropper sees.
inline ConsensusRun iterate(const net::WeightedGraph& graph, std::vector<Real> x0,
                            const StopRule& stop, sim::Network* network = nullptr,
                            long thin = 0) {
  const int n = graph.n();
  if (static_cast<int>(x0.size()) != n)
    throw std::invalid_argument("iterate: state size does not match graph");
  for (Real v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("iterate: non-finite initial state");

  Real tol = stop.tol;
  if (stop.fixed_rounds < 0 && tol < 0) {
    Real norm = 0;
    for (Real v : x0) norm = std::max(norm, std::fabs(v));
    tol = 1e-9L * (1.0L + norm);
  }

  if (network) network->begin_phase(sim::Phase::consensus);

  ConsensusRun run;
  run.x0 = x0;
  std::vector<Real> state = std::move(x0);
  std::vector<Real> next(n);
  const long limit = stop.fixed_rounds >= 0 ? stop.fixed_rounds : stop.max_iters;

  auto snapshot = [&](long t) {
    if (thin > 0 && (t % thin == 0)) {
      run.trajectory.push_back(state);
      run.trajectory_rounds.push_back(t);
    }
  };

  long t = 0;
  snapshot(0);
  while (true) {
    if (stop.fixed_rounds < 0 && detail::spread(state) <= tol) {
      run.converged = true;
      break;
    }
    if (t >= limit) {
      run.converged = stop.fixed_rounds >= 0 || detail::spread(state) <= tol;
      break;
    }
    if (network) {
      std::vector<sim::Network::Message> round;
      for (int i = 0; i < n; ++i)
        for (int j : graph.neighbors(i))
          round.push_back({i, j, sim::Payload::plaintext_state(state[i])});
      network->exchange(std::move(round));
    }
    for (int i = 0; i < n; ++i) {
      Real acc = 0;
      for (int j : graph.neighbors(i))
        acc += static_cast<Real>(graph.weight(i, j)) * (state[j] - state[i]);
      next[i] = state[i] + acc;
    }
    state.swap(next);
    ++t;
    snapshot(t);
  }
  run.iterations = t;
  if (thin > 0 && (run.trajectory_rounds.empty() || run.trajectory_rounds.back() != t)) {
    run.trajectory.push_back(state);
    run.trajectory_rounds.push_back(t);
  }
  run.final_state = std::move(state);
  return run;
}

inline void trajectory_csv(const ConsensusRun& run, std::ostream& out) {
  out << "t";
  for (size_t i = 0; i < run.x0.size(); ++i) out << ",x_" << i + 1;
  out << "\n";
  for (size_t k = 0; k < run.trajectory.size(); ++k) {
    out << run.trajectory_rounds[k];
    for (Real v : run.trajectory[k]) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%.17Lg", v);
      out << "," << buf;
    }
    out << "\n";
  }
}

// An initialization plus the bookkeeping the simulator needs: the retained
// noise draws and the exact mean of x0 (the shuffle terms sum to zero as
// big integers, so the mean is d* + sum(gamma)/n up to one rounding).
struct Initialization {
  std::vector<Real> x0;
  std::vector<Real> gamma;
  std::vector<Real> xi;
  int kstar = -1;
  Real mean_exact = 0;
  Real dstar = 0;
};

namespace detail {

inline Real mean_of(const std::vector<Real>& v) {
  Real s = 0;
  for (Real x : v) s += x;
  return s / static_cast<Real>(v.size());
}

inline Initialization init_dishuf_common(const std::vector<Real>& data,
                                         const dishuf::ShuffleOutcome& outcome,
                                         std::vector<Real> gamma) {
  const int n = static_cast<int>(data.size());
  if (outcome.n != n || static_cast<int>(gamma.size()) != n)
    throw std::invalid_argument("init: size mismatch");
  if (outcome.delta_sum() != 0)
    throw IntegrityError("init: shuffle outputs do not sum to zero");
  Initialization init;
  init.gamma = std::move(gamma);
  init.x0.resize(n);
  for (int i = 0; i < n; ++i) init.x0[i] = data[i] + outcome.zeta_delta[i] + init.gamma[i];
  init.dstar = mean_of(data);
  init.mean_exact = init.dstar + mean_of(init.gamma);
  return init;
}

}  // namespace detail

// x_i(0) = d_i + zeta Delta_i + gamma_i with i.i.d. Gaussian gamma.
inline Initialization init_dishuf_gaussian(const std::vector<Real>& data,
                                           const dishuf::ShuffleOutcome& outcome,
                                           const privacy::NoisePlan& plan, Rng& rng) {
  if (plan.family != privacy::NoiseFamily::gaussian)
    throw std::domain_error("init_dishuf_gaussian: plan family mismatch");
  std::vector<Real> gamma(data.size());
  for (auto& g : gamma) g = rng.gaussian(plan.sigma_gamma);
  return detail::init_dishuf_common(data, outcome, std::move(gamma));
}

// Test seam: explicit gamma vector.
inline Initialization init_dishuf_gaussian_with(const std::vector<Real>& data,
                                                const dishuf::ShuffleOutcome& outcome,
                                                std::vector<Real> gamma) {
  return detail::init_dishuf_common(data, outcome, std::move(gamma));
}

// Only the pre-defined agent k* adds gamma ~ L(0, sigma_gamma).
inline Initialization init_dishuf_laplace(const std::vector<Real>& data,
                                          const dishuf::ShuffleOutcome& outcome,
                                          const privacy::NoisePlan& plan, int kstar,
                                          Rng& rng) {
  if (plan.family != privacy::NoiseFamily::laplace)
    throw std::domain_error("init_dishuf_laplace: plan family mismatch");
  const int n = static_cast<int>(data.size());
  if (kstar < 0 || kstar >= n)
    throw std::domain_error("init_dishuf_laplace: k* out of range");
  std::vector<Real> gamma(n, 0.0L);
  gamma[kstar] = rng.laplace(plan.sigma_gamma);
  auto init = detail::init_dishuf_common(data, outcome, std::move(gamma));
  init.kstar = kstar;
  return init;
}

inline Initialization init_dishuf_laplace_with(const std::vector<Real>& data,
                                               const dishuf::ShuffleOutcome& outcome,
                                               int kstar, Real gamma_kstar) {
  const int n = static_cast<int>(data.size());
  if (kstar < 0 || kstar >= n)
    throw std::domain_error("init_dishuf_laplace: k* out of range");
  std::vector<Real> gamma(n, 0.0L);
  gamma[kstar] = gamma_kstar;
  auto init = detail::init_dishuf_common(data, outcome, std::move(gamma));
  init.kstar = kstar;
  return init;
}

// One-shot perturbation x_i(0) = d_i + xi_i.
inline Initialization init_osp(const std::vector<Real>& data, const privacy::NoisePlan& plan,
                               Rng& rng) {
  Initialization init;
  const int n = static_cast<int>(data.size());
  init.xi.resize(n);
  init.x0.resize(n);
  for (int i = 0; i < n; ++i) {
    init.xi[i] = plan.family == privacy::NoiseFamily::gaussian ? rng.gaussian(plan.sigma_xi)
                                                               : rng.laplace(plan.sigma_xi);
    init.x0[i] = data[i] + init.xi[i];
  }
  init.dstar = detail::mean_of(data);
  init.mean_exact = init.dstar + detail::mean_of(init.xi);
  init.gamma.assign(n, 0.0L);
  return init;
}

// Centralized baseline: publish the perturbed average.
inline Real run_dpca(const std::vector<Real>& data, const privacy::NoisePlan& plan, Rng& rng) {
  const Real xi = plan.family == privacy::NoiseFamily::gaussian ? rng.gaussian(plan.sigma_xi)
                                                                : rng.laplace(plan.sigma_xi);
  return detail::mean_of(data) + xi;
}

struct ErrorMetrics {
  std::vector<Real> per_node_sq;
  Real network_error = 0;   // sum_i |x_i - d*|^2
  Real mean_per_node = 0;   // network_error / n
  bool converged = true;
};

inline ErrorMetrics error_metrics(const std::vector<Real>& final_state, Real dstar,
                                  bool converged = true) {
  ErrorMetrics m;
  m.converged = converged;
  m.per_node_sq.reserve(final_state.size());
  for (Real v : final_state) {
    const Real e = v - dstar;
    m.per_node_sq.push_back(e * e);
    m.network_error += e * e;
  }
  m.mean_per_node = m.network_error / static_cast<Real>(final_state.size());
  return m;
}

// Centralized variant: every "node" publishes the same scalar.
inline ErrorMetrics error_metrics(Real published, int n, Real dstar) {
  ErrorMetrics m;
  const Real e = published - dstar;
  m.per_node_sq.assign(1, e * e);
  m.network_error = static_cast<Real>(n) * e * e;
  m.mean_per_node = e * e;
  return m;
}

// Exact-rational evaluation: weights, data, and noise enter as the exact
// rationals of their float values; the shuffle term enters from the integer
// domain. Used to verify sum preservation and eta-invariance without any
// float tolerance.
namespace exact {

inline std::vector<mpq_class> x0_rational(const std::vector<Real>& data,
                                          const dishuf::ShuffleOutcome& outcome,
                                          const std::vector<Real>& gamma) {
  const int n = static_cast<int>(data.size());
  std::vector<mpq_class> x0(n);
  const mpq_class zeta_scale(outcome.scale * outcome.zeta_denominator);
  for (int i = 0; i < n; ++i) {
    mpq_class shuffle_term(outcome.delta_int[i]);
    shuffle_term /= zeta_scale;
    x0[i] = mpq_from_real(data[i]) + shuffle_term + mpq_from_real(gamma[i]);
  }
  return x0;
}

inline mpq_class mean(const std::vector<mpq_class>& x) {
  mpq_class s = 0;
  for (const auto& v : x) s += v;
  return s / mpq_class(static_cast<unsigned long>(x.size()));
}

inline std::vector<mpq_class> step(const net::WeightedGraph& graph,
                                   const std::vector<mpq_class>& state) {
  const int n = graph.n();
  std::vector<mpq_class> next(n);
  for (int i = 0; i < n; ++i) {
    mpq_class acc = state[i];
    for (int j : graph.neighbors(i))
      acc += mpq_from_real(graph.weight(i, j)) * (state[j] - state[i]);
    next[i] = acc;
  }
  return next;
}

}  // namespace exact

}  // namespace dpac::consensus

#endif  // DPAC_CONSENSUS_HPP
