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
// Distributed shuffling: every pair of neighbors exchanges Paillier
// ciphertexts of their noise-perturbed data, raises them to private random
// integer gains, and decrypts weighted differences, leaving each agent i
// with
//   Delta_i = sum_{j in N_i} a_{i->j} a_{j->i} (d~_j - d~_i),
// correlated randomness that sums to zero exactly. All inter-agent traffic
// is ciphertext and runs through the shuffle phase of the network fabric.

#ifndef DPAC_DISHUF_HPP
#define DPAC_DISHUF_HPP

#include <Eigen/Dense>

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "dpac/common.hpp"
#include "dpac/graph.hpp"
#include "dpac/paillier.hpp"
#include "dpac/privacy.hpp"
#include "dpac/rng.hpp"
#include "dpac/simnet.hpp"

namespace dpac::dishuf {

struct PaillierConfig {
  unsigned key_bits = 1024;       // tests and batch experiments use 128-512
  unsigned fixed_point_bits = 40; // C = 2^40
};

struct EtaPlan {
  privacy::NoiseFamily family = privacy::NoiseFamily::gaussian;
  Real sigma_eta = 0;
};

using GainMap = std::map<std::pair<int, int>, long>;  // a_{i->j}, directed

struct ShuffleOutcome {
  int n = 0;
  long abar = 0;
  mpz_class scale;                       // C
  mpz_class zeta_denominator;            // n*abar^2 + 1
  std::vector<Real> eta;                 // eta_i
  std::vector<Real> noisy_data;          // d~_i = d_i + eta_i
  std::vector<mpz_class> encoded_noisy;  // m_i = round(C d~_i), signed
  std::vector<mpz_class> delta_int;      // C * Delta_i, exact
  std::vector<Real> zeta_delta;          // zeta * Delta_i
  GainMap gains;

  Real zeta() const { return 1.0L / real_from_mpz(zeta_denominator); }

  mpz_class delta_sum() const {
    mpz_class s = 0;
    for (const auto& d : delta_int) s += d;
    return s;
  }
};

inline std::vector<paillier::Keypair> generate_keypairs(int n, unsigned bits, Rng& rng) {
  std::vector<paillier::Keypair> keys;
  keys.reserve(n);
  for (int i = 0; i < n; ++i) keys.push_back(paillier::keygen(bits, rng));
  return keys;
}

inline long gain_lower_bound(long abar) {
  return static_cast<long>(std::ceil(static_cast<double>(abar) / std::sqrt(2.0)));
}

inline Real draw_eta(const EtaPlan& plan, Rng& rng) {
  return plan.family == privacy::NoiseFamily::gaussian ? rng.gaussian(plan.sigma_eta)
                                                       : rng.laplace(plan.sigma_eta);
}

// Runs the shuffle on the network's graph. Each agent holds its own keypair
// (pass `keys` to reuse a batch set). Deterministic given the rng.
inline ShuffleOutcome run_dishuf(sim::Network& net, const std::vector<Real>& data,
                                 const EtaPlan& eta_plan, long abar,
                                 const PaillierConfig& pconf, Rng& rng,
                                 const std::vector<paillier::Keypair>* keys = nullptr) {
  const net::WeightedGraph& graph = net.graph();
  const int n = graph.n();
  if (static_cast<int>(data.size()) != n)
    throw std::invalid_argument("run_dishuf: data size does not match graph");
  if (abar < 2) throw std::domain_error("run_dishuf: abar must be >= 2");

  net.begin_phase(sim::Phase::shuffle);
  Rng rng_eta = rng.fork(0x657461);
  Rng rng_keys = rng.fork(0x6b657973);
  Rng rng_gains = rng.fork(0x6761696e);
  Rng rng_blind = rng.fork(0x626c696e);

  ShuffleOutcome out;
  out.n = n;
  out.abar = abar;
  out.scale = mpz_class(1) << pconf.fixed_point_bits;
  out.zeta_denominator = mpz_class(n) * abar * abar + 1;

  // Step 1: perturb the local data.
  out.eta.resize(n);
  out.noisy_data.resize(n);
  for (int i = 0; i < n; ++i) {
    out.eta[i] = draw_eta(eta_plan, rng_eta);
    out.noisy_data[i] = data[i] + out.eta[i];
  }

  std::vector<paillier::Keypair> fresh;
  if (!keys) {
    fresh = generate_keypairs(n, pconf.key_bits, rng_keys);
    keys = &fresh;
  } else if (static_cast<int>(keys->size()) != n) {
    throw std::invalid_argument("run_dishuf: keypair set size does not match graph");
  }

  // Up-front range guard: the largest plaintext reached downstream is
  // a_{j->i} (m_i - m_j) with |m_i| <= C max|d~| + 1/2, so require
  // 2 abar C (max|d~|+1) < N/2 for every key.
  Real max_abs = 0;
  for (Real v : out.noisy_data) max_abs = std::max(max_abs, std::fabs(v));
  const mpz_class magnitude = mpz_from_real(std::ceil(max_abs)) + 1;
  const mpz_class needed = 4 * mpz_class(abar) * out.scale * magnitude;
  for (const auto& kp : *keys)
    if (needed >= kp.pub.n)
      throw std::range_error("run_dishuf: |noisy data| ~ " + magnitude.get_str() +
                             " overflows the fixed-point range of a " +
                             std::to_string(kp.pub.bits) + "-bit key");

  // Quantize once; all ciphertext arithmetic below is exact on these
  // signed integers (per-key residues are formed at encryption time).
  out.encoded_noisy.resize(n);
  const unsigned sb = pconf.fixed_point_bits;
  for (int i = 0; i < n; ++i) {
    const Real scaled = std::ldexp(out.noisy_data[i], static_cast<int>(sb));
    const Real rounded = scaled >= 0 ? std::floor(scaled + 0.5L) : std::ceil(scaled - 0.5L);
    out.encoded_noisy[i] = mpz_from_real(rounded);
  }

  // Step 2: encrypt -d~_i under the local key, send ciphertext + public key.
  std::vector<paillier::Ciphertext> enc_neg;
  enc_neg.reserve(n);
  for (int i = 0; i < n; ++i) {
    const mpz_class residue = paillier::to_residue(-out.encoded_noisy[i], (*keys)[i].pub.n);
    enc_neg.push_back(paillier::encrypt((*keys)[i].pub, residue, rng_blind));
  }
  std::vector<sim::Network::Message> round1;
  for (int i = 0; i < n; ++i)
    for (int j : graph.neighbors(i)) {
      round1.push_back({i, j, sim::Payload::public_key((*keys)[i].pub.n)});
      round1.push_back({i, j, sim::Payload::ciphertext(enc_neg[i].value)});
    }
  net.exchange(std::move(round1));

  // Each agent reads its neighbors' public keys and ciphertexts.
  std::vector<std::map<int, mpz_class>> neighbor_modulus(n);
  std::vector<std::map<int, paillier::Ciphertext>> neighbor_cipher(n);
  for (int j = 0; j < n; ++j)
    for (const auto& m : net.inbox(j)) {
      if (m.payload.kind == sim::PayloadKind::public_key)
        neighbor_modulus[j][m.sender] = m.payload.integer;
      else
        neighbor_cipher[j].emplace(m.sender,
                                   paillier::Ciphertext{m.payload.integer, mpz_class(0)});
    }
  for (int j = 0; j < n; ++j)
    for (auto& [i, c] : neighbor_cipher[j]) c.modulus = neighbor_modulus[j][i];

  // Steps 3-4: re-encrypt own data under each neighbor key, form
  // c_ij = E_j(d~_i) E_j(-d~_j), draw the gains, and exponentiate.
  // Gains are uniform integers on [ceil(abar/sqrt 2), abar], drawn in
  // directed-edge order.
  const long gain_lo = gain_lower_bound(abar);
  for (int i = 0; i < n; ++i)
    for (int j : graph.neighbors(i))
      out.gains[{i, j}] = rng_gains.uniform_int(gain_lo, abar);

  std::vector<sim::Network::Message> round2;
  for (int i = 0; i < n; ++i) {
    for (int j : graph.neighbors(i)) {
      const paillier::PublicKey& pub_j = (*keys)[j].pub;
      const mpz_class residue = paillier::to_residue(out.encoded_noisy[i], pub_j.n);
      const paillier::Ciphertext mine = paillier::encrypt(pub_j, residue, rng_blind);
      const paillier::Ciphertext c_ij = paillier::c_add(pub_j, mine, neighbor_cipher[i].at(j));
      const paillier::Ciphertext powered =
          paillier::c_scale(pub_j, c_ij, mpz_class(out.gains.at({i, j})));
      round2.push_back({i, j, sim::Payload::ciphertext(powered.value)});
    }
  }
  net.exchange(std::move(round2));

  // Steps 5-6: decrypt the received ciphertexts with the local private key
  // and accumulate Delta_i (exact, in the fixed-point integer domain).
  out.delta_int.assign(n, mpz_class(0));
  for (int i = 0; i < n; ++i) {
    for (const auto& m : net.inbox(i)) {
      const int j = m.sender;
      const paillier::Ciphertext c{m.payload.integer, (*keys)[i].pub.n};
      const mpz_class plain = paillier::decrypt((*keys)[i], c);
      const mpz_class term = paillier::to_signed(plain, (*keys)[i].pub.n);
      out.delta_int[i] += mpz_class(out.gains.at({i, j})) * term;
    }
  }

  out.zeta_delta.resize(n);
  const Real denom = real_from_mpz(out.zeta_denominator) * std::ldexp(1.0L, static_cast<int>(sb));
  for (int i = 0; i < n; ++i) out.zeta_delta[i] = real_from_mpz(out.delta_int[i]) / denom;
  return out;
}

// Appendix-view diagnostics: zeta a_{i->j} a_{j->i} as edge weights of a
// Laplacian-like matrix A, and the doubly stochastic P = I - A.
struct ShuffleWeightMatrix {
  Eigen::MatrixXd a_matrix;
  Eigen::MatrixXd p_matrix;
  double zeta = 0;
};

inline ShuffleWeightMatrix shuffle_matrix(const GainMap& gains, const net::WeightedGraph& graph,
                                          int n, long abar) {
  ShuffleWeightMatrix m;
  m.zeta = 1.0 / (static_cast<double>(n) * static_cast<double>(abar) * static_cast<double>(abar) + 1.0);
  m.a_matrix = Eigen::MatrixXd::Zero(n, n);
  for (auto [i, j] : graph.edges()) {
    const double a_ij = m.zeta * static_cast<double>(gains.at({i, j})) *
                        static_cast<double>(gains.at({j, i}));
    m.a_matrix(i, j) = m.a_matrix(j, i) = -a_ij;
    m.a_matrix(i, i) += a_ij;
    m.a_matrix(j, j) += a_ij;
  }
  m.p_matrix = Eigen::MatrixXd::Identity(n, n) - m.a_matrix;
  return m;
}

inline ShuffleWeightMatrix shuffle_matrix(const ShuffleOutcome& outcome,
                                          const net::WeightedGraph& graph) {
  return shuffle_matrix(outcome.gains, graph, outcome.n, outcome.abar);
}

struct SpectrumReport {
  double lambda_min = 0;
  double lambda2 = 0;
  double lambda_max = 0;
  double bound = 0;  // 1 - alpha
  bool pass = false;
};

// Checks lambda_2(A) >= 1 - alpha and the eigenvalue range [0, 2).
inline SpectrumReport verify_spectrum(const ShuffleWeightMatrix& m, int n, Real abar) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m.a_matrix);
  if (solver.info() != Eigen::Success)
    throw NumericalError("verify_spectrum: eigensolver failed");
  SpectrumReport report;
  report.lambda_min = solver.eigenvalues()(0);
  report.lambda2 = solver.eigenvalues()(1);
  report.lambda_max = solver.eigenvalues()(n - 1);
  report.bound = static_cast<double>(privacy::alpha_complement(n, abar));
  report.pass = report.lambda2 >= report.bound && report.lambda_min > -1e-9 &&
                report.lambda_max < 2.0;
  return report;
}

}  // namespace dpac::dishuf

#endif  // DPAC_DISHUF_HPP
