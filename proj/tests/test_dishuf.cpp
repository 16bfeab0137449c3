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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dpac/dishuf.hpp"
#include "dpac/simnet.hpp"
#include "support/oracles.hpp"

using namespace dpac;
using namespace dpac::dishuf;
using Catch::Matchers::WithinAbs;

namespace {

constexpr PaillierConfig kTestCrypto{128, 40};

net::WeightedGraph make_graph(int n) {
  if (n == 2) return net::WeightedGraph::build({net::GraphKind::path, 2, 0.4});
  return net::WeightedGraph::build({net::GraphKind::cycle, n, 0.3});
}

}  // namespace

TEST_CASE("two agents, no noise: closed form") {
  const auto g = make_graph(2);
  sim::Network net(g);
  Rng rng(1);
  const std::vector<Real> data{1.0L, 3.0L};
  const EtaPlan quiet{privacy::NoiseFamily::gaussian, 0.0L};
  const long abar = 100;
  const auto out = run_dishuf(net, data, quiet, abar, kTestCrypto, rng);

  const long a12 = out.gains.at({0, 1});
  const long a21 = out.gains.at({1, 0});
  CHECK(a12 >= gain_lower_bound(abar));
  CHECK(a12 <= abar);
  // Delta_1 = a12 a21 (m2 - m1) = a12 a21 * 2 * C in the integer domain.
  const mpz_class expected = mpz_class(a12) * a21 * 2 * out.scale;
  CHECK(out.delta_int[0] == expected);
  CHECK(out.delta_int[1] == -expected);
}

TEST_CASE("equal data and zero noise yield all-zero outputs") {
  const auto g = make_graph(5);
  sim::Network net(g);
  Rng rng(2);
  const std::vector<Real> data(5, 7.25L);
  const auto out = run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 0.0L}, 1000,
                              kTestCrypto, rng);
  for (const auto& d : out.delta_int) CHECK(d == 0);
}

TEST_CASE("zero-sum holds exactly in the integer domain") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const int n = 2 + static_cast<int>(seed % 9);
    const auto g = make_graph(n);
    sim::Network net(g);
    Rng rng(seed);
    std::vector<Real> data(n);
    for (auto& d : data) d = 50.0L * (rng.uniform01() - 0.5L);
    const auto out = run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 3.0L}, 10000,
                                kTestCrypto, rng);
    CHECK(out.delta_sum() == 0);

    // Decoded sum is only conversion noise away from zero.
    Real decoded_sum = 0, max_term = 0;
    for (Real zd : out.zeta_delta) {
      decoded_sum += zd;
      max_term = std::max(max_term, std::fabs(zd));
    }
    CHECK(std::fabs(static_cast<double>(decoded_sum)) <=
          1e-15 * n * (1.0 + static_cast<double>(max_term)));
  }
}

TEST_CASE("ciphertext pipeline equals the plaintext oracle exactly") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    const int n = seed % 2 ? 5 : 10;
    const auto g = make_graph(n);
    sim::Network net(g);
    Rng rng(seed * 31);
    std::vector<Real> data(n);
    for (auto& d : data) d = 30.0L * rng.uniform01();
    const auto out = run_dishuf(net, data, {privacy::NoiseFamily::laplace, 2.0L}, 5000,
                                kTestCrypto, rng);
    const auto expected = oracles::closed_form_delta(out.encoded_noisy, out.gains, g);
    for (int i = 0; i < n; ++i) CHECK(out.delta_int[i] == expected[i]);
  }
}

TEST_CASE("shuffle transcript carries no plaintext state") {
  const auto g = make_graph(6);
  sim::Network net(g);
  Rng rng(5);
  const std::vector<Real> data{1, 2, 3, 4, 5, 6};
  run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 1.0L}, 100, kTestCrypto, rng);
  int pubkeys = 0, ciphers = 0;
  for (const auto& r : net.transcript().records()) {
    CHECK(r.phase == sim::Phase::shuffle);
    if (r.payload.kind == sim::PayloadKind::public_key) ++pubkeys;
    if (r.payload.kind == sim::PayloadKind::ciphertext) ++ciphers;
  }
  // Step 2 sends one key + one ciphertext per direction, step 5 one more
  // ciphertext per direction.
  const int directed = 2 * static_cast<int>(g.edges().size());
  CHECK(pubkeys == directed);
  CHECK(ciphers == 2 * directed);
}

TEST_CASE("gains honor the [ceil(abar/sqrt 2), abar] range") {
  const auto g = make_graph(10);
  sim::Network net(g);
  Rng rng(6);
  std::vector<Real> data(10, 1.0L);
  const long abar = 10000;
  const auto out = run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 0.0L}, abar,
                              kTestCrypto, rng);
  CHECK(gain_lower_bound(abar) == 7072);
  for (const auto& [edge, a] : out.gains) {
    CHECK(a >= 7072);
    CHECK(a <= abar);
  }
}

TEST_CASE("rejects oversized data for the key size") {
  const auto g = make_graph(2);
  sim::Network net(g);
  Rng rng(7);
  // 128-bit key, C=2^40, abar=1e4: the guard needs 2 C abar (|d|+1) < N/2,
  // which 1e24 (~2^80) decisively violates.
  const std::vector<Real> data{1e24L, -1e24L};
  CHECK_THROWS_AS(
      run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 0.0L}, 10000, kTestCrypto, rng),
      std::range_error);
}

TEST_CASE("rejects abar below 2 and mismatched data size") {
  const auto g = make_graph(3);
  sim::Network net(g);
  Rng rng(8);
  CHECK_THROWS_AS(
      run_dishuf(net, {1.0L, 2.0L, 3.0L}, {privacy::NoiseFamily::gaussian, 0.0L}, 1,
                 kTestCrypto, rng),
      std::domain_error);
  CHECK_THROWS_AS(run_dishuf(net, {1.0L}, {privacy::NoiseFamily::gaussian, 0.0L}, 100,
                             kTestCrypto, rng),
                  std::invalid_argument);
}

TEST_CASE("huge shuffle noise stays within a 128-bit key's range") {
  const auto g = make_graph(10);
  sim::Network net(g);
  Rng rng(9);
  std::vector<Real> data(10, 13.0L);
  const auto out = run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 1.4e14L}, 10000,
                              kTestCrypto, rng);
  CHECK(out.delta_sum() == 0);
  // zeta*Delta magnitudes are ~zeta*abar^2*|eta-diff| ~ 0.1 |eta|.
  Real max_zd = 0;
  for (Real zd : out.zeta_delta) max_zd = std::max(max_zd, std::fabs(zd));
  CHECK(max_zd > 1e11L);
  CHECK(max_zd < 1e17L);
}

TEST_CASE("shuffle weight matrix: structure and identity") {
  const auto g = make_graph(10);
  sim::Network net(g);
  Rng rng(10);
  std::vector<Real> data(10);
  for (auto& d : data) d = 25.0L * rng.uniform01();
  const auto out = run_dishuf(net, data, {privacy::NoiseFamily::gaussian, 5.0L}, 10000,
                              kTestCrypto, rng);
  const auto m = shuffle_matrix(out, g);

  // P rows and columns sum to one; off-diagonal entries bounded by
  // abar^2/(n abar^2 + 1) < 1/n.
  for (int i = 0; i < 10; ++i) {
    CHECK_THAT(m.p_matrix.row(i).sum(), WithinAbs(1.0, 1e-12));
    CHECK_THAT(m.p_matrix.col(i).sum(), WithinAbs(1.0, 1e-12));
  }
  for (auto [i, j] : g.edges()) {
    CHECK(-m.a_matrix(i, j) <= 1.0 / 10.0);
    CHECK(-m.a_matrix(i, j) >= m.zeta * 7072.0 * 7072.0);
  }

  // zeta Delta = -A (d + eta) entrywise.
  Eigen::VectorXd noisy(10);
  for (int i = 0; i < 10; ++i) noisy(i) = static_cast<double>(out.noisy_data[i]);
  const Eigen::VectorXd lhs = -m.a_matrix * noisy;
  for (int i = 0; i < 10; ++i)
    CHECK_THAT(static_cast<double>(out.zeta_delta[i]),
               WithinAbs(lhs(i), 1e-9 * (1.0 + std::abs(lhs(i)))));
}

TEST_CASE("spectrum verification") {
  SECTION("n=2 single edge with gains at abar") {
    const auto g = make_graph(2);
    GainMap gains{{{0, 1}, 100}, {{1, 0}, 100}};
    const auto m = shuffle_matrix(gains, g, 2, 100);
    const auto report = verify_spectrum(m, 2, 100.0L);
    // lambda_2 = 2 zeta abar^2 = 2 abar^2/(2 abar^2 + 1) < 1.
    CHECK_THAT(report.lambda2, WithinAbs(2.0 * 100 * 100 / (2.0 * 100 * 100 + 1), 1e-12));
    CHECK(report.pass);
  }
  SECTION("random gain realizations pass the bound") {
    Rng rng(11);
    for (int n : {3, 10}) {
      const auto g = make_graph(n);
      for (long abar : {100L, 10000L}) {
        for (int rep = 0; rep < 10; ++rep) {
          GainMap gains;
          const long lo = gain_lower_bound(abar);
          for (auto [i, j] : g.edges()) {
            gains[{i, j}] = rng.uniform_int(lo, abar);
            gains[{j, i}] = rng.uniform_int(lo, abar);
          }
          const auto report = verify_spectrum(shuffle_matrix(gains, g, n, abar), n,
                                              static_cast<Real>(abar));
          CHECK(report.pass);
          CHECK(report.lambda_min > -1e-9);
          CHECK(report.lambda_max < 2.0);
        }
      }
    }
  }
}

TEST_CASE("determinism: same seed, same outcome") {
  auto once = [](std::uint64_t seed) {
    const auto g = make_graph(5);
    sim::Network net(g);
    Rng rng(seed);
    std::vector<Real> data{1, 2, 3, 4, 5};
    return run_dishuf(net, data, {privacy::NoiseFamily::laplace, 1.0L}, 500, kTestCrypto, rng);
  };
  const auto a = once(77), b = once(77), c = once(78);
  CHECK(a.delta_int == b.delta_int);
  CHECK(a.gains == b.gains);
  CHECK(a.delta_int != c.delta_int);
}

TEST_CASE("keypair reuse leaves the integer outputs untouched") {
  const auto g = make_graph(4);
  Rng keyrng(123);
  const auto keys = generate_keypairs(4, 128, keyrng);
  auto once = [&](const std::vector<paillier::Keypair>* k) {
    sim::Network net(g);
    Rng rng(31);
    return run_dishuf(net, {1.0L, 2.0L, 3.0L, 4.0L},
                      {privacy::NoiseFamily::gaussian, 1.0L}, 1000, kTestCrypto, rng, k);
  };
  // Same trial stream with and without shared keys: Delta depends only on
  // gains and noisy data, which the key choice must not disturb.
  CHECK(once(&keys).delta_int == once(&keys).delta_int);
  const auto fresh = once(nullptr);
  const auto shared = once(&keys);
  CHECK(fresh.gains == shared.gains);
  CHECK(fresh.eta == shared.eta);
  CHECK(fresh.delta_int == shared.delta_int);
}
