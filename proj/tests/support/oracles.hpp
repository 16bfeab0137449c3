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
// Test-only oracles, independent of the library's computation paths, plus
// reference constants frozen from 60-digit mpmath evaluations.

#ifndef DPAC_TESTS_SUPPORT_ORACLES_HPP
#define DPAC_TESTS_SUPPORT_ORACLES_HPP

#include <gmpxx.h>

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "dpac/graph.hpp"

namespace oracles {

// All-plaintext closed form of the shuffle output, straight from the
// definition: Delta_i = sum_{j in N_i} a_{i->j} a_{j->i} (m_j - m_i).
inline std::vector<mpz_class> closed_form_delta(
    const std::vector<mpz_class>& encoded, const std::map<std::pair<int, int>, long>& gains,
    const dpac::net::WeightedGraph& graph) {
  const int n = graph.n();
  std::vector<mpz_class> delta(n, mpz_class(0));
  for (int i = 0; i < n; ++i)
    for (int j : graph.neighbors(i))
      delta[i] += mpz_class(gains.at({i, j})) * mpz_class(gains.at({j, i})) *
                  (encoded[j] - encoded[i]);
  return delta;
}

// Reference constants (60-digit mpmath, truncated to long double range).
namespace ref {

// kappa_eps^-1(delta) values.
inline constexpr double kKinv_10_01 = 3.5484640258860138;   // eps=10, delta=0.1
inline constexpr double kKinv_0_05 = 1.3489795003921635;    // eps=0,  delta=0.5

// kappa evaluations.
inline constexpr double kKappa0_1349 = 0.5000065142726017;  // kappa_0(1.349)
inline constexpr double kKappa10_3548 = 0.09989267769714249;

// alpha / 1-alpha.
inline constexpr double kOneMinusAlpha_10_1e4 = 2.17013886935952e-13;
inline constexpr double kAlpha_3_1 = 0.9921567416492215;

// Gaussian designs at (eps, delta, mu) = (10, 0.1, 5), n = 10, abar = 1e4.
inline constexpr double kSigmaGamma_g001 = 0.45003985012537645;
inline constexpr double kSigmaEta_g001 = 1.3875165438816767e14;
inline constexpr double kSigmaGamma_g3 = 1.7823360401005008;
inline constexpr double kMse_g001 = 0.02025358667008713;
inline constexpr double kMse_g1 = 0.07941804399602835;
inline constexpr double kMse_g2 = 0.17869059899106378;
inline constexpr double kMse_g3 = 0.3176721759841134;

// Baselines at the same budget.
inline constexpr double kSigmaXi_ospG = 1.4090603606306966;
inline constexpr double kMse_ospG = 0.19854510999007087;
inline constexpr double kMse_dpcaG = 0.019854510999007087;

// Laplace designs at (eps, mu) = (10, 5), n = 10, abar = 1e4.
inline constexpr double kSigmaEta_h11 = 1.52064001368444e15;
inline constexpr double kSigmaEta_h2 = 2.7648000248808e14;

// Cycle graph, n = 10, w = 0.3.
inline constexpr double kBetaCycle10 = 0.8854101966249685;

}  // namespace ref

}  // namespace oracles

#endif  // DPAC_TESTS_SUPPORT_ORACLES_HPP
