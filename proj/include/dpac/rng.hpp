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

#ifndef DPAC_RNG_HPP
#define DPAC_RNG_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <random>

#include "dpac/common.hpp"

namespace dpac {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Deterministic random stream. All randomness in the project flows through
// this type; distributions are implemented by hand so that identical seeds
// give identical draws on any standard library.
//
// Stream splitting rule: the stream for (seed, a, b, ...) is seeded with the
// splitmix64 fold h_0 = splitmix64(seed), h_{i+1} = splitmix64(h_i ^ word_i).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}
  Rng(std::uint64_t seed, std::initializer_list<std::uint64_t> words)
      : engine_(fold(seed, words)) {}

  // Derived independent stream, e.g. rng.fork(kGains).
  Rng fork(std::uint64_t tag) {
    return Rng(engine_(), {splitmix64(tag)});
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on (0, 1), 64-bit resolution, endpoints excluded.
  Real uniform01() {
    while (true) {
      const std::uint64_t u = engine_();
      if (u != 0) return std::ldexp(static_cast<Real>(u), -64);
    }
  }

  // Uniform integer on [lo, hi] inclusive, by rejection.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(engine_());  // full range
    const std::uint64_t limit = std::uint64_t(-1) - std::uint64_t(-1) % span;
    std::uint64_t u;
    do {
      u = engine_();
    } while (u >= limit);
    return lo + static_cast<std::int64_t>(u % span);
  }

  // Standard normal via the Marsaglia polar transform.
  Real gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    Real u, v, s;
    do {
      u = 2.0L * uniform01() - 1.0L;
      v = 2.0L * uniform01() - 1.0L;
      s = u * u + v * v;
    } while (s >= 1.0L || s == 0.0L);
    const Real factor = std::sqrt(-2.0L * std::log(s) / s);
    spare_ = v * factor;
    have_spare_ = true;
    return u * factor;
  }

  Real gaussian(Real sigma) { return sigma == 0 ? 0.0L : sigma * gaussian(); }

  // Laplace(0, b) via inverse CDF; variance 2 b^2.
  Real laplace(Real b) {
    if (b == 0) return 0.0L;
    const Real u = uniform01() - 0.5L;
    const Real sign = u < 0 ? -1.0L : 1.0L;
    return -b * sign * std::log(1.0L - 2.0L * std::fabs(u));
  }

  // Uniform nonnegative integer with exactly `bits` bits (top bit set).
  mpz_class random_bits(unsigned bits) {
    mpz_class out = 1;
    for (unsigned got = 1; got < bits;) {
      const unsigned take = std::min(64u, bits - got);
      std::uint64_t u = engine_();
      if (take < 64) u >>= (64 - take);
      out <<= take;
      out += mpz_class(static_cast<unsigned long>(u));
      got += take;
    }
    return out;
  }

  // Uniform on [0, bound) by rejection.
  mpz_class random_below(const mpz_class& bound) {
    const auto bits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
    while (true) {
      mpz_class candidate = 0;
      for (unsigned got = 0; got < bits; got += 64) {
        candidate <<= 64;
        candidate += mpz_class(static_cast<unsigned long>(engine_()));
      }
      candidate >>= (64 - bits % 64) % 64;
      if (candidate < bound) return candidate;
    }
  }

 private:
  static std::uint64_t fold(std::uint64_t seed, std::initializer_list<std::uint64_t> words) {
    std::uint64_t h = splitmix64(seed);
    for (std::uint64_t w : words) h = splitmix64(h ^ w);
    return h;
  }

  std::mt19937_64 engine_;
  Real spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace dpac

#endif  // DPAC_RNG_HPP
