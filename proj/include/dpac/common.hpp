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

#ifndef DPAC_COMMON_HPP
#define DPAC_COMMON_HPP

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dpac {

// Consensus states and noise values. 80-bit extended precision: with
// sigma_eta up to ~1e15 the initial states only cancel in aggregate, and a
// 53-bit mantissa leaves ulp-level noise comparable to the residual error
// being measured.
using Real = long double;

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Conversion long double -> mpz. Exact for integral inputs; fractional
// parts truncate toward zero. mpz_class has no long double constructor.
inline mpz_class mpz_from_real(Real v) {
  if (!std::isfinite(v)) throw NumericalError("mpz_from_real: non-finite value");
  const bool negative = v < 0;
  if (negative) v = -v;
  if (v < 1.0L) return 0;
  int exp = 0;
  Real mant = std::frexp(v, &exp);  // v = mant * 2^exp, mant in [0.5, 1)
  mant = std::ldexp(mant, 64);      // integral: long double mantissa is 64 bits
  exp -= 64;
  const auto m = static_cast<std::uint64_t>(mant);
  mpz_class out(static_cast<unsigned long>(m));
  if (exp >= 0) {
    out <<= exp;
  } else {
    out >>= -exp;
  }
  return negative ? mpz_class(-out) : out;
}

// Round-to-nearest conversion mpz -> long double.
inline Real real_from_mpz(const mpz_class& v) {
  if (v == 0) return 0.0L;
  mpz_class av = abs(v);
  const long bits = static_cast<long>(mpz_sizeinbase(av.get_mpz_t(), 2));
  long shift = bits > 64 ? bits - 64 : 0;
  mpz_class top = av >> shift;
  if (shift > 0) {
    mpz_class rem = av - (top << shift);
    if (rem * 2 >= (mpz_class(1) << shift)) top += 1;
    if (mpz_sizeinbase(top.get_mpz_t(), 2) > 64) {  // rounded up to 2^64
      top >>= 1;
      shift += 1;
    }
  }
  const mpz_class hi = top >> 32;
  const mpz_class lo = top - (hi << 32);
  Real r = std::ldexp(static_cast<Real>(mpz_get_ui(hi.get_mpz_t())), 32) +
           static_cast<Real>(mpz_get_ui(lo.get_mpz_t()));
  r = std::ldexp(r, static_cast<int>(shift));
  return sgn(v) < 0 ? -r : r;
}

// Exact rational value of a long double (long doubles are dyadic rationals).
inline mpq_class mpq_from_real(Real v) {
  if (!std::isfinite(v)) throw NumericalError("mpq_from_real: non-finite value");
  if (v == 0.0L) return mpq_class(0);
  int exp = 0;
  Real mant = std::frexp(v, &exp);
  mant = std::ldexp(mant, 64);
  exp -= 64;
  mpq_class q(mpz_from_real(mant));
  if (exp >= 0) {
    q *= mpz_class(mpz_class(1) << exp);
  } else {
    q /= mpz_class(mpz_class(1) << -exp);
  }
  q.canonicalize();
  return q;
}

// Nearest long double to an exact rational.
inline Real real_from_mpq(const mpq_class& q) {
  if (q == 0) return 0.0L;
  const mpz_class& num = q.get_num();
  const mpz_class& den = q.get_den();
  const long nbits = static_cast<long>(mpz_sizeinbase(num.get_mpz_t(), 2));
  const long dbits = static_cast<long>(mpz_sizeinbase(den.get_mpz_t(), 2));
  const long shift = 80 - (nbits - dbits);  // keep ~80 significant bits
  mpz_class scaled = shift >= 0 ? mpz_class(num << shift) : mpz_class(num >> -shift);
  mpz_class quot = scaled / den;
  return std::ldexp(real_from_mpz(quot), static_cast<int>(-shift));
}

}  // namespace dpac

#endif  // DPAC_COMMON_HPP
