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
// Paillier cryptosystem with additive homomorphism, plus a signed
// fixed-point codec so real-valued data can ride on integer plaintexts.
// The generator is fixed to g = n+1, so encryption is
//   E(m) = (1 + m n) r^n mod n^2
// using the binomial identity (n+1)^m = 1 + m n (mod n^2).

#ifndef DPAC_PAILLIER_HPP
#define DPAC_PAILLIER_HPP

#include <gmpxx.h>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "dpac/common.hpp"
#include "dpac/rng.hpp"

namespace dpac::paillier {

struct PublicKey {
  mpz_class n;
  mpz_class n_squared;
  unsigned bits = 0;
};

struct Keypair {
  PublicKey pub;
  mpz_class p, q;
  mpz_class lambda;      // (p-1)(q-1)
  mpz_class lambda_inv;  // lambda^{-1} mod n
  // CRT decryption residues: exponentiations run mod p^2 and q^2 instead of
  // n^2, which is ~4x cheaper.
  mpz_class p_squared, q_squared;
  mpz_class hp;           // ((p-1) q)^{-1} mod p
  mpz_class hq;           // ((q-1) p)^{-1} mod q
  mpz_class p_inv_mod_q;
};

// A residue mod n^2, tagged with the owning public modulus so that
// cross-key operations fail loudly.
struct Ciphertext {
  mpz_class value;
  mpz_class modulus;
};

namespace detail {

inline mpz_class random_prime(unsigned bits, Rng& rng) {
  mpz_class candidate = rng.random_bits(bits);
  // Top two bits set: guarantees the product of two such primes has full
  // bit length and p cannot divide q-1.
  candidate |= mpz_class(1) << (bits - 2);
  mpz_class prime;
  mpz_nextprime(prime.get_mpz_t(), candidate.get_mpz_t());
  return prime;
}

}  // namespace detail

namespace detail {

inline void finish_keypair(Keypair& kp) {
  kp.pub.n_squared = kp.pub.n * kp.pub.n;
  kp.pub.bits = static_cast<unsigned>(mpz_sizeinbase(kp.pub.n.get_mpz_t(), 2));
  kp.lambda = (kp.p - 1) * (kp.q - 1);
  if (mpz_invert(kp.lambda_inv.get_mpz_t(), kp.lambda.get_mpz_t(), kp.pub.n.get_mpz_t()) == 0)
    throw std::runtime_error("keygen: lambda not invertible (retryable)");
  kp.p_squared = kp.p * kp.p;
  kp.q_squared = kp.q * kp.q;
  const mpz_class hp_base = (kp.p - 1) * kp.q % kp.p;
  const mpz_class hq_base = (kp.q - 1) * kp.p % kp.q;
  if (mpz_invert(kp.hp.get_mpz_t(), hp_base.get_mpz_t(), kp.p.get_mpz_t()) == 0 ||
      mpz_invert(kp.hq.get_mpz_t(), hq_base.get_mpz_t(), kp.q.get_mpz_t()) == 0 ||
      mpz_invert(kp.p_inv_mod_q.get_mpz_t(), kp.p.get_mpz_t(), kp.q.get_mpz_t()) == 0)
    throw std::runtime_error("keygen: degenerate CRT parameters (retryable)");
}

}  // namespace detail

inline Keypair keygen(unsigned bits, Rng& rng) {
  if (bits < 16) throw std::invalid_argument("keygen: key size below 16 bits");
  const unsigned half = (bits + 1) / 2;
  const mpz_class p = detail::random_prime(half, rng);
  mpz_class q;
  int attempts = 0;
  do {
    if (++attempts > 100)
      throw std::runtime_error("keygen: failed to find distinct primes (retryable)");
    q = detail::random_prime(half, rng);
  } while (q == p);

  Keypair kp;
  kp.p = p;
  kp.q = q;
  kp.pub.n = p * q;
  detail::finish_keypair(kp);
  return kp;
}

inline Ciphertext encrypt(const PublicKey& pub, const mpz_class& m, Rng& rng) {
  if (m < 0 || m >= pub.n)
    throw std::domain_error("encrypt: plaintext outside [0, n)");
  mpz_class r;
  do {
    r = rng.random_below(pub.n);
  } while (r == 0 || gcd(r, pub.n) != 1);
  mpz_class rn;
  mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pub.n.get_mpz_t(), pub.n_squared.get_mpz_t());
  mpz_class c = ((1 + m * pub.n) % pub.n_squared) * rn % pub.n_squared;
  return Ciphertext{std::move(c), pub.n};
}

// CRT decryption: c^(p-1) mod p^2 = 1 + m (p-1) n mod p^2 since the blinding
// factor collapses (r^(n(p-1)) = 1 mod p^2), so ((.) - 1)/p * hp mod p
// recovers m mod p; combine with the q residue.
inline mpz_class decrypt(const Keypair& kp, const Ciphertext& c) {
  if (c.modulus != kp.pub.n)
    throw std::domain_error("decrypt: ciphertext belongs to a different key");
  if (c.value <= 0 || c.value >= kp.pub.n_squared || gcd(c.value, kp.pub.n) != 1)
    throw IntegrityError("decrypt: malformed ciphertext");
  mpz_class up, uq, exponent;
  exponent = kp.p - 1;
  mpz_powm(up.get_mpz_t(), c.value.get_mpz_t(), exponent.get_mpz_t(),
           kp.p_squared.get_mpz_t());
  exponent = kp.q - 1;
  mpz_powm(uq.get_mpz_t(), c.value.get_mpz_t(), exponent.get_mpz_t(),
           kp.q_squared.get_mpz_t());
  const mpz_class mp = (up - 1) / kp.p % kp.p * kp.hp % kp.p;
  const mpz_class mq = (uq - 1) / kp.q % kp.q * kp.hq % kp.q;
  mpz_class t = (mq - mp) * kp.p_inv_mod_q % kp.q;
  if (t < 0) t += kp.q;
  return mp + kp.p * t;
}

// Homomorphic addition: ciphertext product decrypts to m1 + m2 mod n.
inline Ciphertext c_add(const PublicKey& pub, const Ciphertext& c1, const Ciphertext& c2) {
  if (c1.modulus != pub.n || c2.modulus != pub.n)
    throw std::domain_error("c_add: modulus mismatch");
  return Ciphertext{c1.value * c2.value % pub.n_squared, pub.n};
}

// Homomorphic scaling: ciphertext power decrypts to k*m mod n, k >= 1.
inline Ciphertext c_scale(const PublicKey& pub, const Ciphertext& c, const mpz_class& k) {
  if (c.modulus != pub.n) throw std::domain_error("c_scale: modulus mismatch");
  if (k < 1) throw std::domain_error("c_scale: k must be a positive integer");
  mpz_class out;
  mpz_powm(out.get_mpz_t(), c.value.get_mpz_t(), k.get_mpz_t(), pub.n_squared.get_mpz_t());
  return Ciphertext{std::move(out), pub.n};
}

// Signed representatives: values in [0, n/2) are nonnegative, (n/2, n) are
// negative (v - n).
inline mpz_class to_residue(const mpz_class& signed_value, const mpz_class& n) {
  if (2 * abs(signed_value) >= n)
    throw std::range_error("signed value " + signed_value.get_str() +
                           " exceeds the plaintext half-range");
  return signed_value >= 0 ? signed_value : mpz_class(n + signed_value);
}

inline mpz_class to_signed(const mpz_class& residue, const mpz_class& n) {
  return 2 * residue >= n ? mpz_class(residue - n) : residue;
}

// Signed fixed-point codec with scale C = 2^scale_bits. The scale is a power
// of two so that x*C is an exact float operation at every magnitude and the
// 1/(2C) roundtrip bound holds for all in-range inputs.
class FixedPointCodec {
 public:
  FixedPointCodec(unsigned scale_bits, mpz_class modulus)
      : scale_bits_(scale_bits),
        scale_(mpz_class(1) << scale_bits),
        modulus_(std::move(modulus)) {
    if (scale_bits_ == 0 || modulus_ <= 2 * scale_)
      throw std::invalid_argument("FixedPointCodec: modulus too small for scale");
  }

  // Round-half-away-from-zero, applied once here; everything downstream is
  // exact integer arithmetic.
  mpz_class encode(Real x) const {
    if (!std::isfinite(x)) throw std::range_error("encode: non-finite value");
    const Real scaled = std::ldexp(x, static_cast<int>(scale_bits_));
    const Real rounded = scaled >= 0 ? std::floor(scaled + 0.5L) : std::ceil(scaled - 0.5L);
    return to_residue(mpz_from_real(rounded), modulus_);  // range-checked there
  }

  Real decode(const mpz_class& m) const {
    return std::ldexp(real_from_mpz(to_signed(m, modulus_)), -static_cast<int>(scale_bits_));
  }

  const mpz_class& scale() const { return scale_; }
  unsigned scale_bits() const { return scale_bits_; }
  const mpz_class& modulus() const { return modulus_; }

 private:
  unsigned scale_bits_;
  mpz_class scale_;
  mpz_class modulus_;
};

inline std::string to_text(const Keypair& kp) {
  std::ostringstream out;
  out << "paillier-key v1\n"
      << "n=" << kp.pub.n.get_str() << "\n"
      << "p=" << kp.p.get_str() << "\n"
      << "q=" << kp.q.get_str() << "\n";
  return out.str();
}

inline Keypair keypair_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  if (line != "paillier-key v1") throw ValidationError("keypair_from_text: bad header");
  auto read_field = [&](const std::string& name) {
    std::getline(in, line);
    if (line.rfind(name + "=", 0) != 0)
      throw ValidationError("keypair_from_text: expected field " + name);
    return mpz_class(line.substr(name.size() + 1));
  };
  Keypair kp;
  kp.pub.n = read_field("n");
  kp.p = read_field("p");
  kp.q = read_field("q");
  if (kp.p * kp.q != kp.pub.n)
    throw ValidationError("keypair_from_text: n != p*q");
  try {
    detail::finish_keypair(kp);
  } catch (const std::runtime_error& e) {
    throw ValidationError(std::string("keypair_from_text: ") + e.what());
  }
  return kp;
}

}  // namespace dpac::paillier

#endif  // DPAC_PAILLIER_HPP
