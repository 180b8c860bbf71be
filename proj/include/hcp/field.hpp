#pragma once

#include <optional>
#include <span>
#include <vector>

#include "hcp/arith.hpp"

namespace hcp {

// An element of F_p held in Montgomery form. Values are only meaningful
// relative to the PrimeField that created them.
struct Fp {
  u64 m = 0;
  friend bool operator==(Fp, Fp) = default;
};

// F_p for an odd prime p < 2^62, using Montgomery multiplication with R = 2^64.
class PrimeField {
 public:
  explicit PrimeField(u64 p);

  u64 modulus() const { return p_; }

  Fp zero() const { return Fp{0}; }
  Fp one() const { return Fp{r1_}; }
  Fp from_u64(u64 x) const { return Fp{redc(static_cast<u128>(x % p_) * r2_)}; }
  Fp from_i64(i64 x) const;
  Fp from_big(const BigInt& x) const;
  u64 to_u64(Fp a) const { return redc(a.m); }
  // t * 2^-64 mod p as a field element; requires t < p * 2^64.
  Fp redc_wide(u128 t) const { return Fp{redc(t)}; }

  bool is_zero(Fp a) const { return a.m == 0; }
  bool is_one(Fp a) const { return a.m == r1_; }

  Fp add(Fp a, Fp b) const {
    u64 s = a.m + b.m;
    return Fp{s >= p_ ? s - p_ : s};
  }
  Fp sub(Fp a, Fp b) const { return Fp{a.m >= b.m ? a.m - b.m : a.m + p_ - b.m}; }
  Fp neg(Fp a) const { return Fp{a.m ? p_ - a.m : 0}; }
  Fp dbl(Fp a) const { return add(a, a); }
  Fp mul(Fp a, Fp b) const { return Fp{redc(static_cast<u128>(a.m) * b.m)}; }
  Fp sqr(Fp a) const { return mul(a, a); }
  Fp mul_small(Fp a, u64 k) const { return mul(a, from_u64(k)); }

  Fp pow(Fp a, u64 e) const;
  Fp pow(Fp a, const BigInt& e) const;
  // Throws std::domain_error on zero.
  Fp inv(Fp a) const;
  Fp div(Fp a, Fp b) const { return mul(a, inv(b)); }

  // Replaces every element by its inverse with a single field inversion.
  // All inputs must be nonzero.
  void batch_inv(std::span<Fp> xs) const;

  // Legendre symbol: 0, 1 or -1.
  int legendre(Fp a) const;
  bool is_square(Fp a) const { return legendre(a) >= 0; }
  std::optional<Fp> sqrt(Fp a) const;

  // A fixed quadratic non-residue, sampled pseudo-randomly at construction.
  Fp nonresidue() const { return nonresidue_; }

 private:
  u64 redc(u128 t) const {
    u64 m = static_cast<u64>(t) * nprime_;
    u128 u = (t + static_cast<u128>(m) * p_) >> 64;
    u64 r = static_cast<u64>(u);
    return r >= p_ ? r - p_ : r;
  }

  u64 p_;
  u64 nprime_;  // -p^{-1} mod 2^64
  u64 r1_;      // 2^64 mod p
  u64 r2_;      // 2^128 mod p
  Fp nonresidue_;
  unsigned two_adicity_ = 0;  // p - 1 = 2^s * q with q odd
  u64 odd_part_ = 0;
};

}  // namespace hcp
