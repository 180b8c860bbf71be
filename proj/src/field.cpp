#include "hcp/field.hpp"

#include <stdexcept>

#include "hcp/rng.hpp"

namespace hcp {

PrimeField::PrimeField(u64 p) : p_(p) {
  if (p < 3 || (p & 1) == 0 || p >= (1ULL << 62) || !is_prime(p))
    throw std::invalid_argument("PrimeField: modulus must be an odd prime below 2^62");
  u64 inv = p;  // p*p = 1 mod 8
  for (int i = 0; i < 5; ++i) inv *= 2 - p * inv;
  nprime_ = ~inv + 1;
  r1_ = static_cast<u64>((static_cast<u128>(1) << 64) % p);
  r2_ = static_cast<u64>(static_cast<u128>(r1_) * r1_ % p);
  odd_part_ = p - 1;
  while ((odd_part_ & 1) == 0) {
    odd_part_ >>= 1;
    ++two_adicity_;
  }
  Rng rng(p, 0x5157);
  for (;;) {
    Fp z = from_u64(2 + rng.below(p - 2));
    if (legendre(z) == -1) {
      nonresidue_ = z;
      break;
    }
  }
}

Fp PrimeField::from_i64(i64 x) const {
  i64 r = x % static_cast<i64>(p_);
  if (r < 0) r += static_cast<i64>(p_);
  return from_u64(static_cast<u64>(r));
}

Fp PrimeField::from_big(const BigInt& x) const {
  BigInt r;
  mpz_fdiv_r_ui(r.get_mpz_t(), x.get_mpz_t(), p_);
  return from_u64(r.get_ui());
}

Fp PrimeField::pow(Fp a, u64 e) const {
  Fp r = one();
  while (e) {
    if (e & 1) r = mul(r, a);
    a = sqr(a);
    e >>= 1;
  }
  return r;
}

Fp PrimeField::pow(Fp a, const BigInt& e) const {
  if (sgn(e) < 0) return pow(inv(a), BigInt(-e));
  BigInt r;
  mpz_fdiv_r_ui(r.get_mpz_t(), e.get_mpz_t(), p_ - 1);
  if (is_zero(a)) return sgn(e) == 0 ? one() : zero();
  return pow(a, static_cast<u64>(r.get_ui()));
}

Fp PrimeField::inv(Fp a) const {
  if (is_zero(a)) throw std::domain_error("PrimeField::inv: zero");
  return from_u64(invmod(to_u64(a), p_));
}

void PrimeField::batch_inv(std::span<Fp> xs) const {
  if (xs.empty()) return;
  std::vector<Fp> prefix(xs.size());
  Fp acc = one();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    prefix[i] = acc;
    acc = mul(acc, xs[i]);
  }
  Fp t = inv(acc);
  for (std::size_t i = xs.size(); i-- > 0;) {
    Fp x = xs[i];
    xs[i] = mul(t, prefix[i]);
    t = mul(t, x);
  }
}

int PrimeField::legendre(Fp a) const {
  if (is_zero(a)) return 0;
  return kronecker(static_cast<i64>(to_u64(a)), p_);
}

std::optional<Fp> PrimeField::sqrt(Fp a) const {
  if (is_zero(a)) return a;
  if (legendre(a) != 1) return std::nullopt;
  if ((p_ & 3) == 3) return pow(a, (p_ + 1) / 4);
  Fp c = pow(nonresidue_, odd_part_);
  Fp x = pow(a, (odd_part_ + 1) / 2);
  Fp t = pow(a, odd_part_);
  unsigned m = two_adicity_;
  while (!is_one(t)) {
    unsigned i = 0;
    Fp tt = t;
    while (!is_one(tt)) {
      tt = sqr(tt);
      ++i;
    }
    Fp b = c;
    for (unsigned k = 0; k + i + 1 < m; ++k) b = sqr(b);
    x = mul(x, b);
    c = sqr(b);
    t = mul(t, c);
    m = i;
  }
  return x;
}

}  // namespace hcp
