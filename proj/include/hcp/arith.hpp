#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace hcp {

using u64 = std::uint64_t;
using i64 = std::int64_t;
using u128 = unsigned __int128;
using i128 = __int128;

using BigInt = mpz_class;

// Kronecker symbol (D/n) for n >= 1, with (D/2) = 0 for even D, +1 for
// D = +-1 mod 8 and -1 for D = +-3 mod 8.
int kronecker(i64 D, u64 n);
int kronecker(const BigInt& D, const BigInt& n);

u64 mulmod(u64 a, u64 b, u64 m);
u64 powmod(u64 a, u64 e, u64 m);
// Inverse of a modulo m; requires gcd(a, m) = 1.
u64 invmod(u64 a, u64 m);

// Square root of a modulo the odd prime p (Tonelli-Shanks). Returns nothing
// when a is a non-residue.
std::optional<u64> sqrt_mod(u64 a, u64 p);

// Deterministic for n < 2^64.
bool is_prime(u64 n);
// Deterministic below 2^64, Miller-Rabin with error < 2^-80 above.
bool is_prime(const BigInt& n);

u64 isqrt(u64 n);
u64 gcd(u64 a, u64 b);
int bit_length(u64 n);

struct PrimePower {
  BigInt prime;
  unsigned exponent = 0;
};

// n together with its complete factorization, primes strictly increasing.
struct FactoredInteger {
  BigInt n = 1;
  std::vector<PrimePower> factors;

  std::size_t omega() const { return factors.size(); }
  bool is_prime_power() const { return factors.size() == 1; }
  std::string to_string() const;
};

FactoredInteger factorize(const BigInt& n);
FactoredInteger factorize(u64 n);

// Primes p <= bound in increasing order.
std::vector<u64> primes_up_to(u64 bound);

// nu_l(n), the l-adic valuation of n > 0.
unsigned valuation(u64 n, u64 l);

double lg(const BigInt& n);

}  // namespace hcp
