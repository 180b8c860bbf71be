#include "hcp/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace hcp {

u64 mulmod(u64 a, u64 b, u64 m) { return static_cast<u64>(static_cast<u128>(a) * b % m); }

u64 powmod(u64 a, u64 e, u64 m) {
  u64 r = 1 % m;
  a %= m;
  while (e) {
    if (e & 1) r = mulmod(r, a, m);
    a = mulmod(a, a, m);
    e >>= 1;
  }
  return r;
}

u64 invmod(u64 a, u64 m) {
  i128 t = 0, newt = 1;
  u64 r = m, newr = a % m;
  while (newr != 0) {
    u64 q = r / newr;
    i128 tmp = t - static_cast<i128>(q) * newt;
    t = newt;
    newt = tmp;
    u64 rr = r - q * newr;
    r = newr;
    newr = rr;
  }
  if (r != 1) throw std::domain_error("invmod: not invertible");
  if (t < 0) t += m;
  return static_cast<u64>(t);
}

u64 gcd(u64 a, u64 b) { return std::gcd(a, b); }

int bit_length(u64 n) { return n ? 64 - __builtin_clzll(n) : 0; }

u64 isqrt(u64 n) {
  u64 r = static_cast<u64>(std::sqrt(static_cast<long double>(n)));
  while (r > 0 && static_cast<u128>(r) * r > n) --r;
  while (static_cast<u128>(r + 1) * (r + 1) <= n) ++r;
  return r;
}

unsigned valuation(u64 n, u64 l) {
  unsigned v = 0;
  while (n % l == 0) {
    n /= l;
    ++v;
  }
  return v;
}

double lg(const BigInt& n) {
  long exp = 0;
  double mant = mpz_get_d_2exp(&exp, n.get_mpz_t());
  return std::log2(std::fabs(mant)) + static_cast<double>(exp);
}

int kronecker(i64 D, u64 n) {
  if (n == 0) return (D == 1 || D == -1) ? 1 : 0;
  int result = 1;
  // Strip factors of two from n.
  while ((n & 1) == 0) {
    n >>= 1;
    if ((D & 1) == 0) return 0;
    i64 r8 = ((D % 8) + 8) % 8;
    if (r8 == 3 || r8 == 5) result = -result;
  }
  // Now n odd: Jacobi symbol (D/n).
  u64 a = static_cast<u64>(((D % static_cast<i128>(n)) + n) % n);
  u64 m = n;
  while (a != 0) {
    while ((a & 1) == 0) {
      a >>= 1;
      u64 r8 = m % 8;
      if (r8 == 3 || r8 == 5) result = -result;
    }
    std::swap(a, m);
    if (a % 4 == 3 && m % 4 == 3) result = -result;
    a %= m;
  }
  return m == 1 ? result : 0;
}

int kronecker(const BigInt& D, const BigInt& n) {
  if (sgn(n) <= 0) throw std::invalid_argument("kronecker: n must be positive");
  return mpz_kronecker(D.get_mpz_t(), n.get_mpz_t());
}

std::optional<u64> sqrt_mod(u64 a, u64 p) {
  a %= p;
  if (a == 0) return 0;
  if (p == 2) return a;
  if (powmod(a, (p - 1) / 2, p) != 1) return std::nullopt;
  if (p % 4 == 3) return powmod(a, (p + 1) / 4, p);
  u64 q = p - 1;
  unsigned s = 0;
  while ((q & 1) == 0) {
    q >>= 1;
    ++s;
  }
  // Pseudo-random non-residue, reproducible for a given p.
  u64 z = 0;
  for (u64 state = p;;) {
    state = state * 6364136223846793005ULL + 1442695040888963407ULL;
    z = 2 + (state >> 11) % (p - 2);
    if (powmod(z, (p - 1) / 2, p) == p - 1) break;
  }
  u64 c = powmod(z, q, p);
  u64 x = powmod(a, (q + 1) / 2, p);
  u64 t = powmod(a, q, p);
  unsigned m = s;
  while (t != 1) {
    unsigned i = 0;
    u64 tt = t;
    while (tt != 1) {
      tt = mulmod(tt, tt, p);
      ++i;
    }
    u64 b = c;
    for (unsigned k = 0; k + i + 1 < m; ++k) b = mulmod(b, b, p);
    x = mulmod(x, b, p);
    c = mulmod(b, b, p);
    t = mulmod(t, c, p);
    m = i;
  }
  return x;
}

namespace {

// Montgomery arithmetic mod an odd n, R = 2^64.
struct Mont {
  u64 n, ninv, r2;
  explicit Mont(u64 m) : n(m) {
    ninv = m;
    for (int i = 0; i < 5; ++i) ninv *= 2 - m * ninv;
    u128 r = (static_cast<u128>(1) << 64) % m;
    r2 = static_cast<u64>(r * r % m);
  }
  u64 redc(u128 t) const {
    u64 q = static_cast<u64>(t) * -ninv;
    u128 s = t + static_cast<u128>(q) * n;
    bool carry = s < t;
    u64 r = static_cast<u64>(s >> 64);
    if (carry || r >= n) r -= n;
    return r;
  }
  u64 mul(u64 a, u64 b) const { return redc(static_cast<u128>(a) * b); }
  u64 to(u64 a) const { return mul(a % n, r2); }
};

bool miller_rabin_witness(const Mont& M, u64 a, u64 d, unsigned s, u64 one, u64 minus_one) {
  a %= M.n;
  if (a == 0) return false;
  u64 base = M.to(a), x = one;
  for (u64 e = d; e; e >>= 1) {
    if (e & 1) x = M.mul(x, base);
    base = M.mul(base, base);
  }
  if (x == one || x == minus_one) return false;
  for (unsigned r = 1; r < s; ++r) {
    x = M.mul(x, x);
    if (x == minus_one) return false;
  }
  return true;
}

}  // namespace

bool is_prime(u64 n) {
  if (n < 2) return false;
  static constexpr u64 small[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                                  53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113};
  for (u64 q : small) {
    if (n == q) return true;
    if (n % q == 0) return false;
  }
  if (n < 127 * 127) return true;
  u64 d = n - 1;
  unsigned s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  Mont M(n);
  u64 one = M.to(1), minus_one = n - one;
  // Witness set deterministic for all n < 2^64.
  static constexpr u64 bases[] = {2, 325, 9375, 28178, 450775, 9780504, 1795265022};
  for (u64 a : bases)
    if (miller_rabin_witness(M, a, d, s, one, minus_one)) return false;
  return true;
}

bool is_prime(const BigInt& n) {
  if (sgn(n) < 0) return false;
  if (mpz_fits_ulong_p(n.get_mpz_t())) return is_prime(static_cast<u64>(n.get_ui()));
  // 40 rounds bound the error by 4^-40.
  return mpz_probab_prime_p(n.get_mpz_t(), 40) != 0;
}

std::string FactoredInteger::to_string() const {
  std::ostringstream os;
  if (factors.empty()) return "1";
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) os << " * ";
    os << factors[i].prime.get_str();
    if (factors[i].exponent > 1) os << "^" << factors[i].exponent;
  }
  return os.str();
}

namespace {

u64 pollard_brent(u64 n, u64 seed) {
  if (n % 2 == 0) return 2;
  u64 c = seed % (n - 1) + 1;
  auto f = [&](u64 x) { return (mulmod(x, x, n) + c) % n; };
  u64 y = seed % n, m = 128, g = 1, r = 1, q = 1, x = 0, ys = 0;
  while (g == 1) {
    x = y;
    for (u64 i = 0; i < r; ++i) y = f(y);
    u64 k = 0;
    while (k < r && g == 1) {
      ys = y;
      for (u64 i = 0; i < std::min(m, r - k); ++i) {
        y = f(y);
        q = mulmod(q, x > y ? x - y : y - x, n);
      }
      g = std::gcd(q, n);
      k += m;
    }
    r <<= 1;
  }
  if (g == n) {
    do {
      ys = f(ys);
      g = std::gcd(x > ys ? x - ys : ys - x, n);
    } while (g == 1);
  }
  return g;
}

void split_u64(u64 n, std::vector<u64>& out) {
  if (n == 1) return;
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  for (u64 seed = 2;; ++seed) {
    u64 d = pollard_brent(n, seed);
    if (d != n && d != 1) {
      split_u64(d, out);
      split_u64(n / d, out);
      return;
    }
  }
}

void split_big(const BigInt& n, std::vector<BigInt>& out) {
  if (n == 1) return;
  if (mpz_fits_ulong_p(n.get_mpz_t())) {
    std::vector<u64> small;
    split_u64(n.get_ui(), small);
    for (u64 q : small) out.emplace_back(static_cast<unsigned long>(q));
    return;
  }
  if (is_prime(n)) {
    out.push_back(n);
    return;
  }
  // Brent's rho over GMP integers.
  for (unsigned long c = 1;; ++c) {
    BigInt x = 2, y = 2, g = 1, q = 1, ys, diff;
    unsigned long r = 1, m = 64;
    auto f = [&](BigInt& v) {
      v = v * v + c;
      mpz_mod(v.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t());
    };
    while (g == 1) {
      x = y;
      for (unsigned long i = 0; i < r; ++i) f(y);
      unsigned long k = 0;
      while (k < r && g == 1) {
        ys = y;
        for (unsigned long i = 0; i < std::min(m, r - k); ++i) {
          f(y);
          diff = abs(x - y);
          q = q * diff;
          mpz_mod(q.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        }
        mpz_gcd(g.get_mpz_t(), q.get_mpz_t(), n.get_mpz_t());
        k += m;
      }
      r <<= 1;
    }
    if (g == n) {
      do {
        f(ys);
        diff = abs(x - ys);
        mpz_gcd(g.get_mpz_t(), diff.get_mpz_t(), n.get_mpz_t());
      } while (g == 1);
    }
    if (g != n) {
      split_big(g, out);
      BigInt rest = n / g;
      split_big(rest, out);
      return;
    }
  }
}

FactoredInteger collect(const BigInt& n, std::vector<BigInt> primes) {
  std::sort(primes.begin(), primes.end());
  FactoredInteger f;
  f.n = n;
  for (const auto& q : primes) {
    if (!f.factors.empty() && f.factors.back().prime == q)
      ++f.factors.back().exponent;
    else
      f.factors.push_back({q, 1});
  }
  return f;
}

}  // namespace

FactoredInteger factorize(u64 n) {
  if (n == 0) throw std::invalid_argument("factorize: n must be positive");
  std::vector<BigInt> primes;
  for (u64 q : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL}) {
    while (n % q == 0) {
      primes.emplace_back(static_cast<unsigned long>(q));
      n /= q;
    }
  }
  BigInt full = 1;
  for (const auto& q : primes) full *= q;
  std::vector<u64> rest;
  for (u64 q = 17; q < 1000 && q * q <= n; q += 2) {
    while (n % q == 0) {
      rest.push_back(q);
      n /= q;
    }
  }
  split_u64(n, rest);
  for (u64 q : rest) {
    primes.emplace_back(static_cast<unsigned long>(q));
    full *= static_cast<unsigned long>(q);
  }
  return collect(full, std::move(primes));
}

FactoredInteger factorize(const BigInt& n) {
  if (sgn(n) <= 0) throw std::invalid_argument("factorize: n must be positive");
  if (mpz_fits_ulong_p(n.get_mpz_t())) return factorize(static_cast<u64>(n.get_ui()));
  std::vector<BigInt> primes;
  BigInt m = n;
  for (unsigned long q = 2; q < 100000; q += (q == 2 ? 1 : 2)) {
    while (mpz_divisible_ui_p(m.get_mpz_t(), q)) {
      primes.emplace_back(q);
      m /= q;
    }
    if (m == 1) break;
  }
  split_big(m, primes);
  return collect(n, std::move(primes));
}

std::vector<u64> primes_up_to(u64 bound) {
  std::vector<u64> out;
  if (bound < 2) return out;
  std::vector<bool> composite(bound + 1, false);
  for (u64 i = 2; i <= bound; ++i) {
    if (composite[i]) continue;
    out.push_back(i);
    for (u64 j = i * i; j <= bound; j += i) composite[j] = true;
  }
  return out;
}

}  // namespace hcp
