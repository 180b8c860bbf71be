#include "hcp/poly.hpp"

#include <algorithm>
#include <stdexcept>

#include <gmp.h>

namespace hcp {

void poly_trim(ModPoly& f) {
  while (!f.empty() && f.back().m == 0) f.pop_back();
}

ModPoly poly_add(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  ModPoly r(std::max(f.size(), g.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    Fp a = i < f.size() ? f[i] : F.zero();
    Fp b = i < g.size() ? g[i] : F.zero();
    r[i] = F.add(a, b);
  }
  poly_trim(r);
  return r;
}

ModPoly poly_sub(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  ModPoly r(std::max(f.size(), g.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    Fp a = i < f.size() ? f[i] : F.zero();
    Fp b = i < g.size() ? g[i] : F.zero();
    r[i] = F.sub(a, b);
  }
  poly_trim(r);
  return r;
}

ModPoly poly_scale(const PrimeField& F, const ModPoly& f, Fp c) {
  ModPoly r(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) r[i] = F.mul(f[i], c);
  poly_trim(r);
  return r;
}

ModPoly poly_mul_schoolbook(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  if (f.empty() || g.empty()) return {};
  ModPoly r(f.size() + g.size() - 1, F.zero());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i].m == 0) continue;
    for (std::size_t j = 0; j < g.size(); ++j) r[i + j] = F.add(r[i + j], F.mul(f[i], g[j]));
  }
  poly_trim(r);
  return r;
}

namespace {

ModPoly slice(const ModPoly& f, std::size_t lo, std::size_t hi) {
  hi = std::min(hi, f.size());
  if (lo >= hi) return {};
  ModPoly r(f.begin() + static_cast<long>(lo), f.begin() + static_cast<long>(hi));
  poly_trim(r);
  return r;
}

void add_shifted(const PrimeField& F, ModPoly& acc, const ModPoly& x, std::size_t shift) {
  if (acc.size() < x.size() + shift) acc.resize(x.size() + shift, F.zero());
  for (std::size_t i = 0; i < x.size(); ++i) acc[i + shift] = F.add(acc[i + shift], x[i]);
}

ModPoly karatsuba_rec(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  if (f.empty() || g.empty()) return {};
  if (std::min(f.size(), g.size()) <= kSchoolbookMax) return poly_mul_schoolbook(F, f, g);
  std::size_t h = std::max(f.size(), g.size()) / 2;
  ModPoly f0 = slice(f, 0, h), f1 = slice(f, h, f.size());
  ModPoly g0 = slice(g, 0, h), g1 = slice(g, h, g.size());
  ModPoly r;
  if (g1.empty() || f1.empty()) {
    // One operand fits entirely in the low half.
    const ModPoly& whole = g1.empty() ? g : f;
    const ModPoly& lo = g1.empty() ? f0 : g0;
    const ModPoly& hi = g1.empty() ? f1 : g1;
    r = karatsuba_rec(F, lo, whole);
    add_shifted(F, r, karatsuba_rec(F, hi, whole), h);
    poly_trim(r);
    return r;
  }
  ModPoly z0 = karatsuba_rec(F, f0, g0);
  ModPoly z2 = karatsuba_rec(F, f1, g1);
  ModPoly z1 = karatsuba_rec(F, poly_add(F, f0, f1), poly_add(F, g0, g1));
  z1 = poly_sub(F, poly_sub(F, z1, z0), z2);
  r = z0;
  add_shifted(F, r, z1, h);
  add_shifted(F, r, z2, 2 * h);
  poly_trim(r);
  return r;
}

}  // namespace

ModPoly poly_mul_karatsuba(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  return karatsuba_rec(F, f, g);
}

ModPoly poly_mul_kronecker(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  if (f.empty() || g.empty()) return {};
  const ModPoly& a = f.size() >= g.size() ? f : g;
  const ModPoly& b = f.size() >= g.size() ? g : f;
  u64 p = F.modulus();
  int bits = 2 * bit_length(p - 1) + bit_length(b.size()) + 1;
  std::size_t k = static_cast<std::size_t>((bits + 63) / 64);
  if (k > 3) throw std::logic_error("poly_mul_kronecker: slot too wide");
  std::vector<mp_limb_t> ap(a.size() * k, 0), bp(b.size() * k, 0);
  for (std::size_t i = 0; i < a.size(); ++i) ap[i * k] = a[i].m;
  for (std::size_t i = 0; i < b.size(); ++i) bp[i * k] = b[i].m;
  std::vector<mp_limb_t> rp(ap.size() + bp.size());
  mpn_mul(rp.data(), ap.data(), static_cast<mp_size_t>(ap.size()), bp.data(),
          static_cast<mp_size_t>(bp.size()));
  // Slot value S = l0 + l1 R + l2 R^2 holds R^2 * (true coefficient); redc
  // brings it to Montgomery form.
  ModPoly r(a.size() + b.size() - 1);
  for (std::size_t i = 0; i < r.size(); ++i) {
    const mp_limb_t* s = rp.data() + i * k;
    u64 l0 = s[0];
    u64 l1 = k > 1 ? s[1] % p : 0;
    u64 l2 = k > 2 ? s[2] % p : 0;
    // (l0 + l1 R)/R mod p, valid since l1 < p.
    u128 t = (static_cast<u128>(l1) << 64) | l0;
    r[i] = F.redc_wide(t);
    if (l2) r[i] = F.add(r[i], F.from_u64(l2));
  }
  poly_trim(r);
  return r;
}

ModPoly poly_mul(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  std::size_t n = std::min(f.size(), g.size());
  if (n <= kSchoolbookMax) return poly_mul_schoolbook(F, f, g);
  if (n <= kKaratsubaMax) return poly_mul_karatsuba(F, f, g);
  return poly_mul_kronecker(F, f, g);
}

ModPoly poly_monic(const PrimeField& F, const ModPoly& f) {
  if (f.empty()) return f;
  if (F.is_one(f.back())) return f;
  return poly_scale(F, f, F.inv(f.back()));
}

namespace {

void divrem_schoolbook(const PrimeField& F, const ModPoly& f, const ModPoly& g, ModPoly* q,
                       ModPoly* r) {
  ModPoly rem = f;
  std::size_t n = g.size();
  if (rem.size() < n) {
    if (q) q->clear();
    if (r) *r = rem;
    return;
  }
  bool monic = F.is_one(g.back());
  Fp lead_inv = monic ? F.one() : F.inv(g.back());
  ModPoly quo(rem.size() - n + 1, F.zero());
  for (std::size_t i = rem.size(); i-- >= n;) {
    Fp c = rem[i];
    if (c.m == 0) continue;
    if (!monic) c = F.mul(c, lead_inv);
    quo[i - n + 1] = c;
    std::size_t base = i - n + 1;
    for (std::size_t j = 0; j + 1 < n; ++j) rem[base + j] = F.sub(rem[base + j], F.mul(c, g[j]));
    rem[i] = F.zero();
  }
  rem.resize(n - 1);
  poly_trim(rem);
  poly_trim(quo);
  if (q) *q = std::move(quo);
  if (r) *r = std::move(rem);
}

ModPoly reversed(const ModPoly& f, std::size_t len) {
  ModPoly r(len, Fp{0});
  for (std::size_t i = 0; i < len && i < f.size(); ++i) r[len - 1 - i] = f[i];
  return r;
}

ModPoly truncated(ModPoly f, std::size_t len) {
  if (f.size() > len) f.resize(len);
  poly_trim(f);
  return f;
}

// Inverse of h modulo X^len, h(0) != 0.
ModPoly series_inverse(const PrimeField& F, const ModPoly& h, std::size_t len) {
  ModPoly x{F.inv(h[0])};
  std::size_t cur = 1;
  while (cur < len) {
    cur = std::min(2 * cur, len);
    ModPoly hx = truncated(poly_mul(F, truncated(h, cur), x), cur);
    ModPoly two_minus = poly_sub(F, ModPoly{}, hx);
    if (two_minus.empty()) two_minus.push_back(F.zero());
    two_minus[0] = F.add(two_minus[0], F.from_u64(2));
    poly_trim(two_minus);
    x = truncated(poly_mul(F, x, two_minus), cur);
  }
  return x;
}

// Reduction modulo a fixed polynomial, using a precomputed reversed inverse
// when the modulus is large.
struct PolyModulus {
  const PrimeField& F;
  ModPoly g;
  ModPoly ginv;  // inverse of rev(g) mod X^(deg g)
  bool fast = false;

  PolyModulus(const PrimeField& field, const ModPoly& m) : F(field), g(poly_monic(field, m)) {
    std::size_t n = g.size() - 1;
    fast = n >= 96;
    if (fast) ginv = series_inverse(F, reversed(g, g.size()), n);
  }

  // Reduces f with deg f < 2 deg g.
  ModPoly reduce(const ModPoly& f) const {
    std::size_t n = g.size() - 1;
    if (f.size() <= n) return f;
    if (!fast) {
      ModPoly r;
      divrem_schoolbook(F, f, g, nullptr, &r);
      return r;
    }
    std::size_t qlen = f.size() - n;
    ModPoly q = truncated(poly_mul(F, truncated(reversed(f, f.size()), qlen), truncated(ginv, qlen)), qlen);
    q = reversed(q, qlen);
    poly_trim(q);
    ModPoly r = truncated(poly_sub(F, truncated(f, n), truncated(poly_mul(F, q, g), n)), n);
    return r;
  }
};

}  // namespace

void poly_divrem(const PrimeField& F, const ModPoly& f, const ModPoly& g, ModPoly* q, ModPoly* r) {
  if (g.empty()) throw std::domain_error("poly_divrem: division by zero polynomial");
  divrem_schoolbook(F, f, g, q, r);
}

ModPoly poly_mod(const PrimeField& F, const ModPoly& f, const ModPoly& g) {
  ModPoly r;
  poly_divrem(F, f, g, nullptr, &r);
  return r;
}

ModPoly poly_gcd(const PrimeField& F, ModPoly f, ModPoly g) {
  poly_trim(f);
  poly_trim(g);
  while (!g.empty()) {
    ModPoly r = poly_mod(F, f, g);
    f = std::move(g);
    g = std::move(r);
  }
  return poly_monic(F, f);
}

Fp poly_eval(const PrimeField& F, const ModPoly& f, Fp x) {
  Fp acc = F.zero();
  for (std::size_t i = f.size(); i-- > 0;) acc = F.add(F.mul(acc, x), f[i]);
  return acc;
}

bool poly_divide_linear(const PrimeField& F, ModPoly& f, Fp a) {
  if (f.empty()) return false;
  ModPoly q(f.size() - 1);
  Fp carry = F.zero();
  for (std::size_t i = f.size(); i-- > 1;) {
    carry = F.add(F.mul(carry, a), f[i]);
    q[i - 1] = carry;
  }
  Fp rem = F.add(F.mul(carry, a), f[0]);
  if (rem.m != 0) return false;
  f = std::move(q);
  return true;
}

namespace {

// base^e mod g for monic g of small degree, on fixed buffers. When the sums
// fit, products are accumulated unreduced and X^k mod g comes from a table.
ModPoly powmod_small(const PrimeField& F, const ModPoly& b, const BigInt& e, const ModPoly& g) {
  std::size_t n = g.size() - 1;
  u64 p = F.modulus();
  bool lazy = static_cast<u128>(2 * n + 2) * p < (static_cast<u128>(1) << 64);
  std::vector<Fp> res(n, F.zero()), tmp(2 * n, F.zero()), bb(n, F.zero());
  for (std::size_t i = 0; i < b.size() && i < n; ++i) bb[i] = b[i];
  bool base_is_x = n > 1 && b.size() == 2 && b[0].m == 0 && F.is_one(b[1]);
  res[0] = F.one();
  // table[k - n] = X^k mod g for n <= k <= 2n - 2
  std::vector<std::vector<Fp>> table;
  std::vector<u128> acc(2 * n, 0);
  if (lazy && n >= 2) {
    std::vector<Fp> cur(n);
    for (std::size_t j = 0; j < n; ++j) cur[j] = F.neg(g[j]);
    table.push_back(cur);
    for (std::size_t k = n + 1; k + 1 < 2 * n; ++k) {
      Fp top = cur[n - 1];
      for (std::size_t j = n - 1; j > 0; --j) cur[j] = F.sub(cur[j - 1], F.mul(top, g[j]));
      cur[0] = F.neg(F.mul(top, g[0]));
      table.push_back(cur);
    }
  }
  auto reduce = [&](std::size_t top) {
    // tmp has entries [0, top); reduce to degree < n
    for (std::size_t i = top; i-- > n;) {
      Fp c = tmp[i];
      if (c.m == 0) continue;
      std::size_t base = i - n;
      for (std::size_t j = 0; j < n; ++j) tmp[base + j] = F.sub(tmp[base + j], F.mul(c, g[j]));
      tmp[i] = F.zero();
    }
    for (std::size_t i = 0; i < n; ++i) res[i] = tmp[i];
  };
  auto mul_into = [&](const std::vector<Fp>& x, const std::vector<Fp>& y) {
    if (lazy && n >= 2) {
      std::fill(acc.begin(), acc.end(), 0);
      for (std::size_t i = 0; i < n; ++i) {
        u64 xi = x[i].m;
        if (xi == 0) continue;
        for (std::size_t j = 0; j < n; ++j) acc[i + j] += static_cast<u128>(xi) * y[j].m;
      }
      for (std::size_t k = n; k + 1 < 2 * n; ++k) {
        u64 c = F.redc_wide(acc[k]).m;
        if (c == 0) continue;
        const auto& row = table[k - n];
        for (std::size_t j = 0; j < n; ++j) acc[j] += static_cast<u128>(c) * row[j].m;
      }
      for (std::size_t j = 0; j < n; ++j) res[j] = F.redc_wide(acc[j]);
      return;
    }
    std::fill(tmp.begin(), tmp.end(), F.zero());
    for (std::size_t i = 0; i < n; ++i) {
      if (x[i].m == 0) continue;
      for (std::size_t j = 0; j < n; ++j) tmp[i + j] = F.add(tmp[i + j], F.mul(x[i], y[j]));
    }
    reduce(2 * n - 1);
  };
  for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    mul_into(res, res);
    if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
      if (base_is_x) {
        std::fill(tmp.begin(), tmp.end(), F.zero());
        for (std::size_t j = 0; j < n; ++j) tmp[j + 1] = res[j];
        reduce(n + 1);
      } else {
        mul_into(res, bb);
      }
    }
  }
  ModPoly out(res.begin(), res.end());
  poly_trim(out);
  return out;
}

}  // namespace

ModPoly poly_powmod(const PrimeField& F, const ModPoly& base, const BigInt& e, const ModPoly& m) {
  if (m.size() < 2) return {};
  PolyModulus mod(F, m);
  if (!mod.fast && sgn(e) > 0 && mod.g.size() > 2) return powmod_small(F, mod.reduce(poly_mod(F, base, mod.g)), e, mod.g);
  ModPoly b = mod.reduce(poly_mod(F, base, mod.g));
  ModPoly result{F.one()};
  if (mod.g.size() == 2) result = mod.reduce(result);
  bool base_is_x = base.size() == 2 && base[0].m == 0 && F.is_one(base[1]) && mod.g.size() > 2;
  for (long i = static_cast<long>(mpz_sizeinbase(e.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    result = mod.reduce(poly_mul(F, result, result));
    if (mpz_tstbit(e.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) {
      if (base_is_x) {
        result.insert(result.begin(), F.zero());
        result = mod.reduce(result);
      } else {
        result = mod.reduce(poly_mul(F, result, b));
      }
    }
  }
  if (sgn(e) == 0) return mod.reduce(ModPoly{F.one()});
  return result;
}

namespace {

// Product of the distinct linear factors of f (made monic).
ModPoly split_part_impl(const PrimeField& F, const ModPoly& f) {
  ModPoly xp = poly_powmod(F, ModPoly{F.zero(), F.one()}, BigInt(static_cast<unsigned long>(F.modulus())), f);
  ModPoly x{F.zero(), F.one()};
  return poly_gcd(F, f, poly_sub(F, xp, x));
}

// Splits g, a monic product of distinct linear factors of degree >= 2, into
// two nontrivial factors.
std::pair<ModPoly, ModPoly> equal_degree_split(const PrimeField& F, const ModPoly& g, Rng& rng) {
  BigInt half = BigInt(static_cast<unsigned long>((F.modulus() - 1) / 2));
  for (;;) {
    Fp a = F.from_u64(rng.below(F.modulus()));
    ModPoly w = poly_powmod(F, ModPoly{a, F.one()}, half, g);
    if (w.empty()) w.push_back(F.zero());
    w[0] = F.sub(w[0], F.one());
    poly_trim(w);
    ModPoly d = poly_gcd(F, g, w);
    if (d.size() > 1 && d.size() < g.size()) {
      ModPoly q;
      poly_divrem(F, g, d, &q, nullptr);
      return {d, poly_monic(F, q)};
    }
  }
}

std::optional<Fp> linear_root(const PrimeField& F, const ModPoly& f) {
  return F.neg(F.div(f[0], f[1]));
}

std::vector<Fp> quadratic_roots(const PrimeField& F, const ModPoly& f) {
  // f = c X^2 + b X + a
  Fp a = f[0], b = f[1], c = f[2];
  Fp disc = F.sub(F.sqr(b), F.mul(F.from_u64(4), F.mul(a, c)));
  auto s = F.sqrt(disc);
  if (!s) return {};
  Fp inv2c = F.inv(F.dbl(c));
  Fp r1 = F.mul(F.sub(*s, b), inv2c);
  Fp r2 = F.mul(F.sub(F.neg(*s), b), inv2c);
  if (r1 == r2) return {r1};
  return {r1, r2};
}

void split_all(const PrimeField& F, const ModPoly& g, Rng& rng, std::vector<Fp>& out) {
  if (g.size() <= 1) return;
  if (g.size() == 2) {
    out.push_back(*linear_root(F, g));
    return;
  }
  if (g.size() == 3) {
    for (Fp r : quadratic_roots(F, g)) out.push_back(r);
    return;
  }
  auto [a, b] = equal_degree_split(F, g, rng);
  split_all(F, a, rng, out);
  split_all(F, b, rng, out);
}

}  // namespace

ModPoly poly_split_part(const PrimeField& F, const ModPoly& f) {
  ModPoly g = f;
  poly_trim(g);
  if (g.size() < 2) return ModPoly{F.one()};
  return split_part_impl(F, poly_monic(F, g));
}

std::vector<Fp> split_linear(const PrimeField& F, const ModPoly& g, Rng& rng) {
  std::vector<Fp> out;
  split_all(F, g, rng, out);
  return out;
}

std::optional<Fp> find_one_root(const PrimeField& F, const ModPoly& f_in, Rng& rng) {
  ModPoly f = f_in;
  poly_trim(f);
  if (f.size() < 2) return std::nullopt;
  if (f[0].m == 0) return F.zero();
  if (f.size() == 2) return linear_root(F, f);
  if (f.size() == 3) {
    auto rs = quadratic_roots(F, f);
    if (rs.empty()) return std::nullopt;
    return rs[rng.below(rs.size())];
  }
  ModPoly g = split_part_impl(F, poly_monic(F, f));
  while (g.size() > 3) {
    auto [a, b] = equal_degree_split(F, g, rng);
    bool pick_a = a.size() == b.size() ? (rng() & 1) : a.size() < b.size();
    g = pick_a ? a : b;
  }
  if (g.size() == 2) return linear_root(F, g);
  if (g.size() == 3) {
    auto rs = quadratic_roots(F, g);
    return rs[rng.below(rs.size())];
  }
  return std::nullopt;
}

std::vector<RootMult> roots(const PrimeField& F, const ModPoly& f_in) {
  ModPoly f = poly_monic(F, f_in);
  poly_trim(f);
  std::vector<RootMult> out;
  if (f.size() < 2) return out;
  std::vector<Fp> rs;
  ModPoly work = f;
  unsigned zero_mult = 0;
  while (!work.empty() && work[0].m == 0) {
    work.erase(work.begin());
    ++zero_mult;
  }
  if (zero_mult) rs.push_back(F.zero());
  if (work.size() >= 2) {
    Rng rng(F.modulus(), work.size());
    split_all(F, split_part_impl(F, work), rng, rs);
  }
  std::sort(rs.begin(), rs.end(), [&](Fp a, Fp b) { return F.to_u64(a) < F.to_u64(b); });
  ModPoly rest = f;
  for (Fp r : rs) {
    unsigned m = 0;
    while (poly_divide_linear(F, rest, r)) ++m;
    out.push_back({r, m});
  }
  return out;
}

ModPoly product_from_roots(const PrimeField& F, const std::vector<Fp>& rs) {
  if (rs.empty()) return ModPoly{F.one()};
  std::vector<ModPoly> level;
  level.reserve((rs.size() + 1) / 2);
  for (std::size_t i = 0; i < rs.size(); i += 2) {
    if (i + 1 < rs.size()) {
      Fp a = rs[i], b = rs[i + 1];
      level.push_back(ModPoly{F.mul(a, b), F.neg(F.add(a, b)), F.one()});
    } else {
      level.push_back(ModPoly{F.neg(rs[i]), F.one()});
    }
  }
  while (level.size() > 1) {
    std::vector<ModPoly> next;
    next.reserve((level.size() + 1) / 2);
    for (std::size_t i = 0; i < level.size(); i += 2) {
      if (i + 1 < level.size())
        next.push_back(poly_mul(F, level[i], level[i + 1]));
      else
        next.push_back(std::move(level[i]));
    }
    level = std::move(next);
  }
  return level[0];
}

}  // namespace hcp
