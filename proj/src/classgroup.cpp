#include "hcp/classgroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include <mpfr.h>

namespace hcp {

namespace {

i128 floor_div(i128 a, i128 b) {
  i128 q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

i128 pos_mod(i128 a, i128 m) {
  i128 r = a % m;
  return r < 0 ? r + m : r;
}

// u*a + v*b = g = gcd(a, b) >= 0.
i128 ext_gcd(i128 a, i128 b, i128& u, i128& v) {
  i128 u0 = 1, v0 = 0, u1 = 0, v1 = 1;
  while (b != 0) {
    i128 q = floor_div(a, b);
    i128 t = a - q * b;
    a = b;
    b = t;
    t = u0 - q * u1;
    u0 = u1;
    u1 = t;
    t = v0 - q * v1;
    v0 = v1;
    v1 = t;
  }
  if (a < 0) {
    a = -a;
    u0 = -u0;
    v0 = -v0;
  }
  u = u0;
  v = v0;
  return a;
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

struct WideForm {
  i128 a, b, c;
};

QuadForm reduce_wide(WideForm f, i128 D) {
  auto normalize = [&]() {
    if (-f.a < f.b && f.b <= f.a) return;
    i128 q = floor_div(f.a - f.b, 2 * f.a);
    f.b += 2 * q * f.a;
    f.c = (f.b * f.b - D) / (4 * f.a);
  };
  normalize();
  while (f.a > f.c) {
    std::swap(f.a, f.c);
    f.b = -f.b;
    normalize();
  }
  if (f.a == f.c && f.b < 0) f.b = -f.b;
  return QuadForm{static_cast<i64>(f.a), static_cast<i64>(f.b), static_cast<i64>(f.c)};
}

}  // namespace

i64 discriminant(const QuadForm& f) {
  return static_cast<i64>(static_cast<i128>(f.b) * f.b - static_cast<i128>(4) * f.a * f.c);
}

bool is_reduced(const QuadForm& f) {
  if (f.a <= 0) return false;
  if (std::llabs(f.b) > f.a || f.a > f.c) return false;
  if ((std::llabs(f.b) == f.a || f.a == f.c) && f.b < 0) return false;
  return true;
}

bool is_discriminant(i64 D) {
  if (D >= 0) return false;
  i64 r = ((D % 4) + 4) % 4;
  return r == 0 || r == 1;
}

DiscInfo disc_info(i64 D) {
  if (!is_discriminant(D)) throw std::invalid_argument("disc_info: not a negative discriminant");
  FactoredInteger f = factorize(static_cast<u64>(-D));
  i64 core = -1;
  u64 u = 1;
  for (const auto& pp : f.factors) {
    u64 q = pp.prime.get_ui();
    for (unsigned k = 0; k < pp.exponent / 2; ++k) u *= q;
    if (pp.exponent & 1) core *= static_cast<i64>(q);
  }
  if (((core % 4) + 4) % 4 != 1) {
    core *= 4;
    u /= 2;
  }
  return DiscInfo{D, core, u};
}

int unit_count(i64 D) {
  if (D == -3) return 6;
  if (D == -4) return 4;
  return 2;
}

QuadForm reduce_form(const QuadForm& f) {
  if (f.a <= 0) throw std::invalid_argument("reduce_form: a must be positive");
  if (std::gcd(std::gcd(f.a, std::llabs(f.b)), f.c) != 1)
    throw std::invalid_argument("reduce_form: form is not primitive");
  i128 D = static_cast<i128>(f.b) * f.b - static_cast<i128>(4) * f.a * f.c;
  if (D >= 0) throw std::invalid_argument("reduce_form: discriminant must be negative");
  return reduce_wide(WideForm{f.a, f.b, f.c}, D);
}

QuadForm principal_form(i64 D) {
  i64 b = (D & 1) ? 1 : 0;
  return QuadForm{1, b, (b * b - D) / 4};
}

QuadForm inverse_form(const QuadForm& f) { return reduce_wide(WideForm{f.a, -f.b, f.c}, discriminant(f)); }

QuadForm compose(const QuadForm& f, const QuadForm& g) {
  i64 D = discriminant(f);
  if (discriminant(g) != D) throw std::invalid_argument("compose: discriminants differ");
  const QuadForm& f1 = f.a <= g.a ? f : g;
  const QuadForm& f2 = f.a <= g.a ? g : f;
  i128 a1 = f1.a, b1 = f1.b, a2 = f2.a, b2 = f2.b, c2 = f2.c;
  i128 s = (b1 + b2) / 2;
  i128 n = b2 - s;
  i128 y1, d;
  if (a2 % a1 == 0) {
    y1 = 0;
    d = a1;
  } else {
    i128 u, v;
    d = ext_gcd(a2, a1, u, v);
    y1 = u;
  }
  i128 x2, y2, d1;
  if (s % d == 0) {
    y2 = -1;
    x2 = 0;
    d1 = d;
  } else {
    i128 u, v;
    d1 = ext_gcd(s, d, u, v);
    x2 = u;
    y2 = -v;
  }
  i128 v1 = a1 / d1, v2 = a2 / d1;
  i128 r = pos_mod(pos_mod(y1 * y2, v1) * pos_mod(n, v1) - pos_mod(x2 * c2, v1), v1);
  i128 b3 = b2 + 2 * v2 * r;
  i128 a3 = v1 * v2;
  i128 c3 = (b3 * b3 - D) / (4 * a3);
  return reduce_wide(WideForm{a3, b3, c3}, D);
}

QuadForm form_pow(const QuadForm& f, u64 e) {
  QuadForm r = principal_form(discriminant(f));
  QuadForm base = f;
  while (e) {
    if (e & 1) r = compose(r, base);
    base = compose(base, base);
    e >>= 1;
  }
  return r;
}

std::optional<QuadForm> prime_form(u64 l, i64 D) {
  DiscInfo info = disc_info(D);
  if (info.u % l == 0) throw std::invalid_argument("prime_form: l divides the conductor");
  if (kronecker(D, l) == -1) return std::nullopt;
  i64 li = static_cast<i64>(l);
  i64 parity = D & 1;
  std::vector<i64> cands;
  if (l == 2) {
    cands = {0, 1, 2};
  } else {
    u64 dm = static_cast<u64>(((D % li) + li) % li);
    i64 r = static_cast<i64>(*sqrt_mod(dm, l));
    cands = {r, li - r};
  }
  for (i64 b : cands) {
    if ((b & 1) != parity) continue;
    i128 num = static_cast<i128>(b) * b - D;
    if (num % (4 * li) == 0) return QuadForm{li, b, static_cast<i64>(num / (4 * li))};
  }
  return std::nullopt;
}

namespace {

// Roots of x^2 = D modulo q^f by digit-wise lifting.
std::vector<i128> roots_prime_power_generic(i64 D, u64 q, unsigned f) {
  std::vector<i128> cur;
  i128 mod = static_cast<i128>(q);
  for (u64 x = 0; x < q; ++x)
    if (pos_mod(static_cast<i128>(x) * x - D, mod) == 0) cur.push_back(x);
  for (unsigned k = 1; k < f; ++k) {
    i128 next_mod = mod * q;
    std::vector<i128> next;
    for (i128 r : cur)
      for (u64 t = 0; t < q; ++t) {
        i128 x = r + static_cast<i128>(t) * mod;
        if (pos_mod(x * x - D, next_mod) == 0) next.push_back(x);
      }
    cur = std::move(next);
    mod = next_mod;
  }
  return cur;
}

// Roots of x^2 = D modulo q^f for odd q not dividing D.
std::vector<i128> roots_prime_power_unit(i64 D, u64 q, unsigned f) {
  u64 dm = static_cast<u64>(pos_mod(D, q));
  auto s = sqrt_mod(dm, q);
  if (!s) return {};
  i128 r = *s;
  i128 mod = q;
  for (unsigned k = 1; k < f; ++k) {
    mod *= q;
    // r <- r - (r^2 - D) / (2r) mod q^(k+1)
    i128 fx = pos_mod(r * r - D, mod);
    u64 inv = invmod(static_cast<u64>(pos_mod(2 * r, mod)), static_cast<u64>(mod));
    r = pos_mod(r - fx * static_cast<i128>(inv) % mod, mod);
  }
  if (r == 0) return {0};
  return {r, mod - r};
}

}  // namespace

std::vector<QuadForm> reduced_forms(i64 D) {
  if (!is_discriminant(D)) throw std::invalid_argument("reduced_forms: invalid discriminant");
  u64 amax = isqrt(static_cast<u64>(-D) / 3);
  while ((amax + 1) * (amax + 1) * 3 <= static_cast<u64>(-D)) ++amax;
  std::vector<u64> spf(amax + 1, 0);
  for (u64 i = 2; i <= amax; ++i) {
    if (spf[i]) continue;
    for (u64 j = i; j <= amax; j += i)
      if (!spf[j]) spf[j] = i;
  }
  std::vector<QuadForm> out;
  std::vector<i128> acc, next;
  for (u64 a = 1; a <= amax; ++a) {
    // Combine root sets modulo 2^(e+2) and the odd prime powers of a.
    u64 rest = a;
    unsigned e2 = 0;
    while ((rest & 1) == 0) {
      rest >>= 1;
      ++e2;
    }
    acc = roots_prime_power_generic(D, 2, e2 + 2);
    i128 mod = static_cast<i128>(1) << (e2 + 2);
    bool ok = !acc.empty();
    while (ok && rest > 1) {
      u64 q = spf[rest];
      unsigned f = 0;
      u64 qf = 1;
      while (rest % q == 0) {
        rest /= q;
        ++f;
        qf *= q;
      }
      std::vector<i128> rq = (D % static_cast<i64>(q) == 0) ? roots_prime_power_generic(D, q, f)
                                                             : roots_prime_power_unit(D, q, f);
      if (rq.empty()) {
        ok = false;
        break;
      }
      // CRT combine.
      u64 inv = invmod(static_cast<u64>(mod % static_cast<i128>(qf)), qf);
      next.clear();
      for (i128 x : acc)
        for (i128 y : rq) {
          i128 t = pos_mod((y - x) % static_cast<i128>(qf) * inv, qf);
          next.push_back(x + mod * t);
        }
      mod *= qf;
      acc.swap(next);
    }
    if (!ok) continue;
    i128 two_a = 2 * static_cast<i128>(a);
    std::vector<i64> bs;
    for (i128 x : acc) {
      i128 b = pos_mod(x, two_a);
      if (b > static_cast<i128>(a)) b -= two_a;
      bs.push_back(static_cast<i64>(b));
    }
    std::sort(bs.begin(), bs.end());
    bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
    i64 ai = static_cast<i64>(a);
    for (i64 b : bs) {
      i128 num = static_cast<i128>(b) * b - D;
      i64 c = static_cast<i64>(num / (4 * ai));
      if (c < ai) continue;
      if (b < 0 && (c == ai || -b == ai)) continue;
      if (gcd128(gcd128(ai, b), c) != 1) continue;
      out.push_back(QuadForm{ai, b, c});
    }
  }
  return out;
}

u64 class_number(i64 D) { return reduced_forms(D).size(); }

HurwitzTable::HurwitzTable(i64 D) : info_(disc_info(D)) {
  h0_ = class_number(info_.D0);
  w0_ = unit_count(info_.D0);
}

mpq_class HurwitzTable::operator()(u64 v) const {
  if (v == 0) throw std::invalid_argument("hurwitz_number: v must be positive");
  u64 n = info_.u * v;
  mpq_class result(static_cast<long>(2 * h0_), static_cast<unsigned long>(w0_));
  result.canonicalize();
  if (n > 1) {
    FactoredInteger f = factorize(n);
    for (const auto& pp : f.factors) {
      u64 p = pp.prime.get_ui();
      int chi = kronecker(info_.D0, p);
      BigInt pk;
      mpz_pow_ui(pk.get_mpz_t(), pp.prime.get_mpz_t(), pp.exponent);
      mpq_class term = mpq_class(1) + mpq_class((pk - 1) * (static_cast<long>(p) - chi), static_cast<long>(p - 1));
      term.canonicalize();
      result *= term;
    }
  }
  result.canonicalize();
  return result;
}

double HurwitzTable::approx(u64 v) const { return (*this)(v).get_d(); }

mpq_class hurwitz_number(i64 D, u64 v) { return HurwitzTable(D)(v); }

std::vector<u64> PolycyclicPresentation::decode(u64 z) const {
  std::vector<u64> x(rel_orders.size());
  u64 N = 1;
  for (std::size_t j = 0; j < rel_orders.size(); ++j) {
    x[j] = (z / N) % rel_orders[j];
    N *= rel_orders[j];
  }
  return x;
}

bool admissible_norm(u64 l, const DiscInfo& info) {
  if (!is_prime(l)) return false;
  if (info.u % l == 0) return false;
  return kronecker(info.D, l) != -1;
}

std::vector<u64> default_candidates(i64 D) {
  DiscInfo info = disc_info(D);
  double L = std::log(static_cast<double>(-D));
  u64 bound = static_cast<u64>(6 * L * L);
  std::vector<u64> out;
  for (u64 l : primes_up_to(bound))
    if (admissible_norm(l, info)) out.push_back(l);
  return out;
}

namespace {

struct FormTable {
  std::vector<QuadForm> items;
  std::unordered_map<u64, u64> index;

  static u64 key(const QuadForm& f) {
    return (static_cast<u64>(f.a) << 32) ^ static_cast<u64>(static_cast<std::uint32_t>(f.b));
  }
  void insert(const QuadForm& f) {
    index.emplace(key(f), items.size());
    items.push_back(f);
  }
  std::optional<u64> lookup(const QuadForm& f) const {
    auto it = index.find(key(f));
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

}  // namespace

PolycyclicPresentation polycyclic_presentation(i64 D, const std::vector<u64>& candidates, u64 extend_to) {
  DiscInfo info = disc_info(D);
  u64 h = class_number(D);
  PolycyclicPresentation pres;
  pres.D = D;
  pres.h = h;
  FormTable T;
  T.index.reserve(2 * h);
  T.items.reserve(h);
  T.insert(principal_form(D));
  std::vector<u64> gamma = candidates;
  u64 next_extension = 2;
  for (u64 l : gamma) next_extension = std::max(next_extension, l + 1);
  for (std::size_t i = 0; T.items.size() < h; ++i) {
    if (i == gamma.size()) {
      u64 l = next_extension;
      while (l <= extend_to && !admissible_norm(l, info)) ++l;
      if (l > extend_to) throw std::runtime_error("polycyclic_presentation: candidate norms do not generate cl(D)");
      gamma.push_back(l);
      next_extension = l + 1;
    }
    u64 l = gamma[i];
    if (!admissible_norm(l, info)) throw std::invalid_argument("polycyclic_presentation: inadmissible norm");
    QuadForm g = reduce_form(*prime_form(l, D));
    QuadForm beta = g;
    u64 r = 1;
    std::size_t N = T.items.size();
    std::optional<u64> s;
    while (!(s = T.lookup(beta))) {
      for (std::size_t j = 0; j < N; ++j) {
        T.insert(j == 0 ? beta : compose(beta, T.items[j]));
        ++pres.table_inserts;
      }
      beta = compose(beta, g);
      ++r;
    }
    if (r > 1) {
      pres.norms.push_back(l);
      pres.rel_orders.push_back(r);
      pres.relations.push_back(*s);
      pres.generators.push_back(g);
    }
  }
  return pres;
}

namespace {

struct Mp {
  mpfr_t v;
  Mp() { mpfr_init2(v, 160); }
  ~Mp() { mpfr_clear(v); }
  Mp(const Mp&) = delete;
};

// lg(exp(pi sqrt|D| / a) + C), rounded in direction rnd.
void lg_Mk(mpfr_t out, i64 D, i64 a, mpfr_rnd_t rnd) {
  Mp x, t;
  mpfr_const_pi(x.v, rnd);
  mpfr_set_si(t.v, -D, rnd);
  mpfr_sqrt(t.v, t.v, rnd);
  mpfr_mul(x.v, x.v, t.v, rnd);
  mpfr_div_si(x.v, x.v, a, rnd);
  mpfr_exp(x.v, x.v, rnd);
  mpfr_set_str(t.v, "2114.567", 10, rnd);
  mpfr_add(x.v, x.v, t.v, rnd);
  mpfr_log2(out, x.v, rnd);
}

}  // namespace

HeightBound height_bound(i64 D) { return height_bound(D, reduced_forms(D)); }

HeightBound height_bound(i64 D, const std::vector<QuadForm>& forms) {
  HeightBound hb;
  hb.h = forms.size();
  for (const auto& f : forms) hb.form_norms.push_back(f.a);
  std::sort(hb.form_norms.begin(), hb.form_norms.end());
  Mp sum, term, lgMh_down;
  mpfr_set_ui(sum.v, 0, MPFR_RNDU);
  for (i64 a : hb.form_norms) {
    lg_Mk(term.v, D, a, MPFR_RNDU);
    mpfr_add(sum.v, sum.v, term.v, MPFR_RNDU);
  }
  // m = floor((h+1)/(M_h+1)); M_h is at least 2114 so m is small.
  i64 ah = hb.form_norms.back();
  lg_Mk(lgMh_down.v, D, ah, MPFR_RNDD);
  Mp Mh_down;
  mpfr_ui_pow(Mh_down.v, 2, lgMh_down.v, MPFR_RNDD);
  mpfr_add_ui(Mh_down.v, Mh_down.v, 1, MPFR_RNDD);
  Mp q;
  mpfr_ui_div(q.v, static_cast<unsigned long>(hb.h + 1), Mh_down.v, MPFR_RNDU);
  u64 m = static_cast<u64>(mpfr_get_ui(q.v, MPFR_RNDZ));
  if (m > 0) {
    BigInt binom;
    mpz_bin_uiui(binom.get_mpz_t(), hb.h, m);
    Mp lb;
    mpfr_set_z(lb.v, binom.get_mpz_t(), MPFR_RNDU);
    mpfr_log2(lb.v, lb.v, MPFR_RNDU);
    mpfr_add(sum.v, sum.v, lb.v, MPFR_RNDU);
    mpfr_mul_ui(term.v, lgMh_down.v, m, MPFR_RNDD);
    mpfr_sub(sum.v, sum.v, term.v, MPFR_RNDU);
  }
  hb.lgB = mpfr_get_d(sum.v, MPFR_RNDU);
  mpfr_ceil(sum.v, sum.v);
  hb.b = static_cast<u64>(mpfr_get_ui(sum.v, MPFR_RNDU)) + 2;
  return hb;
}

}  // namespace hcp
