#include "hcp/curves.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hcp/poly.hpp"

namespace hcp {

bool same_point(const Point& P, const Point& Q) {
  if (P.inf || Q.inf) return P.inf == Q.inf;
  return P.x == Q.x && P.y == Q.y;
}

Fp curve_rhs(const PrimeField& F, const Curve& E, Fp x) {
  return F.add(F.mul(F.add(F.sqr(x), E.A), x), E.B);
}

bool is_nonsingular(const PrimeField& F, const Curve& E) {
  Fp a3 = F.mul(F.sqr(E.A), E.A);
  Fp d = F.add(F.mul(F.from_u64(4), a3), F.mul(F.from_u64(27), F.sqr(E.B)));
  return !F.is_zero(d);
}

bool on_curve(const PrimeField& F, const Curve& E, const Point& P) {
  return P.inf || F.sqr(P.y) == curve_rhs(F, E, P.x);
}

Fp j_invariant(const PrimeField& F, const Curve& E) {
  Fp a3 = F.mul(F.from_u64(4), F.mul(F.sqr(E.A), E.A));
  Fp d = F.add(a3, F.mul(F.from_u64(27), F.sqr(E.B)));
  return F.div(F.mul(F.from_u64(1728), a3), d);
}

Point ec_neg(const PrimeField& F, const Point& P) {
  if (P.inf) return P;
  return Point::affine(P.x, F.neg(P.y));
}

Point ec_dbl(const PrimeField& F, const Curve& E, const Point& P) {
  if (P.inf || F.is_zero(P.y)) return Point::at_infinity();
  Fp num = F.add(F.mul(F.from_u64(3), F.sqr(P.x)), E.A);
  Fp lam = F.div(num, F.dbl(P.y));
  Fp x3 = F.sub(F.sqr(lam), F.dbl(P.x));
  Fp y3 = F.sub(F.mul(lam, F.sub(P.x, x3)), P.y);
  return Point::affine(x3, y3);
}

Point ec_add(const PrimeField& F, const Curve& E, const Point& P, const Point& Q) {
  if (P.inf) return Q;
  if (Q.inf) return P;
  if (P.x == Q.x) {
    if (P.y == Q.y) return ec_dbl(F, E, P);
    return Point::at_infinity();
  }
  Fp lam = F.div(F.sub(Q.y, P.y), F.sub(Q.x, P.x));
  Fp x3 = F.sub(F.sub(F.sqr(lam), P.x), Q.x);
  Fp y3 = F.sub(F.mul(lam, F.sub(P.x, x3)), P.y);
  return Point::affine(x3, y3);
}

std::vector<signed char> naf(u64 n) {
  std::vector<signed char> d;
  u128 k = n;
  while (k > 0) {
    if (k & 1) {
      int r = static_cast<int>(k & 3) == 1 ? 1 : -1;
      d.push_back(static_cast<signed char>(r));
      if (r == 1) {
        k -= 1;
      } else {
        k += 1;
      }
    } else {
      d.push_back(0);
    }
    k >>= 1;
  }
  return d;
}

Point scalar_mul(const PrimeField& F, const Curve& E, u64 n, const Point& P) {
  if (n == 0 || P.inf) return Point::at_infinity();
  auto d = naf(n);
  Point negP = ec_neg(F, P);
  Point R = Point::at_infinity();
  for (std::size_t i = d.size(); i-- > 0;) {
    R = ec_dbl(F, E, R);
    if (d[i] == 1) R = ec_add(F, E, R, P);
    if (d[i] == -1) R = ec_add(F, E, R, negP);
  }
  return R;
}

Point scalar_mul(const PrimeField& F, const Curve& E, const BigInt& n, const Point& P) {
  if (n < 0) return scalar_mul(F, E, BigInt(-n), ec_neg(F, P));
  if (n.fits_ulong_p()) return scalar_mul(F, E, static_cast<u64>(n.get_ui()), P);
  Point R = Point::at_infinity();
  for (long i = static_cast<long>(mpz_sizeinbase(n.get_mpz_t(), 2)) - 1; i >= 0; --i) {
    R = ec_dbl(F, E, R);
    if (mpz_tstbit(n.get_mpz_t(), static_cast<mp_bitcnt_t>(i))) R = ec_add(F, E, R, P);
  }
  return R;
}

void BatchScalar::dbl(std::vector<Point>& R) {
  lanes_.clear();
  den_.clear();
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (R[i].inf) continue;
    if (F_.is_zero(R[i].y)) {
      R[i] = Point::at_infinity();
      continue;
    }
    lanes_.push_back(i);
    den_.push_back(F_.dbl(R[i].y));
  }
  F_.batch_inv(den_);
  for (std::size_t k = 0; k < lanes_.size(); ++k) {
    Point& P = R[lanes_[k]];
    Fp num = F_.add(F_.mul(F_.from_u64(3), F_.sqr(P.x)), A_[lanes_[k]]);
    Fp lam = F_.mul(num, den_[k]);
    Fp x3 = F_.sub(F_.sqr(lam), F_.dbl(P.x));
    P.y = F_.sub(F_.mul(lam, F_.sub(P.x, x3)), P.y);
    P.x = x3;
  }
}

void BatchScalar::add(std::vector<Point>& R, const std::vector<Point>& Q, bool negate) {
  lanes_.clear();
  den_.clear();
  for (std::size_t i = 0; i < R.size(); ++i) {
    Point q = negate ? ec_neg(F_, Q[i]) : Q[i];
    if (q.inf) continue;
    if (R[i].inf) {
      R[i] = q;
      continue;
    }
    if (R[i].x == q.x) {
      R[i] = ec_add(F_, Curve{A_[i], Fp{}}, R[i], q);
      continue;
    }
    lanes_.push_back(i);
    den_.push_back(F_.sub(q.x, R[i].x));
  }
  F_.batch_inv(den_);
  for (std::size_t k = 0; k < lanes_.size(); ++k) {
    std::size_t i = lanes_[k];
    Point& P = R[i];
    Fp qy = negate ? F_.neg(Q[i].y) : Q[i].y;
    Fp lam = F_.mul(F_.sub(qy, P.y), den_[k]);
    Fp x3 = F_.sub(F_.sub(F_.sqr(lam), P.x), Q[i].x);
    P.y = F_.sub(F_.mul(lam, F_.sub(P.x, x3)), P.y);
    P.x = x3;
  }
}

std::vector<Point> BatchScalar::mul(const std::vector<Point>& P, const std::vector<signed char>& k) {
  std::vector<Point> R(P.size());
  for (std::size_t i = k.size(); i-- > 0;) {
    dbl(R);
    if (k[i]) add(R, P, k[i] < 0);
  }
  return R;
}

std::vector<Point> BatchScalar::mul2(const std::vector<Point>& P, const std::vector<signed char>& k1,
                                     const std::vector<Point>& Q,
                                     const std::vector<signed char>& k2) {
  std::vector<Point> R(P.size());
  std::size_t len = std::max(k1.size(), k2.size());
  for (std::size_t i = len; i-- > 0;) {
    dbl(R);
    if (i < k1.size() && k1[i]) add(R, P, k1[i] < 0);
    if (i < k2.size() && k2[i]) add(R, Q, k2[i] < 0);
  }
  return R;
}

Curve quadratic_twist(const PrimeField& F, const Curve& E) {
  Fp d = F.nonresidue();
  Fp d2 = F.sqr(d);
  return Curve{F.mul(E.A, d2), F.mul(E.B, F.mul(d2, d))};
}

std::optional<Point> point_with_x(const PrimeField& F, const Curve& E, Fp x) {
  auto y = F.sqrt(curve_rhs(F, E, x));
  if (!y) return std::nullopt;
  return Point::affine(x, *y);
}

Point random_point(const PrimeField& F, const Curve& E, Rng& rng) {
  u64 p = F.modulus();
  for (;;) {
    Fp x = F.from_u64(rng.below(p));
    Fp f = curve_rhs(F, E, x);
    if (F.is_zero(f)) return Point::affine(x, f);
    if (F.legendre(f) != 1) continue;
    Fp y = *F.sqrt(f);
    if (rng() & 1) y = F.neg(y);
    return Point::affine(x, y);
  }
}

u64 count_points_naive(const PrimeField& F, const Curve& E) {
  u64 p = F.modulus();
  long n = 1 + static_cast<long>(p);
  for (u64 x = 0; x < p; ++x) n += F.legendre(curve_rhs(F, E, F.from_u64(x)));
  return static_cast<u64>(n);
}

namespace {

using Factors = std::vector<std::pair<u64, unsigned>>;

u64 ipow(u64 q, unsigned e) {
  u64 r = 1;
  while (e--) r *= q;
  return r;
}

u64 product(const Factors& f, std::size_t lo, std::size_t hi) {
  u64 r = 1;
  for (std::size_t i = lo; i < hi; ++i) r *= ipow(f[i].first, f[i].second);
  return r;
}

bool order_rec(const PrimeField& F, const Curve& E, const Point& P, const Factors& f,
               std::size_t lo, std::size_t hi, Factors& out) {
  if (lo == hi) return P.inf;
  if (hi - lo == 1) {
    auto [q, n] = f[lo];
    Point Q = P;
    for (unsigned i = 0;; ++i) {
      if (Q.inf) {
        if (i) out.emplace_back(q, i);
        return true;
      }
      if (i == n) return false;
      Q = scalar_mul(F, E, q, Q);
    }
  }
  std::size_t mid = lo + (hi - lo) / 2;
  u64 n1 = product(f, lo, mid), n2 = product(f, mid, hi);
  if (!order_rec(F, E, scalar_mul(F, E, n2, P), f, lo, mid, out)) return false;
  return order_rec(F, E, scalar_mul(F, E, n1, P), f, mid, hi, out);
}

Factors to_factors(const FactoredInteger& N) {
  Factors f;
  for (const auto& pp : N.factors) {
    if (!pp.prime.fits_ulong_p()) throw std::invalid_argument("factor exceeds a machine word");
    f.emplace_back(pp.prime.get_ui(), pp.exponent);
  }
  return f;
}

FactoredInteger from_factors(const Factors& f) {
  FactoredInteger r;
  r.n = 1;
  for (auto [q, e] : f) {
    r.factors.push_back(PrimePower{BigInt(static_cast<unsigned long>(q)), e});
    r.n *= BigInt(static_cast<unsigned long>(ipow(q, e)));
  }
  return r;
}

// Factorization of N / m given that of N and m | N.
Factors cofactor(const Factors& N, u64 m) {
  Factors r;
  for (auto [q, e] : N) {
    unsigned k = 0;
    while (m % q == 0) {
      m /= q;
      ++k;
    }
    if (e > k) r.emplace_back(q, e - k);
  }
  return r;
}

bool hasse_subset(u64 p, u64 m0, u64 m1, u64 N0, u64 N1) {
  BigInt M0(static_cast<unsigned long>(m0)), M1(static_cast<unsigned long>(m1));
  BigInt two_p2 = 2 * BigInt(static_cast<unsigned long>(p)) + 2;
  BigInt a1 = two_p2 % M1;
  BigInt g = gcd(M0, M1);
  if (a1 % g != 0) return false;
  BigInt L = M0 / g * M1;
  // x = m0 k with m0 k = a1 mod m1.
  BigInt mod = M1 / g, k = 0;
  if (mod > 1) {
    BigInt inv;
    BigInt m0g = (M0 / g) % mod;
    mpz_invert(inv.get_mpz_t(), m0g.get_mpz_t(), mod.get_mpz_t());
    k = (a1 / g) % mod * inv % mod;
  }
  BigInt x0 = M0 * k;
  u64 w = isqrt(4 * p);
  BigInt lo = BigInt(static_cast<unsigned long>(p + 1 - w));
  BigInt hi = BigInt(static_cast<unsigned long>(p + 1 + w));
  BigInt x = x0;
  if (x < lo) x += (lo - x + L - 1) / L * L;
  if (x > lo) x -= (x - lo) / L * L;
  for (; x <= hi; x += L) {
    if (!x.fits_ulong_p()) return false;
    u64 v = x.get_ui();
    if (v != N0 && v != N1) return false;
  }
  return true;
}

}  // namespace

std::optional<FactoredInteger> fast_order(const PrimeField& F, const Curve& E, const Point& P,
                                          const FactoredInteger& N) {
  Factors f = to_factors(N);
  Factors out;
  if (!order_rec(F, E, P, f, 0, f.size(), out)) return std::nullopt;
  return from_factors(out);
}

bool test_curve_order(const PrimeField& F, const Curve& E, const FactoredInteger& N0_in,
                      const FactoredInteger& N1_in, Rng& rng, const Point* first) {
  u64 p = F.modulus();
  u64 N[2] = {N0_in.n.get_ui(), N1_in.n.get_ui()};
  if (p <= 11) {
    u64 n = count_points_naive(F, E);
    return n == N[0] || n == N[1];
  }
  Factors fN[2] = {to_factors(N0_in), to_factors(N1_in)};
  Curve Es[2] = {E, quadratic_twist(F, E)};
  u64 m[2] = {1, 1};
  int s = 0;
  constexpr int kMaxRounds = 200;
  for (int round = 0; round < kMaxRounds; ++round) {
    Point P = (first && round == 0) ? *first : random_point(F, Es[s], rng);
    Point Q = scalar_mul(F, Es[s], m[s], P);
    Factors cof = cofactor(fN[s], m[s]);
    Factors ord;
    if (!order_rec(F, Es[s], Q, cof, 0, cof.size(), ord)) {
      if (N[1] % m[0] == 0 && N[0] % m[1] == 0 && N[0] < N[1]) {
        std::swap(N[0], N[1]);
        std::swap(fN[0], fN[1]);
        continue;
      }
      return false;
    }
    for (auto [q, e] : ord) m[s] *= ipow(q, e);
    if (hasse_subset(p, m[0], m[1], N[0], N[1])) return true;
    s = 1 - s;
  }
  if (p < (1u << 20)) {
    u64 n = count_points_naive(F, E);
    return n == N[0] || n == N[1];
  }
  return false;
}

bool TorsionConstraint::satisfied_by(u64 n) const {
  if (n % m) return false;
  if (two_exact >= 0 && static_cast<int>(valuation(n, 2)) != two_exact) return false;
  if (three_exact >= 0 && static_cast<int>(valuation(n, 3)) != three_exact) return false;
  return true;
}

std::string TorsionConstraint::label() const {
  std::ostringstream os;
  os << m;
  return os.str();
}

namespace {

void validate(const TorsionConstraint& c) {
  static const unsigned kModels[] = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  if (std::find(std::begin(kModels), std::end(kModels), c.model) == std::end(kModels))
    throw std::runtime_error("unsupported torsion model N = " + std::to_string(c.model));
  if (c.b != 1 && c.b != 3) throw std::runtime_error("unsupported 3-part b = " + std::to_string(c.b));
  if (c.b == 3 && c.model % 3 == 0) throw std::runtime_error("3-part already implied by the model");
  unsigned v_model = valuation(c.model, 2);
  unsigned v_a = valuation(c.a, 2);
  if (c.a != (1u << v_a)) throw std::runtime_error("a must be a power of 2");
  if (v_a && v_model + v_a > 2 && c.model != 8)
    throw std::runtime_error("2-part beyond 4-torsion unsupported");
  if (c.two_exact > 1) throw std::runtime_error("exact 2-power above 2 unsupported");
  if (c.three_exact > 0) throw std::runtime_error("exact 3-power above 1 unsupported");
  if (c.m != c.a * c.b * c.model) throw std::runtime_error("m != a * b * N");
}

TorsionConstraint row(unsigned m, const char* a_spec, unsigned b, unsigned N, double benefit,
                      double cost) {
  TorsionConstraint c;
  c.m = m;
  c.model = N;
  c.b = b;
  c.benefit = benefit;
  c.cost = cost;
  std::string a(a_spec);
  if (a.rfind("2^", 0) == 0) {
    int e = std::stoi(a.substr(2));
    c.a = 1u << e;
    c.two_exact = e + static_cast<int>(valuation(N, 2));
  } else {
    c.a = static_cast<unsigned>(std::stoul(a));
  }
  return c;
}

}  // namespace

const std::vector<TorsionConstraint>& default_torsion_table() {
  static const std::vector<TorsionConstraint> table = [] {
    std::vector<TorsionConstraint> t = {
        row(33, "2^0", 3, 11, 80.0, 2.3),  row(11, "2^0", 1, 11, 30.0, 1.2),
        row(66, "2^1", 3, 11, 106.7, 4.3), row(21, "2^0", 3, 7, 48.0, 2.1),
        row(9, "2^0", 1, 9, 19.6, 1.0),    row(7, "2^0", 1, 7, 18.0, 0.9),
        row(132, "4", 3, 11, 64.0, 3.3),   row(22, "2^1", 1, 11, 40.0, 2.5),
        row(5, "2^0", 1, 5, 12.0, 0.9),    row(44, "4", 1, 11, 24.0, 1.8),
        row(10, "2^0", 1, 10, 16.0, 1.5),  row(20, "2", 1, 10, 9.6, 0.9),
        row(3, "2^0", 1, 3, 8.0, 0.9),     row(12, "1", 1, 12, 6.4, 0.7),
        row(6, "2^0", 1, 6, 10.7, 1.4),    row(8, "1", 1, 8, 4.0, 0.7),
        row(2, "2^0", 1, 2, 4.0, 0.9),     row(4, "1", 1, 4, 2.4, 0.6),
        row(1, "2^0", 1, 1, 3.0, 0.8),
    };
    for (const auto& c : t) validate(c);
    return t;
  }();
  return table;
}

std::vector<TorsionConstraint> parse_torsion_table(const std::string& text) {
  std::vector<TorsionConstraint> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    unsigned m, N;
    std::string a, b;
    double benefit, cost;
    if (!(ls >> m)) continue;
    if (!(ls >> a >> b >> N >> benefit >> cost)) throw std::runtime_error("bad torsion row: " + line);
    TorsionConstraint c;
    if (b.rfind("3^", 0) == 0) {
      int e = std::stoi(b.substr(2));
      c = row(m, a.c_str(), e ? 3u : 1u, N, benefit, cost);
      c.three_exact = e + static_cast<int>(valuation(N, 3));
    } else {
      c = row(m, a.c_str(), static_cast<unsigned>(std::stoul(b)), N, benefit, cost);
    }
    validate(c);
    out.push_back(c);
  }
  if (out.empty()) throw std::runtime_error("empty torsion table");
  return out;
}

std::vector<TorsionConstraint> load_torsion_table(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open torsion table " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_torsion_table(ss.str());
}

double adjusted_benefit(const TorsionConstraint& c, u64 p) {
  double r = c.benefit;
  if (c.m % 3 == 0 && p % 3 == 2) r *= 0.75;
  u64 m = c.m;
  for (u64 l = 5; l <= m; l += 2) {
    if (m % l) continue;
    while (m % l == 0) m /= l;
    if (p % l == 1) r *= static_cast<double>(l + 1) / static_cast<double>(l);
  }
  return r;
}

namespace {

struct AInv {
  Fp a1, a2, a3, a4, a6;
};

// Short Weierstrass model of a long Weierstrass curve, and the image of (x, y).
std::pair<Curve, Point> short_form(const PrimeField& F, const AInv& a, Fp x, Fp y) {
  Fp b2 = F.add(F.sqr(a.a1), F.mul(F.from_u64(4), a.a2));
  Fp b4 = F.add(F.dbl(a.a4), F.mul(a.a1, a.a3));
  Fp b6 = F.add(F.sqr(a.a3), F.mul(F.from_u64(4), a.a6));
  Fp c4 = F.sub(F.sqr(b2), F.mul(F.from_u64(24), b4));
  Fp c6 = F.sub(F.mul(F.from_u64(36), F.mul(b2, b4)), F.add(F.mul(F.sqr(b2), b2), F.mul(F.from_u64(216), b6)));
  Curve E{F.neg(F.mul(F.from_u64(27), c4)), F.neg(F.mul(F.from_u64(54), c6))};
  Fp X = F.add(F.mul(F.from_u64(36), x), F.mul(F.from_u64(3), b2));
  Fp Y = F.mul(F.from_u64(108), F.add(F.dbl(y), F.add(F.mul(a.a1, x), a.a3)));
  return {E, Point::affine(X, Y)};
}

std::pair<Curve, Point> tate_form(const PrimeField& F, Fp b, Fp c) {
  AInv a{F.sub(F.one(), c), F.neg(b), F.neg(b), F.zero(), F.zero()};
  return short_form(F, a, F.zero(), F.zero());
}

Fp random_fp(const PrimeField& F, Rng& rng) { return F.from_u64(rng.below(F.modulus())); }

// One attempt at a curve from the X_1(N) family; nothing on a degenerate parameter.
std::optional<std::pair<Curve, Point>> model_curve(const PrimeField& F, unsigned N, Rng& rng) {
  Fp t = random_fp(F, rng);
  Fp one = F.one();
  auto nz = [&](Fp x) { return !F.is_zero(x); };
  switch (N) {
    case 1: {
      Curve E{random_fp(F, rng), random_fp(F, rng)};
      return std::make_pair(E, Point::at_infinity());
    }
    case 2: {
      AInv a{F.zero(), t, F.zero(), random_fp(F, rng), F.zero()};
      return short_form(F, a, F.zero(), F.zero());
    }
    case 3: {
      AInv a{t, F.zero(), random_fp(F, rng), F.zero(), F.zero()};
      return short_form(F, a, F.zero(), F.zero());
    }
    case 4:
      return tate_form(F, t, F.zero());
    case 5:
      return tate_form(F, t, t);
    case 6:
      return tate_form(F, F.add(t, F.sqr(t)), t);
    case 7: {
      Fp t2 = F.sqr(t);
      return tate_form(F, F.sub(F.mul(t2, t), t2), F.sub(t2, t));
    }
    case 8: {
      if (!nz(t)) return std::nullopt;
      Fp b = F.mul(F.sub(F.dbl(t), one), F.sub(t, one));
      return tate_form(F, b, F.div(b, t));
    }
    case 9: {
      Fp c = F.mul(F.sqr(t), F.sub(t, one));
      Fp b = F.mul(c, F.add(F.sub(F.sqr(t), t), one));
      return tate_form(F, b, c);
    }
    case 10: {
      Fp den = F.add(F.sub(F.sqr(t), F.mul(F.from_u64(3), t)), one);
      if (!nz(den)) return std::nullopt;
      Fp num = F.mul(t, F.mul(F.sub(t, one), F.sub(F.dbl(t), one)));
      Fp c = F.neg(F.div(num, den));
      Fp b = F.div(F.mul(num, F.sqr(t)), F.sqr(den));
      return tate_form(F, b, c);
    }
    case 11: {
      // r^2 - r s^3 + 3 r s^2 - 4 r s + s = 0, solved for r.
      Fp s = t;
      Fp s2 = F.sqr(s);
      Fp k = F.sub(F.add(F.neg(F.mul(s2, s)), F.mul(F.from_u64(3), s2)), F.mul(F.from_u64(4), s));
      Fp disc = F.sub(F.sqr(k), F.mul(F.from_u64(4), s));
      auto sq = F.sqrt(disc);
      if (!sq) return std::nullopt;
      Fp root = (rng() & 1) ? *sq : F.neg(*sq);
      Fp r = F.div(F.sub(root, k), F.from_u64(2));
      Fp b = F.mul(F.mul(r, s), F.sub(r, one));
      Fp c = F.mul(s, F.sub(r, one));
      return tate_form(F, b, c);
    }
    case 12: {
      Fp tm1 = F.sub(t, one);
      if (!nz(tm1)) return std::nullopt;
      Fp m = F.div(F.sub(F.mul(F.from_u64(3), t), F.add(F.mul(F.from_u64(3), F.sqr(t)), one)), tm1);
      Fp f = F.div(m, F.neg(tm1));
      Fp d = F.add(m, t);
      Fp c = F.mul(f, F.sub(d, one));
      return tate_form(F, F.mul(c, d), c);
    }
    default:
      throw std::invalid_argument("unsupported torsion model N = " + std::to_string(N));
  }
}

ModPoly cubic_of(const Curve& E, const PrimeField& F) { return ModPoly{E.B, E.A, F.zero(), F.one()}; }

// Whether the 2-torsion point (e, 0) is twice a rational point.
bool halvable(const PrimeField& F, const Curve& E, Fp e) {
  Fp s = F.add(F.mul(F.from_u64(3), F.sqr(e)), E.A);
  auto r = F.sqrt(s);
  if (!r) return false;
  for (Fp x : {F.add(e, *r), F.sub(e, *r)}) {
    if (F.legendre(curve_rhs(F, E, x)) >= 0) return true;
  }
  return false;
}

// 0 if #E is odd, 1 if nu_2(#E) = 1, 2 if 4 | #E. root: a known 2-torsion x.
int two_part_class(const PrimeField& F, const Curve& E, const Fp* root = nullptr) {
  if (root) {
    // x^3 + Ax + B = (x - e)(x^2 + ex + e^2 + A)
    Fp e = *root;
    Fp disc = F.sub(F.neg(F.mul(F.from_u64(3), F.sqr(e))), F.mul(F.from_u64(4), E.A));
    if (F.legendre(disc) >= 0) return 2;
    return halvable(F, E, e) ? 2 : 1;
  }
  ModPoly g = poly_split_part(F, cubic_of(E, F));
  if (g.size() == 1) return 0;
  if (g.size() > 2) return 2;
  return halvable(F, E, F.neg(g[0])) ? 2 : 1;
}

// -4A^3 - 27B^2 is a non-square exactly when the cubic has one root.
bool one_two_torsion_root(const PrimeField& F, const Curve& E) {
  Fp d = F.neg(F.add(F.mul(F.from_u64(4), F.mul(E.A, F.sqr(E.A))), F.mul(F.from_u64(27), F.sqr(E.B))));
  return F.legendre(d) == -1;
}

bool has_three_torsion(const PrimeField& F, const Curve& E) {
  // psi_3 = 3x^4 + 6Ax^2 + 12Bx - A^2
  ModPoly psi{F.neg(F.sqr(E.A)), F.mul(F.from_u64(12), E.B), F.mul(F.from_u64(6), E.A), F.zero(),
              F.from_u64(3)};
  ModPoly g = poly_split_part(F, psi);
  if (g.size() == 1) return false;
  Rng rng(F.modulus(), g.size());
  for (Fp r : split_linear(F, g, rng)) {
    if (F.legendre(curve_rhs(F, E, r)) == 1) return true;
  }
  return false;
}

bool meets_filters(const PrimeField& F, const TorsionConstraint& c, const Curve& E, const Point& T) {
  unsigned v_model = valuation(c.model, 2);
  unsigned v_need = valuation(c.a, 2) + v_model;
  if (c.two_exact >= 0 || v_need > v_model) {
    if (c.two_exact == 0 && one_two_torsion_root(F, E)) return false;
    int cls;
    if (v_model > 0) {
      Point T2 = scalar_mul(F, E, static_cast<u64>(c.model / 2), T);
      cls = (!T2.inf && T2.y.m == 0) ? two_part_class(F, E, &T2.x) : two_part_class(F, E);
    } else {
      cls = two_part_class(F, E);
    }
    if (c.two_exact >= 0 && cls != c.two_exact) return false;
    if (cls < static_cast<int>(std::min(v_need, 2u))) return false;
  }
  if (c.b == 3 || c.three_exact == 0) {
    bool has3 = has_three_torsion(F, E);
    if (c.b == 3 && !has3) return false;
    if (c.three_exact == 0 && has3) return false;
  }
  return true;
}

}  // namespace

TorsionCurve random_curve_with_torsion(const PrimeField& F, const TorsionConstraint& c, Rng& rng) {
  constexpr int kMaxAttempts = 100000;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    auto mc = model_curve(F, c.model, rng);
    if (!mc) continue;
    auto [E, T] = *mc;
    if (F.is_zero(E.A) || F.is_zero(E.B) || !is_nonsingular(F, E)) continue;
    if (!meets_filters(F, c, E, T)) continue;
    return TorsionCurve{E, T};
  }
  throw std::runtime_error("no curve found for torsion constraint " + c.label());
}

TraceSearchResult find_trace_curve(const PrimeField& F, u64 t, const TorsionPlan& plan, Rng& rng,
                                   const TraceSearchOptions& opt) {
  u64 p = F.modulus();
  if (t == 0 || static_cast<u128>(t) * t >= static_cast<u128>(4) * p)
    throw std::invalid_argument("trace out of range");
  u64 N0 = p + 1 - t, N1 = p + 1 + t;
  FactoredInteger f0 = factorize(N0), f1 = factorize(N1);
  std::size_t batch = std::max<std::size_t>(1, opt.batch);

  // (p+1) P = a (tP) + b P
  auto naf_t = naf(t);
  auto naf_a = naf((p + 1) / t);
  auto naf_b = naf((p + 1) % t);
  auto naf_side = naf(plan.side == PlanSide::N1 ? N1 : N0);

  TraceSearchResult res;
  std::vector<Curve> curves(batch);
  std::vector<Point> pts(batch);
  std::vector<Fp> A(batch);
  for (;;) {
    for (std::size_t i = 0; i < batch; ++i) {
      curves[i] = random_curve_with_torsion(F, plan.constraint, rng).E;
      pts[i] = random_point(F, curves[i], rng);
      A[i] = curves[i].A;
    }
    BatchScalar bs(F, A);
    std::vector<bool> pass(batch);
    if (plan.side == PlanSide::Both) {
      auto Y = bs.mul(pts, naf_t);
      auto X = bs.mul2(Y, naf_a, pts, naf_b);
      for (std::size_t i = 0; i < batch; ++i)
        pass[i] = same_point(X[i], Y[i]) || same_point(X[i], ec_neg(F, Y[i]));
    } else {
      auto Z = bs.mul(pts, naf_side);
      for (std::size_t i = 0; i < batch; ++i) pass[i] = Z[i].inf;
    }
    for (std::size_t i = 0; i < batch; ++i) {
      if (!pass[i]) continue;
      ++res.order_tests;
      if (test_curve_order(F, curves[i], f0, f1, rng, &pts[i])) {
        res.curves_tested += i + 1;
        res.E = curves[i];
        res.j = j_invariant(F, curves[i]);
        return res;
      }
    }
    res.curves_tested += batch;
  }
}

Curve curve_from_j(const PrimeField& F, Fp j) {
  if (F.is_zero(j)) return Curve{F.zero(), F.one()};
  Fp c1728 = F.from_u64(1728);
  if (j == c1728) return Curve{F.one(), F.zero()};
  Fp k = F.div(j, F.sub(c1728, j));
  return Curve{F.mul(F.from_u64(3), k), F.dbl(k)};
}

bool in_hasse_interval(u64 p, const BigInt& N) {
  BigInt d = N - BigInt(static_cast<unsigned long>(p)) - 1;
  return d * d <= 4 * BigInt(static_cast<unsigned long>(p));
}

Curve select_twist(const PrimeField& F, const Curve& E, const BigInt& N, Rng& rng) {
  u64 p = F.modulus();
  if (!in_hasse_interval(p, N)) throw std::invalid_argument("order outside the Hasse interval");
  BigInt Nt = 2 * BigInt(static_cast<unsigned long>(p)) + 2 - N;
  if (Nt == N) return E;
  Curve T = quadratic_twist(F, E);
  u64 n = N.get_ui(), nt = Nt.get_ui();
  constexpr int kMaxRounds = 400;
  for (int round = 0; round < kMaxRounds; ++round) {
    // A point on E killed by n but not nt (or the reverse) decides #E.
    Point P = random_point(F, E, rng);
    bool kn = scalar_mul(F, E, n, P).inf, knt = scalar_mul(F, E, nt, P).inf;
    if (kn && !knt) return E;
    if (!kn) return T;
    Point Q = random_point(F, T, rng);
    bool tn = scalar_mul(F, T, nt, Q).inf, tnt = scalar_mul(F, T, n, Q).inf;
    if (tn && !tnt) return E;
    if (!tn) return T;
  }
  return count_points_naive(F, E) == n ? E : T;
}

}  // namespace hcp
