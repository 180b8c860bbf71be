// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]; no arguments runs all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "hcp/pipeline.hpp"
#include "oracle.hpp"

using namespace hcp;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using clk = std::chrono::steady_clock;
double since(clk::time_point t) { return std::chrono::duration<double>(clk::now() - t).count(); }

BigInt posmod(BigInt x, const BigInt& m) {
  mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
  return x;
}

std::vector<BigInt> reduce(const std::vector<mpz_class>& f, const BigInt& P) {
  std::vector<BigInt> r;
  for (const auto& c : f) r.push_back(P == 0 ? BigInt(c) : posmod(c, P));
  return r;
}

const std::vector<mpz_class>& oracle_poly(long D) {
  static std::map<long, std::vector<mpz_class>> cache;
  auto it = cache.find(D);
  if (it == cache.end()) it = cache.emplace(D, oracle::hilbert_poly_complex(D)).first;
  return it->second;
}

// 1. H_D over Z against the complex-analytic oracle for fundamental D.
Outcome criterion1() {
  auto t0 = clk::now();
  int total = 0, ok = 0;
  std::vector<long> bad;
  double ours = 0;
  for (long D = -5; D >= -5000; --D) {
    if (!is_discriminant(D) || disc_info(D).u != 1) continue;
    ++total;
    auto t1 = clk::now();
    JobConfig c;
    c.D = D;
    std::vector<BigInt> got;
    try {
      got = hilbert_class_poly(c).coeffs;
    } catch (const std::exception& e) {
      bad.push_back(D);
      continue;
    }
    ours += since(t1);
    if (got == reduce(oracle_poly(D), 0)) ++ok;
    else bad.push_back(D);
  }
  std::ostringstream os;
  os << ok << "/" << total << " discriminants agree; library time " << ours << " s, total " << since(t0) << " s";
  if (!bad.empty()) {
    os << "; failing D:";
    for (std::size_t i = 0; i < bad.size() && i < 10; ++i) os << " " << bad[i];
  }
  return {ok == total && total > 0, os.str()};
}

// 2. Prime search intervals and S_z for D = -108708.
Outcome criterion2() {
  i64 D = -108708;
  std::ostringstream os;
  bool pass = true;
  mpq_class z0(108708, 200);
  z0.canonicalize();
  auto iv = search_intervals(D, z0);
  bool iv_ok = iv.size() >= 3 && iv[0].lo == 27177 && iv[0].hi == 54354 && iv[1].lo == 108708 &&
               iv[1].hi == 163062 && iv[2].lo > iv[2].hi;
  pass &= iv_ok;
  os << "intervals " << (iv_ok ? "ok" : "wrong");
  auto sz = enumerate_sz(D, mpq_class(543));
  std::map<u64, int> by_v;
  for (const auto& c : sz) ++by_v[c.v];
  pass &= by_v[1] == 17 && by_v[2] == 24 && by_v.count(3) == 0 && by_v.size() == 2;
  os << "; z=543: v=1 " << by_v[1] << ", v=2 " << by_v[2] << ", v=3 " << by_v.count(3);
  auto s = enumerate_sz(D, mpq_class(1831));
  u64 maxp = 0, maxv = 0;
  for (const auto& c : s)
    if (c.p > maxp) {
      maxp = c.p;
      maxv = c.v;
    }
  pass &= s.size() == 598 && maxp == 5121289 && maxv == 12;
  os << "; z=1831: #S_z " << s.size() << ", max p " << maxp << " (v=" << maxv << ")";
  return {pass, os.str()};
}

std::string presentation_string(const PolycyclicPresentation& p) {
  std::ostringstream os;
  for (std::size_t i = 0; i < p.norms.size(); ++i) os << (i ? " " : "") << p.norms[i] << "^" << p.rel_orders[i];
  return os.str();
}

// 3. Presentation from norm-ordered generators for D1 = -10007 * 10009 * 10037.
Outcome criterion3() {
  i64 D = -i64{10007} * 10009 * 10037;
  u64 h = class_number(D);
  auto pres = polycyclic_presentation(D, default_candidates(D));
  bool pass = h == 176116 && pres.norms == std::vector<u64>{5, 37} && pres.rel_orders == std::vector<u64>{88058, 2};
  std::ostringstream os;
  os << "D " << D << " h " << h << " presentation " << presentation_string(pres);
  return {pass, os.str()};
}

// 4. Class numbers, presentations and height bounds for two larger D.
Outcome criterion4() {
  struct Row {
    i64 D;
    u64 h;
    std::vector<u64> norms, orders;
    long b;
  };
  std::vector<Row> rows = {{-13569850003, 20203, {7}, {20203}, 2272566},
                           {-11039933587, 11280, {17, 19}, {1128, 10}, 1359136}};
  bool pass = true;
  std::ostringstream os;
  for (const auto& r : rows) {
    auto pres = polycyclic_presentation(r.D, default_candidates(r.D));
    auto hb = height_bound(r.D);
    bool ok = hb.h == r.h && pres.norms == r.norms && pres.rel_orders == r.orders &&
              std::labs(static_cast<long>(hb.b) - r.b) <= 10;
    pass &= ok;
    os << "D " << r.D << ": h " << hb.h << ", " << presentation_string(pres) << ", b " << hb.b << "; ";
  }
  return {pass, os.str()};
}

// 5. H_D mod a 256-bit prime for D = -116799691.
Outcome criterion5() {
  i64 D = -116799691;
  BigInt P;
  BigInt base = BigInt(1) << 255;
  mpz_nextprime(P.get_mpz_t(), base.get_mpz_t());
  std::ostringstream os;
  bool pass = true;
  std::vector<HilbertResult> runs;
  std::set<u64> used;
  struct Run {
    u64 seed;
    unsigned jobs;
  };
  for (Run r : {Run{0, 1}, Run{7, 4}, Run{123, 16}}) {
    auto t0 = clk::now();
    JobConfig c;
    c.D = D;
    c.P = P;
    c.seed = r.seed;
    c.jobs = r.jobs;
    runs.push_back(hilbert_class_poly(c));
    for (const auto& cp : runs.back().primes) used.insert(cp.p);
    os << "seed " << r.seed << " jobs " << r.jobs << ": " << since(t0) << " s; ";
  }
  pass &= runs[0].h == 2112;
  bool same = runs[1].coeffs == runs[0].coeffs && runs[2].coeffs == runs[0].coeffs;
  pass &= same;
  os << "h " << runs[0].h << ", primes " << runs[0].primes.size() << ", runs " << (same ? "identical" : "differ");

  // Coefficients over Z, for splitting at a prime no run used.
  auto t0 = clk::now();
  JobConfig cz;
  cz.D = D;
  cz.seed = 99;
  HilbertResult Z = hilbert_class_poly(cz);
  for (const auto& cp : Z.primes) used.insert(cp.p);
  std::vector<BigInt> zmodP;
  for (const auto& c : Z.coeffs) zmodP.push_back(posmod(c, P));
  bool zmatch = zmodP == runs[0].coeffs;
  pass &= zmatch;
  os << "; over Z " << since(t0) << " s, reduces to the same result: " << (zmatch ? "yes" : "no");

  u64 held = 0;
  for (const auto& cp : enumerate_sz(D, select_primes(D, Z.b).z * 2))
    if (!used.count(cp.p) && cp.p > 47) {
      held = cp.p;
      break;
    }
  if (!held) return {false, os.str() + "; no held-out prime"};
  PrimeField F(held);
  ModPoly f;
  for (const auto& c : Z.coeffs) f.push_back(F.from_big(c));
  poly_trim(f);
  auto rs = roots(F, f);
  bool distinct = std::all_of(rs.begin(), rs.end(), [](const auto& r) { return r.multiplicity == 1; });
  pass &= rs.size() == 2112 && distinct;
  os << "; held-out p " << held << ": " << rs.size() << " roots" << (distinct ? ", distinct" : ", repeated");
  return {pass, os.str()};
}

std::vector<u64> random_primes(Rng& rng, std::size_t n, int bits) {
  std::vector<u64> ps;
  while (ps.size() < n) {
    u64 p = (rng() >> (64 - bits)) | (u64{1} << (bits - 1)) | 1;
    if (is_prime(p) && std::find(ps.begin(), ps.end(), p) == ps.end()) ps.push_back(p);
  }
  return ps;
}

BigInt random_big(Rng& rng, int bits) {
  BigInt x = 0;
  for (int b = 0; b < bits; b += 64) {
    x <<= 64;
    x += BigInt(static_cast<unsigned long>(rng()));
  }
  return x >> (((bits + 63) / 64) * 64 - bits);
}

// 6. Online explicit CRT against CRT over Z then reduction.
Outcome criterion6() {
  Rng rng(6);
  int bad = 0;
  const int N = 10000;
  for (int it = 0; it < N; ++it) {
    std::size_t n = 1 + rng.below(32);
    int bits = 14 + static_cast<int>(rng.below(49));
    auto ps = random_primes(rng, n, bits);
    BigInt M = 1;
    for (u64 p : ps) M *= BigInt(static_cast<unsigned long>(p));
    BigInt B = (M - 1) / 4;
    BigInt P = 1 + random_big(rng, 1 + static_cast<int>(rng.below(512)));
    BigInt c = B > 0 ? BigInt(random_big(rng, static_cast<int>(lg(M)) + 1) % (2 * B + 1) - B) : BigInt(0);
    std::vector<u64> res;
    for (u64 p : ps) res.push_back(posmod(c, BigInt(static_cast<unsigned long>(p))).get_ui());
    // reference: Garner over Z, centered, then mod P
    BigInt x = 0, m = 1, t, inv;
    for (std::size_t i = 0; i < n; ++i) {
      BigInt pi(static_cast<unsigned long>(ps[i]));
      t = BigInt(static_cast<unsigned long>(res[i])) - x;
      mpz_invert(inv.get_mpz_t(), m.get_mpz_t(), pi.get_mpz_t());
      t = posmod(t * inv, pi);
      x += m * t;
      m *= pi;
    }
    if (2 * x > m) x -= m;
    CrtState st = crt_init(ps, P, 1, 0.5);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) crt_update(st, i, std::vector<u64>{res[i]});
    if (crt_finalize(st)[0] != posmod(x, P) || x != c) ++bad;
  }
  return {bad == 0, std::to_string(N - bad) + "/" + std::to_string(N) + " instances agree"};
}

long val(const PrimeField& F, Fp a) { return static_cast<long>(F.to_u64(a)); }

// 7. Order testing against point counting, and torsion-constrained curves.
Outcome criterion7() {
  Rng rng(7);
  u64 checks = 0, bad = 0;
  for (u64 p : primes_up_to(299)) {
    if (p < 5) continue;
    PrimeField F(p);
    for (u64 a = 0; a < p; ++a)
      for (u64 b = 0; b < p; ++b) {
        Curve E{F.from_u64(a), F.from_u64(b)};
        if (!is_nonsingular(F, E)) continue;
        long n = oracle::count_points(static_cast<long>(a), static_cast<long>(b), static_cast<long>(p));
        for (u64 t = 1; t * t <= 4 * p; ++t) {
          bool want = n == static_cast<long>(p + 1 - t) || n == static_cast<long>(p + 1 + t);
          ++checks;
          if (test_curve_order(F, E, factorize(p + 1 - t), factorize(p + 1 + t), rng) != want) ++bad;
        }
      }
  }
  u64 samples = 0, tbad = 0;
  std::set<unsigned> models;
  for (const auto& c : default_torsion_table()) {
    models.insert(c.model);
    for (int i = 0; i < 1000; ++i) {
      u64 p = std::vector<u64>{1009, 1013, 1019, 1021, 1031, 1033}[i % 6];
      PrimeField F(p);
      auto tc = random_curve_with_torsion(F, c, rng);
      long n = oracle::count_points(val(F, tc.E.A), val(F, tc.E.B), static_cast<long>(p));
      ++samples;
      bool ok = c.satisfied_by(static_cast<u64>(n)) && n % c.model == 0;
      if (c.model > 1)
        ok &= oracle::point_order(val(F, tc.E.A), val(F, tc.E.B), static_cast<long>(p), val(F, tc.T.x),
                                  val(F, tc.T.y)) == c.model;
      if (!ok) ++tbad;
    }
  }
  std::ostringstream os;
  os << checks - bad << "/" << checks << " order tests agree; " << samples - tbad << "/" << samples
     << " torsion samples over " << models.size() << " models";
  return {bad == 0 && tbad == 0, os.str()};
}

std::pair<long, long> split_disc(long p, long t) {
  long disc = t * t - 4 * p, w = 1;
  for (long f = 2; f * f <= -disc; ++f) {
    if (disc % (f * f)) continue;
    long r = oracle::pmod(disc / (f * f), 4);
    if (r == 0 || r == 1) w = f;
  }
  return {disc / (w * w), w};
}

// 8. Volcano shape and level moves on brute-forced isogeny graphs.
Outcome criterion8() {
  struct Inst {
    long p, t, l;
  };
  std::vector<Inst> insts;
  std::map<std::pair<long, long>, int> want{{{2, 1}, 4}, {{2, 2}, 3}, {{2, 3}, 1}, {{3, 1}, 4},
                                            {{3, 2}, 1}, {{5, 1}, 2}, {{7, 1}, 1}, {{2, 0}, 1},
                                            {{3, 0}, 1}, {{5, 0}, 1}, {{11, 0}, 1}};
  for (long p : {101L, 211L, 331L, 457L, 587L, 701L, 853L, 997L, 1201L, 1499L, 1801L, 1999L}) {
    for (long t = 1; t * t < 4 * p; ++t) {
      auto [dk, w] = split_disc(p, t);
      if (dk == -3 || dk == -4) continue;
      for (auto& [key, left] : want) {
        if (left == 0) continue;
        long l = key.first, d = 0;
        for (long x = w; x % l == 0; x /= l) ++d;
        if (d != key.second) continue;
        insts.push_back({p, t, l});
        --left;
        break;
      }
    }
  }
  std::map<long, oracle::PhiTable> phis;
  std::map<long, std::vector<long>> traces;
  Rng rng(8);
  int bad = 0;
  std::string first;
  for (const auto& in : insts) {
    if (!phis.count(in.l)) phis.emplace(in.l, oracle::load_phi(HCP_PHI_DB, in.l));
    if (!traces.count(in.p)) traces.emplace(in.p, oracle::trace_table(in.p));
    auto g = oracle::isogeny_graph(phis.at(in.l), in.p, in.t, traces.at(in.p));
    std::ostringstream where;
    where << "p=" << in.p << " t=" << in.t << " l=" << in.l;
    bool ok = oracle::volcano_shape_error(g).empty();
    PrimeField F(static_cast<u64>(in.p));
    auto [dk, w] = split_disc(in.p, in.t);
    VolcanoContext ctx(F, ModPolyDb::builtin(), dk, static_cast<u64>(in.t), static_cast<u64>(w), rng);
    ok &= ctx.depth(static_cast<u64>(in.l)) == g.depth;
    u64 l = static_cast<u64>(in.l);
    for (long j : g.verts) {
      Fp x = F.from_u64(static_cast<u64>(j));
      auto lev = static_cast<unsigned>(g.level.at(j));
      if (find_level(ctx, x, l) != lev) {
        ok = false;
        continue;
      }
      const auto& adj = g.adj.at(j);
      if (lev < g.depth) {
        long y = static_cast<long>(F.to_u64(descend(ctx, x, l, lev)));
        if (lev > 0 && std::count(adj.begin(), adj.end(), y) != 1) ok = false;
        if (!oracle::connected(g, j, y) || g.level.at(y) != lev + 1) ok = false;
      }
      if (lev > 0) {
        long y = static_cast<long>(F.to_u64(ascend(ctx, x, l, lev)));
        if (std::count(adj.begin(), adj.end(), y) != 1 || g.level.at(y) != lev - 1) ok = false;
      }
    }
    if (!ok) {
      ++bad;
      if (first.empty()) first = where.str();
    }
  }
  std::ostringstream os;
  os << insts.size() - bad << "/" << insts.size() << " instances agree";
  if (!first.empty()) os << "; first failure " << first;
  return {bad == 0 && insts.size() >= 20, os.str()};
}

mpq_class hurwitz_bruteforce(long D0, long n) {
  mpq_class total = 0;
  for (long d = 1; d <= n; ++d) {
    if (n % d) continue;
    long Dd = d * d * D0;
    long h = static_cast<long>(oracle::reduced_forms_scan(Dd).size());
    int w = Dd == -3 ? 6 : (Dd == -4 ? 4 : 2);
    total += mpq_class(2 * h, w);
  }
  total.canonicalize();
  return total;
}

// 9. Hurwitz numbers, the ratio sandwich and the coefficient bound.
Outcome criterion9() {
  u64 hn = 0, hbad = 0;
  for (long D = -3; D >= -20000; --D) {
    if (!is_discriminant(D)) continue;
    auto info = disc_info(D);
    for (long v = 1; v * v * -D <= 20000; ++v) {
      ++hn;
      if (hurwitz_number(D, static_cast<u64>(v)) != hurwitz_bruteforce(info.D0, static_cast<long>(info.u) * v)) ++hbad;
    }
  }
  Rng rng(9);
  int sn = 0, sbad = 0;
  while (sn < 2000) {
    i64 D = -static_cast<i64>(3 + rng.below(1000000));
    if (!is_discriminant(D)) continue;
    ++sn;
    u64 v = 1 + rng.below(5000);
    HurwitzTable H(D);
    double ratio = H.approx(v) / (static_cast<double>(v) * H.approx(1));
    double ll = std::log(std::log(static_cast<double>(v) + 4));
    if (ratio < 1 - 1e-12 || ratio > 11 * ll * ll) ++sbad;
  }
  int bn = 0, bbad = 0;
  for (long D = -3; D >= -5000; --D) {
    if (!is_discriminant(D)) continue;
    ++bn;
    auto b = height_bound(D);
    for (const auto& c : oracle_poly(D))
      if (c != 0 && lg(BigInt(abs(c))) > b.lgB) {
        ++bbad;
        break;
      }
  }
  std::ostringstream os;
  os << "Hurwitz " << hn - hbad << "/" << hn << "; sandwich " << sn - sbad << "/" << sn << "; bound " << bn - bbad
     << "/" << bn;
  return {hbad == 0 && sbad == 0 && bbad == 0, os.str()};
}

// 10. Mean number of curves order-tested for D = -108708 at p = 4382713.
Outcome criterion10() {
  u64 p = 4382713, t = 1370;
  Selection sel = select_primes(-108708, height_bound(-108708).b);
  const CrtPrime* cp = nullptr;
  for (const auto& c : sel.primes)
    if (c.p == p) cp = &c;
  TorsionPlan plan = cp ? cp->plan : rank_torsion(p, t);
  PrimeField F(p);
  const int runs = 100;
  double total = 0;
  for (int s = 0; s < runs; ++s) {
    Rng rng(static_cast<u64>(s), p);
    total += static_cast<double>(find_trace_curve(F, t, plan, rng).curves_tested);
  }
  double mean = total / runs;
  std::ostringstream os;
  os << "plan " << plan.constraint.label() << ", mean " << mean << " curves over " << runs << " runs";
  return {mean <= 80, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::function<Outcome()>> all = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                               criterion6, criterion7, criterion8, criterion9, criterion10};
  std::vector<int> which;
  for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 10; ++i) which.push_back(i);
  bool ok = true;
  for (int k : which) {
    if (k < 1 || k > 10) continue;
    auto t0 = clk::now();
    Outcome o;
    try {
      o = all[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ok &= o.pass;
    std::cout << "criterion " << k << ": " << (o.pass ? "PASS" : "FAIL") << " (" << since(t0) << " s) " << o.detail
              << std::endl;
  }
  return ok ? 0 : 1;
}
