#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "hcp/curves.hpp"
#include "hcp/volcano.hpp"
#include "oracle.hpp"

using namespace hcp;

namespace {

const ModPolyDb& db() { return ModPolyDb::builtin(); }

const oracle::PhiTable& phi_table(long l) {
  static std::map<long, oracle::PhiTable> cache;
  auto it = cache.find(l);
  if (it == cache.end()) it = cache.emplace(l, oracle::load_phi(HCP_PHI_DB, l)).first;
  return it->second;
}

const std::vector<long>& traces(long p) {
  static std::map<long, std::vector<long>> cache;
  auto it = cache.find(p);
  if (it == cache.end()) it = cache.emplace(p, oracle::trace_table(p)).first;
  return it->second;
}

std::set<long> as_set(const PrimeField& F, const std::vector<Fp>& xs) {
  std::set<long> s;
  for (Fp x : xs) s.insert(static_cast<long>(F.to_u64(x)));
  return s;
}

// Fundamental discriminant D_K and conductor w of t^2 - 4p.
std::pair<long, long> split_disc(long p, long t) {
  long disc = t * t - 4 * p, w = 1;
  for (long f = 2; f * f <= -disc; ++f) {
    if (disc % (f * f)) continue;
    long r = oracle::pmod(disc / (f * f), 4);
    if (r == 0 || r == 1) w = f;
  }
  return {disc / (w * w), w};
}

PolycyclicPresentation manual_presentation(i64 D, std::vector<u64> norms, std::vector<u64> orders) {
  PolycyclicPresentation pr;
  pr.D = D;
  pr.norms = std::move(norms);
  pr.rel_orders = std::move(orders);
  pr.h = 1;
  for (u64 r : pr.rel_orders) pr.h *= r;
  return pr;
}

}  // namespace

TEST_CASE("modular polynomial database") {
  const auto& d = db();
  std::vector<u64> want;
  for (u64 l : primes_up_to(47)) want.push_back(l);
  CHECK(d.levels() == want);
  CHECK(d.coeff(2, 0, 0) == BigInt("-157464000000000"));
  CHECK(d.coeff(2, 1, 1) == 40773375);
  CHECK(d.coeff(2, 3, 0) == 1);
  CHECK(d.coeff(2, 2, 2) == -1);
  for (u64 l : d.levels()) {
    CHECK(d.kronecker_congruence(l));
    CHECK(d.coeff(l, static_cast<unsigned>(l + 1), 1) == 0);
    CHECK(d.coeff(l, 3, 1) == d.coeff(l, 1, 3));
  }

  // A perturbed coefficient breaks the congruence.
  std::ostringstream txt;
  txt << "3 4 0 1\n3 3 3 -1\n3 1 1 1\n";
  std::istringstream bad(txt.str());
  CHECK_THROWS_AS(ModPolyDb::parse(bad), std::runtime_error);
  std::istringstream broken("2 0\n");
  CHECK_THROWS_AS(ModPolyDb::parse(broken), std::runtime_error);
}

TEST_CASE("Phi_l(j(tau), j(l tau)) vanishes numerically") {
  for (long l : {2L, 3L, 5L, 7L, 11L, 13L, 17L, 19L, 23L, 29L, 31L, 37L, 41L, 43L, 47L}) {
    for (auto tau : {std::pair{0.13, 1.07}, std::pair{-0.41, 0.93}}) {
      double r = oracle::phi_log2_residual(phi_table(l), tau.first, tau.second);
      INFO("l=" << l << " residual=" << r);
      CHECK(r < -150);
    }
  }
}

TEST_CASE("phi_instantiate degree and values") {
  Rng rng(2);
  PrimeField F(1000003);
  VolcanoContext ctx(F, db(), 1000 * 1000 - 4 * 1000003, 1000, 1, rng);
  for (u64 l : {2, 3, 5, 13, 47}) {
    Fp j = F.from_u64(rng.below(1000003));
    auto f = phi_instantiate(ctx, l, j);
    CHECK(poly_degree(f) == static_cast<long>(l + 1));
    Fp x = F.from_u64(rng.below(1000003));
    long want = oracle::phi_eval(phi_table(static_cast<long>(l)), static_cast<long>(F.to_u64(x)),
                                 static_cast<long>(F.to_u64(j)), 1000003);
    CHECK(static_cast<long>(F.to_u64(poly_eval(F, f, x))) == want);
  }
  CHECK_THROWS_AS(phi_instantiate(ctx, 53, F.one()), std::runtime_error);
}

TEST_CASE("neighbors, levels and surface paths at p = 107, D = -71") {
  // t = 12, t^2 - 4p = -284 = 2^2 * -71.
  const long p = 107, t = 12;
  PrimeField F(p);
  Rng rng(7);
  VolcanoContext ctx(F, db(), -71, t, 2, rng);
  CHECK(ctx.depth(2) == 1);
  CHECK(ctx.depth(3) == 0);
  auto g2 = oracle::isogeny_graph(phi_table(2), p, t, traces(p));
  auto g3 = oracle::isogeny_graph(phi_table(3), p, t, traces(p));
  CHECK(oracle::volcano_shape_error(g2).empty());
  CHECK(oracle::volcano_shape_error(g3).empty());
  auto H = oracle::hilbert_poly_complex(-71);
  auto surf = oracle::roots_mod(H, p);
  REQUIRE(surf.size() == 7);
  CHECK(g2.verts.size() == 14);

  for (long j : g2.verts) {
    Fp x = F.from_u64(static_cast<u64>(j));
    long lev = g2.level.at(j);
    bool in_surf = std::count(surf.begin(), surf.end(), j) > 0;
    CHECK(in_surf == (lev == 0));
    CHECK(find_level(ctx, x, 2) == static_cast<unsigned>(lev));
    auto nb = neighbors(ctx, x, 2);
    if (lev == 1) {
      REQUIRE(nb.size() == 1);
      CHECK(neighbors(ctx, x, 2, nb[0]).empty());
      CHECK(ascend(ctx, x, 2, 1) == nb[0]);
      CHECK_THROWS_AS(descend(ctx, x, 2, 1), std::invalid_argument);
    } else {
      CHECK(nb.size() == 3);
      Fp y = descend(ctx, x, 2, 0);
      CHECK(g2.level.at(static_cast<long>(F.to_u64(y))) == 1);
      CHECK(g2.level.at(static_cast<long>(F.to_u64(ascend(ctx, y, 2, 1)))) == 0);
      CHECK_THROWS_AS(ascend(ctx, x, 2, 0), std::invalid_argument);
    }
    // Depth 0 at l = 3: two neighbors on each 7-cycle.
    CHECK(find_level(ctx, x, 3) == 0);
    CHECK(neighbors(ctx, x, 3).size() == 2);
  }

  Fp j0 = F.from_u64(static_cast<u64>(surf[0]));
  for (u64 l : {3u, 2u}) {
    for (int rep = 0; rep < 20; ++rep) {
      auto path = walk_surface_path(ctx, l, j0, 6);
      REQUIRE(path.size() == 7);
      auto s = as_set(F, path);
      CHECK(s.size() == 7);
      CHECK(s == std::set<long>(surf.begin(), surf.end()));
      for (std::size_t i = 0; i + 1 < path.size(); ++i)
        CHECK(F.is_zero(ctx.phi(l).eval(F, path[i], path[i + 1])));
      if (l == 3) {
        auto back = neighbors(ctx, path[6], 3, path[5]);
        REQUIRE(back.size() == 1);
        CHECK(back[0] == j0);
      }
    }
  }

  // Level adjustment moves the floor vertex to its surface parent.
  for (long j : g2.verts) {
    Fp x = F.from_u64(static_cast<u64>(j));
    auto a = adjust_to_order(ctx, x);
    REQUIRE(a);
    long got = static_cast<long>(F.to_u64(*a));
    CHECK(std::count(surf.begin(), surf.end(), got) == 1);
    if (g2.level.at(j) == 0) CHECK(got == j);
    else CHECK(got == g2.adj.at(j)[0]);
  }
}

TEST_CASE("adjust_to_order is the identity when w = 1") {
  // 4 * 191 = 27^2 + 35.
  const long p = 191, t = 27;
  PrimeField F(p);
  Rng rng(1);
  VolcanoContext ctx(F, db(), -35, t, 1, rng);
  int n = 0;
  for (long j = 0; j < p; ++j) {
    if (traces(p)[static_cast<std::size_t>(j)] != t) continue;
    auto a = adjust_to_order(ctx, F.from_u64(static_cast<u64>(j)));
    REQUIRE(a);
    CHECK(static_cast<long>(F.to_u64(*a)) == j);
    ++n;
  }
  CHECK(n == 2);
}

TEST_CASE("surface walks with two surface vertices") {
  // D = -20: cl(-20) has order 2 and the forms above 2 and 3 have order 2.
  auto H = oracle::hilbert_poly_complex(-20);
  struct Case {
    long p, t;
    u64 v, l;
  };
  // 4*41 = 12^2 + 20 (d = 0 at l = 3); 4*29 = 6^2 + 20*4 (d = 1 at l = 2).
  for (Case c : {Case{41, 12, 1, 3}, Case{29, 6, 2, 2}}) {
    PrimeField F(static_cast<u64>(c.p));
    Rng rng(5);
    VolcanoContext ctx(F, db(), -20, static_cast<u64>(c.t), c.v, rng);
    auto r = oracle::roots_mod(H, c.p);
    REQUIRE(r.size() == 2);
    for (int rep = 0; rep < 10; ++rep) {
      auto path = walk_surface_path(ctx, c.l, F.from_u64(static_cast<u64>(r[0])), 1);
      REQUIRE(path.size() == 2);
      CHECK(static_cast<long>(F.to_u64(path[1])) == r[1]);
    }
  }
}

TEST_CASE("walk_surface_path examined vertices against the expectation") {
  // Depth-1 2-volcano at p = 107 (#V0 = 7) and at p = 29, D = -20 (#V0 = 2).
  {
    PrimeField F(107);
    Rng rng(11);
    VolcanoContext ctx(F, db(), -71, 12, 2, rng);
    auto surf = oracle::roots_mod(oracle::hilbert_poly_complex(-71), 107);
    const int runs = 1000;
    const unsigned n = 6;
    ctx.examined = 0;
    for (int i = 0; i < runs; ++i)
      walk_surface_path(ctx, 2, F.from_u64(static_cast<u64>(surf[rng.below(surf.size())])), n);
    double mean = static_cast<double>(ctx.examined) / runs;
    double bound = 1 + surface_step_cost(2, 1, SurfaceSize::Many) * n;
    MESSAGE("#V0 = 7: mean examined " << mean << ", bound " << bound);
    CHECK(mean <= 2 * bound);
    CHECK(mean >= n);
  }
  {
    PrimeField F(29);
    Rng rng(12);
    VolcanoContext ctx(F, db(), -20, 6, 2, rng);
    auto surf = oracle::roots_mod(oracle::hilbert_poly_complex(-20), 29);
    const int runs = 2000;
    ctx.examined = 0;
    for (int i = 0; i < runs; ++i) walk_surface_path(ctx, 2, F.from_u64(static_cast<u64>(surf[i % 2])), 1);
    double mean = static_cast<double>(ctx.examined) / runs;
    double expect = surface_step_cost(2, 1, SurfaceSize::Two);
    MESSAGE("#V0 = 2: mean examined " << mean << ", expectation " << expect);
    CHECK(expect == 3.0);
    CHECK(mean == doctest::Approx(expect).epsilon(0.1));
  }
}

TEST_CASE("surface_step_cost") {
  CHECK(surface_step_cost(7, 0, SurfaceSize::Many) == 1);
  CHECK(surface_step_cost(7, 0, SurfaceSize::Two) == 1);
  CHECK(surface_step_cost(2, 1, SurfaceSize::Two) == 3);
  CHECK(surface_step_cost(3, 2, SurfaceSize::Many) == 3);
}

TEST_CASE("volcano structure and level moves on brute-forced instances") {
  struct Inst {
    long p, t, l;
  };
  std::vector<Inst> insts;
  // Scan primes for (t, l) with assorted depths, avoiding D_K in {-3, -4}.
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
  REQUIRE(insts.size() >= 20);
  Rng rng(21);
  for (const auto& in : insts) {
    auto g = oracle::isogeny_graph(phi_table(in.l), in.p, in.t, traces(in.p));
    INFO("p=" << in.p << " t=" << in.t << " l=" << in.l << " depth=" << g.depth);
    CHECK(oracle::volcano_shape_error(g) == "");
    PrimeField F(static_cast<u64>(in.p));
    auto [dk, w] = split_disc(in.p, in.t);
    VolcanoContext ctx(F, db(), dk, static_cast<u64>(in.t), static_cast<u64>(w), rng);
    CHECK(ctx.depth(static_cast<u64>(in.l)) == g.depth);
    u64 l = static_cast<u64>(in.l);
    for (long j : g.verts) {
      Fp x = F.from_u64(static_cast<u64>(j));
      auto lev = static_cast<unsigned>(g.level.at(j));
      REQUIRE(find_level(ctx, x, l) == lev);
      const auto& adj = g.adj.at(j);
      if (lev < g.depth) {
        // From the surface the result is on level 1 of the same volcano,
        // not necessarily adjacent to j.
        long y = static_cast<long>(F.to_u64(descend(ctx, x, l, lev)));
        if (lev > 0) CHECK(std::count(adj.begin(), adj.end(), y) == 1);
        CHECK(oracle::connected(g, j, y));
        CHECK(g.level.at(y) == lev + 1);
      }
      if (lev > 0) {
        long y = static_cast<long>(F.to_u64(ascend(ctx, x, l, lev)));
        CHECK(std::count(adj.begin(), adj.end(), y) == 1);
        CHECK(g.level.at(y) == lev - 1);
      }
    }
  }
}

TEST_CASE("enumerate_ring_class small cases") {
  {
    // h = 1: H_{-7} = X + 3375, 4 * 23 = 8^2 + 7 * 2^2.
    PrimeField F(23);
    Rng rng(3);
    VolcanoContext ctx(F, db(), -7, 8, 2, rng);
    PolycyclicPresentation pr = manual_presentation(-7, {}, {});
    auto out = enumerate_ring_class(ctx, F.from_u64(6), pr);
    REQUIRE(out.size() == 1);
    CHECK(F.to_u64(out[0]) == 6);
  }
  {
    PrimeField F(107);
    Rng rng(4);
    VolcanoContext ctx(F, db(), -71, 12, 2, rng);
    auto H = oracle::hilbert_poly_complex(-71);
    auto r = oracle::roots_mod(H, 107);
    for (const auto& pr : {manual_presentation(-71, {3}, {7}), manual_presentation(-71, {2}, {7}),
                           polycyclic_presentation(-71, default_candidates(-71))}) {
      auto out = enumerate_ring_class(ctx, F.from_u64(static_cast<u64>(r[3])), pr);
      CHECK(out.size() == 7);
      CHECK(as_set(F, out) == std::set<long>(r.begin(), r.end()));
      auto poly = product_from_roots(F, out);
      REQUIRE(poly.size() == H.size());
      for (std::size_t i = 0; i < H.size(); ++i) {
        mpz_class c;
        mpz_fdiv_r_ui(c.get_mpz_t(), H[i].get_mpz_t(), 107);
        CHECK(F.to_u64(poly[i]) == c.get_ui());
      }
    }
  }
}

TEST_CASE("Ell_O enumeration matches the oracle for small p") {
  // Fundamental and non-fundamental D, cyclic and non-cyclic class groups.
  Rng rng(31);
  int cases = 0;
  for (i64 D : {-71L, -84L, -191L, -260L, -420L, -284L, -207L, -135L, -775L, -1155L}) {
    auto H = oracle::hilbert_poly_complex(static_cast<long>(D));
    auto pres = polycyclic_presentation(D, default_candidates(D));
    std::size_t taken = 0;
    std::set<u64> seen_v;
    for (u64 v = 1; v <= 6 && taken < 3; ++v) {
      for (u64 t = 1; taken < 3; ++t) {
        BigInt n4 = BigInt(static_cast<unsigned long>(t * t)) + BigInt(static_cast<unsigned long>(v * v)) * -D;
        if (n4 % 4 != 0) continue;
        BigInt pb = n4 / 4;
        if (pb >= 2000) break;
        u64 p = pb.get_ui();
        if (p <= 47 || !is_prime(p) || seen_v.count(v)) continue;
        seen_v.insert(v);
        ++taken;
        ++cases;
        INFO("D=" << D << " p=" << p << " t=" << t << " v=" << v);
        PrimeField F(p);
        VolcanoContext ctx(F, db(), D, t, v, rng);
        auto want = oracle::roots_mod(H, static_cast<long>(p));
        REQUIRE(want.size() == pres.h);
        // Start from a random vertex of Ell_t.
        const auto& tr = traces(static_cast<long>(p));
        std::vector<long> ell_t;
        for (long j = 0; j < static_cast<long>(p); ++j)
          if (tr[static_cast<std::size_t>(j)] == static_cast<long>(t)) ell_t.push_back(j);
        for (int rep = 0; rep < 3; ++rep) {
          Fp j = F.from_u64(static_cast<u64>(ell_t[rng.below(ell_t.size())]));
          auto j0 = adjust_to_order(ctx, j);
          REQUIRE(j0);
          long j0v = static_cast<long>(F.to_u64(*j0));
          REQUIRE(std::count(want.begin(), want.end(), j0v) == 1);
          auto out = enumerate_ring_class(ctx, *j0, pres);
          CHECK(out.size() == pres.h);
          CHECK(as_set(F, out) == std::set<long>(want.begin(), want.end()));
        }
      }
    }
  }
  CHECK(cases >= 15);
}

TEST_CASE("enumeration output independent of the random walk") {
  i64 D = -420;
  auto pres = polycyclic_presentation(D, default_candidates(D));
  CHECK(pres.norms.size() >= 2);
  PrimeField F(109);  // 4 * 109 = 4^2 + 420
  ModPoly first;
  auto r = oracle::roots_mod(oracle::hilbert_poly_complex(D), 109);
  for (u64 seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    VolcanoContext ctx(F, db(), D, 4, 1, rng);
    auto out = enumerate_ring_class(ctx, F.from_u64(static_cast<u64>(r[seed % r.size()])), pres);
    auto poly = product_from_roots(F, out);
    if (seed == 0) first = poly;
    CHECK(poly == first);
  }
}
