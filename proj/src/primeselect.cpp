#include "hcp/primeselect.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hcp/classgroup.hpp"

namespace hcp {

namespace {

constexpr u64 kSieveBound = 2000;

// Cutoff from the Hurwitz ratio bound: no v beyond this point can give an interval.
bool past_cutoff(u64 v, double rhs) {
  double ll = std::log(std::log(static_cast<double>(v) + 4));
  return static_cast<double>(v) / (ll * ll) >= rhs * (1 + 1e-12);
}

struct SieveModulus {
  u64 l;       // odd prime, or 2 (then M = 8)
  u64 M;
  std::vector<u64> sqrtD;  // square roots of D mod l (odd l only)
};

std::vector<SieveModulus> sieve_moduli(i64 D) {
  std::vector<SieveModulus> out;
  for (u64 l : primes_up_to(kSieveBound)) {
    SieveModulus s{l, l == 2 ? u64{8} : l, {}};
    if (l != 2) {
      u64 d = static_cast<u64>(((D % static_cast<i64>(l)) + static_cast<i64>(l)) % static_cast<i64>(l));
      for (u64 x = 0; x < l; ++x)
        if (x * x % l == d) s.sqrtD.push_back(x);
    }
    out.push_back(std::move(s));
  }
  return out;
}

// Residues t mod M with M | t^2 - v^2 D.
std::vector<u64> sieve_roots(const SieveModulus& s, i64 D, u64 v) {
  std::vector<u64> r;
  if (s.l == 2) {
    i64 m = (static_cast<i64>((v % 8) * (v % 8)) * (D % 8)) % 8;
    u64 target = static_cast<u64>((m + 8) % 8);
    for (u64 x = 0; x < 8; ++x)
      if (x * x % 8 == target) r.push_back(x);
    return r;
  }
  if (v % s.l == 0) return {0};
  for (u64 x : s.sqrtD) r.push_back(mulmod(v % s.l, x, s.l));
  std::sort(r.begin(), r.end());
  r.erase(std::unique(r.begin(), r.end()), r.end());
  return r;
}

}  // namespace

std::vector<SearchInterval> search_intervals(i64 D, const mpq_class& z) {
  if (D >= -4) throw std::invalid_argument("search_intervals: need D < -4");
  HurwitzTable H(D);
  u64 absD = static_cast<u64>(-D);
  double rhs = 44.0 * mpq_class(z * H(1)).get_d() / static_cast<double>(absD);
  std::vector<SearchInterval> out;
  for (u64 v = 1; !past_cutoff(v, rhs); ++v) {
    mpq_class lo(BigInt(static_cast<unsigned long>(v * v)) * BigInt(static_cast<unsigned long>(absD)), 4);
    lo.canonicalize();
    out.push_back(SearchInterval{v, lo, z * H(v)});
  }
  return out;
}

std::vector<CrtPrime> enumerate_sz(i64 D, const mpq_class& z, std::size_t window) {
  if (D >= -4) throw std::invalid_argument("enumerate_sz: need D < -4");
  if (window == 0) window = 1;
  HurwitzTable H(D);
  auto moduli = sieve_moduli(D);
  std::vector<CrtPrime> out;
  for (const auto& iv : search_intervals(D, z)) {
    u64 v = iv.v;
    BigInt v2D = BigInt(static_cast<unsigned long>(v * v)) * BigInt(static_cast<long>(D));
    // t^2 <= 4 z H(-v^2 D) + v^2 D
    BigInt four_hi = BigInt(4 * iv.hi.get_num()) / iv.hi.get_den();
    BigInt T = four_hi + v2D;
    if (T < 1) continue;
    BigInt tmax_big = sqrt(T);
    if (!tmax_big.fits_ulong_p() || !BigInt(-v2D).fits_ulong_p()) throw std::overflow_error("enumerate_sz: range");
    u64 tmax = tmax_big.get_ui();
    u64 w2D = BigInt(-v2D).get_ui();  // -v^2 D
    u64 tmin = (v * static_cast<u64>(-D)) % 2 ? 1 : 2;
    if (tmax < tmin) continue;
    u64 count = (tmax - tmin) / 2 + 1;
    u64 n_min = (tmin * tmin + w2D) / 4;
    mpq_class Hv = H(v);
    double Hd = Hv.get_d();

    std::vector<std::pair<const SieveModulus*, std::vector<u64>>> plan;
    for (const auto& s : moduli) {
      if (s.l >= n_min) break;
      auto r = sieve_roots(s, D, v);
      if (!r.empty()) plan.emplace_back(&s, std::move(r));
    }
    std::vector<unsigned char> composite;
    for (u64 start = 0; start < count; start += window) {
      u64 len = std::min<u64>(window, count - start);
      composite.assign(len, 0);
      u64 t0 = tmin + 2 * start;
      for (const auto& [s, rs] : plan) {
        u64 M = s->M;
        for (u64 r : rs) {
          // first i >= 0 with t0 + 2i = r mod M
          u64 i0, step;
          if (M == 8) {
            u64 diff = (r + 8 - t0 % 8) % 8;
            if (diff % 2) continue;
            i0 = diff / 2;
            step = 4;
          } else {
            u64 inv2 = (M + 1) / 2;
            i0 = mulmod((r + M - t0 % M) % M, inv2, M);
            step = M;
          }
          for (u64 i = i0; i < len; i += step) composite[i] = 1;
        }
      }
      for (u64 i = 0; i < len; ++i) {
        if (composite[i]) continue;
        u64 t = t0 + 2 * i;
        u64 p = (t * t + w2D) / 4;
        if (p <= 3 || !is_prime(p)) continue;
        CrtPrime c;
        c.p = p;
        c.t = t;
        c.v = v;
        c.rho_inv = static_cast<double>(p) / Hd;
        c.lg_p = std::log2(static_cast<double>(p));
        out.push_back(c);
      }
    }
  }
  std::sort(out.begin(), out.end(),
            [](const CrtPrime& a, const CrtPrime& b) { return a.v != b.v ? a.v < b.v : a.p < b.p; });
  return out;
}

TorsionPlan rank_torsion(u64 p, u64 t, const std::vector<TorsionConstraint>& table) {
  u64 N0 = p + 1 - t, N1 = p + 1 + t;
  TorsionPlan best;
  bool have = false;
  double best_score = 0;
  for (PlanSide side : {PlanSide::Both, PlanSide::N0, PlanSide::N1}) {
    for (const auto& c : table) {
      bool ok0 = c.satisfied_by(N0), ok1 = c.satisfied_by(N1);
      bool ok = side == PlanSide::Both ? ok0 && ok1 : side == PlanSide::N0 ? ok0 : ok1;
      if (!ok) continue;
      double benefit = adjusted_benefit(c, p) * (side == PlanSide::Both ? 1.0 : 0.5);
      double score = benefit / c.cost;
      if (!have || score > best_score) {
        best = TorsionPlan{c, side, benefit, c.cost};
        best_score = score;
        have = true;
      }
    }
  }
  if (!have) {
    // No row applies: plain random curves.
    TorsionConstraint none;
    none.m = 1;
    none.model = 1;
    best = TorsionPlan{none, PlanSide::Both, 1.0, 1.0};
  }
  return best;
}

TorsionPlan rank_torsion(u64 p, u64 t) { return rank_torsion(p, t, default_torsion_table()); }

std::vector<CrtPrime> rank_candidates(std::vector<CrtPrime> candidates, const SelectionConfig& config) {
  const auto& table = config.torsion ? *config.torsion : default_torsion_table();
  for (auto& c : candidates) {
    c.plan = rank_torsion(c.p, c.t, table);
    c.ratio = c.rho_inv * c.plan.cost / c.plan.benefit / c.lg_p;
  }
  std::sort(candidates.begin(), candidates.end(), [](const CrtPrime& a, const CrtPrime& b) {
    return a.ratio != b.ratio ? a.ratio < b.ratio : a.p < b.p;
  });
  return candidates;
}

std::vector<CrtPrime> rank_and_cut(std::vector<CrtPrime> candidates, u64 b,
                                   const SelectionConfig& config) {
  candidates = rank_candidates(std::move(candidates), config);
  double bits = 0;
  std::size_t n = 0;
  while (n < candidates.size() && !(bits > static_cast<double>(b))) bits += candidates[n++].lg_p;
  if (!(bits > static_cast<double>(b))) return {};
  candidates.resize(n);
  return candidates;
}

namespace {

bool usable(const CrtPrime& c, const SelectionConfig& config) {
  if (c.p <= config.min_prime) return false;
  if (std::find(config.exclude.begin(), config.exclude.end(), c.p) != config.exclude.end()) return false;
  for (const auto& pp : factorize(c.v).factors)
    if (pp.prime > config.max_v_prime) return false;
  return true;
}

}  // namespace

Selection select_primes(i64 D, u64 b, const SelectionConfig& config) {
  if (config.k <= 1 || config.delta <= 0) throw std::invalid_argument("select_primes: need k > 1, delta > 0");
  HurwitzTable H(D);
  Selection sel;
  // z is kept integral: z0 = floor(-D / 2H(-D)), then z <- floor((1 + delta) z).
  auto floor_q = [](const mpq_class& q) { return mpq_class(BigInt(q.get_num() / q.get_den())); };
  if (config.z0) {
    sel.z = mpq_class(*config.z0);
  } else {
    sel.z = floor_q(mpq_class(BigInt(static_cast<long>(-D))) / (2 * H(1)));
    if (sel.z < 1) sel.z = 1;
  }
  mpq_class grow = 1 + mpq_class(config.delta);
  for (;;) {
    sel.z_history.push_back(sel.z.get_d());
    sel.sz = enumerate_sz(D, sel.z, config.window);
    sel.sz_bits = 0;
    for (const auto& c : sel.sz) sel.sz_bits += c.lg_p;
    if (sel.sz_bits > config.k * static_cast<double>(b)) {
      std::vector<CrtPrime> cand;
      for (const auto& c : sel.sz)
        if (usable(c, config)) cand.push_back(c);
      sel.ranked = rank_candidates(std::move(cand), config);
      double bits = 0;
      std::size_t n = 0;
      while (n < sel.ranked.size() && !(bits > static_cast<double>(b))) bits += sel.ranked[n++].lg_p;
      if (bits > static_cast<double>(b)) {
        sel.primes.assign(sel.ranked.begin(), sel.ranked.begin() + static_cast<long>(n));
        break;
      }
    }
    mpq_class next = floor_q(sel.z * grow);
    sel.z = next > sel.z ? next : sel.z + 1;
  }
  sel.bits = 0;
  for (const auto& c : sel.primes) sel.bits += c.lg_p;
  return sel;
}

}  // namespace hcp
