#include "hcp/volcano.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>

namespace hcp {

// ---------------------------------------------------------------- database

ModPolyDb ModPolyDb::parse(std::istream& in) {
  ModPolyDb db;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    u64 l;
    unsigned i, j;
    std::string c;
    if (!(ss >> l)) continue;
    if (!(ss >> i >> j >> c)) throw std::runtime_error("phi db: malformed line " + std::to_string(lineno));
    if (l < 2 || !is_prime(l) || i < j || i > l + 1)
      throw std::runtime_error("phi db: bad entry on line " + std::to_string(lineno));
    auto& tab = db.tables_[l];
    std::size_t n = l + 2;
    if (tab.empty()) tab.assign(n * n, BigInt(0));
    BigInt v;
    if (v.set_str(c, 10) != 0) throw std::runtime_error("phi db: bad coefficient on line " + std::to_string(lineno));
    tab[i * n + j] = v;
    tab[j * n + i] = v;
  }
  for (u64 l : db.levels()) {
    if (db.coeff(l, static_cast<unsigned>(l + 1), 0) != 1)
      throw std::runtime_error("phi db: Phi_" + std::to_string(l) + " is not monic");
    if (!db.kronecker_congruence(l))
      throw std::runtime_error("phi db: Phi_" + std::to_string(l) + " fails the Kronecker congruence");
  }
  return db;
}

ModPolyDb ModPolyDb::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("phi db: cannot open " + path);
  return parse(in);
}

const ModPolyDb& ModPolyDb::builtin() {
  static const ModPolyDb db = load(HCP_PHI_DB);
  return db;
}

std::vector<u64> ModPolyDb::levels() const {
  std::vector<u64> out;
  for (const auto& [l, tab] : tables_) out.push_back(l);
  return out;
}

const BigInt& ModPolyDb::coeff(u64 l, unsigned i, unsigned j) const {
  auto it = tables_.find(l);
  if (it == tables_.end()) throw std::runtime_error("phi db: no Phi_" + std::to_string(l));
  if (i > l + 1 || j > l + 1) throw std::out_of_range("phi db: degree");
  return it->second[i * (l + 2) + j];
}

bool ModPolyDb::kronecker_congruence(u64 l) const {
  // (X^l - Y)(X - Y^l) = X^{l+1} - X^l Y^l - X Y + Y^{l+1}
  for (unsigned i = 0; i <= l + 1; ++i)
    for (unsigned j = 0; j <= l + 1; ++j) {
      long want = 0;
      if ((i == l + 1 && j == 0) || (i == 0 && j == l + 1)) want = 1;
      if ((i == l && j == l) || (i == 1 && j == 1)) want = -1;
      BigInt diff = coeff(l, i, j) - want;
      if (mpz_divisible_ui_p(diff.get_mpz_t(), l) == 0) return false;
    }
  return true;
}

PhiModP::PhiModP(const PrimeField& F, const ModPolyDb& db, u64 l) : l_(l) {
  std::size_t n = l + 2;
  c_.resize(n * n);
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j <= i; ++j) {
      Fp x = F.from_big(db.coeff(l, i, j));
      c_[i * n + j] = x;
      c_[j * n + i] = x;
    }
}

ModPoly PhiModP::instantiate(const PrimeField& F, Fp j) const {
  std::size_t n = l_ + 2;
  std::vector<Fp> pw(n);
  pw[0] = F.one();
  for (std::size_t k = 1; k < n; ++k) pw[k] = F.mul(pw[k - 1], j);
  ModPoly f(n);
  for (std::size_t i = 0; i < n; ++i) {
    Fp s = F.zero();
    const Fp* row = &c_[i * n];
    for (std::size_t k = 0; k < n; ++k) s = F.add(s, F.mul(row[k], pw[k]));
    f[i] = s;
  }
  poly_trim(f);
  return f;
}

Fp PhiModP::eval(const PrimeField& F, Fp x, Fp y) const { return poly_eval(F, instantiate(F, y), x); }

// ----------------------------------------------------------------- context

VolcanoContext::VolcanoContext(const PrimeField& F, const ModPolyDb& db, i64 D, u64 t, u64 v, Rng& rng)
    : F_(F), db_(db), rng_(rng), D_(D), t_(t), v_(v) {
  u_ = disc_info(D).u;
  BigInt lhs = BigInt(static_cast<unsigned long>(t)) * t - 4 * BigInt(static_cast<unsigned long>(F.modulus()));
  BigInt rhs = BigInt(static_cast<unsigned long>(v)) * v * BigInt(static_cast<long>(D));
  if (lhs != rhs) throw std::invalid_argument("VolcanoContext: t^2 - 4p != v^2 D");
}

const PhiModP& VolcanoContext::phi(u64 l) {
  auto it = phis_.find(l);
  if (it != phis_.end()) return it->second;
  if (l == F_.modulus()) throw std::runtime_error("volcano: l = p");
  if (!db_.contains(l)) throw std::runtime_error("volcano: Phi_" + std::to_string(l) + " not in database");
  return phis_.emplace(l, PhiModP(F_, db_, l)).first->second;
}

ModPoly phi_instantiate(VolcanoContext& ctx, u64 l, Fp j) { return ctx.phi(l).instantiate(ctx.field(), j); }

// ---------------------------------------------------------------- neighbors

namespace {

bool special_j(const PrimeField& F, Fp j) { return F.is_zero(j) || F.to_u64(j) == 1728 % F.modulus(); }

ModPoly reduced_phi(VolcanoContext& ctx, Fp j, u64 l, std::optional<Fp> prev) {
  const auto& F = ctx.field();
  ModPoly f = phi_instantiate(ctx, l, j);
  ++ctx.examined;
  if (prev) {
    unsigned e = 0;
    while (poly_degree(f) > 0 && poly_divide_linear(F, f, *prev)) ++e;
    if (e > 1) ++ctx.multiple_edges;
  }
  return f;
}

Fp pick(Rng& rng, const std::vector<Fp>& xs) { return xs[rng.below(xs.size())]; }

std::vector<Fp> distinct(std::vector<Fp> xs) {
  std::sort(xs.begin(), xs.end(), [](Fp a, Fp b) { return a.m < b.m; });
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

}  // namespace

std::vector<Fp> neighbors(VolcanoContext& ctx, Fp j, u64 l, std::optional<Fp> prev) {
  const auto& F = ctx.field();
  ModPoly f = reduced_phi(ctx, j, l, prev);
  std::vector<Fp> out;
  if (poly_degree(f) < 1) return out;
  for (const auto& r : roots(F, f)) {
    if (special_j(F, r.root)) continue;
    for (unsigned k = 0; k < r.multiplicity; ++k) out.push_back(r.root);
  }
  return out;
}

std::size_t vertex_degree(VolcanoContext& ctx, Fp j, u64 l) { return neighbors(ctx, j, l).size(); }

std::vector<Fp> walk_path(VolcanoContext& ctx, u64 l, Fp j0, Fp j1, unsigned len) {
  std::vector<Fp> path{j0};
  if (len == 0) return path;
  path.push_back(j1);
  while (path.size() <= len) {
    auto nb = neighbors(ctx, path.back(), l, path[path.size() - 2]);
    if (nb.empty()) break;
    path.push_back(pick(ctx.rng(), nb));
  }
  return path;
}

// -------------------------------------------------------------- level moves

unsigned find_level(VolcanoContext& ctx, Fp j, u64 l) {
  unsigned d = ctx.depth(l);
  if (d == 0) return 0;
  auto nb = neighbors(ctx, j, l);
  if (nb.size() != l + 1) return d;
  auto ds = distinct(nb);
  if (ds.size() < 2) throw std::runtime_error("find_level: vertex with a single distinct neighbor");
  std::shuffle(ds.begin(), ds.end(), ctx.rng());
  auto k1 = static_cast<unsigned>(walk_path(ctx, l, j, ds[0], d).size() - 1);
  auto k2 = static_cast<unsigned>(walk_path(ctx, l, j, ds[1], k1).size() - 1);
  return d - k2;
}

Fp descend(VolcanoContext& ctx, Fp j, u64 l, unsigned k) {
  unsigned d = ctx.depth(l);
  if (k >= d) throw std::invalid_argument("descend: already on the floor");
  auto nb = neighbors(ctx, j, l);
  if (nb.empty()) throw std::runtime_error("descend: isolated vertex");
  if (k == 0) {
    // Walk to the floor; the vertex d-1 steps before the end is on level 1.
    std::vector<Fp> path{j, pick(ctx.rng(), nb)};
    for (;;) {
      auto next = neighbors(ctx, path.back(), l, path[path.size() - 2]);
      if (next.empty()) break;
      path.push_back(pick(ctx.rng(), next));
    }
    if (path.size() < d + 1) throw std::runtime_error("descend: path shorter than the depth");
    return path[path.size() - d];
  }
  auto ds = distinct(nb);
  if (ds.size() < 2) throw std::runtime_error("descend: vertex with a single distinct neighbor");
  std::shuffle(ds.begin(), ds.end(), ctx.rng());
  auto path = walk_path(ctx, l, j, ds[0], d - k);
  if (vertex_degree(ctx, path.back(), l) == 1) return ds[0];
  return ds[1];
}

Fp ascend(VolcanoContext& ctx, Fp j, u64 l, unsigned k) {
  unsigned d = ctx.depth(l);
  if (k == 0) throw std::invalid_argument("ascend: already on the surface");
  auto nb = neighbors(ctx, j, l);
  if (nb.empty()) throw std::runtime_error("ascend: isolated vertex");
  if (nb.size() == 1) return nb[0];
  auto ds = distinct(nb);
  std::shuffle(ds.begin(), ds.end(), ctx.rng());
  for (std::size_t i = 0; i + 1 < ds.size(); ++i) {
    auto path = walk_path(ctx, l, j, ds[i], d - k);
    if (vertex_degree(ctx, path.back(), l) > 1) return ds[i];
  }
  return ds.back();
}

std::optional<Fp> adjust_to_order(VolcanoContext& ctx, Fp j) {
  u64 w = ctx.w();
  for (const auto& pp : factorize(w).factors) {
    u64 l = pp.prime.get_ui();
    if (!ctx.db().contains(l)) {
      if (ctx.v() % l == 0) throw std::runtime_error("adjust_to_order: l | v not in the database");
      return std::nullopt;
    }
    unsigned target = valuation(ctx.u(), l);
    unsigned level = find_level(ctx, j, l);
    while (level < target) j = descend(ctx, j, l, level++);
    while (level > target) j = ascend(ctx, j, l, level--);
  }
  return j;
}

// ---------------------------------------------------------- surface walking

std::vector<Fp> walk_surface_path(VolcanoContext& ctx, u64 l, Fp j0, unsigned n) {
  const auto& F = ctx.field();
  unsigned d = ctx.depth(l);
  std::vector<Fp> path{j0};
  if (n == 0) return path;
  auto nb0 = neighbors(ctx, j0, l);
  if (nb0.empty()) throw std::runtime_error("walk_surface_path: isolated vertex");
  if (nb0.size() == 1) {
    if (n > 1) throw std::invalid_argument("walk_surface_path: n >= #V0");
    path.push_back(nb0[0]);
    return path;
  }

  if (d == 0) {
    path.push_back(pick(ctx.rng(), nb0));
    while (path.size() <= n) {
      ModPoly f = reduced_phi(ctx, path.back(), l, path[path.size() - 2]);
      auto r = poly_degree(f) >= 1 ? find_one_root(F, f, ctx.rng()) : std::nullopt;
      if (!r || special_j(F, *r)) throw std::runtime_error("walk_surface_path: surface path ended");
      path.push_back(*r);
    }
    return path;
  }

  // nbr[k] caches the neighbors of path[k] (all of them, including path[k-1]).
  std::vector<std::vector<Fp>> nbr{nb0};
  auto extend = [&](std::size_t steps) {
    for (std::size_t s = 0; s < steps; ++s) {
      std::size_t k = path.size() - 1;
      if (nbr.size() <= k) nbr.push_back(neighbors(ctx, path[k], l));
      std::vector<Fp> cand;
      for (Fp x : nbr[k])
        if (k == 0 || x != path[k - 1]) cand.push_back(x);
      if (cand.empty()) return false;
      path.push_back(pick(ctx.rng(), cand));
    }
    return true;
  };
  auto truncate = [&](std::size_t len) {
    path.resize(len);
    if (nbr.size() > len) nbr.resize(len);
  };

  if (!extend(d)) throw std::runtime_error("walk_surface_path: surface vertex too shallow");
  std::vector<Fp> tried{path[1]};
  std::size_t i = 0;
  for (;;) {
    for (;;) {
      std::size_t tail = i + d;
      if (nbr.size() <= tail) nbr.push_back(neighbors(ctx, path[tail], l));
      if (nbr[tail].size() != 1) break;
      // j_{i+1} was not on the surface; retry from an unvisited neighbor of j_i.
      std::vector<Fp> cand;
      for (Fp x : distinct(nbr[i]))
        if ((i == 0 || x != path[i - 1]) && std::find(tried.begin(), tried.end(), x) == tried.end())
          cand.push_back(x);
      if (cand.empty()) throw std::runtime_error("walk_surface_path: no surface neighbor");
      Fp next = pick(ctx.rng(), cand);
      tried.push_back(next);
      truncate(i + 1);
      path.push_back(next);
      if (!extend(d - 1)) throw std::runtime_error("walk_surface_path: path ended early");
    }
    if (!extend(1)) throw std::runtime_error("walk_surface_path: path ended early");
    ++i;
    if (i == n) {
      path.resize(n + 1);
      return path;
    }
    tried.assign(1, path[i + 1]);
  }
}

double surface_step_cost(u64 l, unsigned d, SurfaceSize size) {
  if (d == 0) return 1;
  double L = static_cast<double>(l), dd = d;
  if (size == SurfaceSize::Two) return dd + 1 + L * dd / 2;
  return 1 + (L - 1) * dd / 2;
}

// ------------------------------------------------------------ ring classes

namespace {

void enumerate_rec(VolcanoContext& ctx, Fp j0, const PolycyclicPresentation& pres, std::size_t k,
                   const std::function<void(Fp)>& emit) {
  // k generators remain: norms[0..k-1].
  u64 l = pres.norms[k - 1];
  auto r = pres.rel_orders[k - 1];
  auto path = walk_surface_path(ctx, l, j0, static_cast<unsigned>(r - 1));
  for (std::size_t i = 1; i < path.size(); ++i) emit(path[i]);
  if (k > 1)
    for (Fp j : path) enumerate_rec(ctx, j, pres, k - 1, emit);
}

}  // namespace

void enumerate_ring_class(VolcanoContext& ctx, Fp j0, const PolycyclicPresentation& pres,
                          const std::function<void(Fp)>& emit) {
  emit(j0);
  if (pres.norms.empty()) return;
  if (pres.norms.size() != pres.rel_orders.size()) throw std::invalid_argument("enumerate_ring_class: presentation");
  enumerate_rec(ctx, j0, pres, pres.norms.size(), emit);
}

std::vector<Fp> enumerate_ring_class(VolcanoContext& ctx, Fp j0, const PolycyclicPresentation& pres) {
  std::vector<Fp> out;
  out.reserve(pres.h);
  enumerate_ring_class(ctx, j0, pres, [&](Fp j) { out.push_back(j); });
  return out;
}

}  // namespace hcp
