#pragma once

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hcp/classgroup.hpp"
#include "hcp/field.hpp"
#include "hcp/poly.hpp"
#include "hcp/rng.hpp"

namespace hcp {

// Classical modular polynomials Phi_l(X, Y) over Z for a fixed set of primes l.
class ModPolyDb {
 public:
  ModPolyDb() = default;

  // Text lines "l i j c" with i >= j; '#' starts a comment. Every polynomial is
  // checked against the Kronecker congruence; throws std::runtime_error on
  // malformed or inconsistent data.
  static ModPolyDb parse(std::istream& in);
  static ModPolyDb load(const std::string& path);
  // The database shipped with the library (loaded once).
  static const ModPolyDb& builtin();

  bool contains(u64 l) const { return tables_.count(l) != 0; }
  std::vector<u64> levels() const;
  u64 max_level() const { return tables_.empty() ? 0 : tables_.rbegin()->first; }

  // Coefficient of X^i Y^j.
  const BigInt& coeff(u64 l, unsigned i, unsigned j) const;

  // Phi_l(X, Y) = (X^l - Y)(X - Y^l) mod l.
  bool kronecker_congruence(u64 l) const;

 private:
  // Full (l+2) x (l+2) table, row i holds the coefficients of X^i.
  std::map<u64, std::vector<BigInt>> tables_;
};

// Phi_l reduced mod p.
class PhiModP {
 public:
  PhiModP(const PrimeField& F, const ModPolyDb& db, u64 l);
  u64 level() const { return l_; }
  // Phi_l(X, j) as a polynomial in X of degree l+1.
  ModPoly instantiate(const PrimeField& F, Fp j) const;
  Fp eval(const PrimeField& F, Fp x, Fp y) const;

 private:
  u64 l_;
  std::vector<Fp> c_;
};

// Data for navigating the l-volcanoes of Gamma_{l,t}(F_p), p in P_D with
// 4p = t^2 - v^2 D.
class VolcanoContext {
 public:
  VolcanoContext(const PrimeField& F, const ModPolyDb& db, i64 D, u64 t, u64 v, Rng& rng);

  const PrimeField& field() const { return F_; }
  const ModPolyDb& db() const { return db_; }
  Rng& rng() { return rng_; }
  i64 D() const { return D_; }
  u64 t() const { return t_; }
  u64 v() const { return v_; }
  u64 u() const { return u_; }
  u64 w() const { return u_ * v_; }
  unsigned depth(u64 l) const { return valuation(w(), l); }

  // Throws std::runtime_error when l is not in the database or l = p.
  const PhiModP& phi(u64 l);

  // Vertices whose neighbors have been computed.
  u64 examined = 0;
  // Root multiplicities above one seen when removing the previous vertex.
  u64 multiple_edges = 0;

 private:
  const PrimeField& F_;
  const ModPolyDb& db_;
  Rng& rng_;
  i64 D_;
  u64 t_, v_, u_;
  std::map<u64, PhiModP> phis_;
};

ModPoly phi_instantiate(VolcanoContext& ctx, u64 l, Fp j);

// Roots of Phi_l(X, j) / (X - prev)^e, e the multiplicity of prev, each
// repeated by its multiplicity. Never contains 0 or 1728.
std::vector<Fp> neighbors(VolcanoContext& ctx, Fp j, u64 l, std::optional<Fp> prev = std::nullopt);

// Number of l-isogenous neighbors of j counted with multiplicity.
std::size_t vertex_degree(VolcanoContext& ctx, Fp j, u64 l);

// Extends the path (j0, j1) by random non-backtracking steps until it has
// len edges or cannot continue.
std::vector<Fp> walk_path(VolcanoContext& ctx, u64 l, Fp j0, Fp j1, unsigned len);

unsigned find_level(VolcanoContext& ctx, Fp j, u64 l);
// j at level k; throws std::invalid_argument when already at the floor
// (descend) or the surface (ascend).
Fp descend(VolcanoContext& ctx, Fp j, u64 l, unsigned k);
Fp ascend(VolcanoContext& ctx, Fp j, u64 l, unsigned k);

// Moves j into Ell_O(F_p) by adjusting its level in the l-volcano for every
// l | w. Returns nothing (abort) when the conductor of D has a prime factor
// outside the database, since End(E) cannot then be verified.
std::optional<Fp> adjust_to_order(VolcanoContext& ctx, Fp j);

// A path j0, ..., jn on the surface of the l-volcano of j0; needs j0 on the
// surface and n < #V0.
std::vector<Fp> walk_surface_path(VolcanoContext& ctx, u64 l, Fp j0, unsigned n);

enum class SurfaceSize { Two, Many };
// Expected vertices examined per surface step (for #V0 = 2, the whole
// one-step walk).
double surface_step_cost(u64 l, unsigned d, SurfaceSize size);

// Emits j0 and then each other element of Ell_O(F_p) exactly once.
void enumerate_ring_class(VolcanoContext& ctx, Fp j0, const PolycyclicPresentation& pres,
                          const std::function<void(Fp)>& emit);
std::vector<Fp> enumerate_ring_class(VolcanoContext& ctx, Fp j0, const PolycyclicPresentation& pres);

}  // namespace hcp
