#pragma once

#include <optional>
#include <vector>

#include "hcp/arith.hpp"
#include "hcp/curves.hpp"

namespace hcp {

// A prime p with 4p = t^2 - v^2 D.
struct CrtPrime {
  u64 p = 0;
  u64 t = 0;
  u64 v = 0;
  double rho_inv = 0;  // p / H(-v^2 D)
  double lg_p = 0;
  TorsionPlan plan;
  double ratio = 0;  // expected search cost per bit
};

struct SelectionConfig {
  double k = 2;
  double delta = 0.5;
  std::optional<double> z0;
  // Selected primes must exceed this bound (keeps p away from the
  // modular polynomial degrees and the exhaustive branch of order testing).
  u64 min_prime = 47;
  // Selected primes must have every prime factor of v at most this bound.
  u64 max_v_prime = 47;
  const std::vector<TorsionConstraint>* torsion = nullptr;  // default table when null
  // Primes never selected (held out for checks).
  std::vector<u64> exclude;
  std::size_t window = std::size_t{1} << 22;
};

// All p in P_D with p / H(-v^2 D) <= z, sorted by v then p.
std::vector<CrtPrime> enumerate_sz(i64 D, const mpq_class& z, std::size_t window = std::size_t{1} << 22);

// The per-v search interval [-v^2 D / 4, z H(-v^2 D)] (empty when lo > hi).
struct SearchInterval {
  u64 v;
  mpq_class lo, hi;
};
std::vector<SearchInterval> search_intervals(i64 D, const mpq_class& z);

// Best of the three plans (N0 only, N1 only, both), by benefit / cost.
TorsionPlan rank_torsion(u64 p, u64 t, const std::vector<TorsionConstraint>& table);
TorsionPlan rank_torsion(u64 p, u64 t);

struct Selection {
  std::vector<CrtPrime> primes;  // in increasing order of ratio
  std::vector<CrtPrime> ranked;  // every usable prime of S_z, best first; primes is a prefix
  std::vector<CrtPrime> sz;      // the full S_z at the final z
  mpq_class z;
  double sz_bits = 0;
  double bits = 0;
  std::vector<double> z_history;
};

Selection select_primes(i64 D, u64 b, const SelectionConfig& config = {});

// Attaches torsion plans and ratios and sorts by ratio, then p.
std::vector<CrtPrime> rank_candidates(std::vector<CrtPrime> candidates, const SelectionConfig& config);

// Ranks candidates and returns the minimal prefix with sum lg p > b.
std::vector<CrtPrime> rank_and_cut(std::vector<CrtPrime> candidates, u64 b,
                                   const SelectionConfig& config);

}  // namespace hcp
