#pragma once

#include <vector>

#include "hcp/arith.hpp"

namespace hcp {

// Product tree over pairwise coprime moduli, leaves padded with 1s to a power
// of two. Only about ceil(d^omega) of the d+1 levels are kept (d = depth);
// other levels are rebuilt from the nearest kept level below.
class ProductTree {
 public:
  ProductTree(std::vector<BigInt> moduli, double omega = 0.5);

  unsigned depth() const { return depth_; }
  std::size_t size() const { return n_; }
  // Products at level k: 2^k entries, level 0 is the root, level depth() the leaves.
  std::vector<BigInt> level(unsigned k) const;
  const BigInt& root() const { return root_; }
  std::size_t stored_levels() const { return stored_.size(); }

 private:
  std::size_t n_;
  unsigned depth_ = 0;
  std::vector<std::pair<unsigned, std::vector<BigInt>>> stored_;  // ascending level
  BigInt root_;
};

struct Complements {
  std::vector<BigInt> mod_m;  // M_i mod m_i
  std::vector<BigInt> mod_P;  // M_i mod P
  BigInt M;                   // product of the moduli
  BigInt M_mod_P;
};

// M_i = M / m_i reduced mod m_i and mod P, by the top-down complement recursion.
Complements build_complements(const std::vector<BigInt>& moduli, const BigInt& P, double omega = 0.5);
Complements build_complements(const std::vector<u64>& moduli, const BigInt& P, double omega = 0.5);

// Explicit CRT mod P, accumulated online one modulus at a time.
struct CrtState {
  BigInt P;
  std::size_t n = 0;
  unsigned delta = 0;  // ceil(lg n) + 2
  std::vector<BigInt> moduli;
  std::vector<u64> moduli_word;  // empty unless every modulus fits a word
  std::vector<BigInt> a;         // M_i^{-1} mod m_i
  std::vector<u64> a_word;
  std::vector<BigInt> d;         // a_i M_i mod P
  BigInt M_mod_P;
  std::vector<BigInt> C;  // per coefficient, in [0, P)
  // s_j = sum floor(2^delta c a / m) split as integer part (mod P for big
  // moduli, exact for word moduli) plus the fixed-point fractional part.
  std::vector<u128> s_int;
  std::vector<BigInt> s_int_big;
  std::vector<u64> s_frac;
  std::vector<bool> done;
};

CrtState crt_init(const std::vector<u64>& primes, const BigInt& P, std::size_t ncoeffs, double omega = 0.5);
CrtState crt_init(const std::vector<BigInt>& moduli, const BigInt& P, std::size_t ncoeffs, double omega = 0.5);

// coeffs[j] in [0, m_i). Throws std::logic_error if i was already used.
void crt_update(CrtState& st, std::size_t i, const std::vector<u64>& coeffs);
void crt_update(CrtState& st, std::size_t i, const std::vector<BigInt>& coeffs);

// The coefficients mod P, in [0, P); requires every modulus to be updated.
std::vector<BigInt> crt_finalize(const CrtState& st);

// Standard CRT with centered result in (-M/2, M/2], for many residue vectors
// sharing the same moduli.
class ExactCrt {
 public:
  explicit ExactCrt(const std::vector<BigInt>& moduli);
  explicit ExactCrt(const std::vector<u64>& moduli);
  const BigInt& modulus() const { return M_; }
  // Value in [0, M).
  BigInt combine(const std::vector<BigInt>& residues) const;
  BigInt combine(const std::vector<u64>& residues) const;
  BigInt combine_centered(const std::vector<u64>& residues) const;

 private:
  BigInt combine_scaled(std::vector<BigInt> v) const;
  std::vector<BigInt> moduli_;
  std::vector<BigInt> a_;
  std::vector<std::vector<BigInt>> levels_;  // full product tree, levels_[0] = leaves
  BigInt M_;
};

BigInt crt_exact(const std::vector<u64>& residues, const std::vector<u64>& moduli);

enum class CrtPath { Explicit, Exact, Hybrid };

struct CrtOptions {
  double omega = 0.5;
  // P counts as large when lg P exceeds this; 0 selects 3 lg^3|D| / 10.
  double large_bits = 0;
};

// Drives one of the three paths: explicit CRT for small P, exact CRT over Z
// when P = 0 or P >= M, and the hybrid path (explicit CRT over groups of
// primes) in between. Results are in [0, P), or signed over Z for P = 0.
class CrtAccumulator {
 public:
  CrtAccumulator(i64 D, const std::vector<u64>& primes, const BigInt& P, std::size_t ncoeffs,
                 const CrtOptions& opt = {});
  CrtPath path() const { return path_; }
  std::size_t groups() const { return group_members_.size(); }
  void add(std::size_t i, const std::vector<u64>& coeffs);
  std::vector<BigInt> finish();

 private:
  void flush_group(std::size_t g);

  CrtPath path_;
  BigInt P_;
  std::vector<u64> primes_;
  std::size_t ncoeffs_;
  CrtState state_;
  // exact and hybrid paths keep residues until their group is complete
  std::vector<std::vector<std::size_t>> group_members_;
  std::vector<std::size_t> group_of_;
  std::vector<std::size_t> group_pos_;
  std::vector<std::size_t> group_left_;
  std::vector<std::vector<std::vector<u64>>> pending_;
  std::vector<ExactCrt> group_crt_;
  std::vector<bool> seen_;
};

}  // namespace hcp
