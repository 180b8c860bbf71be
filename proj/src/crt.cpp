#include "hcp/crt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hcp {

namespace {

unsigned ceil_lg(std::size_t n) {
  unsigned d = 0;
  while ((std::size_t{1} << d) < n) ++d;
  return d;
}

std::vector<BigInt> parent_level(const std::vector<BigInt>& lv) {
  std::vector<BigInt> up(lv.size() / 2);
  for (std::size_t x = 0; x < up.size(); ++x) up[x] = lv[2 * x] * lv[2 * x + 1];
  return up;
}

std::vector<BigInt> to_big(const std::vector<u64>& v) {
  std::vector<BigInt> out;
  out.reserve(v.size());
  for (u64 x : v) out.emplace_back(BigInt(static_cast<unsigned long>(x)));
  return out;
}

void mod_into(BigInt& x, const BigInt& m) {
  mpz_fdiv_r(x.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
}

}  // namespace

ProductTree::ProductTree(std::vector<BigInt> moduli, double omega) : n_(moduli.size()) {
  if (moduli.empty()) throw std::invalid_argument("ProductTree: no moduli");
  depth_ = ceil_lg(n_);
  moduli.resize(std::size_t{1} << depth_, BigInt(1));
  std::size_t keep = 1;
  if (depth_ > 0) keep = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::pow(depth_, omega) - 1e-9)));
  unsigned step = depth_ == 0 ? 1 : static_cast<unsigned>((depth_ + keep - 1) / keep);
  std::vector<BigInt> cur = std::move(moduli);
  for (unsigned k = depth_;; --k) {
    if ((depth_ - k) % step == 0 && (k > 0 || depth_ == 0)) stored_.emplace_back(k, cur);
    if (k == 0) break;
    cur = parent_level(cur);
  }
  root_ = cur[0];
  std::reverse(stored_.begin(), stored_.end());
}

std::vector<BigInt> ProductTree::level(unsigned k) const {
  if (k > depth_) throw std::out_of_range("ProductTree::level");
  auto it = std::lower_bound(stored_.begin(), stored_.end(), k,
                             [](const auto& e, unsigned kk) { return e.first < kk; });
  std::vector<BigInt> cur = it->second;
  for (unsigned j = it->first; j > k; --j) cur = parent_level(cur);
  return cur;
}

Complements build_complements(const std::vector<BigInt>& moduli, const BigInt& P, double omega) {
  ProductTree tree(moduli, omega);
  bool withP = P > 0;
  Complements out;
  out.M = tree.root();
  if (withP) out.M_mod_P = out.M % P;
  // cbar[x] = (m / m_x) mod m_x for the nodes x of the current level
  std::vector<BigInt> cbar{BigInt(1)}, cbarP{withP ? BigInt(1) % P : BigInt(0)};
  for (unsigned k = 1; k <= tree.depth(); ++k) {
    std::vector<BigInt> L = tree.level(k);
    std::vector<BigInt> nb(L.size()), nbP(withP ? L.size() : 0);
    for (std::size_t x = 0; x < cbar.size(); ++x) {
      nb[2 * x] = cbar[x] * L[2 * x + 1];
      mod_into(nb[2 * x], L[2 * x]);
      nb[2 * x + 1] = cbar[x] * L[2 * x];
      mod_into(nb[2 * x + 1], L[2 * x + 1]);
      if (withP) {
        nbP[2 * x] = cbarP[x] * L[2 * x + 1] % P;
        nbP[2 * x + 1] = cbarP[x] * L[2 * x] % P;
      }
    }
    cbar = std::move(nb);
    cbarP = std::move(nbP);
  }
  if (tree.depth() == 0) mod_into(cbar[0], moduli[0]);
  cbar.resize(moduli.size());
  out.mod_m = std::move(cbar);
  if (withP) {
    cbarP.resize(moduli.size());
    out.mod_P = std::move(cbarP);
  }
  return out;
}

Complements build_complements(const std::vector<u64>& moduli, const BigInt& P, double omega) {
  return build_complements(to_big(moduli), P, omega);
}

CrtState crt_init(const std::vector<BigInt>& moduli, const BigInt& P, std::size_t ncoeffs, double omega) {
  if (P <= 0) throw std::invalid_argument("crt_init: need P >= 1");
  CrtState st;
  st.P = P;
  st.n = moduli.size();
  st.delta = ceil_lg(st.n) + 2;
  st.moduli = moduli;
  bool word = std::all_of(moduli.begin(), moduli.end(), [](const BigInt& m) { return m.fits_ulong_p(); });
  Complements cp = build_complements(moduli, P, omega);
  st.M_mod_P = cp.M_mod_P;
  st.a.resize(st.n);
  st.d.resize(st.n);
  for (std::size_t i = 0; i < st.n; ++i) {
    if (moduli[i] < 2) throw std::invalid_argument("crt_init: modulus < 2");
    if (mpz_invert(st.a[i].get_mpz_t(), cp.mod_m[i].get_mpz_t(), moduli[i].get_mpz_t()) == 0)
      throw std::invalid_argument("crt_init: moduli not coprime");
    st.d[i] = st.a[i] * cp.mod_P[i] % P;
  }
  if (word) {
    for (std::size_t i = 0; i < st.n; ++i) {
      st.moduli_word.push_back(moduli[i].get_ui());
      st.a_word.push_back(st.a[i].get_ui());
    }
  }
  st.C.assign(ncoeffs, BigInt(0));
  st.s_int.assign(ncoeffs, 0);
  st.s_int_big.assign(ncoeffs, BigInt(0));
  st.s_frac.assign(ncoeffs, 0);
  st.done.assign(st.n, false);
  return st;
}

CrtState crt_init(const std::vector<u64>& primes, const BigInt& P, std::size_t ncoeffs, double omega) {
  return crt_init(to_big(primes), P, ncoeffs, omega);
}

namespace {

void claim(CrtState& st, std::size_t i, std::size_t ncoeffs) {
  if (i >= st.n) throw std::out_of_range("crt_update: index");
  if (st.done[i]) throw std::logic_error("crt_update: modulus already used");
  if (ncoeffs != st.C.size()) throw std::invalid_argument("crt_update: coefficient count");
  st.done[i] = true;
}

}  // namespace

void crt_update(CrtState& st, std::size_t i, const std::vector<u64>& coeffs) {
  if (st.moduli_word.empty()) {
    crt_update(st, i, to_big(coeffs));
    return;
  }
  claim(st, i, coeffs.size());
  u64 p = st.moduli_word[i], a = st.a_word[i];
  mpz_srcptr d = st.d[i].get_mpz_t();
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    u64 c = coeffs[j];
    if (c >= p) throw std::invalid_argument("crt_update: residue out of range");
    if (c == 0) continue;
    mpz_ptr C = st.C[j].get_mpz_t();
    mpz_addmul_ui(C, d, c);
    mpz_fdiv_r(C, C, st.P.get_mpz_t());
    u128 x = static_cast<u128>(c) * a;
    u128 q = x / p, r = x % p;
    st.s_int[j] += q;
    st.s_frac[j] += static_cast<u64>((r << st.delta) / p);
  }
}

void crt_update(CrtState& st, std::size_t i, const std::vector<BigInt>& coeffs) {
  claim(st, i, coeffs.size());
  const BigInt& m = st.moduli[i];
  BigInt x, q, r;
  for (std::size_t j = 0; j < coeffs.size(); ++j) {
    const BigInt& c = coeffs[j];
    if (c < 0 || c >= m) throw std::invalid_argument("crt_update: residue out of range");
    if (c == 0) continue;
    st.C[j] += c * st.d[i];
    mod_into(st.C[j], st.P);
    x = c * st.a[i];
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), x.get_mpz_t(), m.get_mpz_t());
    st.s_int_big[j] += q;
    mod_into(st.s_int_big[j], st.P);
    r <<= st.delta;
    mpz_fdiv_q(r.get_mpz_t(), r.get_mpz_t(), m.get_mpz_t());
    st.s_frac[j] += r.get_ui();
  }
}

std::vector<BigInt> crt_finalize(const CrtState& st) {
  if (!std::all_of(st.done.begin(), st.done.end(), [](bool b) { return b; }))
    throw std::logic_error("crt_finalize: missing residues");
  std::vector<BigInt> out(st.C.size());
  u64 three_quarters = u64{3} << (st.delta - 2);
  for (std::size_t j = 0; j < out.size(); ++j) {
    u128 rint = st.s_int[j] + ((static_cast<u128>(st.s_frac[j]) + three_quarters) >> st.delta);
    BigInt r = BigInt(static_cast<unsigned long>(rint >> 64));
    r <<= 64;
    r += BigInt(static_cast<unsigned long>(static_cast<u64>(rint)));
    r += st.s_int_big[j];
    out[j] = st.C[j] - r * st.M_mod_P;
    mod_into(out[j], st.P);
  }
  return out;
}

ExactCrt::ExactCrt(const std::vector<BigInt>& moduli) : moduli_(moduli) {
  if (moduli.empty()) throw std::invalid_argument("ExactCrt: no moduli");
  unsigned d = ceil_lg(moduli.size());
  std::vector<BigInt> cur = moduli;
  cur.resize(std::size_t{1} << d, BigInt(1));
  levels_.push_back(cur);
  while (cur.size() > 1) {
    cur = parent_level(cur);
    levels_.push_back(cur);
  }
  M_ = cur[0];
  Complements cp = build_complements(moduli, BigInt(0), 1.0);
  a_.resize(moduli.size());
  for (std::size_t i = 0; i < moduli.size(); ++i)
    if (mpz_invert(a_[i].get_mpz_t(), cp.mod_m[i].get_mpz_t(), moduli[i].get_mpz_t()) == 0) {
      if (moduli[i] == 1) {
        a_[i] = 0;
        continue;
      }
      throw std::invalid_argument("ExactCrt: moduli not coprime");
    }
}

ExactCrt::ExactCrt(const std::vector<u64>& moduli) : ExactCrt(to_big(moduli)) {}

BigInt ExactCrt::combine_scaled(std::vector<BigInt> v) const {
  // v_i = c_i a_i mod m_i; returns sum v_i M_i mod M
  v.resize(levels_[0].size(), BigInt(0));
  for (std::size_t k = 0; k + 1 < levels_.size(); ++k) {
    const auto& L = levels_[k];
    std::vector<BigInt> up(v.size() / 2);
    for (std::size_t x = 0; x < up.size(); ++x) up[x] = v[2 * x] * L[2 * x + 1] + v[2 * x + 1] * L[2 * x];
    v = std::move(up);
  }
  mod_into(v[0], M_);
  return v[0];
}

BigInt ExactCrt::combine(const std::vector<BigInt>& residues) const {
  if (residues.size() != moduli_.size()) throw std::invalid_argument("ExactCrt: residue count");
  std::vector<BigInt> v(residues.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = residues[i] * a_[i];
    mod_into(v[i], moduli_[i]);
  }
  return combine_scaled(std::move(v));
}

BigInt ExactCrt::combine(const std::vector<u64>& residues) const {
  if (residues.size() != moduli_.size()) throw std::invalid_argument("ExactCrt: residue count");
  std::vector<BigInt> v(residues.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (moduli_[i].fits_ulong_p() && a_[i].fits_ulong_p()) {
      u64 m = moduli_[i].get_ui();
      v[i] = BigInt(static_cast<unsigned long>(mulmod(residues[i] % m, a_[i].get_ui(), m)));
    } else {
      v[i] = BigInt(static_cast<unsigned long>(residues[i])) * a_[i];
      mod_into(v[i], moduli_[i]);
    }
  }
  return combine_scaled(std::move(v));
}

BigInt ExactCrt::combine_centered(const std::vector<u64>& residues) const {
  BigInt c = combine(residues);
  if (2 * c > M_) c -= M_;
  return c;
}

BigInt crt_exact(const std::vector<u64>& residues, const std::vector<u64>& moduli) {
  return ExactCrt(moduli).combine_centered(residues);
}

CrtAccumulator::CrtAccumulator(i64 D, const std::vector<u64>& primes, const BigInt& P, std::size_t ncoeffs,
                               const CrtOptions& opt)
    : P_(P), primes_(primes), ncoeffs_(ncoeffs) {
  if (primes.empty()) throw std::invalid_argument("CrtAccumulator: no primes");
  if (P < 0) throw std::invalid_argument("CrtAccumulator: P < 0");
  seen_.assign(primes.size(), false);
  BigInt M = 1;
  for (u64 p : primes) M *= BigInt(static_cast<unsigned long>(p));
  double lgP = P > 0 ? lg(P) : 0;
  double limit = opt.large_bits;
  if (limit <= 0) {
    double l = std::log2(static_cast<double>(D < 0 ? -D : D));
    limit = 3 * l * l * l / 10;
  }
  if (P == 0 || P >= M) {
    path_ = CrtPath::Exact;
    group_members_.emplace_back();
    for (std::size_t i = 0; i < primes.size(); ++i) group_members_[0].push_back(i);
  } else if (lgP > limit) {
    path_ = CrtPath::Hybrid;
    double bits = 0;
    for (std::size_t i = 0; i < primes.size(); ++i) {
      if (group_members_.empty() || bits >= lgP) {
        group_members_.emplace_back();
        bits = 0;
      }
      group_members_.back().push_back(i);
      bits += std::log2(static_cast<double>(primes[i]));
    }
  } else {
    path_ = CrtPath::Explicit;
    state_ = crt_init(primes, P, ncoeffs, opt.omega);
    return;
  }
  group_of_.resize(primes.size());
  group_pos_.resize(primes.size());
  std::vector<BigInt> qs;
  for (std::size_t g = 0; g < group_members_.size(); ++g) {
    std::vector<u64> ps;
    for (std::size_t k = 0; k < group_members_[g].size(); ++k) {
      std::size_t i = group_members_[g][k];
      group_of_[i] = g;
      group_pos_[i] = k;
      ps.push_back(primes[i]);
    }
    group_crt_.emplace_back(ps);
    qs.push_back(group_crt_.back().modulus());
    group_left_.push_back(ps.size());
    pending_.emplace_back(ps.size());
  }
  if (path_ == CrtPath::Hybrid) state_ = crt_init(qs, P, ncoeffs, opt.omega);
}

void CrtAccumulator::add(std::size_t i, const std::vector<u64>& coeffs) {
  if (i >= primes_.size()) throw std::out_of_range("CrtAccumulator::add: index");
  if (seen_[i]) throw std::logic_error("CrtAccumulator::add: prime already used");
  if (coeffs.size() != ncoeffs_) throw std::invalid_argument("CrtAccumulator::add: coefficient count");
  if (path_ == CrtPath::Explicit) {
    crt_update(state_, i, coeffs);
    seen_[i] = true;
    return;
  }
  seen_[i] = true;
  std::size_t g = group_of_[i];
  pending_[g][group_pos_[i]] = coeffs;
  if (--group_left_[g] == 0 && path_ == CrtPath::Hybrid) flush_group(g);
}

void CrtAccumulator::flush_group(std::size_t g) {
  std::vector<BigInt> vals(ncoeffs_);
  std::vector<u64> res(pending_[g].size());
  for (std::size_t j = 0; j < ncoeffs_; ++j) {
    for (std::size_t k = 0; k < res.size(); ++k) res[k] = pending_[g][k][j];
    vals[j] = group_crt_[g].combine(res);
  }
  pending_[g].clear();
  pending_[g].shrink_to_fit();
  crt_update(state_, g, vals);
}

std::vector<BigInt> CrtAccumulator::finish() {
  if (!std::all_of(seen_.begin(), seen_.end(), [](bool b) { return b; }))
    throw std::logic_error("CrtAccumulator::finish: missing residues");
  if (path_ != CrtPath::Exact) return crt_finalize(state_);
  std::vector<BigInt> out(ncoeffs_);
  std::vector<u64> res(primes_.size());
  for (std::size_t j = 0; j < ncoeffs_; ++j) {
    for (std::size_t k = 0; k < res.size(); ++k) res[k] = pending_[0][k][j];
    out[j] = group_crt_[0].combine_centered(res);
    if (P_ > 0) mod_into(out[j], P_);
  }
  return out;
}

}  // namespace hcp
