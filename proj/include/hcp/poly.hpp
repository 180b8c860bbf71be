#pragma once

#include <optional>
#include <vector>

#include "hcp/field.hpp"
#include "hcp/rng.hpp"

namespace hcp {

// Dense polynomial over F_p, coefficients in ascending degree order with no
// trailing zeros. The zero polynomial is the empty vector.
using ModPoly = std::vector<Fp>;

struct RootMult {
  Fp root;
  unsigned multiplicity = 1;
};

// Multiplication cascade thresholds (lengths of the shorter operand).
inline constexpr std::size_t kSchoolbookMax = 24;
inline constexpr std::size_t kKaratsubaMax = 64;

void poly_trim(ModPoly& f);
inline long poly_degree(const ModPoly& f) { return static_cast<long>(f.size()) - 1; }

ModPoly poly_add(const PrimeField& F, const ModPoly& f, const ModPoly& g);
ModPoly poly_sub(const PrimeField& F, const ModPoly& f, const ModPoly& g);
ModPoly poly_scale(const PrimeField& F, const ModPoly& f, Fp c);
ModPoly poly_mul(const PrimeField& F, const ModPoly& f, const ModPoly& g);
ModPoly poly_mul_schoolbook(const PrimeField& F, const ModPoly& f, const ModPoly& g);
ModPoly poly_mul_karatsuba(const PrimeField& F, const ModPoly& f, const ModPoly& g);
ModPoly poly_mul_kronecker(const PrimeField& F, const ModPoly& f, const ModPoly& g);

// Quotient and remainder; g must be nonzero.
void poly_divrem(const PrimeField& F, const ModPoly& f, const ModPoly& g, ModPoly* q, ModPoly* r);
ModPoly poly_mod(const PrimeField& F, const ModPoly& f, const ModPoly& g);
ModPoly poly_gcd(const PrimeField& F, ModPoly f, ModPoly g);
ModPoly poly_monic(const PrimeField& F, const ModPoly& f);
Fp poly_eval(const PrimeField& F, const ModPoly& f, Fp x);

// Divides f by (X - a) in place when a is a root and returns true; otherwise
// leaves f unchanged.
bool poly_divide_linear(const PrimeField& F, ModPoly& f, Fp a);

// base^e mod m.
ModPoly poly_powmod(const PrimeField& F, const ModPoly& base, const BigInt& e, const ModPoly& m);

// Product of the distinct linear factors of f, monic; 1 when f is constant.
ModPoly poly_split_part(const PrimeField& F, const ModPoly& f);
// Roots of g, a monic product of distinct linear factors.
std::vector<Fp> split_linear(const PrimeField& F, const ModPoly& g, Rng& rng);

// Some root of f in F_p, chosen using rng, or none.
std::optional<Fp> find_one_root(const PrimeField& F, const ModPoly& f, Rng& rng);

// All distinct roots with multiplicities, ascending by canonical value.
std::vector<RootMult> roots(const PrimeField& F, const ModPoly& f);

// Monic prod (X - r) over the given roots.
ModPoly product_from_roots(const PrimeField& F, const std::vector<Fp>& rs);

}  // namespace hcp
