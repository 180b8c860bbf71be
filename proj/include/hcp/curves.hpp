#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hcp/arith.hpp"
#include "hcp/field.hpp"
#include "hcp/rng.hpp"

namespace hcp {

// y^2 = x^3 + Ax + B over a PrimeField supplied alongside.
struct Curve {
  Fp A, B;
};

struct Point {
  Fp x, y;
  bool inf = true;
  static Point at_infinity() { return Point{}; }
  static Point affine(Fp x, Fp y) { return Point{x, y, false}; }
};

bool same_point(const Point& P, const Point& Q);

bool is_nonsingular(const PrimeField& F, const Curve& E);
bool on_curve(const PrimeField& F, const Curve& E, const Point& P);
Fp j_invariant(const PrimeField& F, const Curve& E);
// Right-hand side x^3 + Ax + B.
Fp curve_rhs(const PrimeField& F, const Curve& E, Fp x);

Point ec_neg(const PrimeField& F, const Point& P);
Point ec_add(const PrimeField& F, const Curve& E, const Point& P, const Point& Q);
Point ec_dbl(const PrimeField& F, const Curve& E, const Point& P);
Point scalar_mul(const PrimeField& F, const Curve& E, u64 n, const Point& P);
Point scalar_mul(const PrimeField& F, const Curve& E, const BigInt& n, const Point& P);

// Non-adjacent form, least significant digit first.
std::vector<signed char> naf(u64 n);

// Lockstep affine arithmetic on many curves with one field inversion per step.
class BatchScalar {
 public:
  BatchScalar(const PrimeField& F, std::vector<Fp> A) : F_(F), A_(std::move(A)) {}

  void dbl(std::vector<Point>& R);
  void add(std::vector<Point>& R, const std::vector<Point>& Q, bool negate);

  // k P_i for every lane, k given by its NAF.
  std::vector<Point> mul(const std::vector<Point>& P, const std::vector<signed char>& k);
  // k1 P_i + k2 Q_i for every lane, interleaving the two NAFs.
  std::vector<Point> mul2(const std::vector<Point>& P, const std::vector<signed char>& k1,
                          const std::vector<Point>& Q, const std::vector<signed char>& k2);

 private:
  const PrimeField& F_;
  std::vector<Fp> A_;
  std::vector<Fp> den_, scratch_;
  std::vector<std::size_t> lanes_;
};

// Quadratic twist by the field's fixed non-residue.
Curve quadratic_twist(const PrimeField& F, const Curve& E);
std::optional<Point> point_with_x(const PrimeField& F, const Curve& E, Fp x);
Point random_point(const PrimeField& F, const Curve& E, Rng& rng);

// #E(F_p) by summing Legendre symbols; intended for small p.
u64 count_points_naive(const PrimeField& F, const Curve& E);

// |P| in factored form when it divides N, otherwise nothing.
std::optional<FactoredInteger> fast_order(const PrimeField& F, const Curve& E, const Point& P,
                                          const FactoredInteger& N);

// True iff #E is N0 or N1, where N0 < N1, N0 + N1 = 2p + 2 and both lie in
// the Hasse interval. first, if given, is used as the first point on E.
bool test_curve_order(const PrimeField& F, const Curve& E, const FactoredInteger& N0,
                      const FactoredInteger& N1, Rng& rng, const Point* first = nullptr);

// A torsion constraint m = a * b * N on #E. Curves come from a model of
// X_1(N); the factors a (a power of 2) and b (1 or 3) are filtered afterwards.
// two_exact / three_exact, when non-negative, fix nu_2(#E) / nu_3(#E).
struct TorsionConstraint {
  unsigned m = 1;
  unsigned model = 1;
  unsigned a = 1;
  unsigned b = 1;
  int two_exact = -1;
  int three_exact = -1;
  double benefit = 1;
  double cost = 1;

  bool satisfied_by(u64 n) const;
  std::string label() const;
};

// Constraints available by default, sorted by decreasing benefit/cost.
const std::vector<TorsionConstraint>& default_torsion_table();
// Lines "m a_spec b_spec N benefit cost", e.g. "33 2^0 3 11 80.0 2.3".
// Throws std::runtime_error for malformed or unsupported rows.
std::vector<TorsionConstraint> load_torsion_table(const std::string& path);
std::vector<TorsionConstraint> parse_torsion_table(const std::string& text);

// Benefit adjusted for the residues of p modulo 3 and the primes l > 3 dividing m.
double adjusted_benefit(const TorsionConstraint& c, u64 p);

struct TorsionCurve {
  Curve E;
  Point T;  // a point of order c.model (identity when model = 1)
};

// A curve with j not in {0, 1728} whose order satisfies c. Throws
// std::invalid_argument for an unsupported model and std::runtime_error
// if no curve is found within the retry budget.
TorsionCurve random_curve_with_torsion(const PrimeField& F, const TorsionConstraint& c, Rng& rng);

enum class PlanSide { N0, N1, Both };

struct TorsionPlan {
  TorsionConstraint constraint;
  PlanSide side = PlanSide::Both;
  double benefit = 1;  // adjusted, halved for one-sided plans
  double cost = 1;
};

struct TraceSearchResult {
  Fp j;
  Curve E;
  u64 curves_tested = 0;  // index of the successful curve, counting from 1
  u64 order_tests = 0;    // calls to test_curve_order
};

struct TraceSearchOptions {
  std::size_t batch = 64;
};

// Algorithm searching for j in Ell_t(F_p) - {0, 1728} using the given plan.
TraceSearchResult find_trace_curve(const PrimeField& F, u64 t, const TorsionPlan& plan, Rng& rng,
                                   const TraceSearchOptions& opt = {});

// Curve with the given j; j = 0 and j = 1728 map to y^2 = x^3 + 1 and y^2 = x^3 + x.
Curve curve_from_j(const PrimeField& F, Fp j);

// E or its twist, whichever has N points. N must lie in the Hasse interval.
Curve select_twist(const PrimeField& F, const Curve& E, const BigInt& N, Rng& rng);

bool in_hasse_interval(u64 p, const BigInt& N);

}  // namespace hcp
