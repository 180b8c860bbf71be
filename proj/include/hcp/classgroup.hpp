#pragma once

#include <optional>
#include <vector>

#include "hcp/arith.hpp"

namespace hcp {

struct QuadForm {
  i64 a = 0, b = 0, c = 0;
  friend bool operator==(const QuadForm&, const QuadForm&) = default;
};

i64 discriminant(const QuadForm& f);
bool is_reduced(const QuadForm& f);

// D = u^2 * D0 with D0 fundamental.
struct DiscInfo {
  i64 D = 0;
  i64 D0 = 0;
  u64 u = 1;
};
bool is_discriminant(i64 D);
DiscInfo disc_info(i64 D);
// Number of units in the order of discriminant D: 6, 4 or 2.
int unit_count(i64 D);

QuadForm reduce_form(const QuadForm& f);
QuadForm compose(const QuadForm& f, const QuadForm& g);
QuadForm principal_form(i64 D);
QuadForm inverse_form(const QuadForm& f);
QuadForm form_pow(const QuadForm& f, u64 e);

// (l, b, c) with 0 <= b <= l, b = D mod 2, b^2 = D mod 4l; not necessarily
// reduced. Empty when (D/l) = -1. Throws when l divides the conductor.
std::optional<QuadForm> prime_form(u64 l, i64 D);

// All primitive reduced forms, sorted by a then b.
std::vector<QuadForm> reduced_forms(i64 D);
u64 class_number(i64 D);

// H(-v^2 D) from the closed-form product over primes dividing u*v.
mpq_class hurwitz_number(i64 D, u64 v);

// Precomputed h(D0) and w(D0) for repeated Hurwitz numbers at one D.
class HurwitzTable {
 public:
  explicit HurwitzTable(i64 D);
  mpq_class operator()(u64 v) const;
  double approx(u64 v) const;
  const DiscInfo& info() const { return info_; }
  u64 h0() const { return h0_; }

 private:
  DiscInfo info_;
  u64 h0_ = 0;
  int w0_ = 2;
};

struct PolycyclicPresentation {
  i64 D = 0;
  u64 h = 0;
  std::vector<u64> norms;
  std::vector<u64> rel_orders;
  std::vector<u64> relations;
  std::vector<QuadForm> generators;
  u64 table_inserts = 0;

  // Exponent vector encoded by z.
  std::vector<u64> decode(u64 z) const;
};

// Primes l <= 6 ln^2|D| with (D/l) != -1 and l not dividing the conductor.
std::vector<u64> default_candidates(i64 D);
bool admissible_norm(u64 l, const DiscInfo& info);

// Optimal polycyclic presentation derived from prime forms with the given
// norms, in the given order. When the candidates run out before the table
// reaches h(D), further admissible primes up to extend_to are appended in
// increasing order; if that still fails, throws std::runtime_error.
PolycyclicPresentation polycyclic_presentation(i64 D, const std::vector<u64>& candidates,
                                               u64 extend_to = 0);

struct HeightBound {
  u64 b = 0;
  u64 h = 0;
  double lgB = 0;
  std::vector<i64> form_norms;
};

HeightBound height_bound(i64 D);
HeightBound height_bound(i64 D, const std::vector<QuadForm>& forms);

}  // namespace hcp
