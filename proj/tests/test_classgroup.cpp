#include "doctest.h"
#include "hcp/classgroup.hpp"
#include "hcp/rng.hpp"
#include "oracle.hpp"

#include <cmath>
#include <set>

using namespace hcp;

namespace {

// Weighted count sum_{d | n} 2 h(d^2 D0) / w(d^2 D0), with h from a direct scan.
mpq_class hurwitz_bruteforce(long D0, long n) {
  mpq_class total = 0;
  for (long d = 1; d <= n; ++d) {
    if (n % d) continue;
    long Dd = d * d * D0;
    long h = static_cast<long>(oracle::reduced_forms_scan(Dd).size());
    int w = Dd == -3 ? 6 : (Dd == -4 ? 4 : 2);
    total += mpq_class(2 * h, w);
  }
  total.canonicalize();
  return total;
}

bool is_fundamental(long D) {
  auto info = disc_info(D);
  return info.u == 1;
}

}  // namespace

TEST_CASE("reduce_form examples") {
  CHECK(reduce_form({1, 0, 2}) == QuadForm{1, 0, 2});
  CHECK(reduce_form({3, 10, 9}) == QuadForm{1, 0, 2});
  CHECK(reduce_form({2, -1, 3}) == QuadForm{2, -1, 3});
  CHECK_THROWS(reduce_form({2, 0, 2}));
}

TEST_CASE("compose examples") {
  QuadForm f{2, 1, 3}, g{2, -1, 3};
  CHECK(compose(f, principal_form(-23)) == f);
  CHECK(compose(f, g) == QuadForm{1, 1, 6});
  CHECK(compose(f, f) == QuadForm{2, -1, 3});
  CHECK_THROWS(compose(f, QuadForm{1, 0, 2}));
}

TEST_CASE("prime_form examples") {
  CHECK(*prime_form(2, -23) == QuadForm{2, 1, 3});
  CHECK(!prime_form(5, -23));
  CHECK(*prime_form(3, -23) == QuadForm{3, 1, 2});
  CHECK_THROWS(prime_form(3, -4 * 9 * 7));
}

TEST_CASE("reduce_form output is reduced and keeps the discriminant") {
  Rng rng(4);
  for (int i = 0; i < 2000; ++i) {
    i64 a = 1 + static_cast<i64>(rng.below(1000));
    i64 b = static_cast<i64>(rng.below(4000)) - 2000;
    i64 c = 1 + static_cast<i64>(rng.below(1000));
    if (b * b - 4 * a * c >= 0 || std::gcd(std::gcd(a, std::llabs(b)), c) != 1) continue;
    QuadForm r = reduce_form({a, b, c});
    CHECK(is_reduced(r));
    CHECK(discriminant(r) == b * b - 4 * a * c);
  }
}

TEST_CASE("composition is a group law") {
  Rng rng(8);
  int tested = 0;
  while (tested < 50) {
    i64 D = -static_cast<i64>(3 + rng.below(200000));
    if (!is_discriminant(D) || D > -5) continue;
    auto forms = reduced_forms(D);
    if (forms.size() < 3) continue;
    ++tested;
    QuadForm e = principal_form(D);
    for (int k = 0; k < 20; ++k) {
      const auto& f = forms[rng.below(forms.size())];
      const auto& g = forms[rng.below(forms.size())];
      const auto& h = forms[rng.below(forms.size())];
      CHECK(compose(compose(f, g), h) == compose(f, compose(g, h)));
      CHECK(compose(f, g) == compose(g, f));
      CHECK(compose(f, e) == f);
      CHECK(compose(f, inverse_form(f)) == e);
      CHECK(is_reduced(compose(f, g)));
    }
  }
}

TEST_CASE("reduced_forms matches a direct scan") {
  CHECK(reduced_forms(-4).size() == 1);
  auto f23 = reduced_forms(-23);
  REQUIRE(f23.size() == 3);
  CHECK(f23[0] == QuadForm{1, 1, 6});
  CHECK(f23[1] == QuadForm{2, -1, 3});
  CHECK(f23[2] == QuadForm{2, 1, 3});
  CHECK(reduced_forms(-108708).size() == 100);
  for (long D = -3; D >= -20000; --D) {
    if (!is_discriminant(D)) continue;
    auto got = reduced_forms(D);
    auto expect = oracle::reduced_forms_scan(D);
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].a == expect[i].a);
      CHECK(got[i].b == expect[i].b);
      CHECK(got[i].c == expect[i].c);
    }
  }
}

TEST_CASE("hurwitz_number examples") {
  CHECK(hurwitz_number(-108708, 1) == 100);
  CHECK(hurwitz_number(-108708, 2) == 300);
  CHECK(hurwitz_number(-108708, 3) == 400);
  CHECK(hurwitz_number(-3, 1) == mpq_class(1, 3));
  CHECK(hurwitz_number(-4, 1) == mpq_class(1, 2));
}

TEST_CASE("hurwitz_number matches weighted form counts") {
  for (long D = -3; D >= -2000; --D) {
    if (!is_discriminant(D)) continue;
    auto info = disc_info(D);
    for (long v = 1; v * v * -D <= 20000; ++v) {
      long n = static_cast<long>(info.u) * v;
      CHECK(hurwitz_number(D, static_cast<u64>(v)) == hurwitz_bruteforce(info.D0, n));
    }
  }
}

TEST_CASE("Hurwitz ratio sandwich") {
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    i64 D = -static_cast<i64>(3 + rng.below(1000000));
    if (!is_discriminant(D)) {
      --i;
      continue;
    }
    u64 v = 1 + rng.below(5000);
    HurwitzTable H(D);
    double ratio = H.approx(v) / (static_cast<double>(v) * H.approx(1));
    double ll = std::log(std::log(static_cast<double>(v) + 4));
    CHECK(ratio >= 1 - 1e-12);
    CHECK(ratio <= 11 * ll * ll);
  }
}

TEST_CASE("polycyclic presentation relations") {
  auto p23 = polycyclic_presentation(-23, default_candidates(-23));
  CHECK(p23.norms == std::vector<u64>{2});
  CHECK(p23.rel_orders == std::vector<u64>{3});
  Rng rng(3);
  int tested = 0;
  while (tested < 40) {
    i64 D = -static_cast<i64>(5 + rng.below(3000000));
    if (!is_discriminant(D)) continue;
    ++tested;
    auto pres = polycyclic_presentation(D, default_candidates(D), 1000);
    u64 prod = 1;
    for (u64 r : pres.rel_orders) {
      CHECK(r > 1);
      prod *= r;
    }
    CHECK(prod == pres.h);
    CHECK(pres.h == reduced_forms(D).size());
    CHECK(pres.table_inserts == pres.h - 1);
    for (std::size_t i = 0; i < pres.norms.size(); ++i) {
      auto x = pres.decode(pres.relations[i]);
      QuadForm rhs = principal_form(D);
      for (std::size_t j = 0; j < x.size(); ++j) {
        if (j >= i) CHECK(x[j] == 0);
        rhs = compose(rhs, form_pow(pres.generators[j], x[j]));
      }
      CHECK(form_pow(pres.generators[i], pres.rel_orders[i]) == rhs);
    }
  }
}

TEST_CASE("height bound dominates oracle coefficients for small D") {
  auto hb = height_bound(-108708);
  CHECK(std::llabs(static_cast<long long>(hb.b) - 5943) <= 2);
  auto h7 = height_bound(-7);
  CHECK(h7.b >= static_cast<u64>(std::log2(3375.0) + 2));
  for (long D : {-7L, -71L, -99L, -479L, -1999L, -4999L}) {
    auto H = oracle::hilbert_poly_complex(D);
    auto b = height_bound(D);
    for (const auto& c : H)
      if (c != 0) CHECK(lg(BigInt(abs(c))) <= b.lgB);
  }
}
