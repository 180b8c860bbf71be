#pragma once

// Independent reference computations used only by the tests. Nothing here
// calls into the library's algorithms.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace oracle {

struct Form {
  long a, b, c;
};

// Primitive reduced forms of discriminant D < 0 by direct scan over a and b.
std::vector<Form> reduced_forms_scan(long D);

// H_D over Z from floating-point j-invariants of the reduced forms.
// Coefficients ascending, leading 1 included.
std::vector<mpz_class> hilbert_poly_complex(long D);

// Number of points of y^2 = x^3 + Ax + B over F_p, including infinity.
long count_points(long A, long B, long p);

// Order of (x, y) on y^2 = x^3 + Ax + B over F_p by repeated addition.
long point_order(long A, long B, long p, long x, long y);

// j-invariant 1728 * 4A^3 / (4A^3 + 27B^2) mod p.
long j_invariant(long A, long B, long p);

// Naive modular exponent and inverse.
long pmod(long a, long p);
long pow_mod(long a, long e, long p);
long inv_mod(long a, long p);

// Classical modular polynomial Phi_l(X, Y) integer coefficients evaluated mod p
// at (x, y), read straight from the text database.
struct PhiTable {
  long l = 0;
  std::vector<std::vector<mpz_class>> c;  // c[i][j] for X^i Y^j
};
PhiTable load_phi(const char* path, long l);
long phi_eval(const PhiTable& t, long x, long y, long p);
// log2 of |Phi_l(j(tau), j(l tau))| relative to the sum of the absolute
// values of its terms, from q-expansions in multiprecision.
double phi_log2_residual(const PhiTable& t, double tau_re, double tau_im);

// |trace| of the curve with j-invariant j over F_p for every j, -1 at 0 and 1728.
std::vector<long> trace_table(long p);

// Gamma_{l,t}(F_p) with 0 and 1728 removed, built by exhaustive point counting
// and direct evaluation of Phi_l. Levels are depth minus the distance to the
// nearest floor vertex (degree one).
struct IsogenyGraph {
  long p = 0, t = 0, l = 0;
  long disc = 0;      // t^2 - 4p
  long depth = 0;     // nu_l(w), disc = w^2 D_K
  long fund = 0;      // D_K
  std::vector<long> verts;
  std::map<long, std::vector<long>> adj;  // distinct neighbors, loops dropped
  std::map<long, bool> loop;
  std::map<long, long> level;
};
IsogenyGraph isogeny_graph(const PhiTable& phi, long p, long t, const std::vector<long>& traces);

bool connected(const IsogenyGraph& g, long a, long b);

// Empty when every component has the shape of an l-volcano of the graph's
// depth; otherwise a description of the first violation.
std::string volcano_shape_error(const IsogenyGraph& g);

// Roots in [0, p) of an integer polynomial reduced mod p, by evaluation.
std::vector<long> roots_mod(const std::vector<mpz_class>& f, long p);

}  // namespace oracle
