#pragma once

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hcp/classgroup.hpp"
#include "hcp/crt.hpp"
#include "hcp/curves.hpp"
#include "hcp/primeselect.hpp"
#include "hcp/volcano.hpp"

namespace hcp {

// A failure that a fresh attempt with new random choices may avoid.
class RetryableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JobConfig {
  i64 D = 0;
  BigInt P = 0;  // 0: compute over Z
  SelectionConfig selection;
  unsigned jobs = 1;
  u64 seed = 0;
  std::string phi_db;  // empty: the built-in database
  CrtOptions crt;
  // Presentation norms to try first, in this order (for every v).
  std::optional<std::vector<u64>> presentation_norms;
  unsigned retry_budget = 5;
  std::function<void(const std::string&)> log;
};

struct PrimeStats {
  u64 p = 0;
  u64 curves_tested = 0;
  u64 examined = 0;
  unsigned attempts = 0;
};

struct HilbertResult {
  i64 D = 0;
  BigInt P = 0;
  u64 h = 0;
  std::vector<BigInt> coeffs;  // ascending, h + 1 entries
  u64 b = 0;                   // lg 4B rounded up
  std::vector<CrtPrime> primes;
  std::vector<u64> replaced;  // primes dropped after exhausting the retry budget
  CrtPath path = CrtPath::Explicit;
  std::size_t presentations = 0;
  std::vector<PrimeStats> stats;  // in the order of primes
};

// Throws std::invalid_argument unless D < -4 is a discriminant with
// D_K not in {-3, -4} whose conductor primes all lie in db.
void check_discriminant(i64 D, const ModPolyDb& db);

// Candidate norms from db, ordered by estimated walking cost for primes with
// the given v.
std::vector<u64> presentation_order(i64 D, u64 v, const ModPolyDb& db);
PolycyclicPresentation presentation_for(i64 D, u64 v, const ModPolyDb& db,
                                        const std::optional<std::vector<u64>>& overrides = std::nullopt);

// H_D mod p for one p in P_D, coefficients ascending. Throws RetryableError
// when the enumeration is inconsistent.
std::vector<u64> hilbert_mod_p(const CrtPrime& cp, const PolycyclicPresentation& pres, const ModPolyDb& db,
                               Rng& rng, PrimeStats* stats = nullptr);

HilbertResult hilbert_class_poly(const JobConfig& config);

// t and v with 4q = t^2 - v^2 D, t >= 0, by the modified Cornacchia algorithm.
std::optional<std::pair<u64, u64>> cornacchia4(i64 D, u64 q);

struct CmCurve {
  u64 q = 0;
  u64 t = 0, v = 0;
  BigInt N;
  u64 A = 0, B = 0;  // y^2 = x^3 + Ax + B
  Fp j;
};

// A curve over F_q with q + 1 - t points (sign +1) or q + 1 + t points (sign
// -1) and End containing the order of discriminant D.
CmCurve cm_construct(i64 D, u64 q, int sign = 1, const JobConfig& base = {});

// Output file format: header "D <D> P <P> h <h>", then "<k> <coefficient>".
std::string format_result(const HilbertResult& r);

}  // namespace hcp
