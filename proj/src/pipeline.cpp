#include "hcp/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace hcp {

namespace {

void note(const JobConfig& c, const std::string& msg) {
  if (c.log) c.log(msg);
}

template <class T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t cap) : cap_(cap) {}
  void push(T x) {
    std::unique_lock lk(m_);
    not_full_.wait(lk, [&] { return q_.size() < cap_; });
    q_.push_back(std::move(x));
    not_empty_.notify_one();
  }
  T pop() {
    std::unique_lock lk(m_);
    not_empty_.wait(lk, [&] { return !q_.empty(); });
    T x = std::move(q_.front());
    q_.pop_front();
    not_full_.notify_one();
    return x;
  }

 private:
  std::size_t cap_;
  std::deque<T> q_;
  std::mutex m_;
  std::condition_variable not_full_, not_empty_;
};

struct Outcome {
  std::size_t index = 0;
  std::vector<u64> coeffs;
  PrimeStats stats;
  bool failed = false;
  std::exception_ptr error;  // non-retryable
};

}  // namespace

void check_discriminant(i64 D, const ModPolyDb& db) {
  if (D >= -4 || !is_discriminant(D)) throw std::invalid_argument("need a discriminant D < -4");
  DiscInfo info = disc_info(D);
  if (info.D0 == -3 || info.D0 == -4) throw std::invalid_argument("fundamental discriminant -3 or -4 not supported");
  for (const auto& pp : factorize(info.u).factors)
    if (!pp.prime.fits_ulong_p() || !db.contains(pp.prime.get_ui()))
      throw std::invalid_argument("conductor has a prime factor outside the modular polynomial database");
}

std::vector<u64> presentation_order(i64 D, u64 v, const ModPolyDb& db) {
  DiscInfo info = disc_info(D);
  std::vector<std::pair<double, u64>> keyed;
  for (u64 l : db.levels()) {
    if (!admissible_norm(l, info)) continue;
    double cost = static_cast<double>(l) * surface_step_cost(l, valuation(v, l), SurfaceSize::Many);
    keyed.emplace_back(cost, l);
  }
  std::sort(keyed.begin(), keyed.end());
  std::vector<u64> out;
  for (auto& [c, l] : keyed) out.push_back(l);
  return out;
}

PolycyclicPresentation presentation_for(i64 D, u64 v, const ModPolyDb& db,
                                        const std::optional<std::vector<u64>>& overrides) {
  std::vector<u64> order = presentation_order(D, v, db);
  if (overrides) {
    std::vector<u64> first = *overrides;
    for (u64 l : first)
      if (!db.contains(l)) throw std::invalid_argument("presentation norm not in the modular polynomial database");
    for (u64 l : order)
      if (std::find(first.begin(), first.end(), l) == first.end()) first.push_back(l);
    order = std::move(first);
  }
  try {
    return polycyclic_presentation(D, order);
  } catch (const std::runtime_error&) {
    throw std::runtime_error("class group not generated by the primes in the modular polynomial database");
  }
}

std::vector<u64> hilbert_mod_p(const CrtPrime& cp, const PolycyclicPresentation& pres, const ModPolyDb& db,
                               Rng& rng, PrimeStats* stats) {
  PrimeField F(cp.p);
  i64 D = pres.D;
  if (stats) stats->p = cp.p;
  for (unsigned tries = 0;; ++tries) {
    if (tries == 16) throw RetryableError("hilbert_mod_p: order adjustment keeps aborting");
    TraceSearchResult ts = find_trace_curve(F, cp.t, cp.plan, rng);
    if (stats) stats->curves_tested += ts.curves_tested;
    VolcanoContext ctx(F, db, D, cp.t, cp.v, rng);
    std::optional<Fp> j0 = adjust_to_order(ctx, ts.j);
    if (!j0) continue;
    std::vector<Fp> js = enumerate_ring_class(ctx, *j0, pres);
    if (stats) stats->examined += ctx.examined;
    if (js.size() != pres.h) throw RetryableError("hilbert_mod_p: enumeration size mismatch");
    std::vector<u64> vals;
    vals.reserve(js.size());
    for (Fp j : js) vals.push_back(F.to_u64(j));
    std::sort(vals.begin(), vals.end());
    if (std::adjacent_find(vals.begin(), vals.end()) != vals.end())
      throw RetryableError("hilbert_mod_p: repeated j-invariant");
    ModPoly H = product_from_roots(F, js);
    std::vector<u64> out;
    out.reserve(H.size());
    for (Fp c : H) out.push_back(F.to_u64(c));
    out.resize(pres.h + 1, 0);
    return out;
  }
}

HilbertResult hilbert_class_poly(const JobConfig& config) {
  ModPolyDb loaded;
  const ModPolyDb* db = &ModPolyDb::builtin();
  if (!config.phi_db.empty()) {
    loaded = ModPolyDb::load(config.phi_db);
    db = &loaded;
  }
  i64 D = config.D;
  check_discriminant(D, *db);
  if (config.P < 0) throw std::invalid_argument("P must be non-negative");
  HilbertResult res;
  res.D = D;
  res.P = config.P;
  HeightBound hb = height_bound(D);
  res.h = hb.h;
  res.b = hb.b;
  u64 h = hb.h;
  note(config, "h " + std::to_string(h) + " b " + std::to_string(hb.b));

  SelectionConfig sc = config.selection;
  sc.max_v_prime = std::min<u64>(sc.max_v_prime, db->max_level());
  Selection sel = select_primes(D, hb.b, sc);
  std::vector<CrtPrime> primes = sel.primes;
  std::size_t next_ranked = primes.size();
  note(config, "primes " + std::to_string(primes.size()) + " z " + std::to_string(sel.z.get_d()));

  // one presentation per distinct candidate order
  std::map<std::vector<u64>, std::size_t> by_order;
  std::map<u64, std::size_t> by_v;
  std::vector<PolycyclicPresentation> pres;
  auto presentation_index = [&](u64 v) {
    auto it = by_v.find(v);
    if (it != by_v.end()) return it->second;
    std::vector<u64> key = presentation_order(D, v, *db);
    if (config.presentation_norms) key.insert(key.begin(), config.presentation_norms->begin(), config.presentation_norms->end());
    auto jt = by_order.find(key);
    std::size_t k;
    if (jt != by_order.end()) {
      k = jt->second;
    } else {
      k = pres.size();
      pres.push_back(presentation_for(D, v, *db, config.presentation_norms));
      by_order.emplace(key, k);
      std::ostringstream os;
      os << "presentation for v=" << v << ":";
      for (std::size_t i = 0; i < pres[k].norms.size(); ++i) os << " " << pres[k].norms[i] << "^" << pres[k].rel_orders[i];
      note(config, os.str());
    }
    by_v.emplace(v, k);
    return k;
  };

  unsigned jobs = std::max(1u, config.jobs);
  for (;;) {
    std::size_t n = primes.size();
    std::vector<u64> pvals;
    std::vector<std::size_t> pidx;
    for (const auto& c : primes) {
      pvals.push_back(c.p);
      pidx.push_back(presentation_index(c.v));
    }
    CrtAccumulator acc(D, pvals, config.P, h + 1, config.crt);
    res.path = acc.path();

    BoundedQueue<Outcome> queue(2 * jobs + 2);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};
    auto worker = [&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        Outcome o;
        o.index = i;
        o.stats.p = primes[i].p;
        if (stop.load()) {
          o.failed = true;
          queue.push(std::move(o));
          continue;
        }
        Rng rng(config.seed, primes[i].p);
        for (;;) {
          ++o.stats.attempts;
          try {
            o.coeffs = hilbert_mod_p(primes[i], pres[pidx[i]], *db, rng, &o.stats);
            break;
          } catch (const std::logic_error&) {
            o.error = std::current_exception();
            break;
          } catch (const std::runtime_error&) {
            if (o.stats.attempts >= config.retry_budget) {
              o.failed = true;
              break;
            }
          }
        }
        queue.push(std::move(o));
      }
    };
    std::vector<std::thread> threads;
    for (unsigned w = 0; w < jobs; ++w) threads.emplace_back(worker);

    res.stats.assign(n, PrimeStats{});
    std::vector<std::size_t> failed;
    std::exception_ptr error;
    for (std::size_t got = 0; got < n; ++got) {
      Outcome o = queue.pop();
      res.stats[o.index] = o.stats;
      if (error) continue;
      if (o.error) {
        error = o.error;
        stop = true;
      } else if (o.failed) {
        failed.push_back(o.index);
      } else {
        acc.add(o.index, o.coeffs);
      }
    }
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);

    if (failed.empty()) {
      res.coeffs = acc.finish();
      break;
    }
    std::sort(failed.begin(), failed.end());
    for (auto it = failed.rbegin(); it != failed.rend(); ++it) {
      res.replaced.push_back(primes[*it].p);
      note(config, "dropping p=" + std::to_string(primes[*it].p) + " after " +
                       std::to_string(config.retry_budget) + " attempts");
      primes.erase(primes.begin() + static_cast<long>(*it));
    }
    double bits = 0;
    for (const auto& c : primes) bits += c.lg_p;
    while (!(bits > static_cast<double>(hb.b))) {
      if (next_ranked >= sel.ranked.size()) throw std::runtime_error("ran out of replacement primes");
      primes.push_back(sel.ranked[next_ranked++]);
      bits += primes.back().lg_p;
    }
  }
  res.primes = primes;
  res.presentations = pres.size();
  BigInt lead = res.coeffs[h];
  if (config.P > 0 ? lead != BigInt(1) % config.P : lead != 1) throw std::logic_error("hilbert_class_poly: result not monic");
  return res;
}

std::optional<std::pair<u64, u64>> cornacchia4(i64 D, u64 q) {
  if (D >= 0 || q < 3 || !is_prime(q)) return std::nullopt;
  u64 d = static_cast<u64>(-D);
  if (d > 4 * static_cast<u128>(q)) return std::nullopt;
  i64 qm = static_cast<i64>(q);
  u64 Dmod = static_cast<u64>(((D % qm) + qm) % qm);
  if (Dmod == 0) return std::nullopt;
  auto r = sqrt_mod(Dmod, q);
  if (!r) return std::nullopt;
  u64 x0 = *r;
  if ((x0 & 1) != (d & 1)) x0 = q - x0;
  u128 a = 2 * static_cast<u128>(q), b = x0;
  u128 four_q = 4 * static_cast<u128>(q);
  u128 lim = 0;
  {
    // lim = floor(2 sqrt(q))
    BigInt s = sqrt(BigInt(static_cast<unsigned long>(q)) * 4);
    lim = s.get_ui();
  }
  while (b > lim) {
    u128 t = a % b;
    a = b;
    b = t;
  }
  u128 rest = four_q - b * b;
  if (rest % d) return std::nullopt;
  u128 c = rest / d;
  if (c > ~u64{0}) return std::nullopt;
  u64 v = isqrt(static_cast<u64>(c));
  if (static_cast<u128>(v) * v != c) return std::nullopt;
  return std::make_pair(static_cast<u64>(b), v);
}

CmCurve cm_construct(i64 D, u64 q, int sign, const JobConfig& base) {
  if (q < 5 || !is_prime(q)) throw std::invalid_argument("cm_construct: q must be a prime > 3");
  if (sign != 1 && sign != -1) throw std::invalid_argument("cm_construct: sign must be +1 or -1");
  auto tv = cornacchia4(D, q);
  if (!tv) throw std::runtime_error("cm_construct: 4q = t^2 - v^2 D has no solution");
  CmCurve out;
  out.q = q;
  out.t = tv->first;
  out.v = tv->second;
  out.N = BigInt(static_cast<unsigned long>(q)) + 1;
  if (sign > 0) out.N -= BigInt(static_cast<unsigned long>(out.t));
  else out.N += BigInt(static_cast<unsigned long>(out.t));

  JobConfig cfg = base;
  cfg.D = D;
  cfg.P = BigInt(static_cast<unsigned long>(q));
  HilbertResult H = hilbert_class_poly(cfg);
  PrimeField F(q);
  ModPoly f;
  for (const auto& c : H.coeffs) f.push_back(F.from_big(c));
  poly_trim(f);
  Rng rng(base.seed, q);
  auto j = find_one_root(F, f, rng);
  if (!j) throw std::logic_error("cm_construct: H_D has no root mod q");
  out.j = *j;
  Curve E = select_twist(F, curve_from_j(F, *j), out.N, rng);

  FactoredInteger NF = factorize(out.N);
  BigInt L = 1;
  for (int i = 0; i < 20; ++i) {
    Point Q = random_point(F, E, rng);
    if (!scalar_mul(F, E, out.N, Q).inf) throw std::logic_error("cm_construct: N Q != 0");
    auto ord = fast_order(F, E, Q, NF);
    if (!ord) throw std::logic_error("cm_construct: point order does not divide N");
    mpz_lcm(L.get_mpz_t(), L.get_mpz_t(), ord->n.get_mpz_t());
  }
  // #E is the only multiple of L in the Hasse interval, or counted directly
  BigInt lo = BigInt(static_cast<unsigned long>(q)) + 1 - 2 * sqrt(BigInt(static_cast<unsigned long>(q))) - 1;
  BigInt hi = BigInt(static_cast<unsigned long>(q)) + 1 + 2 * sqrt(BigInt(static_cast<unsigned long>(q))) + 1;
  BigInt first = (lo + L - 1) / L * L;
  bool unique = first + L > hi;
  if (!unique) {
    if (q > (u64{1} << 24)) throw std::runtime_error("cm_construct: could not certify the group order");
    if (BigInt(static_cast<unsigned long>(count_points_naive(F, E))) != out.N)
      throw std::logic_error("cm_construct: wrong group order");
  }
  out.A = F.to_u64(E.A);
  out.B = F.to_u64(E.B);
  return out;
}

std::string format_result(const HilbertResult& r) {
  std::ostringstream os;
  os << "D " << r.D << " P " << r.P.get_str() << " h " << r.h << "\n";
  for (std::size_t k = 0; k < r.coeffs.size(); ++k) os << k << " " << r.coeffs[k].get_str() << "\n";
  return os.str();
}

}  // namespace hcp
