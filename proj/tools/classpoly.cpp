#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "hcp/pipeline.hpp"

using namespace hcp;

namespace {

const char* side_name(PlanSide s) {
  switch (s) {
    case PlanSide::N0: return "N0";
    case PlanSide::N1: return "N1";
    default: return "both";
  }
}

BigInt parse_big(const std::string& s) {
  BigInt x;
  if (x.set_str(s, 10) != 0) throw std::invalid_argument("not an integer: " + s);
  return x;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hilbert class polynomials mod P by the CRT method, and CM curves"};
  app.require_subcommand(0, 1);

  i64 D = 0;
  std::string Pstr;
  unsigned jobs = 1;
  u64 seed = 0;
  std::string phi_db, out_path;
  double k = 2, delta = 0.5, large_bits = 0;
  bool verbose = false;
  app.add_option("-D", D, "discriminant");
  app.add_option("-P", Pstr, "modulus, 0 for the coefficients over Z");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "random seed");
  app.add_option("--phi-db", phi_db, "modular polynomial database");
  app.add_option("--out", out_path, "output file");
  app.add_option("--k", k, "prime selection factor k");
  app.add_option("--delta", delta, "growth factor for z");
  app.add_option("--crt-large-bits", large_bits, "lg P above which the hybrid CRT is used");
  app.add_flag("-v,--verbose", verbose, "progress on stderr");

  auto* cm = app.add_subcommand("cm", "curve over F_q with a prescribed number of points");
  i64 cm_D = 0;
  u64 cm_q = 0;
  std::string cm_sign = "+";
  cm->add_option("-D", cm_D, "discriminant")->required();
  cm->add_option("-q", cm_q, "prime")->required();
  cm->add_option("--sign", cm_sign, "N = q + 1 - t (+) or q + 1 + t (-)")->check(CLI::IsMember({"+", "-"}));

  auto* pr = app.add_subcommand("presentation", "polycyclic presentation of cl(D)");
  i64 pr_D = 0;
  std::vector<u64> pr_norms;
  bool pr_db = false;
  pr->add_option("-D", pr_D, "discriminant")->required();
  pr->add_option("--norms", pr_norms, "candidate norms in order");
  pr->add_flag("--db", pr_db, "use the database primes ordered by walking cost");

  auto* sp = app.add_subcommand("select-primes", "CRT primes for D");
  i64 sp_D = 0;
  u64 sp_b = 0;
  double sp_k = 2, sp_delta = 0.5;
  sp->add_option("-D", sp_D, "discriminant")->required();
  sp->add_option("--b", sp_b, "bits required (default: height bound)");
  sp->add_option("--k", sp_k, "selection factor k");
  sp->add_option("--delta", sp_delta, "growth factor for z");

  auto* ts = app.add_subcommand("trace-search", "find a curve with trace +-t over F_p");
  u64 ts_p = 0, ts_t = 0, ts_seed = 0;
  ts->add_option("-p", ts_p, "prime")->required();
  ts->add_option("-t", ts_t, "trace")->required();
  ts->add_option("--seed", ts_seed, "random seed");

  auto* pc = app.add_subcommand("phi-check", "verify the modular polynomial database");
  std::string pc_path;
  pc->add_option("--phi-db", pc_path, "database file (default: built in)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cm) {
      JobConfig base;
      base.jobs = jobs;
      base.seed = seed;
      base.phi_db = phi_db;
      CmCurve c = cm_construct(cm_D, cm_q, cm_sign == "+" ? 1 : -1, base);
      std::cout << c.A << " " << c.B << " " << c.q << " " << c.N.get_str() << "\n";
      return 0;
    }
    if (*pr) {
      std::vector<u64> cands = pr_norms;
      if (cands.empty()) cands = pr_db ? presentation_order(pr_D, 1, ModPolyDb::builtin()) : default_candidates(pr_D);
      PolycyclicPresentation p = polycyclic_presentation(pr_D, cands);
      std::cout << "D " << p.D << "\nh " << p.h << "\n";
      for (std::size_t i = 0; i < p.norms.size(); ++i)
        std::cout << p.norms[i] << " " << p.rel_orders[i] << " " << p.relations[i] << "\n";
      return 0;
    }
    if (*sp) {
      SelectionConfig sc;
      sc.k = sp_k;
      sc.delta = sp_delta;
      u64 b = sp_b ? sp_b : height_bound(sp_D).b;
      Selection sel = select_primes(sp_D, b, sc);
      for (const auto& c : sel.primes)
        std::cout << c.p << " " << c.t << " " << c.v << " " << c.plan.constraint.label() << "/"
                  << side_name(c.plan.side) << " " << c.ratio << "\n";
      return 0;
    }
    if (*ts) {
      PrimeField F(ts_p);
      Rng rng(ts_seed);
      TraceSearchResult r = find_trace_curve(F, ts_t, rank_torsion(ts_p, ts_t), rng);
      std::cout << "j " << F.to_u64(r.j) << " curves " << r.curves_tested << "\n";
      return 0;
    }
    if (*pc) {
      ModPolyDb db = pc_path.empty() ? ModPolyDb::builtin() : ModPolyDb::load(pc_path);
      std::cout << "ok levels";
      for (u64 l : db.levels()) std::cout << " " << l;
      std::cout << "\n";
      return 0;
    }

    if (D == 0 || Pstr.empty()) {
      std::cerr << "need -D and -P (or a subcommand)\n" << app.help();
      return 2;
    }
    JobConfig cfg;
    cfg.D = D;
    cfg.P = parse_big(Pstr);
    cfg.jobs = jobs;
    cfg.seed = seed;
    cfg.phi_db = phi_db;
    cfg.selection.k = k;
    cfg.selection.delta = delta;
    cfg.crt.large_bits = large_bits;
    if (verbose) cfg.log = [](const std::string& s) { std::cerr << s << "\n"; };
    HilbertResult r = hilbert_class_poly(cfg);
    std::string text = format_result(r);
    if (out_path.empty()) {
      std::cout << text;
    } else {
      std::ofstream f(out_path);
      if (!f) throw std::runtime_error("cannot write " + out_path);
      f << text;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
