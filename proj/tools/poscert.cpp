// poscert: command-line front end.
//
// Exit status: 0 certified positive (or the requested artifact was produced),
// 2 verification failed without a malfunction, 1 error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "poscert/approx.hpp"
#include "poscert/eigen.hpp"
#include "poscert/embedding.hpp"
#include "poscert/existence.hpp"
#include "poscert/fem_eig.hpp"
#include "poscert/pipeline.hpp"
#include "poscert/positivity.hpp"

using namespace poscert;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct ProblemFlags {
  std::string kind = "lane-emden";
  int p = 3;
  std::string eps = "1/10";
  int N = 30;

  void add(CLI::App* app, bool with_order = true) {
    app->add_option("--problem", kind, "lane-emden or allen-cahn")->capture_default_str();
    app->add_option("--p", p, "Lane-Emden exponent (odd)")->capture_default_str();
    app->add_option("--eps", eps, "Allen-Cahn epsilon, a rational such as 1/10")->capture_default_str();
    if (with_order) app->add_option("--N,--order", N, "Legendre order per variable")->capture_default_str();
  }
  [[nodiscard]] ProblemSpec spec(int order) const {
    const ProblemKind k = parse_problem_kind(kind);
    ProblemSpec s = k == ProblemKind::LaneEmden ? ProblemSpec::lane_emden(p, order)
                                                : ProblemSpec::allen_cahn(parse_rational(eps), order);
    s.validate();
    return s;
  }
};

void emit(const json& j, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::IoError, "cannot write " + out);
  f << j.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::IoError, "cannot open " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

json interval_json(const Interval& x) { return json::array({to_hex(x.lo()), to_hex(x.hi())}); }

Interval parse_tau(const std::string& s, const SpectralFn& u, const ProblemSpec& pr) {
  if (s == "auto") return choose_tau(u, pr);
  try {
    return parse_interval(s);
  } catch (const Error&) {
    return to_interval(parse_rational(s));
  }
}

Lambda1Data comparison_data(const ProblemSpec& pr, const std::string& offset, const std::string& h,
                            const std::string& table) {
  if (pr.kind == ProblemKind::LaneEmden) return lambda1_unit_square_data();
  const FrameDomain dom{parse_rational(offset)};
  const Rational hh = parse_rational(h);
  const FemEnclosure fem = lambda1_enclosure_fem(mesh_frame(dom, hh), interpolation_constant(hh, table));
  return Lambda1Data{dom, fem.enclosure.lower, fem.enclosure.upper, "P1 upper / CR lower, h = " + to_string(hh)};
}

int positivity_exit(const PositivityCertificate& c) {
  return c.verdict && c.radius_source == "existence" ? 0 : 2;
}

void print_assumptions(const PositivityCertificate& c) {
  for (const auto& a : c.assumptions)
    std::cerr << "assumption " << a.id << ": " << (a.pass ? "pass" : "FAIL") << "  " << a.evidence << '\n';
  std::cerr << "verdict: " << (c.verdict ? "positive" : "not certified") << " (radius from " << c.radius_source
            << ")\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Certified positivity of semilinear elliptic solutions on the unit square"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");  // -h would clash with --h
  app.set_help_all_flag("--help-all");

  // approx
  auto* approx_cmd = app.add_subcommand("approx", "Newton-Galerkin approximation u_hat");
  ProblemFlags approx_pf;
  approx_pf.add(approx_cmd);
  std::string approx_init, approx_out = "u_hat.txt", approx_csv;
  int approx_csv_n = 64;
  approx_cmd->add_option("--init", approx_init, "start from this u_hat file")->check(CLI::ExistingFile);
  approx_cmd->add_option("-o,--out", approx_out, "u_hat file")->capture_default_str();
  approx_cmd->add_option("--csv", approx_csv, "also write a grid sample as CSV");
  approx_cmd->add_option("--csv-n", approx_csv_n, "grid cells per side for --csv")->capture_default_str();

  // constants
  auto* const_cmd = app.add_subcommand("constants", "Embedding constants C_p and L-infinity constants");
  std::string const_tau = "0";
  std::vector<int> const_ps{2, 3, 4, 6, 12, 24};
  std::string const_out;
  const_cmd->add_option("--tau", const_tau, "shift tau (rational or hex interval)")->capture_default_str();
  const_cmd->add_option("--p", const_ps, "exponents")->capture_default_str();
  const_cmd->add_option("-o,--out", const_out, "JSON output (default stdout)");

  // eig
  auto* eig_cmd = app.add_subcommand("eig", "Enclosures of the linearized eigenproblem");
  ProblemFlags eig_pf;
  eig_pf.add(eig_cmd);
  std::string eig_u, eig_tau = "auto", eig_out, eig_table;
  int eig_count = 5;
  eig_cmd->add_option("--u", eig_u, "u_hat file (default: u_hat = 0 of the given order)")->check(CLI::ExistingFile);
  eig_cmd->add_option("--tau", eig_tau, "auto, a rational, or a hex interval")->capture_default_str();
  eig_cmd->add_option("--count", eig_count, "number of eigenvalues")->capture_default_str();
  eig_cmd->add_option("--table", eig_table, "C_N^0 table");
  eig_cmd->add_option("-o,--out", eig_out, "JSON output (default stdout)");

  // fem-eig
  auto* fem_cmd = app.add_subcommand("fem-eig", "lambda_1 of the unit square minus an inner square");
  std::string fem_a = "0", fem_h = "1/32", fem_out, fem_mesh, fem_table;
  fem_cmd->add_option("--inner-offset", fem_a, "a in (0,1)^2 \\ [a, 1-a]^2; 0 for the full square")
      ->capture_default_str();
  fem_cmd->add_option("--h", fem_h, "mesh size, 1/h integer")->capture_default_str();
  fem_cmd->add_option("--mesh", fem_mesh, "write the mesh listing here");
  fem_cmd->add_option("--table", fem_table, "kappa table");
  fem_cmd->add_option("-o,--out", fem_out, "JSON output (default stdout)");

  // verify
  auto* ver_cmd = app.add_subcommand("verify", "Existence certificate for u_hat");
  ProblemFlags ver_pf;
  ver_pf.add(ver_cmd, false);
  std::string ver_u, ver_out, ver_table;
  int ver_order = 0, ver_limit = 200;
  ver_cmd->add_option("--u", ver_u, "u_hat file")->required()->check(CLI::ExistingFile);
  ver_cmd->add_option("--eig-order", ver_order, "Legendre order of the eigenproblem (0: order of u_hat)");
  ver_cmd->add_option("--exact-degree-limit", ver_limit, "largest degree for exact L^q norms")->capture_default_str();
  ver_cmd->add_option("--table", ver_table, "C_N^0 table");
  ver_cmd->add_option("-o,--out", ver_out, "certificate (default stdout)");

  // certify
  auto* cert_cmd = app.add_subcommand("certify", "Positivity certificate from u_hat and an existence certificate");
  ProblemFlags cert_pf;
  cert_pf.add(cert_cmd, false);
  std::string cert_u, cert_ex, cert_out, cert_a = "1/64", cert_h = "1/128", cert_table;
  std::optional<double> cert_radius;
  int cert_depth = 12, cert_refine = 2;
  bool cert_summary = false;
  cert_cmd->add_option("--u", cert_u, "u_hat file")->required()->check(CLI::ExistingFile);
  auto* ex_opt = cert_cmd->add_option("--existence", cert_ex, "existence certificate")->check(CLI::ExistingFile);
  cert_cmd->add_option("--radius", cert_radius, "assumed L-infinity radius instead of a certificate (never exit 0)")
      ->excludes(ex_opt);
  cert_cmd->add_option("--depth", cert_depth, "quadtree depth")->capture_default_str();
  cert_cmd->add_option("--min-refine", cert_refine, "extra bisection levels for the minimum")->capture_default_str();
  cert_cmd->add_option("--inner-offset", cert_a, "Allen-Cahn comparison frame")->capture_default_str();
  cert_cmd->add_option("--h", cert_h, "mesh size for the frame eigenvalue")->capture_default_str();
  cert_cmd->add_option("--table", cert_table, "kappa table");
  cert_cmd->add_flag("--summary", cert_summary, "omit the box lists");
  cert_cmd->add_option("-o,--out", cert_out, "certificate (default stdout)");

  // run
  auto* run_cmd = app.add_subcommand("run", "Full pipeline");
  std::string run_config, run_mode, run_dir, run_kind, run_eps;
  std::optional<int> run_p, run_N, run_depth, run_eig_order;
  run_cmd->add_option("-c,--config", run_config, "TOML run file")->check(CLI::ExistingFile);
  run_cmd->add_option("--mode", run_mode, "desk or paper-exact");
  run_cmd->add_option("--problem", run_kind, "lane-emden or allen-cahn");
  run_cmd->add_option("--p", run_p, "Lane-Emden exponent");
  run_cmd->add_option("--eps", run_eps, "Allen-Cahn epsilon");
  run_cmd->add_option("--N", run_N, "Legendre order");
  run_cmd->add_option("--depth", run_depth, "quadtree depth");
  run_cmd->add_option("--eig-order", run_eig_order, "Legendre order of the eigenproblem");
  run_cmd->add_option("--out-dir", run_dir, "directory for artifacts");

  // report
  auto* rep_cmd = app.add_subcommand("report", "Tables from run directories, without recomputation");
  std::vector<std::string> rep_dirs;
  bool rep_json = false, rep_recheck = false;
  rep_cmd->add_option("dirs", rep_dirs, "run directories")->required();
  rep_cmd->add_flag("--json", rep_json, "machine-readable rows");
  rep_cmd->add_flag("--recheck", rep_recheck, "re-verify stored certificates against u_hat.txt");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*approx_cmd) {
      const ProblemSpec pr = approx_pf.spec(approx_pf.N);
      std::optional<SpectralFn> init;
      if (!approx_init.empty()) {
        SpectralFn f = load_spectral(approx_init);
        init = f.order() < pr.N ? f.padded(pr.N) : f;
      }
      const auto [u, rep] = solve(pr, init);
      save_spectral(approx_out, u);
      if (!approx_csv.empty()) {
        std::ofstream csv(approx_csv);
        if (!csv) throw Error(ErrorCode::IoError, "cannot write " + approx_csv);
        csv.precision(17);
        csv << "x,y,u\n";
        for (int i = 0; i <= approx_csv_n; ++i)
          for (int j = 0; j <= approx_csv_n; ++j) {
            const double x = static_cast<double>(i) / approx_csv_n, y = static_cast<double>(j) / approx_csv_n;
            csv << x << ',' << y << ',' << u(x, y) << '\n';
          }
      }
      const auto [lo, hi] = sample_range(u);
      emit({{"problem", problem_to_json(pr)},
            {"iterations", rep.iterations},
            {"step_norm", rep.step_norm},
            {"residual_norm", rep.residual_norm},
            {"converged", rep.converged},
            {"eps_path", rep.eps_path},
            {"sampled_min", lo},
            {"sampled_max", hi},
            {"u_hash", spectral_hash(u)},
            {"file", approx_out}},
           "-");
      return 0;
    }

    if (*const_cmd) {
      const Interval tau = [&] {
        try {
          return parse_interval(const_tau);
        } catch (const Error&) {
          return to_interval(parse_rational(const_tau));
        }
      }();
      const EmbeddingConstants ec(lambda1_unit_square(), tau);
      json cp = json::object();
      for (int p : const_ps) {
        const EmbeddingBound b = ec.get(p);
        cp[std::to_string(p)] = {{"enclosure", interval_json(b.value)}, {"upper", b.value.hi()}, {"source", b.source}};
      }
      const LinfConstants lc = linf_constants();
      emit({{"tau", interval_json(tau)},
            {"lambda1", interval_json(lambda1_unit_square())},
            {"C_p", cp},
            {"linf",
             {{"c0", interval_json(lc.c0)},
              {"c1", interval_json(lc.c1)},
              {"c2", interval_json(lc.c2)},
              {"gamma", {interval_json(lc.gamma0), interval_json(lc.gamma1), interval_json(lc.gamma2)}}}}},
           const_out);
      return 0;
    }

    if (*eig_cmd) {
      SpectralFn u = eig_u.empty() ? SpectralFn(eig_pf.N) : load_spectral(eig_u);
      const int N = std::max(eig_pf.N, u.order());
      const ProblemSpec pr = eig_pf.spec(u.order());
      const Interval tau = parse_tau(eig_tau, u, pr);
      const Gevp g = assemble_gevp(u, pr, tau, N);
      const std::vector<Interval> disc = enclose_gevp(g.A, g.B, eig_count);
      const double C = projection_constant(N, tau, eig_table);
      const double W = weight_sup(pr, tau, max_abs(u));
      json arr = json::array();
      for (std::size_t k = 0; k < disc.size(); ++k) {
        const double low = lower_bounds({disc[k].lo()}, C, W)[0];
        arr.push_back({{"k", k + 1},
                       {"discrete", interval_json(disc[k])},
                       {"lower", to_hex(low)},
                       {"upper", to_hex(disc[k].hi())},
                       {"decimal", {low, disc[k].hi()}}});
      }
      emit({{"order", N}, {"tau", interval_json(tau)}, {"C", to_hex(C)}, {"weight_sup", to_hex(W)}, {"eigenvalues", arr}},
           eig_out);
      return 0;
    }

    if (*fem_cmd) {
      const FrameDomain dom{parse_rational(fem_a)};
      const Rational h = parse_rational(fem_h);
      const TriMesh mesh = mesh_frame(dom, h);
      if (!fem_mesh.empty()) {
        std::ofstream m(fem_mesh);
        if (!m) throw Error(ErrorCode::IoError, "cannot write " + fem_mesh);
        write_mesh(m, mesh);
      }
      const FemEnclosure fem = lambda1_enclosure_fem(mesh, interpolation_constant(h, fem_table));
      emit({{"inner_offset", to_string(dom.a)},
            {"h", to_string(h)},
            {"lower", to_hex(fem.enclosure.lower)},
            {"upper", to_hex(fem.enclosure.upper)},
            {"decimal", {fem.enclosure.lower, fem.enclosure.upper}},
            {"lambda_cr_lower", to_hex(fem.lambda_cr_lower)},
            {"C_h", to_hex(fem.C_h)},
            {"kappa", to_hex(fem_kappa(fem_table))},
            {"triangles", mesh.triangles.size()},
            {"p1_dofs", fem.p1_dofs},
            {"cr_dofs", fem.cr_dofs},
            {"bandwidth", fem.bandwidth}},
           fem_out);
      return 0;
    }

    if (*ver_cmd) {
      const SpectralFn u = load_spectral(ver_u);
      const ProblemSpec pr = ver_pf.spec(u.order());
      try {
        const Interval tau = choose_tau(u, pr);
        const InverseBound inv = inverse_bound(u, pr, tau, ver_table, ver_order);
        ExistenceOptions eo;
        eo.exact_degree_limit = ver_limit;
        eo.projection_table = ver_table;
        const ExistenceCertificate c = verify_existence(u, pr, inv, eo);
        emit(to_json(c), ver_out);
        std::cerr << "r1 = " << c.alpha << ", r2 = " << c.r2 << '\n';
        return 0;
      } catch (const Error& e) {
        if (!is_verification_failure(e.code())) throw;
        std::cerr << "not verified: " << e.what() << '\n';
        return 2;
      }
    }

    if (*cert_cmd) {
      const SpectralFn u = load_spectral(cert_u);
      const ProblemSpec pr = cert_pf.spec(u.order());
      CertifyOptions co;
      co.classify.max_depth = cert_depth;
      co.min_refine = cert_refine;
      if (cert_ex.empty() && !cert_radius) throw Error(ErrorCode::InvalidConfig, "need --existence or --radius");
      try {
        const Lambda1Data lam = comparison_data(pr, cert_a, cert_h, cert_table);
        const PositivityCertificate c =
            cert_radius ? assess(pr, u, *cert_radius, lam, co)
                        : certify(pr, u, existence_from_json(read_json_file(cert_ex)), lam, co);
        emit(to_json(c, !cert_summary), cert_out);
        print_assumptions(c);
        return positivity_exit(c);
      } catch (const Error& e) {
        if (!is_verification_failure(e.code())) throw;
        std::cerr << "not verified: " << e.what() << '\n';
        return 2;
      }
    }

    if (*run_cmd) {
      RunConfig cfg;
      if (!run_config.empty()) {
        cfg = load_config(run_config);
      } else {
        ProblemFlags pf;
        if (!run_kind.empty()) pf.kind = run_kind;
        if (!run_eps.empty()) pf.eps = run_eps;
        if (run_p) pf.p = *run_p;
        cfg = default_config(pf.spec(30), run_mode.empty() ? RunMode::Desk : parse_run_mode(run_mode));
      }
      if (run_N) cfg.problem.N = *run_N;
      if (run_depth) cfg.depth = *run_depth;
      if (run_eig_order) cfg.eig_order = *run_eig_order;
      if (!run_dir.empty()) cfg.output_dir = run_dir;
      const Report r = run_pipeline(cfg);
      std::cout << render_table({r});
      for (const auto& t : r.timings) std::cerr << t.stage << ": " << t.seconds << " s\n";
      if (!r.failed_stage.empty()) std::cerr << "stage " << r.failed_stage << " failed: " << r.error << '\n';
      if (r.positivity) print_assumptions(*r.positivity);
      return exit_code(r);
    }

    if (*rep_cmd) {
      std::vector<Report> reports;
      bool ok = true;
      for (const auto& d : rep_dirs) {
        Report r = load_report(d);
        if (rep_recheck) {
          const fs::path up = fs::path(d) / "u_hat.txt";
          bool good = true;
          if (r.existence) good = good && recheck(*r.existence);
          if (r.positivity) {
            if (!fs::exists(up)) throw Error(ErrorCode::IoError, "no u_hat.txt in " + d);
            good = good && recheck(*r.positivity, load_spectral(up.string()), r.config.min_refine);
          }
          std::cerr << d << ": recheck " << (good ? "ok" : "FAILED") << '\n';
          ok = ok && good;
        }
        reports.push_back(std::move(r));
      }
      if (rep_json)
        std::cout << table_json(reports).dump(2) << '\n';
      else
        std::cout << render_table(reports);
      return ok ? 0 : 2;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_verification_failure(e.code()) ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
