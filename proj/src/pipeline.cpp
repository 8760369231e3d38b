#include "poscert/pipeline.hpp"

#include <cfenv>
#include <cfloat>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <toml.hpp>

#include "poscert/approx.hpp"
#include "poscert/eigen.hpp"

namespace poscert {

namespace fs = std::filesystem;

std::string to_string(RunMode m) { return m == RunMode::Desk ? "desk" : "paper-exact"; }

RunMode parse_run_mode(const std::string& s) {
  if (s == "desk") return RunMode::Desk;
  if (s == "paper-exact" || s == "paper") return RunMode::PaperExact;
  throw Error(ErrorCode::InvalidConfig, "unknown mode: " + s);
}

void RunConfig::validate() const {
  try {
    problem.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
  if (depth < 1 || depth > 30) throw Error(ErrorCode::InvalidConfig, "depth must be in [1, 30]");
  if (min_refine < 0 || min_refine > 8) throw Error(ErrorCode::InvalidConfig, "min_refine must be in [0, 8]");
  if (eig_order != 0 && eig_order < problem.N) throw Error(ErrorCode::InvalidConfig, "eigen order below N");
  if (exact_degree_limit < 0) throw Error(ErrorCode::InvalidConfig, "exact_degree_limit must be >= 0");
  if (problem.kind == ProblemKind::AllenCahn && !(fem_h > 0))
    throw Error(ErrorCode::InvalidConfig, "Allen-Cahn runs need a positive mesh size");
  for (const std::string* path : {&projection_table, &fem_table, &init_path})
    if (!path->empty() && !fs::exists(*path)) throw Error(ErrorCode::InvalidConfig, "no such file: " + *path);
}

RunConfig default_config(const ProblemSpec& problem, RunMode mode) {
  RunConfig c;
  c.problem = problem;
  c.mode = mode;
  if (mode == RunMode::Desk) {
    c.problem.N = 30;
    c.omega_hat.a = Rational(1, 64);
    c.fem_h = Rational(1, 128);
  } else {
    if (problem.kind == ProblemKind::LaneEmden)
      c.problem.N = 150;
    else
      c.problem.N = problem.eps < Rational(1, 20) ? 80 : 60;
    c.omega_hat.a = Rational(5, 512);
    c.fem_h = Rational(1, 1024);
  }
  if (problem.kind == ProblemKind::LaneEmden) {
    c.omega_hat.a = 0;
    c.fem_h = 0;
  }
  return c;
}

namespace {

std::string resolve(const std::string& p, const std::string& base) {
  if (p.empty()) return p;
  const fs::path path(p);
  return path.is_absolute() ? p : (fs::path(base) / path).lexically_normal().string();
}

}  // namespace

RunConfig config_from_toml(const std::string& text, const std::string& base_dir) {
  toml::table t;
  try {
    t = toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at " << e.source().begin;
    throw Error(ErrorCode::ParseError, os.str());
  }
  ProblemSpec pr;
  const auto prob = t["problem"];
  pr.kind = parse_problem_kind(prob["kind"].value_or(std::string("lane-emden")));
  pr.p = prob["p"].value_or(3);
  pr.eps = parse_rational(prob["eps"].value_or(std::string("1/10")));
  const RunMode mode = parse_run_mode(t["mode"].value_or(std::string("desk")));
  RunConfig c = default_config(pr, mode);
  if (auto n = prob["N"].value<int>()) c.problem.N = *n;

  c.depth = t["positivity"]["depth"].value_or(c.depth);
  c.min_refine = t["positivity"]["min_refine"].value_or(c.min_refine);
  if (auto a = t["omega_hat"]["inner_offset"].value<std::string>()) c.omega_hat.a = parse_rational(*a);
  if (auto h = t["omega_hat"]["h"].value<std::string>()) c.fem_h = parse_rational(*h);
  c.fem_table = resolve(t["omega_hat"]["fem_table"].value_or(std::string()), base_dir);
  c.eig_order = t["eigen"]["order"].value_or(c.eig_order);
  c.projection_table = resolve(t["eigen"]["projection_table"].value_or(std::string()), base_dir);
  c.exact_degree_limit = t["existence"]["exact_degree_limit"].value_or(c.exact_degree_limit);
  c.init_path = resolve(t["approx"]["init"].value_or(std::string()), base_dir);
  c.output_dir = resolve(t["output"]["dir"].value_or(std::string()), base_dir);
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_toml(ss.str(), fs::path(path).parent_path().string());
}

nlohmann::json to_json(const RunConfig& c) {
  return {{"problem", problem_to_json(c.problem)},
          {"mode", to_string(c.mode)},
          {"depth", c.depth},
          {"min_refine", c.min_refine},
          {"inner_offset", to_string(c.omega_hat.a)},
          {"h", to_string(c.fem_h)},
          {"eig_order", c.eig_order},
          {"exact_degree_limit", c.exact_degree_limit},
          {"projection_table", c.projection_table.empty() ? default_projection_table() : c.projection_table},
          {"fem_table", c.fem_table.empty() ? default_fem_table() : c.fem_table},
          {"init", c.init_path},
          {"output_dir", c.output_dir}};
}

RunConfig config_from_json(const nlohmann::json& j) {
  try {
    RunConfig c;
    c.problem = problem_from_json(j.at("problem"));
    c.mode = parse_run_mode(j.at("mode").get<std::string>());
    c.depth = j.at("depth").get<int>();
    c.min_refine = j.value("min_refine", 2);
    c.omega_hat.a = parse_rational(j.at("inner_offset").get<std::string>());
    c.fem_h = parse_rational(j.at("h").get<std::string>());
    c.eig_order = j.value("eig_order", 0);
    c.exact_degree_limit = j.value("exact_degree_limit", 200);
    c.projection_table = j.value("projection_table", std::string());
    c.fem_table = j.value("fem_table", std::string());
    c.init_path = j.value("init", std::string());
    c.output_dir = j.value("output_dir", std::string());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run config: ") + e.what());
  }
}

nlohmann::json toolchain_attestation() {
  nlohmann::json j;
#if defined(__clang__)
  j["compiler"] = std::string("clang ") + __clang_version__;
#elif defined(__GNUC__)
  j["compiler"] = std::string("gcc ") + __VERSION__;
#else
  j["compiler"] = "unknown";
#endif
  j["cplusplus"] = static_cast<long>(__cplusplus);
  j["flt_eval_method"] = FLT_EVAL_METHOD;
  j["rounding_mode_nearest"] = std::fegetround() == FE_TONEAREST;
  // A contracted a*b - c would return the exact residual of the product
  // instead of zero.
  volatile double a = 1.0 + 0x1p-30;
  const double prod = a * a;
  volatile double c = prod;
  j["fp_contract_off"] = (a * a - c) == 0.0;
  j["directed_rounding"] = rounding::add_up(1.0, 0x1p-60) > 1.0 && rounding::add_down(1.0, 0x1p-60) == 1.0;
  return j;
}

namespace {

void write_json(const std::string& dir, const std::string& name, const nlohmann::json& j) {
  if (dir.empty()) return;
  std::ofstream out(fs::path(dir) / name);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + name + " in " + dir);
  out << j.dump(2) << '\n';
}

nlohmann::json solve_json(const SolveReport& s) {
  return {{"iterations", s.iterations},
          {"step_norm", s.step_norm},
          {"residual_norm", s.residual_norm},
          {"converged", s.converged},
          {"eps_path", s.eps_path}};
}

nlohmann::json inverse_json(const InverseBound& inv) {
  nlohmann::json eigs = nlohmann::json::array();
  for (const auto& e : inv.eigs)
    eigs.push_back({{"k", e.k}, {"lower", to_hex(e.lower)}, {"upper", to_hex(e.upper)}});
  return {{"tau", {to_hex(inv.tau.lo()), to_hex(inv.tau.hi())}},
          {"max_abs_u", to_hex(inv.max_abs_u)},
          {"weight_sup", to_hex(inv.weight_sup)},
          {"C0", to_hex(inv.C0)},
          {"C", to_hex(inv.C)},
          {"M", inv.M},
          {"tail_lower", to_hex(inv.tail_lower)},
          {"mu0_lower", to_hex(inv.K.mu0_lower)},
          {"K", to_hex(inv.K.K)},
          {"eigs", eigs}};
}

nlohmann::json lambda1_json(const Lambda1Data& l, const FemEnclosure* fem) {
  nlohmann::json j{{"inner_offset", to_string(l.omega_hat.a)},
                   {"lower", to_hex(l.lower)},
                   {"upper", to_hex(l.upper)},
                   {"source", l.source}};
  if (fem) {
    j["lambda_cr_lower"] = to_hex(fem->lambda_cr_lower);
    j["C_h"] = to_hex(fem->C_h);
    j["p1_dofs"] = fem->p1_dofs;
    j["cr_dofs"] = fem->cr_dofs;
    j["bandwidth"] = fem->bandwidth;
  }
  return j;
}

}  // namespace

Report run_pipeline(const RunConfig& config) {
  config.validate();
  Report r;
  r.config = config;
  r.toolchain = toolchain_attestation();
  const std::string& dir = config.output_dir;
  if (!dir.empty()) fs::create_directories(dir);

  auto persist = [&] {
    write_json(dir, "report.json", to_json(r));
  };
  auto stage = [&](const std::string& name, const std::function<void()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      fn();
    } catch (const Error& e) {
      r.failed_stage = name;
      r.error_code = e.code();
      r.error = e.what();
    } catch (const std::exception& e) {
      r.failed_stage = name;
      r.error = e.what();
    }
    r.timings.push_back({name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
    persist();
    return r.failed_stage.empty();
  };

  write_json(dir, "config.json", to_json(config));
  const ProblemSpec& pr = config.problem;
  SpectralFn u;
  InverseBound inv;
  Lambda1Data lambda1;

  if (!stage("approx", [&] {
        if (!config.init_path.empty()) {
          SpectralFn init = load_spectral(config.init_path);
          if (init.order() < pr.N) init = init.padded(pr.N);
          if (init.order() != pr.N) throw Error(ErrorCode::DimensionMismatch, "init file order exceeds N");
          auto [v, rep] = newton(pr, init);
          u = std::move(v);
          r.solve = rep;
        } else {
          auto [v, rep] = solve(pr);
          u = std::move(v);
          r.solve = rep;
        }
        if (!dir.empty()) save_spectral((fs::path(dir) / "u_hat.txt").string(), u);
      }))
    return r;

  if (!stage("eigen", [&] {
        const Interval tau = choose_tau(u, pr);
        inv = inverse_bound(u, pr, tau, config.projection_table, config.eig_order);
        write_json(dir, "eigen.json", inverse_json(inv));
      }))
    return r;

  if (!stage("existence", [&] {
        ExistenceOptions eo;
        eo.exact_degree_limit = config.exact_degree_limit;
        eo.projection_table = config.projection_table;
        r.existence = verify_existence(u, pr, inv, eo);
        write_json(dir, "existence.json", to_json(*r.existence));
      }))
    return r;

  if (!stage("fem_eig", [&] {
        if (pr.kind == ProblemKind::LaneEmden) {
          lambda1 = lambda1_unit_square_data();
          write_json(dir, "lambda1.json", lambda1_json(lambda1, nullptr));
          return;
        }
        const TriMesh mesh = mesh_frame(config.omega_hat, config.fem_h);
        const FemEnclosure fem = lambda1_enclosure_fem(mesh, interpolation_constant(config.fem_h, config.fem_table));
        lambda1 = Lambda1Data{config.omega_hat, fem.enclosure.lower, fem.enclosure.upper,
                              "P1 upper / CR lower, h = " + to_string(config.fem_h)};
        write_json(dir, "lambda1.json", lambda1_json(lambda1, &fem));
      }))
    return r;

  stage("positivity", [&] {
    CertifyOptions co;
    co.classify.max_depth = config.depth;
    co.min_refine = config.min_refine;
    r.positivity = certify(pr, u, *r.existence, lambda1, co);
    r.verdict = r.positivity->verdict;
    write_json(dir, "positivity.json", to_json(*r.positivity));
  });
  persist();
  return r;
}

nlohmann::json to_json(const Report& r) {
  nlohmann::json t = nlohmann::json::array();
  for (const auto& s : r.timings) t.push_back({{"stage", s.stage}, {"seconds", s.seconds}});
  nlohmann::json j{{"type", "report"},
                   {"config", to_json(r.config)},
                   {"timings", t},
                   {"toolchain", r.toolchain},
                   {"failed_stage", r.failed_stage},
                   {"error", r.error},
                   {"verdict", r.verdict},
                   {"exit_code", exit_code(r)},
                   {"row", table_json({r})[0]}};
  if (r.error_code) j["error_code"] = std::string(to_string(*r.error_code));
  if (r.solve) j["solve"] = solve_json(*r.solve);
  return j;
}

namespace {

std::optional<nlohmann::json> read_json(const fs::path& p) {
  if (!fs::exists(p)) return std::nullopt;
  std::ifstream in(p);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + p.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, p.string() + ": " + e.what());
  }
}

std::optional<ErrorCode> parse_error_code(const std::string& s) {
  for (int k = 0; k <= static_cast<int>(ErrorCode::InvalidConfig); ++k)
    if (to_string(static_cast<ErrorCode>(k)) == s) return static_cast<ErrorCode>(k);
  return std::nullopt;
}

}  // namespace

Report load_report(const std::string& dir) {
  Report r;
  const fs::path d(dir);
  if (!fs::is_directory(d)) throw Error(ErrorCode::IoError, "not a run directory: " + dir);
  if (auto rep = read_json(d / "report.json")) {
    r.config = config_from_json(rep->at("config"));
    for (const auto& t : rep->at("timings")) r.timings.push_back({t.at("stage"), t.at("seconds")});
    r.toolchain = rep->value("toolchain", nlohmann::json::object());
    r.failed_stage = rep->value("failed_stage", std::string());
    r.error = rep->value("error", std::string());
    if (rep->contains("error_code")) r.error_code = parse_error_code(rep->at("error_code").get<std::string>());
  } else if (auto cfg = read_json(d / "config.json")) {
    r.config = config_from_json(*cfg);
  } else {
    throw Error(ErrorCode::IoError, "no report.json or config.json in " + dir);
  }
  if (auto ex = read_json(d / "existence.json")) r.existence = existence_from_json(*ex);
  if (auto po = read_json(d / "positivity.json")) {
    r.positivity = positivity_from_json(*po);
    r.verdict = r.positivity->verdict;
  }
  return r;
}

namespace {

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

std::string sci5(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.5e", x);
  return buf;
}

std::string status(const Report& r) {
  if (!r.failed_stage.empty())
    return "failed at " + r.failed_stage + (r.error_code ? " (" + std::string(to_string(*r.error_code)) + ")" : "");
  if (!r.positivity) return "incomplete";
  if (r.positivity->verdict) return "positive";
  for (const auto& a : r.positivity->assumptions)
    if (!a.pass) return "assumption " + std::to_string(a.id) + " fails";
  return "not positive";
}

std::string render(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w;
  for (const auto& row : rows) {
    w.resize(std::max(w.size(), row.size()), 0);
    for (std::size_t i = 0; i < row.size(); ++i) w[i] = std::max(w[i], row[i].size());
  }
  std::ostringstream os;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      os << rows[k][i];
      if (i + 1 < rows[k].size()) os << std::string(w[i] - rows[k][i].size() + 2, ' ');
    }
    os << '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < w.size(); ++i) total += w[i] + (i + 1 < w.size() ? 2 : 0);
      os << std::string(total, '-') << '\n';
    }
  }
  return os.str();
}

}  // namespace

nlohmann::json table_json(const std::vector<Report>& reports) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : reports) {
    const ProblemSpec& pr = r.config.problem;
    nlohmann::json row{{"problem", pr.kind_name()}, {"N", pr.N}, {"status", status(r)}, {"verdict", r.verdict}};
    if (pr.kind == ProblemKind::LaneEmden)
      row["p"] = pr.p;
    else
      row["eps"] = to_string(pr.eps);
    if (r.existence) {
      row["r1"] = r.existence->alpha;
      row["r2"] = r.existence->r2;
    }
    if (r.positivity) {
      const auto& c = *r.positivity;
      row["m_lower"] = c.m_lower;
      row["lambda1_lower"] = c.lambda1.lower;
      row["lambda1_upper"] = c.lambda1.upper;
      if (c.lane_emden) row["threshold"] = c.lane_emden->threshold;
      if (c.allen_cahn) row["eps_inv_sq"] = c.allen_cahn->eps_inv_sq_upper;
      row["radius_source"] = c.radius_source;
    }
    rows.push_back(row);
  }
  return rows;
}

std::string render_table(const std::vector<Report>& reports) {
  std::vector<const Report*> le, ac;
  for (const auto& r : reports) (r.config.problem.kind == ProblemKind::LaneEmden ? le : ac).push_back(&r);
  const auto cell = [](bool have, double v) { return have ? sci(v) : std::string("-"); };

  std::ostringstream os;
  if (!le.empty() || ac.empty()) {
    std::vector<std::vector<std::string>> rows{
        {"p", "N", "r1", "r2", "m >=", "(-m+r2)^(p-1)", "lambda_1 >=", "status"}};
    for (const Report* r : le) {
      const auto* c = r->positivity ? &*r->positivity : nullptr;
      rows.push_back({std::to_string(r->config.problem.p), std::to_string(r->config.problem.N),
                      cell(r->existence.has_value(), r->existence ? r->existence->alpha : 0),
                      cell(r->existence.has_value(), r->existence ? r->existence->r2 : 0),
                      cell(c != nullptr, c ? c->m_lower : 0),
                      cell(c && c->lane_emden, c && c->lane_emden ? c->lane_emden->threshold : 0),
                      c ? sci5(c->lambda1.lower) : std::string("-"), status(*r)});
    }
    os << render(rows);
  }
  if (!ac.empty()) {
    if (!le.empty()) os << '\n';
    std::vector<std::vector<std::string>> rows{
        {"eps", "N", "r1", "r2", "m >=", "eps^-2", "lambda_1(hat) in", "status"}};
    for (const Report* r : ac) {
      const auto* c = r->positivity ? &*r->positivity : nullptr;
      rows.push_back({to_string(r->config.problem.eps), std::to_string(r->config.problem.N),
                      cell(r->existence.has_value(), r->existence ? r->existence->alpha : 0),
                      cell(r->existence.has_value(), r->existence ? r->existence->r2 : 0),
                      cell(c != nullptr, c ? c->m_lower : 0),
                      sci5(r->config.problem.inv_eps_sq().hi()),
                      c ? "[" + sci5(c->lambda1.lower) + ", " + sci5(c->lambda1.upper) + "]" : std::string("-"),
                      status(*r)});
    }
    os << render(rows);
  }
  return os.str();
}

bool is_verification_failure(ErrorCode code) {
  switch (code) {
    case ErrorCode::VerificationFailure:
    case ErrorCode::EigenvalueStraddlesOne:
    case ErrorCode::TailTooShort:
    case ErrorCode::NoAdmissibleAlpha:
    case ErrorCode::OmegaPlusEmpty:
    case ErrorCode::ContainmentFailure:
    case ErrorCode::RangeBoundTooLoose:
    case ErrorCode::NonPositiveWeight:
    case ErrorCode::IndefiniteB:
      return true;
    default:
      return false;
  }
}

int exit_code(const Report& r) {
  if (!r.failed_stage.empty()) return r.error_code && is_verification_failure(*r.error_code) ? 2 : 1;
  if (!r.positivity) return 1;
  return r.positivity->verdict && r.positivity->radius_source == "existence" ? 0 : 2;
}

}  // namespace poscert
