#include "droplet/cli.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "droplet/actions.hpp"
#include "droplet/errors.hpp"
#include "droplet/expansion.hpp"
#include "droplet/ortho_oracle.hpp"
#include "droplet/version.hpp"

namespace droplet {

namespace {

using Json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string error_code(const std::exception& e) {
  if (dynamic_cast<const NearCriticalError*>(&e)) return "near_critical";
  if (dynamic_cast<const PhaseError*>(&e)) return "phase_error";
  if (dynamic_cast<const DomainError*>(&e)) return "domain_error";
  if (dynamic_cast<const ToleranceError*>(&e)) return "tolerance_error";
  if (dynamic_cast<const SolverError*>(&e)) return "solver_error";
  return "internal_error";
}

const char* regime_name(Regime r) {
  switch (r) {
    case Regime::I: return "I";
    case Regime::II: return "II";
    default: return "III";
  }
}

std::vector<double> axis_values(const GridAxis& g, double fallback) {
  if (!g.set) return {fallback};
  std::vector<double> v;
  v.reserve(std::max(g.count, 0));
  if (g.count == 1) {
    v.push_back(g.lo);
    return v;
  }
  for (int i = 0; i < g.count; ++i)
    v.push_back(g.lo + (g.hi - g.lo) * i / (g.count - 1));
  return v;
}

Json inputs_json(const RunConfig& cfg) {
  Json in;
  in["command"] = cfg.command;
  in["a"] = cfg.params.a;
  in["c"] = cfg.params.c;
  in["tau"] = cfg.params.tau;
  in["N"] = cfg.N;
  in["k0"] = cfg.k0;
  in["nodes"] = cfg.nodes;
  in["format"] = cfg.format;
  in["out"] = cfg.out_path;
  in["suite"] = cfg.suite;
  in["threads"] = cfg.max_threads;
  return in;
}

Json check_entry(const std::string& name, double value, double tolerance) {
  Json c;
  c["name"] = name;
  c["value"] = value;
  c["tolerance"] = tolerance;
  c["pass"] = std::abs(value) <= tolerance;
  return c;
}

QuadratureSpec quad_spec(const RunConfig& cfg) {
  QuadratureSpec q;
  q.radial_nodes = cfg.nodes;
  q.angular_nodes = cfg.nodes;
  return q;
}

// Finite difference of the explicit action in a across re-solved maps.
double action_derivative_fd(const ModelParams& p, double h) {
  ModelParams lo = p, hi = p;
  lo.a -= h;
  hi.a += h;
  const double slo = liouville_explicit(lo, classify_phase(lo), solve_map_params(lo));
  const double shi = liouville_explicit(hi, classify_phase(hi), solve_map_params(hi));
  return (shi - slo) / (2.0 * h);
}

Json cmd_phase(const RunConfig& cfg) {
  const PhaseLabel lab = classify_phase(cfg.params);
  Json out;
  out["regime"] = regime_name(lab.regime);
  Json margins;
  for (const auto& [k, v] : lab.margins) margins[k] = v;
  out["margins"] = margins;
  return Json{{"outputs", out}, {"checks", Json::array()}};
}

Json cmd_map(const RunConfig& cfg) {
  const ModelParams& p = cfg.params;
  const PhaseLabel lab = classify_phase(p);
  Json out, checks = Json::array();
  out["regime"] = regime_name(lab.regime);
  if (lab.regime == Regime::I) {
    out["ellipse_scale"] = std::sqrt(1.0 + p.c);
    out["disc_center"] = p.a;
    out["disc_radius"] = std::sqrt(p.c * (1.0 - p.tau * p.tau));
  } else if (lab.regime == Regime::II) {
    const ExteriorMap m = solve_map_params(p);
    out["R"] = m.R;
    out["q"] = m.q;
    out["lambda"] = m.lambda;
    const ModelTriple back = param_to_model(m.q, m.lambda, m.tau);
    const double resid = std::hypot(back.a - p.a, back.c - p.c);
    checks.push_back(check_entry("coupled_roundtrip_residual", resid, 1e-10));
  } else {
    throw PhaseError("no single-component map exists for these parameters");
  }
  return Json{{"outputs", out}, {"checks", checks}};
}

Json cmd_liouville(const RunConfig& cfg) {
  const LiouvilleReport rep = liouville_report(cfg.params);
  Json out;
  out["closed_form"] = rep.closed_form;
  out["explicit_formula"] = rep.explicit_formula;
  out["numeric_integral"] = rep.numeric_integral;
  Json comps = Json::array();
  for (const auto& [name, val] : rep.per_component)
    comps.push_back(Json{{"component", name}, {"value", val}});
  out["per_component"] = comps;
  Json checks = Json::array();
  checks.push_back(
      check_entry("closed_vs_explicit", rep.closed_form - rep.explicit_formula, 1e-7));
  checks.push_back(
      check_entry("closed_vs_numeric", rep.closed_form - rep.numeric_integral, 1e-7));
  checks.push_back(check_entry("explicit_vs_numeric",
                               rep.explicit_formula - rep.numeric_integral, 1e-7));
  return Json{{"outputs", out}, {"checks", checks}};
}

Json cmd_energy(const RunConfig& cfg) {
  Json out;
  out["energy"] = energy(cfg.params);
  return Json{{"outputs", out}, {"checks", Json::array()}};
}

Json cmd_expand(const RunConfig& cfg) {
  const ExpansionReport rep = expansion_coefficients(cfg.params, cfg.k0);
  Json out;
  out["C1"] = rep.C1;
  out["C2"] = rep.C2;
  out["C3"] = rep.C3;
  out["C4"] = rep.C4;
  out["C5"] = rep.C5;
  out["chi"] = rep.chi;
  out["liouville"] = rep.liouville;
  Json tail = Json::array();
  for (const auto& [k, ek] : rep.tail) tail.push_back(Json{{"k", k}, {"E", ek}});
  out["tail"] = tail;
  out["k0"] = rep.k0;
  out["log_z_predicted"] = log_z_predicted(cfg.params, cfg.N, cfg.k0);
  return Json{{"outputs", out}, {"checks", Json::array()}};
}

Json cmd_oracle(const RunConfig& cfg) {
  const OrthoSummary s = oracle_summary(cfg.params, cfg.N, quad_spec(cfg));
  Json out;
  out["N"] = s.N;
  Json lh = Json::array(), av = Json::array(), bv = Json::array();
  for (double v : s.log_h) lh.push_back(v);
  for (double v : s.A_coeffs) av.push_back(v);
  for (double v : s.B_coeffs) bv.push_back(v);
  out["log_h"] = lh;
  out["A"] = av;
  out["B"] = bv;
  out["log_Z"] = s.log_Z;
  out["achieved_tolerance"] = s.achieved_tolerance;
  Json checks = Json::array();
  checks.push_back(check_entry("achieved_tolerance", s.achieved_tolerance,
                               quad_spec(cfg).target_tolerance));
  return Json{{"outputs", out}, {"checks", checks}};
}

Json cmd_verify(const RunConfig& cfg) {
  const ModelParams& p = cfg.params;
  const QuadratureSpec q = quad_spec(cfg);
  Json out, checks = Json::array();
  out["suite"] = cfg.suite;
  if (cfg.suite == "deform-a") {
    checks.push_back(
        check_entry("deform_a_residual", deformation_residual_a(p, cfg.N, q, 1e-4), 1e-5));
  } else if (cfg.suite == "deform-tau") {
    checks.push_back(check_entry("deform_tau_residual",
                                 deformation_residual_tau(p, cfg.N, q, 1e-4), 1e-4));
  } else if (cfg.suite == "liouville-routes") {
    const LiouvilleReport rep = liouville_report(p);
    checks.push_back(
        check_entry("closed_vs_explicit", rep.closed_form - rep.explicit_formula, 1e-7));
    checks.push_back(
        check_entry("closed_vs_numeric", rep.closed_form - rep.numeric_integral, 1e-7));
    checks.push_back(check_entry("explicit_vs_numeric",
                                 rep.explicit_formula - rep.numeric_integral, 1e-7));
  } else if (cfg.suite == "scaling") {
    checks.push_back(check_entry(
        "scaling_residual", scaling_identity_residual(p, cfg.N + 1, cfg.N, q), 1e-8));
  } else if (cfg.suite == "predicted-coeffs") {
    const OrthoSummary s = oracle_summary(p, cfg.N, q);
    const PredictedCoefficients pc = predicted_coefficients_regime1(p, cfg.N);
    const double tol = 5.0 * std::max(s.achieved_tolerance, q.target_tolerance);
    checks.push_back(check_entry("a_nn_deviation", s.A_coeffs[cfg.N] - pc.a_nn, tol));
    checks.push_back(check_entry("b_nn_deviation", s.B_coeffs[cfg.N] - pc.b_nn, tol));
    checks.push_back(check_entry("a_n1n_deviation", s.A_coeffs[cfg.N + 1] - pc.a_n1n, tol));
    checks.push_back(check_entry("b_n1n_deviation", s.B_coeffs[cfg.N + 1] - pc.b_n1n, tol));
  } else if (cfg.suite == "variation-rate") {
    const ExteriorMap m = solve_map_params(p);
    const double scale_inf = m.R;
    auto re_p = [&](double theta) {
      const Complex w = std::polar(1.0, theta);
      return -(1.0 - p.tau) * scale_inf * w.real() / std::norm(map_eval(m, w, 1));
    };
    const double rate = liouville_variation_rate(m, re_p, 512);
    checks.push_back(
        check_entry("variation_rate_vs_fd", rate - action_derivative_fd(p, 1e-4), 1e-6));
  } else if (cfg.suite == "f1") {
    const ExteriorMap m = solve_map_params(p);
    const double f1 = f1_leading_coefficient(m, p);
    const double fd = (1.0 + p.tau) / 48.0 * action_derivative_fd(p, 1e-4);
    checks.push_back(check_entry("f1_vs_fd", f1 - fd, 1e-6));
  } else {
    throw DomainError("unknown verification suite: " + cfg.suite);
  }
  return Json{{"outputs", out}, {"checks", checks}};
}

struct SweepRow {
  std::string cells[14];
};

const char* kSweepHeader =
    "a,c,tau,N,status,regime,energy,liouville,C1,C2,C3,C4,C5,log_z_predicted";

SweepRow sweep_point(double a, double c, double tau, int n, int k0) {
  SweepRow row;
  row.cells[0] = fmt(a);
  row.cells[1] = fmt(c);
  row.cells[2] = fmt(tau);
  row.cells[3] = std::to_string(n);
  std::string status = "ok";
  const ModelParams p{a, c, tau};
  try {
    const PhaseLabel lab = classify_phase(p);
    row.cells[5] = regime_name(lab.regime);
    row.cells[6] = fmt(energy(p));
    const ExpansionReport rep = expansion_coefficients(p, k0);
    row.cells[7] = fmt(rep.liouville);
    row.cells[8] = fmt(rep.C1);
    row.cells[9] = fmt(rep.C2);
    row.cells[10] = fmt(rep.C3);
    row.cells[11] = fmt(rep.C4);
    row.cells[12] = fmt(rep.C5);
    row.cells[13] = fmt(log_z_predicted(p, n, k0));
  } catch (const std::exception& e) {
    status = error_code(e);
  }
  row.cells[4] = status;
  return row;
}

std::string run_sweep(const RunConfig& cfg) {
  std::ostringstream os;
  os << kSweepHeader << "\n";
  const std::vector<double> as = axis_values(cfg.grid_a, cfg.params.a);
  const std::vector<double> cs = axis_values(cfg.grid_c, cfg.params.c);
  const std::vector<double> taus = axis_values(cfg.grid_tau, cfg.params.tau);
  const std::vector<int> ns = cfg.grid_n.empty() ? std::vector<int>{cfg.N} : cfg.grid_n;
  for (double a : as)
    for (double c : cs)
      for (double tau : taus)
        for (int n : ns) {
          const SweepRow row = sweep_point(a, c, tau, n, cfg.k0);
          for (int i = 0; i < 14; ++i) {
            if (i) os << ',';
            os << row.cells[i];
          }
          os << "\n";
        }
  return os.str();
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (cfg.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out_path, std::ios::binary);
  if (!f) throw DomainError("cannot open output path: " + cfg.out_path);
  f << text;
}

bool parse_axis(const std::string& s, GridAxis& axis) {
  std::istringstream is(s);
  std::string lo, hi, count;
  if (!std::getline(is, lo, ':') || !std::getline(is, hi, ':') ||
      !std::getline(is, count))
    return false;
  try {
    axis.lo = std::stod(lo);
    axis.hi = std::stod(hi);
    axis.count = std::stoi(count);
  } catch (...) {
    return false;
  }
  if (axis.count < 0) return false;
  axis.set = true;
  return true;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Coulomb gas droplet toolkit"};
  app.require_subcommand(1);

  std::string grid_a, grid_c, grid_tau, grid_n;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--a", cfg.params.a, "charge location");
    sub->add_option("--c", cfg.params.c, "external charge strength");
    sub->add_option("--tau", cfg.params.tau, "asymmetry parameter");
    sub->add_option("--N", cfg.N, "matrix size");
    sub->add_option("--k0", cfg.k0, "tail truncation order");
    sub->add_option("--nodes", cfg.nodes, "quadrature node count per axis");
    sub->add_option("--format", cfg.format, "output format (json|csv)")
        ->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", cfg.out_path, "output file path");
    return sub;
  };
  add_common(app.add_subcommand("phase", "classify the droplet topology"));
  add_common(app.add_subcommand("map", "solve for the exterior map data"));
  add_common(app.add_subcommand("liouville", "Liouville action by three routes"));
  add_common(app.add_subcommand("energy", "weighted equilibrium energy"));
  add_common(app.add_subcommand("expand", "free energy expansion coefficients"));
  add_common(app.add_subcommand("oracle", "finite-N orthogonal polynomial data"));
  CLI::App* verify = add_common(app.add_subcommand("verify", "run a verification suite"));
  verify->add_option("--suite", cfg.suite, "suite name")
      ->required()
      ->check(CLI::IsMember({"deform-a", "deform-tau", "liouville-routes", "scaling",
                             "predicted-coeffs", "variation-rate", "f1"}));
  CLI::App* sweep = add_common(app.add_subcommand("sweep", "tabulate over a grid"));
  sweep->add_option("--grid-a", grid_a, "a grid as lo:hi:count");
  sweep->add_option("--grid-c", grid_c, "c grid as lo:hi:count");
  sweep->add_option("--grid-tau", grid_tau, "tau grid as lo:hi:count");
  sweep->add_option("--grid-N", grid_n, "comma-separated N list");

  std::vector<const char*> argv;
  argv.push_back("droplet");
  for (const std::string& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 64;
  }

  if (const char* tenv = std::getenv("COULOMB_DROPLET_THREADS")) {
    int t = 0;
    const char* tend = tenv + std::char_traits<char>::length(tenv);
    auto res = std::from_chars(tenv, tend, t);
    if (res.ec != std::errc() || res.ptr != tend || t < 1) {
      err << "COULOMB_DROPLET_THREADS must be a positive integer\n";
      return 64;
    }
    cfg.max_threads = t;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.command == "sweep") {
    if ((!grid_a.empty() && !parse_axis(grid_a, cfg.grid_a)) ||
        (!grid_c.empty() && !parse_axis(grid_c, cfg.grid_c)) ||
        (!grid_tau.empty() && !parse_axis(grid_tau, cfg.grid_tau))) {
      err << "grid axes must be lo:hi:count\n";
      return 64;
    }
    if (!grid_n.empty()) {
      std::istringstream is(grid_n);
      std::string tok;
      while (std::getline(is, tok, ',')) {
        try {
          cfg.grid_n.push_back(std::stoi(tok));
        } catch (...) {
          err << "--grid-N must be a comma-separated integer list\n";
          return 64;
        }
      }
    }
  }

  try {
    if (cfg.command == "sweep") {
      emit(cfg, run_sweep(cfg), out);
      return 0;
    }
    Json body;
    if (cfg.command == "phase") body = cmd_phase(cfg);
    else if (cfg.command == "map") body = cmd_map(cfg);
    else if (cfg.command == "liouville") body = cmd_liouville(cfg);
    else if (cfg.command == "energy") body = cmd_energy(cfg);
    else if (cfg.command == "expand") body = cmd_expand(cfg);
    else if (cfg.command == "oracle") body = cmd_oracle(cfg);
    else if (cfg.command == "verify") body = cmd_verify(cfg);
    else {
      err << "unknown command\n";
      return 64;
    }
    Json report;
    report["inputs"] = inputs_json(cfg);
    report["outputs"] = body["outputs"];
    report["checks"] = body["checks"];
    report["version"] = kVersion;
    emit(cfg, report.dump(2) + "\n", out);
    if (cfg.command == "verify")
      for (const auto& c : report["checks"])
        if (!c["pass"].get<bool>()) return 1;
    return 0;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return 64;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << "\n";
    return 2;
  } catch (const PhaseError& e) {
    err << "phase error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace droplet
