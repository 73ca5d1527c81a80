#include "edgescatter/tasks.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "edgescatter/channels.hpp"
#include "edgescatter/errors.hpp"
#include "edgescatter/observables.hpp"
#include "edgescatter/scattering.hpp"

namespace edgescatter {

using nlohmann::json;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }
double uniform(std::mt19937_64& rng, double a, double b) { return a + (b - a) * unit_uniform(rng); }

json cjson(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const Eigen::MatrixXcd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(cjson(m(i, k)));
    rows.push_back(r);
  }
  return rows;
}

json channel_json(const Channel& c) {
  return {{"level", c.level},
          {"branch_sign", c.branch_sign},
          {"xi", cjson(c.xi)},
          {"current", c.current},
          {"upper", cjson(c.upper)},
          {"lower", cjson(c.lower)},
          {"residual", c.residual}};
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

Potential config_potential(const ExperimentConfig& cfg) { return build_potential(cfg.potential, cfg.frame); }

void check_window(const TransverseBasis& basis, const ExperimentConfig& cfg) {
  const auto [em, ep] = cfg.window;
  for (double z : critical_set(basis, std::max(std::abs(em), std::abs(ep)) + cfg.solver.guard + 1.0)) {
    if (z >= em - cfg.solver.guard && z <= ep + cfg.solver.guard) {
      throw Error(ErrorKind::WindowHitsCritical,
                  "window [" + format_double(em) + ", " + format_double(ep) + "] meets Z_D at " + format_double(z));
    }
  }
}

}  // namespace

PotentialSpec random_potential_spec(std::mt19937_64& rng, double max_amplitude, int bumps) {
  PotentialSpec spec;
  for (int b = 0; b < bumps; ++b) {
    GaussianBump g;
    g.component = static_cast<Component>(rng() % 4);
    const double sign = (rng() & 1u) ? 1.0 : -1.0;
    g.amplitude = sign * uniform(rng, 0.1, 1.0) * max_amplitude;
    g.x0 = uniform(rng, -2.0, 2.0);
    g.y0 = uniform(rng, -1.5, 1.5);
    g.sx = uniform(rng, 0.6, 1.5);
    g.sy = uniform(rng, 0.6, 2.0);
    spec.bumps.push_back(g);
  }
  return spec;
}

TaskOutput cmd_spectrum(const ExperimentConfig& cfg) {
  const TransverseBasis basis = make_basis(cfg);
  const double emax = cfg.e_max;
  const std::vector<double> zd = emax > 0.0 ? critical_set(basis, emax) : std::vector<double>{};
  struct Row {
    int branch, level, sign;
    double xi, e;
  };
  std::vector<Row> rows;
  for (int k = 0; k < cfg.xi_points; ++k) {
    const double xi = -cfg.xi_max + 2.0 * cfg.xi_max * k / (cfg.xi_points - 1);
    if (std::abs(xi) <= emax) rows.push_back({0, 0, -1, xi, -xi});
  }
  for (int n = 1; n <= basis.n_max() && basis.rho(n) <= emax * emax; ++n) {
    for (int sign : {+1, -1}) {
      for (int k = 0; k < cfg.xi_points; ++k) {
        const double xi = -cfg.xi_max + 2.0 * cfg.xi_max * k / (cfg.xi_points - 1);
        const double e = branch_energy(n, sign, xi, basis.rho(n));
        if (std::abs(e) <= emax) rows.push_back({sign * n, n, sign, xi, e});
      }
    }
  }
  TaskOutput out;
  if (cfg.format == "csv") {
    std::ostringstream ss;
    ss << "record,branch,level,sign,xi,energy\n";
    for (const auto& r : rows) {
      ss << "branch," << r.branch << ',' << r.level << ',' << r.sign << ',' << format_double(r.xi) << ','
         << format_double(r.e) << '\n';
    }
    for (double z : zd) ss << "critical,,,,," << format_double(z) << '\n';
    out.body = ss.str();
  } else {
    json br = json::array();
    for (const auto& r : rows) br.push_back({{"branch", r.branch}, {"level", r.level}, {"sign", r.sign}, {"xi", r.xi}, {"energy", r.e}});
    json rho = json::array();
    for (int n = 0; n <= basis.n_max(); ++n) rho.push_back(basis.rho(n));
    out.body = dump({{"e_max", emax}, {"rho", rho}, {"critical_set", zd}, {"branches", br}});
  }
  out.summary = std::to_string(rows.size()) + " branch rows, " + std::to_string(zd.size()) + " critical energies";
  return out;
}

TaskOutput cmd_channels(const ExperimentConfig& cfg) {
  const TransverseBasis basis = make_basis(cfg);
  const ChannelSet set = channels_at(basis, cfg.energy, {cfg.solver.n_evanescent, cfg.solver.guard});
  TaskOutput out;
  if (cfg.format == "csv") {
    std::ostringstream ss;
    ss << "kind,index,level,branch_sign,xi_re,xi_im,current\n";
    int i = 0;
    for (const auto& c : set.propagating) {
      ss << "propagating," << i++ << ',' << c.level << ',' << c.branch_sign << ',' << format_double(c.xi.real())
         << ',' << format_double(c.xi.imag()) << ',' << format_double(c.current) << '\n';
    }
    i = 0;
    for (const auto& c : set.evanescent) {
      ss << "evanescent," << i++ << ',' << c.level << ',' << c.branch_sign << ',' << format_double(c.xi.real())
         << ',' << format_double(c.xi.imag()) << ",0\n";
    }
    out.body = ss.str();
  } else {
    json prop = json::array(), ev = json::array();
    for (const auto& c : set.propagating) prop.push_back(channel_json(c));
    for (const auto& c : set.evanescent) ev.push_back(channel_json(c));
    out.body = dump({{"energy", set.energy},
                     {"M", set.M()},
                     {"n_plus", set.n_plus},
                     {"n_minus", set.n_minus},
                     {"propagating", prop},
                     {"evanescent", ev},
                     {"gram", matrix_json(gram_matrix(basis, set))}});
  }
  out.summary = "M = " + std::to_string(set.M()) + ", n+ = " + std::to_string(set.n_plus) +
                ", n- = " + std::to_string(set.n_minus);
  return out;
}

TaskOutput cmd_scatter(const ExperimentConfig& cfg) {
  const TransverseBasis basis = make_basis(cfg);
  const Potential pot = config_potential(cfg);
  const ScatteringMatrix s = scatter_at(basis, pot, cfg.energy, cfg.solver);
  TaskOutput out;
  if (cfg.format == "csv") {
    std::ostringstream ss;
    ss << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < s.S.rows(); ++i) {
      for (Eigen::Index k = 0; k < s.S.cols(); ++k) {
        ss << i << ',' << k << ',' << format_double(s.S(i, k).real()) << ',' << format_double(s.S(i, k).imag()) << '\n';
      }
    }
    out.body = ss.str();
  } else {
    json order = json::array();
    for (std::size_t i = 0; i < s.ordering.size(); ++i) {
      const auto& c = s.ordering[i];
      order.push_back({{"index", i}, {"level", c.level}, {"branch_sign", c.branch_sign}, {"xi", c.xi}, {"current", c.current}});
    }
    out.body = dump({{"energy", s.energy},
                     {"n_plus", s.n_plus},
                     {"n_minus", s.n_minus},
                     {"ordering", order},
                     {"convention", "S[m][n]: m incident, n outgoing; S = [[T_plus, R_minus], [R_plus, T_minus]]"},
                     {"T_plus", matrix_json(s.T_plus())},
                     {"R_minus", matrix_json(s.R_minus())},
                     {"R_plus", matrix_json(s.R_plus())},
                     {"T_minus", matrix_json(s.T_minus())},
                     {"unitarity_defect", s.unitarity_defect},
                     {"trace_difference", s.trace_difference()},
                     {"residual", s.residual},
                     {"match_defect", s.match_defect}});
  }
  out.summary = "unitarity defect " + format_double(s.unitarity_defect);
  if (!(s.unitarity_defect < cfg.defect_bound)) {
    out.exit_code = 3;
    out.summary += " exceeds bound " + format_double(cfg.defect_bound);
  }
  return out;
}

TaskOutput cmd_conductivity(const ExperimentConfig& cfg) {
  const TransverseBasis basis = make_basis(cfg);
  try {
    check_window(basis, cfg);
  } catch (const Error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  const Potential pot = config_potential(cfg);
  const ConductivityReport rep =
      conductivity(basis, pot, SwitchProfile::energy_window(cfg.window.first, cfg.window.second), cfg.n_nodes,
                   cfg.solver, cfg.jobs);
  TaskOutput out;
  if (cfg.format == "csv") {
    std::ostringstream ss;
    ss << "node,energy,weight,n_plus,n_minus,unitarity_defect,trace_difference,offset\n";
    for (std::size_t i = 0; i < rep.nodes.size(); ++i) {
      const auto& n = rep.nodes[i];
      ss << i << ',' << format_double(n.energy) << ',' << format_double(n.weight) << ',' << n.n_plus << ','
         << n.n_minus << ',' << format_double(n.unitarity_defect) << ',' << format_double(n.trace_difference) << ','
         << (n.offset ? 1 : 0) << '\n';
    }
    ss << "total,,,,,,," << format_double(rep.sigma) << '\n';
    out.body = ss.str();
  } else {
    json nodes = json::array();
    for (const auto& n : rep.nodes) {
      nodes.push_back({{"energy", n.energy},
                       {"weight", n.weight},
                       {"n_plus", n.n_plus},
                       {"n_minus", n.n_minus},
                       {"unitarity_defect", n.unitarity_defect},
                       {"trace_difference", n.trace_difference},
                       {"offset", n.offset}});
    }
    out.body = dump({{"window", {rep.e_minus, rep.e_plus}},
                     {"two_pi_sigma_I", rep.sigma},
                     {"any_offset", rep.any_offset},
                     {"nodes", nodes}});
  }
  out.summary = "2 pi sigma_I = " + format_double(rep.sigma);
  return out;
}

std::vector<CheckResult> validation_suite(const ExperimentConfig& cfg) {
  std::vector<CheckResult> checks;
  auto run = [&](const std::string& name, double bound, const std::function<double()>& value) {
    CheckResult r{name, false, 0.0, bound, ""};
    try {
      r.value = value();
      r.passed = r.value <= bound;
    } catch (const Error& e) {
      r.detail = e.what();
    } catch (const std::exception& e) {
      r.detail = e.what();
    }
    checks.push_back(r);
  };

  const TransverseBasis basis = make_basis(cfg);
  const SolverParams& sp = cfg.solver;
  std::mt19937_64 rng(cfg.seed);
  const Potential generic = build_potential(random_potential_spec(rng, std::min(cfg.max_amplitude, 2.0)));
  const double e0 = cfg.energy;

  run("ladder_residuals", basis.tolerances().ladder, [&] {
    double r = 0.0;
    for (int n = 1; n <= basis.n_max(); ++n) r = std::max(r, ladder_residual(basis, n));
    return r;
  });

  // Conjugate pairs overlap by sqrt(rho_n)/|E|; distinct levels are orthogonal.
  run("gram_structure", 1e-10, [&] {
    std::mt19937_64 r2(cfg.seed + 1);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
      double e = k == 0 ? e0 : uniform(r2, 0.05, 2.95);
      if (distance_to_critical(basis, e) < sp.guard) continue;
      const ChannelSet set = channels_at(basis, e, {0, sp.guard});
      const Eigen::MatrixXcd g = gram_matrix(basis, set);
      for (int a = 0; a < set.M(); ++a) {
        for (int b = 0; b < set.M(); ++b) {
          const auto& ca = set.propagating[static_cast<std::size_t>(a)];
          const auto& cb = set.propagating[static_cast<std::size_t>(b)];
          double expect = 0.0;
          if (a == b) expect = 1.0;
          else if (ca.level == cb.level) expect = std::sqrt(basis.rho(ca.level)) / std::abs(e);
          worst = std::max(worst, std::abs(std::abs(g(a, b)) - expect));
          if (a != b && !(std::abs(g(a, b)) < 1.0)) return std::numeric_limits<double>::infinity();
        }
      }
    }
    return worst;
  });

  run("free_current_matrix", 1e-8, [&] {
    const ChannelSet set = channels_at(basis, e0, {0, sp.guard});
    double worst = 0.0;
    for (const auto& P : {SwitchProfile::position(0.0, 1.0), SwitchProfile::position(0.7, 2.5)}) {
      const Eigen::MatrixXcd c = unperturbed_current_matrix(set, P);
      for (int a = 0; a < set.M(); ++a) {
        for (int b = 0; b < set.M(); ++b) {
          const double target = a == b ? set.propagating[static_cast<std::size_t>(a)].current : 0.0;
          worst = std::max(worst, std::abs(c(a, b) - target));
        }
      }
    }
    return worst;
  });

  run("conservation_scan", 1e-7, [&] {
    const ChannelSet set = channels_at(basis, e0, {sp.n_evanescent, sp.guard});
    const double X = sp.half_width(generic.support_radius());
    const CouplingField field =
        coupling_field(generic, basis, uniform_grid(X, sp.nodes_per_unit), set.layout().levels, sp.margin);
    const ModeSolver solver(basis, set, field, sp);
    const double xq = generic.support_radius();
    const std::vector<double> pos{-(xq + 2.0), -1.0, 0.0, 1.0, xq + 2.0};
    double worst = 0.0;
    for (int m = 0; m < set.M(); ++m) {
      worst = std::max(worst, conservation_scan(solver.solve(m), SwitchProfile::position(0.0, 1.0), pos));
    }
    return worst;
  });

  std::vector<ScatteringMatrix> sweep;
  run("unitarity_sweep", 1e-6, [&] {
    std::mt19937_64 r3(cfg.seed + 2);
    double worst = 0.0;
    for (int k = 0; k < cfg.random_potentials; ++k) {
      const Potential p = build_potential(random_potential_spec(r3, cfg.max_amplitude));
      for (double e : {1.2, 1.8, 2.2}) {
        sweep.push_back(scatter_at(basis, p, e, sp));
        worst = std::max(worst, sweep.back().unitarity_defect);
      }
    }
    return worst;
  });

  run("trace_identity", 1e-5, [&] {
    double worst = 0.0;
    for (const auto& s : sweep) worst = std::max(worst, std::abs(s.trace_difference() - (s.n_plus - s.n_minus)));
    return sweep.empty() && cfg.random_potentials > 0 ? std::numeric_limits<double>::infinity() : worst;
  });

  run("born_ratio_offset", 0.5, [&] {
    const ChannelSet set = channels_at(basis, e0, {sp.n_evanescent, sp.guard});
    double diff[2];
    int i = 0;
    for (double eps : {0.01, 0.005}) {
      PotentialSpec spec;
      for (auto b : generic.bumps()) {
        b.amplitude *= eps;
        spec.bumps.push_back(b);
      }
      const Potential p = build_potential(spec);
      const double X = sp.half_width(p.support_radius());
      const CouplingField f =
          coupling_field(p, basis, uniform_grid(X, sp.nodes_per_unit), set.layout().levels, sp.margin);
      diff[i++] = (smatrix(basis, set, f, sp).S - born_smatrix(basis, set, f).S).cwiseAbs().maxCoeff();
    }
    return std::abs(diff[0] / diff[1] - 4.0);
  });

  run("grid_convergence", 1e-6, [&] {
    SolverParams fine = sp;
    fine.nodes_per_unit *= 2.0;
    return (scatter_at(basis, generic, e0, sp).S - scatter_at(basis, generic, e0, fine).S).cwiseAbs().maxCoeff();
  });

  run("quantization", 1e-4, [&] {
    const auto window = SwitchProfile::energy_window(cfg.window.first, cfg.window.second);
    std::mt19937_64 r4(cfg.seed + 3);
    double worst = std::abs(conductivity(basis, build_potential({}), window, cfg.n_nodes, sp, cfg.jobs).sigma -
                            (-1.0));
    for (int k = 0; k < cfg.random_potentials; ++k) {
      const Potential p = build_potential(random_potential_spec(r4, cfg.max_amplitude));
      const ConductivityReport rep = conductivity(basis, p, window, cfg.n_nodes, sp, cfg.jobs);
      double expect = 0.0;
      for (const auto& n : rep.nodes) expect += n.weight * (n.n_plus - n.n_minus);
      worst = std::max(worst, std::abs(rep.sigma - expect));
    }
    return worst;
  });

  run("parseval", 1e-4, [&] {
    const double e = 2.2;
    const ChannelSet set = channels_at(basis, e, {0, sp.guard});
    const auto& c = set.propagating.front();
    SampledFunction f;
    f.layout = set.layout();
    f.x_grid = uniform_grid(30.0, 20.0);
    f.coeffs.resize(f.layout.dim(), static_cast<Eigen::Index>(f.x_grid.size()));
    for (std::size_t j = 0; j < f.x_grid.size(); ++j) {
      const double x = f.x_grid[j];
      f.coeffs.col(static_cast<Eigen::Index>(j)) =
          std::exp(cplx(0.0, c.xi.real() * x) - x * x / 32.0) * c.coefficients(f.layout);
    }
    return parseval_check(basis, f, 400, 4.0).defect;
  });

  return checks;
}

TaskOutput cmd_validate(const ExperimentConfig& cfg) {
  const auto checks = validation_suite(cfg);
  TaskOutput out;
  bool all = true;
  for (const auto& c : checks) all = all && c.passed;
  if (cfg.format == "csv") {
    std::ostringstream ss;
    ss << "check,passed,value,bound,detail\n";
    for (const auto& c : checks) {
      ss << c.name << ',' << (c.passed ? 1 : 0) << ',' << format_double(c.value) << ',' << format_double(c.bound)
         << ",\"" << c.detail << "\"\n";
    }
    out.body = ss.str();
  } else {
    json arr = json::array();
    for (const auto& c : checks) {
      arr.push_back({{"check", c.name}, {"passed", c.passed}, {"value", c.value}, {"bound", c.bound}, {"detail", c.detail}});
    }
    out.body = dump({{"seed", cfg.seed}, {"passed", all}, {"checks", arr}});
  }
  int failed = 0;
  for (const auto& c : checks) failed += c.passed ? 0 : 1;
  out.summary = std::to_string(checks.size() - static_cast<std::size_t>(failed)) + "/" +
                std::to_string(checks.size()) + " checks passed";
  out.exit_code = all ? 0 : 1;
  return out;
}

TaskOutput run_task(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.task == "spectrum") return cmd_spectrum(cfg);
  if (cfg.task == "channels") return cmd_channels(cfg);
  if (cfg.task == "scatter") return cmd_scatter(cfg);
  if (cfg.task == "conductivity") return cmd_conductivity(cfg);
  return cmd_validate(cfg);
}

}  // namespace edgescatter
