#include "edgescatter/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "edgescatter/errors.hpp"

namespace edgescatter {

using nlohmann::json;

namespace {

json toml_to_json(const std::string& text) {
  try {
    const toml::table tbl = toml::parse(text);
    std::ostringstream ss;
    ss << toml::json_formatter{tbl};
    return json::parse(ss.str());
  } catch (const toml::parse_error& e) {
    throw Error(ErrorKind::ConfigError, std::string("TOML: ") + std::string(e.description()));
  }
}

json parse_document(const std::string& text, bool toml) {
  if (toml) return toml_to_json(text);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("JSON: ") + e.what());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_toml(const std::string& path) { return std::filesystem::path(path).extension() == ".toml"; }

template <class T>
void get(const json& j, const char* key, T& out) {
  if (!j.contains(key) || j.at(key).is_null()) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigError, std::string("field '") + key + "': " + e.what());
  }
}

// Widths and similar accept a number, "inf", or null/absent for infinity.
double get_width(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::infinity();
  const auto& v = j.at(key);
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw Error(ErrorKind::ConfigError, std::string("field '") + key + "' must be a number or \"inf\"");
  }
  if (!v.is_number()) throw Error(ErrorKind::ConfigError, std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

Frame parse_frame(const json& j) {
  std::string f = "rotated";
  get(j, "frame", f);
  if (f == "rotated") return Frame::Rotated;
  if (f == "original") return Frame::Original;
  throw Error(ErrorKind::ConfigError, "frame must be 'original' or 'rotated'");
}

PotentialSpec potential_from_json(const json& j) {
  PotentialSpec spec;
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "potential must be a table/object");
  if (j.contains("bumps")) {
    for (const auto& b : j.at("bumps")) {
      GaussianBump g;
      std::string comp = "q0";
      get(b, "component", comp);
      try {
        g.component = component_from_string(comp);
      } catch (const Error& e) {
        throw Error(ErrorKind::ConfigError, e.what());
      }
      get(b, "amplitude", g.amplitude);
      get(b, "x0", g.x0);
      get(b, "y0", g.y0);
      get(b, "sx", g.sx);
      g.sy = get_width(b, "sy");
      spec.bumps.push_back(g);
    }
  }
  if (j.contains("table")) {
    const auto& t = j.at("table");
    TabulatedPotential tab;
    get(t, "x", tab.x);
    get(t, "y", tab.y);
    if (t.contains("values")) {
      for (const auto& [name, grid] : t.at("values").items()) {
        Component c;
        try {
          c = component_from_string(name);
        } catch (const Error& e) {
          throw Error(ErrorKind::ConfigError, e.what());
        }
        try {
          tab.values[static_cast<std::size_t>(c)] = grid.get<std::vector<std::vector<double>>>();
        } catch (const json::exception& e) {
          throw Error(ErrorKind::NonRectangularGrid, std::string("table values: ") + e.what());
        }
      }
    }
    spec.table = std::move(tab);
  }
  return spec;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base) {
  ExperimentConfig c;
  if (!j.is_object()) throw Error(ErrorKind::ConfigError, "config must be a table/object");
  if (j.contains("wall")) {
    const auto& w = j.at("wall");
    get(w, "kind", c.wall.kind);
    get(w, "bounded", c.wall.bounded);
    get(w, "amplitude", c.wall.amplitude);
    get(w, "scale", c.wall.scale);
    get(w, "y_cutoff", c.wall.y_cutoff);
  }
  if (j.contains("basis")) {
    get(j.at("basis"), "n_max", c.n_max);
    get(j.at("basis"), "quad_points", c.quad_points);
  }
  if (j.contains("potential")) {
    const auto& p = j.at("potential");
    if (p.is_string()) {
      const auto path = base / p.get<std::string>();
      c.potential = parse_potential(read_file(path.string()), is_toml(path.string()), &c.frame);
    } else {
      c.potential = potential_from_json(p);
      c.frame = parse_frame(p);
    }
  }
  if (j.contains("solver")) {
    const auto& s = j.at("solver");
    if (s.contains("X") && !s.at("X").is_null()) get(s, "X", c.solver.X);
    get(s, "nodes_per_unit", c.solver.nodes_per_unit);
    get(s, "tol_solve", c.solver.tol_solve);
    get(s, "tol_match", c.solver.tol_match);
    get(s, "n_evanescent", c.solver.n_evanescent);
    get(s, "guard", c.solver.guard);
    get(s, "margin", c.solver.margin);
    get(s, "defect_bound", c.defect_bound);
  }
  get(j, "task", c.task);
  get(j, "energy", c.energy);
  if (j.contains("window")) {
    std::vector<double> w;
    get(j, "window", w);
    if (w.size() != 2) throw Error(ErrorKind::ConfigError, "window must have two entries");
    c.window = {w[0], w[1]};
  }
  get(j, "n_nodes", c.n_nodes);
  if (j.contains("spectrum")) {
    get(j.at("spectrum"), "e_max", c.e_max);
    get(j.at("spectrum"), "xi_max", c.xi_max);
    get(j.at("spectrum"), "xi_points", c.xi_points);
  }
  if (j.contains("validate")) {
    get(j.at("validate"), "random_potentials", c.random_potentials);
    get(j.at("validate"), "max_amplitude", c.max_amplitude);
  }
  if (j.contains("output")) {
    get(j.at("output"), "path", c.out);
    get(j.at("output"), "format", c.format);
  }
  get(j, "seed", c.seed);
  get(j, "jobs", c.jobs);
  return c;
}

}  // namespace

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::ConfigError, m); };
  if (wall.kind != "linear" && wall.kind != "linear_plus_bounded") fail("wall.kind must be linear|linear_plus_bounded");
  if (wall.kind == "linear_plus_bounded" && wall.bounded != "tanh" && wall.bounded != "gaussian" &&
      wall.bounded != "zero") {
    fail("wall.bounded must be tanh|gaussian|zero");
  }
  if (!(wall.scale > 0.0) || !(wall.y_cutoff > 0.0)) fail("wall scale and y_cutoff must be positive");
  if (n_max < 1) fail("basis.n_max must be >= 1");
  if (quad_points < 0) fail("basis.quad_points must be >= 0");
  if (!(solver.nodes_per_unit > 0.0) || !(solver.tol_solve > 0.0) || !(solver.tol_match > 0.0) ||
      !(solver.guard > 0.0) || !(solver.margin >= 0.0) || !(defect_bound > 0.0)) {
    fail("solver tolerances and densities must be positive");
  }
  if (solver.n_evanescent < 0) fail("solver.n_evanescent must be >= 0");
  if (!std::isnan(solver.X) && !(solver.X > 0.0)) fail("solver.X must be positive");
  static const char* tasks[] = {"spectrum", "channels", "scatter", "conductivity", "validate"};
  if (std::find(std::begin(tasks), std::end(tasks), task) == std::end(tasks)) fail("unknown task '" + task + "'");
  if (format != "json" && format != "csv") fail("format must be json or csv");
  if (!(window.second > window.first)) fail("window needs E- < E+");
  if (n_nodes < 3 || n_nodes % 2 == 0) fail("n_nodes must be odd and >= 3");
  if (!(e_max >= 0.0) || !(xi_max > 0.0) || xi_points < 2) fail("bad spectrum grid");
  if (random_potentials < 0 || !(max_amplitude >= 0.0)) fail("bad validate parameters");
  if (jobs < 1) fail("jobs must be >= 1");
  if (!std::isfinite(energy)) fail("energy must be finite");
}

ExperimentConfig parse_config(const std::string& text, bool toml) {
  return config_from_json(parse_document(text, toml), std::filesystem::current_path());
}

ExperimentConfig load_config(const std::string& path) {
  const auto base = std::filesystem::path(path).parent_path();
  return config_from_json(parse_document(read_file(path), is_toml(path)), base);
}

PotentialSpec parse_potential(const std::string& text, bool toml, Frame* frame) {
  const json j = parse_document(text, toml);
  if (frame) *frame = parse_frame(j);
  return potential_from_json(j);
}

WallSpec make_wall(const WallConfig& w) {
  if (w.kind == "linear") return WallSpec::linear();
  const double a = w.amplitude, s = w.scale;
  if (w.bounded == "zero") {
    return WallSpec::linear_plus_bounded([](double) { return 0.0; }, w.y_cutoff, [](double) { return 0.0; }, "zero");
  }
  if (w.bounded == "tanh") {
    return WallSpec::linear_plus_bounded(
        [a, s](double y) { return a * std::tanh(y / s); }, w.y_cutoff,
        [a, s](double y) {
          const double c = std::cosh(y / s);
          return a / (s * c * c);
        },
        "tanh");
  }
  if (w.bounded == "gaussian") {
    return WallSpec::linear_plus_bounded([a, s](double y) { return a * std::exp(-0.5 * y * y / (s * s)); },
                                         w.y_cutoff,
                                         [a, s](double y) { return -a * y / (s * s) * std::exp(-0.5 * y * y / (s * s)); },
                                         "gaussian");
  }
  throw Error(ErrorKind::ConfigError, "unknown bounded part '" + w.bounded + "'");
}

int default_quad_points(const ExperimentConfig& cfg) {
  if (cfg.quad_points > 0) return cfg.quad_points;
  return cfg.wall.kind == "linear" ? 4 * cfg.n_max + 64 : 8001;
}

TransverseBasis make_basis(const ExperimentConfig& cfg) {
  return build_basis(make_wall(cfg.wall), cfg.n_max, default_quad_points(cfg));
}

}  // namespace edgescatter
