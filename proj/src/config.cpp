#include "nlstab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include "nlstab/error.hpp"

namespace nlstab {

namespace fs = std::filesystem;

namespace {

void require_keys(const YAML::Node& node, const std::string& where,
                  std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <class T>
T get(const YAML::Node& node, const char* key, const std::string& where, T fallback) {
  const YAML::Node v = node[key];
  if (!v) return fallback;
  try {
    return v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(where + "." + key + ": bad value");
  }
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  const fs::path p(path);
  return p.is_absolute() ? p.string() : (fs::path(base_dir) / p).string();
}

Interval parse_range(const YAML::Node& n, const std::string& where) {
  if (!n.IsSequence() || n.size() != 2) throw ConfigError(where + ": expected [lo, hi]");
  return {n[0].as<double>(), n[1].as<double>()};
}

VelocityModel parse_velocity(const YAML::Node& n, double rho_bar, const std::string& base_dir) {
  const std::string where = "model.velocity";
  require_keys(n, where, {"kind", "coefficients", "speed", "table", "valid_range"});
  const auto kind = get<std::string>(n, "kind", where, "reciprocal");
  const bool has_range = static_cast<bool>(n["valid_range"]);
  if (kind == "reciprocal") {
    return has_range ? VelocityModel::reciprocal(parse_range(n["valid_range"], where))
                     : VelocityModel::reciprocal_around(rho_bar);
  }
  if (kind == "polynomial" || kind == "constant") {
    if (!has_range) throw ConfigError(where + ": valid_range required for kind " + kind);
    const Interval r = parse_range(n["valid_range"], where);
    if (kind == "constant") return VelocityModel::constant(get<double>(n, "speed", where, 1.0), r);
    if (!n["coefficients"]) throw ConfigError(where + ": coefficients required");
    return VelocityModel::polynomial(n["coefficients"].as<std::vector<double>>(), r);
  }
  if (kind == "tabulated") {
    if (!n["table"]) throw ConfigError(where + ": table required");
    const std::string path = resolve(n["table"].as<std::string>(), base_dir);
    if (!fs::exists(path)) throw ConfigError(where + ": table file not found: " + path);
    return VelocityModel::tabulated_from_csv(path);
  }
  throw ConfigError(where + ": unknown kind '" + kind + "'");
}

SolverMethod parse_method(const std::string& s) {
  if (s == "upwind") return SolverMethod::Upwind;
  if (s == "characteristic") return SolverMethod::Characteristic;
  throw ConfigError("solver.method: unknown method '" + s + "'");
}

GridAxis parse_axis(const YAML::Node& n, const std::string& where, GridAxis fallback) {
  if (!n) return fallback;
  require_keys(n, where, {"min", "max", "step"});
  return {get<double>(n, "min", where, fallback.min), get<double>(n, "max", where, fallback.max),
          get<double>(n, "step", where, fallback.step)};
}

Window parse_window(const YAML::Node& n) {
  if (!n.IsSequence() || n.size() != 4) throw ConfigError("spectrum.window: expected [re_min, re_max, im_min, im_max]");
  return {n[0].as<double>(), n[1].as<double>(), n[2].as<double>(), n[3].as<double>()};
}

}  // namespace

Analysis parse_analysis(const std::string& name) {
  if (name == "lyapunov-small-d") return Analysis::LyapunovSmallD;
  if (name == "lyapunov-large-d") return Analysis::LyapunovLargeD;
  if (name == "decay-fit") return Analysis::DecayFit;
  if (name == "weak-residual") return Analysis::WeakResidual;
  if (name == "spectrum") return Analysis::Spectrum;
  if (name == "extinction") return Analysis::Extinction;
  throw ConfigError("unknown analysis '" + name + "'");
}

std::string to_string(Analysis a) {
  switch (a) {
    case Analysis::LyapunovSmallD: return "lyapunov-small-d";
    case Analysis::LyapunovLargeD: return "lyapunov-large-d";
    case Analysis::DecayFit: return "decay-fit";
    case Analysis::WeakResidual: return "weak-residual";
    case Analysis::Spectrum: return "spectrum";
    case Analysis::Extinction: return "extinction";
  }
  return "?";
}

std::vector<double> GridAxis::values() const {
  if (!(step > 0.0)) throw ConfigError("grid step must be > 0");
  if (max < min) throw ConfigError("grid max must be >= min");
  const auto n = static_cast<long>(std::floor((max - min) / step + 1e-9));
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n + 1));
  for (long i = 0; i <= n; ++i) {
    // snap to 1e-12 so that e.g. -1.4 + 7 * 0.2 prints as 0
    out.push_back(std::round((min + static_cast<double>(i) * step) * 1e12) / 1e12);
  }
  return out;
}

void RegionScanSpec::validate() const {
  (void)d.values();
  (void)k.values();
  if (!(margin >= 0.0)) throw ConfigError("region.margin must be >= 0");
  if (n_modes < 1) throw ConfigError("region.n_modes must be >= 1");
  if (fit_n_cells < 10) throw ConfigError("region.fit_n_cells must be >= 10");
  if (!(fit_t_final > 0.0)) throw ConfigError("region.fit_t_final must be > 0");
  if (threads < 0) throw ConfigError("region.threads must be >= 0");
}

bool RegionScanSpec::excluded(double dv, double kv) const {
  return std::abs(dv + 1.0) < margin || std::abs(std::abs(kv) - 1.0) < margin;
}

bool Scenario::wants(Analysis a) const {
  return std::find(analyses.begin(), analyses.end(), a) != analyses.end();
}

void Scenario::validate() const {
  cfg.validate();
  if (spectrum.n_modes < 1) throw ConfigError("spectrum.n_modes must be >= 1");
  if (spectrum.window) {
    const Window& w = *spectrum.window;
    if (!(w.re_min < w.re_max && w.im_min < w.im_max)) throw ConfigError("spectrum.window is empty");
  }
  switch (initial.kind) {
    case InitialSpec::Kind::Bump:
      if (initial.center < 0.0 || initial.center > 1.0) throw ConfigError("initial.center must lie in [0, 1]");
      if (!(initial.width > 0.0 && initial.width <= 1.0)) throw ConfigError("initial.width must lie in (0, 1]");
      break;
    case InitialSpec::Kind::Csv:
      if (!fs::exists(initial.path)) throw ConfigError("initial.path not found: " + initial.path);
      break;
    default:
      break;
  }
  if (region) region->validate();
}

Scenario parse_scenario(const std::string& yaml_text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml: ") + e.what());
  }
  Scenario s;
  if (root.IsNull()) return s;
  try {
    require_keys(root, "config", {"name", "seed", "model", "solver", "initial", "analyses", "spectrum", "region"});
    s.name = get<std::string>(root, "name", "config", s.name);
    s.seed = get<std::uint64_t>(root, "seed", "config", 0);

    const YAML::Node m = root["model"];
    if (m) {
      require_keys(m, "model", {"rho_bar", "k", "velocity"});
      s.cfg.rho_bar = get<double>(m, "rho_bar", "model", 0.0);
      s.cfg.k = get<double>(m, "k", "model", 0.0);
    }
    s.cfg.velocity = (m && m["velocity"]) ? parse_velocity(m["velocity"], s.cfg.rho_bar, base_dir)
                                          : VelocityModel::reciprocal_around(s.cfg.rho_bar);

    if (const YAML::Node n = root["solver"]) {
      const std::string w = "solver";
      require_keys(n, w, {"n_cells", "cfl", "t_final", "record_every", "method", "freeze_velocity", "linear_d"});
      s.cfg.n_cells = get<int>(n, "n_cells", w, s.cfg.n_cells);
      s.cfg.cfl = get<double>(n, "cfl", w, s.cfg.cfl);
      s.cfg.t_final = get<double>(n, "t_final", w, s.cfg.t_final);
      s.cfg.record_every = get<int>(n, "record_every", w, s.cfg.record_every);
      s.cfg.method = parse_method(get<std::string>(n, "method", w, "upwind"));
      s.cfg.freeze_velocity = get<bool>(n, "freeze_velocity", w, false);
      if (n["linear_d"]) s.cfg.linear_d = get<double>(n, "linear_d", w, 0.0);
    }

    if (const YAML::Node n = root["initial"]) {
      const std::string w = "initial";
      require_keys(n, w, {"type", "value", "center", "width", "height", "shape", "amplitude", "path"});
      const auto type = get<std::string>(n, "type", w, "perturbation");
      InitialSpec& in = s.initial;
      if (type == "constant") {
        in.kind = InitialSpec::Kind::Constant;
        in.value = get<double>(n, "value", w, s.cfg.rho_bar);
      } else if (type == "bump") {
        in.kind = InitialSpec::Kind::Bump;
        in.center = get<double>(n, "center", w, in.center);
        in.width = get<double>(n, "width", w, in.width);
        in.height = get<double>(n, "height", w, in.height);
      } else if (type == "perturbation") {
        in.kind = InitialSpec::Kind::Perturbation;
        in.shape = parse_shape(get<std::string>(n, "shape", w, "sine"));
        in.amplitude = get<double>(n, "amplitude", w, 0.0);
      } else if (type == "csv") {
        in.kind = InitialSpec::Kind::Csv;
        if (!n["path"]) throw ConfigError("initial.path required for type csv");
        in.path = resolve(n["path"].as<std::string>(), base_dir);
      } else {
        throw ConfigError("initial.type: unknown type '" + type + "'");
      }
    }

    if (const YAML::Node n = root["analyses"]) {
      if (!n.IsSequence()) throw ConfigError("analyses: expected a list");
      for (const auto& a : n) s.analyses.push_back(parse_analysis(a.as<std::string>()));
    }

    if (const YAML::Node n = root["spectrum"]) {
      require_keys(n, "spectrum", {"n_modes", "window"});
      s.spectrum.n_modes = get<int>(n, "n_modes", "spectrum", s.spectrum.n_modes);
      if (n["window"]) s.spectrum.window = parse_window(n["window"]);
    }

    if (const YAML::Node n = root["region"]) {
      const std::string w = "region";
      require_keys(n, w, {"d", "k", "margin", "n_modes", "simulate_and_fit", "fit_n_cells", "fit_t_final",
                          "fit_amplitude", "threads"});
      RegionScanSpec r;
      r.d = parse_axis(n["d"], "region.d", r.d);
      r.k = parse_axis(n["k"], "region.k", r.k);
      r.margin = get<double>(n, "margin", w, r.margin);
      r.n_modes = get<int>(n, "n_modes", w, r.n_modes);
      r.simulate_and_fit = get<bool>(n, "simulate_and_fit", w, r.simulate_and_fit);
      r.fit_n_cells = get<int>(n, "fit_n_cells", w, r.fit_n_cells);
      r.fit_t_final = get<double>(n, "fit_t_final", w, r.fit_t_final);
      r.fit_amplitude = get<double>(n, "fit_amplitude", w, r.fit_amplitude);
      r.threads = get<int>(n, "threads", w, r.threads);
      s.region = r;
    }
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("yaml: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  s.validate();
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream text;
  text << in.rdbuf();
  const fs::path parent = fs::path(path).parent_path();
  return parse_scenario(text.str(), parent.empty() ? "." : parent.string());
}

DensityField make_initial(const Scenario& s) {
  const InitialSpec& in = s.initial;
  const int n = s.cfg.n_cells;
  switch (in.kind) {
    case InitialSpec::Kind::Constant: {
      DensityField f;
      f.cells = Eigen::VectorXd::Constant(n, in.value);
      return f;
    }
    case InitialSpec::Kind::Bump:
      return sample_cell_averages(bump_profile(in.center, in.width, in.height), n);
    case InitialSpec::Kind::Perturbation:
      return sample_cell_averages(perturbation_profile(s.cfg.rho_bar, in.shape, in.amplitude, s.seed), n);
    case InitialSpec::Kind::Csv: {
      DensityField f = read_snapshot_csv(in.path);
      if (f.size() != n) {
        throw ConfigError("initial csv has " + std::to_string(f.size()) + " cells, solver.n_cells is " +
                          std::to_string(n));
      }
      f.t = 0.0;
      return f;
    }
  }
  throw ConfigError("bad initial kind");
}

}  // namespace nlstab
