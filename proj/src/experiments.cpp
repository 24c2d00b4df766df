#include "nlstab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "nlstab/csv.hpp"
#include "nlstab/error.hpp"
#include "nlstab/profile.hpp"
#include "nlstab/simulate.hpp"
#include "nlstab/weak_form.hpp"

namespace nlstab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

// Runs f, prefixing any library error with the stage name while keeping its type.
template <class F>
auto stage(const std::string& name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(name + ": " + e.what());
  } catch (const DomainError& e) {
    throw DomainError(name + ": " + e.what());
  } catch (const NumericalError& e) {
    throw NumericalError(name + ": " + e.what());
  }
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json fit_json(const DecayFit& f) {
  json j;
  j["alpha"] = f.alpha;
  j["c"] = f.c;
  j["r2"] = f.r_squared;
  j["window"] = {f.t_start, f.t_end};
  j["points"] = f.points;
  j["extinction_time"] = optional_number(f.extinction_time);
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

std::string bool_cell(bool b) { return b ? "1" : "0"; }

std::optional<double> first_crossing(const std::vector<double>& t, const std::vector<double>& s, double level) {
  for (std::size_t i = 1; i < s.size(); ++i) {
    if (s[i] >= level && s[i - 1] < level) {
      const double w = (level - s[i - 1]) / (s[i] - s[i - 1]);
      return t[i - 1] + w * (t[i] - t[i - 1]);
    }
  }
  if (!s.empty() && s.front() >= level) return t.front();
  return std::nullopt;
}

// Header plus raw string cells; region CSVs carry a text status column.
struct TextTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::size_t column(const std::string& name, const std::string& file) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError(file + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

TextTable read_text_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  TextTable t;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    t.rows.push_back(split(line));
    if (t.rows.back().size() != t.header.size()) throw ConfigError(path + ": ragged row");
  }
  return t;
}

RegionPoint scan_point(const RegionScanSpec& spec, double d, double k) {
  RegionPoint p;
  p.d = d;
  p.k = k;
  try {
    p.verdict = classify_stability(d, k, spec.n_modes);
    if (spec.simulate_and_fit) {
      ClosedLoopConfig cfg;
      cfg.rho_bar = 1.0;
      cfg.k = k;
      cfg.velocity = VelocityModel::constant(1.0, {-1e6, 1e6});
      cfg.freeze_velocity = true;
      cfg.linear_d = d;
      cfg.n_cells = spec.fit_n_cells;
      cfg.t_final = spec.fit_t_final;
      cfg.store_snapshots = false;
      const double steps = spec.fit_t_final * spec.fit_n_cells / cfg.cfl;
      cfg.record_every = std::max(1, static_cast<int>(steps / 400.0));
      const auto rho0 = sample_cell_averages(
          perturbation_profile(1.0, PerturbationShape::Compatible, spec.fit_amplitude), cfg.n_cells);
      const TrajectoryRecord traj = simulate(cfg, rho0);
      const DecayFit fit = fit_decay_rate(traj.times, traj.l2);
      p.alpha_sim = fit.extinct() ? std::numeric_limits<double>::infinity() : fit.alpha;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    p.status = msg.empty() ? "error" : msg;
  }
  return p;
}

}  // namespace

std::string ScenarioResult::summary_json() const {
  json j;
  j["name"] = name;
  j["rho_bar"] = equilibrium.rho_bar;
  j["lambda_bar"] = equilibrium.lambda_bar;
  j["d"] = d;
  j["k"] = k;
  j["by_theorem"] = by_theorem;
  j["steps"] = steps;
  j["dx"] = dx;
  j["max_mass_balance_defect"] = max_mass_balance_defect;
  j["initial"] = {{"l1", initial_l1}, {"l2", initial_l2}, {"linf", initial_linf}};
  j["final"] = {{"l1", final_l1}, {"l2", final_l2}, {"linf", final_linf}};
  if (fit) {
    j["fit"] = fit_json(*fit);
  } else {
    j["fit"] = nullptr;
  }
  if (!fit_note.empty()) j["fit_note"] = fit_note;
  j["extinction"] = {{"time", optional_number(extinction_time)},
                     {"displacement", optional_number(extinction_displacement)},
                     {"exit_time", optional_number(exit_time)}};
  json mons = json::array();
  for (const auto& [n, m] : monitors) {
    mons.push_back({{"name", n},
                    {"initial", m.initial},
                    {"final", m.functional.empty() ? 0.0 : m.functional.back()},
                    {"max_increase", m.max_increase}});
  }
  j["monitors"] = mons;
  j["weak_residual"] = optional_number(weak_residual);
  if (spectrum) {
    j["spectrum"] = {{"s_est", spectrum->s_est},
                     {"asymptote", std::isfinite(spectrum->asymptote) ? json(spectrum->asymptote) : json(nullptr)},
                     {"roots_used", spectrum->roots_used},
                     {"degenerate", spectrum->degenerate},
                     {"low_confidence", spectrum->low_confidence},
                     {"certified", spectrum->roots.certified}};
  } else {
    j["spectrum"] = nullptr;
  }
  return j.dump(2) + "\n";
}

AbscissaEstimate run_spectrum(const Scenario& s) {
  return stage("spectrum", [&] {
    const double d = s.cfg.effective_d();
    AbscissaEstimate est = spectral_abscissa(d, s.cfg.k, s.spectrum.n_modes);
    if (s.spectrum.window) est.roots = find_roots(*s.spectrum.window, d, s.cfg.k);
    return est;
  });
}

ScenarioResult run_scenario(const Scenario& s, const std::string& out_dir) {
  stage("config", [&] { s.validate(); });
  const bool write = !out_dir.empty();
  if (write) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw ConfigError("output: cannot create " + out_dir);
  }
  auto out = [&](const std::string& file) { return (fs::path(out_dir) / file).string(); };

  ClosedLoopConfig cfg = s.cfg;
  cfg.store_snapshots = write || s.wants(Analysis::LyapunovSmallD) || s.wants(Analysis::LyapunovLargeD) ||
                        s.wants(Analysis::WeakResidual);

  ScenarioResult r;
  r.name = s.name;
  r.k = cfg.k;
  r.dx = cfg.dx();
  stage("equilibrium", [&] {
    r.equilibrium = equilibrium_summary(cfg.rho_bar, cfg.velocity);
    r.d = cfg.effective_d() + 0.0;  // no -0 in reports
  });
  r.by_theorem = theorem_predicts_stable(r.d, r.k);

  const DensityField rho0 = stage("initial", [&] { return make_initial(s); });
  const TrajectoryRecord traj = stage("simulate", [&] { return simulate(cfg, rho0); });
  r.steps = traj.steps;
  r.max_mass_balance_defect = traj.max_mass_balance_defect;
  r.initial_l1 = traj.l1.front();
  r.initial_l2 = traj.l2.front();
  r.initial_linf = traj.linf.front();
  r.final_l1 = traj.l1.back();
  r.final_l2 = traj.l2.back();
  r.final_linf = traj.linf.back();

  if (write) {
    stage("export", [&] {
      std::vector<std::vector<std::string>> rows;
      rows.reserve(traj.size());
      for (std::size_t i = 0; i < traj.size(); ++i) {
        rows.push_back({format_double(traj.times[i]), format_double(traj.W[i]), format_double(traj.u[i]),
                        format_double(traj.y[i]), format_double(traj.l1[i]), format_double(traj.l2[i]),
                        format_double(traj.linf[i]), format_double(traj.displacement[i])});
      }
      write_csv(out("trajectory.csv"), {"t", "W", "u", "y", "l1", "l2", "linf", "displacement"}, rows);
      write_snapshot_csv(rho0, out("initial.csv"));
      write_snapshot_csv(traj.final_state, out("final.csv"));
      fs::create_directories(out("snapshots"));
      for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        char file[32];
        std::snprintf(file, sizeof file, "snapshot_%05zu.csv", i);
        write_snapshot_csv(traj.snapshots[i], (fs::path(out_dir) / "snapshots" / file).string());
      }
    });
  }

  if (s.wants(Analysis::Extinction)) {
    r.extinction_time = traj.extinction_time;
    r.extinction_displacement = traj.extinction_displacement;
    r.exit_time = first_crossing(traj.times, traj.displacement, 1.0);
  }

  if (s.wants(Analysis::DecayFit)) {
    stage("decay-fit", [&] {
      if (r.initial_l2 == 0.0) {
        r.fit_note = "zero initial deviation";
        return;
      }
      r.fit = fit_decay_rate(traj.times, traj.l2);
      if (write) write_text(out("fit.json"), fit_json(*r.fit).dump(2) + "\n");
    });
  }

  for (Analysis a : {Analysis::LyapunovSmallD, Analysis::LyapunovLargeD}) {
    if (!s.wants(a)) continue;
    stage(to_string(a), [&] {
      const MonitorCase mc = a == Analysis::LyapunovSmallD ? MonitorCase::small_d(cfg.rho_bar, r.d, r.k)
                                                           : MonitorCase::large_d(cfg.rho_bar, r.d, r.k);
      MonitorSeries m = monitor(traj, mc);
      if (write) {
        std::vector<std::vector<std::string>> rows;
        for (std::size_t i = 0; i < m.t.size(); ++i) {
          rows.push_back({format_double(m.t[i]), format_double(m.functional[i]), format_double(m.ratio[i])});
        }
        write_csv(out("monitor_" + mc.name() + ".csv"), {"t", "functional", "ratio"}, rows);
      }
      r.monitors.emplace_back(mc.name(), std::move(m));
    });
  }

  if (s.wants(Analysis::WeakResidual)) {
    stage("weak-residual", [&] {
      const double tau = std::min(1.0, cfg.t_final);
      r.weak_residual = weak_residual(traj, cfg, linear_test_function(tau));
    });
  }

  if (s.wants(Analysis::Spectrum)) {
    r.spectrum = run_spectrum(s);
    if (write) stage("export", [&] { write_roots_csv(r.spectrum->roots, out("roots.csv")); });
  }

  if (write) stage("export", [&] { write_text(out("summary.json"), r.summary_json()); });
  return r;
}

std::vector<AmplitudeProbe> amplitude_sweep(const Scenario& s, const std::vector<double>& amplitudes) {
  if (s.initial.kind != InitialSpec::Kind::Perturbation) {
    throw ConfigError("amplitude sweep: initial.type must be perturbation");
  }
  std::vector<AmplitudeProbe> out;
  for (double amp : amplitudes) {
    Scenario run = s;
    run.initial.amplitude = amp;
    run.analyses = {std::abs(s.cfg.effective_d()) < 1.0 ? Analysis::LyapunovSmallD : Analysis::LyapunovLargeD};
    const ScenarioResult r = run_scenario(run);
    const MonitorSeries& m = r.monitors.front().second;
    AmplitudeProbe p;
    p.amplitude = amp;
    p.relative_increase = m.initial > 0.0 ? m.max_increase / m.initial : 0.0;
    p.monotone = m.nonincreasing(1e-9);
    out.push_back(p);
  }
  return out;
}

void write_amplitude_csv(const std::vector<AmplitudeProbe>& probes, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& p : probes) {
    rows.push_back({format_double(p.amplitude), format_double(p.relative_increase), bool_cell(p.monotone)});
  }
  write_csv(path, {"amplitude", "relative_increase", "monotone"}, rows);
}

int RegionResult::mismatches() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const RegionPoint& p) { return p.mismatch(); }));
}

int RegionResult::failures() const {
  return static_cast<int>(std::count_if(points.begin(), points.end(), [](const RegionPoint& p) { return p.failed(); }));
}

RegionResult region_scan(const RegionScanSpec& spec, int threads) {
  stage("region", [&] { spec.validate(); });
  RegionResult result;
  result.with_fit = spec.simulate_and_fit;
  for (double d : spec.d.values()) {
    for (double k : spec.k.values()) {
      if (spec.excluded(d, k)) continue;
      RegionPoint p;
      p.d = d;
      p.k = k;
      result.points.push_back(p);
    }
  }

  int n_threads = threads > 0 ? threads : spec.threads;
  if (n_threads <= 0) n_threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min<int>(n_threads, static_cast<int>(std::max<std::size_t>(1, result.points.size())));

  // Each worker writes only to its own slot, so the output order is fixed by
  // the grid, not by completion order.
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < result.points.size(); i = next++) {
      result.points[i] = scan_point(spec, result.points[i].d, result.points[i].k);
    }
  };
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  return result;
}

void write_region_csv(const RegionResult& r, const std::string& path) {
  std::vector<std::string> header{"d", "k", "s_est", "stable", "by_theorem"};
  if (r.with_fit) header.push_back("alpha_sim");
  header.push_back("mismatch");
  header.push_back("status");
  std::vector<std::vector<std::string>> rows;
  rows.reserve(r.points.size());
  for (const auto& p : r.points) {
    std::vector<std::string> row{format_double(p.d), format_double(p.k),
                                 p.failed() ? "nan" : format_double(p.verdict.s_est),
                                 bool_cell(p.verdict.stable), bool_cell(p.verdict.by_theorem)};
    if (r.with_fit) row.push_back(p.alpha_sim ? format_double(*p.alpha_sim) : "nan");
    row.push_back(bool_cell(p.mismatch()));
    row.push_back(p.status);
    rows.push_back(std::move(row));
  }
  write_csv(path, header, rows);
}

void write_roots_csv(const RootSet& roots, const std::string& path) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& root : roots.roots) {
    rows.push_back({format_double(root.value.real()), format_double(root.value.imag()), format_double(root.residual)});
  }
  write_csv(path, {"re", "im", "residual"}, rows);
}

void write_snapshot_csv(const DensityField& f, const std::string& path) {
  const Eigen::VectorXd x = cell_centers(f.size());
  std::vector<std::vector<std::string>> rows;
  rows.reserve(static_cast<std::size_t>(f.size()));
  for (Eigen::Index i = 0; i < f.size(); ++i) rows.push_back({format_double(x[i]), format_double(f.cells[i])});
  write_csv(path, {"x", "rho"}, rows);
}

std::vector<std::string> emit_plot_data(const std::string& dir) {
  const fs::path base(dir);
  std::vector<std::string> written;
  std::string script = "# gnuplot script\nset terminal pngcairo size 900,600\n";

  auto convert = [&](const std::string& in_name, const std::string& out_name,
                     const std::vector<std::string>& columns) {
    const fs::path in = base / in_name;
    if (!fs::exists(in)) return false;
    const TextTable t = read_text_table(in.string());
    std::vector<std::size_t> idx;
    for (const auto& c : columns) idx.push_back(t.column(c, in.string()));
    std::string text = "#";
    for (const auto& c : columns) text += " " + c;
    text += "\n";
    for (const auto& row : t.rows) {
      for (std::size_t j = 0; j < idx.size(); ++j) text += (j ? " " : "") + row[idx[j]];
      text += "\n";
    }
    write_text((base / out_name).string(), text);
    written.push_back((base / out_name).string());
    return true;
  };

  if (convert("trajectory.csv", "norms.dat", {"t", "l2"})) {
    script += "set output 'norms.png'\nset logscale y\nset xlabel 't'\nset ylabel 'L2 deviation'\n"
              "plot 'norms.dat' using 1:2 with lines title 'l2'\nunset logscale y\n";
  }
  if (convert("region.csv", "region.dat", {"d", "k", "stable"})) {
    script += "set output 'region.png'\nset xlabel 'd'\nset ylabel 'k'\nset palette defined (0 'red', 1 'blue')\n"
              "plot 'region.dat' using 1:2:3 with points pt 5 palette notitle\n";
  }
  if (convert("roots.csv", "spectrum.dat", {"re", "im"})) {
    script += "set output 'spectrum.png'\nset xlabel 'Re'\nset ylabel 'Im'\n"
              "plot 'spectrum.dat' using 1:2 with points pt 7 title 'roots'\n";
  }
  if (written.empty()) throw ConfigError("plot-data: no trajectory.csv, region.csv or roots.csv in " + dir);
  write_text((base / "plot.gp").string(), script);
  written.push_back((base / "plot.gp").string());
  return written;
}

std::vector<CheckOutcome> check_scenario(const Scenario& s, const ScenarioResult& r) {
  std::vector<CheckOutcome> out;
  auto add = [&](std::string name, bool pass, std::string detail) {
    out.push_back({std::move(name), pass, std::move(detail)});
  };
  add("mass-balance", r.max_mass_balance_defect <= 1e-12,
      "max defect " + format_double(r.max_mass_balance_defect));
  for (const auto& [name, m] : r.monitors) {
    add("monitor-" + name, m.nonincreasing(1e-9),
        "max increase " + format_double(m.max_increase) + " vs F(0) " + format_double(m.initial));
  }
  if (s.wants(Analysis::DecayFit)) {
    if (!r.fit) {
      add("decay-fit", true, r.fit_note);
    } else if (r.fit->extinct()) {
      add("decay-fit", true, "extinct at " + format_double(*r.fit->extinction_time));
    } else {
      const bool ok = !r.by_theorem || r.fit->alpha > 0.0;
      add("decay-fit", ok, "alpha " + format_double(r.fit->alpha) + (r.by_theorem ? " (stable predicted)" : ""));
    }
  }
  if (s.wants(Analysis::Extinction)) {
    const double limit = 1.0 + 5.0 * r.dx;
    const bool ok = r.extinction_displacement && *r.extinction_displacement <= limit;
    add("extinction", ok,
        r.extinction_displacement ? "displacement " + format_double(*r.extinction_displacement) + " limit " +
                                        format_double(limit)
                                  : "not extinct");
  }
  if (r.weak_residual) {
    const double limit = 10.0 * r.dx * std::max(1.0, r.equilibrium.rho_bar + r.initial_linf);
    add("weak-residual", *r.weak_residual <= limit, "residual " + format_double(*r.weak_residual));
  }
  if (r.spectrum) {
    add("spectrum", r.spectrum->roots.certified && !r.spectrum->low_confidence,
        "s_est " + format_double(r.spectrum->s_est));
  }
  return out;
}

std::vector<CheckOutcome> check_region(const RegionResult& r) {
  return {{"region-mismatches", r.mismatches() == 0, std::to_string(r.mismatches()) + " mismatches"},
          {"region-failures", r.failures() == 0, std::to_string(r.failures()) + " failed points"}};
}

}  // namespace nlstab
