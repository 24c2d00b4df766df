// nlstab: command line front end for closed-loop simulations, spectra and
// stability-region scans.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "nlstab/csv.hpp"
#include "nlstab/error.hpp"
#include "nlstab/experiments.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kNumerical = 3, kCheck = 4 };

struct Options {
  std::string config;
  std::string out = "out";
  int threads = 0;
  bool check = false;
  std::vector<double> amplitudes;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config, "scenario file (YAML)")->required()->check(CLI::ExistingFile);
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_flag("--check", o.check, "exit with 4 when a post-run check fails");
}

int report(const std::vector<nlstab::CheckOutcome>& checks, bool enforce) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
    ok = ok && c.pass;
  }
  return (enforce && !ok) ? kCheck : kOk;
}

void print_summary(const nlstab::ScenarioResult& r) {
  using nlstab::format_double;
  std::cout << "scenario " << r.name << ": d=" << format_double(r.d) << " k=" << format_double(r.k)
            << " steps=" << r.steps << " l2 " << format_double(r.initial_l2) << " -> "
            << format_double(r.final_l2) << "\n";
  if (r.fit && !r.fit->extinct()) {
    std::cout << "  decay rate " << format_double(r.fit->alpha) << " (r2 " << format_double(r.fit->r_squared) << ")\n";
  }
  if (r.extinction_time) std::cout << "  extinct at t=" << format_double(*r.extinction_time) << "\n";
  for (const auto& [name, m] : r.monitors) {
    std::cout << "  monitor " << name << ": max increase " << format_double(m.max_increase) << "\n";
  }
  if (r.weak_residual) std::cout << "  weak residual " << format_double(*r.weak_residual) << "\n";
  if (r.spectrum) std::cout << "  s_est " << format_double(r.spectrum->s_est) << "\n";
}

int run_with(nlstab::Scenario s, const Options& o, std::initializer_list<nlstab::Analysis> extra) {
  for (auto a : extra) {
    if (!s.wants(a)) s.analyses.push_back(a);
  }
  const auto r = nlstab::run_scenario(s, o.out);
  print_summary(r);
  return report(nlstab::check_scenario(s, r), o.check);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-loop nonlocal transport: simulation, spectrum and stability scans"};
  app.require_subcommand(1);
  Options o;

  auto* simulate = app.add_subcommand("simulate", "simulate a scenario and run its configured analyses");
  auto* spectrum = app.add_subcommand("spectrum", "roots of the characteristic function for the scenario's (d, k)");
  auto* region = app.add_subcommand("region", "scan a (d, k) grid and compare with the stability predicate");
  auto* lyapunov = app.add_subcommand("lyapunov", "simulate and monitor the matching Lyapunov functional");
  auto* extinction = app.add_subcommand("extinction", "simulate and report finite-time extinction");
  for (auto* sub : {simulate, spectrum, region, lyapunov, extinction}) add_common(sub, o);
  lyapunov->add_option("--amplitudes", o.amplitudes, "perturbation amplitudes to sweep for monotone decay")
      ->delimiter(',');
  region->add_option("--threads", o.threads, "worker threads for the scan (0: all cores)")->check(CLI::NonNegativeNumber);

  std::string plot_dir;
  auto* plot = app.add_subcommand("plot-data", "convert artifacts in a directory to gnuplot .dat files");
  plot->add_option("--dir", plot_dir, "artifact directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (plot->parsed()) {
      for (const auto& f : nlstab::emit_plot_data(plot_dir)) std::cout << f << "\n";
      return kOk;
    }
    const nlstab::Scenario s = nlstab::load_scenario(o.config);
    if (simulate->parsed()) return run_with(s, o, {});
    if (extinction->parsed()) return run_with(s, o, {nlstab::Analysis::Extinction});
    if (lyapunov->parsed()) {
      const double d = s.cfg.effective_d();
      if (!o.amplitudes.empty()) {
        const auto probes = nlstab::amplitude_sweep(s, o.amplitudes);
        std::filesystem::create_directories(o.out);
        nlstab::write_amplitude_csv(probes, (std::filesystem::path(o.out) / "amplitude_sweep.csv").string());
        double largest = 0.0;
        for (const auto& p : probes) {
          std::cout << "amplitude " << nlstab::format_double(p.amplitude) << ": relative increase "
                    << nlstab::format_double(p.relative_increase) << (p.monotone ? " monotone\n" : " not monotone\n");
          if (p.monotone) largest = std::max(largest, p.amplitude);
        }
        std::cout << "largest monotone amplitude " << nlstab::format_double(largest) << "\n";
        return kOk;
      }
      return run_with(s, o, {std::abs(d) < 1.0 ? nlstab::Analysis::LyapunovSmallD : nlstab::Analysis::LyapunovLargeD});
    }
    if (spectrum->parsed()) {
      std::filesystem::create_directories(o.out);
      const auto est = nlstab::run_spectrum(s);
      nlstab::write_roots_csv(est.roots, (std::filesystem::path(o.out) / "roots.csv").string());
      std::cout << "s_est " << nlstab::format_double(est.s_est) << " from " << est.roots.roots.size()
                << " roots (winding " << est.roots.winding_total << ")\n";
      return report({{"spectrum", est.roots.certified && !est.low_confidence,
                      est.roots.certified ? "root count certified" : "root count not certified"}},
                    o.check);
    }
    if (region->parsed()) {
      const nlstab::RegionScanSpec spec = s.region.value_or(nlstab::RegionScanSpec{});
      const auto r = nlstab::region_scan(spec, o.threads);
      std::filesystem::create_directories(o.out);
      nlstab::write_region_csv(r, (std::filesystem::path(o.out) / "region.csv").string());
      std::cout << r.points.size() << " points, " << r.mismatches() << " mismatches, " << r.failures()
                << " failures\n";
      return report(nlstab::check_region(r), o.check);
    }
  } catch (const nlstab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const nlstab::DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kConfig;
  } catch (const nlstab::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
