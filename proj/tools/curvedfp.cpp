// curvedfp: command-line front end for the curved three-body fixed points.

#include "curved/errors.hpp"
#include "curved/reports.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <string>
#include <vector>

namespace {

using curved::Error;
using curved::ErrorKind;

enum ExitCode { kOk = 0, kInternal = 1, kInvalidInput = 2, kNoConvergence = 3 };

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IOFailure:
    case ErrorKind::DegenerateSpectrum:
    case ErrorKind::DegenerateBasis:
      return kInternal;
    case ErrorKind::NoConvergence:
    case ErrorKind::SingularIterate:
    case ErrorKind::StepFailure:
      return kNoConvergence;
    default:
      return kInvalidInput;
  }
}

// Reads a JSON object as CLI11 configuration: top-level keys are global
// options, nested objects are subcommand sections.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return {}; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void collect(const nlohmann::json& j, std::vector<std::string> parents,
                      std::vector<CLI::ConfigItem>& items) {
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto nested = parents;
        nested.push_back(key);
        collect(value, nested, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::string output = "-";
  std::uint64_t seed = 0;
  unsigned workers = 1;
  std::string tolerance_overrides;
  bool degrees = false;
};

void emit(const std::string& path, const std::string& content) {
  if (path == "-") {
    std::cout << content;
    std::cout.flush();
  } else {
    curved::write_file_atomic(path, content);
  }
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

curved::AdmissibleMassTriple masses_from(const std::vector<double>& m) {
  if (m.size() != 3) throw Error(ErrorKind::InvalidInput, "--masses needs exactly three values");
  return curved::AdmissibleMassTriple(m[0], m[1], m[2]);
}

std::vector<double> omegas_from(const std::vector<double>& single, const std::vector<double>& range) {
  if (!range.empty()) {
    if (range.size() != 3) throw Error(ErrorKind::InvalidInput, "--omega-range needs start stop step");
    return curved::omega_range(range[0], range[1], range[2]);
  }
  if (single.empty()) return {0.0};
  return single;
}

curved::IntegrationMethod method_from(const std::string& name) {
  if (name == "midpoint") return curved::IntegrationMethod::ImplicitMidpoint;
  if (name == "composition4") return curved::IntegrationMethod::MidpointComposition4;
  if (name == "dopri5") return curved::IntegrationMethod::AdaptiveDopri5;
  throw Error(ErrorKind::InvalidInput, "unknown method " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fixed points and relative equilibria of the curved three-body problem on the sphere"};
  app.require_subcommand(1);
  app.fallthrough();
  app.config_formatter(std::make_shared<JsonConfig>());
  app.set_config("--config", "", "JSON configuration file; command-line flags take precedence");

  Globals g;
  app.add_option("--output,-o", g.output, "Output path, '-' for stdout")->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for randomized commands")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads for scans and sweeps")
      ->check(CLI::Range(1u, 256u))
      ->capture_default_str();
  app.add_option("--tolerance-overrides", g.tolerance_overrides,
                 "Expert: key=value list with keys boundary, inner, distance-guard");
  app.add_flag("--degrees", g.degrees, "Print angles in degrees (computation stays in radians)");

  // region-scan
  auto* region = app.add_subcommand("region-scan", "Raster of the admissible mass region over (m1, m2)");
  int resolution = 512;
  std::vector<double> probes;
  std::string summary_path;
  region->add_option("--resolution", resolution, "Cells per axis, 16..4096")->capture_default_str();
  region->add_option("--probe", probes, "Exact probe points m1 m2 (repeatable)")->expected(2, CLI::detail::expected_max_vector_size);
  region->add_option("--summary", summary_path, "Summary JSON path (default: stderr)");

  // fixed-point
  auto* fixed = app.add_subcommand("fixed-point", "Fixed point for given masses or shape");
  std::vector<double> fp_masses, fp_shape;
  auto* fp_masses_opt = fixed->add_option("--masses", fp_masses, "m1 m2 m3")->expected(3);
  auto* fp_shape_opt = fixed->add_option("--shape", fp_shape, "alpha beta in radians")->expected(2);
  fp_masses_opt->excludes(fp_shape_opt);
  fixed->require_option(1);

  // stability
  auto* stability = app.add_subcommand("stability", "Spectral stability report");
  std::vector<double> st_masses, st_omega, st_range;
  stability->add_option("--masses", st_masses, "m1 m2 m3")->expected(3)->required();
  auto* st_omega_opt = stability->add_option("--omega", st_omega, "Angular velocities")->expected(1, 1000);
  stability->add_option("--omega-range", st_range, "start stop step")->expected(3)->excludes(st_omega_opt);

  // omega-sweep
  auto* sweep = app.add_subcommand("omega-sweep", "CSV of verdicts over an omega range");
  std::vector<double> sw_masses, sw_range{0.0, 2.0, 0.1};
  sweep->add_option("--masses", sw_masses, "m1 m2 m3")->expected(3)->required();
  sweep->add_option("--omega-range", sw_range, "start stop step")->expected(3)->capture_default_str();

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Integrate near a relative equilibrium");
  std::vector<double> sim_masses;
  double sim_omega = 0.0;
  curved::IntegratorOptions io;
  io.horizon = 10.0;
  std::string method_name = "midpoint";
  std::string perturb = "none";
  double amplitude = 1e-6;
  bool growth = false;
  std::string sim_summary;
  simulate->add_option("--masses", sim_masses, "m1 m2 m3")->expected(3)->required();
  simulate->add_option("--omega", sim_omega, "Frame angular velocity")->capture_default_str();
  simulate->add_option("--horizon", io.horizon, "Integration time")->capture_default_str();
  simulate->add_option("--step", io.step, "Fixed step (output spacing for dopri5)")->capture_default_str();
  simulate->add_option("--method", method_name, "midpoint | composition4 | dopri5")->capture_default_str();
  simulate->add_option("--record-every", io.record_every, "Store every k-th step")->capture_default_str();
  simulate->add_option("--perturb", perturb, "none | lambda1 | inplane | random")->capture_default_str();
  simulate->add_option("--amplitude", amplitude, "Perturbation size")->capture_default_str();
  simulate->add_flag("--growth", growth, "Run the growth-rate fit instead of a plain trajectory");
  simulate->add_option("--summary", sim_summary, "Summary JSON path (default: stderr)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInvalidInput;
  }

  try {
    const curved::Tolerances tol = curved::Tolerances::parse(g.tolerance_overrides);

    if (*region) {
      if (probes.size() % 2 != 0) throw Error(ErrorKind::InvalidInput, "--probe takes m1 m2 pairs");
      const curved::RegionRaster raster(resolution, g.workers);
      std::vector<curved::RegionProbe> points;
      for (std::size_t k = 0; k < probes.size(); k += 2) points.push_back(curved::probe_region(probes[k], probes[k + 1]));
      const std::string summary = dump(curved::region_summary(raster, points));
      emit(g.output, raster.to_csv());
      if (summary_path.empty()) {
        std::cerr << summary;
      } else {
        emit(summary_path, summary);
      }
    } else if (*fixed) {
      if (!fp_shape.empty()) {
        const curved::TriangleShape shape(fp_shape[0], fp_shape[1]);
        emit(g.output, dump(curved::fixed_point_report(curved::masses_from_shape(shape), g.degrees)));
      } else {
        emit(g.output, dump(curved::fixed_point_report(masses_from(fp_masses), g.degrees)));
      }
    } else if (*stability) {
      const auto masses = masses_from(st_masses);
      emit(g.output, dump(curved::stability_report(masses, omegas_from(st_omega, st_range), tol, g.workers, g.degrees)));
    } else if (*sweep) {
      const auto masses = masses_from(sw_masses);
      if (sw_range.size() != 3) throw Error(ErrorKind::InvalidInput, "--omega-range needs start stop step");
      emit(g.output, curved::omega_sweep_csv(masses, curved::omega_range(sw_range[0], sw_range[1], sw_range[2]), tol,
                                             g.workers));
    } else if (*simulate) {
      const auto masses = masses_from(sim_masses);
      io.method = method_from(method_name);
      io.inner_tolerance = tol.inner_tolerance;
      io.distance_guard = tol.distance_guard;
      nlohmann::json summary;
      if (growth) {
        curved::GrowthOptions go;
        if (perturb == "inplane") {
          go.mode = curved::PerturbationMode::InPlane;
        } else if (perturb != "lambda1" && perturb != "none") {
          throw Error(ErrorKind::InvalidInput, "--growth needs --perturb lambda1 or inplane");
        }
        go.amplitude = amplitude;
        go.horizon = io.horizon;
        go.step = io.step;
        go.method = io.method;
        summary = {{"omega", sim_omega}, {"mode", perturb == "inplane" ? "inplane" : "lambda1"}, {"amplitude", amplitude}};
        try {
          const auto r = curved::growth_rate_experiment(masses, sim_omega, go);
          summary["growth"] = {{"exponent", r.exponent},       {"predicted", r.predicted},
                               {"fit_rms", r.fit_rms},         {"fit_points", r.fit_points},
                               {"window_start", r.window_start}, {"window_end", r.window_end}};
        } catch (const Error& e) {
          if (e.kind() != ErrorKind::NoGrowthWindow) throw;
          summary["growth"] = {{"no_growth_window", true}, {"detail", e.what()}};
        }
        emit(g.output, dump(summary));
      } else {
        curved::PhaseState start = curved::relative_equilibrium_state(masses, sim_omega);
        if (perturb == "lambda1") {
          start = curved::perturbed_state(masses, sim_omega, curved::PerturbationMode::Lambda1, amplitude);
        } else if (perturb == "inplane") {
          start = curved::perturbed_state(masses, sim_omega, curved::PerturbationMode::InPlane, amplitude);
        } else if (perturb == "random") {
          std::mt19937_64 rng(g.seed);
          std::uniform_real_distribution<double> u(-amplitude, amplitude);
          for (Eigen::Index i = 0; i < start.size(); ++i) {
            start.theta[i] += u(rng);
            start.phi[i] += u(rng);
            start.ptheta[i] += u(rng);
            start.pphi[i] += u(rng);
          }
        } else if (perturb != "none") {
          throw Error(ErrorKind::InvalidInput, "unknown perturbation " + perturb);
        }
        const auto rec = curved::integrate(masses.masses(), start, sim_omega, io);
        summary = curved::trajectory_summary(rec, sim_omega);
        summary["perturbation"] = perturb;
        summary["max_deviation_from_rest"] = [&] {
          const auto rest = curved::relative_equilibrium_state(masses, sim_omega);
          double d = 0.0;
          for (const auto& s : rec.states) d = std::max(d, curved::deviation_from_rest(s, rest));
          return d;
        }();
        emit(g.output, curved::trajectory_csv(masses.masses(), rec));
        if (sim_summary.empty()) {
          std::cerr << dump(summary);
        } else {
          emit(sim_summary, dump(summary));
        }
      }
    }
  } catch (const curved::StepFailure& e) {
    std::cerr << "error: " << e.what() << " (t = " << e.time() << ")\n";
    return kNoConvergence;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kOk;
}
