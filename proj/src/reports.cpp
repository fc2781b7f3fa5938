#include "curved/reports.hpp"

#include "curved/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <span>
#include <sstream>
#include <thread>

namespace curved {

namespace {

double region_value(double m1, double m2, double m3) {
  return m1 * m1 * m2 * m2 + m1 * m1 * m3 * m3 + m2 * m2 * m3 * m3 - 2.0 * m1 * m2 * m3;
}

double angle_out(double radians, bool degrees) { return degrees ? radians * 180.0 / kPi : radians; }

nlohmann::json complex_list(const std::vector<std::complex<double>>& values) {
  auto out = nlohmann::json::array();
  for (const auto& z : values) out.push_back({z.real(), z.imag()});
  return out;
}

double max_abs_real(const std::vector<std::complex<double>>& values) {
  double out = 0.0;
  for (const auto& z : values) out = std::max(out, std::abs(z.real()));
  return out;
}

struct SweepPoint {
  StabilityReport report;
  double numeric_max_real;  // from the eigenvalues of L restricted to E-tilde
};

std::vector<SweepPoint> sweep(const AdmissibleMassTriple& masses, const std::vector<double>& omegas,
                              const Tolerances& tol, unsigned workers) {
  const RingConfiguration ring = ring_from_shape(shape_from_masses(masses));
  const NullVectors nulls = null_vectors(ring);
  std::vector<std::optional<SweepPoint>> out(omegas.size());
  parallel_for(omegas.size(), workers, [&](std::size_t k) {
    const double w = omegas[k];
    StabilityReport r = classify(masses, w, tol.boundary);
    const InvariantSubspaces sub = invariant_subspaces(assemble_blocks(masses.masses(), ring, w), nulls);
    const auto& numeric = w == 0.0 ? sub.spectrum_E : sub.spectrum_Etilde;
    out[k] = SweepPoint{std::move(r), max_abs_real(numeric)};
  });
  std::vector<SweepPoint> points;
  points.reserve(out.size());
  for (auto& p : out) points.push_back(std::move(*p));
  return points;
}

}  // namespace

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::IOFailure, "cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorKind::IOFailure, "write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::IOFailure, "cannot move output into place at " + path);
  }
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), count));
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        body(k);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(run);
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

RegionRaster::RegionRaster(int resolution, unsigned workers) : resolution_(resolution) {
  if (resolution < 16 || resolution > 4096) {
    throw Error(ErrorKind::InvalidInput, "resolution must lie in [16, 4096]");
  }
  const std::size_t cells = static_cast<std::size_t>(resolution) * resolution;
  values_.resize(cells);
  inside_.resize(cells);
  parallel_for(static_cast<std::size_t>(resolution), workers, [&](std::size_t row) {
    const int i = static_cast<int>(row);
    for (int j = 0; j < resolution_; ++j) {
      const double a = m1(i), b = m2(j), c = 1.0 - a - b;
      const double v = region_value(a, b, c);
      values_[index(i, j)] = v;
      inside_[index(i, j)] = c > 0.0 && v < 0.0;
    }
  });
}

std::size_t RegionRaster::inside_count() const {
  return static_cast<std::size_t>(std::count(inside_.begin(), inside_.end(), 1));
}

std::pair<int, int> RegionRaster::cell_at(double a, double b) const {
  if (!(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0)) {
    throw Error(ErrorKind::InvalidInput, "probe point must lie in (0, 1)^2");
  }
  const auto cell = [&](double x) { return std::min(resolution_ - 1, static_cast<int>(x * resolution_)); };
  return {cell(a), cell(b)};
}

std::size_t RegionRaster::component_size(int i0, int j0, bool diagonal) const {
  if (!inside(i0, j0)) return 0;
  std::vector<char> seen(inside_.size(), 0);
  std::vector<std::pair<int, int>> stack{{i0, j0}};
  seen[index(i0, j0)] = 1;
  std::size_t size = 0;
  while (!stack.empty()) {
    const auto [i, j] = stack.back();
    stack.pop_back();
    ++size;
    const std::pair<int, int> nbrs[] = {{i + 1, j},     {i - 1, j},     {i, j + 1},     {i, j - 1},
                                        {i + 1, j + 1}, {i + 1, j - 1}, {i - 1, j + 1}, {i - 1, j - 1}};
    for (const auto& [a, b] : std::span(nbrs).first(diagonal ? 8 : 4)) {
      if (a < 0 || b < 0 || a >= resolution_ || b >= resolution_) continue;
      if (!inside(a, b) || seen[index(a, b)]) continue;
      seen[index(a, b)] = 1;
      stack.emplace_back(a, b);
    }
  }
  return size;
}

std::string RegionRaster::to_csv() const {
  std::string out = "m1,m2,m3,value,inside\n";
  out.reserve(out.size() + values_.size() * 96);
  for (int i = 0; i < resolution_; ++i) {
    for (int j = 0; j < resolution_; ++j) {
      const double a = m1(i), b = m2(j);
      out += format_double(a) + ',' + format_double(b) + ',' + format_double(1.0 - a - b) + ',' +
             format_double(value(i, j)) + ',' + (inside(i, j) ? "1" : "0") + '\n';
    }
  }
  return out;
}

RegionProbe probe_region(double m1, double m2) {
  const double m3 = 1.0 - m1 - m2;
  const double v = region_value(m1, m2, m3);
  return {m1, m2, m3, v, m1 > 0.0 && m2 > 0.0 && m3 > 0.0 && v < 0.0};
}

Tolerances Tolerances::parse(const std::string& overrides) {
  Tolerances t;
  std::istringstream in(overrides);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, "tolerance override needs key=value: " + item);
    const std::string key = item.substr(0, eq);
    double value = 0.0;
    try {
      value = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidInput, "tolerance override value is not a number: " + item);
    }
    if (!(value > 0.0) || !std::isfinite(value)) {
      throw Error(ErrorKind::InvalidInput, "tolerance override must be positive: " + item);
    }
    if (key == "boundary") {
      t.boundary = value;
    } else if (key == "inner") {
      t.inner_tolerance = value;
    } else if (key == "distance-guard") {
      t.distance_guard = value;
    } else {
      throw Error(ErrorKind::InvalidInput, "unknown tolerance key: " + key);
    }
  }
  return t;
}

nlohmann::json region_summary(const RegionRaster& raster, const std::vector<RegionProbe>& probes) {
  nlohmann::json j;
  j["resolution"] = raster.resolution();
  j["inside_cells"] = raster.inside_count();
  const auto [ci, cj] = raster.cell_at(1.0 / 3.0, 1.0 / 3.0);
  const std::size_t component = raster.component_size(ci, cj, true);
  j["equal_mass_cell_inside"] = raster.inside(ci, cj);
  j["equal_mass_component_cells"] = component;
  j["equal_mass_component_cells_4_connected"] = raster.component_size(ci, cj, false);
  j["connected"] = component > 0 && component == raster.inside_count();
  auto list = nlohmann::json::array();
  for (const auto& p : probes) {
    const auto [i, k] = raster.cell_at(p.m1, p.m2);
    list.push_back({{"m1", p.m1},
                    {"m2", p.m2},
                    {"m3", p.m3},
                    {"value", p.value},
                    {"inside", p.inside},
                    {"cell", {i, k}},
                    {"cell_inside", raster.inside(i, k)}});
  }
  j["probes"] = list;
  return j;
}

nlohmann::json fixed_point_report(const AdmissibleMassTriple& masses, bool degrees) {
  const LyapunovCertificate cert = lyapunov_certificate(masses);
  const RingConfiguration ring = ring_from_shape(cert.shape);
  const MassVector mv = masses.masses();
  nlohmann::json j;
  j["angle_unit"] = degrees ? "degree" : "radian";
  j["masses"] = masses.values();
  j["shape"] = {{"alpha", angle_out(cert.shape.alpha(), degrees)}, {"beta", angle_out(cert.shape.beta(), degrees)}};
  auto lons = nlohmann::json::array();
  for (double x : ring.longitudes()) lons.push_back(angle_out(x, degrees));
  j["longitudes"] = lons;
  j["residual_norm"] = fixed_point_residual(mv, ring).norm();
  j["relation_error"] = three_body_relation_error(masses.values(), cert.shape);
  j["lyapunov"] = {{"hessian", {{cert.hessian(0, 0), cert.hessian(0, 1)}, {cert.hessian(1, 0), cert.hessian(1, 1)}}},
                   {"eigenvalues", {cert.eigenvalues[0], cert.eigenvalues[1]}},
                   {"trace", cert.trace},
                   {"half_determinant", cert.half_determinant},
                   {"half_determinant_closed_form", cert.half_determinant_closed},
                   {"certified", cert.certified}};
  return j;
}

nlohmann::json stability_report(const AdmissibleMassTriple& masses, const std::vector<double>& omegas,
                                const Tolerances& tol, unsigned workers, bool degrees) {
  if (omegas.empty()) throw Error(ErrorKind::InvalidInput, "no omega values requested");
  const auto points = sweep(masses, omegas, tol, workers);
  const StabilityReport& first = points.front().report;
  nlohmann::json j;
  j["angle_unit"] = degrees ? "degree" : "radian";
  j["masses"] = masses.values();
  j["shape"] = {{"alpha", angle_out(first.shape.alpha(), degrees)}, {"beta", angle_out(first.shape.beta(), degrees)}};
  j["lambda1"] = first.lambda1;
  j["lambda2"] = first.lambda2;
  j["lambda3"] = first.lambda3;
  j["omega_crit"] = first.omega_crit;
  auto list = nlohmann::json::array();
  for (const auto& p : points) {
    list.push_back({{"omega", p.report.omega},
                    {"verdict", std::string(to_string(p.report.verdict))},
                    {"subspace", p.report.omega == 0.0 ? "E" : "E-tilde"},
                    {"spectrum", complex_list(p.report.spectrum)},
                    {"numeric_max_abs_real", p.numeric_max_real}});
  }
  j["omegas"] = list;
  return j;
}

std::string omega_sweep_csv(const AdmissibleMassTriple& masses, const std::vector<double>& omegas,
                            const Tolerances& tol, unsigned workers) {
  const auto points = sweep(masses, omegas, tol, workers);
  std::string out = "omega,omega2_minus_lambda1,verdict,max_abs_real\n";
  for (const auto& p : points) {
    out += format_double(p.report.omega) + ',' +
           format_double(p.report.omega * p.report.omega - p.report.lambda1) + ',' +
           std::string(to_string(p.report.verdict)) + ',' + format_double(p.numeric_max_real) + '\n';
  }
  return out;
}

std::vector<double> omega_range(double start, double stop, double step) {
  if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(stop) || stop < start) {
    throw Error(ErrorKind::InvalidInput, "omega range needs start <= stop and a positive step");
  }
  const auto count = static_cast<long>(std::floor((stop - start) / step * (1.0 + 1e-12) + 1e-6)) + 1;
  if (count > 1000000) throw Error(ErrorKind::InvalidInput, "omega range has too many points");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(count));
  for (long k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
  return out;
}

std::string trajectory_csv(const MassVector& masses, const TrajectoryRecord& record) {
  const Eigen::Index n = static_cast<Eigen::Index>(masses.size());
  std::string out = "t";
  for (const char* name : {"theta", "phi", "p_theta", "p_phi"}) {
    for (Eigen::Index i = 1; i <= n; ++i) out += std::string(",") + name + std::to_string(i);
  }
  out += ",H,J\n";
  for (std::size_t k = 0; k < record.times.size(); ++k) {
    const PhaseState& s = record.states[k];
    out += format_double(record.times[k]);
    const Eigen::VectorXd y = s.packed();
    for (Eigen::Index i = 0; i < y.size(); ++i) out += ',' + format_double(y[i]);
    out += ',' + format_double(hamiltonian(masses, s)) + ',' + format_double(angular_momentum(s)) + '\n';
  }
  return out;
}

nlohmann::json trajectory_summary(const TrajectoryRecord& record, double omega) {
  return {{"omega", omega},
          {"steps", record.steps},
          {"final_time", record.times.empty() ? 0.0 : record.times.back()},
          {"energy_drift", record.energy_drift},
          {"momentum_drift", record.momentum_drift},
          {"equator_deviation", record.equator_deviation}};
}

}  // namespace curved
