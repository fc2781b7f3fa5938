#pragma once

// Data products behind the command-line front end: region rasters, fixed-point
// and stability reports, ω-sweeps and trajectory tables.

#include "curved/dynamics.hpp"
#include "curved/reduction.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace curved {

// "%.17g", so that values round-trip exactly.
std::string format_double(double x);

// Writes to `path` through a sibling temporary file and a rename, so a failed
// run never leaves partial output. Throws IOFailure.
void write_file_atomic(const std::string& path, const std::string& content);

// Runs body(0..count-1) over at most `workers` threads. Results must be stored
// by index; the first exception thrown by any task is rethrown.
void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& body);

// Evaluation grid over (m1, m2) in (0, 1)^2 at cell centres (i + 1/2) / n.
// Cells with m1 + m2 >= 1 have no positive m3 and are outside.
class RegionRaster {
 public:
  RegionRaster(int resolution, unsigned workers = 1);

  int resolution() const noexcept { return resolution_; }
  double m1(int i) const noexcept { return (i + 0.5) / resolution_; }
  double m2(int j) const noexcept { return (j + 0.5) / resolution_; }
  double value(int i, int j) const { return values_[index(i, j)]; }
  bool inside(int i, int j) const { return inside_[index(i, j)] != 0; }
  std::size_t inside_count() const;

  // Cell containing (m1, m2); throws InvalidInput outside (0, 1)^2.
  std::pair<int, int> cell_at(double m1, double m2) const;

  // Size of the inside component containing cell (i, j), 0 if the cell is
  // outside. The region has cusps reaching the simplex vertices that the raster
  // resolves as diagonal chains, so connectivity is 8-neighbour by default.
  std::size_t component_size(int i, int j, bool diagonal = true) const;

  // m1, m2, m3, value, inside
  std::string to_csv() const;

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * resolution_ + j; }

  int resolution_;
  std::vector<double> values_;
  std::vector<char> inside_;
};

// Inequality value at an exact point with m3 = 1 - m1 - m2 (not renormalized).
struct RegionProbe {
  double m1;
  double m2;
  double m3;
  double value;
  bool inside;
};
RegionProbe probe_region(double m1, double m2);

struct Tolerances {
  double boundary = 1e-9;  // |omega^2 - lambda1| reported as the boundary case
  double inner_tolerance = 1e-13;
  double distance_guard = 1e-6;

  // Parses "key=value,key=value"; throws InvalidInput on unknown keys.
  static Tolerances parse(const std::string& overrides);
};

nlohmann::json region_summary(const RegionRaster& raster, const std::vector<RegionProbe>& probes);

nlohmann::json fixed_point_report(const AdmissibleMassTriple& masses, bool degrees);

nlohmann::json stability_report(const AdmissibleMassTriple& masses, const std::vector<double>& omegas,
                                const Tolerances& tol, unsigned workers, bool degrees);

// omega, omega^2 - lambda1, verdict, max |Re| of the spectrum on E or E-tilde.
std::string omega_sweep_csv(const AdmissibleMassTriple& masses, const std::vector<double>& omegas,
                            const Tolerances& tol, unsigned workers);

// start, start + step, ... up to stop inclusive (within step / 1e6).
std::vector<double> omega_range(double start, double stop, double step);

// t, theta_1..n, phi_1..n, p_theta_1..n, p_phi_1..n, H, J with H = T - V.
std::string trajectory_csv(const MassVector& masses, const TrajectoryRecord& record);

nlohmann::json trajectory_summary(const TrajectoryRecord& record, double omega);

}  // namespace curved
