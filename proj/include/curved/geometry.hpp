#pragma once

// Spherical kinematics and the cotangent force function on the unit sphere.
//
// Units: gravitational constant and sphere radius are 1. Angles are radians;
// theta is colatitude in (0, pi), phi is longitude.
//
// Derivative vectors are laid out in blocks, [d/dtheta_1..n, d/dphi_1..n],
// the same order the phase-space vectors use.

#include <Eigen/Dense>

#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace curved {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kHalfPi = 0.5 * std::numbers::pi;

// Pairs closer than this (in geodesic distance) to 0 or pi are singular.
inline constexpr double kSingularityTolerance = 1e-10;
// sin(theta) at or below this is outside the coordinate chart.
inline constexpr double kPolarTolerance = 1e-8;

using Vec3 = Eigen::Vector3d;

class MassVector {
 public:
  // Throws NonpositiveMass / InvalidInput. Masses are kept as given.
  explicit MassVector(std::vector<double> masses);

  // Rescales to unit sum and flags the result as normalized.
  static MassVector normalized(std::vector<double> masses);

  std::size_t size() const noexcept { return masses_.size(); }
  double operator[](std::size_t i) const { return masses_[i]; }
  std::span<const double> values() const noexcept { return masses_; }
  double total() const noexcept;
  bool is_normalized() const noexcept { return normalized_; }

  MassVector scaled(double factor) const;
  Eigen::VectorXd as_vector() const;

 private:
  std::vector<double> masses_;
  bool normalized_ = false;
};

struct SpherePoint {
  double theta;
  double phi;
};

class SphereConfiguration {
 public:
  // theta must lie in (0, pi); phi is reduced to [0, 2 pi).
  explicit SphereConfiguration(std::vector<SpherePoint> points);

  static SphereConfiguration on_equator(std::span<const double> longitudes);

  std::size_t size() const noexcept { return theta_.size(); }
  std::span<const double> theta() const noexcept { return theta_; }
  std::span<const double> phi() const noexcept { return phi_; }
  SpherePoint point(std::size_t i) const { return {theta_[i], phi_[i]}; }

 private:
  std::vector<double> theta_;
  std::vector<double> phi_;
};

// n >= 3 bodies on the equator in canonical order:
// 0 = phi_1 < phi_2 < ... < phi_n < 2 pi, consecutive gaps in (0, pi) and
// phi_n - phi_1 > pi. The constructor rotates the input so that phi_1 = 0.
class RingConfiguration {
 public:
  explicit RingConfiguration(std::vector<double> longitudes);

  std::size_t size() const noexcept { return phi_.size(); }
  std::span<const double> longitudes() const noexcept { return phi_; }
  double operator[](std::size_t i) const { return phi_[i]; }

  SphereConfiguration to_sphere() const;

 private:
  std::vector<double> phi_;
};

struct PolarTrig {
  double sin_theta;
  double cos_theta;
};

// sin/cos of the colatitude evaluated through the offset from the equator, so
// that theta == pi/2 gives cos(theta) == 0 exactly and the equator stays an
// exactly invariant set under the equations of motion.
inline PolarTrig polar_trig(double theta) {
  const double delta = theta - kHalfPi;
  return {std::cos(delta), -std::sin(delta)};
}

Vec3 to_cartesian(double theta, double phi);
std::vector<Vec3> to_cartesian(const SphereConfiguration& config);

// Angle between two unit vectors in [0, pi], via atan2(|qi x qj|, qi . qj)
// (accurate near 0 and pi, where arccos of the dot product is not).
double geodesic_distance(const Vec3& qi, const Vec3& qj);

// Smallest distance of any pair to the singular set {0, pi}.
double singularity_margin(std::span<const double> theta, std::span<const double> phi);
void require_nonsingular(std::span<const double> theta, std::span<const double> phi);

// V = sum_{i<j} m_i m_j cot d_ij (the force function, V = -U).
double force_function(const MassVector& masses, const SphereConfiguration& config);
double force_function(const MassVector& masses, std::span<const double> theta,
                      std::span<const double> phi);

Eigen::VectorXd force_gradient(const MassVector& masses, const SphereConfiguration& config);
Eigen::VectorXd force_gradient(const MassVector& masses, std::span<const double> theta,
                               std::span<const double> phi);

// Full 2n x 2n matrix of second partials of V in the block order above.
Eigen::MatrixXd force_hessian(const MassVector& masses, std::span<const double> theta,
                              std::span<const double> phi);

}  // namespace curved
