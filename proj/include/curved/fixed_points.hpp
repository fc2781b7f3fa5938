#pragma once

// Fixed points on the equator: the n-body criterion, the three-body
// mass <-> shape bijection and the admissible mass region.

#include "curved/geometry.hpp"

#include <Eigen/Dense>

#include <array>
#include <optional>

namespace curved {

// Consecutive arcs of an equatorial triangle: d12 = alpha, d23 = beta,
// d13 = 2 pi - (alpha + beta). Valid shapes satisfy
// 0 < alpha < pi, 0 < beta < pi, pi < alpha + beta < 2 pi.
class TriangleShape {
 public:
  // Throws InvalidShape when the acute-triangle condition fails.
  TriangleShape(double alpha, double beta);

  double alpha() const noexcept { return alpha_; }
  double beta() const noexcept { return beta_; }
  std::array<double, 3> distances() const noexcept;  // d12, d23, d13

 private:
  double alpha_;
  double beta_;
};

// Unit-sum mass triple strictly inside the admissible region.
class AdmissibleMassTriple {
 public:
  // Normalizes to unit sum; throws NonpositiveMass or NotAdmissible.
  AdmissibleMassTriple(double m1, double m2, double m3);

  double m1() const noexcept { return m_[0]; }
  double m2() const noexcept { return m_[1]; }
  double m3() const noexcept { return m_[2]; }
  const std::array<double, 3>& values() const noexcept { return m_; }
  MassVector masses() const;

 private:
  std::array<double, 3> m_;
};

struct AdmissibilityResult {
  double value;     // m1^2 m2^2 + m1^2 m3^2 + m2^2 m3^2 - 2 m1 m2 m3 (unit-sum masses)
  bool admissible;  // value < 0
};

// k-th entry: sum_{i != k} m_k m_i sin(phi_k - phi_i) / sin^3 d_ki.
Eigen::VectorXd fixed_point_residual(const MassVector& masses, const RingConfiguration& ring);
Eigen::VectorXd fixed_point_residual(const MassVector& masses, std::span<const double> longitudes);

// The three-body relations m2/sin^2 a = m3/sin^2(a+b), m1/sin^2 a = m3/sin^2 b,
// m2/sin^2 b = m1/sin^2(a+b), as relative differences.
std::array<double, 3> three_body_relations(const std::array<double, 3>& masses,
                                           const TriangleShape& shape);
double three_body_relation_error(const std::array<double, 3>& masses, const TriangleShape& shape);

// Auto-normalizes; throws NonpositiveMass.
AdmissibilityResult is_admissible(double m1, double m2, double m3);

TriangleShape shape_from_masses(const AdmissibleMassTriple& masses);
TriangleShape shape_from_masses(double m1, double m2, double m3);

// Throws DegenerateShape when sin alpha, sin beta or sin(alpha + beta) is
// within 1e-10 of zero.
AdmissibleMassTriple masses_from_shape(const TriangleShape& shape);

RingConfiguration ring_from_shape(const TriangleShape& shape);

struct IsoscelesVerdict {
  bool isosceles;        // m1 == m3 within 1e-12
  bool bound_holds;      // m1 < 4 m2
  AdmissibilityResult admissibility;
  std::optional<TriangleShape> shape;  // set when admissible
  bool symmetric_shape;  // alpha == beta within 1e-10 (only meaningful with a shape)
};

IsoscelesVerdict isosceles_bound_check(double m1, double m2, double m3);

struct NewtonOptions {
  int max_iterations = 100;
  double tolerance = 1e-11;  // max-norm of the residual
};

struct NewtonResult {
  RingConfiguration ring;
  double residual;
  int iterations;
};

// Newton iteration on the criterion with phi_1 pinned to 0. The Jacobian is the
// longitude block of the force Hessian. Throws NoConvergence / SingularIterate.
NewtonResult solve_fixed_point_numeric(const MassVector& masses, const RingConfiguration& initial,
                                       const NewtonOptions& options = {});

}  // namespace curved
