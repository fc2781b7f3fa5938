#pragma once

// Reduction of the three-body problem on the equator by the rotation group:
// Jacobi-type angles, the reduced Hamiltonian on a fixed angular-momentum
// level, and the Hessian certificate for the reduced rest point.

#include "curved/fixed_points.hpp"

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace curved {

struct JacobiConstants {
  double mbar;  // m1 + m2 + m3
  double nu1;   // m1 / (m1 + m2)
  double nu2;   // m2 / (m1 + m2)
  double nu3;   // m1 m2 / (m1 + m2)
  double nu4;   // (m1 + m2) m3 / mbar

  static JacobiConstants from(const std::array<double, 3>& masses);
};

// Quotient coordinates (phi1, phi2, p1, p2) on the level J = momentum_level.
struct ReducedState {
  double phi1 = 0.0;
  double phi2 = 0.0;
  double p1 = 0.0;
  double p2 = 0.0;
  double momentum_level = 0.0;

  Eigen::Vector4d coords() const { return {phi1, phi2, p1, p2}; }
};

struct JacobiCoordinates {
  double tilde_phi;
  double p_tilde;
  ReducedState reduced;
};

// Rows map (phi_1, phi_2, phi_3) to (tilde_phi, phi1, phi2).
Eigen::Matrix3d jacobi_matrix(const std::array<double, 3>& masses);

// Momenta transform with the inverse transpose so that the one-form
// sum p dphi is preserved.
JacobiCoordinates to_jacobi(const std::array<double, 3>& longitudes,
                            const std::array<double, 3>& momenta,
                            const std::array<double, 3>& masses);

struct InertialRingState {
  std::array<double, 3> longitudes;
  std::array<double, 3> momenta;
};

InertialRingState from_jacobi(const JacobiCoordinates& coords, const std::array<double, 3>& masses);

// Shape angles of a reduced configuration: alpha = phi1, beta = phi2 - nu1 phi1.
std::array<double, 2> reduced_shape_angles(const ReducedState& state,
                                           const std::array<double, 3>& masses);

// V = m1 m2 cot d12 + m2 m3 cot d23 + m1 m3 cot d13 with the distances taken
// from alpha, beta and alpha + beta; inside the acute region this is
// m1 m2 cot a + m2 m3 cot b - m1 m3 cot(a + b). Throws SingularConfiguration.
double reduced_force_function(const ReducedState& state, const std::array<double, 3>& masses);

// (dV/dphi1, dV/dphi2).
Eigen::Vector2d reduced_force_gradient(const ReducedState& state, const std::array<double, 3>& masses);

// (p1^2/nu3 + p2^2/nu4)/2 - V + mbar omega^2 / 2.
double reduced_hamiltonian(const ReducedState& state, const std::array<double, 3>& masses,
                           double omega);

// Time derivative (dphi1, dphi2, dp1, dp2); momentum_level of the result is 0.
ReducedState reduced_eom(const ReducedState& state, const std::array<double, 3>& masses);

// The rest point X = (alpha, beta + nu1 alpha, 0, 0) on the level mbar * omega.
ReducedState reduced_rest_point(const TriangleShape& shape, const std::array<double, 3>& masses,
                                double omega = 0.0);

// Hessian of V(alpha, beta) at a fixed point, in closed form. Throws
// InconsistentPair when (shape, masses) violate the three-body relations by
// more than 1e-8.
Eigen::Matrix2d hessian_alpha_beta(const TriangleShape& shape, const std::array<double, 3>& masses);

// m1 m3 m2^2 / (sin^2 alpha sin^2 beta), the determinant of half the Hessian.
double half_hessian_determinant_closed_form(const TriangleShape& shape,
                                            const std::array<double, 3>& masses);

struct LyapunovCertificate {
  std::array<double, 3> masses;
  TriangleShape shape;
  Eigen::Matrix2d hessian;          // H(V) in (alpha, beta)
  Eigen::Vector2d eigenvalues;      // ascending
  double trace;
  double half_determinant;          // det(H(V) / 2), evaluated from the matrix
  double half_determinant_closed;   // closed form of the same quantity
  Eigen::Vector4d reduced_hessian_eigenvalues;  // second derivative of H_0 at X, ascending
  bool certified;  // rest point is a strict local minimum of the reduced Hamiltonian
};

LyapunovCertificate lyapunov_certificate(const AdmissibleMassTriple& masses);

struct ReducedTrajectory {
  std::vector<double> times;
  std::vector<ReducedState> states;
  double energy_drift = 0.0;
  double max_deviation = 0.0;  // max-norm distance to `reference` over the run
};

// Fourth-order symmetric composition of Stormer-Verlet steps; the reduced
// Hamiltonian is separable, so each substep is explicit.
ReducedTrajectory integrate_reduced(const ReducedState& initial, const std::array<double, 3>& masses,
                                    double step, double horizon, const ReducedState& reference,
                                    int record_every = 0);

}  // namespace curved
