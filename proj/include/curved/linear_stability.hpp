#pragma once

// Linear stability of equatorial fixed points and their relative equilibria
// on the full sphere.
//
// Phase vectors are ordered (theta_1..n, phi_1..n, p_theta_1..n, p_phi_1..n)
// and the linearization L acts in the rotating frame.

#include "curved/fixed_points.hpp"
#include "curved/phase_state.hpp"

#include <Eigen/Dense>

#include <complex>
#include <string_view>
#include <vector>

namespace curved {

struct LinearizationBlocks {
  Eigen::MatrixXd H;       // d^2 V / d theta_i d theta_j at the equator
  Eigen::MatrixXd G;       // d^2 V / d phi_i d phi_j
  Eigen::VectorXd M;       // masses (diagonal of the mass matrix)
  Eigen::MatrixXd Homega;  // H - omega^2 M
  double omega = 0.0;

  Eigen::Index size() const noexcept { return M.size(); }
};

// Block form assembled from the closed-form entries
//   H_ij = m_i m_j / sin^3 d_ij,            H_ii = -sum_j H_ij cos d_ij,
//   G_ij = -2 m_i m_j cos d_ij / sin^3 d_ij, G_ii = -sum_j G_ij.
// Throws NotAFixedPoint if the criterion residual exceeds `fixed_point_tolerance`.
LinearizationBlocks assemble_blocks(const MassVector& masses, const RingConfiguration& ring,
                                    double omega, double fixed_point_tolerance = 1e-10);

// [[0, 0, M^-1, 0], [0, 0, 0, M^-1], [H_omega, 0, 0, 0], [0, G, 0, 0]].
Eigen::MatrixXd assemble_L(const LinearizationBlocks& blocks);

// Jacobian of the rotating-frame vector field at an arbitrary chart-valid
// state, assembled from the force Hessian and the N, K, C^-1 blocks. The frame
// rate omega only shifts dphi/dt by a constant, so it does not appear.
Eigen::MatrixXd assemble_L_general(const MassVector& masses, const PhaseState& state);

struct NullVectors {
  Eigen::VectorXd v1;  // cos d_1i  (x coordinates)
  Eigen::VectorXd v2;  // sin(phi_i - phi_1)  (y coordinates)
  Eigen::VectorXd v3;  // ones
};

NullVectors null_vectors(const RingConfiguration& ring);

struct NullResiduals {
  double hv1;
  double hv2;
  double gv3;
  double h_norm;
  double g_norm;

  bool within(double relative_tolerance) const noexcept {
    return hv1 < relative_tolerance * h_norm && hv2 < relative_tolerance * h_norm &&
           gv3 < relative_tolerance * g_norm;
  }
};

NullResiduals null_structure_check(const LinearizationBlocks& blocks, const NullVectors& nulls);

// Nonzero eigenvalue of H M^-1 for a three-body fixed point:
//   -(m2/sin^2 a) sin b/(sin(a+b) sin a) - (m2/sin^2 b) sin a/(sin(a+b) sin b)
//   - (m3/sin^2 b) sin(a+b)/(sin a sin b).
// Throws InconsistentPair.
double lambda1_closed_form(const TriangleShape& shape, const std::array<double, 3>& masses);

// Eigenvalues of A M^-1 for symmetric A, through the similar symmetric matrix
// M^-1/2 A M^-1/2. Ascending.
Eigen::VectorXd mass_weighted_eigenvalues(const Eigen::MatrixXd& a, const Eigen::VectorXd& masses);

struct SpectralData {
  Eigen::VectorXd h_eigenvalues;       // of H M^-1, ascending
  Eigen::VectorXd homega_eigenvalues;  // of H_omega M^-1, ascending
  Eigen::VectorXd g_eigenvalues;       // of G M^-1, ascending
  double lambda1;                      // the positive eigenvalue of H M^-1
  double lambda2;                      // the negative eigenvalues of G M^-1, lambda2 <= lambda3
  double lambda3;
  // Spectrum of L on E (omega == 0, 4n - 6 values) or on E-tilde (omega != 0,
  // 4n - 2 values), assembled as +-sqrt(lambda) per nonzero eigenvalue.
  std::vector<std::complex<double>> spectrum;
};

// Zero and nonzero eigenvalues are separated at `zero_threshold` relative to
// the largest eigenvalue magnitude. For n = 3, throws DegenerateSpectrum unless
// H M^-1 has {0, 0, +} and G M^-1 has {0, -, -}.
SpectralData spectral_analysis(const LinearizationBlocks& blocks, double zero_threshold = 1e-9);

// Omega(v, w) = v^T J w with J = [[0, -I], [I, 0]] (no conjugation).
std::complex<double> skew_product(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w);
double skew_product(const Eigen::VectorXd& v, const Eigen::VectorXd& w);

struct InvariantSubspaces {
  Eigen::MatrixXd E1;      // 4n x 6, spanned by the rotation vectors
  Eigen::MatrixXd E;       // orthonormal basis of the skew-orthogonal complement of E1
  Eigen::MatrixXd E2;      // 4n x 2, the v3 directions
  Eigen::MatrixXd Etilde;  // orthonormal basis of the skew-orthogonal complement of E2

  // Relative invariance residuals ||(I - P) L B|| / ||L||. E1 and E use the
  // omega = 0 operator; E2 and E-tilde use the operator at the blocks' omega.
  double e1_invariance;
  double e_invariance;
  double e2_invariance;
  double etilde_invariance;
  double e1_nilpotency;  // ||L^2 E1|| / (||L||^2 ||E1||)

  std::vector<std::complex<double>> spectrum_E;       // eigenvalues of L|E, numerically
  std::vector<std::complex<double>> spectrum_Etilde;  // eigenvalues of L_omega|E-tilde
};

// Throws DegenerateBasis if E1 or E2 is rank deficient.
InvariantSubspaces invariant_subspaces(const LinearizationBlocks& blocks, const NullVectors& nulls);

enum class Verdict {
  FixedPointUnstable,
  ReUnstable,
  ReDegenerateBoundary,
  ReLinearlyStable,
};

std::string_view to_string(Verdict verdict);

struct StabilityReport {
  std::array<double, 3> masses;
  TriangleShape shape;
  double lambda1;
  double lambda2;
  double lambda3;
  double omega;
  double omega_crit;  // sqrt(lambda1)
  Verdict verdict;
  std::vector<std::complex<double>> spectrum;  // on E (omega == 0) or E-tilde
};

// omega == 0 is the fixed point itself; otherwise the relative equilibrium is
// linearly stable iff omega^2 > lambda1, and |omega^2 - lambda1| < boundary
// tolerance is reported as the (unstable) degenerate boundary.
StabilityReport classify(const AdmissibleMassTriple& masses, double omega,
                         double boundary_tolerance = 1e-9);

}  // namespace curved
