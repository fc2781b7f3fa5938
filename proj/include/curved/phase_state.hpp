#pragma once

#include "curved/geometry.hpp"

#include <Eigen/Dense>

namespace curved {

// Canonical state (theta, phi, p_theta, p_phi) of n bodies. The packed
// 4n-vector uses the same block order.
struct PhaseState {
  Eigen::VectorXd theta;
  Eigen::VectorXd phi;
  Eigen::VectorXd ptheta;
  Eigen::VectorXd pphi;

  PhaseState() = default;
  explicit PhaseState(Eigen::Index n);

  Eigen::Index size() const noexcept { return theta.size(); }

  Eigen::VectorXd packed() const;
  static PhaseState unpack(const Eigen::VectorXd& y);

  std::span<const double> theta_span() const { return {theta.data(), static_cast<std::size_t>(theta.size())}; }
  std::span<const double> phi_span() const { return {phi.data(), static_cast<std::size_t>(phi.size())}; }

  // Throws PolarSingularity / SingularConfiguration / DimensionMismatch.
  void validate() const;
};

// Equatorial state at rest (omega == 0) or rigidly rotating with p_phi_i = m_i omega.
PhaseState equatorial_state(const MassVector& masses, const RingConfiguration& ring, double omega);

// T = sum p_theta^2 / (2 m) + p_phi^2 / (2 m sin^2 theta).
double kinetic_energy(const MassVector& masses, const PhaseState& state);

}  // namespace curved
