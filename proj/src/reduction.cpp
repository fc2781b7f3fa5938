#include "curved/reduction.hpp"

#include "curved/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace curved {

namespace {

constexpr double kConsistencyTolerance = 1e-8;

// cot of the geodesic distance between two equatorial points separated by x.
double cot_distance(double x) {
  const double s = std::sin(x);
  if (std::abs(s) < kSingularityTolerance) {
    std::ostringstream msg;
    msg << "reduced configuration has a pair at separation " << x;
    throw Error(ErrorKind::SingularConfiguration, msg.str());
  }
  return std::cos(x) / std::abs(s);
}

double cot_distance_derivative(double x) {
  const double s = std::sin(x);
  return -s / (std::abs(s) * s * s);
}

}  // namespace

JacobiConstants JacobiConstants::from(const std::array<double, 3>& m) {
  for (double x : m) {
    if (!(x > 0.0)) throw Error(ErrorKind::NonpositiveMass, "every mass must be strictly positive");
  }
  const double m12 = m[0] + m[1];
  const double mbar = m12 + m[2];
  return {mbar, m[0] / m12, m[1] / m12, m[0] * m[1] / m12, m12 * m[2] / mbar};
}

Eigen::Matrix3d jacobi_matrix(const std::array<double, 3>& masses) {
  const auto k = JacobiConstants::from(masses);
  Eigen::Matrix3d a;
  a << masses[0] / k.mbar, masses[1] / k.mbar, masses[2] / k.mbar,  //
      -1.0, 1.0, 0.0,                                               //
      -k.nu1, -k.nu2, 1.0;
  return a;
}

JacobiCoordinates to_jacobi(const std::array<double, 3>& longitudes,
                            const std::array<double, 3>& momenta,
                            const std::array<double, 3>& masses) {
  const Eigen::Matrix3d a = jacobi_matrix(masses);
  const Eigen::Vector3d q = a * Eigen::Vector3d(longitudes[0], longitudes[1], longitudes[2]);
  const Eigen::Vector3d p =
      a.transpose().partialPivLu().solve(Eigen::Vector3d(momenta[0], momenta[1], momenta[2]));
  JacobiCoordinates out;
  out.tilde_phi = q[0];
  out.p_tilde = p[0];
  out.reduced = {q[1], q[2], p[1], p[2], p[0]};
  return out;
}

InertialRingState from_jacobi(const JacobiCoordinates& coords, const std::array<double, 3>& masses) {
  const Eigen::Matrix3d a = jacobi_matrix(masses);
  const Eigen::Vector3d q =
      a.partialPivLu().solve(Eigen::Vector3d(coords.tilde_phi, coords.reduced.phi1, coords.reduced.phi2));
  const Eigen::Vector3d p = a.transpose() * Eigen::Vector3d(coords.p_tilde, coords.reduced.p1, coords.reduced.p2);
  return {{q[0], q[1], q[2]}, {p[0], p[1], p[2]}};
}

std::array<double, 2> reduced_shape_angles(const ReducedState& state,
                                           const std::array<double, 3>& masses) {
  const auto k = JacobiConstants::from(masses);
  return {state.phi1, state.phi2 - k.nu1 * state.phi1};
}

double reduced_force_function(const ReducedState& state, const std::array<double, 3>& m) {
  const auto [alpha, beta] = reduced_shape_angles(state, m);
  return m[0] * m[1] * cot_distance(alpha) + m[1] * m[2] * cot_distance(beta) +
         m[0] * m[2] * cot_distance(alpha + beta);
}

Eigen::Vector2d reduced_force_gradient(const ReducedState& state, const std::array<double, 3>& m) {
  const auto k = JacobiConstants::from(m);
  const auto [alpha, beta] = reduced_shape_angles(state, m);
  // Force the singularity check before differentiating.
  (void)reduced_force_function(state, m);
  const double ga = m[0] * m[1] * cot_distance_derivative(alpha);
  const double gb = m[1] * m[2] * cot_distance_derivative(beta);
  const double gc = m[0] * m[2] * cot_distance_derivative(alpha + beta);
  // d alpha/d phi1 = 1, d beta/d phi1 = -nu1, d(alpha+beta)/d phi1 = nu2; d/d phi2 hits beta only.
  return {ga - k.nu1 * gb + k.nu2 * gc, gb + gc};
}

double reduced_hamiltonian(const ReducedState& state, const std::array<double, 3>& masses,
                           double omega) {
  const auto k = JacobiConstants::from(masses);
  const double kinetic = 0.5 * (state.p1 * state.p1 / k.nu3 + state.p2 * state.p2 / k.nu4);
  return kinetic - reduced_force_function(state, masses) + 0.5 * k.mbar * omega * omega;
}

ReducedState reduced_eom(const ReducedState& state, const std::array<double, 3>& masses) {
  const auto k = JacobiConstants::from(masses);
  const Eigen::Vector2d g = reduced_force_gradient(state, masses);
  return {state.p1 / k.nu3, state.p2 / k.nu4, g[0], g[1], 0.0};
}

ReducedState reduced_rest_point(const TriangleShape& shape, const std::array<double, 3>& masses,
                                double omega) {
  const auto k = JacobiConstants::from(masses);
  return {shape.alpha(), shape.beta() + k.nu1 * shape.alpha(), 0.0, 0.0, k.mbar * omega};
}

Eigen::Matrix2d hessian_alpha_beta(const TriangleShape& shape, const std::array<double, 3>& m) {
  const double err = three_body_relation_error(m, shape);
  if (err > kConsistencyTolerance) {
    std::ostringstream msg;
    msg << "shape and masses violate the fixed-point relations (relative error " << err << ")";
    throw Error(ErrorKind::InconsistentPair, msg.str());
  }
  const double a = shape.alpha();
  const double b = shape.beta();
  const double sa = std::sin(a), sb = std::sin(b), sab = std::sin(a + b);
  const double ta = m[0] * m[1] * std::cos(a) / (sa * sa * sa);
  const double tb = m[1] * m[2] * std::cos(b) / (sb * sb * sb);
  const double tc = m[0] * m[2] * std::cos(a + b) / (sab * sab * sab);
  Eigen::Matrix2d h;
  h << ta - tc, -tc,  //
      -tc, tb - tc;
  return 2.0 * h;
}

double half_hessian_determinant_closed_form(const TriangleShape& shape,
                                            const std::array<double, 3>& m) {
  const double sa = std::sin(shape.alpha());
  const double sb = std::sin(shape.beta());
  return m[0] * m[2] * m[1] * m[1] / (sa * sa * sb * sb);
}

LyapunovCertificate lyapunov_certificate(const AdmissibleMassTriple& masses) {
  const auto& m = masses.values();
  const TriangleShape shape = shape_from_masses(masses);
  const Eigen::Matrix2d h = hessian_alpha_beta(shape, m);
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(h);

  // Second derivative of H_0 at X in (phi1, phi2, p1, p2): the kinetic block
  // and minus the force Hessian pulled back through beta = phi2 - nu1 phi1.
  const auto k = JacobiConstants::from(m);
  Eigen::Matrix2d chain;
  chain << 1.0, 0.0,  //
      -k.nu1, 1.0;
  Eigen::Matrix4d reduced = Eigen::Matrix4d::Zero();
  reduced.topLeftCorner<2, 2>() = -chain.transpose() * h * chain;
  reduced(2, 2) = 1.0 / k.nu3;
  reduced(3, 3) = 1.0 / k.nu4;
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> reig(reduced);

  const Eigen::Matrix2d half = 0.5 * h;
  LyapunovCertificate cert{m,
                           shape,
                           h,
                           eig.eigenvalues(),
                           h.trace(),
                           half.determinant(),
                           half_hessian_determinant_closed_form(shape, m),
                           reig.eigenvalues(),
                           false};
  cert.certified = cert.eigenvalues[1] < 0.0 && cert.reduced_hessian_eigenvalues[0] > 0.0;
  return cert;
}

ReducedTrajectory integrate_reduced(const ReducedState& initial, const std::array<double, 3>& masses,
                                    double step, double horizon, const ReducedState& reference,
                                    int record_every) {
  if (!(step > 0.0) || !(horizon > 0.0)) throw Error(ErrorKind::InvalidInput, "step and horizon must be positive");
  const auto k = JacobiConstants::from(masses);
  const double cbrt2 = std::cbrt(2.0);
  const std::array<double, 3> weights{1.0 / (2.0 - cbrt2), -cbrt2 / (2.0 - cbrt2), 1.0 / (2.0 - cbrt2)};

  ReducedState s = initial;
  const double h0 = reduced_hamiltonian(s, masses, 0.0);
  const auto steps = static_cast<long>(std::llround(horizon / step));

  ReducedTrajectory out;
  auto record = [&](long i) {
    out.times.push_back(static_cast<double>(i) * step);
    out.states.push_back(s);
  };
  auto deviation = [&] { return (s.coords() - reference.coords()).lpNorm<Eigen::Infinity>(); };
  record(0);
  out.max_deviation = deviation();

  Eigen::Vector2d g = reduced_force_gradient(s, masses);
  for (long i = 1; i <= steps; ++i) {
    for (double w : weights) {
      const double h = w * step;
      s.p1 += 0.5 * h * g[0];
      s.p2 += 0.5 * h * g[1];
      s.phi1 += h * s.p1 / k.nu3;
      s.phi2 += h * s.p2 / k.nu4;
      g = reduced_force_gradient(s, masses);
      s.p1 += 0.5 * h * g[0];
      s.p2 += 0.5 * h * g[1];
    }
    out.energy_drift = std::max(out.energy_drift, std::abs(reduced_hamiltonian(s, masses, 0.0) - h0));
    out.max_deviation = std::max(out.max_deviation, deviation());
    if (record_every > 0 && i % record_every == 0) record(i);
  }
  if (record_every <= 0 || steps % record_every != 0) record(steps);
  return out;
}

}  // namespace curved
