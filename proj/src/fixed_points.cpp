#include "curved/fixed_points.hpp"

#include "curved/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace curved {

namespace {

// arccos arguments this close to +-1 are rounding, anything further out is a
// genuine boundary violation.
constexpr double kArccosSlack = 1e-14;
constexpr double kDegenerateSine = 1e-10;

// Near the boundary of the region both cosines sit close to +-1 after heavy
// cancellation, so the inverse map is evaluated in extended precision and
// rounded once.
double admissible_arccos(long double x, const char* which) {
  if (std::abs(x) > 1.0L + kArccosSlack || std::isnan(x)) {
    std::ostringstream msg;
    msg << "cos " << which << " = " << static_cast<double>(x) << " is outside [-1, 1]";
    throw Error(ErrorKind::NotAdmissible, msg.str());
  }
  return static_cast<double>(std::acos(std::clamp(x, -1.0L, 1.0L)));
}

std::array<double, 3> normalize3(double m1, double m2, double m3) {
  for (double m : {m1, m2, m3}) {
    if (!std::isfinite(m)) throw Error(ErrorKind::InvalidInput, "mass is not finite");
    if (m <= 0.0) throw Error(ErrorKind::NonpositiveMass, "every mass must be strictly positive");
  }
  const double s = m1 + m2 + m3;
  return {m1 / s, m2 / s, m3 / s};
}

double relative_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

Eigen::VectorXd residual_of(const MassVector& masses, const Eigen::VectorXd& phi) {
  return fixed_point_residual(
      masses, std::span<const double>(phi.data(), static_cast<std::size_t>(phi.size())));
}

}  // namespace

TriangleShape::TriangleShape(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  const double sum = alpha + beta;
  if (!(alpha > 0.0 && alpha < kPi && beta > 0.0 && beta < kPi && sum > kPi && sum < kTwoPi)) {
    std::ostringstream msg;
    msg << "(alpha, beta) = (" << alpha << ", " << beta << ") violates the acute-triangle condition";
    throw Error(ErrorKind::InvalidShape, msg.str());
  }
}

std::array<double, 3> TriangleShape::distances() const noexcept {
  return {alpha_, beta_, kTwoPi - (alpha_ + beta_)};
}

AdmissibleMassTriple::AdmissibleMassTriple(double m1, double m2, double m3)
    : m_(normalize3(m1, m2, m3)) {
  const auto check = is_admissible(m_[0], m_[1], m_[2]);
  if (!check.admissible) {
    std::ostringstream msg;
    msg << "masses (" << m_[0] << ", " << m_[1] << ", " << m_[2]
        << ") are outside the admissible region (inequality value " << check.value << ")";
    throw Error(ErrorKind::NotAdmissible, msg.str());
  }
}

MassVector AdmissibleMassTriple::masses() const {
  return MassVector::normalized({m_[0], m_[1], m_[2]});
}

Eigen::VectorXd fixed_point_residual(const MassVector& masses, const RingConfiguration& ring) {
  return fixed_point_residual(masses, ring.longitudes());
}

Eigen::VectorXd fixed_point_residual(const MassVector& masses, std::span<const double> longitudes) {
  const std::size_t n = longitudes.size();
  if (masses.size() != n) throw Error(ErrorKind::DimensionMismatch, "masses vs longitudes");
  Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t i = k + 1; i < n; ++i) {
      const double sk = std::sin(longitudes[k] - longitudes[i]);
      const double sin_d = std::abs(sk);  // sin d_ki for points on the equator
      const double d = std::acos(std::clamp(std::cos(longitudes[k] - longitudes[i]), -1.0, 1.0));
      if (sin_d < kSingularityTolerance || d < kSingularityTolerance ||
          d > kPi - kSingularityTolerance) {
        std::ostringstream msg;
        msg << "bodies " << k + 1 << " and " << i + 1 << " at distance " << d;
        throw Error(ErrorKind::SingularConfiguration, msg.str());
      }
      const double term = masses[k] * masses[i] * sk / (sin_d * sin_d * sin_d);
      r[static_cast<Eigen::Index>(k)] += term;
      r[static_cast<Eigen::Index>(i)] -= term;
    }
  }
  return r;
}

std::array<double, 3> three_body_relations(const std::array<double, 3>& m,
                                           const TriangleShape& shape) {
  const double sa = std::sin(shape.alpha());
  const double sb = std::sin(shape.beta());
  const double sab = std::sin(shape.alpha() + shape.beta());
  return {relative_gap(m[1] / (sa * sa), m[2] / (sab * sab)),
          relative_gap(m[0] / (sa * sa), m[2] / (sb * sb)),
          relative_gap(m[1] / (sb * sb), m[0] / (sab * sab))};
}

double three_body_relation_error(const std::array<double, 3>& masses, const TriangleShape& shape) {
  const auto r = three_body_relations(masses, shape);
  return std::max({r[0], r[1], r[2]});
}

AdmissibilityResult is_admissible(double m1, double m2, double m3) {
  const auto m = normalize3(m1, m2, m3);
  const double a = m[0], b = m[1], c = m[2];
  const double value = a * a * b * b + a * a * c * c + b * b * c * c - 2.0 * a * b * c;
  return {value, value < 0.0};
}

TriangleShape shape_from_masses(const AdmissibleMassTriple& masses) {
  const long double m1 = masses.m1(), m2 = masses.m2(), m3 = masses.m3();
  const long double cos_alpha = (m1 * m2 - m3 * (m1 + m2)) / (2.0L * m3 * std::sqrt(m1 * m2));
  const long double cos_beta = (m3 * (m2 - m1) - m1 * m2) / (2.0L * m1 * std::sqrt(m2 * m3));
  const double alpha = admissible_arccos(cos_alpha, "alpha");
  const double beta = admissible_arccos(cos_beta, "beta");
  try {
    return TriangleShape(alpha, beta);
  } catch (const Error& e) {
    throw Error(ErrorKind::NotAdmissible, e.what());
  }
}

TriangleShape shape_from_masses(double m1, double m2, double m3) {
  return shape_from_masses(AdmissibleMassTriple(m1, m2, m3));
}

AdmissibleMassTriple masses_from_shape(const TriangleShape& shape) {
  const double sa = std::sin(shape.alpha());
  const double sb = std::sin(shape.beta());
  const double sab = std::sin(shape.alpha() + shape.beta());
  if (std::abs(sa) < kDegenerateSine || std::abs(sb) < kDegenerateSine ||
      std::abs(sab) < kDegenerateSine) {
    std::ostringstream msg;
    msg << "shape (" << shape.alpha() << ", " << shape.beta() << ") is on the boundary of the acute region";
    throw Error(ErrorKind::DegenerateShape, msg.str());
  }
  const double r1 = (sa * sa) / (sb * sb);
  const double r2 = (sa * sa) / (sab * sab);
  const double tau = r1 + r2 + 1.0;
  try {
    return AdmissibleMassTriple(r1 / tau, r2 / tau, 1.0 / tau);
  } catch (const Error& e) {
    throw Error(ErrorKind::DegenerateShape, e.what());
  }
}

RingConfiguration ring_from_shape(const TriangleShape& shape) {
  return RingConfiguration({0.0, shape.alpha(), shape.alpha() + shape.beta()});
}

IsoscelesVerdict isosceles_bound_check(double m1, double m2, double m3) {
  const auto m = normalize3(m1, m2, m3);
  IsoscelesVerdict v{};
  v.isosceles = std::abs(m[0] - m[2]) <= 1e-12;
  v.bound_holds = m[0] < 4.0 * m[1];
  v.admissibility = is_admissible(m[0], m[1], m[2]);
  v.symmetric_shape = false;
  if (v.admissibility.admissible) {
    v.shape = shape_from_masses(m[0], m[1], m[2]);
    v.symmetric_shape = std::abs(v.shape->alpha() - v.shape->beta()) <= 1e-10;
  }
  return v;
}

NewtonResult solve_fixed_point_numeric(const MassVector& masses, const RingConfiguration& initial,
                                       const NewtonOptions& options) {
  const auto n = static_cast<Eigen::Index>(initial.size());
  if (static_cast<Eigen::Index>(masses.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "masses vs initial configuration");
  }
  Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(initial.longitudes().data(), n);
  const Eigen::VectorXd equator = Eigen::VectorXd::Constant(n, kHalfPi);

  Eigen::VectorXd r = residual_of(masses, phi);
  double rnorm = r.lpNorm<Eigen::Infinity>();
  int iter = 0;
  while (rnorm >= options.tolerance) {
    if (iter >= options.max_iterations) {
      std::ostringstream msg;
      msg << "residual " << rnorm << " after " << iter << " iterations";
      throw Error(ErrorKind::NoConvergence, msg.str());
    }
    ++iter;
    const Eigen::MatrixXd hess = force_hessian(
        masses, std::span<const double>(equator.data(), static_cast<std::size_t>(n)),
        std::span<const double>(phi.data(), static_cast<std::size_t>(n)));
    // phi_1 pinned: unknowns and equations 2..n of the longitude block.
    const Eigen::MatrixXd jac = hess.block(n + 1, n + 1, n - 1, n - 1);
    // The residual is -dV/dphi, so its Jacobian is -jac.
    const Eigen::VectorXd step = jac.fullPivLu().solve(r.tail(n - 1));

    bool accepted = false;
    bool hit_singular = false;
    for (double damping = 1.0; damping > 1e-6; damping *= 0.5) {
      Eigen::VectorXd trial = phi;
      trial.tail(n - 1) += damping * step;
      try {
        const Eigen::VectorXd tr = residual_of(masses, trial);
        const double tnorm = tr.lpNorm<Eigen::Infinity>();
        if (tnorm < rnorm) {
          phi = trial;
          r = tr;
          rnorm = tnorm;
          accepted = true;
          break;
        }
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::SingularConfiguration) throw;
        hit_singular = true;
      }
    }
    if (!accepted) {
      if (hit_singular) throw Error(ErrorKind::SingularIterate, "Newton iterate entered the singular set");
      std::ostringstream msg;
      msg << "line search stalled at residual " << rnorm;
      throw Error(ErrorKind::NoConvergence, msg.str());
    }
  }

  std::vector<double> result(phi.data(), phi.data() + n);
  try {
    return {RingConfiguration(std::move(result)), rnorm, iter};
  } catch (const Error& e) {
    throw Error(ErrorKind::NoConvergence, std::string("converged outside canonical ordering: ") + e.what());
  }
}

}  // namespace curved
