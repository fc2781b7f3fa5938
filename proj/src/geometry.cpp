#include "curved/geometry.hpp"

#include "curved/errors.hpp"
#include "curved/phase_state.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

namespace curved {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "InvalidInput";
    case ErrorKind::SingularConfiguration: return "SingularConfiguration";
    case ErrorKind::PolarSingularity: return "PolarSingularity";
    case ErrorKind::NonpositiveMass: return "NonpositiveMass";
    case ErrorKind::NotAdmissible: return "NotAdmissible";
    case ErrorKind::InvalidShape: return "InvalidShape";
    case ErrorKind::DegenerateShape: return "DegenerateShape";
    case ErrorKind::InconsistentPair: return "InconsistentPair";
    case ErrorKind::NotAFixedPoint: return "NotAFixedPoint";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SingularIterate: return "SingularIterate";
    case ErrorKind::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorKind::DegenerateBasis: return "DegenerateBasis";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::NoGrowthWindow: return "NoGrowthWindow";
    case ErrorKind::IOFailure: return "IOFailure";
  }
  return "Unknown";
}

namespace {

double reduce_angle(double phi) {
  double r = std::fmod(phi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

struct BodyFrame {
  Vec3 q;       // position
  Vec3 dq_dt;   // d q / d theta
  Vec3 dq_dp;   // d q / d phi
  Vec3 d2q_tt;  // d^2 q / d theta^2
  Vec3 d2q_pp;  // d^2 q / d phi^2
  Vec3 d2q_tp;  // d^2 q / d theta d phi
};

BodyFrame body_frame(double theta, double phi) {
  const auto [st, ct] = polar_trig(theta);
  const double sp = std::sin(phi);
  const double cp = std::cos(phi);
  BodyFrame f;
  f.q = {st * cp, st * sp, ct};
  f.dq_dt = {ct * cp, ct * sp, -st};
  f.dq_dp = {-st * sp, st * cp, 0.0};
  f.d2q_tt = -f.q;
  f.d2q_pp = {-st * cp, -st * sp, 0.0};
  f.d2q_tp = {-ct * sp, ct * cp, 0.0};
  return f;
}

std::vector<BodyFrame> body_frames(std::span<const double> theta, std::span<const double> phi) {
  std::vector<BodyFrame> frames;
  frames.reserve(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) frames.push_back(body_frame(theta[i], phi[i]));
  return frames;
}

void check_sizes(const MassVector& masses, std::span<const double> theta,
                 std::span<const double> phi) {
  if (theta.size() != masses.size() || phi.size() != masses.size()) {
    throw Error(ErrorKind::DimensionMismatch, "masses and configuration differ in length");
  }
}

// cos and sin of the geodesic distance; sin from the cross product keeps
// precision near 0 and pi.
struct PairTrig {
  double c;
  double s;
};

PairTrig pair_trig(const Vec3& qi, const Vec3& qj) {
  return {std::clamp(qi.dot(qj), -1.0, 1.0), qi.cross(qj).norm()};
}

// Same distance as geodesic_distance, but resolved near 0 and pi where
// arccos of the dot product loses half the digits.
double precise_distance(const Vec3& qi, const Vec3& qj) {
  return std::atan2(qi.cross(qj).norm(), qi.dot(qj));
}

}  // namespace

MassVector::MassVector(std::vector<double> masses) : masses_(std::move(masses)) {
  if (masses_.size() < 2) throw Error(ErrorKind::InvalidInput, "at least two masses are required");
  for (double m : masses_) {
    if (!std::isfinite(m)) throw Error(ErrorKind::InvalidInput, "mass is not finite");
    if (m <= 0.0) throw Error(ErrorKind::NonpositiveMass, "every mass must be strictly positive");
  }
}

MassVector MassVector::normalized(std::vector<double> masses) {
  MassVector checked(std::move(masses));
  const double sum = checked.total();
  for (double& m : checked.masses_) m /= sum;
  checked.normalized_ = true;
  return checked;
}

double MassVector::total() const noexcept {
  return std::accumulate(masses_.begin(), masses_.end(), 0.0);
}

MassVector MassVector::scaled(double factor) const {
  std::vector<double> out(masses_);
  for (double& m : out) m *= factor;
  return MassVector(std::move(out));
}

Eigen::VectorXd MassVector::as_vector() const {
  return Eigen::Map<const Eigen::VectorXd>(masses_.data(), static_cast<Eigen::Index>(masses_.size()));
}

SphereConfiguration::SphereConfiguration(std::vector<SpherePoint> points) {
  theta_.reserve(points.size());
  phi_.reserve(points.size());
  for (const auto& p : points) {
    if (!std::isfinite(p.theta) || !std::isfinite(p.phi)) {
      throw Error(ErrorKind::InvalidInput, "non-finite angle");
    }
    if (p.theta <= 0.0 || p.theta >= kPi) {
      throw Error(ErrorKind::PolarSingularity, "colatitude must lie in (0, pi)");
    }
    theta_.push_back(p.theta);
    phi_.push_back(reduce_angle(p.phi));
  }
}

SphereConfiguration SphereConfiguration::on_equator(std::span<const double> longitudes) {
  std::vector<SpherePoint> pts;
  pts.reserve(longitudes.size());
  for (double phi : longitudes) pts.push_back({kHalfPi, phi});
  return SphereConfiguration(std::move(pts));
}

RingConfiguration::RingConfiguration(std::vector<double> longitudes) {
  const std::size_t n = longitudes.size();
  if (n < 3) throw Error(ErrorKind::InvalidInput, "a ring configuration needs at least three bodies");
  for (double p : longitudes) {
    if (!std::isfinite(p)) throw Error(ErrorKind::InvalidInput, "non-finite longitude");
  }
  const double origin = longitudes.front();
  phi_.resize(n);
  phi_[0] = 0.0;
  for (std::size_t i = 1; i < n; ++i) phi_[i] = reduce_angle(longitudes[i] - origin);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double gap = phi_[i + 1] - phi_[i];
    if (!(gap > 0.0 && gap < kPi)) {
      std::ostringstream msg;
      msg << "ring gap " << i + 1 << " is " << gap << ", expected in (0, pi)";
      throw Error(ErrorKind::InvalidInput, msg.str());
    }
  }
  if (!(phi_.back() > kPi)) {
    throw Error(ErrorKind::InvalidInput, "ring bodies lie within a closed half circle");
  }
}

SphereConfiguration RingConfiguration::to_sphere() const {
  return SphereConfiguration::on_equator(phi_);
}

Vec3 to_cartesian(double theta, double phi) {
  const auto [st, ct] = polar_trig(theta);
  return {st * std::cos(phi), st * std::sin(phi), ct};
}

std::vector<Vec3> to_cartesian(const SphereConfiguration& config) {
  std::vector<Vec3> out;
  out.reserve(config.size());
  for (std::size_t i = 0; i < config.size(); ++i) {
    out.push_back(to_cartesian(config.theta()[i], config.phi()[i]));
  }
  return out;
}

double geodesic_distance(const Vec3& qi, const Vec3& qj) { return precise_distance(qi, qj); }

double singularity_margin(std::span<const double> theta, std::span<const double> phi) {
  double margin = kPi;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const Vec3 qi = to_cartesian(theta[i], phi[i]);
    for (std::size_t j = i + 1; j < theta.size(); ++j) {
      const double d = precise_distance(qi, to_cartesian(theta[j], phi[j]));
      margin = std::min({margin, d, kPi - d});
    }
  }
  return margin;
}

void require_nonsingular(std::span<const double> theta, std::span<const double> phi) {
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const Vec3 qi = to_cartesian(theta[i], phi[i]);
    for (std::size_t j = i + 1; j < theta.size(); ++j) {
      const double d = precise_distance(qi, to_cartesian(theta[j], phi[j]));
      if (d < kSingularityTolerance || d > kPi - kSingularityTolerance) {
        std::ostringstream msg;
        msg << "bodies " << i + 1 << " and " << j + 1 << " at distance " << d;
        throw Error(ErrorKind::SingularConfiguration, msg.str());
      }
    }
  }
}

double force_function(const MassVector& masses, const SphereConfiguration& config) {
  return force_function(masses, config.theta(), config.phi());
}

double force_function(const MassVector& masses, std::span<const double> theta,
                      std::span<const double> phi) {
  check_sizes(masses, theta, phi);
  require_nonsingular(theta, phi);
  const std::size_t n = masses.size();
  std::vector<Vec3> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = to_cartesian(theta[i], phi[i]);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto [c, s] = pair_trig(q[i], q[j]);
      v += masses[i] * masses[j] * c / s;
    }
  }
  return v;
}

Eigen::VectorXd force_gradient(const MassVector& masses, const SphereConfiguration& config) {
  return force_gradient(masses, config.theta(), config.phi());
}

// With c = q_i . q_j, each pair contributes m_i m_j f(c) where
// f(c) = cot(arccos c), f' = 1/sin^3 d and f'' = 3 cos d / sin^5 d.
Eigen::VectorXd force_gradient(const MassVector& masses, std::span<const double> theta,
                               std::span<const double> phi) {
  check_sizes(masses, theta, phi);
  require_nonsingular(theta, phi);
  const auto n = static_cast<Eigen::Index>(masses.size());
  const auto frames = body_frames(theta, phi);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& fi = frames[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& fj = frames[static_cast<std::size_t>(j)];
      const auto [c, s] = pair_trig(fi.q, fj.q);
      const double w = masses[static_cast<std::size_t>(i)] * masses[static_cast<std::size_t>(j)] /
                       (s * s * s);
      grad[i] += w * fj.q.dot(fi.dq_dt);
      grad[n + i] += w * fj.q.dot(fi.dq_dp);
      grad[j] += w * fi.q.dot(fj.dq_dt);
      grad[n + j] += w * fi.q.dot(fj.dq_dp);
    }
  }
  return grad;
}

Eigen::MatrixXd force_hessian(const MassVector& masses, std::span<const double> theta,
                              std::span<const double> phi) {
  check_sizes(masses, theta, phi);
  require_nonsingular(theta, phi);
  const auto n = static_cast<Eigen::Index>(masses.size());
  const auto frames = body_frames(theta, phi);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& fi = frames[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const auto& fj = frames[static_cast<std::size_t>(j)];
      const auto [c, s] = pair_trig(fi.q, fj.q);
      const double mm = masses[static_cast<std::size_t>(i)] * masses[static_cast<std::size_t>(j)];
      const double f1 = mm / (s * s * s);
      const double f2 = 3.0 * mm * c / (s * s * s * s * s);

      // Variables touched by this pair: theta_i, phi_i, theta_j, phi_j.
      const std::array<Eigen::Index, 4> idx{i, n + i, j, n + j};
      const std::array<double, 4> dc{fj.q.dot(fi.dq_dt), fj.q.dot(fi.dq_dp), fi.q.dot(fj.dq_dt),
                                     fi.q.dot(fj.dq_dp)};
      Eigen::Matrix4d d2c;
      d2c(0, 0) = fj.q.dot(fi.d2q_tt);
      d2c(1, 1) = fj.q.dot(fi.d2q_pp);
      d2c(0, 1) = d2c(1, 0) = fj.q.dot(fi.d2q_tp);
      d2c(2, 2) = fi.q.dot(fj.d2q_tt);
      d2c(3, 3) = fi.q.dot(fj.d2q_pp);
      d2c(2, 3) = d2c(3, 2) = fi.q.dot(fj.d2q_tp);
      d2c(0, 2) = d2c(2, 0) = fi.dq_dt.dot(fj.dq_dt);
      d2c(0, 3) = d2c(3, 0) = fi.dq_dt.dot(fj.dq_dp);
      d2c(1, 2) = d2c(2, 1) = fi.dq_dp.dot(fj.dq_dt);
      d2c(1, 3) = d2c(3, 1) = fi.dq_dp.dot(fj.dq_dp);

      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          hess(idx[a], idx[b]) += f2 * dc[a] * dc[b] + f1 * d2c(a, b);
        }
      }
    }
  }
  return hess;
}

// --- phase state -----------------------------------------------------------

PhaseState::PhaseState(Eigen::Index n)
    : theta(Eigen::VectorXd::Constant(n, kHalfPi)),
      phi(Eigen::VectorXd::Zero(n)),
      ptheta(Eigen::VectorXd::Zero(n)),
      pphi(Eigen::VectorXd::Zero(n)) {}

Eigen::VectorXd PhaseState::packed() const {
  const Eigen::Index n = size();
  Eigen::VectorXd y(4 * n);
  y << theta, phi, ptheta, pphi;
  return y;
}

PhaseState PhaseState::unpack(const Eigen::VectorXd& y) {
  if (y.size() % 4 != 0) throw Error(ErrorKind::DimensionMismatch, "phase vector length not a multiple of 4");
  const Eigen::Index n = y.size() / 4;
  PhaseState s;
  s.theta = y.segment(0, n);
  s.phi = y.segment(n, n);
  s.ptheta = y.segment(2 * n, n);
  s.pphi = y.segment(3 * n, n);
  return s;
}

void PhaseState::validate() const {
  const Eigen::Index n = theta.size();
  if (phi.size() != n || ptheta.size() != n || pphi.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "phase state blocks differ in length");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(theta[i]) || !std::isfinite(phi[i]) || !std::isfinite(ptheta[i]) ||
        !std::isfinite(pphi[i])) {
      throw Error(ErrorKind::InvalidInput, "non-finite phase state");
    }
    if (polar_trig(theta[i]).sin_theta <= kPolarTolerance) {
      throw Error(ErrorKind::PolarSingularity, "body " + std::to_string(i + 1) + " at a pole");
    }
  }
  require_nonsingular(theta_span(), phi_span());
}

PhaseState equatorial_state(const MassVector& masses, const RingConfiguration& ring, double omega) {
  if (masses.size() != ring.size()) throw Error(ErrorKind::DimensionMismatch, "masses vs ring");
  const auto n = static_cast<Eigen::Index>(ring.size());
  PhaseState s(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.phi[i] = ring[static_cast<std::size_t>(i)];
    s.pphi[i] = masses[static_cast<std::size_t>(i)] * omega;
  }
  return s;
}

double kinetic_energy(const MassVector& masses, const PhaseState& state) {
  if (static_cast<std::size_t>(state.size()) != masses.size()) {
    throw Error(ErrorKind::DimensionMismatch, "masses vs state");
  }
  double t = 0.0;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    const double s = polar_trig(state.theta[i]).sin_theta;
    if (std::abs(s) <= kPolarTolerance) {
      throw Error(ErrorKind::PolarSingularity, "body " + std::to_string(i + 1) + " at a pole");
    }
    const double m = masses[static_cast<std::size_t>(i)];
    t += state.ptheta[i] * state.ptheta[i] / (2.0 * m) +
         state.pphi[i] * state.pphi[i] / (2.0 * m * s * s);
  }
  return t;
}

}  // namespace curved
