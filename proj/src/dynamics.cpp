#include "curved/dynamics.hpp"

#include "curved/errors.hpp"

#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace curved {

namespace {

std::span<const double> head_span(const Eigen::VectorXd& y, Eigen::Index offset, Eigen::Index n) {
  return {y.data() + offset, static_cast<std::size_t>(n)};
}

void check_state_size(const MassVector& masses, Eigen::Index n) {
  if (static_cast<Eigen::Index>(masses.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "masses vs state");
  }
}

// Pair distances and chart validity for the step guard.
void guard_state(const Eigen::VectorXd& y, double distance_guard, double t) {
  const Eigen::Index n = y.size() / 4;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::isfinite(y[i]) || polar_trig(y[i]).sin_theta <= kPolarTolerance) {
      throw StepFailure(t, "body " + std::to_string(i + 1) + " reached a pole");
    }
  }
  if (!y.allFinite()) throw StepFailure(t, "state is not finite");
  const double margin = singularity_margin(head_span(y, 0, n), head_span(y, n, n));
  if (margin < distance_guard) {
    std::ostringstream msg;
    msg << "pair distance within " << margin << " of the singular set";
    throw StepFailure(t, msg.str());
  }
}

class MidpointSolver {
 public:
  MidpointSolver(const MassVector& masses, double omega, const IntegratorOptions& options)
      : masses_(masses), omega_(omega), options_(options) {}

  Eigen::VectorXd step(const Eigen::VectorXd& y0, double h, double t) const {
    try {
      return solve(y0, h, t);
    } catch (const StepFailure&) {
      throw;
    } catch (const Error& e) {
      throw StepFailure(t, std::string("implicit solve left the domain: ") + e.what());
    }
  }

 private:
  Eigen::VectorXd solve(const Eigen::VectorXd& y0, double h, double t) const {
    const Eigen::Index dim = y0.size();
    Eigen::VectorXd y1 = y0 + h * vector_field(masses_, y0, omega_);
    // Simplified Newton: the Jacobian is frozen at the predicted midpoint.
    const Eigen::VectorXd ym0 = 0.5 * (y0 + y1);
    const Eigen::MatrixXd jac = Eigen::MatrixXd::Identity(dim, dim) -
                                0.5 * h * assemble_L_general(masses_, PhaseState::unpack(ym0));
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(jac);

    double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < options_.inner_max_iterations; ++it) {
      const Eigen::VectorXd residual = y1 - y0 - h * vector_field(masses_, 0.5 * (y0 + y1), omega_);
      Eigen::VectorXd delta = lu.solve(-residual);
      double size = delta.lpNorm<Eigen::Infinity>();
      // Damp when the correction grows instead of contracting.
      if (size > previous) {
        delta *= 0.5;
        size *= 0.5;
      }
      y1 += delta;
      previous = size;
      if (size <= options_.inner_tolerance * std::max(1.0, y1.lpNorm<Eigen::Infinity>())) return y1;
    }
    throw StepFailure(t, "implicit midpoint solve did not converge");
  }

  const MassVector& masses_;
  double omega_;
  const IntegratorOptions& options_;
};

struct Monitors {
  double h0;
  double j0;
  double energy_drift = 0.0;
  double momentum_drift = 0.0;
  double equator_deviation = 0.0;

  void update(const MassVector& masses, const PhaseState& s, double omega) {
    energy_drift = std::max(energy_drift, std::abs(rotating_hamiltonian(masses, s, omega) - h0));
    momentum_drift = std::max(momentum_drift, std::abs(angular_momentum(s) - j0));
    equator_deviation = std::max(equator_deviation, (s.theta.array() - kHalfPi).abs().maxCoeff());
  }
};

TrajectoryRecord integrate_adaptive(const MassVector& masses, const PhaseState& initial, double omega,
                                    const IntegratorOptions& options, const StepObserver& observer) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const Eigen::VectorXd y0 = initial.packed();
  State x(y0.data(), y0.data() + y0.size());

  auto system = [&](const State& in, State& out, double /*t*/) {
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(in.data(), static_cast<Eigen::Index>(in.size()));
    const Eigen::VectorXd f = vector_field(masses, y, omega);
    out.assign(f.data(), f.data() + f.size());
  };

  TrajectoryRecord rec;
  Monitors mon{rotating_hamiltonian(masses, initial, omega), angular_momentum(initial)};
  const double sample = options.step * std::max(1, options.record_every);
  const auto samples = static_cast<long>(std::llround(options.horizon / std::abs(sample)));
  bool stopped = false;
  long index = 0;
  auto observe = [&](const State& xs, double t) {
    if (stopped) return;
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    guard_state(y, options.distance_guard, t);
    const PhaseState s = PhaseState::unpack(y);
    mon.update(masses, s, omega);
    rec.times.push_back(t);
    rec.states.push_back(s);
    if (observer && index > 0 && !observer(index, t, s)) stopped = true;
    ++index;
  };
  auto stepper = odeint::make_dense_output(options.absolute_tolerance, options.relative_tolerance,
                                           odeint::runge_kutta_dopri5<State>());
  odeint::integrate_n_steps(stepper, system, x, 0.0, sample, samples, observe);
  rec.energy_drift = mon.energy_drift;
  rec.momentum_drift = mon.momentum_drift;
  rec.equator_deviation = mon.equator_deviation;
  rec.steps = samples;
  return rec;
}

}  // namespace

double angular_momentum(const PhaseState& state) { return state.pphi.sum(); }

double hamiltonian(const MassVector& masses, const PhaseState& state) {
  return kinetic_energy(masses, state) - force_function(masses, state.theta_span(), state.phi_span());
}

double rotating_hamiltonian(const MassVector& masses, const PhaseState& state, double omega) {
  return hamiltonian(masses, state) - omega * angular_momentum(state);
}

Eigen::VectorXd vector_field(const MassVector& masses, const Eigen::VectorXd& y, double omega) {
  if (y.size() % 4 != 0) throw Error(ErrorKind::DimensionMismatch, "phase vector length");
  const Eigen::Index n = y.size() / 4;
  check_state_size(masses, n);
  const Eigen::VectorXd grad = force_gradient(masses, head_span(y, 0, n), head_span(y, n, n));
  Eigen::VectorXd f(4 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = masses[static_cast<std::size_t>(i)];
    const auto [s, c] = polar_trig(y[i]);
    if (std::abs(s) <= kPolarTolerance) {
      throw Error(ErrorKind::PolarSingularity, "body " + std::to_string(i + 1) + " at a pole");
    }
    const double ptheta = y[2 * n + i];
    const double pphi = y[3 * n + i];
    f[i] = ptheta / m;
    f[n + i] = pphi / (m * s * s) - omega;
    f[2 * n + i] = pphi * pphi * c / (m * s * s * s) + grad[i];
    f[3 * n + i] = grad[n + i];
  }
  return f;
}

PhaseState eom_inertial(const MassVector& masses, const PhaseState& state) {
  return eom_rotating(masses, state, 0.0);
}

PhaseState eom_rotating(const MassVector& masses, const PhaseState& state, double omega) {
  state.validate();
  return PhaseState::unpack(vector_field(masses, state.packed(), omega));
}

TrajectoryRecord integrate(const MassVector& masses, const PhaseState& initial, double omega,
                           const IntegratorOptions& options, const StepObserver& observer) {
  initial.validate();
  check_state_size(masses, initial.size());
  if (!(options.horizon > 0.0) || options.step == 0.0 || !std::isfinite(options.step)) {
    throw Error(ErrorKind::InvalidInput, "horizon must be positive and step nonzero");
  }
  if (options.method == IntegrationMethod::AdaptiveDopri5) {
    return integrate_adaptive(masses, initial, omega, options, observer);
  }

  const MidpointSolver solver(masses, omega, options);
  std::vector<double> substeps{1.0};
  if (options.method == IntegrationMethod::MidpointComposition4) {
    const double cbrt2 = std::cbrt(2.0);
    const double outer = 1.0 / (2.0 - cbrt2);
    substeps = {outer, -cbrt2 * outer, outer};
  }

  TrajectoryRecord rec;
  Monitors mon{rotating_hamiltonian(masses, initial, omega), angular_momentum(initial)};
  const long steps = std::llround(options.horizon / std::abs(options.step));
  const int every = std::max(1, options.record_every);
  Eigen::VectorXd y = initial.packed();
  rec.times.push_back(0.0);
  rec.states.push_back(initial);
  mon.update(masses, initial, omega);

  long i = 1;
  for (; i <= steps; ++i) {
    const double t = static_cast<double>(i) * options.step;
    for (double w : substeps) y = solver.step(y, w * options.step, t);
    guard_state(y, options.distance_guard, t);
    const PhaseState s = PhaseState::unpack(y);
    mon.update(masses, s, omega);
    const bool keep_going = !observer || observer(i, t, s);
    if (i % every == 0 || i == steps || !keep_going) {
      rec.times.push_back(t);
      rec.states.push_back(s);
    }
    if (!keep_going) break;
  }
  rec.energy_drift = mon.energy_drift;
  rec.momentum_drift = mon.momentum_drift;
  rec.equator_deviation = mon.equator_deviation;
  rec.steps = std::min(i, steps);
  return rec;
}

PhaseState relative_equilibrium_state(const AdmissibleMassTriple& masses, double omega) {
  return equatorial_state(masses.masses(), ring_from_shape(shape_from_masses(masses)), omega);
}

PhaseState perturbed_state(const AdmissibleMassTriple& masses, double omega, PerturbationMode mode,
                           double amplitude) {
  const MassVector mv = masses.masses();
  const RingConfiguration ring = ring_from_shape(shape_from_masses(masses));
  const LinearizationBlocks blocks = assemble_blocks(mv, ring, omega);
  PhaseState s = equatorial_state(mv, ring, omega);

  const Eigen::VectorXd root_m = blocks.M.cwiseSqrt();
  const Eigen::MatrixXd& a = mode == PerturbationMode::Lambda1 ? blocks.Homega : blocks.G;
  const Eigen::MatrixXd sym = root_m.cwiseInverse().asDiagonal() * a * root_m.cwiseInverse().asDiagonal();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (sym + sym.transpose()));
  // Top eigenvalue of H_omega M^-1 is lambda1 - omega^2; lowest of G M^-1 is lambda2.
  const Eigen::Index pick = mode == PerturbationMode::Lambda1 ? sym.rows() - 1 : 0;
  const double mu = eig.eigenvalues()[pick];
  // Position part of the eigenvector of L: M^-1 u with u = M^1/2 w.
  Eigen::VectorXd dir = root_m.cwiseInverse().cwiseProduct(eig.eigenvectors().col(pick));
  dir /= dir.lpNorm<Eigen::Infinity>();

  if (mode == PerturbationMode::Lambda1) {
    s.theta += amplitude * dir;
    // Pure growing mode when unstable: p = sqrt(mu) M dtheta.
    if (mu > 0.0) s.ptheta = std::sqrt(mu) * amplitude * blocks.M.cwiseProduct(dir);
  } else {
    s.phi += amplitude * dir;
  }
  return s;
}

double deviation_from_rest(const PhaseState& state, const PhaseState& rest) {
  double dev = (state.theta.array() - rest.theta.array()).abs().maxCoeff();
  for (Eigen::Index i = 1; i < state.size(); ++i) {
    const double now = state.phi[i] - state.phi[0];
    const double ref = rest.phi[i] - rest.phi[0];
    dev = std::max(dev, std::abs(std::remainder(now - ref, kTwoPi)));
  }
  return dev;
}

GrowthResult growth_rate_experiment(const AdmissibleMassTriple& masses, double omega,
                                    const GrowthOptions& options) {
  if (!(options.amplitude >= 1e-8 && options.amplitude <= 1e-4)) {
    throw Error(ErrorKind::InvalidInput, "amplitude must lie in [1e-8, 1e-4]");
  }
  const PhaseState rest = relative_equilibrium_state(masses, omega);
  const PhaseState start = perturbed_state(masses, omega, options.mode, options.amplitude);
  const double low = options.window_low_factor * options.amplitude;
  const double high = options.window_high;

  std::vector<double> ts;
  std::vector<double> logs;
  double max_dev = 0.0;
  const int every = std::max(1, options.sample_every);
  auto observer = [&](long i, double t, const PhaseState& s) {
    const double dev = deviation_from_rest(s, rest);
    max_dev = std::max(max_dev, dev);
    if (dev > high) return false;
    if (i % every == 0 && dev >= low) {
      ts.push_back(t);
      logs.push_back(std::log(dev));
    }
    return true;
  };

  IntegratorOptions io;
  io.step = options.step;
  io.horizon = options.horizon;
  io.method = options.method;
  io.record_every = std::numeric_limits<int>::max();
  integrate(masses.masses(), start, omega, io, observer);

  if (ts.size() < 3) {
    std::ostringstream msg;
    msg << "deviation peaked at " << max_dev << ", below the fit window start " << low
        << " (consistent with stability)";
    throw Error(ErrorKind::NoGrowthWindow, msg.str());
  }

  const auto count = static_cast<double>(ts.size());
  double mt = 0.0, ml = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    mt += ts[k];
    ml += logs[k];
  }
  mt /= count;
  ml /= count;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    sxx += (ts[k] - mt) * (ts[k] - mt);
    sxy += (ts[k] - mt) * (logs[k] - ml);
  }
  const double slope = sxy / sxx;
  double ss = 0.0;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double r = logs[k] - (ml + slope * (ts[k] - mt));
    ss += r * r;
  }

  double predicted = 0.0;
  if (options.mode == PerturbationMode::Lambda1) {
    const double lambda1 = classify(masses, omega).lambda1;
    predicted = std::sqrt(std::max(lambda1 - omega * omega, 0.0));
  }
  return {slope, std::sqrt(ss / count), static_cast<int>(ts.size()), ts.front(), ts.back(), predicted};
}

}  // namespace curved
