#pragma once

// Equations of motion on (S^2)^n in the inertial and rotating frames, the
// conservative integrators, and the perturbation experiments.

#include "curved/linear_stability.hpp"
#include "curved/phase_state.hpp"

#include <functional>
#include <vector>

namespace curved {

// Inertial Hamiltonian T - V.
double hamiltonian(const MassVector& masses, const PhaseState& state);
// Hamiltonian of the frame rotating at omega: T - V - omega * J.
double rotating_hamiltonian(const MassVector& masses, const PhaseState& state, double omega);
// J = sum p_phi.
double angular_momentum(const PhaseState& state);

PhaseState eom_inertial(const MassVector& masses, const PhaseState& state);
// Same field with dphi/dt shifted by -omega.
PhaseState eom_rotating(const MassVector& masses, const PhaseState& state, double omega);

// Packed form of eom_rotating, used by the integrators.
Eigen::VectorXd vector_field(const MassVector& masses, const Eigen::VectorXd& y, double omega);

enum class IntegrationMethod {
  ImplicitMidpoint,      // second order, symplectic
  MidpointComposition4,  // triple-jump composition of implicit midpoint, fourth order, symplectic
  AdaptiveDopri5,        // embedded explicit 5(4) pair, cross-check only
};

struct IntegratorOptions {
  double step = 1e-3;
  double horizon = 1.0;
  IntegrationMethod method = IntegrationMethod::ImplicitMidpoint;
  int record_every = 100;          // store every k-th step (the final state is always stored)
  double inner_tolerance = 1e-13;  // implicit solve, relative to max(1, |y|)
  int inner_max_iterations = 50;
  double distance_guard = 1e-6;    // abort when a pair comes this close to 0 or pi
  double relative_tolerance = 1e-10;  // adaptive pair
  double absolute_tolerance = 1e-12;  // adaptive pair
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<PhaseState> states;
  double energy_drift = 0.0;     // of the frame Hamiltonian
  double momentum_drift = 0.0;   // of J
  double equator_deviation = 0.0;  // max over t, i of |theta_i - pi/2|
  long steps = 0;
};

// Called after every step with the step index, time and state; return false to stop.
using StepObserver = std::function<bool(long, double, const PhaseState&)>;

// Integrates the rotating-frame equations (omega = 0 is the inertial frame).
// A negative step integrates backwards. Throws StepFailure.
TrajectoryRecord integrate(const MassVector& masses, const PhaseState& initial, double omega,
                           const IntegratorOptions& options, const StepObserver& observer = {});

// Rotating-frame rest point of the relative equilibrium built from `masses`.
PhaseState relative_equilibrium_state(const AdmissibleMassTriple& masses, double omega);

enum class PerturbationMode {
  Lambda1,  // out-of-plane eigenvector of H_omega M^-1 belonging to lambda1 - omega^2
  InPlane,  // in-plane eigenvector of G M^-1 belonging to lambda2
};

struct GrowthOptions {
  PerturbationMode mode = PerturbationMode::Lambda1;
  double amplitude = 1e-6;
  double horizon = 200.0;
  double step = 1e-3;
  int sample_every = 10;
  double window_low_factor = 10.0;  // window starts at factor * amplitude
  double window_high = 1e-2;
  IntegrationMethod method = IntegrationMethod::ImplicitMidpoint;
};

struct GrowthResult {
  double exponent;
  double fit_rms;  // rms residual of the log-linear fit
  int fit_points;
  double window_start;  // times bracketing the fitted samples
  double window_end;
  double predicted;     // sqrt(max(lambda1 - omega^2, 0)) for the Lambda1 mode, else 0
};

// Perturbation of the relative equilibrium along an eigendirection of the
// linearization, perturbation max-norm = amplitude.
PhaseState perturbed_state(const AdmissibleMassTriple& masses, double omega, PerturbationMode mode,
                           double amplitude);

// Max-norm distance from the rest point in the rotating frame, ignoring the
// common rotation: |theta_i - pi/2| and the change of phi_i - phi_1.
double deviation_from_rest(const PhaseState& state, const PhaseState& rest);

// Fits log(deviation) ~ exponent * t over samples with deviation in
// [window_low_factor * amplitude, window_high]. Throws NoGrowthWindow when the
// deviation never reaches the window.
GrowthResult growth_rate_experiment(const AdmissibleMassTriple& masses, double omega,
                                    const GrowthOptions& options = {});

}  // namespace curved
