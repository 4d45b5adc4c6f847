#pragma once

#include <memory>
#include <string>
#include <vector>

#include "bresse/discretization.hpp"

namespace bresse {

struct StepperConfig {
  double dt = 0.0;
  double newton_tol = 1e-10;
  int newton_max_iters = 25;
  std::string scheme = "implicit-midpoint";

  void validate() const;
};

/// h/2 divided by the largest wave speed. Stability does not depend on it.
double default_dt(const DiscreteOperators& ops);

/// Newton on the midpoint equations did not converge.
class StepFailure : public NumericalError {
 public:
  StepFailure(const std::string& what, double residual, int iterations)
      : NumericalError(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

/// Energy bookkeeping at one sample time.
struct EnergyReport {
  double t = 0.0;
  double E = 0.0;                 ///< half the squared H_ell norm
  double Etotal = 0.0;            ///< E plus the integral of F
  double dissipation_rate = 0.0;  ///< integral of g1(phi_t)phi_t + g2(psi_t)psi_t + g3(w_t)w_t
  double cumulative_dissipation = 0.0;
  /// |Etotal(t) + cumulative_dissipation - Etotal(0)|
  double identity_residual = 0.0;
};

/// Implicit midpoint stepper for M u'' + K u + g(u') + grad F(u) = 0.
///
/// Unknown is the midpoint velocity z: u+ = u + dt z, v+ = 2z - v. The
/// elastic part of the Jacobian is assembled once; damping and forcing
/// contributions are refreshed every Newton iteration. Works for either
/// field count of DiscreteOperators.
class MidpointStepper {
 public:
  MidpointStepper(const DiscreteOperators& ops, const ForcingModel& forcing,
                  const DampingModel& damping, const StepperConfig& cfg);
  ~MidpointStepper();
  MidpointStepper(MidpointStepper&&) noexcept;
  MidpointStepper& operator=(MidpointStepper&&) noexcept;

  /// Advances (u, v) by one step. Returns the energy dissipated over the
  /// step, dt times the discrete integral of g(z) z. Throws StepFailure.
  double advance(Vector& u, Vector& v);

  int last_iterations() const;
  double last_residual() const;
  double dt() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Elastic plus kinetic energy, half the squared H_ell norm.
double linear_energy(const DiscreteOperators& ops, const Vector& u, const Vector& v);
/// Integral of F over the beam for a stacked displacement vector.
double potential_energy(const DiscreteOperators& ops, const ForcingModel& forcing, const Vector& u);
/// Integral of sum g_i(v_i) v_i over the beam.
double dissipation_rate(const DiscreteOperators& ops, const DampingModel& damping, const Vector& v);
/// Nodal residual K u + grad F(u) (the stationary operator).
Vector stationary_residual(const DiscreteOperators& ops, const ForcingModel& forcing, const Vector& u);
/// u'' = -M^{-1}(K u + g(v) + grad F(u)).
Vector acceleration(const DiscreteOperators& ops, const ForcingModel& forcing,
                    const DampingModel& damping, const Vector& u, const Vector& v);

EnergyReport energy_report(const DiscreteOperators& ops, const ForcingModel& forcing,
                           const DampingModel& damping, const State& state);

/// One implicit-midpoint step of the Bresse system.
State step(const State& state, const DiscreteOperators& ops, const ForcingModel& forcing,
           const DampingModel& damping, const StepperConfig& cfg);

struct SimulateOptions {
  int stride = 1;           ///< keep a report (and state) every `stride` steps, plus the last
  bool keep_states = true;
};

template <class StateT>
struct BasicTrajectory {
  std::vector<StateT> states;
  std::vector<EnergyReport> reports;
  int steps = 0;  ///< steps actually taken
  double dt = 0.0;
  bool failed = false;
  std::string failure;

  const EnergyReport& final_report() const { return reports.back(); }
  double max_identity_residual() const;
};

using Trajectory = BasicTrajectory<State>;
using TimoshenkoTrajectory = BasicTrajectory<TimoshenkoState>;

/// ceil(T/dt) midpoint steps from `initial`. Step failures and non-finite
/// states stop the run and are flagged on the returned partial trajectory.
Trajectory simulate(const State& initial, double T, const DiscreteOperators& ops,
                    const ForcingModel& forcing, const DampingModel& damping,
                    const StepperConfig& cfg, const SimulateOptions& options = {});

/// Timoshenko counterpart; `ops` must come from assemble_timoshenko and the
/// forcing must have f1, f2 independent of w (ConfigError otherwise).
TimoshenkoTrajectory timoshenko_simulate(const TimoshenkoState& initial, double T,
                                         const DiscreteOperators& ops, const ForcingModel& forcing,
                                         const DampingModel& damping, const StepperConfig& cfg,
                                         const SimulateOptions& options = {});

/// Self-checks of the assembled operators and the stepper: stiffness
/// symmetry and positivity, quadratic form against cell sums, Timoshenko
/// block at ell = 0, and energy conservation of a short linear run.
ValidationReport discretization_checks(const BeamParams& params, const Grid& grid, std::uint64_t seed = 1);

/// Number of reports violating Etotal >= beta0 E - L mF (beyond round-off).
int coercivity_violations(const std::vector<EnergyReport>& reports, double beta0, double L, double mF);

}  // namespace bresse
