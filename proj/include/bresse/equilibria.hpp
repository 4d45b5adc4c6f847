#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bresse/discretization.hpp"

namespace bresse {

/// Stationary point (phi, psi, w) of K u + grad F(u) = 0.
struct Equilibrium {
  Vector phi, psi, w;
  double residual_norm = 0.0;   ///< discrete L2 norm of K u + grad F(u)
  double h1_seminorm_sq = 0.0;  ///< |phi_x|^2 + |psi_x|^2 + |w_x|^2
  int iterations = 0;

  Vector stacked() const { return stack(phi, psi, w); }
  State as_state() const;
};

/// Newton Jacobian was singular to working precision.
class SingularJacobian : public NumericalError {
 public:
  SingularJacobian(const std::string& what, double condition)
      : NumericalError(what), condition_estimate(condition) {}
  double condition_estimate;
};

/// Newton stopped without reaching the tolerance.
class EquilibriumFailure : public NumericalError {
 public:
  EquilibriumFailure(const std::string& what, double residual, int iterations)
      : NumericalError(what), residual(residual), iterations(iterations) {}
  double residual;
  int iterations;
};

struct NewtonOptions {
  double tol = 1e-10;
  int max_iters = 50;
  int max_halvings = 30;
};

/// Damped Newton from `guess` (stacked [phi; psi; w]). The Jacobian is the
/// stiffness plus the nodal Hessian of F. Throws SingularJacobian or
/// EquilibriumFailure.
Equilibrium solve_equilibrium(const DiscreteOperators& ops, const ForcingModel& forcing,
                              const Vector& guess, const NewtonOptions& options = {});
Equilibrium solve_equilibrium(const BeamParams& params, const ForcingModel& forcing, const Grid& grid,
                              const Vector& guess, double tol = 1e-10, int max_iters = 50);

struct EquilibriumBound {
  double lhs = 0.0;        ///< prefactor times h1_seminorm_sq
  double rhs = 0.0;        ///< 2 mF L gamma3
  double prefactor = 0.0;  ///< 1 - 2 beta L^2 gamma3 / pi^2
  bool passed = false;
  bool near_degenerate = false;  ///< prefactor below 1e-2
};

EquilibriumBound check_equilibrium_bound(const Equilibrium& eq, const BeamParams& params,
                                         const ForcingModel& forcing, const AnalyticConstants& constants);

struct MultiStartOptions {
  NewtonOptions newton;
  std::vector<double> amplitudes{0.25, 0.5, 1.0};
  int modes = 3;          ///< sine modes per field, each tried with both signs
  int random_starts = 8;  ///< seeded random smooth guesses
  std::uint64_t seed = 1;
  double dedup_distance = 1e-6;
  int workers = 1;
};

struct EquilibriumSet {
  std::vector<Equilibrium> equilibria;  ///< sorted by residual, then state hash
  int attempts = 0;
  int converged = 0;
  std::vector<std::string> failures;  ///< one message per failed start, in start order
};

/// Multi-start guesses in a fixed order: zero, then for each field, mode and
/// amplitude the pair +/-, then the random starts.
std::vector<Vector> multistart_guesses(const Grid& grid, const MultiStartOptions& options);

EquilibriumSet enumerate_equilibria(const DiscreteOperators& ops, const ForcingModel& forcing,
                                    const MultiStartOptions& options = {});

/// FNV-1a over the bit patterns of the nodal values.
std::uint64_t state_hash(const Vector& u);

}  // namespace bresse
