#include "bresse/equilibria.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <Eigen/SparseLU>

#include "bresse/integrator.hpp"
#include "bresse/parallel.hpp"

namespace bresse {

namespace {

double residual_l2(const DiscreteOperators& ops, const Vector& r) { return std::sqrt(ops.grid.h * r.squaredNorm()); }

SparseMatrix newton_jacobian(const DiscreteOperators& ops, const ForcingModel& forcing, const Vector& u) {
  const int n = ops.grid.n;
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(static_cast<std::size_t>(ops.stiffness.nonZeros() + 9 * n));
  for (int col = 0; col < ops.stiffness.outerSize(); ++col) {
    for (SparseMatrix::InnerIterator it(ops.stiffness, col); it; ++it) {
      t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
    }
  }
  for (int j = 0; j < n; ++j) {
    const Vec3 x{u[j], u[n + j], ops.fields == 3 ? u[2 * n + j] : 0.0};
    const Mat3 hess = forcing.hessian_at(x);
    for (int a = 0; a < ops.fields; ++a) {
      for (int b = 0; b < ops.fields; ++b) {
        const double v = hess[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
        if (v != 0.0) t.emplace_back(a * n + j, b * n + j, v);
      }
    }
  }
  SparseMatrix J(ops.dofs(), ops.dofs());
  J.setFromTriplets(t.begin(), t.end());
  J.makeCompressed();
  return J;
}

double condition_estimate(const SparseMatrix& J) {
  const Eigen::MatrixXd dense(J);
  if (!dense.allFinite()) return std::numeric_limits<double>::infinity();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 0.0;
  const double smin = s[s.size() - 1];
  return smin > 0.0 ? s[0] / smin : std::numeric_limits<double>::infinity();
}

Equilibrium package(const DiscreteOperators& ops, const Vector& u, double residual, int iterations) {
  const int n = ops.grid.n;
  Equilibrium eq;
  eq.phi = u.segment(0, n);
  eq.psi = u.segment(n, n);
  eq.w = ops.fields == 3 ? Vector(u.segment(2 * n, n)) : Vector::Zero(n);
  eq.residual_norm = residual;
  eq.iterations = iterations;
  for (const Vector* f : {&eq.phi, &eq.psi, &eq.w}) eq.h1_seminorm_sq += std::pow(h1_seminorm(ops.grid, *f), 2);
  return eq;
}

}  // namespace

State Equilibrium::as_state() const {
  State s = State::zeros(static_cast<int>(phi.size()));
  s.phi = phi;
  s.psi = psi;
  s.w = w;
  return s;
}

Equilibrium solve_equilibrium(const DiscreteOperators& ops, const ForcingModel& forcing,
                              const Vector& guess, const NewtonOptions& options) {
  if (guess.size() != ops.dofs()) throw ConfigError("equilibrium guess has the wrong length");
  if (!guess.allFinite()) throw ConfigError("equilibrium guess must be finite");
  if (!(options.tol > 0.0)) throw ConfigError("equilibrium tolerance must be positive");
  if (options.max_iters < 1) throw ConfigError("equilibrium max_iters must be at least 1");

  Vector u = guess;
  Vector r = stationary_residual(ops, forcing, u);
  double res = residual_l2(ops, r);
  for (int it = 0; it < options.max_iters; ++it) {
    if (res <= options.tol) return package(ops, u, res, it);

    const SparseMatrix J = newton_jacobian(ops, forcing, u);
    Eigen::SparseLU<SparseMatrix> lu;
    lu.analyzePattern(J);
    lu.factorize(J);
    Vector delta;
    if (lu.info() == Eigen::Success) delta = lu.solve(-r);
    if (lu.info() != Eigen::Success || !delta.allFinite()) {
      const double cond = condition_estimate(J);
      std::ostringstream os;
      os << "singular Newton Jacobian at iteration " << it << " (condition estimate " << cond << ")";
      throw SingularJacobian(os.str(), cond);
    }

    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= options.max_halvings; ++k, lambda *= 0.5) {
      const Vector trial = u + lambda * delta;
      const Vector rt = stationary_residual(ops, forcing, trial);
      const double trial_res = residual_l2(ops, rt);
      if (std::isfinite(trial_res) && trial_res < (1.0 - 1e-4 * lambda) * res) {
        u = trial;
        r = rt;
        res = trial_res;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream os;
      os << "line search failed after " << options.max_halvings << " halvings, residual " << res;
      throw EquilibriumFailure(os.str(), res, it + 1);
    }
  }
  if (res <= options.tol) return package(ops, u, res, options.max_iters);
  std::ostringstream os;
  os << "Newton did not converge in " << options.max_iters << " iterations, residual " << res;
  throw EquilibriumFailure(os.str(), res, options.max_iters);
}

Equilibrium solve_equilibrium(const BeamParams& params, const ForcingModel& forcing, const Grid& grid,
                              const Vector& guess, double tol, int max_iters) {
  NewtonOptions options;
  options.tol = tol;
  options.max_iters = max_iters;
  return solve_equilibrium(assemble(params, grid), forcing, guess, options);
}

EquilibriumBound check_equilibrium_bound(const Equilibrium& eq, const BeamParams& params,
                                         const ForcingModel& forcing, const AnalyticConstants& constants) {
  const double pi = std::numbers::pi;
  const double g3 = constants.gamma3_weighted;
  EquilibriumBound b;
  b.prefactor = 1.0 - 2.0 * forcing.beta * params.L * params.L * g3 / (pi * pi);
  b.lhs = b.prefactor * eq.h1_seminorm_sq;
  b.rhs = 2.0 * forcing.mF * params.L * g3;
  b.passed = b.lhs <= b.rhs * (1.0 + 1e-12) + 1e-14;
  b.near_degenerate = b.prefactor < 1e-2;
  return b;
}

std::vector<Vector> multistart_guesses(const Grid& grid, const MultiStartOptions& options) {
  const int n = grid.n;
  std::vector<Vector> guesses;
  guesses.push_back(Vector::Zero(3 * n));
  for (int field = 0; field < 3; ++field) {
    for (int m = 1; m <= options.modes; ++m) {
      const Vector mode = sine_mode(grid, m);
      for (double amp : options.amplitudes) {
        for (double sign : {1.0, -1.0}) {
          Vector g = Vector::Zero(3 * n);
          g.segment(field * n, n) = sign * amp * mode;
          guesses.push_back(g);
        }
      }
    }
  }
  for (int r = 0; r < options.random_starts; ++r) {
    std::mt19937_64 rng(options.seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(r));
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    Vector g = Vector::Zero(3 * n);
    for (int field = 0; field < 3; ++field) {
      for (int m = 1; m <= 4; ++m) g.segment(field * n, n) += (coef(rng) / m) * sine_mode(grid, m);
    }
    guesses.push_back(g);
  }
  return guesses;
}

std::uint64_t state_hash(const Vector& u) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    std::uint64_t bits;
    const double v = u[i] == 0.0 ? 0.0 : u[i];  // fold -0 into +0
    std::memcpy(&bits, &v, sizeof bits);
    for (int k = 0; k < 8; ++k) {
      h ^= (bits >> (8 * k)) & 0xFFu;
      h *= 1099511628211ULL;
    }
  }
  return h;
}

EquilibriumSet enumerate_equilibria(const DiscreteOperators& ops, const ForcingModel& forcing,
                                    const MultiStartOptions& options) {
  if (ops.fields != 3) throw ConfigError("equilibrium enumeration needs Bresse operators");
  const std::vector<Vector> guesses = multistart_guesses(ops.grid, options);
  std::vector<std::optional<Equilibrium>> solved(guesses.size());
  std::vector<std::string> errors(guesses.size());
  parallel_for(guesses.size(), options.workers, [&](std::size_t i) {
    try {
      solved[i] = solve_equilibrium(ops, forcing, guesses[i], options.newton);
    } catch (const NumericalError& e) {
      errors[i] = e.what();
    }
  });

  EquilibriumSet set;
  set.attempts = static_cast<int>(guesses.size());
  for (std::size_t i = 0; i < guesses.size(); ++i) {
    if (!solved[i]) {
      set.failures.push_back("start " + std::to_string(i) + ": " + errors[i]);
      continue;
    }
    ++set.converged;
    const Vector u = solved[i]->stacked();
    const bool duplicate = std::any_of(set.equilibria.begin(), set.equilibria.end(), [&](const Equilibrium& e) {
      return std::sqrt(ops.grid.h * (e.stacked() - u).squaredNorm()) <= options.dedup_distance;
    });
    if (!duplicate) set.equilibria.push_back(*solved[i]);
  }
  std::stable_sort(set.equilibria.begin(), set.equilibria.end(), [](const Equilibrium& a, const Equilibrium& b) {
    if (a.residual_norm != b.residual_norm) return a.residual_norm < b.residual_norm;
    return state_hash(a.stacked()) < state_hash(b.stacked());
  });
  return set;
}

}  // namespace bresse
