#include "bresse/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

namespace bresse {

namespace {

Vec3 node_point(const DiscreteOperators& ops, const Vector& u, int j) {
  const int n = ops.grid.n;
  return Vec3{u[j], u[n + j], ops.fields == 3 ? u[2 * n + j] : 0.0};
}

}  // namespace

void StepperConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("stepper dt must be positive");
  if (!(newton_tol > 0.0)) throw ConfigError("stepper newton_tol must be positive");
  if (newton_max_iters < 1) throw ConfigError("stepper newton_max_iters must be at least 1");
  if (scheme != "implicit-midpoint") throw ConfigError("unknown scheme '" + scheme + "'");
}

double default_dt(const DiscreteOperators& ops) {
  return 0.5 * ops.grid.h / ops.params.max_wave_speed();
}

double linear_energy(const DiscreteOperators& ops, const Vector& u, const Vector& v) {
  const double kinetic = ops.grid.h * v.dot(ops.mass.cwiseProduct(v));
  return 0.5 * (kinetic + ops.quadratic_form(u));
}

double potential_energy(const DiscreteOperators& ops, const ForcingModel& forcing, const Vector& u) {
  double sum = forcing.potential(Vec3{0.0, 0.0, 0.0});
  for (int j = 0; j < ops.grid.n; ++j) sum += forcing.potential(node_point(ops, u, j));
  return ops.grid.h * sum;
}

double dissipation_rate(const DiscreteOperators& ops, const DampingModel& damping, const Vector& v) {
  const int n = ops.grid.n;
  double sum = 0.0;
  for (int f = 0; f < ops.fields; ++f) {
    const DampingLaw& law = damping.laws[static_cast<std::size_t>(f)];
    for (int j = 0; j < n; ++j) {
      const double s = v[f * n + j];
      sum += law(s) * s;
    }
  }
  return ops.grid.h * sum;
}

Vector stationary_residual(const DiscreteOperators& ops, const ForcingModel& forcing, const Vector& u) {
  const int n = ops.grid.n;
  Vector r = ops.stiffness * u;
  for (int j = 0; j < n; ++j) {
    const Vec3 g = forcing.gradient(node_point(ops, u, j));
    for (int f = 0; f < ops.fields; ++f) r[f * n + j] += g[static_cast<std::size_t>(f)];
  }
  return r;
}

Vector acceleration(const DiscreteOperators& ops, const ForcingModel& forcing,
                    const DampingModel& damping, const Vector& u, const Vector& v) {
  const int n = ops.grid.n;
  Vector a = -stationary_residual(ops, forcing, u);
  for (int f = 0; f < ops.fields; ++f) {
    const DampingLaw& law = damping.laws[static_cast<std::size_t>(f)];
    for (int j = 0; j < n; ++j) a[f * n + j] -= law(v[f * n + j]);
  }
  return a.cwiseQuotient(ops.mass);
}

EnergyReport energy_report(const DiscreteOperators& ops, const ForcingModel& forcing,
                           const DampingModel& damping, const State& state) {
  const Vector u = displacements(state), v = velocities(state);
  EnergyReport r;
  r.t = state.t;
  r.E = linear_energy(ops, u, v);
  r.Etotal = r.E + potential_energy(ops, forcing, u);
  r.dissipation_rate = dissipation_rate(ops, damping, v);
  return r;
}

// ---------------------------------------------------------------------------

struct MidpointStepper::Impl {
  const DiscreteOperators* ops;
  ForcingModel forcing;
  DampingModel damping;
  StepperConfig cfg;

  SparseMatrix jacobian;       // pattern of M + dt^2/4 K plus node-local field blocks
  std::vector<double> base;    // values of M + dt^2/4 K on that pattern
  std::vector<int> diag_slot;  // value index of (i, i)
  // value index of (a n + j, b n + j) for a, b < fields
  std::vector<std::array<std::array<int, 3>, 3>> block_slot;

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  std::optional<Eigen::SparseLU<SparseMatrix>> lu;

  int iterations = 0;
  double residual = 0.0;

  Impl(const DiscreteOperators& o, const ForcingModel& f, const DampingModel& d, const StepperConfig& c)
      : ops(&o), forcing(f), damping(d), cfg(c) {
    cfg.validate();
    const int n = o.grid.n;
    const int dofs = o.dofs();
    const double a = 0.25 * cfg.dt * cfg.dt;

    std::vector<Eigen::Triplet<double>> t;
    for (int col = 0; col < o.stiffness.outerSize(); ++col) {
      for (SparseMatrix::InnerIterator it(o.stiffness, col); it; ++it) {
        t.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), a * it.value());
      }
    }
    for (int i = 0; i < dofs; ++i) t.emplace_back(i, i, o.mass[i]);
    for (int fa = 0; fa < o.fields; ++fa) {
      for (int fb = 0; fb < o.fields; ++fb) {
        for (int j = 0; j < n; ++j) t.emplace_back(fa * n + j, fb * n + j, 0.0);
      }
    }
    jacobian.resize(dofs, dofs);
    jacobian.setFromTriplets(t.begin(), t.end());
    jacobian.makeCompressed();
    base.assign(jacobian.valuePtr(), jacobian.valuePtr() + jacobian.nonZeros());

    auto slot = [&](int row, int col) {
      const int* outer = jacobian.outerIndexPtr();
      const int* inner = jacobian.innerIndexPtr();
      const int* first = inner + outer[col];
      const int* last = inner + outer[col + 1];
      const int* it = std::lower_bound(first, last, row);
      return static_cast<int>(it - inner);
    };
    diag_slot.resize(static_cast<std::size_t>(dofs));
    for (int i = 0; i < dofs; ++i) diag_slot[static_cast<std::size_t>(i)] = slot(i, i);
    block_slot.resize(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
      for (int fa = 0; fa < o.fields; ++fa) {
        for (int fb = 0; fb < o.fields; ++fb) {
          block_slot[static_cast<std::size_t>(j)][static_cast<std::size_t>(fa)]
                    [static_cast<std::size_t>(fb)] = slot(fa * n + j, fb * n + j);
        }
      }
    }
    ldlt.analyzePattern(jacobian);
  }

  // R(z) = M(z - v) + dt/2 K(u + dt/2 z) + dt/2 (g(z) + grad F(u + dt/2 z))
  void residual_at(const Vector& u, const Vector& v, const Vector& Ku, const Vector& z, Vector& r) const {
    const int n = ops->grid.n;
    const double half = 0.5 * cfg.dt;
    const Vector um = u + half * z;
    r = ops->mass.cwiseProduct(z - v) + half * (Ku + half * (ops->stiffness * z));
    for (int j = 0; j < n; ++j) {
      const Vec3 g = forcing.gradient(node_point(*ops, um, j));
      for (int f = 0; f < ops->fields; ++f) {
        const int i = f * n + j;
        r[i] += half * (damping.laws[static_cast<std::size_t>(f)](z[i]) + g[static_cast<std::size_t>(f)]);
      }
    }
  }

  void update_jacobian(const Vector& u, const Vector& z) {
    const int n = ops->grid.n;
    const double half = 0.5 * cfg.dt;
    const double quarter = half * half;
    double* values = jacobian.valuePtr();
    std::copy(base.begin(), base.end(), values);
    const Vector um = u + half * z;
    for (int j = 0; j < n; ++j) {
      const Mat3 hess = forcing.hessian_at(node_point(*ops, um, j));
      const auto& slots = block_slot[static_cast<std::size_t>(j)];
      for (int fa = 0; fa < ops->fields; ++fa) {
        const auto a = static_cast<std::size_t>(fa);
        values[diag_slot[static_cast<std::size_t>(fa * n + j)]] +=
            half * damping.laws[a].derivative(z[fa * n + j]);
        for (int fb = 0; fb < ops->fields; ++fb) {
          const auto b = static_cast<std::size_t>(fb);
          values[slots[a][b]] += quarter * hess[a][b];
        }
      }
    }
  }

  Vector solve(const Vector& rhs) {
    ldlt.factorize(jacobian);
    if (ldlt.info() == Eigen::Success) {
      Vector x = ldlt.solve(rhs);
      if (x.allFinite()) return x;
    }
    if (!lu) {
      lu.emplace();
      lu->analyzePattern(jacobian);
    }
    lu->factorize(jacobian);
    if (lu->info() != Eigen::Success) {
      throw StepFailure("midpoint Jacobian is singular", residual, iterations);
    }
    return lu->solve(rhs);
  }

  double advance(Vector& u, Vector& v) {
    const double half = 0.5 * cfg.dt;
    const Vector Ku = ops->stiffness * u;
    const double scale = std::max({1.0, ops->mass.cwiseProduct(v).lpNorm<Eigen::Infinity>(),
                                   half * Ku.lpNorm<Eigen::Infinity>()});
    Vector z = v;
    Vector r;
    iterations = 0;
    for (;;) {
      residual_at(u, v, Ku, z, r);
      residual = r.lpNorm<Eigen::Infinity>() / scale;
      if (!std::isfinite(residual)) {
        throw StepFailure("non-finite midpoint residual", residual, iterations);
      }
      if (residual <= cfg.newton_tol) break;
      if (iterations >= cfg.newton_max_iters) {
        std::ostringstream os;
        os << "Newton did not converge in " << iterations << " iterations (scaled residual "
           << residual << ")";
        throw StepFailure(os.str(), residual, iterations);
      }
      update_jacobian(u, z);
      z -= solve(r);
      ++iterations;
    }
    u += cfg.dt * z;
    v = 2.0 * z - v;
    return cfg.dt * dissipation_rate(*ops, damping, z);
  }
};

MidpointStepper::MidpointStepper(const DiscreteOperators& ops, const ForcingModel& forcing,
                                 const DampingModel& damping, const StepperConfig& cfg)
    : impl_(std::make_unique<Impl>(ops, forcing, damping, cfg)) {}
MidpointStepper::~MidpointStepper() = default;
MidpointStepper::MidpointStepper(MidpointStepper&&) noexcept = default;
MidpointStepper& MidpointStepper::operator=(MidpointStepper&&) noexcept = default;

double MidpointStepper::advance(Vector& u, Vector& v) { return impl_->advance(u, v); }
int MidpointStepper::last_iterations() const { return impl_->iterations; }
double MidpointStepper::last_residual() const { return impl_->residual; }
double MidpointStepper::dt() const { return impl_->cfg.dt; }

State step(const State& state, const DiscreteOperators& ops, const ForcingModel& forcing,
           const DampingModel& damping, const StepperConfig& cfg) {
  if (ops.fields != 3) throw ConfigError("step() needs Bresse operators");
  if (!state.finite()) throw ConfigError("step() needs a finite state");
  MidpointStepper stepper(ops, forcing, damping, cfg);
  Vector u = displacements(state), v = velocities(state);
  stepper.advance(u, v);
  const int n = ops.grid.n;
  State out;
  out.phi = u.segment(0, n);
  out.psi = u.segment(n, n);
  out.w = u.segment(2 * n, n);
  out.phit = v.segment(0, n);
  out.psit = v.segment(n, n);
  out.wt = v.segment(2 * n, n);
  out.t = state.t + cfg.dt;
  return out;
}

template <class StateT>
double BasicTrajectory<StateT>::max_identity_residual() const {
  double m = 0.0;
  for (const auto& r : reports) m = std::max(m, r.identity_residual);
  return m;
}

template struct BasicTrajectory<State>;
template struct BasicTrajectory<TimoshenkoState>;

namespace {

State unpack(const DiscreteOperators& ops, const Vector& u, const Vector& v, double t, State*) {
  const int n = ops.grid.n;
  State s;
  s.phi = u.segment(0, n);
  s.psi = u.segment(n, n);
  s.w = u.segment(2 * n, n);
  s.phit = v.segment(0, n);
  s.psit = v.segment(n, n);
  s.wt = v.segment(2 * n, n);
  s.t = t;
  return s;
}

TimoshenkoState unpack(const DiscreteOperators& ops, const Vector& u, const Vector& v, double t,
                       TimoshenkoState*) {
  const int n = ops.grid.n;
  TimoshenkoState s;
  s.phi = u.segment(0, n);
  s.psi = u.segment(n, n);
  s.phit = v.segment(0, n);
  s.psit = v.segment(n, n);
  s.t = t;
  return s;
}

template <class StateT>
BasicTrajectory<StateT> run(const StateT& initial, double T, const DiscreteOperators& ops,
                            const ForcingModel& forcing, const DampingModel& damping,
                            const StepperConfig& cfg, const SimulateOptions& options) {
  cfg.validate();
  if (!(T >= 0.0) || !std::isfinite(T)) throw ConfigError("simulation horizon T must be >= 0");
  if (initial.size() != ops.grid.n) throw ConfigError("initial state does not match the grid");
  if (!initial.finite()) throw ConfigError("initial state is not finite");
  if (options.stride < 1) throw ConfigError("output stride must be >= 1");

  BasicTrajectory<StateT> traj;
  traj.dt = cfg.dt;
  Vector u = displacements(initial), v = velocities(initial);
  double t = initial.t;
  double dissipated = 0.0;
  const double E0total = linear_energy(ops, u, v) + potential_energy(ops, forcing, u);

  auto record = [&] {
    EnergyReport r;
    r.t = t;
    r.E = linear_energy(ops, u, v);
    r.Etotal = r.E + potential_energy(ops, forcing, u);
    r.dissipation_rate = dissipation_rate(ops, damping, v);
    r.cumulative_dissipation = dissipated;
    r.identity_residual = std::abs(r.Etotal + dissipated - E0total);
    traj.reports.push_back(r);
    if (options.keep_states) traj.states.push_back(unpack(ops, u, v, t, static_cast<StateT*>(nullptr)));
  };
  record();

  const long steps = T > 0.0 ? static_cast<long>(std::ceil(T / cfg.dt - 1e-9)) : 0;
  if (steps == 0) return traj;
  MidpointStepper stepper(ops, forcing, damping, cfg);
  for (long s = 1; s <= steps; ++s) {
    try {
      dissipated += stepper.advance(u, v);
    } catch (const StepFailure& e) {
      traj.failed = true;
      std::ostringstream os;
      os << "step " << s << " at t = " << t << ": " << e.what();
      traj.failure = os.str();
      break;
    }
    t = initial.t + static_cast<double>(s) * cfg.dt;
    traj.steps = static_cast<int>(s);
    if (!u.allFinite() || !v.allFinite()) {
      traj.failed = true;
      traj.failure = "non-finite state at t = " + std::to_string(t);
      break;
    }
    if (s % options.stride == 0 || s == steps) record();
  }
  return traj;
}

}  // namespace

Trajectory simulate(const State& initial, double T, const DiscreteOperators& ops,
                    const ForcingModel& forcing, const DampingModel& damping,
                    const StepperConfig& cfg, const SimulateOptions& options) {
  if (ops.fields != 3) throw ConfigError("simulate() needs Bresse operators");
  return run(initial, T, ops, forcing, damping, cfg, options);
}

TimoshenkoTrajectory timoshenko_simulate(const TimoshenkoState& initial, double T,
                                         const DiscreteOperators& ops, const ForcingModel& forcing,
                                         const DampingModel& damping, const StepperConfig& cfg,
                                         const SimulateOptions& options) {
  if (ops.fields != 2) throw ConfigError("timoshenko_simulate() needs Timoshenko operators");
  if (!forcing.timoshenko_compatible()) {
    throw ConfigError("forcing '" + forcing.name +
                      "' violates the Timoshenko compatibility condition: f1 and f2 must not depend on w");
  }
  return run(initial, T, ops, forcing, damping, cfg, options);
}

int coercivity_violations(const std::vector<EnergyReport>& reports, double beta0, double L, double mF) {
  int count = 0;
  for (const auto& r : reports) {
    const double bound = beta0 * r.E - L * mF;
    if (r.Etotal < bound - 1e-12 * std::max(1.0, std::abs(bound))) ++count;
  }
  return count;
}

ValidationReport discretization_checks(const BeamParams& params, const Grid& grid, std::uint64_t seed) {
  ValidationReport report;
  const DiscreteOperators ops = assemble(params, grid);
  const int n = grid.n;
  auto add = [&](std::string name, bool passed, double worst, std::string detail) {
    HypothesisCheck c;
    c.name = std::move(name);
    c.passed = passed;
    c.worst_value = worst;
    c.detail = std::move(detail);
    report.checks.push_back(std::move(c));
  };

  const SparseMatrix asym = ops.stiffness - SparseMatrix(ops.stiffness.transpose());
  const double kmax = Eigen::MatrixXd(ops.stiffness).cwiseAbs().maxCoeff();
  const double amax = asym.nonZeros() ? Eigen::MatrixXd(asym).cwiseAbs().maxCoeff() : 0.0;
  add("stiffness_symmetry", amax <= 1e-12 * kmax, amax / kmax, "max |K - K^T| / max |K|");

  Eigen::SimplicialLDLT<SparseMatrix> ldlt(ops.stiffness);
  const bool factored = ldlt.info() == Eigen::Success;
  const double dmin = factored ? ldlt.vectorD().minCoeff() : 0.0;
  add("stiffness_positive", factored && dmin > 0.0, dmin, "smallest LDL^T pivot");

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  Vector u(ops.dofs());
  for (int i = 0; i < ops.dofs(); ++i) u[i] = coef(rng);
  const Vector S = ops.shear * u, T = ops.axial * u, B = ops.bending * u;
  const double cells = grid.h * (params.b * B.squaredNorm() + params.k * S.squaredNorm() + params.k0 * T.squaredNorm());
  const double q = ops.quadratic_form(u);
  const double qerr = std::abs(q - cells) / std::max(1.0, std::abs(cells));
  add("quadratic_form", qerr <= 1e-12, qerr, "h u^T K u against the cell sums of b|psi_x|^2 + k|S|^2 + k0|T|^2");

  BeamParams flat = params;
  flat.ell = 0.0;
  const SparseMatrix kb = assemble(flat, grid).stiffness;
  const SparseMatrix kt = assemble_timoshenko(flat, grid).stiffness;
  const double terr = (Eigen::MatrixXd(kb).topLeftCorner(2 * n, 2 * n) - Eigen::MatrixXd(kt)).cwiseAbs().maxCoeff();
  add("timoshenko_block", terr <= 1e-12 * kmax, terr, "(phi, psi) block at ell = 0 against the Timoshenko stiffness");

  State s = State::zeros(n);
  for (Vector* f : {&s.phi, &s.psi, &s.w, &s.phit, &s.psit, &s.wt}) {
    for (int m = 1; m <= 4; ++m) *f += (coef(rng) / m) * sine_mode(grid, m);
  }
  StepperConfig cfg;
  cfg.dt = default_dt(ops);
  const Trajectory traj = simulate(s, 200 * cfg.dt, ops, zero_forcing(), no_damping(), cfg, {.stride = 10});
  double drift = traj.failed ? std::numeric_limits<double>::infinity() : 0.0;
  for (const auto& r : traj.reports) {
    drift = std::max(drift, std::abs(r.E - traj.reports.front().E) / traj.reports.front().E);
  }
  add("energy_conservation", drift <= 1e-10, drift, "relative energy drift over 200 undamped linear steps");
  return report;
}

}  // namespace bresse
