#include "bresse/dynamics_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "bresse/parallel.hpp"

namespace bresse {

namespace {

constexpr double kPi = std::numbers::pi;

struct LinearFit {
  double amplitude = 0.0;
  double floor = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

// Best (amplitude, floor) >= 0 for a fixed rate.
LinearFit fit_fixed_rate(const std::vector<double>& tau, const std::vector<double>& e, double alpha) {
  const std::size_t N = tau.size();
  Eigen::VectorXd x(N), y(N);
  for (std::size_t i = 0; i < N; ++i) {
    x[static_cast<Eigen::Index>(i)] = std::exp(-alpha * tau[i]);
    y[static_cast<Eigen::Index>(i)] = e[i];
  }
  auto sse = [&](double a, double c) { return (y - a * x - Eigen::VectorXd::Constant(static_cast<Eigen::Index>(N), c)).squaredNorm(); };

  LinearFit best;
  auto consider = [&](double a, double c) {
    if (!(a >= 0.0) || !(c >= 0.0)) return;
    const double s = sse(a, c);
    if (s < best.sse) best = {a, c, s};
  };
  consider(0.0, 0.0);
  consider(0.0, std::max(0.0, y.mean()));
  if (alpha > 0.0) {
    const double xx = x.squaredNorm();
    if (xx > 0.0) consider(std::max(0.0, x.dot(y) / xx), 0.0);
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(N), 2);
    basis.col(0) = x;
    basis.col(1).setOnes();
    const Eigen::Vector2d coef = basis.colPivHouseholderQr().solve(y);
    if (coef.allFinite()) consider(coef[0], coef[1]);
  }
  return best;
}

DecayFit fit_core(const std::vector<double>& t, const std::vector<double>& e, bool with_tail) {
  const std::size_t N = t.size();
  std::vector<double> tau(N);
  for (std::size_t i = 0; i < N; ++i) tau[i] = t[i] - t[0];

  DecayFit out;
  const double scale = std::max(std::abs(*std::max_element(e.begin(), e.end())),
                                std::abs(*std::min_element(e.begin(), e.end())));
  if (scale == 0.0) {
    out.degenerate = true;
    out.tail_stable = true;
    return out;
  }
  const double range = *std::max_element(e.begin(), e.end()) - *std::min_element(e.begin(), e.end());
  if (range <= 1e-8 * scale) {
    // No measurable change over the window: pure floor.
    const LinearFit f = fit_fixed_rate(tau, e, 0.0);
    out.floor = f.floor;
    out.rmse = std::sqrt(f.sse / static_cast<double>(N));
    out.tail_stable = true;
    return out;
  }

  const double span = tau.back();
  const double first = tau[1];
  const double lo = std::log(1e-3 / span), hi = std::log(50.0 / first);
  const int grid = 200;
  double best_la = lo;
  double best_sse = std::numeric_limits<double>::infinity();
  int best_k = 0;
  for (int k = 0; k <= grid; ++k) {
    const double la = lo + (hi - lo) * k / grid;
    const double s = fit_fixed_rate(tau, e, std::exp(la)).sse;
    if (s < best_sse) {
      best_sse = s;
      best_la = la;
      best_k = k;
    }
  }
  // Golden-section refinement in log alpha around the best grid point.
  double a = lo + (hi - lo) * std::max(0, best_k - 1) / grid;
  double b = lo + (hi - lo) * std::min(grid, best_k + 1) / grid;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fit_fixed_rate(tau, e, std::exp(c)).sse;
  double fd = fit_fixed_rate(tau, e, std::exp(d)).sse;
  for (int it = 0; it < 200 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = fit_fixed_rate(tau, e, std::exp(c)).sse;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = fit_fixed_rate(tau, e, std::exp(d)).sse;
    }
  }
  const double la = fc < fd ? c : d;
  if (std::min(fc, fd) < best_sse) best_la = la;

  double alpha = std::exp(best_la);
  LinearFit f = fit_fixed_rate(tau, e, alpha);
  const LinearFit flat = fit_fixed_rate(tau, e, 0.0);
  if (flat.sse <= f.sse || f.amplitude == 0.0) {
    f = flat;
    alpha = 0.0;
  }
  out.alpha = alpha;
  out.amplitude = f.amplitude;
  out.floor = f.floor;
  out.gamma = e.front() > 0.0 ? f.amplitude / e.front() : 0.0;
  out.rmse = std::sqrt(f.sse / static_cast<double>(N));

  if (with_tail) {
    std::vector<double> tt, te;
    for (std::size_t i = 0; i < N; ++i) {
      if (tau[i] >= 0.5 * span) {
        tt.push_back(t[i]);
        te.push_back(e[i]);
      }
    }
    if (tt.size() >= 20) {
      out.tail_alpha = fit_core(tt, te, false).alpha;
      out.tail_stable = std::abs(out.tail_alpha - out.alpha) <= 0.2 * out.alpha;
    }
  }
  return out;
}

double ell_cap(const BeamParams& p) { return kPi / (2.0 * p.L); }

void check_sweep(const BeamParams& p, const std::vector<double>& ells) {
  if (ells.empty()) throw ConfigError("ell list is empty");
  for (double ell : ells) {
    if (!(ell >= 0.0) || ell > 0.9 * ell_cap(p)) {
      std::ostringstream os;
      os << "ell = " << ell << " outside the sweep range [0, 0.9 x uniform-regime cap pi/(2L) = "
         << 0.9 * ell_cap(p) << "]";
      throw ConfigError(os.str());
    }
  }
}

StepperConfig resolve(const LabSettings& s, const DiscreteOperators& ops) {
  StepperConfig c = s.stepper;
  if (c.dt == 0.0) c.dt = default_dt(ops);
  c.validate();
  return c;
}

BeamParams with_ell(BeamParams p, double ell) {
  p.ell = ell;
  return p;
}

double displacement_2p(const Grid& g, const State& d, double p) {
  double sum = 0.0;
  for (const Vector* f : {&d.phi, &d.psi, &d.w}) sum += std::pow(lq_norm(g, *f, 2.0 * p), 2);
  return sum;
}

State difference(const State& a, const State& b) {
  State d = a;
  d.phi -= b.phi;
  d.psi -= b.psi;
  d.w -= b.w;
  d.phit -= b.phit;
  d.psit -= b.psit;
  d.wt -= b.wt;
  return d;
}

}  // namespace

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& energy) {
  if (t.size() != energy.size()) throw ConfigError("decay fit: time and energy lengths differ");
  if (t.size() < 20) throw ConfigError("decay fit needs at least 20 samples");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(energy[i])) throw ConfigError("decay fit: non-finite sample");
    if (i > 0 && !(t[i] > t[i - 1])) throw ConfigError("decay fit: times must be strictly increasing");
  }
  return fit_core(t, energy, true);
}

std::vector<State> random_ensemble(const DiscreteOperators& ops, int count, double energy, std::uint64_t seed) {
  if (count < 1) throw ConfigError("ensemble needs at least one member");
  if (!(energy > 0.0)) throw ConfigError("ensemble energy must be positive");
  const Grid& g = ops.grid;
  std::vector<State> out;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    State s = State::zeros(g.n);
    for (Vector* f : {&s.phi, &s.psi, &s.w, &s.phit, &s.psit, &s.wt}) {
      for (int m = 1; m <= 4; ++m) *f += (coef(rng) / m) * sine_mode(g, m);
    }
    if (ops.fields == 2) {
      s.w.setZero();
      s.wt.setZero();
    }
    const Vector u = ops.fields == 2 ? stack(s.phi, s.psi) : displacements(s);
    const Vector v = ops.fields == 2 ? stack(s.phit, s.psit) : velocities(s);
    const double scale = std::sqrt(energy / linear_energy(ops, u, v));
    for (Vector* f : {&s.phi, &s.psi, &s.w, &s.phit, &s.psit, &s.wt}) *f *= scale;
    out.push_back(std::move(s));
  }
  return out;
}

AbsorptionReport absorbing_radius(const BeamParams& params, const ForcingModel& forcing,
                                  const DampingModel& damping, const std::vector<double>& ells,
                                  const std::vector<State>& ensemble, double T, const LabSettings& settings,
                                  double window) {
  check_sweep(params, ells);
  if (ensemble.empty()) throw ConfigError("absorbing radius needs a nonempty ensemble");
  if (!(T > 0.0)) throw ConfigError("absorbing radius needs T > 0");
  if (!(window > 0.0 && window <= 1.0)) throw ConfigError("final window fraction must lie in (0, 1]");

  const Grid grid = make_grid(params.L, ensemble.front().size());
  std::vector<DiscreteOperators> ops;
  for (double ell : ells) ops.push_back(assemble(with_ell(params, ell), grid));

  const std::size_t members = ensemble.size();
  struct Result {
    double radius = 0.0, level = 0.0;
    DecayFit fit;
    std::string failure;
  };
  std::vector<Result> results(ells.size() * members);
  parallel_for(results.size(), settings.workers, [&](std::size_t job) {
    const std::size_t li = job / members, m = job % members;
    const DiscreteOperators& o = ops[li];
    State start = ensemble[m];
    start.t = 0.0;
    const Trajectory traj = simulate(start, T, o, forcing, damping, resolve(settings, o),
                                     {.stride = std::max(1, settings.stride), .keep_states = true});
    Result& r = results[job];
    if (traj.failed) {
      r.failure = "member " + std::to_string(m) + ": " + traj.failure;
      return;
    }
    const double shift = params.L * forcing.mF;
    std::vector<double> ts, es;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const double t = traj.reports[i].t;
      ts.push_back(t);
      es.push_back(traj.reports[i].Etotal + shift);
      if (t >= (1.0 - window) * T - 1e-12) {
        r.radius = std::max(r.radius, discrete_norm_Hl(o, traj.states[i]));
        r.level = std::max(r.level, es.back());
      }
    }
    r.fit = fit_decay(ts, es);
  });

  AbsorptionReport report;
  double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
  for (std::size_t li = 0; li < ells.size(); ++li) {
    AbsorptionEntry e;
    e.ell = ells[li];
    e.min_alpha = std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < members; ++m) {
      const Result& r = results[li * members + m];
      if (!r.failure.empty()) {
        e.failures.push_back(r.failure);
        continue;
      }
      e.member_radius.push_back(r.radius);
      e.fits.push_back(r.fit);
      e.radius = std::max(e.radius, r.radius);
      e.energy_level = std::max(e.energy_level, r.level);
      e.min_alpha = std::min(e.min_alpha, r.fit.alpha);
    }
    if (e.fits.empty()) e.min_alpha = 0.0;
    e.level_surrogate = 0.5 * e.radius * e.radius + params.L * forcing.mF;
    lo = std::min(lo, e.radius);
    hi = std::max(hi, e.radius);
    report.entries.push_back(std::move(e));
  }
  report.uniform_radius = hi;
  report.spread = hi > 0.0 ? (hi - lo) / hi : 0.0;
  report.uniform = report.spread <= 0.25;
  return report;
}

QuasistabilityReport quasistability_probe(const BeamParams& params, const ForcingModel& forcing,
                                          const DampingModel& damping,
                                          const std::vector<std::pair<State, State>>& pairs, double T,
                                          const LabSettings& settings) {
  if (!damping.globally_lipschitz) {
    throw ConfigError("quasistability probe requires globally Lipschitz damping (damping '" + damping.name + "')");
  }
  if (pairs.empty()) throw ConfigError("quasistability probe needs at least one pair");
  if (!(T > 0.0)) throw ConfigError("quasistability probe needs T > 0");
  const Grid grid = make_grid(params.L, pairs.front().first.size());
  const DiscreteOperators ops = assemble(params, grid);
  const StepperConfig cfg = resolve(settings, ops);
  const SimulateOptions opts{.stride = std::max(1, settings.stride), .keep_states = true};

  QuasistabilityReport report;
  report.pairs.resize(pairs.size());
  parallel_for(pairs.size(), settings.workers, [&](std::size_t k) {
    State a = pairs[k].first, b = pairs[k].second;
    a.t = b.t = 0.0;
    const Trajectory ta = simulate(a, T, ops, forcing, damping, cfg, opts);
    const Trajectory tb = simulate(b, T, ops, forcing, damping, cfg, opts);
    if (ta.failed || tb.failed) throw NumericalError("quasistability pair " + std::to_string(k) + ": " + ta.failure + tb.failure);

    PairProbe& p = report.pairs[k];
    double running = 0.0;
    for (std::size_t i = 0; i < ta.states.size(); ++i) {
      const State d = difference(ta.states[i], tb.states[i]);
      running = std::max(running, displacement_2p(grid, d, forcing.p));
      p.t.push_back(ta.states[i].t);
      p.energy.push_back(linear_energy(ops, displacements(d), velocities(d)));
      p.compensator.push_back(running);
    }
    const double E0 = p.energy.front();
    p.fit = fit_decay(p.t, p.energy);
    p.alpha_B = p.fit.alpha;
    p.gamma_B = std::max(1.0, 2.0 * p.fit.gamma);
    auto envelope = [&](std::size_t i) { return p.gamma_B * E0 * std::exp(-p.alpha_B * p.t[i]); };
    for (std::size_t i = 0; i < p.t.size(); ++i) {
      const double excess = p.energy[i] - envelope(i);
      if (excess > 0.0 && p.compensator[i] > 0.0) p.C_B = std::max(p.C_B, excess / p.compensator[i]);
    }
    p.max_violation = -std::numeric_limits<double>::infinity();
    double scale = 0.0;
    for (std::size_t i = 0; i < p.t.size(); ++i) {
      p.max_violation = std::max(p.max_violation, p.energy[i] - envelope(i) - p.C_B * p.compensator[i]);
      scale = std::max(scale, p.energy[i]);
    }
    p.feasible = p.max_violation <= 1e-12 * scale;
    std::vector<double> compensated(p.t.size());
    for (std::size_t i = 0; i < p.t.size(); ++i) compensated[i] = p.energy[i] - p.C_B * p.compensator[i];
    p.compensated_fit = fit_decay(p.t, compensated);
  });
  report.feasible = true;
  report.max_violation = -std::numeric_limits<double>::infinity();
  for (const auto& p : report.pairs) {
    report.feasible = report.feasible && p.feasible;
    report.max_violation = std::max(report.max_violation, p.max_violation);
  }
  return report;
}

SingularLimitReport singular_limit_experiment(const BeamParams& params, const ForcingModel& forcing,
                                              const DampingModel& damping, const std::vector<double>& ells,
                                              const State& initial, double T, const LabSettings& settings) {
  check_sweep(params, ells);
  if (!forcing.timoshenko_compatible()) {
    throw ConfigError("forcing '" + forcing.name +
                      "' violates the Timoshenko compatibility condition: f1 and f2 must not depend on w");
  }
  if (!(T >= 0.0)) throw ConfigError("singular limit needs T >= 0");
  const Grid grid = make_grid(params.L, initial.size());
  const DiscreteOperators timo = assemble_timoshenko(params, grid);
  const StepperConfig cfg = resolve(settings, assemble(with_ell(params, 0.0), grid));

  State start = initial;
  start.t = 0.0;
  const TimoshenkoTrajectory ref = timoshenko_simulate(project(start), T, timo, forcing, damping, cfg);
  if (ref.failed) throw NumericalError("Timoshenko reference run failed: " + ref.failure);

  SingularLimitReport report;
  report.dt = cfg.dt;
  report.rows.resize(ells.size());
  parallel_for(ells.size(), settings.workers, [&](std::size_t k) {
    const DiscreteOperators ops = assemble(with_ell(params, ells[k]), grid);
    const Trajectory traj = simulate(start, T, ops, forcing, damping, cfg);
    if (traj.failed) throw NumericalError("Bresse run at ell = " + std::to_string(ells[k]) + " failed: " + traj.failure);
    SingularLimitRow& row = report.rows[k];
    row.ell = ells[k];
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      TimoshenkoState d = project(traj.states[i]);
      const TimoshenkoState& z = ref.states[i];
      d.phi -= z.phi;
      d.psi -= z.psi;
      d.phit -= z.phit;
      d.psit -= z.psit;
      row.error = std::max(row.error, discrete_norm_H0(grid, d));
      const State& s = traj.states[i];
      row.w_sup = std::max(row.w_sup, std::sqrt(std::pow(h1_seminorm(grid, s.w), 2) + grid.h * s.wt.squaredNorm()));
    }
  });
  report.strictly_decreasing = true;
  for (std::size_t i = 0; i + 1 < report.rows.size(); ++i) {
    const auto& a = report.rows[i];
    const auto& b = report.rows[i + 1];
    report.strictly_decreasing = report.strictly_decreasing && b.error < a.error;
    if (a.error > 0.0 && b.error > 0.0 && a.ell > 0.0 && b.ell > 0.0 && a.ell != b.ell) {
      report.rates.push_back(std::log2(a.error / b.error) / std::log2(a.ell / b.ell));
    }
  }
  return report;
}

Vector phase_embedding(const State& s, const Grid& grid, PhaseNorm norm) {
  const int n = grid.n;
  const int fields = norm == PhaseNorm::H ? 3 : 2;
  Vector out(fields * (n + 1) + fields * n);
  const double inv = 1.0 / std::sqrt(grid.h), root = std::sqrt(grid.h);
  const Vector* disp[3] = {&s.phi, &s.psi, &s.w};
  const Vector* vel[3] = {&s.phit, &s.psit, &s.wt};
  Eigen::Index k = 0;
  for (int f = 0; f < fields; ++f) {
    const Vector& u = *disp[f];
    for (int c = 0; c <= n; ++c) {
      const double right = c < n ? u[c] : 0.0;
      const double left = c > 0 ? u[c - 1] : 0.0;
      out[k++] = (right - left) * inv;
    }
  }
  for (int f = 0; f < fields; ++f) {
    for (int j = 0; j < n; ++j) out[k++] = (*vel[f])[j] * root;
  }
  return out;
}

double hausdorff_semidistance(const std::vector<State>& A, const std::vector<State>& B, const Grid& grid,
                              PhaseNorm norm) {
  if (A.empty() || B.empty()) throw ConfigError("semidistance needs nonempty sets");
  const Vector probe = phase_embedding(B.front(), grid, norm);
  Eigen::MatrixXd EB(probe.size(), static_cast<Eigen::Index>(B.size()));
  for (std::size_t j = 0; j < B.size(); ++j) EB.col(static_cast<Eigen::Index>(j)) = phase_embedding(B[j], grid, norm);
  double worst = 0.0;
  for (const State& a : A) {
    const Vector ea = phase_embedding(a, grid, norm);
    const double nearest = (EB.colwise() - ea).colwise().squaredNorm().minCoeff();
    worst = std::max(worst, nearest);
  }
  return std::sqrt(worst);
}

AttractorSample harvest_attractor(const DiscreteOperators& ops, const ForcingModel& forcing,
                                  const DampingModel& damping, const std::vector<State>& ensemble,
                                  double t_transient, double t_harvest, double stride, bool symmetrize,
                                  const LabSettings& settings) {
  if (ensemble.empty()) throw ConfigError("harvest needs a nonempty ensemble");
  if (!(t_transient >= 0.0) || !(t_harvest >= 0.0) || !(stride > 0.0)) {
    throw ConfigError("harvest needs t_transient >= 0, t_harvest >= 0, stride > 0");
  }
  const StepperConfig cfg = resolve(settings, ops);
  const int every = std::max(1, static_cast<int>(std::lround(stride / cfg.dt)));
  const double T = t_transient + t_harvest;
  const SimulateOptions opts{.stride = every, .keep_states = true};

  std::vector<std::vector<State>> harvested(ensemble.size());
  parallel_for(ensemble.size(), settings.workers, [&](std::size_t m) {
    State start = ensemble[m];
    start.t = 0.0;
    std::vector<State> states;
    if (ops.fields == 2) {
      const TimoshenkoTrajectory traj = timoshenko_simulate(project(start), T, ops, forcing, damping, cfg, opts);
      if (traj.failed) throw NumericalError("harvest member " + std::to_string(m) + ": " + traj.failure);
      for (const auto& z : traj.states) states.push_back(lift(z));
    } else {
      const Trajectory traj = simulate(start, T, ops, forcing, damping, cfg, opts);
      if (traj.failed) throw NumericalError("harvest member " + std::to_string(m) + ": " + traj.failure);
      states = traj.states;
    }
    for (const State& s : states) {
      if (s.t >= t_transient - 1e-9) harvested[m].push_back(s);
    }
  });

  AttractorSample sample;
  sample.params = ops.params;
  sample.timoshenko = ops.fields == 2;
  sample.t_transient = t_transient;
  sample.t_harvest = t_harvest;
  sample.stride = every * cfg.dt;
  const Grid& g = ops.grid;
  for (const auto& member : harvested) {
    for (const State& s : member) {
      const Vector u = ops.fields == 2 ? stack(s.phi, s.psi) : displacements(s);
      const Vector v = ops.fields == 2 ? stack(s.phit, s.psit) : velocities(s);
      const int n = g.n;
      double dxx = 0.0, vdx = 0.0;
      for (int f = 0; f < ops.fields; ++f) {
        dxx += std::pow(l2_norm(g, ops.Dxx * u.segment(f * n, n)), 2);
        vdx += std::pow(h1_seminorm(g, v.segment(f * n, n)), 2);
      }
      RegularityProxy& r = sample.regularity;
      r.max_dxx = std::max(r.max_dxx, std::sqrt(dxx));
      r.max_velocity_dx = std::max(r.max_velocity_dx, std::sqrt(vdx));
      r.max_acceleration = std::max(r.max_acceleration, l2_norm(g, acceleration(ops, forcing, damping, u, v)));

      sample.states.push_back(s);
      if (symmetrize) {
        State minus = s;
        for (Vector* f : {&minus.phi, &minus.psi, &minus.w, &minus.phit, &minus.psit, &minus.wt}) *f = -*f;
        sample.states.push_back(minus);
      }
    }
  }
  return sample;
}

SemicontinuityReport upper_semicontinuity_experiment(const BeamParams& params, const ForcingModel& forcing,
                                                     const DampingModel& damping, const std::vector<double>& ells,
                                                     int n, const SamplingProtocol& protocol,
                                                     const LabSettings& settings) {
  check_sweep(params, ells);
  if (!forcing.timoshenko_compatible()) {
    throw ConfigError("forcing '" + forcing.name +
                      "' violates the Timoshenko compatibility condition: f1 and f2 must not depend on w");
  }
  if (!damping.globally_lipschitz) {
    throw ConfigError("semicontinuity experiment requires globally Lipschitz damping (damping '" + damping.name + "')");
  }
  if (protocol.members < 1) throw ConfigError("sampling protocol needs at least one member");
  if (!(protocol.rel_tolerance > 0.0)) throw ConfigError("harvest tolerance must be positive");

  const Grid grid = make_grid(params.L, n);
  const DiscreteOperators timo = assemble_timoshenko(params, grid);
  const std::vector<State> ensemble =
      random_ensemble(assemble(with_ell(params, 0.0), grid), protocol.members, protocol.energy, protocol.seed);

  SemicontinuityReport report;
  for (const State& s : ensemble) report.initial_radius = std::max(report.initial_radius, discrete_norm_H(grid, s));
  report.tolerance = protocol.rel_tolerance * report.initial_radius;

  // Pilot decay rate from the Timoshenko run of the first member.
  {
    const StepperConfig cfg = resolve(settings, timo);
    const TimoshenkoTrajectory pilot = timoshenko_simulate(project(ensemble.front()), protocol.pilot_T, timo, forcing,
                                                           damping, cfg, {.stride = std::max(1, settings.stride)});
    if (pilot.failed) throw NumericalError("pilot run failed: " + pilot.failure);
    std::vector<double> ts, es;
    for (const auto& r : pilot.reports) {
      ts.push_back(r.t);
      es.push_back(r.Etotal + params.L * forcing.mF);
    }
    report.alpha = fit_decay(ts, es).alpha;
    if (!(report.alpha > 0.0)) throw NumericalError("pilot run shows no energy decay; cannot set the sampling time scale");
  }
  report.t_transient = protocol.transient > 0.0 ? protocol.transient : 10.0 / report.alpha;
  report.t_harvest = protocol.harvest > 0.0 ? protocol.harvest : 10.0 / report.alpha;
  report.stride = protocol.stride > 0.0 ? protocol.stride : 0.1 / report.alpha;

  auto harvest = [&](const DiscreteOperators& ops) {
    return harvest_attractor(ops, forcing, damping, ensemble, report.t_transient, report.t_harvest, report.stride,
                             protocol.symmetrize, settings);
  };
  const AttractorSample reference = harvest(timo);
  report.reference_size = reference.states.size();
  report.reference_regularity = reference.regularity;
  for (double ell : ells) {
    const AttractorSample sample = harvest(assemble(with_ell(params, ell), grid));
    SemicontinuityRow row;
    row.ell = ell;
    row.sample_size = sample.states.size();
    row.semidistance = hausdorff_semidistance(sample.states, reference.states, grid, PhaseNorm::H0);
    report.rows.push_back(row);
    report.regularity.push_back(sample.regularity);
  }
  report.nonincreasing = true;
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    const double d = report.rows[i].semidistance;
    const bool ok = d <= 1.2 * report.rows[i - 1].semidistance || d <= report.tolerance;
    report.nonincreasing = report.nonincreasing && ok;
  }
  return report;
}

}  // namespace bresse
