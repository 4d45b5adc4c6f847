#include <cmath>
#include <random>

#include "doctest.h"
#include "test_support.hpp"

#include "bresse/dynamics_lab.hpp"

using namespace bresse;

namespace {

constexpr double pi = std::numbers::pi;
const double cap = pi / (2.0 * pi);  // pi/(2L) at L = pi

std::vector<double> linspace(double a, double b, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) out.push_back(a + (b - a) * i / (count - 1));
  return out;
}

State negate(State s) {
  for (Vector* f : {&s.phi, &s.psi, &s.w, &s.phit, &s.psit, &s.wt}) *f = -*f;
  return s;
}

// Quadratic-scan oracle: distance of each pair via the norm of the difference.
double oracle_semidistance(const std::vector<State>& A, const std::vector<State>& B, const Grid& g, bool h0) {
  double sup = 0.0;
  for (const State& a : A) {
    double inf = std::numeric_limits<double>::infinity();
    for (const State& b : B) {
      State d = a;
      d.phi -= b.phi;
      d.psi -= b.psi;
      d.w -= b.w;
      d.phit -= b.phit;
      d.psit -= b.psit;
      d.wt -= b.wt;
      inf = std::min(inf, h0 ? discrete_norm_H0(g, project(d)) : discrete_norm_H(g, d));
    }
    sup = std::max(sup, inf);
  }
  return sup;
}

}  // namespace

TEST_CASE("fit_decay recovers its own model class") {
  const std::vector<double> t = linspace(0.0, 5.0, 101);
  std::vector<double> e;
  for (double s : t) e.push_back(2.0 * std::exp(-3.0 * s) + 0.1);
  const DecayFit f = fit_decay(t, e);
  CHECK(f.amplitude == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(f.alpha == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(f.floor == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(f.gamma == doctest::Approx(2.0 / 2.1).epsilon(1e-6));
  CHECK(f.rmse <= 1e-9);
  CHECK(f.tail_stable);
  CHECK_FALSE(f.degenerate);

  SUBCASE("random parameters, shifted time origin") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> amp(0.1, 10.0), rate(0.2, 5.0), fl(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
      const double A = amp(rng), a = rate(rng), c = fl(rng);
      const std::vector<double> ts = linspace(3.0, 3.0 + 8.0 / a, 80);
      std::vector<double> es;
      for (double s : ts) es.push_back(A * std::exp(-a * (s - 3.0)) + c);
      const DecayFit g = fit_decay(ts, es);
      CHECK(g.alpha == doctest::Approx(a).epsilon(1e-6));
      CHECK(g.amplitude == doctest::Approx(A).epsilon(1e-6));
      CHECK(std::abs(g.floor - c) <= 1e-6 * (A + c));
    }
  }
}

TEST_CASE("fit_decay constraints and degenerate series") {
  const std::vector<double> t = linspace(0.0, 1.0, 30);
  SUBCASE("zero series") {
    const DecayFit f = fit_decay(t, std::vector<double>(30, 0.0));
    CHECK(f.degenerate);
    CHECK(f.alpha == 0.0);
    CHECK(f.floor == 0.0);
  }
  SUBCASE("growing series stays nonnegative") {
    std::vector<double> e;
    for (double s : t) e.push_back(std::exp(s));
    const DecayFit f = fit_decay(t, e);
    CHECK(f.alpha >= 0.0);
    CHECK(f.floor >= 0.0);
    CHECK(f.amplitude >= 0.0);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(fit_decay(linspace(0, 1, 19), std::vector<double>(19, 1.0)), ConfigError);
    std::vector<double> bad = t;
    bad[10] = bad[9];
    CHECK_THROWS_AS(fit_decay(bad, std::vector<double>(30, 1.0)), ConfigError);
    CHECK_THROWS_AS(fit_decay(t, std::vector<double>(29, 1.0)), ConfigError);
  }
}

TEST_CASE("fit_decay on a conservative linear run") {
  const Grid g = make_grid(pi, 32);
  BeamParams p;
  p.ell = 0.2;
  const DiscreteOperators ops = assemble(p, g);
  const State s = random_ensemble(ops, 1, 1.0, 3).front();
  StepperConfig cfg;
  cfg.dt = default_dt(ops);
  const Trajectory traj = simulate(s, 10.0, ops, zero_forcing(), no_damping(), cfg, {.stride = 4});
  std::vector<double> t, e;
  for (const auto& r : traj.reports) {
    t.push_back(r.t);
    e.push_back(r.Etotal);
  }
  const DecayFit f = fit_decay(t, e);
  CHECK(f.alpha <= 1e-8);
  CHECK(f.floor == doctest::Approx(e.front()).epsilon(1e-8));
}

TEST_CASE("random ensemble") {
  const Grid g = make_grid(pi, 20);
  const DiscreteOperators ops = assemble(BeamParams{}, g);
  const auto a = random_ensemble(ops, 4, 3.0, 9);
  const auto b = random_ensemble(ops, 4, 3.0, 9);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(linear_energy(ops, displacements(a[i]), velocities(a[i])) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK((a[i].phi - b[i].phi).norm() == 0.0);
  }
  CHECK((a[0].phi - a[1].phi).norm() > 0.0);
  const DiscreteOperators timo = assemble_timoshenko(BeamParams{}, g);
  for (const State& s : random_ensemble(timo, 2, 1.0, 9)) CHECK(s.w.norm() == 0.0);
}

TEST_CASE("absorbing radius") {
  const BeamParams p;
  const Grid g = make_grid(p.L, 24);
  const DiscreteOperators ops = assemble(p, g);
  LabSettings settings;
  settings.stride = 5;

  SUBCASE("origin attracts in the linear damped case") {
    const auto ens = random_ensemble(ops, 3, 2.0, 1);
    const AbsorptionReport r = absorbing_radius(p, zero_forcing(), linear_damping(1.0), {0.1}, ens, 40.0, settings);
    CHECK(r.entries[0].radius <= 1e-3 * std::sqrt(2.0 * 2.0));
    CHECK(r.entries[0].failures.empty());
  }
  SUBCASE("builtin forcing: uniform in ell, positive decay, floor under the level") {
    const auto ens = random_ensemble(ops, 4, 5.0, 2);
    const ForcingModel f = builtin_forcing(0, 0);
    const AbsorptionReport r =
        absorbing_radius(p, f, linear_damping(1.0), {0.01 * cap, 0.1 * cap, 0.4 * cap}, ens, 40.0, settings);
    CHECK(r.uniform);
    CHECK(r.spread <= 0.25);
    for (const auto& e : r.entries) {
      CHECK(e.radius > 0.0);
      CHECK(e.min_alpha > 0.0);
      for (const auto& fit : e.fits) CHECK(fit.floor <= e.level_surrogate);
      CHECK(e.level_surrogate == doctest::Approx(0.5 * e.radius * e.radius + p.L * f.mF));
    }
    settings.workers = 3;
    const AbsorptionReport again =
        absorbing_radius(p, f, linear_damping(1.0), {0.01 * cap, 0.1 * cap, 0.4 * cap}, ens, 40.0, settings);
    for (std::size_t i = 0; i < r.entries.size(); ++i) CHECK(again.entries[i].radius == r.entries[i].radius);
  }
  SUBCASE("absorbing, not just bounded: initial energies 1, 10, 100") {
    std::vector<double> radii;
    for (double energy : {1.0, 10.0, 100.0}) {
      const auto ens = random_ensemble(ops, 3, energy, 4);
      radii.push_back(
          absorbing_radius(p, builtin_forcing(0, 0), linear_damping(1.0), {0.1}, ens, 40.0, settings).uniform_radius);
    }
    const auto [lo, hi] = std::minmax_element(radii.begin(), radii.end());
    CHECK((*hi - *lo) / *hi <= 0.10);
  }
  SUBCASE("stronger damping, smaller ball") {
    const auto ens = random_ensemble(ops, 3, 5.0, 6);
    std::vector<double> radii;
    for (double a : {0.5, 1.0, 2.0}) {
      radii.push_back(
          absorbing_radius(p, builtin_forcing(0, 0), linear_damping(a), {0.1}, ens, 40.0, settings).uniform_radius);
    }
    CHECK(radii[1] <= 1.1 * radii[0]);
    CHECK(radii[2] <= 1.1 * radii[1]);
  }
  SUBCASE("sweep outside the uniform regime is rejected") {
    const auto ens = random_ensemble(ops, 1, 1.0, 1);
    CHECK_THROWS_AS(absorbing_radius(p, zero_forcing(), linear_damping(1.0), {0.95 * cap}, ens, 1.0, settings),
                    ConfigError);
  }
}

TEST_CASE("quasistability probe") {
  const BeamParams p;
  const Grid g = make_grid(p.L, 24);
  const DiscreteOperators ops = assemble(p, g);
  const ForcingModel f = builtin_forcing(0, 0);
  const DampingModel d = clipped_cubic_damping(1.0, 1.0, 1.0);
  LabSettings settings;
  settings.stride = 4;
  const auto base = random_ensemble(ops, 3, 2.0, 8);

  SUBCASE("identical pair") {
    const auto r = quasistability_probe(p, f, d, {{base[0], base[0]}}, 5.0, settings);
    CHECK(r.feasible);
    for (double e : r.pairs[0].energy) CHECK(e == 0.0);
    CHECK(r.pairs[0].max_violation == 0.0);
  }
  SUBCASE("velocity perturbations") {
    for (double eps : {1e-2, 1e-3}) {
      std::vector<std::pair<State, State>> pairs;
      for (const State& s : base) {
        State other = s;
        other.phit += eps * sine_mode(g, 1);
        pairs.emplace_back(s, other);
      }
      const auto r = quasistability_probe(p, f, d, pairs, 15.0, settings);
      CHECK(r.feasible);
      for (const auto& pp : r.pairs) {
        CHECK(pp.alpha_B > 0.0);
        CHECK(pp.gamma_B >= 1.0);
        CHECK(pp.C_B >= 0.0);
        CHECK(pp.compensated_fit.alpha > 0.0);
        CHECK(pp.compensator.front() == 0.0);
        for (std::size_t i = 1; i < pp.compensator.size(); ++i) CHECK(pp.compensator[i] >= pp.compensator[i - 1]);
      }
    }
  }
  SUBCASE("non-Lipschitz damping is rejected") {
    CHECK_THROWS_AS(quasistability_probe(p, f, cubic_damping(1.0, 1.0), {{base[0], base[1]}}, 1.0, settings),
                    ConfigError);
  }
}

TEST_CASE("singular limit") {
  const BeamParams p;
  const Grid g = make_grid(p.L, 32);
  const DiscreteOperators ops = assemble(p, g);
  State init = random_ensemble(ops, 1, 1.0, 11).front();
  std::vector<double> dyadic;
  for (int k = 1; k <= 6; ++k) dyadic.push_back(0.5 * std::pow(2.0, -k) * cap);

  SUBCASE("ell = 0 coincides with Timoshenko when w starts at rest") {
    State s = init;
    s.w.setZero();
    s.wt.setZero();
    const auto r = singular_limit_experiment(p, builtin_forcing(0, 0), clipped_cubic_damping(1, 1, 1), {0.0}, s, 2.0,
                                             LabSettings{});
    CHECK(r.rows[0].error <= 1e-10);
    CHECK(r.rows[0].w_sup == 0.0);
  }
  SUBCASE("linear conservative dyadic sequence decreases strictly") {
    const auto r = singular_limit_experiment(p, zero_forcing(), no_damping(), dyadic, init, 2.0, LabSettings{});
    CHECK(r.strictly_decreasing);
    CHECK(r.rows.size() == 6);
    // The w channel carries its own data and need not vanish.
    CHECK(r.rows.back().w_sup > 0.1);
  }
  SUBCASE("w-dependent forcing is a configuration error") {
    try {
      singular_limit_experiment(p, coupled_forcing(0, 0, 1), no_damping(), dyadic, init, 1.0, LabSettings{});
      FAIL("expected a configuration error");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("Timoshenko compatibility condition") != std::string::npos);
    }
  }
}

TEST_CASE("hausdorff semidistance") {
  const Grid g = make_grid(pi, 12);
  std::mt19937_64 rng(21);
  auto cloud = [&](int count) {
    std::vector<State> out;
    for (int i = 0; i < count; ++i) out.push_back(bresse::testing::random_state(g, rng));
    return out;
  };

  SUBCASE("subset gives zero") {
    const auto B = cloud(10);
    const std::vector<State> A(B.begin(), B.begin() + 4);
    CHECK(hausdorff_semidistance(A, B, g, PhaseNorm::H) == 0.0);
    CHECK(hausdorff_semidistance(A, B, g, PhaseNorm::H0) == 0.0);
  }
  SUBCASE("singletons give the norm of the difference") {
    const auto A = cloud(1), B = cloud(1);
    CHECK(hausdorff_semidistance(A, B, g, PhaseNorm::H) ==
          doctest::Approx(oracle_semidistance(A, B, g, false)).epsilon(1e-12));
  }
  SUBCASE("asymmetric witness") {
    const State x = State::zeros(g.n);
    State y = x;
    y.phi = sine_mode(g, 1);
    const std::vector<State> A{x}, B{x, y};
    CHECK(hausdorff_semidistance(A, B, g, PhaseNorm::H) == 0.0);
    CHECK(hausdorff_semidistance(B, A, g, PhaseNorm::H) > 0.1);
  }
  SUBCASE("H0 ignores the w channel") {
    const auto A = cloud(3);
    std::vector<State> B = A;
    for (State& s : B) {
      s.w *= 3.0;
      s.wt.setZero();
    }
    CHECK(hausdorff_semidistance(A, B, g, PhaseNorm::H0) == 0.0);
    CHECK(hausdorff_semidistance(A, B, g, PhaseNorm::H) > 0.0);
  }
  SUBCASE("100-point clouds against the quadratic scan") {
    const auto A = cloud(100), B = cloud(100);
    for (bool h0 : {false, true}) {
      const double got = hausdorff_semidistance(A, B, g, h0 ? PhaseNorm::H0 : PhaseNorm::H);
      CHECK(got == doctest::Approx(oracle_semidistance(A, B, g, h0)).epsilon(1e-12));
    }
  }
  SUBCASE("empty sets") {
    CHECK_THROWS_AS(hausdorff_semidistance({}, cloud(1), g, PhaseNorm::H), ConfigError);
    CHECK_THROWS_AS(hausdorff_semidistance(cloud(1), {}, g, PhaseNorm::H), ConfigError);
  }
}

TEST_CASE("attractor samples") {
  BeamParams p;
  p.ell = 0.1 * cap;
  const Grid g = make_grid(p.L, 20);
  const DiscreteOperators ops = assemble(p, g);
  const DiscreteOperators timo = assemble_timoshenko(p, g);
  const ForcingModel f = builtin_forcing(0, 0);
  const DampingModel d = clipped_cubic_damping(1, 1, 1);
  const auto ens = random_ensemble(assemble(BeamParams{}, g), 4, 1.0, 3);
  const LabSettings settings;

  SUBCASE("symmetrized harvest and lifted Timoshenko samples") {
    const AttractorSample plain = harvest_attractor(timo, f, d, ens, 5.0, 2.0, 0.5, false, settings);
    const AttractorSample sym = harvest_attractor(timo, f, d, ens, 5.0, 2.0, 0.5, true, settings);
    CHECK(sym.states.size() == 2 * plain.states.size());
    CHECK(plain.timoshenko);
    for (const State& s : plain.states) {
      CHECK(s.t >= 5.0 - 1e-9);
      CHECK(s.w.norm() == 0.0);
    }
    CHECK(hausdorff_semidistance(plain.states, sym.states, g, PhaseNorm::H0) == 0.0);
    CHECK(hausdorff_semidistance({negate(plain.states[3])}, sym.states, g, PhaseNorm::H0) == 0.0);
    CHECK(std::isfinite(plain.regularity.max_dxx));
    CHECK(plain.regularity.max_acceleration > 0.0);
  }
  SUBCASE("doubling the transient barely moves the sample") {
    const AttractorSample s1 = harvest_attractor(ops, f, d, ens, 10.0, 10.0, 0.2, true, settings);
    const AttractorSample s2 = harvest_attractor(ops, f, d, ens, 20.0, 10.0, 0.2, true, settings);
    double size = 0.0;
    for (const State& s : s1.states) size = std::max(size, discrete_norm_H(g, s));
    const double moved = std::max(hausdorff_semidistance(s1.states, s2.states, g, PhaseNorm::H),
                                  hausdorff_semidistance(s2.states, s1.states, g, PhaseNorm::H));
    CHECK(moved <= 0.1 * size);
  }
}

TEST_CASE("upper semicontinuity experiment") {
  const BeamParams p;
  SamplingProtocol protocol;
  protocol.members = 6;
  LabSettings settings;
  settings.stride = 5;
  const std::vector<double> ells{0.2 * cap, 0.1 * cap, 0.05 * cap};

  SUBCASE("zero forcing collapses to the origin") {
    const auto r = upper_semicontinuity_experiment(p, zero_forcing(), clipped_cubic_damping(1, 1, 1), ells, 16,
                                                   protocol, settings);
    REQUIRE(r.rows.size() == 3);
    for (const auto& row : r.rows) CHECK(row.semidistance <= r.tolerance);
    CHECK(r.tolerance == doctest::Approx(0.05 * r.initial_radius));
    CHECK(r.t_transient == doctest::Approx(10.0 / r.alpha));
    CHECK(r.stride == doctest::Approx(0.1 / r.alpha));
  }
  SUBCASE("builtin forcing: nonincreasing table") {
    const auto r = upper_semicontinuity_experiment(p, builtin_forcing(0, 0), clipped_cubic_damping(1, 1, 1), ells,
                                                   16, protocol, settings);
    CHECK(r.nonincreasing);
    CHECK(r.alpha > 0.0);
    CHECK(r.reference_size > 0);
  }
  SUBCASE("preconditions") {
    CHECK_THROWS_AS(upper_semicontinuity_experiment(p, builtin_forcing(0, 0), cubic_damping(1, 1), ells, 16, protocol,
                                                    settings),
                    ConfigError);
    CHECK_THROWS_AS(upper_semicontinuity_experiment(p, coupled_forcing(0, 0, 1), clipped_cubic_damping(1, 1, 1), ells,
                                                    16, protocol, settings),
                    ConfigError);
  }
}
