#include "bresse/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/random/sobol.hpp>

namespace bresse {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string(name) + " must be positive and finite");
  }
}

double sq(double x) { return x * x; }

}  // namespace

void BeamParams::validate() const {
  require_positive(rho1, "rho1");
  require_positive(rho2, "rho2");
  require_positive(b, "b");
  require_positive(k, "k");
  require_positive(k0, "k0");
  require_positive(L, "L");
  if (!(ell >= 0.0) || !std::isfinite(ell)) throw ConfigError("ell must be nonnegative and finite");
}

double BeamParams::max_wave_speed() const {
  return std::max({std::sqrt(k / rho1), std::sqrt(b / rho2), std::sqrt(k0 / rho1)});
}

Mat3 ForcingModel::hessian_at(const Vec3& x) const {
  if (hessian) return hessian(x);
  Mat3 h{};
  for (int j = 0; j < 3; ++j) {
    const double step = 1e-6 * std::max(1.0, std::abs(x[j]));
    Vec3 xp = x, xm = x;
    xp[j] += step;
    xm[j] -= step;
    const Vec3 gp = gradient(xp), gm = gradient(xm);
    for (int i = 0; i < 3; ++i) h[i][j] = (gp[i] - gm[i]) / (2.0 * step);
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = i + 1; j < 3; ++j) {
      const double avg = 0.5 * (h[i][j] + h[j][i]);
      h[i][j] = h[j][i] = avg;
    }
  }
  return h;
}

ForcingModel builtin_forcing(double alpha1, double alpha2) {
  if (!(alpha1 >= 0.0) || !(alpha2 >= 0.0)) {
    throw ConfigError("builtin forcing coefficients alpha1, alpha2 must be nonnegative");
  }
  ForcingModel f;
  f.name = "builtin";
  f.potential = [=](const Vec3& x) {
    const double s2 = sq(x[0] + x[1]);
    return s2 * s2 - s2 + alpha1 * sq(x[0] * x[1]) + alpha2 * std::pow(std::abs(x[2]), 3);
  };
  f.gradient = [=](const Vec3& x) {
    const double s = x[0] + x[1];
    const double common = 4.0 * s * s * s - 2.0 * s;
    return Vec3{common + 2.0 * alpha1 * x[0] * x[1] * x[1],
                common + 2.0 * alpha1 * x[0] * x[0] * x[1],
                3.0 * alpha2 * std::abs(x[2]) * x[2]};
  };
  f.hessian = [=](const Vec3& x) {
    const double s = x[0] + x[1];
    const double common = 12.0 * s * s - 2.0;
    Mat3 h{};
    h[0][0] = common + 2.0 * alpha1 * x[1] * x[1];
    h[1][1] = common + 2.0 * alpha1 * x[0] * x[0];
    h[0][1] = h[1][0] = common + 4.0 * alpha1 * x[0] * x[1];
    h[2][2] = 6.0 * alpha2 * std::abs(x[2]);
    return h;
  };
  f.beta = 0.0;
  f.mF = 0.25;
  f.p = 3.0;
  return f;
}

ForcingModel zero_forcing() {
  ForcingModel f;
  f.name = "zero";
  f.potential = [](const Vec3&) { return 0.0; };
  f.gradient = [](const Vec3&) { return Vec3{0.0, 0.0, 0.0}; };
  f.hessian = [](const Vec3&) { return Mat3{}; };
  f.p = 1.0;
  return f;
}

ForcingModel quadratic_well(double beta) {
  if (!(beta >= 0.0)) throw ConfigError("quadratic well coefficient must be nonnegative");
  ForcingModel f;
  f.name = "quadratic";
  f.potential = [=](const Vec3& x) { return -beta * (sq(x[0]) + sq(x[1]) + sq(x[2])); };
  f.gradient = [=](const Vec3& x) { return Vec3{-2.0 * beta * x[0], -2.0 * beta * x[1], -2.0 * beta * x[2]}; };
  f.hessian = [=](const Vec3&) {
    Mat3 h{};
    for (int i = 0; i < 3; ++i) h[i][i] = -2.0 * beta;
    return h;
  };
  f.beta = beta;
  f.mF = 0.0;
  f.p = 1.0;
  return f;
}

ForcingModel coupled_forcing(double alpha1, double alpha2, double alpha3) {
  if (!(alpha3 >= 0.0)) throw ConfigError("coupled forcing coefficient alpha3 must be nonnegative");
  ForcingModel base = builtin_forcing(alpha1, alpha2);
  ForcingModel f = base;
  f.name = "coupled";
  f.potential = [=](const Vec3& x) { return base.potential(x) + alpha3 * sq(x[0] * x[2]); };
  f.gradient = [=](const Vec3& x) {
    Vec3 g = base.gradient(x);
    g[0] += 2.0 * alpha3 * x[0] * x[2] * x[2];
    g[2] += 2.0 * alpha3 * x[0] * x[0] * x[2];
    return g;
  };
  f.hessian = [=](const Vec3& x) {
    Mat3 h = base.hessian(x);
    h[0][0] += 2.0 * alpha3 * x[2] * x[2];
    h[2][2] += 2.0 * alpha3 * x[0] * x[0];
    h[0][2] += 4.0 * alpha3 * x[0] * x[2];
    h[2][0] = h[0][2];
    return h;
  };
  f.depends_on_w = {alpha3 > 0.0, false};
  return f;
}

double DampingLaw::derivative(double s) const {
  if (dg) return dg(s);
  const double step = 1e-6 * std::max(1.0, std::abs(s));
  return (g(s + step) - g(s - step)) / (2.0 * step);
}

namespace {

DampingModel uniform(std::string name, DampingLaw law, bool lipschitz) {
  DampingModel d;
  d.name = std::move(name);
  d.laws = {law, law, law};
  d.globally_lipschitz = lipschitz;
  return d;
}

}  // namespace

DampingModel linear_damping(double a) {
  require_positive(a, "linear damping coefficient");
  DampingLaw law{[=](double s) { return a * s; }, [=](double) { return a; }, a, a};
  return uniform("linear", law, true);
}

DampingModel cubic_damping(double a, double c, double sector_box) {
  if (!(a >= 0.0) || !(c > 0.0)) throw ConfigError("cubic damping needs a >= 0 and c > 0");
  require_positive(sector_box, "cubic damping sector box");
  // On |s| > 1, g(s)s / s^2 = a + c s^2 >= a + c.
  DampingLaw law{[=](double s) { return a * s + c * s * s * s; },
                 [=](double s) { return a + 3.0 * c * s * s; }, a + c,
                 a + c * sector_box * sector_box};
  return uniform("cubic", law, false);
}

DampingModel clipped_cubic_damping(double a, double c, double clip) {
  require_positive(a, "clipped cubic damping coefficient a");
  if (!(c >= 0.0)) throw ConfigError("clipped cubic damping needs c >= 0");
  require_positive(clip, "clipped cubic damping clip");
  const double g_clip = a * clip + c * clip * clip * clip;
  const double slope = a + 3.0 * c * clip * clip;
  DampingLaw law;
  law.g = [=](double s) {
    if (std::abs(s) <= clip) return a * s + c * s * s * s;
    const double sign = s > 0.0 ? 1.0 : -1.0;
    return sign * (g_clip + slope * (std::abs(s) - clip));
  };
  law.dg = [=](double s) { return std::abs(s) <= clip ? a + 3.0 * c * s * s : slope; };
  law.m = a;
  law.M = slope;
  return uniform("cubic_clipped", law, true);
}

DampingModel no_damping() {
  DampingLaw law{[](double) { return 0.0; }, [](double) { return 0.0; }, 0.0, 0.0};
  return uniform("none", law, false);
}

AnalyticConstants analytic_constants(const BeamParams& params, double ell0, double beta) {
  params.validate();
  if (!(ell0 >= 0.0)) throw ConfigError("curvature cap ell0 must be nonnegative");
  if (ell0 >= params.curvature_cap()) {
    std::ostringstream os;
    os << "curvature cap ell0 = " << ell0 << " is outside the uniform regime ell0 < pi/(2L) = "
       << params.curvature_cap();
    throw ConfigError(os.str());
  }
  if (params.ell > ell0) throw ConfigError("params.ell exceeds the curvature cap ell0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be nonnegative");

  const double L2 = params.L * params.L;
  const double pi2 = kPi * kPi;
  const double poincare = L2 / pi2;  // (L/pi)^2

  AnalyticConstants c;
  c.ell0 = ell0;
  c.L = params.L;
  const double prefactor = 1.0 / (1.0 - 4.0 * ell0 * ell0 * poincare);
  c.gamma3 = prefactor * std::max(1.0 + 4.0 * poincare, 2.0);
  c.gamma3_weighted = c.gamma3 / std::min({1.0, params.b, params.k, params.k0});

  // |phi_x + psi + ell w|^2 <= 3(...) and |w_x - ell phi|^2 <= 2(...), then Poincare.
  const double e2 = ell0 * ell0 * poincare;
  c.gamma1 = std::max({params.rho1, params.rho2, 3.0 * params.k + 2.0 * params.k0 * e2,
                       params.b + 3.0 * params.k * poincare, 2.0 * params.k0 + 3.0 * params.k * e2});
  c.gamma2 = std::max(1.0 / std::min(params.rho1, params.rho2), c.gamma3_weighted);
  c.beta0 = 1.0 - 2.0 * beta * c.gamma3_weighted * poincare;
  if (!(c.beta0 > 0.0)) {
    std::ostringstream os;
    os << "beta = " << beta << " violates beta < pi^2/(2 gamma3 L^2) = " << beta_cap(c);
    throw ConfigError(os.str());
  }
  return c;
}

double beta_cap(const AnalyticConstants& constants) {
  return kPi * kPi / (2.0 * constants.gamma3_weighted * constants.L * constants.L);
}

bool ValidationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const HypothesisCheck& c) { return c.passed; });
}

const HypothesisCheck* ValidationReport::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

std::vector<Vec3> sobol_box(std::size_t count, double box) {
  boost::random::sobol engine(3);
  const double scale = 1.0 / (static_cast<double>(engine.max()) + 1.0);
  std::vector<Vec3> points(count);
  for (auto& pt : points) {
    for (auto& coord : pt) coord = box * (2.0 * static_cast<double>(engine()) * scale - 1.0);
  }
  return points;
}

namespace {

// Tracks the minimum slack of an inequality over samples.
struct SlackTracker {
  HypothesisCheck check;
  double tolerance = 1e-12;
  bool seen = false;

  explicit SlackTracker(std::string name) { check.name = std::move(name); }

  void observe(double slack, std::vector<double> point) {
    if (!seen || slack < check.worst_value) {
      check.worst_value = slack;
      check.worst_point = std::move(point);
      seen = true;
    }
  }

  HypothesisCheck finish() {
    check.passed = !seen || check.worst_value >= -tolerance;
    return check;
  }
};

double norm2(const Vec3& x) { return sq(x[0]) + sq(x[1]) + sq(x[2]); }

}  // namespace

ValidationReport validate_hypotheses(const BeamParams& params, const ForcingModel& forcing,
                                     const DampingModel& damping, const SamplingSpec& samples) {
  ValidationReport report;
  const auto points = sobol_box(std::max<std::size_t>(samples.count, 1), samples.box);

  {
    HypothesisCheck c;
    c.name = "parameters";
    try {
      params.validate();
      c.passed = params.uniform_regime();
      c.detail = c.passed ? "positive coefficients, ell < pi/(2L)" : "ell >= pi/(2L)";
      c.worst_value = params.curvature_cap() - params.ell;
    } catch (const ConfigError& e) {
      c.passed = false;
      c.detail = e.what();
    }
    report.checks.push_back(c);
  }

  // Gradient consistency: central differences of F against (f1, f2, f3).
  {
    HypothesisCheck c;
    c.name = "gradient_consistency";
    const std::size_t npts = std::min(points.size(), samples.gradient_points);
    for (std::size_t i = 0; i < npts; ++i) {
      const Vec3& x = points[i];
      const Vec3 grad = forcing.gradient(x);
      for (int j = 0; j < 3; ++j) {
        const double step = 1e-5 * std::max(1.0, std::abs(x[j]));
        Vec3 xp = x, xm = x;
        xp[j] += step;
        xm[j] -= step;
        const double fd = (forcing.potential(xp) - forcing.potential(xm)) / (2.0 * step);
        const double err = std::abs(fd - grad[j]) / std::max(1.0, std::abs(grad[j]));
        if (err > c.worst_value) {
          c.worst_value = err;
          c.worst_point = {x[0], x[1], x[2]};
        }
      }
    }
    c.passed = c.worst_value <= 1e-6;
    c.detail = "max relative finite-difference error, threshold 1e-6";
    report.checks.push_back(c);
  }

  SlackTracker lower("potential_lower_bound");
  SlackTracker euler("euler_lower_bound");
  double growth = 0.0;
  for (const auto& x : points) {
    const double F = forcing.potential(x);
    const Vec3 g = forcing.gradient(x);
    const double floor = -forcing.beta * norm2(x) - forcing.mF;
    lower.observe(F - floor, {x[0], x[1], x[2]});
    euler.observe(g[0] * x[0] + g[1] * x[1] + g[2] * x[2] - F - floor, {x[0], x[1], x[2]});
    const Mat3 h = forcing.hessian_at(x);
    const double weight = 1.0 + std::pow(std::abs(x[0]), forcing.p - 1.0) +
                          std::pow(std::abs(x[1]), forcing.p - 1.0) +
                          std::pow(std::abs(x[2]), forcing.p - 1.0);
    for (const auto& row : h) {
      growth = std::max(growth, std::sqrt(sq(row[0]) + sq(row[1]) + sq(row[2])) / weight);
    }
  }
  lower.check.detail = "min of F + beta|x|^2 + mF";
  euler.check.detail = "min of grad F.x - F + beta|x|^2 + mF";
  report.checks.push_back(lower.finish());
  report.checks.push_back(euler.finish());
  {
    HypothesisCheck c;
    c.name = "gradient_growth";
    c.worst_value = growth;
    c.passed = std::isfinite(growth);
    c.detail = "smallest C_f consistent with the samples";
    report.checks.push_back(c);
  }

  {
    HypothesisCheck c;
    c.name = "beta_cap";
    const double ell0 = samples.ell0 >= 0.0 ? samples.ell0 : params.ell;
    try {
      const AnalyticConstants constants = analytic_constants(params, ell0, 0.0);
      const double cap = beta_cap(constants);
      c.worst_value = cap - forcing.beta;
      c.passed = forcing.beta < cap;
      std::ostringstream os;
      os << "beta = " << forcing.beta << ", cap pi^2/(2 gamma3 L^2) = " << cap;
      c.detail = os.str();
    } catch (const ConfigError& e) {
      c.passed = false;
      c.detail = e.what();
    }
    report.checks.push_back(c);
  }

  const std::size_t ns = std::max<std::size_t>(samples.damping_count, 3);
  std::vector<double> svals(ns);
  for (std::size_t i = 0; i < ns; ++i) {
    svals[i] = -samples.damping_box + 2.0 * samples.damping_box * static_cast<double>(i) /
                                          static_cast<double>(ns - 1);
  }
  for (int i = 0; i < 3; ++i) {
    const DampingLaw& law = damping.laws[static_cast<std::size_t>(i)];
    const std::string suffix = "_g" + std::to_string(i + 1);

    SlackTracker hg1("monotone" + suffix);
    for (std::size_t j = 1; j < ns; ++j) {
      hg1.observe(law(svals[j]) - law(svals[j - 1]), {svals[j - 1], svals[j]});
    }
    hg1.check.detail = "g(0) = 0 and g strictly increasing on the samples";
    HypothesisCheck mono = hg1.finish();
    mono.passed = mono.worst_value > 0.0 && law(0.0) == 0.0;
    report.checks.push_back(mono);

    const bool lipschitz = damping.globally_lipschitz;
    SlackTracker hg2("sector" + suffix);
    for (double s : svals) {
      if (std::abs(s) <= 1.0 && !lipschitz) continue;
      if (s == 0.0) continue;
      const double gs = law(s) * s;
      hg2.observe(std::min(gs - law.m * s * s, law.M * s * s - gs) / (s * s), {s});
    }
    hg2.check.detail = lipschitz ? "m s^2 <= g(s)s <= M s^2 on all samples"
                                 : "m s^2 <= g(s)s <= M s^2 on samples with |s| > 1";
    HypothesisCheck sector = hg2.finish();
    if (!(law.m > 0.0) || !(law.M > 0.0)) {
      sector.passed = false;
      sector.detail += " (sector constants must be positive)";
    }
    report.checks.push_back(sector);

    if (lipschitz) {
      SlackTracker hg3("lipschitz" + suffix);
      for (double s : svals) {
        const double d = law.derivative(s);
        hg3.observe(std::min(d - law.m, law.M - d), {s});
      }
      hg3.tolerance = 1e-9;
      hg3.check.detail = "m <= g'(s) <= M on all samples";
      report.checks.push_back(hg3.finish());
    }
  }
  return report;
}

}  // namespace bresse
