#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace bresse {

/// Invalid parameters, out-of-regime values or incompatible model choices.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure (Newton solve, time step, fit) did not succeed.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

/// Physical coefficients of the arched beam.
///
/// rho1 multiplies both the vertical and the longitudinal accelerations,
/// rho2 the rotational one; b, k and k0 are the bending, shear and axial
/// stiffnesses and ell is the curvature (inverse radius of the arch).
struct BeamParams {
  double rho1 = 1.0;
  double rho2 = 1.0;
  double b = 1.0;
  double k = 1.0;
  double k0 = 1.0;
  double L = std::numbers::pi;
  double ell = 0.0;

  /// Throws ConfigError unless all coefficients are positive and ell >= 0.
  void validate() const;

  /// pi / (2L): curvatures strictly below this keep every norm constant
  /// independent of ell.
  double curvature_cap() const { return std::numbers::pi / (2.0 * L); }
  bool uniform_regime() const { return ell < curvature_cap(); }

  double max_wave_speed() const;
};

/// Gradient-type nonlinear forcing f = grad F together with the constants
/// of its lower bounds F >= -beta|x|^2 - mF and grad F.x - F >= -beta|x|^2 - mF.
struct ForcingModel {
  std::string name;
  std::function<double(const Vec3&)> potential;
  std::function<Vec3(const Vec3&)> gradient;
  /// Optional; hessian_at() falls back to differencing the gradient.
  std::function<Mat3(const Vec3&)> hessian;
  double beta = 0.0;
  double mF = 0.0;
  double p = 1.0;
  /// Whether f1 and f2 depend on w. Both must be false for the Timoshenko limit.
  std::array<bool, 2> depends_on_w{false, false};

  Mat3 hessian_at(const Vec3& x) const;
  bool timoshenko_compatible() const { return !depends_on_w[0] && !depends_on_w[1]; }
};

/// F = |u+v|^4 - |u+v|^2 + alpha1 |uv|^2 + alpha2 |w|^3, with beta = 0,
/// mF = 1/4 and p = 3.
ForcingModel builtin_forcing(double alpha1, double alpha2);

/// F = 0.
ForcingModel zero_forcing();

/// F = -beta (u^2 + v^2 + w^2): the extreme case allowed by the lower bound,
/// used to probe the admissible range of beta.
ForcingModel quadratic_well(double beta);

/// builtin_forcing plus alpha3 |u w|^2. f1 depends on w, so this model is
/// rejected by the Timoshenko-limit experiments.
ForcingModel coupled_forcing(double alpha1, double alpha2, double alpha3);

/// One scalar damping law g with sector bounds m s^2 <= g(s) s <= M s^2.
struct DampingLaw {
  std::function<double(double)> g;
  /// Optional; derivative() falls back to central differences.
  std::function<double(double)> dg;
  double m = 0.0;
  double M = 0.0;

  double operator()(double s) const { return g(s); }
  double derivative(double s) const;
};

struct DampingModel {
  std::string name;
  std::array<DampingLaw, 3> laws;
  /// True iff m_i <= g_i'(s) <= M_i for all s.
  bool globally_lipschitz = false;
};

/// g_i(s) = a s for every component.
DampingModel linear_damping(double a);

/// g_i(s) = a s + c s^3. Not globally Lipschitz; the upper sector constant is
/// the one valid on |s| <= sector_box.
DampingModel cubic_damping(double a, double c, double sector_box = 2.0);

/// a s + c s^3 on |s| <= clip, continued linearly with slope a + 3 c clip^2
/// beyond it. Globally Lipschitz with m = a, M = a + 3 c clip^2.
DampingModel clipped_cubic_damping(double a, double c, double clip);

/// g = 0 (conservative dynamics). Does not satisfy the sector conditions.
DampingModel no_damping();

/// Norm-equivalence and coercivity constants for curvatures in [0, ell0].
struct AnalyticConstants {
  double gamma1 = 0.0;  ///< |y|_{H_ell}^2 <= gamma1 |y|_H^2
  double gamma2 = 0.0;  ///< |y|_H^2 <= gamma2 |y|_{H_ell}^2
  /// Closed-form bound for sum |u_x|^2 against the unweighted shear/bending/axial squares.
  double gamma3 = 0.0;
  /// gamma3 / min(1, b, k, k0): the constant against the stiffness-weighted form.
  double gamma3_weighted = 0.0;
  double beta0 = 1.0;
  double ell0 = 0.0;
  double L = 0.0;
};

/// Throws ConfigError if ell0 >= pi/(2L), ell0 < 0, params.ell > ell0 or
/// beta leaves no room for a positive beta0.
AnalyticConstants analytic_constants(const BeamParams& params, double ell0, double beta = 0.0);

/// Largest beta for which beta0 stays positive: pi^2 / (2 gamma3_weighted L^2).
double beta_cap(const AnalyticConstants& constants);

struct SamplingSpec {
  double box = 2.0;             ///< forcing samples in [-box, box]^3
  std::size_t count = 10000;    ///< low-discrepancy points for the forcing checks
  double damping_box = 2.0;     ///< damping samples in [-damping_box, damping_box]
  std::size_t damping_count = 4001;
  std::size_t gradient_points = 100;  ///< points used for the finite-difference gradient check
  double ell0 = -1.0;           ///< curvature cap; negative means params.ell
};

struct HypothesisCheck {
  std::string name;
  bool passed = true;
  /// Most negative slack (or largest error) observed; 0 if not applicable.
  double worst_value = 0.0;
  std::vector<double> worst_point;
  std::string detail;
};

struct ValidationReport {
  std::vector<HypothesisCheck> checks;
  bool all_passed() const;
  const HypothesisCheck* find(const std::string& name) const;
};

/// Screens the forcing and damping hypotheses on sample points. A pass is
/// necessary, not sufficient. Never throws for failed hypotheses.
ValidationReport validate_hypotheses(const BeamParams& params, const ForcingModel& forcing,
                                     const DampingModel& damping, const SamplingSpec& samples);

/// First `count` points of the 3-d Sobol sequence mapped to [-box, box]^3.
std::vector<Vec3> sobol_box(std::size_t count, double box);

}  // namespace bresse
