#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bresse/integrator.hpp"

namespace bresse {

/// E(t) ~ gamma E(0) exp(-alpha t) + floor, with alpha, floor, gamma >= 0.
struct DecayFit {
  double gamma = 0.0;
  double alpha = 0.0;
  double floor = 0.0;
  double rmse = 0.0;
  double amplitude = 0.0;   ///< gamma E(0)
  double tail_alpha = 0.0;  ///< alpha refitted on the second half of the samples
  bool tail_stable = false; ///< |tail_alpha - alpha| <= 0.2 alpha
  bool degenerate = false;  ///< identically zero series
};

/// Nonnegative least squares over (amplitude, floor) for each trial rate,
/// minimized over the rate by a log-grid scan and golden-section refinement.
/// Times are measured from the first sample. Needs >= 20 samples with
/// strictly increasing t (ConfigError otherwise).
DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& energy);

/// Shared run settings for the experiments. dt = 0 selects default_dt.
struct LabSettings {
  StepperConfig stepper;
  int workers = 1;
  int stride = 1;  ///< sample every `stride` steps
};

/// Smooth random states (first four sine modes per component) scaled so that
/// half the squared H_ell norm under `ops` equals `energy`.
std::vector<State> random_ensemble(const DiscreteOperators& ops, int count, double energy, std::uint64_t seed);

struct AbsorptionEntry {
  double ell = 0.0;
  double radius = 0.0;  ///< max over members of the final-window sup of |y|_{H_ell}
  std::vector<double> member_radius;
  std::vector<DecayFit> fits;  ///< per member, on Etotal + L mF
  double min_alpha = 0.0;
  double energy_level = 0.0;   ///< max over members of Etotal + L mF in the final window
  double level_surrogate = 0.0;  ///< radius^2 / 2 + L mF, the shifted energy a state on the ball would carry with F <= 0
  std::vector<std::string> failures;
};

struct AbsorptionReport {
  std::vector<AbsorptionEntry> entries;
  double uniform_radius = 0.0;  ///< max over ell
  double spread = 0.0;          ///< (max - min) / max over ell
  bool uniform = false;         ///< spread <= 0.25
};

/// Runs the ensemble to time T at each ell (shared initial data) and takes
/// the sup of the H_ell norm over the last `window` fraction of [0, T].
AbsorptionReport absorbing_radius(const BeamParams& params, const ForcingModel& forcing,
                                  const DampingModel& damping, const std::vector<double>& ells,
                                  const std::vector<State>& ensemble, double T, const LabSettings& settings,
                                  double window = 0.25);

struct PairProbe {
  std::vector<double> t;
  std::vector<double> energy;       ///< half the squared H_ell norm of the difference
  std::vector<double> compensator;  ///< running sup of the summed squared 2p-norms of the displacement difference
  DecayFit fit;
  DecayFit compensated_fit;  ///< fit of E - C_B x compensator
  double gamma_B = 0.0;
  double alpha_B = 0.0;
  double C_B = 0.0;
  double max_violation = 0.0;  ///< max over samples of lhs - rhs; <= 0 when feasible
  bool feasible = false;
};

struct QuasistabilityReport {
  std::vector<PairProbe> pairs;
  bool feasible = false;
  double max_violation = 0.0;
};

/// Fits E(t) <= gamma_B E(0) exp(-alpha_B t) + C_B sup_{s<=t} |dy(s)|^2_{2p}
/// for each trajectory pair: alpha_B from fit_decay on E, gamma_B = max(1,
/// 2 gamma_fit), C_B the smallest constant making the inequality hold at
/// every sample. Requires globally Lipschitz damping.
QuasistabilityReport quasistability_probe(const BeamParams& params, const ForcingModel& forcing,
                                          const DampingModel& damping,
                                          const std::vector<std::pair<State, State>>& pairs, double T,
                                          const LabSettings& settings);

struct SingularLimitRow {
  double ell = 0.0;
  double error = 0.0;      ///< sup_t |P y_ell - z|_{H_0}
  double w_sup = 0.0;      ///< sup_t |(w, w_t)| in the H norm, for reference
};

struct SingularLimitReport {
  std::vector<SingularLimitRow> rows;
  std::vector<double> rates;  ///< log2(e_i / e_{i+1}) / log2(ell_i / ell_{i+1})
  bool strictly_decreasing = false;
  double dt = 0.0;
};

/// Compares Bresse runs at each ell with the Timoshenko run from the
/// projected initial data, same grid and dt. The forcing must not couple
/// f1, f2 to w.
SingularLimitReport singular_limit_experiment(const BeamParams& params, const ForcingModel& forcing,
                                              const DampingModel& damping, const std::vector<double>& ells,
                                              const State& initial, double T, const LabSettings& settings);

enum class PhaseNorm { H, H0 };

/// sup_{a in A} inf_{b in B} |a - b|. H0 ignores the w channel. ConfigError on empty sets.
double hausdorff_semidistance(const std::vector<State>& A, const std::vector<State>& B, const Grid& grid,
                              PhaseNorm norm);

/// Linear map whose Euclidean distances reproduce the selected discrete norm.
Vector phase_embedding(const State& s, const Grid& grid, PhaseNorm norm);

struct RegularityProxy {
  double max_dxx = 0.0;           ///< max discrete L2 norm of Dxx of the displacements
  double max_velocity_dx = 0.0;   ///< max h1 seminorm of the velocities
  double max_acceleration = 0.0;  ///< max L2 norm of u_tt from the equations
};

struct AttractorSample {
  std::vector<State> states;  ///< Timoshenko samples are lifted with w = 0
  BeamParams params;
  bool timoshenko = false;
  double t_transient = 0.0;
  double t_harvest = 0.0;
  double stride = 0.0;
  RegularityProxy regularity;
};

struct SamplingProtocol {
  int members = 16;
  double energy = 1.0;         ///< initial energy of every ensemble member
  double pilot_T = 20.0;       ///< pilot run length for the decay rate
  double transient = 0.0;      ///< 0: 10 / alpha
  double harvest = 0.0;        ///< 0: 10 / alpha
  double stride = 0.0;         ///< 0: 0.1 / alpha
  double rel_tolerance = 0.05; ///< harvest tolerance relative to the initial radius
  bool symmetrize = true;      ///< add -y for each harvested y
  std::uint64_t seed = 1;
};

/// Harvests states at multiples of `stride` in [t_transient, t_transient + t_harvest].
AttractorSample harvest_attractor(const DiscreteOperators& ops, const ForcingModel& forcing,
                                  const DampingModel& damping, const std::vector<State>& ensemble,
                                  double t_transient, double t_harvest, double stride, bool symmetrize,
                                  const LabSettings& settings);

struct SemicontinuityRow {
  double ell = 0.0;
  double semidistance = 0.0;
  std::size_t sample_size = 0;
};

struct SemicontinuityReport {
  double alpha = 0.0;
  double t_transient = 0.0, t_harvest = 0.0, stride = 0.0;
  double initial_radius = 0.0;
  double tolerance = 0.0;  ///< rel_tolerance times initial_radius
  std::vector<SemicontinuityRow> rows;
  std::size_t reference_size = 0;
  bool nonincreasing = false;  ///< each entry <= 1.2 x its predecessor, or below tolerance
  RegularityProxy reference_regularity;
  std::vector<RegularityProxy> regularity;
};

/// Pilot decay rate, then attractor samples for each ell and for Timoshenko,
/// and the H_0 semidistance of the projected Bresse samples from the
/// Timoshenko sample. Requires compatible forcing and Lipschitz damping.
SemicontinuityReport upper_semicontinuity_experiment(const BeamParams& params, const ForcingModel& forcing,
                                                     const DampingModel& damping, const std::vector<double>& ells,
                                                     int n, const SamplingProtocol& protocol,
                                                     const LabSettings& settings);

}  // namespace bresse
