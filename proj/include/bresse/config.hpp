#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bresse/model.hpp"

namespace bresse {

struct ModelSection {
  double rho1 = 1.0, rho2 = 1.0, b = 1.0, k = 1.0, k0 = 1.0;
  double L = std::numbers::pi;
  double ell = 0.0;
  double ell0 = -1.0;  ///< regime bound for the constants; negative means "use ell"
  std::string forcing = "builtin";  ///< builtin | zero | quadratic | coupled
  double alpha1 = 0.0, alpha2 = 0.0, alpha3 = 0.0;
  double beta = 0.0;  ///< quadratic well depth
  std::string damping = "linear";  ///< linear | cubic | cubic_clipped | none
  double damping_a = 1.0, damping_c = 1.0, damping_clip = 1.0, damping_box = 2.0;

  bool operator==(const ModelSection&) const = default;
};

struct GridSection {
  int n = 64;
  bool operator==(const GridSection&) const = default;
};

struct StepperSection {
  double dt = 0.0;  ///< 0 selects h / (2 max wave speed)
  double newton_tol = 1e-10;
  int newton_max_iters = 25;
  std::string scheme = "implicit-midpoint";
  bool operator==(const StepperSection&) const = default;
};

struct ExperimentSection {
  std::string name = "simulate";
  double T = 10.0;
  std::uint64_t seed = 1;
  int workers = 1;
  std::vector<double> ells;  ///< empty selects the experiment's default sweep
  int members = 0;  ///< 0 selects the experiment default (8 for decay-fit, 16 for semicontinuity)
  double energy = 1.0;
  double window = 0.25;
  int pairs = 10;
  double epsilon = 1e-2;
  double transient = 0.0, harvest = 0.0, sample_stride = 0.0;
  double pilot_T = 20.0;
  double rel_tolerance = 0.05;
  bool symmetrize = true;
  int random_starts = 8;
  std::string series;  ///< decay-fit: CSV with columns t,energy; empty runs the ensemble
  bool operator==(const ExperimentSection&) const = default;
};

struct OutputSection {
  std::string directory = "out";
  int stride = 1;
  std::vector<std::string> formats{"json", "csv"};
  bool operator==(const OutputSection&) const = default;
  bool wants(const std::string& format) const;
};

struct RunConfig {
  ModelSection model;
  GridSection grid;
  StepperSection stepper;
  ExperimentSection experiment;
  OutputSection output;
  bool operator==(const RunConfig&) const = default;

  BeamParams params() const;
  ForcingModel forcing() const;
  DampingModel damping() const;
  double ell0() const { return model.ell0 >= 0.0 ? model.ell0 : model.ell; }
};

inline const std::vector<std::string> kExperiments{"simulate",       "equilibria",     "decay-fit", "singular-limit",
                                                   "semicontinuity", "quasistability", "verify"};

struct ParseResult {
  RunConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

/// Line-oriented sections: "[model]" then "key = value", or dotted
/// "model.key = value" anywhere. '#' and ';' start comments. A bare
/// "experiment = NAME" sets the experiment name. All errors are collected.
/// `experiment` overrides the name from the text before validation.
ParseResult parse_config(const std::string& text, const std::optional<std::string>& experiment = std::nullopt);

/// Semantic checks that depend on several keys (regime, experiment name, ...).
std::vector<std::string> validate_config(const RunConfig& config);

/// Canonical text; parse_config(emit_config(c)).config == c.
std::string emit_config(const RunConfig& config);

struct KeyInfo {
  std::string section, key, default_value, doc;
};
const std::vector<KeyInfo>& config_keys();

/// Closest "section.key" by edit distance, preferring keys of `section`.
std::string nearest_key(const std::string& section, const std::string& key);

/// Thrown by load_config; carries every message.
class ConfigErrors : public ConfigError {
 public:
  explicit ConfigErrors(std::vector<std::string> errors);
  std::vector<std::string> errors;
};

RunConfig load_config_file(const std::string& path, const std::optional<std::string>& experiment = std::nullopt);

}  // namespace bresse
