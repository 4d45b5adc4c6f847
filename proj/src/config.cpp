#include "bresse/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

namespace bresse {

namespace {

using Setter = std::function<std::optional<std::string>(RunConfig&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Entry {
  KeyInfo info;
  Setter set;
  Getter get;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::optional<double> to_double(const std::string& s) {
  if (s.empty()) return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(v)) return std::nullopt;
  return v;
}

template <class Int>
std::optional<Int> to_integer(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::optional<bool> to_bool(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  return std::nullopt;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

std::string mismatch(const std::string& what, const std::string& value) {
  return "expected " + what + ", got '" + value + "'";
}

// Section members are reached through a pointer-to-member chain.
template <class S, class T>
struct Field {
  S RunConfig::*section;
  T S::*member;
  T& operator()(RunConfig& c) const { return (c.*section).*member; }
  const T& operator()(const RunConfig& c) const { return (c.*section).*member; }
};

template <class S>
Entry real(const char* section, const char* key, S RunConfig::*sec, double S::*mem, const char* doc) {
  const Field<S, double> f{sec, mem};
  Entry e;
  e.info = {section, key, "", doc};
  e.set = [f](RunConfig& c, const std::string& v) -> std::optional<std::string> {
    const auto d = to_double(v);
    if (!d) return mismatch("a number", v);
    f(c) = *d;
    return std::nullopt;
  };
  e.get = [f](const RunConfig& c) { return format_double(f(c)); };
  return e;
}

template <class S, class Int>
Entry integer(const char* section, const char* key, S RunConfig::*sec, Int S::*mem, const char* doc) {
  const Field<S, Int> f{sec, mem};
  Entry e;
  e.info = {section, key, "", doc};
  e.set = [f](RunConfig& c, const std::string& v) -> std::optional<std::string> {
    const auto d = to_integer<Int>(v);
    if (!d) return mismatch(std::is_signed_v<Int> ? "an integer" : "a nonnegative integer", v);
    f(c) = *d;
    return std::nullopt;
  };
  e.get = [f](const RunConfig& c) { return std::to_string(f(c)); };
  return e;
}

template <class S>
Entry text(const char* section, const char* key, S RunConfig::*sec, std::string S::*mem, const char* doc) {
  const Field<S, std::string> f{sec, mem};
  Entry e;
  e.info = {section, key, "", doc};
  e.set = [f](RunConfig& c, const std::string& v) -> std::optional<std::string> {
    f(c) = v;
    return std::nullopt;
  };
  e.get = [f](const RunConfig& c) { return f(c); };
  return e;
}

template <class S>
Entry boolean(const char* section, const char* key, S RunConfig::*sec, bool S::*mem, const char* doc) {
  const Field<S, bool> f{sec, mem};
  Entry e;
  e.info = {section, key, "", doc};
  e.set = [f](RunConfig& c, const std::string& v) -> std::optional<std::string> {
    const auto d = to_bool(v);
    if (!d) return mismatch("true or false", v);
    f(c) = *d;
    return std::nullopt;
  };
  e.get = [f](const RunConfig& c) { return std::string(f(c) ? "true" : "false"); };
  return e;
}

Entry ells_entry() {
  Entry e;
  e.info = {"experiment", "ells", "", "comma-separated curvatures; empty uses the experiment default"};
  e.set = [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
    std::vector<double> out;
    for (const auto& item : split_list(v)) {
      const auto d = to_double(item);
      if (!d) return mismatch("a comma-separated list of numbers", v);
      out.push_back(*d);
    }
    c.experiment.ells = out;
    return std::nullopt;
  };
  e.get = [](const RunConfig& c) {
    std::string s;
    for (std::size_t i = 0; i < c.experiment.ells.size(); ++i) s += (i ? ", " : "") + format_double(c.experiment.ells[i]);
    return s;
  };
  return e;
}

Entry formats_entry() {
  Entry e;
  e.info = {"output", "formats", "", "json and/or csv"};
  e.set = [](RunConfig& c, const std::string& v) -> std::optional<std::string> {
    c.output.formats = split_list(v);
    return std::nullopt;
  };
  e.get = [](const RunConfig& c) {
    std::string s;
    for (std::size_t i = 0; i < c.output.formats.size(); ++i) s += (i ? ", " : "") + c.output.formats[i];
    return s;
  };
  return e;
}

std::vector<Entry> build_registry() {
  using M = ModelSection;
  using X = ExperimentSection;
  std::vector<Entry> r{
      real("model", "rho1", &RunConfig::model, &M::rho1, "density rho1 (phi and w channels)"),
      real("model", "rho2", &RunConfig::model, &M::rho2, "density rho2 (psi channel)"),
      real("model", "b", &RunConfig::model, &M::b, "bending stiffness"),
      real("model", "k", &RunConfig::model, &M::k, "shear stiffness"),
      real("model", "k0", &RunConfig::model, &M::k0, "axial stiffness"),
      real("model", "L", &RunConfig::model, &M::L, "beam length"),
      real("model", "ell", &RunConfig::model, &M::ell, "curvature"),
      real("model", "ell0", &RunConfig::model, &M::ell0, "regime bound for the constants; negative uses ell"),
      text("model", "forcing", &RunConfig::model, &M::forcing, "builtin | zero | quadratic | coupled"),
      real("model", "alpha1", &RunConfig::model, &M::alpha1, "builtin/coupled coefficient of |uv|^2"),
      real("model", "alpha2", &RunConfig::model, &M::alpha2, "builtin/coupled coefficient of |w|^3"),
      real("model", "alpha3", &RunConfig::model, &M::alpha3, "coupled coefficient of |uw|^2"),
      real("model", "beta", &RunConfig::model, &M::beta, "quadratic well depth, F = -beta |x|^2"),
      text("model", "damping", &RunConfig::model, &M::damping, "linear | cubic | cubic_clipped | none"),
      real("model", "damping_a", &RunConfig::model, &M::damping_a, "linear coefficient of g"),
      real("model", "damping_c", &RunConfig::model, &M::damping_c, "cubic coefficient of g"),
      real("model", "damping_clip", &RunConfig::model, &M::damping_clip, "cubic_clipped: |s| beyond which g is linear"),
      real("model", "damping_box", &RunConfig::model, &M::damping_box, "cubic: sampling box for the sector constants"),
      integer("grid", "n", &RunConfig::grid, &GridSection::n, "interior nodes"),
      real("stepper", "dt", &RunConfig::stepper, &StepperSection::dt, "time step; 0 selects h / (2 max wave speed)"),
      real("stepper", "newton_tol", &RunConfig::stepper, &StepperSection::newton_tol, "scaled Newton residual tolerance"),
      integer("stepper", "newton_max_iters", &RunConfig::stepper, &StepperSection::newton_max_iters,
              "Newton iterations per step"),
      text("stepper", "scheme", &RunConfig::stepper, &StepperSection::scheme, "implicit-midpoint"),
      text("experiment", "name", &RunConfig::experiment, &X::name, "experiment to run"),
      real("experiment", "T", &RunConfig::experiment, &X::T, "final time"),
      integer("experiment", "seed", &RunConfig::experiment, &X::seed, "seed for all random draws"),
      integer("experiment", "workers", &RunConfig::experiment, &X::workers, "concurrent simulations"),
      ells_entry(),
      integer("experiment", "members", &RunConfig::experiment, &X::members, "ensemble size; 0 selects the experiment default"),
      real("experiment", "energy", &RunConfig::experiment, &X::energy, "initial energy of each ensemble member"),
      real("experiment", "window", &RunConfig::experiment, &X::window, "final fraction of [0, T] for the radius"),
      integer("experiment", "pairs", &RunConfig::experiment, &X::pairs, "trajectory pairs for quasistability"),
      real("experiment", "epsilon", &RunConfig::experiment, &X::epsilon, "velocity perturbation of each pair"),
      real("experiment", "transient", &RunConfig::experiment, &X::transient, "harvest transient; 0 uses 10 / alpha"),
      real("experiment", "harvest", &RunConfig::experiment, &X::harvest, "harvest window; 0 uses 10 / alpha"),
      real("experiment", "sample_stride", &RunConfig::experiment, &X::sample_stride, "harvest stride; 0 uses 0.1 / alpha"),
      real("experiment", "pilot_T", &RunConfig::experiment, &X::pilot_T, "pilot run length for the decay rate"),
      real("experiment", "rel_tolerance", &RunConfig::experiment, &X::rel_tolerance,
           "harvest tolerance relative to the initial radius"),
      boolean("experiment", "symmetrize", &RunConfig::experiment, &X::symmetrize, "add -y for every harvested y"),
      integer("experiment", "random_starts", &RunConfig::experiment, &X::random_starts, "random Newton starts"),
      text("experiment", "series", &RunConfig::experiment, &X::series, "decay-fit input CSV (t,energy); empty runs the ensemble"),
      text("output", "directory", &RunConfig::output, &OutputSection::directory, "output directory"),
      integer("output", "stride", &RunConfig::output, &OutputSection::stride, "keep every stride-th step"),
      formats_entry(),
  };
  const RunConfig defaults;
  for (auto& e : r) e.info.default_value = e.get(defaults);
  return r;
}

const std::vector<Entry>& registry() {
  static const std::vector<Entry> r = build_registry();
  return r;
}

const std::vector<std::string> kSections{"model", "grid", "stepper", "experiment", "output"};

std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

const Entry* find_entry(const std::string& section, const std::string& key) {
  for (const auto& e : registry()) {
    if (e.info.section == section && e.info.key == key) return &e;
  }
  return nullptr;
}

bool uniform_experiment(const std::string& name) {
  return name == "equilibria" || name == "decay-fit" || name == "singular-limit" || name == "semicontinuity" ||
         name == "quasistability";
}

}  // namespace

bool OutputSection::wants(const std::string& format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

BeamParams RunConfig::params() const {
  BeamParams p;
  p.rho1 = model.rho1;
  p.rho2 = model.rho2;
  p.b = model.b;
  p.k = model.k;
  p.k0 = model.k0;
  p.L = model.L;
  p.ell = model.ell;
  return p;
}

ForcingModel RunConfig::forcing() const {
  if (model.forcing == "builtin") return builtin_forcing(model.alpha1, model.alpha2);
  if (model.forcing == "zero") return zero_forcing();
  if (model.forcing == "quadratic") return quadratic_well(model.beta);
  if (model.forcing == "coupled") return coupled_forcing(model.alpha1, model.alpha2, model.alpha3);
  throw ConfigError("unknown forcing '" + model.forcing + "'");
}

DampingModel RunConfig::damping() const {
  if (model.damping == "linear") return linear_damping(model.damping_a);
  if (model.damping == "cubic") return cubic_damping(model.damping_a, model.damping_c, model.damping_box);
  if (model.damping == "cubic_clipped") return clipped_cubic_damping(model.damping_a, model.damping_c, model.damping_clip);
  if (model.damping == "none") return no_damping();
  throw ConfigError("unknown damping '" + model.damping + "'");
}

const std::vector<KeyInfo>& config_keys() {
  static const std::vector<KeyInfo> keys = [] {
    std::vector<KeyInfo> out;
    for (const auto& e : registry()) out.push_back(e.info);
    return out;
  }();
  return keys;
}

std::string nearest_key(const std::string& section, const std::string& key) {
  const Entry* best = nullptr;
  std::size_t best_d = std::numeric_limits<std::size_t>::max();
  for (const auto& e : registry()) {
    const std::size_t d = edit_distance(key, e.info.key) + (e.info.section == section ? 0 : 1);
    if (d < best_d) {
      best_d = d;
      best = &e;
    }
  }
  return best->info.section + "." + best->info.key;
}

ParseResult parse_config(const std::string& text, const std::optional<std::string>& experiment) {
  ParseResult result;
  std::map<std::string, int> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  auto error = [&](const std::string& msg) { result.errors.push_back("line " + std::to_string(line_no) + ": " + msg); };

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty() || line[0] == ';') continue;

    if (line.front() == '[') {
      if (line.back() != ']') {
        error("malformed section header '" + line + "'");
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (std::find(kSections.begin(), kSections.end(), section) == kSections.end()) {
        std::string closest = kSections.front();
        for (const auto& s : kSections) {
          if (edit_distance(section, s) < edit_distance(section, closest)) closest = s;
        }
        error("unknown section [" + section + "] (did you mean [" + closest + "]?)");
      }
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      error("expected 'key = value', got '" + line + "'");
      continue;
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);

    std::string sec = section;
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      sec = key.substr(0, dot);
      key = key.substr(dot + 1);
    } else if (section.empty() && key == "experiment") {
      sec = "experiment";
      key = "name";
    }
    if (sec.empty()) {
      error("key '" + key + "' is outside any section (did you mean '" + nearest_key("", key) + "'?)");
      continue;
    }
    const Entry* entry = find_entry(sec, key);
    if (!entry) {
      error("unknown key '" + sec + "." + key + "' (did you mean '" + nearest_key(sec, key) + "'?)");
      continue;
    }
    const std::string full = sec + "." + key;
    if (const auto it = seen.find(full); it != seen.end()) {
      error("duplicate key '" + full + "' (first set on line " + std::to_string(it->second) + ")");
      continue;
    }
    seen[full] = line_no;
    if (const auto problem = entry->set(result.config, value)) error(full + ": " + *problem);
  }

  if (experiment) result.config.experiment.name = *experiment;
  for (auto& e : validate_config(result.config)) result.errors.push_back(std::move(e));
  return result;
}

std::vector<std::string> validate_config(const RunConfig& c) {
  std::vector<std::string> errors;
  auto positive = [&](const char* name, double v) {
    if (!(v > 0.0)) errors.push_back(std::string(name) + " must be positive, got " + format_double(v));
  };
  auto nonnegative = [&](const char* name, double v) {
    if (!(v >= 0.0)) errors.push_back(std::string(name) + " must be nonnegative, got " + format_double(v));
  };
  auto at_least = [&](const char* name, long long v, long long lo) {
    if (v < lo) errors.push_back(std::string(name) + " must be at least " + std::to_string(lo) + ", got " + std::to_string(v));
  };

  const auto& m = c.model;
  positive("model.rho1", m.rho1);
  positive("model.rho2", m.rho2);
  positive("model.b", m.b);
  positive("model.k", m.k);
  positive("model.k0", m.k0);
  positive("model.L", m.L);
  nonnegative("model.ell", m.ell);
  const std::string& name = c.experiment.name;
  if (std::find(kExperiments.begin(), kExperiments.end(), name) == kExperiments.end()) {
    std::string closest = kExperiments.front();
    for (const auto& s : kExperiments) {
      if (edit_distance(name, s) < edit_distance(name, closest)) closest = s;
    }
    errors.push_back("experiment.name: unknown experiment '" + name + "' (did you mean '" + closest + "'?)");
  }
  if (m.L > 0.0) {
    const double cap = std::numbers::pi / (2.0 * m.L);
    if (uniform_experiment(name) && m.ell >= cap) {
      errors.push_back("model.ell = " + format_double(m.ell) + " is outside the uniform regime required by '" + name +
                       "': it must stay below the uniform-regime cap pi/(2L) = " + format_double(cap));
    }
    if (m.ell0 >= 0.0 && (m.ell0 >= cap || m.ell0 < m.ell)) {
      errors.push_back("model.ell0 = " + format_double(m.ell0) + " must satisfy ell <= ell0 < pi/(2L) = " +
                       format_double(cap));
    }
    for (double ell : c.experiment.ells) {
      if (!(ell >= 0.0) || ell > 0.9 * cap) {
        errors.push_back("experiment.ells: " + format_double(ell) + " is outside the sweep range [0, 0.9 pi/(2L)] = [0, " +
                         format_double(0.9 * cap) + "]");
      }
    }
  }

  static const std::vector<std::string> forcings{"builtin", "zero", "quadratic", "coupled"};
  if (std::find(forcings.begin(), forcings.end(), m.forcing) == forcings.end()) {
    errors.push_back("model.forcing: unknown forcing '" + m.forcing + "' (builtin, zero, quadratic, coupled)");
  }
  nonnegative("model.alpha1", m.alpha1);
  nonnegative("model.alpha2", m.alpha2);
  nonnegative("model.alpha3", m.alpha3);
  nonnegative("model.beta", m.beta);
  static const std::vector<std::string> dampings{"linear", "cubic", "cubic_clipped", "none"};
  const bool known_damping = std::find(dampings.begin(), dampings.end(), m.damping) != dampings.end();
  if (!known_damping) {
    errors.push_back("model.damping: unknown damping '" + m.damping + "' (linear, cubic, cubic_clipped, none)");
  }
  if (m.damping == "linear") positive("model.damping_a", m.damping_a);
  if (m.damping == "cubic" || m.damping == "cubic_clipped") {
    nonnegative("model.damping_a", m.damping_a);
    nonnegative("model.damping_c", m.damping_c);
    if (!(m.damping_a + m.damping_c > 0.0)) errors.push_back("model.damping_a + model.damping_c must be positive");
  }
  if (m.damping == "cubic_clipped") positive("model.damping_clip", m.damping_clip);
  if (m.damping == "cubic") positive("model.damping_box", m.damping_box);

  const bool needs_timoshenko = name == "singular-limit" || name == "semicontinuity";
  if (needs_timoshenko && m.forcing == "coupled" && m.alpha3 > 0.0) {
    errors.push_back("model.forcing: 'coupled' with alpha3 > 0 violates the Timoshenko compatibility condition "
                     "required by '" + name + "': f1 and f2 must not depend on w");
  }
  if ((name == "semicontinuity" || name == "quasistability") && known_damping && m.damping != "linear" &&
      m.damping != "cubic_clipped") {
    errors.push_back("model.damping: '" + name + "' requires globally Lipschitz damping (linear or cubic_clipped), got '" +
                     m.damping + "'");
  }

  at_least("grid.n", c.grid.n, 2);
  nonnegative("stepper.dt", c.stepper.dt);
  positive("stepper.newton_tol", c.stepper.newton_tol);
  at_least("stepper.newton_max_iters", c.stepper.newton_max_iters, 1);
  if (c.stepper.scheme != "implicit-midpoint") {
    errors.push_back("stepper.scheme: unknown scheme '" + c.stepper.scheme + "' (implicit-midpoint)");
  }

  const auto& x = c.experiment;
  nonnegative("experiment.T", x.T);
  if (name != "simulate" && name != "equilibria" && name != "verify" && !(x.T > 0.0)) {
    errors.push_back("experiment.T must be positive for '" + name + "'");
  }
  at_least("experiment.workers", x.workers, 1);
  at_least("experiment.members", x.members, 0);
  positive("experiment.energy", x.energy);
  if (!(x.window > 0.0 && x.window <= 1.0)) errors.push_back("experiment.window must lie in (0, 1], got " + format_double(x.window));
  at_least("experiment.pairs", x.pairs, 1);
  positive("experiment.epsilon", x.epsilon);
  nonnegative("experiment.transient", x.transient);
  nonnegative("experiment.harvest", x.harvest);
  nonnegative("experiment.sample_stride", x.sample_stride);
  positive("experiment.pilot_T", x.pilot_T);
  positive("experiment.rel_tolerance", x.rel_tolerance);
  at_least("experiment.random_starts", x.random_starts, 0);

  if (c.output.directory.empty()) errors.push_back("output.directory must not be empty");
  at_least("output.stride", c.output.stride, 1);
  for (const auto& f : c.output.formats) {
    if (f != "json" && f != "csv") errors.push_back("output.formats: unknown format '" + f + "' (json, csv)");
  }
  return errors;
}

std::string emit_config(const RunConfig& config) {
  std::ostringstream os;
  std::string section;
  for (const auto& e : registry()) {
    if (e.info.section != section) {
      if (!section.empty()) os << "\n";
      section = e.info.section;
      os << "[" << section << "]\n";
    }
    os << e.info.key << " = " << e.get(config) << "\n";
  }
  return os.str();
}

ConfigErrors::ConfigErrors(std::vector<std::string> errs)
    : ConfigError([&] {
        std::string joined;
        for (std::size_t i = 0; i < errs.size(); ++i) joined += (i ? "; " : "") + errs[i];
        return joined;
      }()),
      errors(std::move(errs)) {}

RunConfig load_config_file(const std::string& path, const std::optional<std::string>& experiment) {
  std::ifstream in(path);
  if (!in) throw ConfigErrors({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  ParseResult r = parse_config(ss.str(), experiment);
  if (!r.ok()) throw ConfigErrors(r.errors);
  return r.config;
}

}  // namespace bresse
