#include "bresse/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace bresse {

namespace {

Json vec(const Vector& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

std::string hex(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

void CsvTable::add(const std::vector<double>& values) {
  std::vector<std::string> row;
  row.reserve(values.size());
  for (double v : values) row.push_back(format_number(v));
  rows.push_back(std::move(row));
}

std::string to_csv(const CsvTable& table) {
  std::ostringstream os;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const std::string& c = cells[i];
      if (i) os << ',';
      if (c.find_first_of(",\"\n") != std::string::npos) {
        os << '"';
        for (char ch : c) os << (ch == '"' ? std::string("\"\"") : std::string(1, ch));
        os << '"';
      } else {
        os << c;
      }
    }
    os << '\n';
  };
  line(table.header);
  for (const auto& r : table.rows) line(r);
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path + "'");
}

void read_series_csv(const std::string& path, std::vector<double>& t, std::vector<double>& values) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read series file '" + path + "'");
  t.clear();
  values.clear();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string a, b;
    std::getline(ss, a, ',');
    std::getline(ss, b, ',');
    char* end_a = nullptr;
    char* end_b = nullptr;
    const double x = std::strtod(a.c_str(), &end_a);
    const double y = std::strtod(b.c_str(), &end_b);
    if (end_a == a.c_str() || end_b == b.c_str()) {
      throw ConfigError("series file '" + path + "' line " + std::to_string(line_no) + ": expected two numbers");
    }
    t.push_back(x);
    values.push_back(y);
  }
}

Json to_json(const BeamParams& p) {
  return {{"rho1", p.rho1}, {"rho2", p.rho2}, {"b", p.b}, {"k", p.k}, {"k0", p.k0}, {"L", p.L}, {"ell", p.ell}};
}

Json to_json(const AnalyticConstants& c) {
  return {{"gamma1", c.gamma1}, {"gamma2", c.gamma2},   {"gamma3", c.gamma3}, {"gamma3_weighted", c.gamma3_weighted},
          {"beta0", c.beta0},   {"ell0", c.ell0}, {"L", c.L}};
}

Json to_json(const EnergyReport& r) {
  return {{"t", r.t},
          {"E", r.E},
          {"Etotal", r.Etotal},
          {"dissipation_rate", r.dissipation_rate},
          {"cumulative_dissipation", r.cumulative_dissipation},
          {"identity_residual", r.identity_residual}};
}

Json to_json(const DecayFit& f) {
  return {{"gamma", f.gamma},         {"alpha", f.alpha},           {"floor", f.floor},
          {"rmse", f.rmse},           {"amplitude", f.amplitude},   {"tail_alpha", f.tail_alpha},
          {"tail_stable", f.tail_stable}, {"degenerate", f.degenerate}};
}

Json to_json(const ValidationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"worst_value", c.worst_value},
                      {"worst_point", c.worst_point},
                      {"detail", c.detail}});
  }
  return {{"all_passed", r.all_passed()}, {"checks", checks}};
}

Json to_json(const Equilibrium& eq, const EquilibriumBound& b, bool nodal_data) {
  Json j{{"residual_norm", eq.residual_norm},
         {"h1_seminorm_sq", eq.h1_seminorm_sq},
         {"iterations", eq.iterations},
         {"hash", hex(state_hash(eq.stacked()))},
         {"bound",
          {{"lhs", b.lhs},
           {"rhs", b.rhs},
           {"prefactor", b.prefactor},
           {"passed", b.passed},
           {"near_degenerate", b.near_degenerate}}}};
  if (nodal_data) {
    j["phi"] = vec(eq.phi);
    j["psi"] = vec(eq.psi);
    j["w"] = vec(eq.w);
  }
  return j;
}

Json to_json(const AbsorptionReport& r) {
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json fits = Json::array();
    for (const auto& f : e.fits) fits.push_back(to_json(f));
    entries.push_back({{"ell", e.ell},
                       {"radius", e.radius},
                       {"member_radius", e.member_radius},
                       {"fits", fits},
                       {"min_alpha", e.min_alpha},
                       {"energy_level", e.energy_level},
                       {"level_surrogate", e.level_surrogate},
                       {"failures", e.failures}});
  }
  return {{"entries", entries}, {"uniform_radius", r.uniform_radius}, {"spread", r.spread}, {"uniform", r.uniform}};
}

Json to_json(const QuasistabilityReport& r) {
  Json pairs = Json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"gamma_B", p.gamma_B},
                     {"alpha_B", p.alpha_B},
                     {"C_B", p.C_B},
                     {"max_violation", p.max_violation},
                     {"feasible", p.feasible},
                     {"fit", to_json(p.fit)},
                     {"compensated_fit", to_json(p.compensated_fit)},
                     {"samples", p.t.size()}});
  }
  return {{"pairs", pairs}, {"feasible", r.feasible}, {"max_violation", r.max_violation}};
}

Json to_json(const SingularLimitReport& r) {
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back({{"ell", row.ell}, {"error", row.error}, {"w_sup", row.w_sup}});
  return {{"rows", rows}, {"rates", r.rates}, {"strictly_decreasing", r.strictly_decreasing}, {"dt", r.dt}};
}

Json to_json(const RegularityProxy& r) {
  return {{"max_dxx", r.max_dxx}, {"max_velocity_dx", r.max_velocity_dx}, {"max_acceleration", r.max_acceleration}};
}

Json to_json(const SemicontinuityReport& r) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const auto& row = r.rows[i];
    rows.push_back({{"ell", row.ell},
                    {"semidistance", row.semidistance},
                    {"sample_size", row.sample_size},
                    {"regularity", to_json(r.regularity[i])}});
  }
  return {{"alpha", r.alpha},
          {"t_transient", r.t_transient},
          {"t_harvest", r.t_harvest},
          {"stride", r.stride},
          {"initial_radius", r.initial_radius},
          {"tolerance", r.tolerance},
          {"rows", rows},
          {"reference_size", r.reference_size},
          {"reference_regularity", to_json(r.reference_regularity)},
          {"nonincreasing", r.nonincreasing}};
}

Json to_json(const RunConfig& c) {
  Json j = Json::object();
  for (const auto& key : config_keys()) j[key.section][key.key] = nullptr;
  // Values are taken from the canonical text so both views agree.
  std::istringstream in(emit_config(c));
  std::string line, section;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      continue;
    }
    const auto eq = line.find(" = ");
    const std::string key = line.substr(0, eq), value = line.substr(eq + 3);
    if (key == "ells" || key == "formats") {
      Json list = Json::array();
      std::istringstream items(value);
      for (std::string item; std::getline(items, item, ',');) {
        if (item.starts_with(' ')) item.erase(0, 1);
        if (!item.empty()) list.push_back(key == "ells" ? Json::parse(item) : Json(item));
      }
      j[section][key] = list;
    } else {
      const Json parsed = Json::parse(value, nullptr, false);
      j[section][key] = parsed.is_discarded() || parsed.is_string() ? Json(value) : parsed;
    }
  }
  return j;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace bresse
