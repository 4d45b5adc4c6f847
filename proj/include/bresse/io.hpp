#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bresse/config.hpp"
#include "bresse/dynamics_lab.hpp"
#include "bresse/equilibria.hpp"

namespace bresse {

using Json = nlohmann::json;

/// Shortest decimal that reads back to the same double.
std::string format_number(double v);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(const std::vector<double>& values);
};

std::string to_csv(const CsvTable& table);
void write_file(const std::string& path, const std::string& content);
/// Reads two numeric columns (header row required, first two columns used).
void read_series_csv(const std::string& path, std::vector<double>& t, std::vector<double>& values);

Json to_json(const BeamParams& p);
Json to_json(const AnalyticConstants& c);
Json to_json(const EnergyReport& r);
Json to_json(const DecayFit& f);
Json to_json(const ValidationReport& r);
Json to_json(const Equilibrium& eq, const EquilibriumBound& bound, bool nodal_data);
Json to_json(const AbsorptionReport& r);
Json to_json(const QuasistabilityReport& r);
Json to_json(const SingularLimitReport& r);
Json to_json(const SemicontinuityReport& r);
Json to_json(const RegularityProxy& r);
Json to_json(const RunConfig& c);

/// Pretty-printed with sorted keys and a trailing newline.
std::string dump(const Json& j);

}  // namespace bresse
