#pragma once

// Experiment configuration, deterministic corpora, the check suites
// and report emission (JSON "atomlab-report/1", CSV, gnuplot script).

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "atomlab/grid.hpp"
#include "atomlab/spaces.hpp"

namespace atomlab {

struct GridSpec {
  int n = 1;
  int J = 10;
  double period = 1.0;
};

struct CorpusSpec {
  std::string family = "trig";  // trig | bumps | atoms
  int count = 30;
  double decay = 2.0;  // spectral decay exponent of the trig family
  int band = 64;       // highest mode of the trig family
};

struct ExperimentConfig {
  std::uint64_t seed = 20240601;
  GridSpec grid;
  std::vector<SpaceParams> spaces;  // empty: each suite uses its own defaults
  CorpusSpec corpus;
  std::string engine = "both";  // fourier | means | both
  std::vector<std::string> suites;
  std::map<std::string, double> thresholds;  // overrides of the suite defaults

  double threshold(const std::string& key, double fallback) const;
};

/// Throws ConfigError on malformed or out-of-range entries.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json config_json(const ExperimentConfig& config);

/// Names accepted in ExperimentConfig::suites.
const std::vector<std::string>& suite_names();

std::vector<SampledField> generate_corpus(const CorpusSpec& spec, const Grid& grid, std::uint64_t seed);

struct ExperimentRow {
  std::string experiment;
  SpaceParams params;
  double ratio_min = 0.0;
  double ratio_med = 0.0;
  double ratio_max = 0.0;
  bool pass = false;
  std::string suite;
  nlohmann::json detail = nlohmann::json::object();
};

/// min, median, max of a nonempty sample (all 0 when empty).
std::array<double, 3> ratio_stats(std::vector<double> xs);

struct Report {
  std::uint64_t seed = 0;
  std::vector<ExperimentRow> rows;
  nlohmann::json constants = nlohmann::json::object();
  double wall_clock_s = 0.0;

  bool pass() const;
};

/// Runs the configured suites in declaration order. Engine errors are
/// rethrown with the failing suite name prefixed.
Report run_experiment(const ExperimentConfig& config);
std::vector<ExperimentRow> run_suite(const std::string& name, const ExperimentConfig& config);

nlohmann::json report_json(const Report& report, bool include_timing = true);
std::string report_csv(const Report& report);
/// Parses report_csv output back into rows (experiment, params, stats, pass).
std::vector<ExperimentRow> parse_report_csv(const std::string& text);
std::string gnuplot_script(const std::string& csv_name);

/// Writes report.json, report.csv and report.gp into dir.
void emit_tables(const Report& report, const std::filesystem::path& dir);

}  // namespace atomlab
