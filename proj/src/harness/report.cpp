#include <algorithm>
#include <fstream>
#include <sstream>

#include "atomlab/error.hpp"
#include "atomlab/harness.hpp"
#include "atomlab/io.hpp"

namespace atomlab {

std::array<double, 3> ratio_stats(std::vector<double> xs) {
  if (xs.empty()) return {0.0, 0.0, 0.0};
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  const double med = n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
  return {xs.front(), med, xs.back()};
}

bool Report::pass() const {
  return std::all_of(rows.begin(), rows.end(), [](const ExperimentRow& r) { return r.pass; });
}

nlohmann::json report_json(const Report& report, bool include_timing) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"experiment", r.experiment},
                    {"suite", r.suite},
                    {"params", params_json(r.params)},
                    {"ratio_min", real_json(r.ratio_min)},
                    {"ratio_med", real_json(r.ratio_med)},
                    {"ratio_max", real_json(r.ratio_max)},
                    {"pass", r.pass},
                    {"detail", r.detail}});
  }
  nlohmann::json j{{"schema", "atomlab-report/1"},
                   {"seed", report.seed},
                   {"pass", report.pass()},
                   {"experiments", rows},
                   {"constants", report.constants}};
  if (include_timing) j["wall_clock_s"] = report.wall_clock_s;
  return j;
}

namespace {

const char* kCsvHeader = "experiment,s,p,q,K,L,ratio_min,ratio_med,ratio_max,pass";

std::string csv_name(const std::string& s) {
  std::string out = s;
  std::replace(out.begin(), out.end(), ',', ';');
  return out;
}

double csv_real(const std::string& s) {
  try {
    return json_real(nlohmann::json(s));
  } catch (const ConfigError&) {
    throw ConfigError("bad number '" + s + "' in report CSV");
  }
}

}  // namespace

std::string report_csv(const Report& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << csv_name(r.experiment) << ',' << format_real(r.params.s) << ',' << format_real(r.params.p) << ','
        << format_real(r.params.q) << ',' << format_real(r.params.K) << ',' << format_real(r.params.L) << ','
        << format_real(r.ratio_min) << ',' << format_real(r.ratio_med) << ',' << format_real(r.ratio_max) << ','
        << (r.pass ? "true" : "false") << '\n';
  }
  return out.str();
}

std::vector<ExperimentRow> parse_report_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ConfigError("report CSV lacks the expected header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw ConfigError("report CSV row has " + std::to_string(f.size()) + " fields");
    ExperimentRow r;
    r.experiment = f[0];
    r.params.s = csv_real(f[1]);
    r.params.p = csv_real(f[2]);
    r.params.q = csv_real(f[3]);
    r.params.K = csv_real(f[4]);
    r.params.L = csv_real(f[5]);
    r.ratio_min = csv_real(f[6]);
    r.ratio_med = csv_real(f[7]);
    r.ratio_max = csv_real(f[8]);
    if (f[9] != "true" && f[9] != "false") throw ConfigError("pass column must be true or false");
    r.pass = f[9] == "true";
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string gnuplot_script(const std::string& csv_name_) {
  std::ostringstream out;
  out << "# ratio ranges per experiment\n"
      << "set datafile separator ','\n"
      << "set terminal pngcairo size 1200,600\n"
      << "set output 'report.png'\n"
      << "set logscale y\n"
      << "set xtics rotate by -60 font ',7'\n"
      << "set ylabel 'ratio'\n"
      << "plot '" << csv_name_ << "' every ::1 using 0:8:7:9:xtic(1) with yerrorbars title 'min/med/max'\n";
  return out.str();
}

void emit_tables(const Report& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory '" + dir.string() + "': " + ec.message());
  auto write = [&](const std::string& name, const std::string& body) {
    std::ofstream out(dir / name);
    if (!out) throw ConfigError("cannot write '" + (dir / name).string() + "'");
    out << body;
    if (!out) throw ConfigError("write to '" + (dir / name).string() + "' failed");
  };
  write("report.json", report_json(report).dump(2) + "\n");
  write("report.csv", report_csv(report));
  write("report.gp", gnuplot_script("report.csv"));
}

}  // namespace atomlab
