#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"
#include "atomlab/harness.hpp"

using namespace atomlab;
using nlohmann::json;

namespace {

ExperimentConfig small_config(std::vector<std::string> suites) {
  ExperimentConfig c;
  c.seed = 11;
  c.grid = {1, 8, 1.0};
  c.corpus.count = 6;
  c.corpus.band = 16;
  c.suites = std::move(suites);
  return c;
}

double top_band_energy(const SampledField& f, long cutoff) {
  const auto c = fft::forward(f.values, f.grid.dim(), f.grid.per_axis());
  const std::size_t N = f.grid.per_axis();
  double top = 0.0, all = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    const auto [k0, k1] = f.grid.axis_index(k);
    const long m = std::max(std::abs(fft::signed_mode(k0, N)),
                            f.grid.dim() == 2 ? std::abs(fft::signed_mode(k1, N)) : 0L);
    all += std::norm(c[k]);
    if (m >= cutoff) top += std::norm(c[k]);
  }
  return top / all;
}

}  // namespace

TEST_CASE("corpus is deterministic in the seed") {
  const Grid g(1, 9);
  for (const std::string family : {"trig", "bumps", "atoms"}) {
    CorpusSpec spec;
    spec.family = family;
    spec.count = 4;
    const auto a = generate_corpus(spec, g, 42);
    const auto b = generate_corpus(spec, g, 42);
    const auto c = generate_corpus(spec, g, 43);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].values == b[i].values);
    CHECK(a[0].values != c[0].values);
  }
  CorpusSpec none;
  none.count = 0;
  CHECK(generate_corpus(none, g, 1).empty());
}

TEST_CASE("trig corpus is band-limited") {
  for (int n : {1, 2}) {
    const Grid g(n, n == 1 ? 10 : 6);
    CorpusSpec spec;
    spec.count = 5;
    spec.band = n == 1 ? 64 : 8;
    for (const auto& f : generate_corpus(spec, g, 5)) {
      CHECK(top_band_energy(f, static_cast<long>(g.per_axis() / 4)) < 1e-3);
      for (const auto& v : f.values) CHECK(v.imag() == 0.0);
    }
  }
}

TEST_CASE("empty suite list gives an empty passing report") {
  const Report r = run_experiment(small_config({}));
  CHECK(r.rows.empty());
  CHECK(r.pass());
  const json j = report_json(r);
  CHECK(j["schema"] == "atomlab-report/1");
  CHECK(j["experiments"].empty());
  CHECK(report_csv(r) == "experiment,s,p,q,K,L,ratio_min,ratio_med,ratio_max,pass\n");
  CHECK(parse_report_csv(report_csv(r)).empty());
}

TEST_CASE("reruns are byte-identical without timing") {
  const auto cfg = small_config({"identities", "convergence"});
  const Report a = run_experiment(cfg);
  const Report b = run_experiment(cfg);
  REQUIRE_FALSE(a.rows.empty());
  CHECK(report_json(a, false).dump() == report_json(b, false).dump());
  CHECK_FALSE(report_json(a, false).contains("wall_clock_s"));
  CHECK(report_json(a).contains("wall_clock_s"));
  for (const auto& row : a.rows) CHECK(row.suite == (row.suite == "identities" ? "identities" : "convergence"));
}

TEST_CASE("report csv round trip") {
  Report r;
  ExperimentRow row;
  row.experiment = "norm, ratio";
  row.params = SpaceParams{0.5, kInf, 1.0, 1, 1.0, 2.0, 2.0};
  row.ratio_min = 0.125;
  row.ratio_med = 1.0 / 3.0;
  row.ratio_max = 7.5;
  row.pass = true;
  r.rows.push_back(row);
  const std::string csv = report_csv(r);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  const auto back = parse_report_csv(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0].experiment == "norm; ratio");
  CHECK(std::isinf(back[0].params.p));
  CHECK(back[0].params.L == 2.0);
  CHECK(back[0].ratio_med == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(back[0].pass);
  CHECK_THROWS_AS(parse_report_csv("wrong header\n"), ConfigError);
  CHECK_THROWS_AS(parse_report_csv(csv + "a,1,2\n"), ConfigError);
}

TEST_CASE("emit_tables writes the three artifacts") {
  const auto dir = std::filesystem::temp_directory_path() / "atomlab_emit_test";
  std::filesystem::remove_all(dir);
  const Report r = run_experiment(small_config({"identities"}));
  emit_tables(r, dir);
  for (const char* name : {"report.json", "report.csv", "report.gp"}) CHECK(std::filesystem::exists(dir / name));
  std::ifstream in(dir / "report.json");
  CHECK(json::parse(in)["seed"] == 11);
  std::filesystem::remove_all(dir);
}

TEST_CASE("parse_config validation") {
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
  CHECK_THROWS_AS(parse_config({{"sed", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"seed", 1.5}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"engine", "wavelet"}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"suites", {"norm-equivalence", "nope"}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"thresholds", {{"resolution.ratio_bound", 0.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"thresholds", {{"resolution.ratio_bound", -3}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"corpus", {{"count", -1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"corpus", {{"family", "noise"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config({{"grid", {{"n", 3}}}}), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
  CHECK_THROWS_AS(run_suite("nope", ExperimentConfig{}), ConfigError);
}

TEST_CASE("config json round trip") {
  const json j = {{"seed", 99},
                  {"grid", {{"n", 2}, {"J", 6}, {"period", 2.0}}},
                  {"spaces", {{{"s", 0.5}, {"p", "inf"}, {"q", 1}, {"n", 2}, {"K", 1}, {"L", 0}, {"d", 2}}}},
                  {"corpus", {{"family", "bumps"}, {"count", 3}, {"decay", 1.5}, {"band", 4}}},
                  {"engine", "means"},
                  {"suites", {"resolution", "identities"}},
                  {"thresholds", {{"resolution.ratio_bound", 4.0}}}};
  const ExperimentConfig c = parse_config(j);
  CHECK(c.seed == 99);
  CHECK(c.grid.n == 2);
  REQUIRE(c.spaces.size() == 1);
  CHECK(std::isinf(c.spaces[0].p));
  CHECK(c.threshold("resolution.ratio_bound", 8.0) == 4.0);
  CHECK(c.threshold("identities.rel_tol", 1e-12) == 1e-12);
  const ExperimentConfig again = parse_config(config_json(c));
  CHECK(config_json(again) == config_json(c));
  CHECK(again.suites == c.suites);
  CHECK(again.spaces == c.spaces);
}

TEST_CASE("suite names cover every acceptance suite") {
  const auto& names = suite_names();
  for (const char* n : {"norm-equivalence", "resolution", "holder-besov", "identities", "momenter", "dilation",
                        "synthesis", "convergence", "multiplier", "diffeomorphism", "transport", "ordering"})
    CHECK(std::find(names.begin(), names.end(), n) != names.end());
}
