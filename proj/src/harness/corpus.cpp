#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "atomlab/atoms.hpp"
#include "atomlab/error.hpp"
#include "atomlab/fft.hpp"
#include "atomlab/harness.hpp"
#include "atomlab/io.hpp"
#include "atomlab/rng.hpp"

namespace atomlab {

double ExperimentConfig::threshold(const std::string& key, double fallback) const {
  const auto it = thresholds.find(key);
  return it == thresholds.end() ? fallback : it->second;
}

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{
      "norm-equivalence", "resolution", "holder-besov", "identities",     "momenter",  "dilation",
      "synthesis",        "convergence", "multiplier",  "diffeomorphism", "transport", "ordering"};
  return names;
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  check_keys(j, {"seed", "grid", "spaces", "corpus", "engine", "suites", "thresholds"}, "configuration");
  ExperimentConfig c;
  try {
    if (j.contains("seed")) {
      if (!j["seed"].is_number_integer()) throw ConfigError("seed must be an integer");
      c.seed = j["seed"].get<std::uint64_t>();
    }
    if (j.contains("grid")) {
      const auto& g = j["grid"];
      check_keys(g, {"n", "J", "period"}, "grid");
      if (g.contains("n")) c.grid.n = g["n"].get<int>();
      if (g.contains("J")) c.grid.J = g["J"].get<int>();
      if (g.contains("period")) c.grid.period = json_real(g["period"]);
      try {
        (void)make_grid(c.grid.n, c.grid.J, c.grid.period);
      } catch (const BoundsError& e) {
        throw ConfigError(std::string("invalid grid: ") + e.what());
      }
    }
    if (j.contains("spaces")) {
      for (const auto& s : j["spaces"]) {
        nlohmann::json sj = s;
        if (!sj.contains("n")) sj["n"] = c.grid.n;
        c.spaces.push_back(params_from_json(sj));
      }
    }
    if (j.contains("corpus")) {
      const auto& k = j["corpus"];
      check_keys(k, {"family", "count", "decay", "band"}, "corpus");
      if (k.contains("family")) c.corpus.family = k["family"].get<std::string>();
      if (k.contains("count")) c.corpus.count = k["count"].get<int>();
      if (k.contains("decay")) c.corpus.decay = json_real(k["decay"]);
      if (k.contains("band")) c.corpus.band = k["band"].get<int>();
      if (c.corpus.family != "trig" && c.corpus.family != "bumps" && c.corpus.family != "atoms")
        throw ConfigError("corpus family must be trig, bumps or atoms");
      if (c.corpus.count < 0) throw ConfigError("corpus count must be nonnegative");
      if (c.corpus.band < 1 || static_cast<std::size_t>(c.corpus.band) >= (std::size_t{1} << c.grid.J) / 2)
        throw ConfigError("corpus band must lie in [1, 2^J/2)");
    }
    if (j.contains("engine")) {
      c.engine = j["engine"].get<std::string>();
      if (c.engine != "fourier" && c.engine != "means" && c.engine != "both")
        throw ConfigError("engine must be fourier, means or both");
    }
    if (j.contains("suites")) {
      for (const auto& s : j["suites"]) {
        const auto name = s.get<std::string>();
        const auto& known = suite_names();
        if (std::find(known.begin(), known.end(), name) == known.end())
          throw ConfigError("unknown suite '" + name + "'");
        c.suites.push_back(name);
      }
    }
    if (j.contains("thresholds")) {
      for (const auto& [key, value] : j["thresholds"].items()) {
        const double v = json_real(value);
        if (!(v > 0.0)) throw ConfigError("threshold '" + key + "' must be positive");
        c.thresholds[key] = v;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration '" + path.string() + "'");
  try {
    return parse_config(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("configuration '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

nlohmann::json config_json(const ExperimentConfig& c) {
  nlohmann::json spaces = nlohmann::json::array();
  for (const auto& s : c.spaces) spaces.push_back(params_json(s));
  nlohmann::json th = nlohmann::json::object();
  for (const auto& [k, v] : c.thresholds) th[k] = real_json(v);
  return {{"seed", c.seed},
          {"grid", {{"n", c.grid.n}, {"J", c.grid.J}, {"period", c.grid.period}}},
          {"spaces", spaces},
          {"corpus",
           {{"family", c.corpus.family}, {"count", c.corpus.count}, {"decay", c.corpus.decay}, {"band", c.corpus.band}}},
          {"engine", c.engine},
          {"suites", c.suites},
          {"thresholds", th}};
}

namespace {

SampledField trig_field(const Grid& g, Rng& rng, double decay, int band) {
  const std::size_t N = g.per_axis();
  std::vector<cplx> coeffs(g.size(), cplx{0.0, 0.0});
  for (std::size_t k = 0; k < g.size(); ++k) {
    const auto [k0, k1] = g.axis_index(k);
    const long m0 = fft::signed_mode(k0, N);
    const long m1 = g.dim() == 2 ? fft::signed_mode(k1, N) : 0;
    if (std::max(std::abs(m0), std::abs(m1)) > band) continue;
    const double r = std::hypot(static_cast<double>(m0), static_cast<double>(m1));
    coeffs[k] = rng.complex_normal() * std::pow(1.0 + r, -decay);
  }
  SampledField f(g, fft::inverse(coeffs, g.dim(), N));
  for (auto& v : f.values) v = {v.real(), 0.0};
  return f;
}

SampledField bump_field(const Grid& g, Rng& rng) {
  const long count = rng.integer(1, 3);
  SampledField f(g);
  for (long b = 0; b < count; ++b) {
    const Point c{rng.uniform(0.0, g.period()), g.dim() == 2 ? rng.uniform(0.0, g.period()) : 0.0};
    const double radius = rng.uniform(0.05, 0.2) * g.period();
    const double amp = rng.normal();
    for (std::size_t i = 0; i < g.size(); ++i) {
      const Point x = g.node(i);
      const double d0 = wrap_offset(x[0] - c[0], g.period());
      const double d1 = g.dim() == 2 ? wrap_offset(x[1] - c[1], g.period()) : 0.0;
      const double t = std::hypot(d0, d1) / radius;
      const double u = 1.0 - t * t;
      if (u > 2e-3) f.values[i] += amp * std::exp(-1.0 / u);
    }
  }
  return f;
}

SampledField atom_field(const Grid& g, Rng& rng) {
  const SpaceParams params{0.5, 2.0, 2.0, g.dim(), 1.0, 1.0, 2.0};
  CoeffArray lambda{g.dim(), {}};
  const int top = std::min(4, g.depth() - 3);
  for (int v = 0; v <= top; ++v) {
    const long count = 1L << v;
    for (int k = 0; k < 3; ++k)
      lambda.set(v, {rng.integer(0, count - 1), g.dim() == 2 ? rng.integer(0, count - 1) : 0}, rng.normal());
  }
  auto factory = [&g, params](int level, std::array<long, 2> m) {
    return make_atom(g, level, m, params, AtomTemplate::oscillating, 1);
  };
  SampledField f = synthesize(g, lambda, factory, SynthesisMode::lenient).field;
  return f;
}

}  // namespace

std::vector<SampledField> generate_corpus(const CorpusSpec& spec, const Grid& grid, std::uint64_t seed) {
  Rng root(seed);
  std::vector<SampledField> out;
  out.reserve(static_cast<std::size_t>(std::max(0, spec.count)));
  for (int i = 0; i < spec.count; ++i) {
    Rng rng = root.split();
    if (spec.family == "trig") {
      out.push_back(trig_field(grid, rng, spec.decay, spec.band));
    } else if (spec.family == "bumps") {
      out.push_back(bump_field(grid, rng));
    } else if (spec.family == "atoms") {
      out.push_back(atom_field(grid, rng));
    } else {
      throw ConfigError("unknown corpus family '" + spec.family + "'");
    }
  }
  return out;
}

}  // namespace atomlab
