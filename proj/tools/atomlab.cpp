// atomlab command line: one subcommand per module operation plus `suite`.
// Exit codes: 0 pass, 1 threshold fail, 2 config error, 3 numeric error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "atomlab/atoms.hpp"
#include "atomlab/engine.hpp"
#include "atomlab/error.hpp"
#include "atomlab/harness.hpp"
#include "atomlab/io.hpp"
#include "atomlab/operators.hpp"

namespace fs = std::filesystem;
using namespace atomlab;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string grid;
  std::string space;
  std::string engine;
  std::string out;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)");
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--grid", c.grid, "n,J");
  cmd->add_option("--space", c.space, "s,p,q[,K[,L[,d]]]");
  cmd->add_option("--engine", c.engine, "fourier | means | both");
  cmd->add_option("--out", c.out, "output directory");
}

ExperimentConfig base_config(const Common& c) {
  ExperimentConfig cfg = c.config.empty() ? ExperimentConfig{} : load_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (!c.grid.empty()) {
    char comma = 0;
    std::istringstream in(c.grid);
    if (!(in >> cfg.grid.n >> comma >> cfg.grid.J) || comma != ',' || !in.eof())
      throw ConfigError("--grid expects n,J: " + c.grid);
  }
  if (!c.engine.empty()) cfg.engine = c.engine;
  if (cfg.engine != "both") (void)parse_engine(cfg.engine);
  return cfg;
}

Grid grid_of(const ExperimentConfig& cfg) { return make_grid(cfg.grid.n, cfg.grid.J, cfg.grid.period); }

SpaceParams space_of(const Common& c, const ExperimentConfig& cfg, int n) {
  if (!c.space.empty()) return parse_space(c.space, n);
  if (!cfg.spaces.empty()) return cfg.spaces.front();
  return SpaceParams{0.5, 2.0, 2.0, n, 1.0, 1.0, 2.0};
}

fs::path out_dir(const Common& c) {
  const fs::path dir = c.out.empty() ? fs::path(".") : fs::path(c.out);
  fs::create_directories(dir);
  return dir;
}

std::vector<EngineKind> engines_of(const ExperimentConfig& cfg) {
  if (cfg.engine == "both") return {EngineKind::fourier, EngineKind::means};
  return {parse_engine(cfg.engine)};
}

NormEngine make_engine(EngineKind kind, const Grid& g, ResolutionKind res = ResolutionKind::standard) {
  return kind == EngineKind::fourier ? NormEngine::fourier(g, res) : NormEngine::means(g);
}

std::array<long, 2> parse_index(const std::string& text) {
  std::array<long, 2> idx{0, 0};
  std::istringstream in(text);
  char comma = 0;
  if (!(in >> idx[0])) throw ConfigError("bad index: " + text);
  if (in >> comma) {
    if (comma != ',' || !(in >> idx[1])) throw ConfigError("bad index: " + text);
  }
  return idx;
}

AtomTemplate parse_template(const std::string& name) {
  if (name == "bump") return AtomTemplate::bump;
  if (name == "oscillating") return AtomTemplate::oscillating;
  throw ConfigError("unknown atom template: " + name);
}

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"atomlab: atomic decompositions and norm engines on the torus"};
  app.require_subcommand(1);
  int status = 0;

  Common c_norm, c_val, c_syn, c_an, c_mul, c_dif, c_tr, c_suite;

  std::string field_path, resolution = "standard";
  auto* norm = app.add_subcommand("norm", "Besov and Triebel-Lizorkin norms of a field");
  add_common(norm, c_norm);
  norm->add_option("--field", field_path, "field file")->required();
  norm->add_option("--resolution", resolution, "standard | perturbed");

  int level = 0;
  std::string index = "0";
  auto* val = app.add_subcommand("validate-atom", "certificate of a sampled atom");
  add_common(val, c_val);
  val->add_option("--field", field_path, "field file")->required();
  val->add_option("--level", level, "dyadic level nu")->required();
  val->add_option("--index", index, "m as i0[,i1]");

  std::string coeffs_path, shape = "oscillating";
  int moments = 1;
  auto* syn = app.add_subcommand("synthesize", "sum of coefficients times generated atoms");
  add_common(syn, c_syn);
  syn->add_option("--coeffs", coeffs_path, "coefficient file")->required();
  syn->add_option("--template", shape, "bump | oscillating");
  syn->add_option("--moments", moments, "vanishing moment order of the atoms");

  int depth = -1;
  double tol = 1e-6;
  auto* an = app.add_subcommand("analyze", "atomic coefficients of a field");
  add_common(an, c_an);
  an->add_option("--field", field_path, "field file")->required();
  an->add_option("--depth", depth, "finest level (default J-3)");
  an->add_option("--tol", tol, "resolved-band reconstruction threshold");

  std::string phi_path;
  double rho = 1.5;
  auto* mul = app.add_subcommand("multiply", "pointwise multiplier ratio");
  add_common(mul, c_mul);
  mul->add_option("--phi", phi_path, "multiplier field file")->required();
  mul->add_option("--field", field_path, "field file")->required();
  mul->add_option("--rho", rho, "Hoelder index of the multiplier");

  std::string kind = "perturbation";
  double alpha = 0.1, inverse_tol = 1e-10;
  std::vector<double> shift{0.0, 0.0};
  auto* dif = app.add_subcommand("diffeo", "build a torus diffeomorphism and its inverse");
  add_common(dif, c_dif);
  dif->add_option("--kind", kind, "identity | translation | perturbation");
  dif->add_option("--alpha", alpha, "perturbation amplitude");
  dif->add_option("--shift", shift, "translation vector")->expected(1, 2);
  dif->add_option("--inverse-tol", inverse_tol, "inverse residual threshold");

  int max_level = 5;
  auto* tr = app.add_subcommand("transport", "relocate generated atoms through a diffeomorphism");
  add_common(tr, c_tr);
  tr->add_option("--alpha", alpha, "perturbation amplitude");
  tr->add_option("--max-level", max_level, "finest atom level");

  std::vector<std::string> suites;
  bool no_timing = false;
  auto* suite = app.add_subcommand("suite", "run experiment suites and emit report tables");
  add_common(suite, c_suite);
  suite->add_option("names", suites, "suites to run (default: config list, else all)");
  suite->add_flag("--no-timing", no_timing, "omit wall-clock from report.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*norm) {
      const ExperimentConfig cfg = base_config(c_norm);
      const SampledField f = load_field(field_path);
      const SpaceParams sp = space_of(c_norm, cfg, f.grid.dim());
      const ResolutionKind res =
          resolution == "perturbed" ? ResolutionKind::perturbed
          : resolution == "standard" ? ResolutionKind::standard
                                     : throw ConfigError("unknown resolution: " + resolution);
      json out{{"params", params_json(sp)}};
      for (EngineKind k : engines_of(cfg)) {
        const NormEngine eng = make_engine(k, f.grid, res);
        json e{{"besov", real_json(eng.besov(f, sp))}};
        if (!std::isinf(sp.p)) e["tl"] = real_json(eng.tl(f, sp));
        out[engine_name(k)] = e;
      }
      print(out);
    } else if (*val) {
      const ExperimentConfig cfg = base_config(c_val);
      const SampledField f = load_field(field_path);
      const SpaceParams sp = space_of(c_val, cfg, f.grid.dim());
      const AtomSpec a{f, make_cube(level, parse_index(index), sp.d, f.grid.dim()), sp, nullptr};
      const AtomCertificate cert = validate_atom(a);
      print(certificate_json(cert));
      status = cert.pass ? 0 : 1;
    } else if (*syn) {
      const ExperimentConfig cfg = base_config(c_syn);
      const Grid g = grid_of(cfg);
      const SpaceParams sp = space_of(c_syn, cfg, g.dim());
      const CoeffArray lambda = load_coeffs(coeffs_path);
      const AtomTemplate t = parse_template(shape);
      const AtomFactory factory = [&](int lv, std::array<long, 2> m) { return make_atom(g, lv, m, sp, t, moments); };
      const Synthesis s = synthesize(g, lambda, factory, SynthesisMode::lenient);
      const fs::path dir = out_dir(c_syn);
      save_field(dir / "field.txt", s.field);
      bool all = true;
      for (const auto& cert : s.certificates) all = all && cert.pass;
      json out{{"field", (dir / "field.txt").string()},
               {"atoms", s.certificates.size()},
               {"all_certificates_pass", all},
               {"b_norm", real_json(bpq_norm(lambda, sp.p, sp.q))}};
      if (!std::isinf(sp.p)) out["f_norm"] = real_json(fpq_norm(lambda, sp.p, sp.q, g));
      print(out);
      status = all ? 0 : 1;
    } else if (*an) {
      const ExperimentConfig cfg = base_config(c_an);
      const SampledField f = load_field(field_path);
      const SpaceParams sp = space_of(c_an, cfg, f.grid.dim());
      const KernelPair pair = build_mean_kernels(2, 0.5, f.grid);
      const Analysis a = analyze(f, depth < 0 ? f.grid.depth() - 3 : depth, pair, sp);
      const fs::path dir = out_dir(c_an);
      save_coeffs(dir / "coeffs.txt", a.coefficients);
      save_field(dir / "reconstruction.txt", a.reconstruction);
      print({{"coeffs", (dir / "coeffs.txt").string()},
             {"band_error", real_json(a.band_error)},
             {"resolved_fraction", real_json(a.resolved_fraction)},
             {"b_norm", real_json(bpq_norm(a.coefficients, sp.p, sp.q))}});
      status = a.band_error < tol ? 0 : 1;
    } else if (*mul) {
      const ExperimentConfig cfg = base_config(c_mul);
      const SampledField phi = load_field(phi_path);
      const SampledField f = load_field(field_path);
      const SpaceParams sp = space_of(c_mul, cfg, f.grid.dim());
      json out{{"params", params_json(sp)}, {"rho", rho}};
      for (EngineKind k : engines_of(cfg)) {
        const MultiplyReport r = multiply(phi, f, sp, rho, make_engine(k, f.grid)).report;
        json e{{"phi_norm", real_json(r.phi_norm)},
               {"ratio_besov", real_json(r.ratio_besov)},
               {"rho_ok_besov", r.rho_ok_besov}};
        if (r.ratio_tl) e["ratio_tl"] = real_json(*r.ratio_tl), e["rho_ok_tl"] = r.rho_ok_tl;
        out[engine_name(k)] = e;
      }
      print(out);
    } else if (*dif) {
      const ExperimentConfig cfg = base_config(c_dif);
      const Grid g = grid_of(cfg);
      const Point s{shift[0], shift.size() > 1 ? shift[1] : 0.0};
      const Diffeo phi = make_diffeo(g, parse_diffeo_kind(kind), alpha, std::nullopt, s);
      const fs::path dir = out_dir(c_dif);
      std::ofstream file(dir / "diffeo.txt");
      write_diffeo(file, phi);
      if (!file) throw ConfigError("cannot write " + (dir / "diffeo.txt").string());
      print({{"diffeo", (dir / "diffeo.txt").string()},
             {"c1", real_json(phi.c1)},
             {"c2", real_json(phi.c2)},
             {"jacobian_bound", real_json(phi.jacobian_bound)},
             {"holder_budget", real_json(phi.holder_budget)},
             {"inverse_residual", real_json(phi.inverse_residual)},
             {"bisection_fallbacks", phi.bisection_fallbacks}});
      status = phi.inverse_residual <= inverse_tol ? 0 : 1;
    } else if (*tr) {
      const ExperimentConfig cfg = base_config(c_tr);
      const Grid g = grid_of(cfg);
      const SpaceParams sp = space_of(c_tr, cfg, g.dim());
      std::vector<AtomSpec> atoms;
      for (int lv = 0; lv <= std::min(max_level, g.depth() - 3); ++lv) {
        const long count = 1L << lv;
        for (long i0 = 0; i0 < count; ++i0)
          for (long i1 = 0; i1 < (g.dim() == 2 ? count : 1); ++i1)
            atoms.push_back(make_atom(g, lv, {i0, i1}, sp, AtomTemplate::oscillating, 1));
      }
      const Transported t = transport_atoms(atoms, make_diffeo(g, DiffeoKind::perturbation, alpha));
      print({{"atoms", atoms.size()},
             {"M", t.plan.M},
             {"d_prime", real_json(t.plan.d_prime)},
             {"injective", t.plan.injective},
             {"all_pass", t.all_pass},
             {"target_constant", real_json(t.target_constant)},
             {"L_route", t.L_route}});
      status = t.all_pass && t.plan.injective ? 0 : 1;
    } else if (*suite) {
      ExperimentConfig cfg = base_config(c_suite);
      if (!c_suite.space.empty()) cfg.spaces = {parse_space(c_suite.space, cfg.grid.n)};
      if (!suites.empty()) cfg.suites = suites;
      if (cfg.suites.empty()) cfg.suites = suite_names();
      const Report report = run_experiment(cfg);
      const fs::path dir = out_dir(c_suite);
      emit_tables(report, dir);
      if (no_timing) {
        std::ofstream(dir / "report.json") << report_json(report, false).dump(2) << '\n';
      }
      for (const auto& row : report.rows)
        std::cout << (row.pass ? "PASS " : "FAIL ") << row.experiment << "  [" << format_real(row.ratio_min) << ", "
                  << format_real(row.ratio_med) << ", " << format_real(row.ratio_max) << "]\n";
      status = report.pass() ? 0 : 1;
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const BoundsError& e) {
    std::cerr << "bounds error: " << e.what() << '\n';
    return 2;
  } catch (const HypothesisError& e) {
    std::cerr << "hypothesis error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return status;
}
