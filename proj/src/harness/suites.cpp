#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>

#include "atomlab/atoms.hpp"
#include "atomlab/engine.hpp"
#include "atomlab/error.hpp"
#include "atomlab/harness.hpp"
#include "atomlab/io.hpp"
#include "atomlab/operators.hpp"
#include "atomlab/parallel.hpp"
#include "atomlab/rng.hpp"

namespace atomlab {
namespace {

// Default thresholds; ExperimentConfig::thresholds overrides by key.
const std::map<std::string, double>& default_thresholds() {
  static const std::map<std::string, double> t{
      {"norm_equivalence.ratio_bound", 50.0}, {"norm_equivalence.spread", 100.0},
      {"resolution.ratio_bound", 8.0},        {"holder_besov.ratio_bound", 10.0},
      {"identities.rel_tol", 1e-12},          {"identities.homogeneity_tol", 1e-13},
      {"momenter.spread", 2.0},               {"momenter.depth", 14.0},
      {"dilation.factor", 1.05},              {"dilation.depth", 14.0},
      {"synthesis.bound", 100.0},             {"synthesis.reconstruction", 1e-6},
      {"synthesis.round_trip", 100.0},        {"convergence.factor", 10.0},
      {"multiplier.bound", 50.0},             {"multiplier.atom_factor", 4.0},
      {"multiplier.identity_tol", 1e-12},     {"diffeomorphism.compose_bound", 10.0},
      {"diffeomorphism.box_slack", 1.1},      {"diffeomorphism.jacobian_slack", 1.05},
      {"diffeomorphism.sup_tol", 1e-10},      {"diffeomorphism.holder_bound", 10.0},
      {"diffeomorphism.inverse_tol", 1e-10},  {"transport.max_families", 4.0},
      {"transport.spread", 10.0}};
  return t;
}

double th(const ExperimentConfig& c, const std::string& key) {
  return c.threshold(key, default_thresholds().at(key));
}

Grid suite_grid(const ExperimentConfig& c, int depth = -1) {
  const int cap = c.grid.n == 1 ? kMaxDepth1D : kMaxDepth2D;
  return make_grid(c.grid.n, depth < 0 ? c.grid.J : std::min(depth, cap), c.grid.period);
}

std::string space_tag(const SpaceParams& p) {
  std::ostringstream s;
  s << "s=" << format_real(p.s) << ";p=" << format_real(p.p) << ";q=" << format_real(p.q);
  return s.str();
}

SpaceParams space(double s, double p, double q, int n, double K = 0.0, double L = 0.0, double d = 2.0) {
  return SpaceParams{s, p, q, n, K, L, d};
}

std::vector<SpaceParams> spaces_or(const ExperimentConfig& c, std::vector<SpaceParams> defaults) {
  return c.spaces.empty() ? defaults : c.spaces;
}

ExperimentRow row(const std::string& suite, const std::string& name, const SpaceParams& params,
                  const std::vector<double>& ratios, bool pass, nlohmann::json detail = nlohmann::json::object()) {
  const auto st = ratio_stats(ratios);
  ExperimentRow r;
  r.suite = suite;
  r.experiment = suite + "/" + name;
  r.params = params;
  r.ratio_min = st[0];
  r.ratio_med = st[1];
  r.ratio_max = st[2];
  r.pass = pass;
  r.detail = std::move(detail);
  return r;
}

std::vector<SampledField> corpus(const ExperimentConfig& c, const Grid& g, int count, std::uint64_t salt) {
  CorpusSpec spec = c.corpus;
  spec.count = count;
  spec.band = std::min<int>(spec.band, static_cast<int>(g.per_axis() / 2) - 1);
  return generate_corpus(spec, g, c.seed ^ (salt * 0x9e3779b97f4a7c15ULL));
}

std::vector<EngineKind> engines(const ExperimentConfig& c) {
  if (c.engine == "both") return {EngineKind::fourier, EngineKind::means};
  return {parse_engine(c.engine)};
}

NormEngine engine_of(EngineKind k, const Grid& g) {
  return k == EngineKind::fourier ? NormEngine::fourier(g) : NormEngine::means(g);
}

double max_of(const std::vector<double>& xs) { return xs.empty() ? 0.0 : *std::max_element(xs.begin(), xs.end()); }
double min_of(const std::vector<double>& xs) { return xs.empty() ? 0.0 : *std::min_element(xs.begin(), xs.end()); }

// ------------------------------------------------------------ norm engines

std::vector<ExperimentRow> suite_norm_equivalence(const ExperimentConfig& c) {
  const std::string suite = "norm-equivalence";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const auto fields = corpus(c, g, c.corpus.count, 1);
  const NormEngine fourier = NormEngine::fourier(g);
  const NormEngine means = NormEngine::means(g);
  const double bound = th(c, "norm_equivalence.ratio_bound");
  const double spread = th(c, "norm_equivalence.spread");
  std::vector<ExperimentRow> rows;
  for (const auto& sp : spaces_or(c, {space(0.5, 2, 2, n), space(1.2, 3, 1.5, n), space(0.3, 1, kInf, n)})) {
    for (int tl = 0; tl < (std::isinf(sp.p) || std::isinf(sp.q) ? 1 : 2); ++tl) {
      std::vector<double> ratios(fields.size());
      parallel_for(fields.size(), [&](std::size_t i) {
        const double a = tl ? fourier.tl(fields[i], sp) : fourier.besov(fields[i], sp);
        const double b = tl ? means.tl(fields[i], sp) : means.besov(fields[i], sp);
        ratios[i] = a / b;
      });
      const double lo = min_of(ratios), hi = max_of(ratios);
      const bool ok = !ratios.empty() && lo >= 1.0 / bound && hi <= bound && hi / lo <= spread;
      rows.push_back(row(suite, std::string(tl ? "tl/" : "besov/") + space_tag(sp), sp, ratios, ok,
                         {{"spread", hi / lo}, {"fields", fields.size()}}));
    }
  }
  return rows;
}

std::vector<ExperimentRow> suite_resolution(const ExperimentConfig& c) {
  const std::string suite = "resolution";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const auto fields = corpus(c, g, c.corpus.count, 1);
  const NormEngine standard = NormEngine::fourier(g, ResolutionKind::standard);
  const NormEngine perturbed = NormEngine::fourier(g, ResolutionKind::perturbed);
  const double bound = th(c, "resolution.ratio_bound");
  std::vector<ExperimentRow> rows;
  for (const auto& sp : spaces_or(c, {space(0.5, 2, 2, n), space(1.2, 3, 1.5, n), space(0.3, 1, kInf, n)})) {
    for (int tl = 0; tl < (std::isinf(sp.p) || std::isinf(sp.q) ? 1 : 2); ++tl) {
      std::vector<double> ratios(fields.size());
      parallel_for(fields.size(), [&](std::size_t i) {
        ratios[i] = tl ? standard.tl(fields[i], sp) / perturbed.tl(fields[i], sp)
                       : standard.besov(fields[i], sp) / perturbed.besov(fields[i], sp);
      });
      const bool ok = !ratios.empty() && min_of(ratios) >= 1.0 / bound && max_of(ratios) <= bound;
      rows.push_back(row(suite, std::string(tl ? "tl/" : "besov/") + space_tag(sp), sp, ratios, ok));
    }
  }
  return rows;
}

std::vector<ExperimentRow> suite_holder_besov(const ExperimentConfig& c) {
  const std::string suite = "holder-besov";
  const Grid g = suite_grid(c);
  const auto fields = corpus(c, g, 20, 3);
  const NormEngine fourier = NormEngine::fourier(g);
  const SpaceParams sp = space(0.5, kInf, kInf, g.dim());
  std::vector<double> ratios(fields.size());
  parallel_for(fields.size(), [&](std::size_t i) {
    ratios[i] = holder_norm(fields[i], 0.5) / fourier.besov(fields[i], sp);
  });
  const double bound = th(c, "holder_besov.ratio_bound");
  const bool ok = !ratios.empty() && min_of(ratios) >= 1.0 / bound && max_of(ratios) <= bound;
  return {row(suite, "C0.5_vs_B0.5inf,inf", sp, ratios, ok)};
}

CoeffArray random_coeffs(Rng& rng, const Grid& g) {
  CoeffArray lambda{g.dim(), {}};
  const long terms = rng.integer(1, 20);
  for (long t = 0; t < terms; ++t) {
    const int level = static_cast<int>(rng.integer(0, g.depth() - 3));
    const long count = 1L << level;
    lambda.set(level, {rng.integer(0, count - 1), g.dim() == 2 ? rng.integer(0, count - 1) : 0},
               rng.complex_normal());
  }
  return lambda;
}

std::vector<ExperimentRow> suite_identities(const ExperimentConfig& c) {
  const std::string suite = "identities";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  Rng rng(c.seed ^ 0x4444);
  const double rel_tol = th(c, "identities.rel_tol");
  const double hom_tol = th(c, "identities.homogeneity_tol");
  const std::vector<double> ps{0.5, 1.0, 1.5, 2.0, 3.0};
  const std::vector<double> qs{0.5, 1.0, 2.0, 4.0};
  std::vector<CoeffArray> arrays;
  for (int i = 0; i < 50; ++i) arrays.push_back(random_coeffs(rng, g));

  std::vector<double> fb_err, mono;
  bool mono_ok = true;
  for (std::size_t i = 0; i < arrays.size(); ++i) {
    const double p = ps[i % ps.size()];
    const double b = bpq_norm(arrays[i], p, p);
    const double f = fpq_norm(arrays[i], p, p, g);
    fb_err.push_back(std::abs(f - b) / b);
    const double binf = bpq_norm(arrays[i], p, kInf);
    for (double q : qs) {
      const double bq = bpq_norm(arrays[i], p, q);
      mono.push_back(binf / bq);
      mono_ok = mono_ok && binf <= bq;
    }
  }
  std::vector<ExperimentRow> rows;
  rows.push_back(row(suite, "f_pp_equals_b_pp", space(0, 2, 2, n), fb_err, max_of(fb_err) < rel_tol));
  rows.push_back(row(suite, "b_pinf_le_b_pq", space(0, 2, kInf, n), mono, mono_ok));

  // Absolute homogeneity of every norm.
  const auto fields = corpus(c, g, 5, 4);
  const NormEngine fourier = NormEngine::fourier(g);
  const NormEngine means = NormEngine::means(g);
  const SpaceParams sp = space(0.5, 2, 2, n);
  const SpaceParams sp1 = space(0.3, 1, 1.5, n);
  std::map<std::string, std::vector<double>> err;
  const cplx factor{-1.7, 0.6};
  const double af = std::abs(factor);
  auto rel = [&](double scaled, double base) { return base > 0.0 ? std::abs(scaled - af * base) / (af * base) : 0.0; };
  for (const auto& f : fields) {
    const SampledField cf = factor * f;
    for (double p : {1.0, 2.0, kInf}) err["lp"].push_back(rel(lp_norm(cf, p), lp_norm(f, p)));
    for (double s : {0.5, 1.5}) err["holder"].push_back(rel(holder_norm(cf, s), holder_norm(f, s)));
    for (const auto* par : {&sp, &sp1}) {
      err["besov_fourier"].push_back(rel(fourier.besov(cf, *par), fourier.besov(f, *par)));
      err["tl_fourier"].push_back(rel(fourier.tl(cf, *par), fourier.tl(f, *par)));
      err["besov_means"].push_back(rel(means.besov(cf, *par), means.besov(f, *par)));
      err["tl_means"].push_back(rel(means.tl(cf, *par), means.tl(f, *par)));
    }
  }
  for (const auto& lambda : arrays) {
    CoeffArray scaled = lambda;
    for (auto& [k, v] : scaled.entries) v *= factor;
    err["bpq"].push_back(rel(bpq_norm(scaled, 1.5, 2.0), bpq_norm(lambda, 1.5, 2.0)));
    err["fpq"].push_back(rel(fpq_norm(scaled, 1.5, 2.0, g), fpq_norm(lambda, 1.5, 2.0, g)));
  }
  for (const auto& [name, e] : err)
    rows.push_back(row(suite, "homogeneity/" + name, sp, e, max_of(e) < hom_tol));
  return rows;
}

// ------------------------------------------------------------ atoms

std::vector<ExperimentRow> suite_momenter(const ExperimentConfig& c) {
  const std::string suite = "momenter";
  const Grid g = suite_grid(c, static_cast<int>(th(c, "momenter.depth")));
  const int n = g.dim();
  const KernelPair pair = build_mean_kernels(2, 0.5, g);
  const double bound = th(c, "momenter.spread");
  const int top = std::min(6, g.depth() - 3);
  std::vector<ExperimentRow> rows;
  for (double K : {0.5, 1.0, 2.0, 3.0}) {
    for (double L : {0.0, 1.0, 2.0}) {
      const SpaceParams sp = space(0.5, 2, 2, n, K, L);
      std::vector<AtomCertificate> certs(static_cast<std::size_t>(top + 1));
      parallel_for(certs.size(), [&](std::size_t j) {
        certs[j] = validate_atom(kernel_as_atom(pair, static_cast<int>(j), sp));
      });
      std::vector<double> constants;
      bool support = true;
      for (const auto& cert : certs) {
        constants.push_back(cert.max_constant());
        support = support && cert.C_support;
      }
      const double spread = max_of(constants) / min_of(constants);
      const bool ok = support && min_of(constants) > 0.0 && spread <= bound;
      rows.push_back(row(suite, "K=" + format_real(K) + ";L=" + format_real(L), sp, {spread}, ok,
                         {{"constants", constants}, {"depth", g.depth()}}));
    }
  }
  return rows;
}

std::array<long, 2> random_index(Rng& rng, int level, int n) {
  const long count = 1L << level;
  return {rng.integer(0, count - 1), n == 2 ? rng.integer(0, count - 1) : 0};
}

std::vector<ExperimentRow> suite_dilation(const ExperimentConfig& c) {
  const std::string suite = "dilation";
  const Grid g = suite_grid(c, static_cast<int>(th(c, "dilation.depth")));
  const int n = g.dim();
  const double factor = th(c, "dilation.factor");
  constexpr double floor = 1e-8;  // moment constants below this count as vanishing
  const SpaceParams sp = space(0.5, 2, 2, n, 1.0, 1.0);
  Rng rng(c.seed ^ 0x6666);
  struct Case {
    int level;
    std::array<long, 2> index;
    AtomTemplate shape;
    int moments;
  };
  std::vector<Case> cases;
  for (int i = 0; i < 10; ++i) {
    const int level = static_cast<int>(rng.integer(1, std::min(6, g.depth() - 3)));
    cases.push_back({level, random_index(rng, level, n), rng.integer(0, 1) ? AtomTemplate::oscillating : AtomTemplate::bump,
                     static_cast<int>(rng.integer(0, 2))});
  }
  std::vector<double> worst(cases.size() * 2, 0.0);
  std::vector<char> ok(cases.size() * 2, 0);
  parallel_for(cases.size(), [&](std::size_t i) {
    const Case& cs = cases[i];
    const AtomSpec a = make_atom(g, cs.level, cs.index, sp, cs.shape, cs.moments);
    const AtomCertificate in = validate_atom(a);
    const std::array<int, 2> js{1, cs.level};
    for (std::size_t t = 0; t < 2; ++t) {
      const AtomCertificate out = validate_atom(dilate_atom(a, js[t]));
      const auto r = [&](double o, double base) { return (o + floor) / (base + floor); };
      const double w = std::max({r(out.C_smooth, in.C_smooth), r(out.C_moment_poly, in.C_moment_poly),
                                 r(out.C_moment_rand, in.C_moment_rand)});
      worst[2 * i + t] = w;
      ok[2 * i + t] = out.C_support && w <= factor;
    }
  });
  const bool pass = std::all_of(ok.begin(), ok.end(), [](char v) { return v != 0; });
  return {row(suite, "dilate_j=1_and_j=nu", sp, worst, pass, {{"atoms", cases.size()}, {"depth", g.depth()}})};
}

// Memoized make_atom factory; safe to call concurrently.
class AtomCache {
 public:
  AtomCache(Grid g, SpaceParams params, AtomTemplate shape, int moments)
      : grid_(std::move(g)), params_(params), shape_(shape), moments_(moments) {}

  AtomSpec operator()(int level, std::array<long, 2> index) {
    const CoeffKey key = reduce_key(level, index, grid_.dim());
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    AtomSpec a = make_atom(grid_, key.level, key.index, params_, shape_, moments_);
    std::lock_guard lock(mutex_);
    return cache_.emplace(key, std::move(a)).first->second;
  }

  AtomFactory factory() {
    return [this](int level, std::array<long, 2> index) { return (*this)(level, index); };
  }

 private:
  Grid grid_;
  SpaceParams params_;
  AtomTemplate shape_;
  int moments_;
  std::mutex mutex_;
  std::map<CoeffKey, AtomSpec> cache_;
};

CoeffArray random_sequence(Rng& rng, const Grid& g, int top_level) {
  CoeffArray lambda{g.dim(), {}};
  for (int level = 0; level <= top_level; ++level) {
    const long cubes = 1L << (level * g.dim());
    const long terms = rng.integer(1, std::min<long>(4, cubes));
    for (long t = 0; t < terms; ++t) lambda.set(level, random_index(rng, level, g.dim()), rng.complex_normal());
  }
  return lambda;
}

std::vector<ExperimentRow> suite_synthesis(const ExperimentConfig& c) {
  const std::string suite = "synthesis";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const SpaceParams sp = space(0.5, 2, 2, n, 1.0, 1.0);
  const int top = std::min(6, g.depth() - 3);
  AtomCache cache(g, sp, AtomTemplate::oscillating, 1);
  const AtomFactory factory = cache.factory();
  Rng rng(c.seed ^ 0x7777);
  std::vector<CoeffArray> draws;
  for (int i = 0; i < 20; ++i) draws.push_back(random_sequence(rng, g, top));
  std::vector<SampledField> fields;
  for (const auto& lambda : draws) fields.push_back(synthesize(g, lambda, factory).field);

  const double bound = th(c, "synthesis.bound");
  std::vector<ExperimentRow> rows;
  for (EngineKind kind : engines(c)) {
    const NormEngine eng = engine_of(kind, g);
    std::vector<double> rb(draws.size()), rf(draws.size());
    parallel_for(draws.size(), [&](std::size_t i) {
      rb[i] = eng.besov(fields[i], sp) / bpq_norm(draws[i], sp.p, sp.q);
      rf[i] = eng.tl(fields[i], sp) / fpq_norm(draws[i], sp.p, sp.q, g);
    });
    rows.push_back(row(suite, "besov_bound/" + engine_name(kind), sp, rb, max_of(rb) <= bound));
    rows.push_back(row(suite, "tl_bound/" + engine_name(kind), sp, rf, max_of(rf) <= bound));
  }

  // Analysis of band-limited fields reconstructs the resolved band.
  const KernelPair pair = build_mean_kernels(2, 0.5, g);
  const int depth = g.depth() - 3;
  const auto trig = corpus(c, g, 10, 7);
  std::vector<double> band(trig.size());
  parallel_for(trig.size(), [&](std::size_t i) { band[i] = analyze(trig[i], depth, pair, sp).band_error; });
  rows.push_back(row(suite, "analysis_band_error", sp, band, max_of(band) < th(c, "synthesis.reconstruction"),
                     {{"depth", depth}}));

  // Synthesis followed by analysis keeps the sequence norm within a constant.
  std::vector<double> trip(10);
  parallel_for(trip.size(), [&](std::size_t i) {
    const Analysis an = analyze(fields[i], depth, pair, sp);
    trip[i] = bpq_norm(an.coefficients, sp.p, sp.q) / bpq_norm(draws[i], sp.p, sp.q);
  });
  const double rt = th(c, "synthesis.round_trip");
  rows.push_back(row(suite, "round_trip", sp, trip, min_of(trip) >= 1.0 / rt && max_of(trip) <= rt));
  return rows;
}

std::vector<ExperimentRow> suite_convergence(const ExperimentConfig& c) {
  const std::string suite = "convergence";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const int top = std::min(6, g.depth() - 3);
  const double factor = th(c, "convergence.factor");
  const double P = g.period();
  const SampledField psi = SampledField::from_function(g, [&](const Point& x) {
    double v = std::cos(2.0 * std::numbers::pi * x[0] / P) + 0.5 * std::sin(6.0 * std::numbers::pi * x[0] / P);
    if (n == 2) v *= std::cos(2.0 * std::numbers::pi * x[1] / P);
    return cplx{v, 0.0};
  });
  CoeffArray lambda{n, {}};
  for (int nu = 0; nu <= top; ++nu) lambda.set(nu, {0, 0}, std::ldexp(1.0, -nu));
  std::vector<ExperimentRow> rows;
  for (const auto& [s, p] : std::vector<std::pair<double, double>>{{0.5, 2.0}, {0.3, 1.0}}) {
    const SpaceParams sp = space(s, p, 2, n, 1.0, 1.0);
    AtomCache cache(g, sp, AtomTemplate::oscillating, 1);
    const ConvergenceReport rep = convergence_bound(lambda, sp, cache.factory(), psi);
    const double ratio = rep.sum / (rep.bound_constant * rep.b_p_inf);
    rows.push_back(row(suite, space_tag(sp), sp, {ratio}, rep.hypothesis_ok && ratio <= factor,
                       {{"sum", rep.sum},
                        {"C_prime", rep.bound_constant},
                        {"C_atom", rep.atom_constant},
                        {"b_p_inf", rep.b_p_inf}}));
  }
  return rows;
}

// ------------------------------------------------------------ operators

SampledField smooth_multiplier(const ExperimentConfig& c, const Grid& g, std::uint64_t salt) {
  CorpusSpec spec = c.corpus;
  spec.family = "trig";
  spec.count = 1;
  spec.band = 8;
  SampledField t = generate_corpus(spec, g, c.seed ^ salt).front();
  const double m = t.max_abs();
  for (auto& v : t.values) v = 1.0 + 0.5 * v.real() / m;
  return t;
}

std::vector<ExperimentRow> suite_multiplier(const ExperimentConfig& c) {
  const std::string suite = "multiplier";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const SpaceParams sp = space(0.5, 2, 2, n);
  const double rho = 1.5;
  const auto fields = corpus(c, g, 30, 9);
  std::vector<SampledField> phis;
  for (std::size_t i = 0; i < fields.size(); ++i) phis.push_back(smooth_multiplier(c, g, 0x9000 + i));
  const double bound = th(c, "multiplier.bound");
  std::vector<ExperimentRow> rows;
  for (EngineKind kind : engines(c)) {
    const NormEngine eng = engine_of(kind, g);
    std::vector<double> rb(fields.size()), rf(fields.size());
    parallel_for(fields.size(), [&](std::size_t i) {
      const MultiplyReport r = multiply(phis[i], fields[i], sp, rho, eng).report;
      rb[i] = r.ratio_besov;
      rf[i] = r.ratio_tl.value_or(0.0);
    });
    rows.push_back(row(suite, "besov/" + engine_name(kind), sp, rb, max_of(rb) <= bound));
    rows.push_back(row(suite, "tl/" + engine_name(kind), sp, rf, max_of(rf) <= bound));
  }

  // Atom multiplication: inflation against the multiplier norm.
  const SpaceParams asp = space(0.5, 2, 2, n, 1.0, 1.0);
  const double atom_factor = th(c, "multiplier.atom_factor");
  Rng rng(c.seed ^ 0x9999);
  std::vector<std::pair<int, std::array<long, 2>>> where;
  for (int i = 0; i < 10; ++i) {
    const int level = static_cast<int>(rng.integer(1, std::min(5, g.depth() - 3)));
    where.emplace_back(level, random_index(rng, level, n));
  }
  std::vector<double> infl(where.size());
  std::vector<char> aok(where.size(), 0);
  parallel_for(where.size(), [&](std::size_t i) {
    const AtomSpec a = make_atom(g, where[i].first, where[i].second, asp, AtomTemplate::oscillating, 1);
    const AtomProduct prod = multiply_atom(phis[i], a, 2.0);
    infl[i] = prod.inflation / prod.phi_norm;
    aok[i] = prod.rho_ok && prod.certificate.C_support && infl[i] <= atom_factor;
  });
  rows.push_back(row(suite, "atom_inflation", asp, infl,
                     std::all_of(aok.begin(), aok.end(), [](char v) { return v != 0; })));

  // phi = 1 acts as the identity.
  const SampledField one = SampledField::from_function(g, [](const Point&) { return cplx{1.0, 0.0}; });
  const NormEngine fourier = NormEngine::fourier(g);
  std::vector<double> dev;
  for (std::size_t i = 0; i < 5; ++i) {
    const MultiplyReport r = multiply(one, fields[i], sp, rho, fourier).report;
    dev.push_back(std::abs(r.ratio_besov - 1.0));
    dev.push_back(std::abs(r.ratio_tl.value_or(1.0) - 1.0));
  }
  rows.push_back(row(suite, "identity_multiplier", sp, dev, max_of(dev) <= th(c, "multiplier.identity_tol")));
  return rows;
}

std::vector<ExperimentRow> suite_diffeomorphism(const ExperimentConfig& c) {
  const std::string suite = "diffeomorphism";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const SpaceParams sp = space(0.5, 2, 2, n);
  const auto fields = corpus(c, g, 20, 10);
  const NormEngine fourier = NormEngine::fourier(g);
  const double compose_bound = th(c, "diffeomorphism.compose_bound");
  const double holder_bound = th(c, "diffeomorphism.holder_bound");
  std::vector<ExperimentRow> rows;
  for (double alpha : {0.05, 0.1, 0.2}) {
    const Diffeo phi = make_diffeo(g, DiffeoKind::perturbation, alpha);
    const std::string tag = "alpha=" + format_real(alpha);
    const std::size_t m = fields.size();
    std::vector<double> rb(m), rf(m), box(m), l2(m), sup(m), hold(m), jac(m);
    std::vector<char> alias(m, 0);
    parallel_for(m, [&](std::size_t i) {
      const ComposeReport cr = compose(fields[i], phi, sp, fourier).report;
      rb[i] = cr.ratio_besov;
      rf[i] = cr.ratio_tl.value_or(0.0);
      alias[i] = cr.aliasing_warning;
      const ChangeOfVariablesReport cv2 = lp_change_of_variables(fields[i], phi, 2.0);
      box[i] = cv2.max_box_ratio / cv2.box_limit;
      l2[i] = cv2.ratio / cv2.jacobian_limit;
      sup[i] = std::abs(lp_change_of_variables(fields[i], phi, kInf).ratio - 1.0);
      hold[i] = holder_compose(fields[i], phi, 1.5).ratio;
    });
    const long aliased = std::count(alias.begin(), alias.end(), 1);
    rows.push_back(row(suite, "compose_besov/" + tag, sp, rb, max_of(rb) <= compose_bound,
                       {{"aliasing_warnings", aliased}, {"c1", phi.c1}, {"c2", phi.c2}}));
    rows.push_back(row(suite, "compose_tl/" + tag, sp, rf, max_of(rf) <= compose_bound));
    rows.push_back(row(suite, "box_ratio/" + tag, sp, box, max_of(box) <= th(c, "diffeomorphism.box_slack")));
    rows.push_back(
        row(suite, "l2_jacobian/" + tag, sp, l2, max_of(l2) <= th(c, "diffeomorphism.jacobian_slack")));
    rows.push_back(row(suite, "sup_invariance/" + tag, sp, sup, max_of(sup) <= th(c, "diffeomorphism.sup_tol")));
    rows.push_back(row(suite, "holder_compose/" + tag, space(1.5, kInf, kInf, n), hold,
                       max_of(hold) <= holder_bound));
    rows.push_back(row(suite, "inverse_residual/" + tag, sp, {phi.inverse_residual},
                       phi.inverse_residual <= th(c, "diffeomorphism.inverse_tol"),
                       {{"bisection_fallbacks", phi.bisection_fallbacks}}));
  }
  return rows;
}

std::vector<ExperimentRow> suite_transport(const ExperimentConfig& c) {
  const std::string suite = "transport";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  const SpaceParams sp = space(0.5, 2, 2, n, 1.0, 1.0);
  const int top = std::min(n == 1 ? 5 : 3, g.depth() - 3);
  std::vector<std::pair<int, std::array<long, 2>>> where;
  for (int level = 0; level <= top; ++level) {
    const long count = 1L << level;
    for (long i0 = 0; i0 < count; ++i0)
      for (long i1 = 0; i1 < (n == 2 ? count : 1); ++i1) where.emplace_back(level, std::array<long, 2>{i0, i1});
  }
  std::vector<AtomSpec> atoms(where.size(), AtomSpec{SampledField(g), {}, sp, nullptr});
  parallel_for(where.size(), [&](std::size_t i) {
    atoms[i] = make_atom(g, where[i].first, where[i].second, sp, AtomTemplate::oscillating, 1);
  });
  const double max_families = th(c, "transport.max_families");
  const double spread_bound = th(c, "transport.spread");
  std::vector<ExperimentRow> rows;
  for (double alpha : {0.05, 0.1, 0.2}) {
    const Diffeo phi = make_diffeo(g, DiffeoKind::perturbation, alpha);
    const Transported t = transport_atoms(atoms, phi);
    std::vector<double> constants;
    for (const auto& cert : t.certificates) constants.push_back(cert.max_constant());
    const double spread = max_of(constants) / min_of(constants);
    const bool ok = t.all_pass && t.plan.injective && t.plan.M <= max_families && spread <= spread_bound;
    rows.push_back(row(suite, "alpha=" + format_real(alpha), sp, constants, ok,
                       {{"M", t.plan.M},
                        {"d_prime", t.plan.d_prime},
                        {"volume_bound", t.plan.volume_bound},
                        {"target_constant", t.target_constant},
                        {"spread", spread},
                        {"L_route", t.L_route},
                        {"atoms", atoms.size()}}));
  }
  return rows;
}

std::vector<ExperimentRow> suite_ordering(const ExperimentConfig& c) {
  const std::string suite = "ordering";
  const Grid g = suite_grid(c);
  const int n = g.dim();
  constexpr double tie = 1e-12;
  Rng rng(c.seed ^ 0xbbbb);
  const SpaceParams base = space(0.5, 2, 2, n);
  std::vector<AtomSpec> atoms;
  for (int i = 0; i < 10; ++i) {
    const int level = static_cast<int>(rng.integer(1, std::min(5, g.depth() - 3)));
    const auto shape = rng.integer(0, 1) ? AtomTemplate::oscillating : AtomTemplate::bump;
    atoms.push_back(make_atom(g, level, random_index(rng, level, n), base, shape, 0));
  }
  const std::vector<double> Ks{0.0, 0.5, 1.0, 1.5};
  const std::vector<double> Ls{0.0, 1.0, 2.0};
  std::vector<double> smooth_worst(atoms.size()), moment_worst(atoms.size());
  parallel_for(atoms.size(), [&](std::size_t i) {
    AtomSpec a = atoms[i];
    std::vector<double> cs, cm;
    for (double K : Ks) {
      a.params.K = K;
      a.params.L = 0.0;
      cs.push_back(validate_atom(a).C_smooth);
    }
    for (double L : Ls) {
      a.params.K = 0.0;
      a.params.L = L;
      cm.push_back(validate_atom(a).C_moment_poly);
    }
    // Largest ratio of a constant to its successor; <= 1 when nondecreasing.
    auto worst = [](const std::vector<double>& v) {
      double w = 0.0;
      for (std::size_t k = 1; k < v.size(); ++k) w = std::max(w, v[k - 1] / std::max(v[k], 1e-300));
      return w;
    };
    smooth_worst[i] = worst(cs);
    moment_worst[i] = worst(cm);
  });
  return {row(suite, "C_smooth_in_K", base, smooth_worst, max_of(smooth_worst) <= 1.0 + tie),
          row(suite, "C_moment_in_L", base, moment_worst, max_of(moment_worst) <= 1.0 + tie)};
}

using SuiteFn = std::vector<ExperimentRow> (*)(const ExperimentConfig&);

const std::map<std::string, SuiteFn>& suite_table() {
  static const std::map<std::string, SuiteFn> t{
      {"norm-equivalence", suite_norm_equivalence}, {"resolution", suite_resolution},
      {"holder-besov", suite_holder_besov},         {"identities", suite_identities},
      {"momenter", suite_momenter},                 {"dilation", suite_dilation},
      {"synthesis", suite_synthesis},               {"convergence", suite_convergence},
      {"multiplier", suite_multiplier},             {"diffeomorphism", suite_diffeomorphism},
      {"transport", suite_transport},               {"ordering", suite_ordering}};
  return t;
}

template <class E>
[[noreturn]] void rethrow_prefixed(const std::string& suite, const E& e) {
  throw E("suite " + suite + ": " + e.what());
}

}  // namespace

std::vector<ExperimentRow> run_suite(const std::string& name, const ExperimentConfig& config) {
  const auto it = suite_table().find(name);
  if (it == suite_table().end()) throw ConfigError("unknown suite: " + name);
  try {
    return it->second(config);
  } catch (const ConfigError& e) {
    rethrow_prefixed(name, e);
  } catch (const BoundsError& e) {
    rethrow_prefixed(name, e);
  } catch (const HypothesisError& e) {
    rethrow_prefixed(name, e);
  } catch (const NumericError& e) {
    rethrow_prefixed(name, e);
  }
}

Report run_experiment(const ExperimentConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  Report report;
  report.seed = config.seed;
  for (const auto& name : config.suites) {
    auto rows = run_suite(name, config);
    report.rows.insert(report.rows.end(), rows.begin(), rows.end());
  }
  nlohmann::json th_json = nlohmann::json::object();
  for (const auto& [key, value] : default_thresholds()) th_json[key] = real_json(config.threshold(key, value));
  const ValidationOptions vo;
  report.constants = {{"thresholds", th_json},
                      {"kernel_shift", kDefaultKernelShift},
                      {"means_order", 2},
                      {"means_support", 0.5},
                      {"battery_count", vo.battery_count},
                      {"battery_seed", vo.battery_seed},
                      {"target_C", vo.target_C},
                      {"support_tol", vo.support_tol},
                      {"max_families", kMaxFamilies},
                      {"engine", config.engine}};
  report.wall_clock_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace atomlab
