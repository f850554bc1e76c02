#include "atomlab/io.hpp"

#include <cctype>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "atomlab/error.hpp"

namespace atomlab {
namespace {

std::map<std::string, std::string> header_fields(const std::string& line, const std::string& magic) {
  std::istringstream ss(line);
  std::string a, b;
  ss >> a >> b;
  if (a + " " + b != magic) throw ConfigError("expected header '" + magic + "', got '" + line + "'");
  std::map<std::string, std::string> out;
  std::string tok;
  while (ss >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ConfigError("malformed header token '" + tok + "'");
    out[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return out;
}

const std::string& require(const std::map<std::string, std::string>& m, const std::string& key) {
  const auto it = m.find(key);
  if (it == m.end()) throw ConfigError("header lacks '" + key + "'");
  return it->second;
}

double to_real(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInf;
  if (s == "-inf" || s == "-infinity") return -kInf;
  // strtod reports ERANGE on subnormal results; only overflow is rejected
  char* end = nullptr;
  errno = 0;
  const double v = s.empty() || std::isspace(static_cast<unsigned char>(s[0])) ? 0.0 : std::strtod(s.c_str(), &end);
  if (end == nullptr || end == s.c_str()) throw ConfigError("not a number: '" + s + "'");
  if (end != s.c_str() + s.size()) throw ConfigError("trailing characters in number '" + s + "'");
  if (errno == ERANGE && std::isinf(v)) throw ConfigError("number out of range: '" + s + "'");
  return v;
}

long to_long(const std::string& s) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw ConfigError("not an integer: '" + s + "'");
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r' && c != ' ') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(std::string("unexpected end of input while reading ") + what);
  return line;
}

Grid grid_from_header(const std::map<std::string, std::string>& h) {
  return make_grid(static_cast<int>(to_long(require(h, "n"))), static_cast<int>(to_long(require(h, "J"))),
                   to_real(require(h, "period")));
}

template <class Fn>
void with_output(const std::filesystem::path& path, Fn&& fn) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
  fn(out);
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

template <class Fn>
auto with_input(const std::filesystem::path& path, Fn&& fn) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  return fn(in);
}

}  // namespace

std::string format_real(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  (void)ec;
  return std::string(buf, ptr);
}

void write_field(std::ostream& out, const SampledField& f) {
  const Grid& g = f.grid;
  out << "ATOMLAB-FIELD v1 n=" << g.dim() << " J=" << g.depth() << " period=" << format_real(g.period()) << '\n';
  for (const cplx& v : f.values) out << format_real(v.real()) << ',' << format_real(v.imag()) << '\n';
}

SampledField read_field(std::istream& in) {
  const Grid g = grid_from_header(header_fields(next_line(in, "field header"), "ATOMLAB-FIELD v1"));
  SampledField f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto parts = split(next_line(in, "field values"), ',');
    if (parts.size() != 2) throw ConfigError("field line " + std::to_string(i + 2) + " needs 're,im'");
    f.values[i] = {to_real(parts[0]), to_real(parts[1])};
  }
  return f;
}

void save_field(const std::filesystem::path& path, const SampledField& f) {
  with_output(path, [&](std::ostream& o) { write_field(o, f); });
}

SampledField load_field(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& i) { return read_field(i); });
}

void write_coeffs(std::ostream& out, const CoeffArray& lambda) {
  out << "ATOMLAB-COEFF v1 n=" << lambda.dim << '\n';
  for (const auto& [key, v] : lambda.entries) {
    out << key.level << ',' << key.index[0];
    if (lambda.dim == 2) out << ',' << key.index[1];
    out << ',' << format_real(v.real()) << ',' << format_real(v.imag()) << '\n';
  }
}

CoeffArray read_coeffs(std::istream& in) {
  const auto h = header_fields(next_line(in, "coefficient header"), "ATOMLAB-COEFF v1");
  CoeffArray lambda;
  lambda.dim = static_cast<int>(to_long(require(h, "n")));
  if (lambda.dim != 1 && lambda.dim != 2) throw ConfigError("coefficient dimension must be 1 or 2");
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto parts = split(line, ',');
    if (parts.size() != static_cast<std::size_t>(3 + lambda.dim))
      throw ConfigError("coefficient line '" + line + "' has the wrong number of fields");
    const int level = static_cast<int>(to_long(parts[0]));
    std::array<long, 2> m{to_long(parts[1]), lambda.dim == 2 ? to_long(parts[2]) : 0};
    const std::size_t k = lambda.dim == 2 ? 3 : 2;
    lambda.set(level, m, {to_real(parts[k]), to_real(parts[k + 1])});
  }
  return lambda;
}

void save_coeffs(const std::filesystem::path& path, const CoeffArray& lambda) {
  with_output(path, [&](std::ostream& o) { write_coeffs(o, lambda); });
}

CoeffArray load_coeffs(const std::filesystem::path& path) {
  return with_input(path, [](std::istream& i) { return read_coeffs(i); });
}

void write_diffeo(std::ostream& out, const Diffeo& phi) {
  const Grid& g = phi.grid();
  out << "ATOMLAB-DIFFEO v1 n=" << g.dim() << " J=" << g.depth() << " period=" << format_real(g.period())
      << " kind=" << diffeo_kind_name(phi.kind()) << " alpha=" << format_real(phi.alpha())
      << " rho=" << format_real(phi.rho()) << " shift=" << format_real(phi.shift()[0]) << ','
      << format_real(phi.shift()[1]) << '\n';
  auto emit = [&](const Point& p) {
    out << format_real(p[0]);
    if (g.dim() == 2) out << ',' << format_real(p[1]);
    out << '\n';
  };
  out << "forward\n";
  for (std::size_t i = 0; i < g.size(); ++i) emit(phi.forward(g.node(i)));
  out << "inverse\n";
  for (std::size_t i = 0; i < g.size(); ++i) emit(phi.inverse_at_node(i));
}

Diffeo read_diffeo(std::istream& in) {
  const auto h = header_fields(next_line(in, "diffeomorphism header"), "ATOMLAB-DIFFEO v1");
  const Grid g = grid_from_header(h);
  const DiffeoKind kind = parse_diffeo_kind(require(h, "kind"));
  const double rho = to_real(require(h, "rho"));
  const auto shift = split(require(h, "shift"), ',');
  if (shift.size() != 2) throw ConfigError("shift needs two components");
  if (next_line(in, "forward section") != "forward") throw ConfigError("missing 'forward' section");
  SampledField e0(g), e1(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto parts = split(next_line(in, "forward map"), ',');
    if (parts.size() != static_cast<std::size_t>(g.dim())) throw ConfigError("forward line has wrong arity");
    const Point y = g.node(i);
    e0.values[i] = wrap_offset(to_real(parts[0]) - y[0], g.period());
    if (g.dim() == 2) e1.values[i] = wrap_offset(to_real(parts[1]) - y[1], g.period());
  }
  if (kind == DiffeoKind::identity) return make_diffeo(g, kind, 0.0, std::nullopt, {0.0, 0.0}, rho);
  if (kind == DiffeoKind::translation)
    return make_diffeo(g, kind, 0.0, std::nullopt, {to_real(shift[0]), to_real(shift[1])}, rho);
  const DiffeoProfile prof = g.dim() == 2 ? sampled_profile(e0, e1) : sampled_profile(e0);
  return make_diffeo(g, DiffeoKind::perturbation, 1.0, prof, {0.0, 0.0}, rho);
}

double json_real(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return to_real(j.get<std::string>());
  throw ConfigError("expected a number, got " + j.dump());
}

nlohmann::json real_json(double x) {
  if (std::isinf(x)) return "inf";
  return x;
}

nlohmann::json params_json(const SpaceParams& p) {
  return {{"s", real_json(p.s)}, {"p", real_json(p.p)}, {"q", real_json(p.q)}, {"n", p.n},
          {"K", real_json(p.K)}, {"L", real_json(p.L)}, {"d", real_json(p.d)}};
}

SpaceParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("space parameters must be an object");
  SpaceParams p;
  if (j.contains("s")) p.s = json_real(j["s"]);
  if (j.contains("p")) p.p = json_real(j["p"]);
  if (j.contains("q")) p.q = json_real(j["q"]);
  if (j.contains("n")) p.n = j["n"].get<int>();
  if (j.contains("K")) p.K = json_real(j["K"]);
  if (j.contains("L")) p.L = json_real(j["L"]);
  if (j.contains("d")) p.d = json_real(j["d"]);
  try {
    validate(p);
  } catch (const BoundsError& e) {
    throw ConfigError(std::string("invalid space parameters: ") + e.what());
  }
  return p;
}

nlohmann::json certificate_json(const AtomCertificate& c) {
  nlohmann::json cube = nlohmann::json::array({c.cube.level, c.cube.index[0]});
  if (c.params.n == 2) cube.push_back(c.cube.index[1]);
  return {{"cube", cube},
          {"C_support", c.C_support},
          {"C_smooth", c.C_smooth},
          {"C_moment_poly", c.C_moment_poly},
          {"C_moment_rand", c.C_moment_rand},
          {"kappa", c.kappa},
          {"pass", c.pass},
          {"params", params_json(c.params)}};
}

SpaceParams parse_space(const std::string& text, int n) {
  const auto parts = split(text, ',');
  if (parts.size() < 3 || parts.size() > 6) throw ConfigError("--space expects s,p,q[,K[,L[,d]]]");
  SpaceParams p;
  p.n = n;
  p.s = to_real(parts[0]);
  p.p = to_real(parts[1]);
  p.q = to_real(parts[2]);
  if (parts.size() > 3) p.K = to_real(parts[3]);
  if (parts.size() > 4) p.L = to_real(parts[4]);
  if (parts.size() > 5) p.d = to_real(parts[5]);
  try {
    validate(p);
  } catch (const BoundsError& e) {
    throw ConfigError(std::string("invalid --space: ") + e.what());
  }
  return p;
}

}  // namespace atomlab
