#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "cornerfem/errors.hpp"

namespace cornerfem::cli {
namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

class View {
 public:
  explicit View(const RawConfig& raw) : raw_(raw) {}

  [[nodiscard]] const std::string* find(const std::string& key) const {
    const auto it = raw_.find(key);
    return it == raw_.end() ? nullptr : &it->second;
  }

  [[nodiscard]] const std::string& require(const std::string& key) const {
    const auto* value = find(key);
    if (value == nullptr) throw ConfigError(key, fmt::format("{}: required but not given", key));
    return *value;
  }

  [[nodiscard]] double angle(const std::string& key) const {
    const auto& text = require(key);
    const auto value = parse_angle(text);
    if (!value) throw invalid(key, text, "expected an angle such as 2.356, 1.5pi or 3pi/4");
    if (!(*value > 0.0 && *value < two_pi)) throw invalid(key, text, "must lie in (0, 2pi)");
    return *value;
  }

  [[nodiscard]] double real(const std::string& key, double fallback, double lo, double hi,
                            bool lo_open, std::string_view range) const {
    const auto* text = find(key);
    if (text == nullptr) return fallback;
    const auto value = parse_real(*text);
    if (!value) throw invalid(key, *text, "expected a real number");
    check_range(key, *text, *value, lo, hi, lo_open, range);
    return *value;
  }

  [[nodiscard]] std::vector<double> list(const std::string& key, std::vector<double> fallback,
                                         double lo, double hi, std::string_view range) const {
    const auto* text = find(key);
    if (text == nullptr) return fallback;
    const auto values = parse_real_list(*text);
    if (!values) throw invalid(key, *text, "expected a comma-separated list of reals");
    for (double v : *values) check_range(key, *text, v, lo, hi, true, range);
    return *values;
  }

  [[nodiscard]] int integer(const std::string& key, int fallback, int lo, int hi) const {
    const auto* text = find(key);
    if (text == nullptr) return fallback;
    const auto value = parse_integer(*text);
    if (!value) throw invalid(key, *text, "expected an integer");
    if (*value < lo || *value > hi) {
      throw invalid(key, *text, fmt::format("must lie in [{}, {}]", lo, hi));
    }
    return static_cast<int>(*value);
  }

  [[nodiscard]] std::string choice(const std::string& key, const std::string& fallback,
                                   const std::vector<std::string>& allowed) const {
    const auto* text = find(key);
    if (text == nullptr) return fallback;
    if (std::find(allowed.begin(), allowed.end(), *text) == allowed.end()) {
      std::string options;
      for (const auto& a : allowed) options += (options.empty() ? "" : "|") + a;
      throw invalid(key, *text, fmt::format("expected one of {}", options));
    }
    return *text;
  }

  [[nodiscard]] std::string text(const std::string& key) const {
    const auto* value = find(key);
    return value == nullptr ? std::string{} : *value;
  }

  [[nodiscard]] static ConfigError invalid(const std::string& key, const std::string& text,
                                           std::string_view why) {
    return ConfigError(key, fmt::format("{}: invalid value '{}': {}", key, text, why));
  }

 private:
  static void check_range(const std::string& key, const std::string& text, double value, double lo,
                          double hi, bool lo_open, std::string_view range) {
    const bool above = lo_open ? value > lo : value >= lo;
    if (!(above && value <= hi)) throw invalid(key, text, fmt::format("must lie in {}", range));
  }

  const RawConfig& raw_;
};

double cg_tolerance(const View& v) { return v.real("cg_tol", 1e-12, 0.0, 0.5, true, "(0, 0.5]"); }

double newton_tolerance(const View& v) {
  return v.real("newton_tol", 1e-11, 0.0, 0.5, true, "(0, 0.5]");
}

std::pair<double, double> audit_constants(const View& v) {
  const double c1 = v.real("c1", 1.0 / 8.0, 0.0, 1e6, true, "(0, 1e6]");
  const double c2 = v.real("c2", 16.0, 0.0, 1e6, true, "(0, 1e6]");
  if (c2 < c1) {
    const std::string key = v.find("c2") != nullptr ? "c2" : "c1";
    throw View::invalid(key, v.require(key), "c1 must not exceed c2");
  }
  return {c1, c2};
}

int single_level(const View& v, int fallback) {
  const auto* text = v.find("levels");
  if (text != nullptr && text->find("..") != std::string::npos) {
    throw View::invalid("levels", *text, "expected a single refinement level for this command");
  }
  return v.integer("levels", fallback, 1, 12);
}

}  // namespace

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> keys = {
      "omega",      "mu",         "radius",          "levels",          "problem",
      "nonlinearity", "data",     "quad_degree_vol", "quad_degree_edge", "error_quad_degree",
      "cg_tol",     "newton_tol", "workers",         "output",          "c1",
      "c2",         "corner"};
  return keys;
}

RawConfig parse_config(std::string_view text) {
  RawConfig raw;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto end = text.find('\n');
    const auto line = trim(text.substr(0, end));
    text = end == std::string_view::npos ? std::string_view{} : text.substr(end + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ParseError(fmt::format("line {}: expected key=value, got '{}'", line_no, line), line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ParseError(fmt::format("line {}: empty key", line_no), line_no);
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      throw ConfigError(key, fmt::format("{}: unknown key (line {})", key, line_no));
    }
    if (!raw.emplace(key, value).second) {
      throw ParseError(fmt::format("line {}: duplicate key '{}'", line_no, key), line_no);
    }
  }
  return raw;
}

RawConfig read_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot open config file '{}'", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config(buffer.str());
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("{}: {}", path, e.what()), e.line());
  }
}

std::optional<double> parse_real(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long> parse_integer(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  long value = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

std::optional<double> parse_angle(std::string_view text) {
  text = trim(text);
  const auto pos = text.find("pi");
  if (pos == std::string_view::npos) return parse_real(text);

  auto coefficient_text = trim(text.substr(0, pos));
  if (!coefficient_text.empty() && coefficient_text.back() == '*') {
    coefficient_text = trim(coefficient_text.substr(0, coefficient_text.size() - 1));
    if (coefficient_text.empty()) return std::nullopt;
  }
  double coefficient = 1.0;
  if (!coefficient_text.empty()) {
    const auto c = parse_real(coefficient_text);
    if (!c) return std::nullopt;
    coefficient = *c;
  }

  const auto rest = trim(text.substr(pos + 2));
  double divisor = 1.0;
  if (!rest.empty()) {
    if (rest.front() != '/') return std::nullopt;
    const auto d = parse_real(rest.substr(1));
    if (!d || *d == 0.0) return std::nullopt;
    divisor = *d;
  }
  return coefficient * std::numbers::pi / divisor;
}

std::optional<std::vector<double>> parse_real_list(std::string_view text) {
  std::vector<double> values;
  while (true) {
    const auto comma = text.find(',');
    const auto value = parse_real(text.substr(0, comma));
    if (!value) return std::nullopt;
    values.push_back(*value);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return values;
}

std::optional<Point> parse_point(std::string_view text) {
  const auto values = parse_real_list(text);
  if (!values || values->size() != 2) return std::nullopt;
  return Point{(*values)[0], (*values)[1]};
}

std::optional<std::pair<int, int>> parse_level_range(std::string_view text) {
  text = trim(text);
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    const auto n = parse_integer(text);
    if (!n || *n < 1 || *n > 1000) return std::nullopt;
    return std::pair{1, static_cast<int>(*n)};
  }
  const auto a = parse_integer(text.substr(0, dots));
  const auto b = parse_integer(text.substr(dots + 2));
  if (!a || !b || *a < 1 || *b < *a || *b > 1000) return std::nullopt;
  return std::pair{static_cast<int>(*a), static_cast<int>(*b)};
}

MeshConfig mesh_config(const RawConfig& raw) {
  const View v(raw);
  MeshConfig c;
  c.omega = v.angle("omega");
  c.mu = v.list("mu", c.mu, 0.0, 1.0, "(0, 1]");
  c.radius = v.list("radius", c.radius, 0.0, 1e6, "(0, 1e6]");
  c.levels = single_level(v, c.levels);
  std::tie(c.c1, c.c2) = audit_constants(v);
  c.output = v.text("output");
  return c;
}

AuditConfig audit_config(const RawConfig& raw) {
  const View v(raw);
  AuditConfig c;
  const auto mu = v.list("mu", {1.0}, 0.0, 1.0, "(0, 1]");
  const auto radius = v.list("radius", {1.0}, 0.0, 1e6, "(0, 1e6]");
  if (mu.size() != 1) throw View::invalid("mu", v.require("mu"), "expected a single value");
  if (radius.size() != 1) {
    throw View::invalid("radius", v.require("radius"), "expected a single value");
  }
  c.spec.mu = mu.front();
  c.spec.radius = radius.front();
  if (const auto* text = v.find("corner")) {
    const auto corner = parse_point(*text);
    if (!corner) throw View::invalid("corner", *text, "expected x,y");
    c.spec.corner = *corner;
  }
  std::tie(c.c1, c.c2) = audit_constants(v);
  return c;
}

SolveConfig solve_config(const RawConfig& raw) {
  const View v(raw);
  SolveConfig c;
  c.mesh = mesh_config(raw);
  c.mesh.output.clear();
  c.problem = v.choice("problem", "linear", {"linear", "semilinear"}) == "linear"
                  ? ProblemKind::linear
                  : ProblemKind::semilinear_cubic;
  (void)v.choice("nonlinearity", "cubic", {"cubic"});
  const auto data = v.choice("data", "benchmark", {"benchmark", "constant", "linear"});
  c.data = data == "benchmark" ? DataKind::benchmark
           : data == "constant" ? DataKind::constant
                                : DataKind::linear;
  c.quad_degree_vol = v.integer("quad_degree_vol", c.quad_degree_vol, 1, 20);
  c.quad_degree_edge = v.integer("quad_degree_edge", c.quad_degree_edge, 1, 20);
  c.error_quad_degree = v.integer("error_quad_degree", c.error_quad_degree, 4, 20);
  c.cg_tol = cg_tolerance(v);
  c.newton_tol = newton_tolerance(v);
  c.workers = v.integer("workers", c.workers, 1, 256);
  c.output = v.text("output");
  return c;
}

StudyConfig study_config(const RawConfig& raw) {
  const View v(raw);
  StudyConfig c;
  auto& s = c.settings;
  s.omega = v.angle("omega");
  s.mu = v.list("mu", s.mu, 0.0, 1.0, "(0, 1]");
  s.radius = v.list("radius", s.radius, 0.0, 1e6, "(0, 1e6]");
  if (const auto* text = v.find("levels")) {
    const auto range = parse_level_range(*text);
    if (!range) throw View::invalid("levels", *text, "expected n or a..b with 1 <= a <= b");
    std::tie(s.first_level, s.last_level) = *range;
  }
  s.problem = v.choice("problem", "linear", {"linear", "semilinear"}) == "linear"
                  ? ProblemKind::linear
                  : ProblemKind::semilinear_cubic;
  (void)v.choice("nonlinearity", "cubic", {"cubic"});
  (void)v.choice("data", "benchmark", {"benchmark"});
  s.quad_degree_vol = v.integer("quad_degree_vol", s.quad_degree_vol, 1, 20);
  s.quad_degree_edge = v.integer("quad_degree_edge", s.quad_degree_edge, 1, 20);
  s.error_quad_degree = v.integer("error_quad_degree", s.error_quad_degree, 4, 20);
  s.cg_tol = cg_tolerance(v);
  s.newton_tol = newton_tolerance(v);
  s.workers = v.integer("workers", s.workers, 1, 256);
  c.output = v.text("output");
  return c;
}

}  // namespace cornerfem::cli
