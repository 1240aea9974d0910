#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cornerfem/benchmark.hpp"

namespace cornerfem::cli {

/// Invalid or unknown configuration value; `key()` names the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)) {}
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Raw key=value pairs; later sources overwrite earlier ones.
using RawConfig = std::map<std::string, std::string>;

/// Keys accepted in configuration files and as flags.
const std::vector<std::string>& known_keys();

/// Flat key=value file. Blank lines and lines starting with '#' are ignored;
/// whitespace around keys and values is trimmed. Throws IoError when the file
/// cannot be read, ParseError (with line number) for malformed lines and
/// ConfigError for unknown keys.
RawConfig read_config_file(const std::string& path);
RawConfig parse_config(std::string_view text);

/// "2.356", "0.75pi", "3pi/4", "pi", "pi/2". Returns nullopt if malformed.
std::optional<double> parse_angle(std::string_view text);
std::optional<double> parse_real(std::string_view text);
std::optional<long> parse_integer(std::string_view text);
/// Comma-separated reals.
std::optional<std::vector<double>> parse_real_list(std::string_view text);
/// "x,y".
std::optional<Point> parse_point(std::string_view text);
/// "a..b" or "n" (meaning 1..n).
std::optional<std::pair<int, int>> parse_level_range(std::string_view text);

enum class DataKind { benchmark, constant, linear };

struct MeshConfig {
  double omega = 0.0;
  std::vector<double> mu = {1.0};
  std::vector<double> radius = {1.0};
  int levels = 4;
  double c1 = 1.0 / 8.0;
  double c2 = 16.0;
  std::string output;
};

struct AuditConfig {
  GradingSpec spec;
  double c1 = 1.0 / 8.0;
  double c2 = 16.0;
};

struct SolveConfig {
  MeshConfig mesh;
  ProblemKind problem = ProblemKind::linear;
  DataKind data = DataKind::benchmark;
  int quad_degree_vol = 5;
  int quad_degree_edge = 5;
  int error_quad_degree = 7;
  double cg_tol = 1e-12;
  double newton_tol = 1e-11;
  int workers = 1;
  std::string output;
};

struct StudyConfig {
  StudySettings settings;
  std::string output;
};

/// Typed, validated views of a raw configuration. Each throws ConfigError
/// naming the first missing or invalid key.
MeshConfig mesh_config(const RawConfig& raw);
AuditConfig audit_config(const RawConfig& raw);
SolveConfig solve_config(const RawConfig& raw);
StudyConfig study_config(const RawConfig& raw);

}  // namespace cornerfem::cli
