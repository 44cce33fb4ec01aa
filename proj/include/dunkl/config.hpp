#ifndef DUNKL_CONFIG_HPP
#define DUNKL_CONFIG_HPP

#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "dunkl/types.hpp"

namespace dunkl {

inline constexpr int kSchemaVersion = 1;

/// Everything a CLI run depends on except the worker count, which never
/// changes results.
struct ExperimentConfig {
  std::string command;
  std::string oracle;  // crosscheck: dyson | laguerre | wishart
  std::string family = "A";
  std::size_t rank = 3;
  std::optional<double> k;
  std::optional<double> k_short;
  std::optional<double> k_long;
  std::optional<Vector> start;
  double boundary_offset = 0.0;
  double horizon = 1.0;
  double dt = 1e-3;
  double dt_min = 0.0;
  double noise_dt = 0.0;
  double theta = 0.5;
  std::size_t stride = 1;
  std::size_t paths = 1000;
  std::uint64_t seed = 0;
  Vector eps;
  std::string alpha0;
  std::string alpha1;
  double beta = 2.0;
  double delta = 0.0;  // 0 selects delta = rank
  std::size_t matrix_n = 0;  // 0 selects n = rank
  std::string out;
  std::string csv;
  std::string hits_csv;
  bool assert_ = false;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {
template <class T>
void put_optional(nlohmann::ordered_json& j, const char* key, const std::optional<T>& v) {
  if (v) j[key] = *v;
  else j[key] = nullptr;
}
template <class T>
void get_optional(const nlohmann::json& j, const char* key, std::optional<T>& v) {
  if (!j.contains(key)) return;
  if (j.at(key).is_null()) v.reset();
  else v = j.at(key).get<T>();
}
}  // namespace detail

inline nlohmann::ordered_json to_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = c.command;
  j["oracle"] = c.oracle;
  j["family"] = c.family;
  j["rank"] = c.rank;
  detail::put_optional(j, "k", c.k);
  detail::put_optional(j, "k_short", c.k_short);
  detail::put_optional(j, "k_long", c.k_long);
  detail::put_optional(j, "start", c.start);
  j["boundary_offset"] = c.boundary_offset;
  j["horizon"] = c.horizon;
  j["dt"] = c.dt;
  j["dt_min"] = c.dt_min;
  j["noise_dt"] = c.noise_dt;
  j["theta"] = c.theta;
  j["stride"] = c.stride;
  j["paths"] = c.paths;
  j["seed"] = c.seed;
  j["eps"] = c.eps;
  j["alpha0"] = c.alpha0;
  j["alpha1"] = c.alpha1;
  j["beta"] = c.beta;
  j["delta"] = c.delta;
  j["matrix_n"] = c.matrix_n;
  j["out"] = c.out;
  j["csv"] = c.csv;
  j["hits_csv"] = c.hits_csv;
  j["assert"] = c.assert_;
  return j;
}

/// Parses a config document. Unknown keys and a schema version other than
/// the current one are rejected; missing keys keep their defaults.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known = {
      "schema_version", "command", "oracle", "family", "rank", "k", "k_short", "k_long", "start",
      "boundary_offset", "horizon", "dt", "dt_min", "noise_dt", "theta", "stride", "paths", "seed", "eps",
      "alpha0", "alpha1", "beta", "delta", "matrix_n", "out", "csv", "hits_csv", "assert"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
  if (j.contains("schema_version") && j.at("schema_version").get<int>() != kSchemaVersion)
    throw ConfigError("unsupported config schema_version");
  ExperimentConfig c;
  try {
    auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("command", c.command);
    get("oracle", c.oracle);
    get("family", c.family);
    get("rank", c.rank);
    detail::get_optional(j, "k", c.k);
    detail::get_optional(j, "k_short", c.k_short);
    detail::get_optional(j, "k_long", c.k_long);
    detail::get_optional(j, "start", c.start);
    get("boundary_offset", c.boundary_offset);
    get("horizon", c.horizon);
    get("dt", c.dt);
    get("dt_min", c.dt_min);
    get("noise_dt", c.noise_dt);
    get("theta", c.theta);
    get("stride", c.stride);
    get("paths", c.paths);
    get("seed", c.seed);
    get("eps", c.eps);
    get("alpha0", c.alpha0);
    get("alpha1", c.alpha1);
    get("beta", c.beta);
    get("delta", c.delta);
    get("matrix_n", c.matrix_n);
    get("out", c.out);
    get("csv", c.csv);
    get("hits_csv", c.hits_csv);
    get("assert", c.assert_);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  try {
    return config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config file " + path + " is not valid JSON: " + e.what());
  }
}

/// Parses "1,2.5,3" (surrounding parentheses or brackets allowed).
inline Vector parse_tuple(std::string s) {
  for (char& ch : s)
    if (ch == '(' || ch == ')' || ch == '[' || ch == ']') ch = ' ';
  Vector out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t pos = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &pos);
    } catch (const std::exception&) {
      throw ConfigError("cannot parse number '" + item + "'");
    }
    if (item.find_first_not_of(" \t", pos) != std::string::npos) throw ConfigError("cannot parse number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw ConfigError("empty tuple");
  return out;
}

}  // namespace dunkl

#endif  // DUNKL_CONFIG_HPP
