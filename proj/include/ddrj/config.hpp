#ifndef DDRJ_CONFIG_HPP
#define DDRJ_CONFIG_HPP

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ddrj/errors.hpp"
#include "ddrj/sampler.hpp"

namespace ddrj {

//! Flat key=value text: one pair per line, '#' comments, blank lines ignored.
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

inline double kv_double(const KeyValues& kv, const std::string& key, double fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a number: '" + it->second + "'");
  }
}

inline std::uint64_t kv_uint(const KeyValues& kv, const std::string& key,
                             std::uint64_t fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  try {
    std::size_t pos = 0;
    const unsigned long long v = std::stoull(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "': not a non-negative integer: '" +
                      it->second + "'");
  }
}

}  // namespace detail

inline KeyValues parse_key_values(std::istream& in, const std::string& origin) {
  KeyValues kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ": line " + std::to_string(line_no) +
                        ": expected key=value");
    const std::string key = detail::trim(t.substr(0, eq));
    if (key.empty())
      throw ConfigError(origin + ": line " + std::to_string(line_no) + ": empty key");
    if (kv.count(key))
      throw ConfigError(origin + ": duplicate key '" + key + "'");
    kv[key] = detail::trim(t.substr(eq + 1));
  }
  return kv;
}

inline KeyValues load_key_values(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_key_values(in, path);
}

//! Documented run-configuration keys. Any other key is a hard error.
inline const std::set<std::string>& run_config_keys() {
  static const std::set<std::string> keys = {
      "iterations",     "burn_in",    "thin",
      "seed",           "mode",       "var_beta",
      "var_alpha",      "var_delta",  "preselect_threshold",
      "subsample_fraction", "chains", "space_prob_override"};
  return keys;
}

inline void run_config_from_kv(const KeyValues& kv, RunConfig& config,
                               Hyperparams& hyper) {
  for (const auto& [key, value] : kv)
    if (!run_config_keys().count(key))
      throw ConfigError("config: unknown key '" + key + "'");
  config.iterations = detail::kv_uint(kv, "iterations", config.iterations);
  config.burn_in = detail::kv_uint(kv, "burn_in", config.burn_in);
  config.thin = detail::kv_uint(kv, "thin", config.thin);
  config.seed = detail::kv_uint(kv, "seed", config.seed);
  config.chains = detail::kv_uint(kv, "chains", config.chains);
  config.subsample_fraction =
      detail::kv_double(kv, "subsample_fraction", config.subsample_fraction);
  if (const auto it = kv.find("mode"); it != kv.end()) {
    if (it->second == "ddrj")
      config.mode = ProposalMode::DataDriven;
    else if (it->second == "rj")
      config.mode = ProposalMode::Uniform;
    else
      throw ConfigError("config: mode must be 'ddrj' or 'rj', got '" + it->second + "'");
  }
  if (kv.count("preselect_threshold"))
    config.preselect_threshold = detail::kv_double(kv, "preselect_threshold", 0.0);
  if (kv.count("space_prob_override")) {
    const double s = detail::kv_double(kv, "space_prob_override", 0.0);
    if (s < 0.0 || s > 1.0)
      throw ConfigError("config: space_prob_override must lie in [0,1]");
    config.space_prob_override = s;
  }
  hyper.var_beta = detail::kv_double(kv, "var_beta", hyper.var_beta);
  hyper.var_alpha = detail::kv_double(kv, "var_alpha", hyper.var_alpha);
  hyper.var_delta = detail::kv_double(kv, "var_delta", hyper.var_delta);
  config.validate();
  hyper.validate();
}

inline void load_run_config(const std::string& path, RunConfig& config,
                            Hyperparams& hyper) {
  run_config_from_kv(load_key_values(path), config, hyper);
}

}  // namespace ddrj

#endif
