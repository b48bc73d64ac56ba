#pragma once

// Flat `key = value` run configuration. Every key has a default; unknown keys
// are rejected so typos do not silently fall back to defaults.

#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "frdetect/adam.hpp"
#include "frdetect/corpus.hpp"
#include "frdetect/fusion.hpp"
#include "frdetect/social.hpp"
#include "frdetect/tensor.hpp"

namespace frdetect {

struct RunConfig {
  // data
  std::string train_path;
  std::string test_path;
  std::string embeddings_path;
  std::string publishers_path;  // user_id<TAB>follower_count
  std::string edges_path;       // follower_id followed_id

  // thresholds
  std::size_t t_s = kDefaultWordsPerSentence;
  std::size_t t_d = 0;  // 0: derive from the training split

  // model
  Variant variant = Variant::Full;
  std::size_t filters = kDefaultFilters;
  std::size_t dense_width = kDefaultDenseWidth;
  double dropout = kDefaultDropout;

  // optimizer / training
  AdamOptions adam;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  bool early_stopping = true;
  double validation_fraction = 0.1;
  std::size_t patience = 10;

  // influence
  InfluenceMode influence_mode = InfluenceMode::FollowerCount;
  std::optional<double> share_probability;  // required for exact mode
  std::size_t max_depth = 0;                // 0: unbounded
  std::size_t total_users = 0;              // 0: users seen in the graph

  // cold start
  double perturb_fraction = 0.0;

  std::uint64_t seed = 1;
  std::string run_dir = "run";
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error("config key " + key + ": '" + v + "' is not a number");
  }
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw Error("config key " + key + ": '" + v +
                "' is not a non-negative integer");
  }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw Error("config key " + key + ": '" + v + "' is not true/false");
}

struct ConfigField {
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
};

inline const std::vector<std::pair<std::string, ConfigField>>& config_fields() {
  using F = ConfigField;
  static const std::vector<std::pair<std::string, ConfigField>> fields = [] {
    std::vector<std::pair<std::string, ConfigField>> f;
    auto str = [&](const char* key, std::string RunConfig::*m) {
      f.emplace_back(key, F{[m](const RunConfig& c) { return c.*m; },
                            [m](RunConfig& c, const std::string&,
                                const std::string& v) { c.*m = v; }});
    };
    auto size = [&](const char* key, std::size_t RunConfig::*m) {
      f.emplace_back(key, F{[m](const RunConfig& c) { return std::to_string(c.*m); },
                            [m](RunConfig& c, const std::string& k,
                                const std::string& v) { c.*m = parse_uint(k, v); }});
    };
    auto real = [&](const char* key, double RunConfig::*m) {
      f.emplace_back(key, F{[m](const RunConfig& c) { return format_double(c.*m); },
                            [m](RunConfig& c, const std::string& k,
                                const std::string& v) { c.*m = parse_double(k, v); }});
    };
    auto adam = [&](const char* key, double AdamOptions::*m) {
      f.emplace_back(key, F{[m](const RunConfig& c) { return format_double(c.adam.*m); },
                            [m](RunConfig& c, const std::string& k,
                                const std::string& v) { c.adam.*m = parse_double(k, v); }});
    };
    str("data.train", &RunConfig::train_path);
    str("data.test", &RunConfig::test_path);
    str("data.embeddings", &RunConfig::embeddings_path);
    str("data.publishers", &RunConfig::publishers_path);
    str("data.edges", &RunConfig::edges_path);
    size("thresholds.t_s", &RunConfig::t_s);
    size("thresholds.t_d", &RunConfig::t_d);
    f.emplace_back("model.variant",
                   F{[](const RunConfig& c) { return to_string(c.variant); },
                     [](RunConfig& c, const std::string&, const std::string& v) {
                       c.variant = parse_variant(v);
                     }});
    size("model.filters", &RunConfig::filters);
    size("model.dense_width", &RunConfig::dense_width);
    real("model.dropout", &RunConfig::dropout);
    adam("train.learning_rate", &AdamOptions::learning_rate);
    adam("train.beta1", &AdamOptions::beta1);
    adam("train.beta2", &AdamOptions::beta2);
    adam("train.epsilon", &AdamOptions::epsilon);
    size("train.epochs", &RunConfig::epochs);
    size("train.batch_size", &RunConfig::batch_size);
    f.emplace_back("train.early_stopping",
                   F{[](const RunConfig& c) {
                       return std::string(c.early_stopping ? "true" : "false");
                     },
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                       c.early_stopping = parse_bool(k, v);
                     }});
    real("train.validation_fraction", &RunConfig::validation_fraction);
    size("train.patience", &RunConfig::patience);
    f.emplace_back("influence.mode",
                   F{[](const RunConfig& c) { return to_string(c.influence_mode); },
                     [](RunConfig& c, const std::string&, const std::string& v) {
                       c.influence_mode = parse_influence_mode(v);
                     }});
    f.emplace_back("influence.p",
                   F{[](const RunConfig& c) {
                       return c.share_probability ? format_double(*c.share_probability)
                                                  : std::string();
                     },
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                       if (v.empty()) c.share_probability.reset();
                       else c.share_probability = parse_double(k, v);
                     }});
    size("influence.d_max", &RunConfig::max_depth);
    size("influence.total_users", &RunConfig::total_users);
    real("coldstart.fraction", &RunConfig::perturb_fraction);
    f.emplace_back("seed",
                   F{[](const RunConfig& c) { return std::to_string(c.seed); },
                     [](RunConfig& c, const std::string& k, const std::string& v) {
                       c.seed = parse_uint(k, v);
                     }});
    str("run.dir", &RunConfig::run_dir);
    return f;
  }();
  return fields;
}

}  // namespace detail

/// Sets one key from its textual value.
inline void set_config_value(RunConfig& config, const std::string& key,
                             const std::string& value) {
  for (const auto& [name, field] : detail::config_fields()) {
    if (name == key) {
      field.set(config, key, value);
      return;
    }
  }
  throw Error("unknown config key '" + key + "'");
}

inline std::string get_config_value(const RunConfig& config, const std::string& key) {
  for (const auto& [name, field] : detail::config_fields())
    if (name == key) return field.get(config);
  throw Error("unknown config key '" + key + "'");
}

inline std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, field] : detail::config_fields()) keys.push_back(name);
  return keys;
}

inline void validate(const RunConfig& c) {
  if (c.t_s == 0) throw Error("thresholds.t_s must be positive");
  if (c.filters == 0) throw Error("model.filters must be positive");
  if (c.dense_width == 0) throw Error("model.dense_width must be positive");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0))
    throw Error("model.dropout must lie in [0, 1)");
  if (c.batch_size == 0) throw Error("train.batch_size must be positive");
  if (!(c.adam.learning_rate > 0.0)) throw Error("train.learning_rate must be positive");
  if (!(c.validation_fraction >= 0.0 && c.validation_fraction < 1.0))
    throw Error("train.validation_fraction must lie in [0, 1)");
  if (!(c.perturb_fraction >= 0.0 && c.perturb_fraction <= 1.0))
    throw Error("coldstart.fraction must lie in [0, 1]");
  if (c.share_probability && !(*c.share_probability >= 0.0 && *c.share_probability <= 1.0))
    throw Error("influence.p must lie in [0, 1]");
  if (c.influence_mode == InfluenceMode::Exact && !c.share_probability)
    throw Error("influence.mode = exact requires influence.p");
}

/// Parses `key = value` lines; '#' starts a comment line.
inline RunConfig parse_config(std::istream& in, const std::string& origin = "config",
                              RunConfig base = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw Error(origin + ":" + std::to_string(line_no) + ": expected key = value");
    }
    try {
      set_config_value(base, detail::trim(t.substr(0, eq)), detail::trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(origin + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return base;
}

inline RunConfig load_config(const std::string& path, RunConfig base = {}) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  return parse_config(in, path, std::move(base));
}

/// Every key in schema order. `skip` omits keys (e.g. run.dir in reports).
inline std::string serialize_config(const RunConfig& c,
                                    const std::vector<std::string>& skip = {}) {
  std::ostringstream os;
  for (const auto& [name, field] : detail::config_fields()) {
    if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
    os << name << " = " << field.get(c) << '\n';
  }
  return os.str();
}

}  // namespace frdetect
