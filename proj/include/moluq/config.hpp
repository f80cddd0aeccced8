//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_CONFIG_HPP_
#define MOLUQ_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "moluq/cluster.hpp"
#include "moluq/fingerprint.hpp"
#include "moluq/llmclient.hpp"

namespace moluq {

class ConfigError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct SeedConfig {
  std::uint64_t split = 1;
  std::uint64_t icl = 2;
  std::uint64_t enumeration = 3;
  std::uint64_t mock = 4;
};

struct MockSpec {
  std::string kind;  // empty: pick by task (classifier / reactor)
  std::vector<std::string> fixed;
  double p_err = 0.0;
  double p_err_original = -1.0;  // negative: use p_err
  double p_err_reformed = -1.0;
  std::string rank_policy = "echo";
};

struct RunConfig {
  std::string task = "property";  // property | reaction
  std::filesystem::path dataset;
  std::string dataset_name;  // defaults to the dataset file stem
  std::string smiles_column = "smiles";
  std::string label_column = "label";
  std::string property_name = "toxicity";
  std::string arm = "original";  // original | reformed | both
  std::vector<int> m_values = {5};
  int n_variants = 5;
  int k_icl = 4;
  int test_size = 10;
  std::string icl_strategy = "diverse";
  SeedConfig seeds;
  std::string linkage = "average";
  double cluster_threshold = kDefaultClusterThreshold;
  int fp_radius = kDefaultFpRadius;
  int fp_width = kDefaultFpWidth;
  std::string endpoint_kind = "mock";  // mock | http
  EndpointConfig endpoint;
  MockSpec mock;
  std::filesystem::path output_dir = "out";
  std::filesystem::path cache_path;  // defaults to output_dir / cache.jsonl
  std::filesystem::path template_dir;

  std::filesystem::path resolved_cache_path() const {
    return cache_path.empty() ? output_dir / "cache.jsonl" : cache_path;
  }
};

namespace detail {

inline std::string config_strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return std::string(s);
}

inline std::string unquote(std::string value) {
  if (value.size() >= 2
      && ((value.front() == '"' && value.back() == '"')
          || (value.front() == '\'' && value.back() == '\'')))
    return value.substr(1, value.size() - 2);
  return value;
}

// key = value lines with [section] headers and # comments; values may be
// quoted strings, numbers, booleans or comma-separated lists.
inline std::map<std::string, std::string> parse_config_text(
    const std::string &text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool quoted = false;
    char quote = 0;
    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (quoted) {
        if (c == quote) quoted = false;
      } else if (c == '"' || c == '\'') {
        quoted = true;
        quote = c;
      } else if (c == '#') {
        line.resize(i);
        break;
      }
    }
    std::string stripped = config_strip(line);
    if (stripped.empty()) continue;
    if (stripped.front() == '[') {
      if (stripped.back() != ']')
        throw ConfigError("line " + std::to_string(lineno)
                          + ": unterminated section header");
      section = config_strip(
          std::string_view(stripped).substr(1, stripped.size() - 2));
      continue;
    }
    auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno)
                        + ": expected key = value");
    std::string key = config_strip(std::string_view(stripped).substr(0, eq));
    std::string value =
        unquote(config_strip(std::string_view(stripped).substr(eq + 1)));
    if (key.empty())
      throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    out[section.empty() ? key : section + "." + key] = value;
  }
  return out;
}

inline std::vector<std::string> split_list(const std::string &value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    std::size_t comma = value.find(',', pos);
    std::string piece = comma == std::string::npos
                            ? value.substr(pos)
                            : value.substr(pos, comma - pos);
    piece = unquote(config_strip(piece));
    if (!piece.empty()) out.push_back(piece);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string &value, const std::string &key) {
  T parsed {};
  auto [ptr, ec] =
      std::from_chars(value.data(), value.data() + value.size(), parsed);
  if (ec != std::errc {} || ptr != value.data() + value.size())
    throw ConfigError("bad numeric value for " + key + ": " + value);
  return parsed;
}

template <>
inline double parse_number<double>(const std::string &value,
                                   const std::string &key) {
  try {
    std::size_t used = 0;
    double parsed = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception &) {
    throw ConfigError("bad numeric value for " + key + ": " + value);
  }
}

class ConfigReader {
public:
  explicit ConfigReader(std::map<std::string, std::string> values)
      : values_(std::move(values)) { }

  bool has(const std::string &key) const { return values_.count(key) > 0; }

  void str(const std::string &key, std::string &out) {
    if (auto it = values_.find(key); it != values_.end()) {
      out = it->second;
      used_.insert(key);
    }
  }

  void path(const std::string &key, std::filesystem::path &out) {
    if (auto it = values_.find(key); it != values_.end()) {
      out = it->second;
      used_.insert(key);
    }
  }

  template <typename T>
  void num(const std::string &key, T &out) {
    if (auto it = values_.find(key); it != values_.end()) {
      out = parse_number<T>(it->second, key);
      used_.insert(key);
    }
  }

  void int_list(const std::string &key, std::vector<int> &out) {
    if (auto it = values_.find(key); it != values_.end()) {
      std::vector<int> parsed;
      for (const std::string &piece: split_list(it->second))
        parsed.push_back(parse_number<int>(piece, key));
      out = std::move(parsed);
      used_.insert(key);
    }
  }

  void str_list(const std::string &key, std::vector<std::string> &out) {
    if (auto it = values_.find(key); it != values_.end()) {
      out = split_list(it->second);
      used_.insert(key);
    }
  }

  void check_all_used() const {
    for (const auto &[key, value]: values_)
      if (!used_.count(key)) throw ConfigError("unknown config key: " + key);
  }

private:
  std::map<std::string, std::string> values_;
  std::set<std::string> used_;
};

}  // namespace detail

inline RunConfig config_from_values(
    std::map<std::string, std::string> values) {
  detail::ConfigReader reader(std::move(values));
  RunConfig cfg;
  reader.str("task", cfg.task);
  reader.path("dataset", cfg.dataset);
  reader.str("dataset_name", cfg.dataset_name);
  reader.str("smiles_column", cfg.smiles_column);
  reader.str("label_column", cfg.label_column);
  reader.str("property_name", cfg.property_name);
  reader.str("arm", cfg.arm);
  reader.int_list("m", cfg.m_values);
  reader.num("n_variants", cfg.n_variants);
  reader.num("k_icl", cfg.k_icl);
  reader.num("test_size", cfg.test_size);
  reader.str("icl_strategy", cfg.icl_strategy);
  reader.str("linkage", cfg.linkage);
  reader.num("cluster_threshold", cfg.cluster_threshold);
  reader.num("fp_radius", cfg.fp_radius);
  reader.num("fp_width", cfg.fp_width);
  reader.str("endpoint_kind", cfg.endpoint_kind);
  reader.path("output_dir", cfg.output_dir);
  reader.path("cache_path", cfg.cache_path);
  reader.path("template_dir", cfg.template_dir);

  reader.num("seeds.split", cfg.seeds.split);
  reader.num("seeds.icl", cfg.seeds.icl);
  reader.num("seeds.enumeration", cfg.seeds.enumeration);
  reader.num("seeds.mock", cfg.seeds.mock);

  reader.str("endpoint.base_url", cfg.endpoint.base_url);
  reader.str("endpoint.model", cfg.endpoint.model_name);
  reader.str("endpoint.api_key_env", cfg.endpoint.api_key_env);
  reader.num("endpoint.temperature", cfg.endpoint.temperature);
  reader.num("endpoint.max_retries", cfg.endpoint.max_retries);
  reader.num("endpoint.request_timeout", cfg.endpoint.request_timeout);
  reader.num("endpoint.max_in_flight", cfg.endpoint.max_in_flight);
  reader.num("endpoint.backoff_ms", cfg.endpoint.backoff_ms);

  reader.str("mock.kind", cfg.mock.kind);
  reader.str_list("mock.fixed", cfg.mock.fixed);
  reader.num("mock.p_err", cfg.mock.p_err);
  reader.num("mock.p_err_original", cfg.mock.p_err_original);
  reader.num("mock.p_err_reformed", cfg.mock.p_err_reformed);
  reader.str("mock.rank_policy", cfg.mock.rank_policy);

  reader.check_all_used();
  if (cfg.dataset_name.empty() && !cfg.dataset.empty())
    cfg.dataset_name = cfg.dataset.stem().string();
  return cfg;
}

inline RunConfig load_run_config(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return config_from_values(detail::parse_config_text(buffer.str()));
  } catch (const ConfigError &e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

inline void validate_config(const RunConfig &cfg) {
  auto expect = [](bool ok, const std::string &message) {
    if (!ok) throw ConfigError(message);
  };
  expect(cfg.task == "property" || cfg.task == "reaction",
         "task must be property or reaction");
  expect(!cfg.dataset.empty(), "dataset path is required");
  expect(std::filesystem::exists(cfg.dataset),
         "dataset does not exist: " + cfg.dataset.string());
  expect(cfg.arm == "original" || cfg.arm == "reformed" || cfg.arm == "both",
         "arm must be original, reformed or both");
  expect(!cfg.m_values.empty(), "m needs at least one sample count");
  for (int m: cfg.m_values) expect(m >= 1, "every m must be >= 1");
  expect(cfg.n_variants >= 1, "n_variants must be >= 1");
  expect(cfg.k_icl >= 1, "k_icl must be >= 1");
  expect(cfg.test_size >= 1, "test_size must be >= 1");
  expect(cfg.icl_strategy == "diverse" || cfg.icl_strategy == "random",
         "icl_strategy must be diverse or random");
  expect(cfg.linkage == "single" || cfg.linkage == "average"
             || cfg.linkage == "complete",
         "linkage must be single, average or complete");
  expect(cfg.cluster_threshold >= 0.0 && cfg.cluster_threshold <= 1.0,
         "cluster_threshold must lie in [0, 1]");
  expect(cfg.fp_radius >= 0 && cfg.fp_radius <= 6,
         "fp_radius must lie in [0, 6]");
  expect(cfg.fp_width >= 64 && (cfg.fp_width & (cfg.fp_width - 1)) == 0,
         "fp_width must be a power of two >= 64");
  expect(cfg.endpoint_kind == "mock" || cfg.endpoint_kind == "http",
         "endpoint_kind must be mock or http");
  if (cfg.endpoint_kind == "http")
    expect(!cfg.endpoint.base_url.empty(),
           "endpoint.base_url is required for endpoint_kind = http");
  expect(cfg.endpoint.max_in_flight >= 1, "max_in_flight must be >= 1");
  expect(cfg.endpoint.max_retries >= 0, "max_retries must be >= 0");
  if (!cfg.mock.kind.empty())
    expect(cfg.mock.kind == "fixed_answers"
               || cfg.mock.kind == "noisy_classifier"
               || cfg.mock.kind == "template_reactor",
           "mock.kind must be fixed_answers, noisy_classifier or "
           "template_reactor");
  expect(cfg.mock.rank_policy == "echo" || cfg.mock.rank_policy == "reverse"
             || cfg.mock.rank_policy == "shortest_first",
         "mock.rank_policy must be echo, reverse or shortest_first");
  expect(!cfg.output_dir.empty(), "output_dir is required");
  if (!cfg.template_dir.empty())
    expect(std::filesystem::is_directory(cfg.template_dir),
           "template_dir does not exist: " + cfg.template_dir.string());
}

}  // namespace moluq

#endif  // MOLUQ_CONFIG_HPP_
