//
// Project MolUQ - Copyright 2026 MolUQ Developers.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLUQ_LLMCLIENT_HPP_
#define MOLUQ_LLMCLIENT_HPP_

#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "moluq/hash.hpp"
#include "moluq/prompts.hpp"
#include "moluq/rng.hpp"
#include "moluq/uq.hpp"

namespace moluq {

class ClientError: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class EndpointUnreachable: public ClientError {
  using ClientError::ClientError;
};

class AuthError: public ClientError {
  using ClientError::ClientError;
};

class MalformedResponse: public ClientError {
  using ClientError::ClientError;
};

class CacheError: public ClientError {
  using ClientError::ClientError;
};

struct EndpointConfig {
  std::string base_url;  // empty means only the mock endpoint is usable
  std::string model_name = "gpt-4";
  std::string api_key_env = "MOLUQ_API_KEY";
  double temperature = 1.0;
  int max_retries = 3;
  double request_timeout = 60.0;  // seconds
  int max_in_flight = 4;
  int backoff_ms = 250;
};

// One completion request. Only model, prompt text and temperature reach the
// wire; the remaining fields are in-process metadata that lets the mock
// oracle resolve ground truth without scraping the prompt.
struct CompletionRequest {
  std::string model;
  std::string prompt_text;
  double temperature = 1.0;
  int sample_index = 0;
  std::string item_hint;
  std::string variant_hint;
  std::vector<std::string> rank_candidates;
};

class Endpoint {
public:
  virtual ~Endpoint() = default;
  virtual std::string complete(const CompletionRequest &request) = 0;
};

// Everything that identifies a sample: same inputs, same key, any change in
// model, prompt bytes, temperature bits or index gives a fresh key.
inline std::string cache_key(std::string_view model, std::string_view prompt,
                             double temperature, int sample_index) {
  ByteWriter w;
  w.str(model).str(prompt).u64(std::bit_cast<std::uint64_t>(temperature));
  w.u64(static_cast<std::uint64_t>(sample_index));
  return sha256_hex(w.bytes());
}

struct CacheEntry {
  std::string key;
  std::string response_text;
  std::int64_t timestamp = 0;
  std::optional<std::int64_t> token_usage;
};

// Append-only JSON-lines store. One line per completion keyed by
// cache_key(); a truncated final line (crashed writer) is dropped on load,
// anything else malformed is an error.
class ResponseCache {
public:
  explicit ResponseCache(std::filesystem::path path)
      : path_(std::move(path)) {
    load();
  }

  const std::filesystem::path &path() const noexcept { return path_; }

  std::optional<CacheEntry> get(const std::string &key) const {
    std::lock_guard lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  void put(CacheEntry entry) {
    nlohmann::json line = {
        {"key", entry.key},
        {"response", entry.response_text},
        {"timestamp", entry.timestamp},
    };
    if (entry.token_usage) line["tokens"] = *entry.token_usage;
    std::lock_guard lock(mutex_);
    if (!out_.is_open()) {
      out_.open(path_, std::ios::app);
      if (!out_) throw CacheError("cannot open cache for append: "
                                  + path_.string());
    }
    out_ << line.dump() << '\n';
    out_.flush();
    entries_[entry.key] = std::move(entry);
  }

  std::size_t size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
  }

private:
  void load() {
    std::ifstream in(path_);
    if (!in) return;  // a missing cache file simply starts empty
    std::string line;
    std::vector<std::string> lines;
    while (std::getline(in, line))
      if (!line.empty()) lines.push_back(line);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      nlohmann::json parsed =
          nlohmann::json::parse(lines[i], nullptr, false);
      if (parsed.is_discarded() || !parsed.contains("key")
          || !parsed.contains("response")) {
        if (i + 1 == lines.size()) break;  // torn final write
        throw CacheError("corrupt cache line " + std::to_string(i + 1)
                         + " in " + path_.string());
      }
      CacheEntry entry;
      entry.key = parsed["key"].get<std::string>();
      entry.response_text = parsed["response"].get<std::string>();
      entry.timestamp = parsed.value("timestamp", std::int64_t {0});
      if (parsed.contains("tokens"))
        entry.token_usage = parsed["tokens"].get<std::int64_t>();
      entries_[entry.key] = std::move(entry);
    }
  }

  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, CacheEntry> entries_;
  std::ofstream out_;
};

// Chat-completions client over HTTP(S). Transport failures, 429 and 5xx
// responses retry with exponential backoff; auth and protocol problems do
// not (retrying cannot fix them).
class HttpEndpoint: public Endpoint {
public:
  explicit HttpEndpoint(EndpointConfig cfg) : cfg_(std::move(cfg)) {
    auto scheme_end = cfg_.base_url.find("://");
    if (scheme_end == std::string::npos)
      throw std::invalid_argument("base_url needs a scheme: "
                                  + cfg_.base_url);
    auto path_start = cfg_.base_url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) {
      origin_ = cfg_.base_url;
    } else {
      origin_ = cfg_.base_url.substr(0, path_start);
      prefix_ = cfg_.base_url.substr(path_start);
      while (!prefix_.empty() && prefix_.back() == '/') prefix_.pop_back();
    }
    if (!cfg_.api_key_env.empty())
      if (const char *key = std::getenv(cfg_.api_key_env.c_str())) api_key_ = key;
  }

  std::string complete(const CompletionRequest &request) override {
    nlohmann::json body = {
        {"model", request.model},
        {"messages",
         nlohmann::json::array(
             {{{"role", "user"}, {"content", request.prompt_text}}})},
        {"temperature", request.temperature},
    };
    const std::string payload = body.dump();

    std::string last_failure = "no attempt made";
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
      if (attempt > 0) {
        auto delay = std::chrono::milliseconds(
            static_cast<std::int64_t>(cfg_.backoff_ms) << (attempt - 1));
        std::this_thread::sleep_for(delay);
      }
      httplib::Client client(origin_);
      client.set_connection_timeout(std::chrono::milliseconds(
          static_cast<std::int64_t>(cfg_.request_timeout * 1000)));
      client.set_read_timeout(std::chrono::milliseconds(
          static_cast<std::int64_t>(cfg_.request_timeout * 1000)));
      httplib::Headers headers;
      if (!api_key_.empty())
        headers.emplace("Authorization", "Bearer " + api_key_);

      auto res = client.Post(prefix_ + "/chat/completions", headers, payload,
                             "application/json");
      if (!res) {
        last_failure = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 401 || res->status == 403)
        throw AuthError("endpoint rejected credentials (HTTP "
                        + std::to_string(res->status) + ")");
      if (res->status == 429 || res->status >= 500) {
        last_failure = "HTTP " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200)
        throw MalformedResponse("unexpected HTTP " + std::to_string(res->status)
                                + ": " + res->body.substr(0, 200));
      return extract_content(res->body);
    }
    throw EndpointUnreachable("gave up after "
                              + std::to_string(cfg_.max_retries + 1)
                              + " attempts; last failure: " + last_failure);
  }

private:
  static std::string extract_content(const std::string &body) {
    nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
    if (parsed.is_discarded())
      throw MalformedResponse("response is not JSON");
    try {
      return parsed.at("choices").at(0).at("message").at("content")
          .get<std::string>();
    } catch (const nlohmann::json::exception &) {
      throw MalformedResponse("response lacks choices[0].message.content");
    }
  }

  EndpointConfig cfg_;
  std::string origin_;
  std::string prefix_;
  std::string api_key_;
};

// Scripted in-process endpoint used by tests and offline runs.
struct MockBehavior {
  enum class Kind { FixedAnswers, NoisyClassifier, TemplateReactor };
  enum class RankPolicy { Echo, Reverse, ShortestFirst };

  struct ItemSpec {
    std::string gold;
    double p_err = 0.0;
  };

  Kind kind = Kind::FixedAnswers;
  std::vector<std::string> fixed;          // FixedAnswers cycles through these
  std::map<std::string, ItemSpec> items;   // keyed by item hint
  std::string default_gold = "Yes";
  double default_p_err = 0.0;
  // When set, overrides the per-item error rate by prompt variant
  // ("original" / "reformed"); this is how arm-dependent noise is scripted.
  std::map<std::string, double> p_err_by_arm;
  RankPolicy rank_policy = RankPolicy::Echo;
};

class MockOracle: public Endpoint {
public:
  MockOracle(MockBehavior behavior, std::uint64_t seed)
      : behavior_(std::move(behavior)), seed_(seed) { }

  std::string complete(const CompletionRequest &request) override {
    ++request_count_;
    if (!request.rank_candidates.empty()) return rank_reply(request);

    if (behavior_.kind == MockBehavior::Kind::FixedAnswers) {
      if (behavior_.fixed.empty()) return "";
      return behavior_.fixed[static_cast<std::size_t>(request.sample_index)
                             % behavior_.fixed.size()];
    }

    MockBehavior::ItemSpec spec {behavior_.default_gold,
                                 behavior_.default_p_err};
    if (auto it = behavior_.items.find(request.item_hint);
        it != behavior_.items.end())
      spec = it->second;
    double p_err = spec.p_err;
    if (auto it = behavior_.p_err_by_arm.find(request.variant_hint);
        it != behavior_.p_err_by_arm.end())
      p_err = it->second;

    // Stateless draw: keyed by (seed, item, variant, index) so the outcome
    // does not depend on request order or cache warmth.
    ByteWriter salt;
    salt.str(request.item_hint).str(request.variant_hint);
    salt.u64(static_cast<std::uint64_t>(request.sample_index));
    rng::Engine eng = rng::derive(seed_, salt.bytes());
    bool flip = rng::uniform01(eng) < p_err;

    if (behavior_.kind == MockBehavior::Kind::NoisyClassifier) {
      if (!flip) return spec.gold;
      return spec.gold == "Yes" ? "No" : "Yes";
    }
    // TemplateReactor: a corrupted generation is unparseable by design.
    if (!flip) return spec.gold;
    return "?" + spec.gold;
  }

  int request_count() const noexcept { return request_count_.load(); }

private:
  std::string rank_reply(const CompletionRequest &request) {
    std::vector<std::string> order = request.rank_candidates;
    switch (behavior_.rank_policy) {
    case MockBehavior::RankPolicy::Echo:
      break;
    case MockBehavior::RankPolicy::Reverse:
      std::reverse(order.begin(), order.end());
      break;
    case MockBehavior::RankPolicy::ShortestFirst:
      std::stable_sort(order.begin(), order.end(),
                       [](const std::string &a, const std::string &b) {
                         return a.size() < b.size();
                       });
      break;
    }
    std::string reply;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i > 0) reply += '\n';
      reply += order[i];
    }
    return reply;
  }

  MockBehavior behavior_;
  std::uint64_t seed_;
  std::atomic<int> request_count_ {0};
};

inline std::shared_ptr<Endpoint> mock_oracle(MockBehavior behavior,
                                             std::uint64_t seed) {
  return std::make_shared<MockOracle>(std::move(behavior), seed);
}

struct RankResult {
  std::vector<std::string> ordered;
  std::string best;
  bool used_fallback = false;
};

// Sampling front end: cache lookups first, then bounded-parallel fetches of
// the misses, each persisted before use.
class LlmClient {
public:
  LlmClient(std::shared_ptr<Endpoint> endpoint, EndpointConfig cfg,
            ResponseCache *cache)
      : endpoint_(std::move(endpoint)), cfg_(std::move(cfg)), cache_(cache) { }

  SampleSet sample(const Prompt &prompt, int m, std::string_view task,
                   std::string_view item, std::string_view variant) {
    if (m < 1) throw std::invalid_argument("sample count must be >= 1");
    SampleSet set;
    set.task = std::string(task);
    set.item = std::string(item);
    set.prompt_variant = std::string(variant);
    set.responses.resize(m);
    set.parsed.resize(m);

    std::vector<int> misses;
    std::vector<std::string> keys(m);
    for (int i = 0; i < m; ++i) {
      keys[i] = cache_key(cfg_.model_name, prompt.text(), cfg_.temperature, i);
      if (auto hit = cache_ ? cache_->get(keys[i]) : std::nullopt) {
        set.responses[i] = hit->response_text;
      } else {
        misses.push_back(i);
      }
    }

    fetch_all(prompt, misses, keys, item, variant, set.responses);
    for (int i = 0; i < m; ++i)
      set.parsed[i] = parse_answer(set.responses[i], prompt.answer_format);
    return set;
  }

  RankResult rank_variants(const VariantList &variants,
                           const PromptTemplates &templates =
                               PromptTemplates::defaults()) {
    Prompt prompt = render_rank_prompt(variants, templates);
    CompletionRequest request;
    request.model = cfg_.model_name;
    request.prompt_text = prompt.text();
    request.temperature = cfg_.temperature;
    request.sample_index = 0;
    request.item_hint = variants.parent_canonical;
    request.rank_candidates = variants.variants;

    std::string key =
        cache_key(cfg_.model_name, prompt.text(), cfg_.temperature, 0);
    std::string reply;
    if (auto hit = cache_ ? cache_->get(key) : std::nullopt) {
      reply = hit->response_text;
    } else {
      reply = dispatch(request);
      store(key, reply);
    }
    return match_ranking(variants.variants, reply);
  }

  int requests_issued() const noexcept { return requests_issued_.load(); }

private:
  void fetch_all(const Prompt &prompt, const std::vector<int> &misses,
                 const std::vector<std::string> &keys, std::string_view item,
                 std::string_view variant,
                 std::vector<std::string> &responses) {
    if (misses.empty()) return;
    if (!endpoint_)
      throw EndpointUnreachable("no endpoint configured and cache misses "
                                "remain");
    std::mutex failure_mutex;
    std::exception_ptr failure;
    std::size_t next = 0;
    while (next < misses.size()) {
      std::size_t batch =
          std::min<std::size_t>(cfg_.max_in_flight, misses.size() - next);
      std::vector<std::thread> workers;
      workers.reserve(batch);
      for (std::size_t w = 0; w < batch; ++w) {
        int index = misses[next + w];
        workers.emplace_back([&, index] {
          try {
            CompletionRequest request;
            request.model = cfg_.model_name;
            request.prompt_text = prompt.text();
            request.temperature = cfg_.temperature;
            request.sample_index = index;
            request.item_hint = std::string(item);
            request.variant_hint = std::string(variant);
            std::string text = dispatch(request);
            store(keys[index], text);
            responses[index] = std::move(text);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        });
      }
      for (std::thread &t: workers) t.join();
      if (failure) std::rethrow_exception(failure);
      next += batch;
    }
  }

  std::string dispatch(const CompletionRequest &request) {
    ++requests_issued_;
    return endpoint_->complete(request);
  }

  void store(const std::string &key, const std::string &text) {
    if (!cache_) return;
    CacheEntry entry;
    entry.key = key;
    entry.response_text = text;
    entry.timestamp = static_cast<std::int64_t>(std::time(nullptr));
    cache_->put(std::move(entry));
  }

  static std::string trim_reply_line(std::string_view line) {
    auto is_space = [](char c) {
      return std::isspace(static_cast<unsigned char>(c));
    };
    while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
    while (!line.empty() && is_space(line.back())) line.remove_suffix(1);
    // Leading list markers: "1. ", "2) ", "- ", "* ".
    std::size_t digits = 0;
    while (digits < line.size()
           && std::isdigit(static_cast<unsigned char>(line[digits])))
      ++digits;
    if (digits > 0 && digits < line.size()
        && (line[digits] == '.' || line[digits] == ')')) {
      line.remove_prefix(digits + 1);
    } else if (!line.empty() && (line.front() == '-' || line.front() == '*')) {
      line.remove_prefix(1);
    }
    while (!line.empty() && is_space(line.front())) line.remove_prefix(1);
    return std::string(line);
  }

  static RankResult match_ranking(const std::vector<std::string> &inputs,
                                  std::string_view reply) {
    std::vector<bool> taken(inputs.size(), false);
    RankResult result;
    std::size_t pos = 0;
    while (pos <= reply.size()) {
      std::size_t end = reply.find('\n', pos);
      std::string_view raw =
          reply.substr(pos, end == std::string_view::npos ? std::string_view::npos
                                                          : end - pos);
      std::string line = trim_reply_line(raw);
      if (!line.empty()) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
          if (!taken[i] && inputs[i] == line) {
            taken[i] = true;
            result.ordered.push_back(inputs[i]);
            break;
          }
        }
      }
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    result.used_fallback = result.ordered.empty();
    for (std::size_t i = 0; i < inputs.size(); ++i)
      if (!taken[i]) result.ordered.push_back(inputs[i]);
    result.best = result.ordered.front();
    return result;
  }

  std::shared_ptr<Endpoint> endpoint_;
  EndpointConfig cfg_;
  ResponseCache *cache_;
  std::atomic<int> requests_issued_ {0};
};

}  // namespace moluq

#endif  // MOLUQ_LLMCLIENT_HPP_
