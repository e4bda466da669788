// Copyright 2026 The Bargain Arena Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Chat-completion transport with a record/replay cache.
//
// Requests and responses use the provider-style chat-completion JSON bodies.
// In Record mode every completed call is appended to a JSONL cache of
// {key_digest, request, response}; Replay serves only from that cache and
// never touches the network; Live ignores the cache entirely.

#ifndef BARGAIN_LLM_CLIENT_HPP_
#define BARGAIN_LLM_CLIENT_HPP_

#include <openssl/evp.h>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

namespace bargain {

using nlohmann::json;

struct ChatMessage {
  std::string role;  // "system" | "user" | "assistant"
  std::string content;
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 1.0;
  int max_output_tokens = 1024;
  // Provider sampling seed. Part of the cache key so repeated games with the
  // same opening messages (e.g. the same pairing in another trial) stay distinct.
  std::optional<std::int64_t> seed;
};

enum class LlmErrorKind { kAuth, kRetriesExhausted, kMalformedResponse, kCacheMiss, kRequestRejected };

inline std::string_view LlmErrorKindName(LlmErrorKind k) {
  switch (k) {
    case LlmErrorKind::kAuth: return "auth";
    case LlmErrorKind::kRetriesExhausted: return "retries-exhausted";
    case LlmErrorKind::kMalformedResponse: return "malformed-response";
    case LlmErrorKind::kCacheMiss: return "cache-miss";
    case LlmErrorKind::kRequestRejected: return "request-rejected";
  }
  return "?";
}

class LlmError : public std::runtime_error {
 public:
  LlmError(LlmErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(LlmErrorKindName(kind)) + ": " + what), kind_(kind) {}
  LlmErrorKind kind() const { return kind_; }

  // Errors that no amount of retrying or skipping games will fix.
  bool fatal() const { return kind_ == LlmErrorKind::kAuth || kind_ == LlmErrorKind::kCacheMiss; }

 private:
  LlmErrorKind kind_;
};

inline json MessagesJson(const std::vector<ChatMessage>& messages) {
  json out = json::array();
  for (const auto& m : messages) out.push_back({{"role", m.role}, {"content", m.content}});
  return out;
}

inline json RequestBody(const ChatRequest& req) {
  json j{{"model", req.model},
         {"messages", MessagesJson(req.messages)},
         {"temperature", req.temperature},
         {"max_tokens", req.max_output_tokens}};
  if (req.seed) j["seed"] = *req.seed;
  return j;
}

inline ChatRequest RequestFromBody(const json& j) {
  ChatRequest r;
  r.model = j.at("model").get<std::string>();
  for (const auto& m : j.at("messages"))
    r.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  r.temperature = j.at("temperature").get<double>();
  r.max_output_tokens = j.value("max_tokens", 1024);
  if (j.contains("seed")) r.seed = j.at("seed").get<std::int64_t>();
  return r;
}

inline std::string Sha256Hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

// Digest of (model, temperature, seed, full message list).
inline std::string CacheKeyDigest(const ChatRequest& req) {
  json key{{"model", req.model}, {"temperature", req.temperature}, {"messages", MessagesJson(req.messages)}};
  if (req.seed) key["seed"] = *req.seed;
  return Sha256Hex(key.dump());
}

// ---------------------------------------------------------------------------
// Time

class Clock {
 public:
  using time_point = std::chrono::steady_clock::time_point;
  virtual ~Clock() = default;
  virtual time_point Now() = 0;
  virtual void SleepUntil(time_point t) = 0;
  void SleepFor(std::chrono::milliseconds d) { SleepUntil(Now() + d); }
};

class SystemClock final : public Clock {
 public:
  time_point Now() override { return std::chrono::steady_clock::now(); }
  void SleepUntil(time_point t) override { std::this_thread::sleep_until(t); }
};

// Caps dispatches to `per_minute` in any sliding 60-second window. Acquire()
// blocks while holding the lock, so concurrent callers are served in turn.
class RateLimiter {
 public:
  RateLimiter(int per_minute, Clock& clock) : per_minute_(per_minute), clock_(clock) {}

  void Acquire() {
    std::lock_guard lock(mu_);
    if (per_minute_ <= 0) return;
    constexpr auto kWindow = std::chrono::seconds(60);
    while (true) {
      const auto now = clock_.Now();
      while (!sent_.empty() && now - sent_.front() >= kWindow) sent_.pop_front();
      if (static_cast<int>(sent_.size()) < per_minute_) {
        sent_.push_back(now);
        return;
      }
      clock_.SleepUntil(sent_.front() + kWindow);
    }
  }

 private:
  int per_minute_;
  Clock& clock_;
  std::mutex mu_;
  std::deque<Clock::time_point> sent_;
};

// ---------------------------------------------------------------------------
// Transport

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Thrown by transports when no HTTP response arrived at all.
class TransportFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual HttpResponse Post(const std::string& url, const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body) = 0;
};

// ---------------------------------------------------------------------------
// Cache

struct CacheEntry {
  std::string key_digest;
  json request;
  std::string response;
  friend bool operator==(const CacheEntry&, const CacheEntry&) = default;
};

inline json CacheEntryJson(const CacheEntry& e) {
  return {{"key_digest", e.key_digest}, {"request", e.request}, {"response", e.response}};
}

class ResponseCache {
 public:
  ResponseCache() = default;
  explicit ResponseCache(std::filesystem::path path) : path_(std::move(path)) { Load(); }

  std::optional<std::string> Find(const std::string& digest) const {
    std::lock_guard lock(mu_);
    auto it = entries_.find(digest);
    if (it == entries_.end()) return std::nullopt;
    return it->second.response;
  }

  // Stores an entry and appends it to the backing file as one line.
  void Put(CacheEntry entry) {
    std::lock_guard lock(mu_);
    if (!path_.empty()) {
      std::ofstream out(path_, std::ios::app | std::ios::binary);
      if (!out) throw std::runtime_error("cannot append to cache " + path_.string());
      if (torn_tail_) out << '\n';  // terminate a torn line so the new entry stands alone
      torn_tail_ = false;
      out << CacheEntryJson(entry).dump() + "\n";
      out.flush();
    }
    const std::string key = entry.key_digest;
    entries_.insert_or_assign(key, std::move(entry));
  }

  std::size_t size() const {
    std::lock_guard lock(mu_);
    return entries_.size();
  }

  std::vector<CacheEntry> Entries() const {
    std::lock_guard lock(mu_);
    std::vector<CacheEntry> out;
    for (const auto& [k, v] : entries_) out.push_back(v);
    return out;
  }

  // Rewrites the whole cache atomically (write temp, then rename), sorted by digest.
  void Save(const std::filesystem::path& path) const {
    std::lock_guard lock(mu_);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + tmp);
      for (const auto& [k, v] : entries_) out << CacheEntryJson(v).dump() << '\n';
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  // A torn final line (process killed mid-append) is dropped.
  void Load() {
    if (path_.empty() || !std::filesystem::exists(path_)) return;
    std::ifstream in(path_, std::ios::binary);
    std::string line;
    while (std::getline(in, line)) {
      torn_tail_ = in.eof();
      if (line.empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) continue;
      CacheEntry e{j.at("key_digest").get<std::string>(), j.at("request"), j.at("response").get<std::string>()};
      entries_.insert_or_assign(e.key_digest, std::move(e));
    }
  }

  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::map<std::string, CacheEntry> entries_;
  bool torn_tail_ = false;
};

// ---------------------------------------------------------------------------
// Client

enum class CacheMode { kLive, kRecord, kReplay };

inline std::optional<CacheMode> ParseCacheMode(std::string_view s) {
  if (s == "live") return CacheMode::kLive;
  if (s == "record") return CacheMode::kRecord;
  if (s == "replay") return CacheMode::kReplay;
  return std::nullopt;
}

struct LlmClientConfig {
  std::string endpoint = "https://api.openai.com/v1/chat/completions";
  std::string api_key_env = "OPENAI_API_KEY";
  std::optional<std::string> api_key;  // overrides the environment when set
  CacheMode mode = CacheMode::kRecord;
  std::filesystem::path cache_path;
  int requests_per_minute = 60;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{1000};
};

class LlmClient {
 public:
  LlmClient(LlmClientConfig config, std::shared_ptr<HttpTransport> transport,
            std::shared_ptr<Clock> clock = std::make_shared<SystemClock>())
      : config_(std::move(config)),
        transport_(std::move(transport)),
        clock_(std::move(clock)),
        limiter_(config_.requests_per_minute, *clock_),
        cache_(config_.mode == CacheMode::kLive ? std::filesystem::path() : config_.cache_path) {}

  CacheMode mode() const { return config_.mode; }
  std::uint64_t network_calls() const { return network_calls_.load(); }
  const ResponseCache& cache() const { return cache_; }

  std::string Complete(const ChatRequest& req) {
    if (req.messages.empty()) throw LlmError(LlmErrorKind::kRequestRejected, "request has no messages");
    if (config_.mode == CacheMode::kLive) return CallProvider(req);

    const std::string digest = CacheKeyDigest(req);
    if (auto hit = cache_.Find(digest)) return *hit;
    if (config_.mode == CacheMode::kReplay)
      throw LlmError(LlmErrorKind::kCacheMiss, "no cached response for key " + digest);
    std::string text = CallProvider(req);
    cache_.Put({digest, RequestBody(req), text});
    return text;
  }

 private:
  std::string ApiKey() const {
    if (config_.api_key) return *config_.api_key;
    const char* v = std::getenv(config_.api_key_env.c_str());
    return v ? std::string(v) : std::string();
  }

  static bool Retryable(int status) { return status == 429 || status >= 500; }

  std::string CallProvider(const ChatRequest& req) {
    const std::string key = ApiKey();
    if (key.empty())
      throw LlmError(LlmErrorKind::kAuth, "API key not set (environment variable " + config_.api_key_env + ")");
    const std::string body = RequestBody(req).dump();
    const std::vector<std::pair<std::string, std::string>> headers = {
        {"Authorization", "Bearer " + key}, {"Content-Type", "application/json"}};

    auto backoff = config_.initial_backoff;
    std::string last_problem;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      if (attempt > 0) {
        clock_->SleepFor(backoff);
        backoff *= 2;
      }
      limiter_.Acquire();
      ++network_calls_;
      HttpResponse res;
      try {
        res = transport_->Post(config_.endpoint, headers, body);
      } catch (const TransportFailure& e) {
        last_problem = e.what();
        continue;
      }
      if (res.status == 401 || res.status == 403)
        throw LlmError(LlmErrorKind::kAuth, "provider refused credentials (HTTP " + std::to_string(res.status) + ")");
      if (Retryable(res.status)) {
        last_problem = "HTTP " + std::to_string(res.status);
        continue;
      }
      if (res.status != 200)
        throw LlmError(LlmErrorKind::kRequestRejected, "HTTP " + std::to_string(res.status) + ": " + res.body);
      return ExtractContent(res.body);
    }
    throw LlmError(LlmErrorKind::kRetriesExhausted,
                   std::to_string(config_.max_retries) + " retries exhausted; last: " + last_problem);
  }

  static std::string ExtractContent(const std::string& body) {
    const json j = json::parse(body, nullptr, false);
    if (j.is_discarded()) throw LlmError(LlmErrorKind::kMalformedResponse, "response is not JSON");
    try {
      const auto& content = j.at("choices").at(0).at("message").at("content");
      if (!content.is_string()) throw LlmError(LlmErrorKind::kMalformedResponse, "content is not a string");
      return content.get<std::string>();
    } catch (const json::exception& e) {
      throw LlmError(LlmErrorKind::kMalformedResponse, e.what());
    }
  }

  LlmClientConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  std::shared_ptr<Clock> clock_;
  RateLimiter limiter_;
  ResponseCache cache_;
  std::atomic<std::uint64_t> network_calls_{0};
};

}  // namespace bargain

#endif  // BARGAIN_LLM_CLIENT_HPP_
