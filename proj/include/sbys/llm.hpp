#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace sbys {

enum class Role { user, assistant };
std::string_view to_string(Role role);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
  // Template that produced a user turn ("" for assistant turns and free text).
  // Local bookkeeping only; never sent over the wire or hashed.
  std::string template_tag;
};

struct Provenance {
  std::string doc_id;
  std::string stage;
};

struct Conversation {
  std::vector<ChatMessage> messages;
  std::string model_id;
  Provenance created_for;

  bool empty() const { return messages.empty(); }
  std::size_t size() const { return messages.size(); }
  // Roles alternate user/assistant starting with user, contents non-empty.
  bool well_formed() const;
  bool awaiting_completion() const {
    return well_formed() && !messages.empty() && messages.back().role == Role::user;
  }
};

struct GenerationConfig {
  double temperature = 0.0;  // greedy
  int max_output_tokens = 4096;
  std::chrono::milliseconds timeout{120'000};
  int retries = 3;
  std::chrono::milliseconds backoff{500};  // doubled after each retry
};

enum class BackendKind { http_chat, mock, replay };
std::string_view to_string(BackendKind kind);
BackendKind backend_kind_from_string(std::string_view name);

struct BackendDescriptor {
  BackendKind kind = BackendKind::mock;
  std::optional<std::string> endpoint;
  std::string model_id = "mock";
  std::string auth_env = "SBYS_API_KEY";  // name of the env var, never the key
  double requests_per_minute = 30.0;
};

// A chat-completion provider. Implementations must be safe to call from
// several threads at once.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string model_id() const = 0;
  // One attempt, no retries. Throws BackendError subclasses.
  virtual std::string complete_once(const Conversation& conversation,
                                    const GenerationConfig& config) = 0;
};

// Returns the assistant text for a conversation that ends in a user turn,
// retrying TransportError up to config.retries times with exponential
// backoff. Throws PreconditionError, BackendError subclasses.
std::string complete(const Conversation& conversation, const GenerationConfig& config,
                     ChatBackend& backend);

// Appends `user_text` and the completion to a copy of `conversation`.
// The input must be empty or end with an assistant turn.
std::pair<std::string, Conversation> continue_conversation(const Conversation& conversation,
                                                           ChatMessage user_turn,
                                                           const GenerationConfig& config,
                                                           ChatBackend& backend);
std::pair<std::string, Conversation> continue_conversation(const Conversation& conversation,
                                                           const std::string& user_text,
                                                           const GenerationConfig& config,
                                                           ChatBackend& backend);

// Content hash over model id, ordered (role, content) pairs, temperature
// and max output tokens.
std::string cache_key(const std::string& model_id, const std::vector<ChatMessage>& messages,
                      const GenerationConfig& config);

// Chat-completion request body: {model, messages[{role, content}],
// temperature, max_tokens}.
nlohmann::json chat_request_body(const std::string& model_id,
                                 const std::vector<ChatMessage>& messages,
                                 const GenerationConfig& config);

void to_json(nlohmann::json& j, const ChatMessage& m);
void from_json(const nlohmann::json& j, ChatMessage& m);
void to_json(nlohmann::json& j, const Conversation& c);
void from_json(const nlohmann::json& j, Conversation& c);

// ---------------------------------------------------------------------------

// Scripted in-process backend. Responses are looked up by the SHA-256 of the
// last user message; unscripted prompts go to the fallback responder.
class MockBackend : public ChatBackend {
 public:
  using Responder = std::function<std::string(const Conversation&)>;

  struct Request {
    std::vector<ChatMessage> messages;
    Provenance created_for;
    std::string last_template;  // template_tag of the final user turn
  };

  explicit MockBackend(std::string model_id = "mock", Responder fallback = {});

  void script(const std::string& prompt, std::string response);
  void set_fallback(Responder fallback);

  std::string model_id() const override { return model_id_; }
  std::string complete_once(const Conversation& conversation,
                            const GenerationConfig& config) override;

  std::vector<Request> requests() const;
  std::size_t call_count() const;
  void clear_log();

 private:
  std::string model_id_;
  mutable std::mutex mutex_;
  std::map<std::string, std::string> scripted_;
  Responder fallback_;
  std::vector<Request> log_;
};

// Token bucket: `rate_per_minute` tokens per minute, burst of `burst`.
class RateLimiter {
 public:
  explicit RateLimiter(double rate_per_minute, double burst = 1.0);
  void acquire();

 private:
  std::mutex mutex_;
  double rate_per_second_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

// POSTs the minimal chat-completion JSON to an http(s) endpoint. Reads
// OpenAI-style `choices[0].message.content`, or a top-level `content`.
class HttpChatBackend : public ChatBackend {
 public:
  explicit HttpChatBackend(BackendDescriptor descriptor);

  std::string model_id() const override { return descriptor_.model_id; }
  std::string complete_once(const Conversation& conversation,
                            const GenerationConfig& config) override;

 private:
  BackendDescriptor descriptor_;
  std::string base_url_;
  std::string path_;
  RateLimiter limiter_;
};

struct CacheStats {
  std::size_t hits = 0;
  std::size_t misses = 0;
  std::size_t live_calls = 0;
  std::size_t entries = 0;
};
void to_json(nlohmann::json& j, const CacheStats& s);

// Append-only JSONL record of completions keyed by cache_key(). Concurrent
// lookups share a lock; appends are serialized and flushed per line.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& key) const;
  void insert(const std::string& key, const std::string& model_id, const std::string& response);
  std::size_t size() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::string> entries_;
  std::ofstream out_;
};

// Serves completions from a ResponseCache. With an inner backend, misses
// are forwarded and recorded; without one (replay), a miss throws ReplayMiss.
class CachedBackend : public ChatBackend {
 public:
  CachedBackend(std::shared_ptr<ResponseCache> cache, std::shared_ptr<ChatBackend> inner,
                std::string model_id);

  std::string model_id() const override { return model_id_; }
  std::string complete_once(const Conversation& conversation,
                            const GenerationConfig& config) override;
  CacheStats stats() const;

 private:
  std::shared_ptr<ResponseCache> cache_;
  std::shared_ptr<ChatBackend> inner_;
  std::string model_id_;
  std::atomic<std::size_t> hits_{0};
  std::atomic<std::size_t> misses_{0};
  std::atomic<std::size_t> live_calls_{0};
};

// Builds the backend named by `descriptor`. When `cache` is given, live
// backends are wrapped for recording; `replay` requires a cache.
std::shared_ptr<ChatBackend> make_backend(const BackendDescriptor& descriptor,
                                          std::shared_ptr<ResponseCache> cache,
                                          MockBackend::Responder mock_responder = {});

}  // namespace sbys
