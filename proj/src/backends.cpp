#include <httplib.h>

#include <cstdlib>
#include <thread>

#include "sbys/digest.hpp"
#include "sbys/error.hpp"
#include "sbys/llm.hpp"

namespace sbys {

// ---------------------------------------------------------------- MockBackend

MockBackend::MockBackend(std::string model_id, Responder fallback)
    : model_id_(std::move(model_id)), fallback_(std::move(fallback)) {}

void MockBackend::script(const std::string& prompt, std::string response) {
  std::lock_guard lock(mutex_);
  scripted_[sha256_hex(prompt)] = std::move(response);
}

void MockBackend::set_fallback(Responder fallback) {
  std::lock_guard lock(mutex_);
  fallback_ = std::move(fallback);
}

std::string MockBackend::complete_once(const Conversation& conversation,
                                       const GenerationConfig&) {
  const auto& last = conversation.messages.back();
  Responder fallback;
  {
    std::lock_guard lock(mutex_);
    log_.push_back({conversation.messages, conversation.created_for, last.template_tag});
    if (const auto it = scripted_.find(sha256_hex(last.content)); it != scripted_.end()) {
      return it->second;
    }
    fallback = fallback_;
  }
  if (!fallback) {
    throw BackendRefusal("mock backend has no scripted response for this prompt");
  }
  return fallback(conversation);
}

std::vector<MockBackend::Request> MockBackend::requests() const {
  std::lock_guard lock(mutex_);
  return log_;
}

std::size_t MockBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return log_.size();
}

void MockBackend::clear_log() {
  std::lock_guard lock(mutex_);
  log_.clear();
}

// ---------------------------------------------------------------- RateLimiter

RateLimiter::RateLimiter(double rate_per_minute, double burst)
    : rate_per_second_(rate_per_minute / 60.0),
      burst_(burst),
      tokens_(burst),
      last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (rate_per_second_ <= 0) return;  // unlimited
  std::unique_lock lock(mutex_);
  while (true) {
    const auto now = std::chrono::steady_clock::now();
    const std::chrono::duration<double> elapsed = now - last_;
    tokens_ = std::min(burst_, tokens_ + elapsed.count() * rate_per_second_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_per_second_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

// ------------------------------------------------------------ HttpChatBackend

namespace {

std::pair<std::string, std::string> split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ConfigError("endpoint '" + url + "' must start with http:// or https://");
  }
  const auto slash = url.find('/', scheme + 3);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

std::string extract_content(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(std::string("malformed completion response: ") + e.what());
  }
  if (j.contains("choices")) {
    const auto& choices = j.at("choices");
    if (!choices.is_array() || choices.empty()) {
      throw EmptyCompletion("completion response has no choices");
    }
    const auto& choice = choices.at(0);
    if (choice.value("finish_reason", std::string{}) == "content_filter") {
      throw BackendRefusal("completion was blocked by the provider's content filter");
    }
    const auto& content = choice.at("message").at("content");
    return content.is_null() ? std::string{} : content.get<std::string>();
  }
  if (j.contains("content") && j.at("content").is_string()) {
    return j.at("content").get<std::string>();
  }
  throw TransportError("completion response has neither 'choices' nor 'content'");
}

}  // namespace

HttpChatBackend::HttpChatBackend(BackendDescriptor descriptor)
    : descriptor_(std::move(descriptor)), limiter_(descriptor_.requests_per_minute) {
  if (!descriptor_.endpoint || descriptor_.endpoint->empty()) {
    throw ConfigError("http_chat backend requires an endpoint");
  }
  std::tie(base_url_, path_) = split_endpoint(*descriptor_.endpoint);
}

std::string HttpChatBackend::complete_once(const Conversation& conversation,
                                           const GenerationConfig& config) {
  limiter_.acquire();
  httplib::Client client(base_url_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config.timeout);
  const auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());

  httplib::Headers headers;
  if (const char* key = std::getenv(descriptor_.auth_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto body =
      chat_request_body(descriptor_.model_id, conversation.messages, config).dump();
  const auto started = std::chrono::steady_clock::now();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    const auto elapsed = std::chrono::steady_clock::now() - started;
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || elapsed >= config.timeout) {
      throw Timeout("request to " + base_url_ + " timed out");
    }
    throw TransportError("request to " + base_url_ + " failed: " + httplib::to_string(err));
  }
  if (res->status == 408 || res->status == 429 || res->status >= 500) {
    throw TransportError("endpoint returned HTTP " + std::to_string(res->status));
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendRefusal("endpoint returned HTTP " + std::to_string(res->status) + ": " +
                         res->body.substr(0, 200));
  }
  return extract_content(res->body);
}

// ---------------------------------------------------------------- factory

std::shared_ptr<ChatBackend> make_backend(const BackendDescriptor& descriptor,
                                          std::shared_ptr<ResponseCache> cache,
                                          MockBackend::Responder mock_responder) {
  std::shared_ptr<ChatBackend> live;
  switch (descriptor.kind) {
    case BackendKind::http_chat:
      live = std::make_shared<HttpChatBackend>(descriptor);
      break;
    case BackendKind::mock:
      live = std::make_shared<MockBackend>(descriptor.model_id, std::move(mock_responder));
      break;
    case BackendKind::replay:
      if (!cache) throw ConfigError("replay backend requires a cache file");
      return std::make_shared<CachedBackend>(std::move(cache), nullptr, descriptor.model_id);
  }
  if (!cache) return live;
  return std::make_shared<CachedBackend>(std::move(cache), std::move(live),
                                         descriptor.model_id);
}

}  // namespace sbys
