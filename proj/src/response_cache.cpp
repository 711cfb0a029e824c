#include <sstream>

#include "sbys/error.hpp"
#include "sbys/llm.hpp"

namespace sbys {

ResponseCache::ResponseCache(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw IoError("cannot read cache '" + path_.string() + "'");
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        // Later lines win; duplicates only arise from concurrent recorders.
        entries_.insert_or_assign(j.at("key").get<std::string>(),
                                  j.at("response").get<std::string>());
      } catch (const nlohmann::json::exception&) {
        // A torn final line from an interrupted run is skipped.
        if (in.peek() != std::char_traits<char>::eof()) {
          throw ParseError(line_no, "corrupt cache entry in '" + path_.string() + "'");
        }
      }
    }
  } else if (path_.has_parent_path()) {
    std::filesystem::create_directories(path_.parent_path());
  }
}

std::optional<std::string> ResponseCache::lookup(const std::string& key) const {
  std::shared_lock lock(mutex_);
  if (const auto it = entries_.find(key); it != entries_.end()) return it->second;
  return std::nullopt;
}

void ResponseCache::insert(const std::string& key, const std::string& model_id,
                           const std::string& response) {
  std::unique_lock lock(mutex_);
  if (entries_.contains(key)) return;
  if (!out_.is_open()) {
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw IoError("cannot append to cache '" + path_.string() + "'");
  }
  const nlohmann::json line = {{"key", key}, {"model_id", model_id}, {"response", response}};
  out_ << line.dump() << '\n';
  out_.flush();
  if (!out_) throw IoError("write failed for cache '" + path_.string() + "'");
  entries_.emplace(key, response);
}

std::size_t ResponseCache::size() const {
  std::shared_lock lock(mutex_);
  return entries_.size();
}

CachedBackend::CachedBackend(std::shared_ptr<ResponseCache> cache,
                             std::shared_ptr<ChatBackend> inner, std::string model_id)
    : cache_(std::move(cache)), inner_(std::move(inner)), model_id_(std::move(model_id)) {}

std::string CachedBackend::complete_once(const Conversation& conversation,
                                         const GenerationConfig& config) {
  const auto key = cache_key(model_id_, conversation.messages, config);
  if (auto hit = cache_->lookup(key)) {
    ++hits_;
    return *hit;
  }
  ++misses_;
  if (!inner_) throw ReplayMiss(key);
  ++live_calls_;
  auto response = inner_->complete_once(conversation, config);
  if (!response.empty()) cache_->insert(key, model_id_, response);
  return response;
}

CacheStats CachedBackend::stats() const {
  return {hits_.load(), misses_.load(), live_calls_.load(), cache_->size()};
}

}  // namespace sbys
