#include "sbys/llm.hpp"

#include <thread>

#include "sbys/digest.hpp"
#include "sbys/error.hpp"

namespace sbys {

std::string_view to_string(Role role) {
  return role == Role::user ? "user" : "assistant";
}

std::string_view to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::http_chat: return "http_chat";
    case BackendKind::mock: return "mock";
    case BackendKind::replay: return "replay";
  }
  return "unknown";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "http_chat" || name == "http") return BackendKind::http_chat;
  if (name == "mock") return BackendKind::mock;
  if (name == "replay") return BackendKind::replay;
  throw ConfigError("unknown backend kind '" + std::string(name) +
                    "' (expected http_chat, mock or replay)");
}

bool Conversation::well_formed() const {
  for (std::size_t i = 0; i < messages.size(); ++i) {
    const Role expected = i % 2 == 0 ? Role::user : Role::assistant;
    if (messages[i].role != expected || messages[i].content.empty()) return false;
  }
  return true;
}

std::string complete(const Conversation& conversation, const GenerationConfig& config,
                     ChatBackend& backend) {
  if (!conversation.awaiting_completion()) {
    throw PreconditionError(
        "conversation must alternate user/assistant turns and end with a user turn");
  }
  auto delay = config.backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      auto text = backend.complete_once(conversation, config);
      if (text.empty()) throw EmptyCompletion("backend returned an empty completion");
      return text;
    } catch (const TransportError&) {
      if (attempt >= config.retries) throw;
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
}

std::pair<std::string, Conversation> continue_conversation(const Conversation& conversation,
                                                           ChatMessage user_turn,
                                                           const GenerationConfig& config,
                                                           ChatBackend& backend) {
  if (!conversation.well_formed() ||
      (!conversation.empty() && conversation.messages.back().role != Role::assistant)) {
    throw PreconditionError("can only continue a conversation that is empty or ends with an "
                            "assistant turn");
  }
  user_turn.role = Role::user;
  Conversation next = conversation;
  next.messages.push_back(std::move(user_turn));
  auto reply = complete(next, config, backend);
  next.messages.push_back({Role::assistant, reply, {}});
  return {std::move(reply), std::move(next)};
}

std::pair<std::string, Conversation> continue_conversation(const Conversation& conversation,
                                                           const std::string& user_text,
                                                           const GenerationConfig& config,
                                                           ChatBackend& backend) {
  return continue_conversation(conversation, ChatMessage{Role::user, user_text, {}}, config,
                               backend);
}

nlohmann::json chat_request_body(const std::string& model_id,
                                 const std::vector<ChatMessage>& messages,
                                 const GenerationConfig& config) {
  auto msgs = nlohmann::json::array();
  for (const auto& m : messages) {
    msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  return {{"model", model_id},
          {"messages", std::move(msgs)},
          {"temperature", config.temperature},
          {"max_tokens", config.max_output_tokens}};
}

std::string cache_key(const std::string& model_id, const std::vector<ChatMessage>& messages,
                      const GenerationConfig& config) {
  return sha256_hex(chat_request_body(model_id, messages, config).dump());
}

void to_json(nlohmann::json& j, const ChatMessage& m) {
  j = {{"role", to_string(m.role)}, {"content", m.content}};
  if (!m.template_tag.empty()) j["template"] = m.template_tag;
}

void from_json(const nlohmann::json& j, ChatMessage& m) {
  const auto role = j.at("role").get<std::string>();
  if (role == "user") {
    m.role = Role::user;
  } else if (role == "assistant") {
    m.role = Role::assistant;
  } else {
    throw nlohmann::json::other_error::create(501, "unknown role '" + role + "'", &j);
  }
  m.content = j.at("content").get<std::string>();
  m.template_tag = j.value("template", std::string{});
}

void to_json(nlohmann::json& j, const Conversation& c) {
  j = {{"doc_id", c.created_for.doc_id},
       {"stage", c.created_for.stage},
       {"model_id", c.model_id},
       {"messages", c.messages}};
}

void from_json(const nlohmann::json& j, Conversation& c) {
  c.created_for.doc_id = j.at("doc_id").get<std::string>();
  c.created_for.stage = j.at("stage").get<std::string>();
  c.model_id = j.value("model_id", std::string{});
  c.messages = j.at("messages").get<std::vector<ChatMessage>>();
}

void to_json(nlohmann::json& j, const CacheStats& s) {
  j = {{"hits", s.hits}, {"misses", s.misses}, {"live_calls", s.live_calls},
       {"entries", s.entries}};
}

}  // namespace sbys
