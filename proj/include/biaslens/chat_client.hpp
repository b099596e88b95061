#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biaslens {

struct ChatMessage {
  std::string role;  // "system", "user" or "assistant"
  std::string content;
};

struct ChatRequest {
  std::string model;
  double temperature = 0.0;
  std::vector<ChatMessage> messages;
};

/// status is the HTTP status, or 0 when no response arrived (connection
/// failure, timeout, unreadable body).
struct ChatResponse {
  int status = 0;
  std::string text;
  std::string error;
};

/// Chat-completion caller. Implementations must be safe to call from several
/// threads at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// {"model", "temperature", "messages":[{"role","content"}...]}
std::string chat_request_body(const ChatRequest& request);
ChatRequest parse_chat_request_body(std::string_view body);

/// Assistant text from a chat-completion response
/// ({"choices":[{"message":{"content":...}}]}).
std::optional<std::string> extract_completion_text(std::string_view body);
std::string chat_response_body(std::string_view model, std::string_view content);

/// Posts chat-completion requests over HTTP(S) with
/// "Authorization: Bearer <api_key>".
class HttpChatClient : public ChatClient {
 public:
  HttpChatClient(std::string endpoint_url, std::string api_key, double timeout_seconds);
  ChatResponse complete(const ChatRequest& request) override;

 private:
  std::string origin_;  // scheme://host[:port]
  std::string path_;
  std::string api_key_;
  double timeout_seconds_;
};

}  // namespace biaslens
