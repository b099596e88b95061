#include "biaslens/chat_client.hpp"

#include <httplib.h>

#include <chrono>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace biaslens {

using nlohmann::json;
using nlohmann::ordered_json;

std::string chat_request_body(const ChatRequest& request) {
  ordered_json j;
  j["model"] = request.model;
  j["temperature"] = request.temperature;
  j["messages"] = ordered_json::array();
  for (const auto& m : request.messages) {
    j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  }
  return j.dump();
}

ChatRequest parse_chat_request_body(std::string_view body) {
  const json j = json::parse(body);
  ChatRequest r;
  r.model = j.at("model").get<std::string>();
  r.temperature = j.value("temperature", 0.0);
  for (const auto& m : j.at("messages")) {
    r.messages.push_back({m.at("role").get<std::string>(), m.at("content").get<std::string>()});
  }
  return r;
}

std::optional<std::string> extract_completion_text(std::string_view body) {
  const json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto choices = j.find("choices");
  if (choices == j.end() || !choices->is_array() || choices->empty()) return std::nullopt;
  const json& first = (*choices)[0];
  if (auto msg = first.find("message"); msg != first.end() && msg->is_object()) {
    if (auto c = msg->find("content"); c != msg->end() && c->is_string()) return c->get<std::string>();
  }
  // Legacy completion shape.
  if (auto t = first.find("text"); t != first.end() && t->is_string()) return t->get<std::string>();
  return std::nullopt;
}

std::string chat_response_body(std::string_view model, std::string_view content) {
  ordered_json j;
  j["object"] = "chat.completion";
  j["model"] = model;
  j["choices"] = ordered_json::array();
  j["choices"].push_back({{"index", 0},
                          {"message", {{"role", "assistant"}, {"content", content}}},
                          {"finish_reason", "stop"}});
  return j.dump();
}

HttpChatClient::HttpChatClient(std::string endpoint_url, std::string api_key,
                               double timeout_seconds)
    : api_key_(std::move(api_key)), timeout_seconds_(timeout_seconds) {
  const auto scheme_end = endpoint_url.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint url needs a scheme: " + endpoint_url);
  }
  const auto path_start = endpoint_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    origin_ = endpoint_url;
    path_ = "/";
  } else {
    origin_ = endpoint_url.substr(0, path_start);
    path_ = endpoint_url.substr(path_start);
  }
}

ChatResponse HttpChatClient::complete(const ChatRequest& request) {
  httplib::Client cli(origin_);
  const auto timeout = std::chrono::duration<double>(timeout_seconds_);
  const auto us = std::chrono::duration_cast<std::chrono::microseconds>(timeout);
  cli.set_connection_timeout(us);
  cli.set_read_timeout(us);
  cli.set_write_timeout(us);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  ChatResponse out;
  auto res = cli.Post(path_, headers, chat_request_body(request), "application/json");
  if (!res) {
    out.error = "request failed: " + httplib::to_string(res.error());
    return out;
  }
  out.status = res->status;
  if (res->status < 200 || res->status >= 300) {
    out.error = "http " + std::to_string(res->status);
    return out;
  }
  if (auto text = extract_completion_text(res->body)) {
    out.text = std::move(*text);
  } else {
    out.status = 0;
    out.error = "response is not a chat completion";
  }
  return out;
}

}  // namespace biaslens
