#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "biaslens/chat_client.hpp"
#include "biaslens/labels.hpp"

// Offline replacement for a chat-completion endpoint. It labels an article by
// looking for one marker word per category, which makes annotation of the
// bundled sample corpus deterministic and the labels learnable.
namespace biaslens::standin {

inline constexpr std::array<std::string_view, kNumLabels> kMarkerWords = {
    "partisan", "stereotypical", "disgraced", "foreigners", "heretics", "provincial", "shocking"};

/// Label i is set iff kMarkerWords[i] occurs as a token of the text.
BiasVector keyword_labels(std::string_view text);

/// Reply to a chat request: labels from the last user message, rendered in
/// the default schema's line format.
std::string reply_text(const ChatRequest& request);

/// In-process client answering with reply_text. Counts calls.
class StandinClient : public ChatClient {
 public:
  ChatResponse complete(const ChatRequest& request) override;
  std::size_t calls() const { return calls_.load(); }

 private:
  std::atomic<std::size_t> calls_{0};
};

/// HTTP server exposing POST /v1/chat/completions backed by reply_text.
/// Requests must carry "Authorization: Bearer <non-empty>"; otherwise 401.
class Server {
 public:
  Server();
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and serves on a background thread. port 0 picks a free port.
  /// Returns the bound port.
  int start(const std::string& host, int port);
  /// Serves on the calling thread until stop() is called.
  void listen(const std::string& host, int port);
  void stop();
  std::size_t calls() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace biaslens::standin
