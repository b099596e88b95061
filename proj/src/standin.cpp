#include "biaslens/standin.hpp"

#include <httplib.h>

#include <stdexcept>
#include <thread>

#include "biaslens/annotator.hpp"
#include "biaslens/text.hpp"

namespace biaslens::standin {

BiasVector keyword_labels(std::string_view text) {
  BiasVector v;
  for (const auto& tok : text::tokenize(text)) {
    for (std::size_t i = 0; i < kNumLabels; ++i) {
      if (tok == kMarkerWords[i]) v.set(i, true);
    }
  }
  return v;
}

std::string reply_text(const ChatRequest& request) {
  std::string_view user;
  for (const auto& m : request.messages) {
    if (m.role == "user" && m.content.find("Article text:") != std::string::npos) user = m.content;
  }
  return annotator::render_labels(keyword_labels(user),
                                  annotator::AnnotationSchema::default_schema());
}

ChatResponse StandinClient::complete(const ChatRequest& request) {
  ++calls_;
  return {200, reply_text(request), {}};
}

struct Server::Impl {
  httplib::Server server;
  std::thread thread;
  std::atomic<std::size_t> calls{0};
};

Server::Server() : impl_(std::make_unique<Impl>()) {
  impl_->server.Post("/v1/chat/completions", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
    ++impl_->calls;
    const auto auth = req.get_header_value("Authorization");
    if (auth.rfind("Bearer ", 0) != 0 || auth.size() <= 7) {
      res.status = 401;
      res.set_content(R"({"error":{"message":"missing bearer token"}})", "application/json");
      return;
    }
    ChatRequest chat;
    try {
      chat = parse_chat_request_body(req.body);
    } catch (const std::exception& e) {
      res.status = 400;
      res.set_content(R"({"error":{"message":"malformed request"}})", "application/json");
      return;
    }
    res.set_content(chat_response_body(chat.model, reply_text(chat)), "application/json");
  });
}

Server::~Server() { stop(); }

int Server::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound <= 0) throw std::runtime_error("stand-in server cannot bind " + host);
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void Server::listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw std::runtime_error("stand-in server cannot listen on " + host + ":" +
                             std::to_string(port));
  }
}

void Server::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t Server::calls() const { return impl_->calls.load(); }

}  // namespace biaslens::standin
