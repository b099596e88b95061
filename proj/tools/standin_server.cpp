// Offline chat-completion endpoint for running the annotate stage without a
// real LLM:
//
//   biaslens-standin --port 8089 &
//   BIASLENS_API_KEY=local biaslens annotate \
//       --endpoint http://127.0.0.1:8089/v1/chat/completions ...

#include <CLI11.hpp>

#include <csignal>
#include <iostream>
#include <string>

#include "biaslens/standin.hpp"

namespace {
biaslens::standin::Server* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}
}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biaslens stand-in chat-completion endpoint", "biaslens-standin"};
  std::string host = "127.0.0.1";
  int port = 8089;
  app.add_option("--host", host, "bind address");
  app.add_option("--port", port, "bind port");
  CLI11_PARSE(app, argc, argv);

  biaslens::standin::Server server;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cerr << "stand-in endpoint on http://" << host << ":" << port << "/v1/chat/completions\n";
  try {
    server.listen(host, port);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
