#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "border_forge/error.hpp"
#include "border_forge/teach_service.hpp"

namespace border_forge {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  std::filesystem::path static_dir;
  int threads = 2;
};

// HTTP + WebSocket front end for a TeachService. The service must outlive
// the server.
class HttpServer {
 public:
  HttpServer(TeachService& service, ServerOptions options);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds and starts the worker threads. Throws kIo when the bind fails.
  void start();
  unsigned short port() const;
  void stop();
  // Blocks until stop() is called from another thread or a signal handler.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// HTTP status used for an error class.
int http_status_for(ErrorCode code);

}  // namespace border_forge
