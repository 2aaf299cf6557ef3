#pragma once

#include <memory>
#include <string>

#include "pairpref/service/session_store.hpp"

namespace pairpref::service {

/// JSON-over-HTTP front for a SessionStore.
///
///   POST /sessions                  create (201)
///   GET  /sessions                  list
///   GET  /sessions/{id}             metrics document
///   GET  /sessions/{id}/trial       current trial (409 once terminal)
///   POST /sessions/{id}/response    {"step": k, "r": 0|1}
///   GET  /health                    200 once routes are installed
///
/// Errors are {"error": code, "message": text}.
class HttpServer {
 public:
  explicit HttpServer(SessionStore& store);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Call after a successful bind().
  bool listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pairpref::service
