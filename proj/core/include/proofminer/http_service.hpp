// Local HTTP + JSON front end for guidance sessions.
//
//   POST /models                     model JSON            -> {"model"}
//   POST /models/{id}/sessions                             -> {"session"}
//   GET  /models/{id}/graph          [?format=dot]         -> adjacency JSON or DOT
//   GET  /sessions/{id}/options
//   POST /sessions/{id}/step         {"label","params","combined"}
//   POST /sessions/{id}/undo
//   GET  /sessions/{id}/script
//
// Errors are {"error": message, "available": [labels]}.

#pragma once

#include <memory>
#include <string>

#include "proofminer/guidance.hpp"

namespace proofminer {

struct ApiResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// Request routing without any socket code.
class GuidanceApi {
public:
  explicit GuidanceApi(SessionManager& sessions) : sessions_(sessions) {}

  /// `format` is the value of the `?format=` query parameter, if any.
  ApiResponse handle(const std::string& method, const std::string& path, const std::string& body,
                     const std::string& format = {}) const;

private:
  SessionManager& sessions_;
};

class GuidanceServer {
public:
  explicit GuidanceServer(SessionManager& sessions);
  ~GuidanceServer();
  GuidanceServer(const GuidanceServer&) = delete;
  GuidanceServer& operator=(const GuidanceServer&) = delete;

  /// Binds and serves until stop(); returns false if binding fails.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it, or -1.
  int bind_any(const std::string& host);
  /// Serves on the socket bound by bind_any until stop().
  bool serve();
  void stop();
  void wait_until_ready() const;

private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

} // namespace proofminer
