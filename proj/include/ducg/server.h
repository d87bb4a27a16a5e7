#ifndef DUCG_SERVER_H_
#define DUCG_SERVER_H_

#include <filesystem>
#include <memory>
#include <string>
#include <utility>

#include <json.hpp>

#include "ducg/session.h"

namespace ducg {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "ducg-data";
};

/// DUCG_PORT and DUCG_DATA_DIR take precedence over command-line values.
ServerConfig apply_environment(ServerConfig config);

/// Maps an exception to an HTTP status and the body
/// {"error": {"type", "message", "path"?, "findings"?}}.
std::pair<int, nlohmann::json> error_response(const std::exception& e);

// REST front end over a DiagnosisService. Routes:
//   POST /models                              register a model file
//   GET  /models                              models with variable metadata
//   POST /sessions                            {model_id}
//   GET  /sessions/{id}
//   POST /sessions/{id}/observations          {observations: [{variable, state}]}
//   GET  /sessions/{id}/explanations/{hyp}    hyp like B5 or B5.2
//   POST /sessions/{id}/disagreement          {note}
//   POST /sessions/{id}/conclude              {note}
// The acting clinician comes from the X-Actor header or an "actor" field.
class RestServer {
 public:
  explicit RestServer(DiagnosisService& service);
  ~RestServer();
  RestServer(const RestServer&) = delete;
  RestServer& operator=(const RestServer&) = delete;

  /// Binds and serves until stop(); returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and returns it, or -1. Follow with serve().
  int bind_any_port(const std::string& host);
  bool serve();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace ducg

#endif  // DUCG_SERVER_H_
