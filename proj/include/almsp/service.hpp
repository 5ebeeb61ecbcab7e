#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "almsp/engine.hpp"
#include "almsp/error.hpp"

namespace httplib {
class Server;
}

namespace almsp {

using ParserFactory = std::function<std::unique_ptr<ParserAdapter>(const CampaignConfig&)>;

struct ServiceOptions {
  /// One append-only journal per session; sessions found here are replayed
  /// on construction. Empty disables persistence.
  std::string journal_dir;
  ParserFactory parser_factory;  // defaults to make_parser
  bool show_lf = false;
};

/// Errors returned to clients as {"error": {"code", "message"}}.
struct ServiceError : Error {
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status(status), code(std::move(code)) {}
  int status;
  std::string code;
};

/// HumanSession campaigns over HTTP:
///   POST /sessions                       body: config object, optional "examples"
///   GET  /sessions/{id}/batch
///   POST /sessions/{id}/translations     body: {"translations": {id: text}}
///   GET  /sessions/{id}/status
///   GET  /sessions/{id}/metrics
class AnnotationService {
public:
  explicit AnnotationService(ServiceOptions options = {});
  ~AnnotationService();
  AnnotationService(const AnnotationService&) = delete;
  AnnotationService& operator=(const AnnotationService&) = delete;

  // Transport-free API; the HTTP handlers are thin wrappers.
  nlohmann::json create_session(const nlohmann::json& body);
  nlohmann::json batch(const std::string& session) const;
  nlohmann::json submit(const std::string& session, const nlohmann::json& body);
  nlohmann::json status(const std::string& session) const;
  nlohmann::json metrics(const std::string& session) const;

  /// Translated examples as last handed to the parser for retraining.
  std::vector<Example> training_pool(const std::string& session) const;
  std::vector<std::string> sessions() const;
  /// Blocks until the session waits on translators, finishes or fails.
  void wait_idle(const std::string& session) const;

  /// Binds and serves until stop(). Returns false if binding failed.
  bool listen(const std::string& host, int port);
  /// Binds to a free port and serves on a background thread.
  int start_background(const std::string& host = "127.0.0.1");
  void stop();

private:
  struct Session;

  std::shared_ptr<Session> find(const std::string& id) const;
  std::shared_ptr<Session> launch(const std::string& id, const nlohmann::json& body,
                                  const std::vector<std::pair<std::string, std::string>>& replay);
  void replay_journals();
  void install_routes();

  ServiceOptions options_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::size_t next_id_ = 1;
  std::unique_ptr<httplib::Server> server_;
  std::thread server_thread_;
};

} // namespace almsp
