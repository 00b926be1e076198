#pragma once

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "catbox/optimizer.hpp"
#include "catbox/store.hpp"

namespace catbox::service {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path store_root = "campaigns";
  std::optional<std::filesystem::path> static_dir;
  CampaignConfig engine;
};

/// Parses a TOML-style file: `key = value` lines, `[engine]` and
/// `[engine.kernel]` sections, `#` comments, quoted strings, numbers and
/// booleans. Unknown keys are rejected.
ServiceConfig parse_service_config(const std::string& text, ServiceConfig base = {});

/// Applies CATBOX_HOST, CATBOX_PORT, CATBOX_STORE_ROOT and CATBOX_STATIC_DIR
/// through `getenv` (injectable for tests).
ServiceConfig apply_env(ServiceConfig config,
                        const std::function<const char*(const char*)>& getenv);

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

/// History as a run-file CSV: iteration,point_json,raw_y,observed_y,incumbent_y.
std::string campaign_csv(const Campaign& campaign);

/// JSON summary returned by tell.
nlohmann::json campaign_summary(const std::string& id, const Campaign& campaign);

/// Transport-independent request handling for the ask/tell API.
class Service {
 public:
  Service(CampaignStore& store, CampaignConfig defaults);

  HttpResponse handle(const std::string& method, const std::string& path, const std::string& body);

  /// Called after a mutation is durably persisted and before the response is
  /// produced. Fault-injection point for crash-safety tests.
  std::function<void(const std::string& id)> after_persist;

 private:
  HttpResponse create(const std::string& body);
  HttpResponse tell(const std::string& id, const std::string& body);
  HttpResponse suggest(const std::string& id);
  HttpResponse get(const std::string& id);
  HttpResponse export_csv(const std::string& id);
  HttpResponse list();

  CampaignStore& store_;
  CampaignConfig defaults_;
};

/// Blocking HTTP front end over Service using cpp-httplib.
class HttpServer {
 public:
  HttpServer(Service& service, std::optional<std::filesystem::path> static_dir = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds; port 0 picks a free port. Returns the bound port or -1.
  int bind(const std::string& host, int port);
  /// Serves until stop(). Returns false if the listener failed.
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace catbox::service
