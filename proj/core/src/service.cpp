#include "catbox/service.hpp"

#include <httplib.h>

#include <mutex>
#include <shared_mutex>

#include "catbox/bench.hpp"
#include "catbox/errors.hpp"

namespace catbox::service {

using nlohmann::json;

namespace {

HttpResponse json_response(int status, const json& body) {
  return {status, body.dump(2) + "\n", "application/json"};
}

HttpResponse error_response(int status, const std::string& message,
                            const std::optional<std::string>& field = {}) {
  json body{{"error", message}};
  body["field"] = field ? json(*field) : json(nullptr);
  return json_response(status, body);
}

HttpResponse not_found(const std::string& id) {
  return error_response(404, "unknown campaign '" + id + "'");
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = i;
    while (j < path.size() && path[j] != '/') ++j;
    if (j > i) parts.push_back(path.substr(i, j - i));
    i = j;
  }
  return parts;
}

json incumbent_json(const Campaign& c) {
  if (!c.incumbent()) return nullptr;
  const auto& inc = *c.incumbent();
  return {{"point", point_to_json(inc.point)}, {"y", inc.y}, {"iteration", inc.iteration}};
}

}  // namespace

std::string campaign_csv(const Campaign& campaign) {
  bench::RunRecord record;
  std::optional<double> best;
  for (const auto& h : campaign.history()) {
    if (!best || campaign.better(h.y, *best)) best = h.y;
    record.steps.push_back({h.iteration, h.point, h.y, h.y, *best});
  }
  return bench::run_csv(record);
}

json campaign_summary(const std::string& id, const Campaign& campaign) {
  const auto& tr = campaign.trust_region();
  json last = nullptr;
  if (!campaign.history().empty()) {
    const auto& h = campaign.history().back();
    last = {{"iteration", h.iteration}, {"point", point_to_json(h.point)}, {"y", h.y}, {"tag", to_string(h.tag)}};
  }
  return {{"id", id},
          {"direction", to_string(campaign.direction())},
          {"n_observations", campaign.history().size()},
          {"incumbent", incumbent_json(campaign)},
          {"last", last},
          {"pending_initial", campaign.pending_initial().size()},
          {"trust_region",
           {{"r_cont", tr.r_cont},
            {"r_cat", tr.r_cat},
            {"succ_count", tr.succ_count},
            {"fail_count", tr.fail_count},
            {"restarts", tr.restarts}}}};
}

Service::Service(CampaignStore& store, CampaignConfig defaults)
    : store_(store), defaults_(std::move(defaults)) {}

HttpResponse Service::handle(const std::string& method, const std::string& path,
                             const std::string& body) {
  auto parts = split_path(path);
  try {
    if (parts.empty() || parts[0] != "campaigns") return error_response(404, "no such route");
    if (parts.size() == 1) {
      if (method == "GET") return list();
      if (method == "POST") return create(body);
      return error_response(405, "method not allowed");
    }
    const std::string& id = parts[1];
    if (parts.size() == 2) {
      if (method == "GET") return get(id);
      return error_response(405, "method not allowed");
    }
    if (parts.size() == 3) {
      if (parts[2] == "tell") return method == "POST" ? tell(id, body) : error_response(405, "method not allowed");
      if (parts[2] == "suggest") return method == "POST" ? suggest(id) : error_response(405, "method not allowed");
      if (parts[2] == "export.csv") return method == "GET" ? export_csv(id) : error_response(405, "method not allowed");
    }
    return error_response(404, "no such route");
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

HttpResponse Service::list() {
  json ids = json::array();
  for (const auto& id : store_.list()) ids.push_back(id);
  return json_response(200, ids);
}

HttpResponse Service::create(const std::string& body) {
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("invalid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_response(400, "request body must be an object");
  if (!req.contains("space")) return error_response(400, "missing space", "space");

  std::optional<SearchSpace> space;
  try {
    space = space_from_json(req.at("space"));
  } catch (const SpaceError& e) {
    return error_response(400, e.what(), "space." + e.field());
  }

  CampaignConfig config;
  try {
    config = config_from_json(req.value("config", json(nullptr)), defaults_);
  } catch (const std::exception& e) {
    return error_response(400, e.what(), "config");
  }

  Direction direction = Direction::Maximize;
  if (req.contains("direction")) {
    try {
      direction = direction_from_string(req.at("direction").get<std::string>());
    } catch (const std::exception& e) {
      return error_response(400, e.what(), "direction");
    }
  }

  Campaign campaign(std::move(*space), config, direction);
  std::string id = store_.create(campaign);
  if (after_persist) after_persist(id);
  json design = json::array();
  for (const auto& p : campaign.pending_initial()) design.push_back(point_to_json(p));
  return json_response(201, {{"id", id}, {"initial_design", design}});
}

HttpResponse Service::tell(const std::string& id, const std::string& body) {
  if (!CampaignStore::valid_id(id)) return not_found(id);
  json req;
  try {
    req = json::parse(body);
  } catch (const json::parse_error& e) {
    return error_response(400, std::string("invalid JSON: ") + e.what());
  }
  if (!req.is_object()) return error_response(400, "request body must be an object");
  if (!req.contains("y") || !req.at("y").is_number()) return error_response(400, "y must be a number", "y");
  std::optional<int> iteration;
  if (req.contains("iteration") && !req.at("iteration").is_null()) {
    if (!req.at("iteration").is_number_integer()) return error_response(400, "iteration must be an integer", "iteration");
    iteration = req.at("iteration").get<int>();
  }

  std::unique_lock lock(store_.lock_for(id));
  auto campaign = store_.load(id);
  if (!campaign) return not_found(id);
  if (!req.contains("point")) return error_response(409, "missing point", "point");
  try {
    MixedPoint point = point_from_json(campaign->space(), req.at("point"));
    campaign->tell(point, req.at("y").get<double>(), iteration);
  } catch (const PointError& e) {
    return error_response(409, e.what(), "point");
  } catch (const json::exception& e) {
    return error_response(409, e.what(), "point");
  }
  store_.save(id, *campaign);
  if (after_persist) after_persist(id);
  return json_response(200, campaign_summary(id, *campaign));
}

HttpResponse Service::suggest(const std::string& id) {
  if (!CampaignStore::valid_id(id)) return not_found(id);
  std::unique_lock lock(store_.lock_for(id));
  auto campaign = store_.load(id);
  if (!campaign) return not_found(id);
  if (campaign->history().empty()) {
    return error_response(422, "suggest requires at least one observation");
  }
  bool was_pending = campaign->pending_suggestion().has_value();
  MixedPoint point = campaign->suggest();
  if (!was_pending) {
    store_.save(id, *campaign);
    if (after_persist) after_persist(id);
  }
  const auto& pending = *campaign->pending_suggestion();
  return json_response(200, {{"point", point_to_json(point)},
                             {"tag", to_string(pending.tag)},
                             {"acquisition", pending.acquisition}});
}

HttpResponse Service::get(const std::string& id) {
  if (!CampaignStore::valid_id(id)) return not_found(id);
  std::shared_lock lock(store_.lock_for(id));
  auto campaign = store_.load(id);
  if (!campaign) return not_found(id);
  return json_response(200, campaign->to_json());
}

HttpResponse Service::export_csv(const std::string& id) {
  if (!CampaignStore::valid_id(id)) return not_found(id);
  std::shared_lock lock(store_.lock_for(id));
  auto campaign = store_.load(id);
  if (!campaign) return not_found(id);
  return {200, campaign_csv(*campaign), "text/csv"};
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  explicit Impl(Service& s) : service(s) {}
};

HttpServer::HttpServer(Service& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto forward = [this](const httplib::Request& req, httplib::Response& res) {
    HttpResponse r = impl_->service.handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  impl_->server.Get("/campaigns.*", forward);
  impl_->server.Post("/campaigns.*", forward);
  if (static_dir) impl_->server.set_mount_point("/ui", static_dir->string());
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace catbox::service
