// catbox command-line front end: campaign files, benchmark studies and the
// HTTP service.

#include <CLI11.hpp>

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "catbox/bench.hpp"
#include "catbox/errors.hpp"
#include "catbox/optimizer.hpp"
#include "catbox/service.hpp"
#include "catbox/store.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
namespace svc = catbox::service;

json read_json_file(const fs::path& path) {
  try {
    return json::parse(svc::read_file(path));
  } catch (const json::parse_error& e) {
    throw catbox::Error(path.string() + ": invalid JSON: " + e.what());
  }
}

// Accepts inline JSON or @path.
json parse_json_arg(const std::string& arg, const std::string& what) {
  if (!arg.empty() && arg.front() == '@') return read_json_file(arg.substr(1));
  try {
    return json::parse(arg);
  } catch (const json::parse_error& e) {
    throw catbox::Error(what + ": invalid JSON: " + e.what());
  }
}

catbox::Campaign load_campaign(const fs::path& path) {
  return catbox::Campaign::from_json(read_json_file(path));
}

void save_campaign(const fs::path& path, const catbox::Campaign& c) {
  svc::write_file_atomic(path, c.to_json().dump(2) + "\n");
}

svc::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"catbox: mixed categorical/continuous Bayesian optimization"};
  app.require_subcommand(1);

  // init
  auto* init = app.add_subcommand("init", "Create a campaign file from a search space");
  std::string init_space, init_out, init_config, init_direction = "maximize";
  init->add_option("--space", init_space, "Search space JSON file")->required();
  init->add_option("--out", init_out, "Campaign file to create")->required();
  init->add_option("--config", init_config, "Engine config JSON file");
  init->add_option("--direction", init_direction, "maximize or minimize");

  // suggest
  auto* sug = app.add_subcommand("suggest", "Print the next point and record it as pending");
  std::string sug_campaign;
  sug->add_option("--campaign", sug_campaign, "Campaign file")->required();

  // tell
  auto* tell = app.add_subcommand("tell", "Record an observation");
  std::string tell_campaign, tell_point;
  double tell_y = 0.0;
  std::optional<int> tell_iteration;
  tell->add_option("--campaign", tell_campaign, "Campaign file")->required();
  tell->add_option("--point", tell_point, "Point JSON, inline or @file")->required();
  tell->add_option("--y", tell_y, "Observed value")->required();
  tell->add_option("--iteration", tell_iteration, "Explicit iteration index");

  // run-bench
  auto* bench = app.add_subcommand("run-bench", "Run a benchmark study");
  std::string bench_study, bench_out;
  bench->add_option("--study", bench_study, "Study JSON file")->required();
  bench->add_option("--out", bench_out, "Output directory")->required();

  // export
  auto* exp = app.add_subcommand("export", "Write the campaign history as CSV");
  std::string exp_campaign, exp_csv;
  exp->add_option("--campaign", exp_campaign, "Campaign file")->required();
  exp->add_option("--csv", exp_csv, "Output CSV path")->required();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the ask/tell HTTP service");
  std::string serve_config, serve_host, serve_store, serve_static, serve_port_file;
  std::optional<int> serve_port;
  serve->add_option("--config", serve_config, "TOML-style service config file");
  serve->add_option("--host", serve_host, "Listen address");
  serve->add_option("--port", serve_port, "Listen port (0 picks a free port)");
  serve->add_option("--store", serve_store, "Campaign store directory");
  serve->add_option("--static-dir", serve_static, "Directory served under /ui");
  serve->add_option("--port-file", serve_port_file, "Write the bound port to this file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (init->parsed()) {
      if (fs::exists(init_out)) throw catbox::Error(init_out + " already exists");
      auto space = catbox::space_from_json(read_json_file(init_space));
      catbox::CampaignConfig config;
      if (!init_config.empty()) config = catbox::config_from_json(read_json_file(init_config));
      catbox::Campaign c(std::move(space), config, catbox::direction_from_string(init_direction));
      save_campaign(init_out, c);
      json design = json::array();
      for (const auto& p : c.pending_initial()) design.push_back(catbox::point_to_json(p));
      std::cout << json{{"initial_design", design}}.dump() << "\n";
    } else if (sug->parsed()) {
      auto c = load_campaign(sug_campaign);
      const bool was_pending = c.pending_suggestion().has_value();
      auto p = c.suggest();
      if (!was_pending) save_campaign(sug_campaign, c);
      std::cout << catbox::point_to_json(p).dump() << "\n";
    } else if (tell->parsed()) {
      auto c = load_campaign(tell_campaign);
      auto point = catbox::point_from_json(c.space(), parse_json_arg(tell_point, "--point"));
      c.tell(point, tell_y, tell_iteration);
      save_campaign(tell_campaign, c);
      std::cout << svc::campaign_summary(fs::path(tell_campaign).stem().string(), c).dump() << "\n";
    } else if (bench->parsed()) {
      auto study = catbox::bench::study_from_json(read_json_file(bench_study));
      auto result = catbox::bench::run_study(study, bench_out);
      std::cout << result.metrics.to_json().dump(2) << "\n";
    } else if (exp->parsed()) {
      auto c = load_campaign(exp_campaign);
      svc::write_file_atomic(exp_csv, svc::campaign_csv(c));
    } else if (serve->parsed()) {
      svc::ServiceConfig cfg;
      if (!serve_config.empty()) cfg = svc::parse_service_config(svc::read_file(serve_config));
      cfg = svc::apply_env(cfg, [](const char* name) { return std::getenv(name); });
      if (!serve_host.empty()) cfg.host = serve_host;
      if (serve_port) cfg.port = *serve_port;
      if (!serve_store.empty()) cfg.store_root = serve_store;
      if (!serve_static.empty()) cfg.static_dir = fs::path(serve_static);

      svc::CampaignStore store(cfg.store_root);
      svc::Service service(store, cfg.engine);
      // Fault injection for crash-safety testing: terminate right after a
      // mutation reaches disk, before any response is written.
      if (const char* crash = std::getenv("CATBOX_CRASH_AFTER_PERSIST"); crash && *crash) {
        service.after_persist = [](const std::string&) { std::_Exit(86); };
      }
      svc::HttpServer server(service, cfg.static_dir);
      const int port = server.bind(cfg.host, cfg.port);
      if (port < 0) throw catbox::Error("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
      if (!serve_port_file.empty()) svc::write_file_atomic(serve_port_file, std::to_string(port) + "\n");
      std::cerr << "catbox: listening on " << cfg.host << ":" << port << ", store " << cfg.store_root << "\n";
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      server.listen();
      g_server = nullptr;
    }
  } catch (const std::exception& e) {
    std::cerr << "catbox: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
