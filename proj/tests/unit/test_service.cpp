#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <set>
#include <thread>

#include "catbox/errors.hpp"
#include "catbox/service.hpp"
#include "process.hpp"

// After Eigen: glibc's resolver macros clash with Eigen parameter names.
#include <httplib.h>

using namespace catbox;
using namespace catbox::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const json kSpace44 = {
    {"categoricals",
     {{{"name", "a"}, {"levels", {"x", "y", "z"}}},
      {{"name", "b"}, {"levels", {"p", "q"}}},
      {{"name", "c"}, {"levels", {0, 1, 2, 3}}},
      {{"name", "d"}, {"levels", {"u", "v", "w"}}}}},
    {"continuous",
     {{{"name", "t"}, {"lower", 0.0}, {"upper", 1.0}},
      {{"name", "u"}, {"lower", -2.0}, {"upper", 2.0}},
      {{"name", "v"}, {"lower", 10.0}, {"upper", 20.0}},
      {{"name", "w"}, {"lower", -1.0}, {"upper", 0.0}}}}};

const json kFastConfig = {{"hyper_restarts", 1}, {"hyper_max_iters", 8}, {"cont_restarts", 2}, {"cont_steps", 16}};

double toy_objective(const json& point) {
  double s = 0.0;
  for (const auto& c : point["cat"]) s -= c.get<int>() == 1 ? 0.0 : 1.0;
  for (const auto& x : point["con"]) s -= 0.01 * x.get<double>() * x.get<double>();
  return s;
}

class ServiceTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = testproc::temp_dir("svc");
    store_ = std::make_unique<CampaignStore>(root_);
    service_ = std::make_unique<Service>(*store_, CampaignConfig{});
  }
  void TearDown() override { fs::remove_all(root_); }

  json call(const std::string& method, const std::string& path, const json& body, int expect) {
    HttpResponse r = service_->handle(method, path, body.is_null() ? "" : body.dump());
    EXPECT_EQ(r.status, expect) << method << ' ' << path << " -> " << r.body;
    if (r.content_type != "application/json") return r.body;
    return json::parse(r.body);
  }

  std::pair<std::string, json> create_campaign() {
    json r = call("POST", "/campaigns", {{"space", kSpace44}, {"config", kFastConfig}}, 201);
    return {r["id"].get<std::string>(), r["initial_design"]};
  }

  void tell_all(const std::string& id, const json& design) {
    for (const auto& p : design) call("POST", "/campaigns/" + id + "/tell", {{"point", p}, {"y", toy_objective(p)}}, 200);
  }

  fs::path root_;
  std::unique_ptr<CampaignStore> store_;
  std::unique_ptr<Service> service_;
};

}  // namespace

TEST(ServiceConfig, FileParsingAndErrors) {
  ServiceConfig c = parse_service_config(R"(
# comment line
host = "0.0.0.0"
port = 9090   # trailing comment
store_root = "/tmp/x"

[engine]
n_init = 12
acq = "ucb"
beta = 3.5

[engine.kernel]
q_gsm = 3
hamming_unit_diagonal = true
)");
  EXPECT_EQ(c.host, "0.0.0.0");
  EXPECT_EQ(c.port, 9090);
  EXPECT_EQ(c.store_root, "/tmp/x");
  EXPECT_EQ(c.engine.suggest.n_init, 12);
  EXPECT_EQ(c.engine.acq.kind, AcqKind::UCB);
  EXPECT_EQ(c.engine.acq.beta, 3.5);
  EXPECT_EQ(c.engine.kernel.q_gsm, 3u);
  EXPECT_TRUE(c.engine.kernel.hamming_unit_diagonal);
  EXPECT_THROW(parse_service_config("colour = 1\n"), Error);
  EXPECT_THROW(parse_service_config("[engine]\nwarp = 2\n"), Error);
  EXPECT_THROW(parse_service_config("[server]\n"), Error);
  EXPECT_THROW(parse_service_config("port = 70000\n"), Error);
  EXPECT_THROW(parse_service_config("host = \"open\n"), Error);
}

TEST(ServiceConfig, EnvironmentOverridesFile) {
  ServiceConfig c = parse_service_config("host = \"a\"\nport = 1\n");
  std::map<std::string, std::string> env{{"CATBOX_PORT", "4242"}, {"CATBOX_STORE_ROOT", "/srv/c"}};
  auto getenv = [&](const char* k) -> const char* {
    auto it = env.find(k);
    return it == env.end() ? nullptr : it->second.c_str();
  };
  c = apply_env(c, getenv);
  EXPECT_EQ(c.host, "a");
  EXPECT_EQ(c.port, 4242);
  EXPECT_EQ(c.store_root, "/srv/c");
  env["CATBOX_PORT"] = "http";
  EXPECT_THROW(apply_env(c, getenv), Error);
}

TEST(Store, IdsAndAtomicWrites) {
  std::set<std::string> ids;
  for (int i = 0; i < 200; ++i) {
    std::string id = CampaignStore::new_id();
    EXPECT_EQ(id.size(), 32u);
    EXPECT_TRUE(CampaignStore::valid_id(id));
    ids.insert(id);
  }
  EXPECT_EQ(ids.size(), 200u);
  EXPECT_FALSE(CampaignStore::valid_id("../etc/passwd"));
  EXPECT_FALSE(CampaignStore::valid_id("ABCDEF0123456789ABCDEF0123456789"));

  fs::path dir = testproc::temp_dir("atomic");
  write_file_atomic(dir / "f.json", "one");
  write_file_atomic(dir / "f.json", "two");
  EXPECT_EQ(read_file(dir / "f.json"), "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++files;
  EXPECT_EQ(files, 1u);  // no temporaries left behind
  fs::remove_all(dir);
}

TEST_F(ServiceTest, CreateReturnsInitialDesign) {
  EXPECT_EQ(call("GET", "/campaigns", nullptr, 200), json::array());
  auto [id, design] = create_campaign();
  EXPECT_EQ(design.size(), 20u);
  for (const auto& p : design) {
    EXPECT_EQ(p["cat"].size(), 4u);
    EXPECT_EQ(p["con"].size(), 4u);
  }
  EXPECT_EQ(call("GET", "/campaigns", nullptr, 200), json::array({id}));
  EXPECT_TRUE(fs::exists(root_ / (id + ".json")));
}

TEST_F(ServiceTest, InvalidSpaceNamesTheField) {
  json bad = kSpace44;
  bad["continuous"][1]["lower"] = 5.0;
  json r = call("POST", "/campaigns", {{"space", bad}}, 400);
  EXPECT_EQ(r["field"], "space.continuous[1].lower");
  EXPECT_NE(r["error"].get<std::string>().find("'u'"), std::string::npos);

  bad = kSpace44;
  bad["categoricals"][2]["name"] = "a";
  r = call("POST", "/campaigns", {{"space", bad}}, 400);
  EXPECT_EQ(r["field"], "space.categoricals[2].name");

  r = call("POST", "/campaigns", json::object(), 400);
  EXPECT_EQ(r["field"], "space");
  r = call("POST", "/campaigns", {{"space", kSpace44}, {"direction", "sideways"}}, 400);
  EXPECT_EQ(r["field"], "direction");
  r = call("POST", "/campaigns", {{"space", kSpace44}, {"config", {{"r_min", -1.0}}}}, 400);
  EXPECT_EQ(r["field"], "config");
  EXPECT_EQ(service_->handle("POST", "/campaigns", "{not json").status, 400);
  EXPECT_TRUE(store_->list().empty());
}

TEST_F(ServiceTest, ErrorCodes) {
  const std::string ghost(32, 'a');
  call("POST", "/campaigns/" + ghost + "/tell", {{"point", {{"cat", {0, 0, 0, 0}}, {"con", {0, 0, 10, 0}}}}, {"y", 1.0}}, 404);
  call("POST", "/campaigns/" + ghost + "/suggest", nullptr, 404);
  call("GET", "/campaigns/" + ghost, nullptr, 404);
  call("GET", "/campaigns/not-an-id", nullptr, 404);
  call("DELETE", "/campaigns", nullptr, 405);
  call("GET", "/campaigns/" + ghost + "/tell", nullptr, 405);

  auto [id, design] = create_campaign();
  call("POST", "/campaigns/" + id + "/suggest", nullptr, 422);
  const std::string tell = "/campaigns/" + id + "/tell";
  json r = call("POST", tell, {{"point", {{"cat", {0, 0, 0, 0}}, {"con", {0.5, 0, 30, 0}}}}, {"y", 1.0}}, 409);
  EXPECT_EQ(r["field"], "point");
  call("POST", tell, {{"point", {{"cat", {0, 5, 0, 0}}, {"con", {0.5, 0, 15, 0}}}}, {"y", 1.0}}, 409);
  call("POST", tell, {{"y", 1.0}}, 409);
  r = call("POST", tell, {{"point", design[0]}}, 400);
  EXPECT_EQ(r["field"], "y");
  call("POST", tell, {{"point", design[0]}, {"y", "high"}}, 400);
  call("POST", tell, {{"point", design[0]}, {"y", 1.0}, {"iteration", 5}}, 200);
  call("POST", tell, {{"point", design[1]}, {"y", 1.0}, {"iteration", 5}}, 409);
  EXPECT_EQ(store_->load(id)->history().size(), 1u);
}

TEST_F(ServiceTest, TellUpdatesIncumbentAndSuggestIsIdempotent) {
  auto [id, design] = create_campaign();
  const std::string tell = "/campaigns/" + id + "/tell";
  double best = -1e300;
  for (std::size_t i = 0; i < design.size(); ++i) {
    const double y = toy_objective(design[i]);
    json s = call("POST", tell, {{"point", design[i]}, {"y", y}}, 200);
    best = std::max(best, y);
    EXPECT_EQ(s["n_observations"], i + 1);
    EXPECT_EQ(s["incumbent"]["y"].get<double>(), best);
    EXPECT_EQ(s["last"]["tag"], "init");
    EXPECT_EQ(s["pending_initial"], design.size() - i - 1);
  }
  json better_point = {{"cat", {1, 1, 1, 1}}, {"con", {0.0, 0.0, 10.0, 0.0}}};
  json s = call("POST", tell, {{"point", better_point}, {"y", 100.0}}, 200);
  EXPECT_EQ(s["incumbent"]["y"], 100.0);
  EXPECT_EQ(s["incumbent"]["point"], better_point);
  EXPECT_EQ(s["last"]["tag"], "manual");

  json a = call("POST", "/campaigns/" + id + "/suggest", nullptr, 200);
  const std::string stored = testproc::slurp(root_ / (id + ".json"));
  json b = call("POST", "/campaigns/" + id + "/suggest", nullptr, 200);
  EXPECT_EQ(a, b);
  EXPECT_EQ(testproc::slurp(root_ / (id + ".json")), stored);
  EXPECT_TRUE(a["tag"] == "suggested" || a["tag"] == "exploration");

  s = call("POST", tell, {{"point", a["point"]}, {"y", toy_objective(a["point"])}}, 200);
  EXPECT_EQ(s["last"]["tag"], a["tag"]);
  json c = call("POST", "/campaigns/" + id + "/suggest", nullptr, 200);
  EXPECT_NE(c["point"], a["point"]);
}

TEST_F(ServiceTest, ExportAndRestart) {
  auto [id, design] = create_campaign();
  tell_all(id, design);
  HttpResponse csv = service_->handle("GET", "/campaigns/" + id + "/export.csv", "");
  EXPECT_EQ(csv.status, 200);
  EXPECT_EQ(csv.content_type, "text/csv");
  EXPECT_EQ(std::count(csv.body.begin(), csv.body.end(), '\n'), 21);
  EXPECT_EQ(csv.body.substr(0, csv.body.find('\n')), "iteration,point_json,raw_y,observed_y,incumbent_y");

  const std::string before = service_->handle("GET", "/campaigns/" + id, "").body;
  CampaignStore reopened(root_);
  Service restarted(reopened, CampaignConfig{});
  EXPECT_EQ(restarted.handle("GET", "/campaigns/" + id, "").body, before);
  EXPECT_EQ(restarted.handle("GET", "/campaigns/" + id + "/export.csv", "").body, csv.body);
}

TEST_F(ServiceTest, ConcurrentTellsAreSerialized) {
  auto [id, design] = create_campaign();
  std::vector<std::thread> threads;
  std::atomic<int> ok{0};
  for (std::size_t i = 0; i < design.size(); ++i) {
    threads.emplace_back([&, i] {
      json body{{"point", design[i]}, {"y", static_cast<double>(i)}};
      if (service_->handle("POST", "/campaigns/" + id + "/tell", body.dump()).status == 200) ++ok;
    });
  }
  for (auto& t : threads) t.join();
  EXPECT_EQ(ok.load(), static_cast<int>(design.size()));
  auto c = store_->load(id);
  ASSERT_TRUE(c);
  EXPECT_EQ(c->history().size(), design.size());
  EXPECT_TRUE(c->pending_initial().empty());
  std::set<int> iterations;
  for (const auto& h : c->history()) iterations.insert(h.iteration);
  EXPECT_EQ(iterations.size(), design.size());
  EXPECT_EQ(c->incumbent()->y, static_cast<double>(design.size() - 1));
}

TEST_F(ServiceTest, CrashHookRunsAfterPersist) {
  std::vector<std::size_t> seen;
  service_->after_persist = [&](const std::string& id) { seen.push_back(store_->load(id)->history().size()); };
  auto [id, design] = create_campaign();
  call("POST", "/campaigns/" + id + "/tell", {{"point", design[0]}, {"y", 0.5}}, 200);
  EXPECT_EQ(seen, (std::vector<std::size_t>{0, 1}));
}

TEST_F(ServiceTest, HttpRoundTrip) {
  HttpServer server(*service_);
  const int port = server.bind("127.0.0.1", 0);
  ASSERT_GT(port, 0);
  std::thread loop([&] { server.listen(); });
  httplib::Client client("127.0.0.1", port);
  client.set_read_timeout(60, 0);
  auto res = client.Post("/campaigns", json{{"space", kSpace44}, {"config", kFastConfig}}.dump(), "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 201);
  json created = json::parse(res->body);
  const std::string id = created["id"];
  auto list = client.Get("/campaigns");
  ASSERT_TRUE(list);
  EXPECT_EQ(json::parse(list->body), json::array({id}));
  auto tell = client.Post("/campaigns/" + id + "/tell",
                          json{{"point", created["initial_design"][0]}, {"y", 1.5}}.dump(), "application/json");
  ASSERT_TRUE(tell);
  EXPECT_EQ(tell->status, 200);
  auto csv = client.Get("/campaigns/" + id + "/export.csv");
  ASSERT_TRUE(csv);
  EXPECT_EQ(csv->get_header_value("Content-Type"), "text/csv");
  auto missing = client.Get("/campaigns/" + std::string(32, 'f'));
  ASSERT_TRUE(missing);
  EXPECT_EQ(missing->status, 404);
  server.stop();
  loop.join();
}
