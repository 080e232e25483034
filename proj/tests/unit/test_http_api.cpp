#include <gtest/gtest.h>

#include <thread>

#include <httplib.h>

#include "concierge/error.hpp"
#include "concierge/http_api.hpp"
#include "service_fixture.hpp"
#include "test_support.hpp"

namespace concierge {
namespace {

using nlohmann::json;

class DownBackend : public GenerationBackend {
 public:
  std::string complete(const BackendRequest&) override {
    throw Error(ErrorCode::BackendUnavailable, "down");
  }
};

class HttpApiTest : public ::testing::Test {
 protected:
  void start(std::shared_ptr<GenerationBackend> backend) {
    api_ = std::make_unique<HttpApi>(test::make_service(dir_.path(), std::move(backend)));
    port_ = api_->bind("127.0.0.1", 0);
    thread_ = std::thread([this] { api_->listen(); });
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    for (int i = 0; i < 100 && !api_->running(); ++i) {
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
  }
  void TearDown() override {
    if (api_) api_->stop();
    if (thread_.joinable()) thread_.join();
  }
  json post(const std::string& path, const std::string& body, int expect) {
    auto r = client_->Post(path, body, "application/json");
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }
  json get(const std::string& path, int expect) {
    auto r = client_->Get(path);
    EXPECT_TRUE(r);
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }

  test::TempDir dir_;
  std::unique_ptr<HttpApi> api_;
  std::thread thread_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(HttpApiTest, FullSessionOverHttp) {
  start(std::make_shared<ScriptedBackend>(test::happy_script()));
  const auto created = post("/sessions", "", 201);
  const std::string id = created["session_id"];
  EXPECT_EQ(created["state"], "Icebreaker");
  json last;
  for (const auto& line : test::happy_inputs()) {
    last = post("/sessions/" + id + "/turns", json{{"text", line}}.dump(), 200);
    EXPECT_TRUE(last.contains("markup_document"));
    EXPECT_TRUE(last["motions"].is_array());
    if (last["state"] == "Introduction1") {
      ASSERT_EQ(last["candidates"].size(), 3u);
      EXPECT_TRUE(last["candidates"][0].contains("image_ref"));
    }
  }
  EXPECT_EQ(last["state"], "End");
  EXPECT_EQ(last["plan"]["first_spot"]["id"], "kinkakuji");

  const auto view = get("/sessions/" + id, 200);
  EXPECT_EQ(view["state"], "End");
  EXPECT_EQ(view["transcript"].size(), 24u);

  const auto m = get("/metrics", 200);
  EXPECT_EQ(m["sessions_total"], 1);
  EXPECT_EQ(m["plan_rate"], 1.0);
  EXPECT_EQ(get("/metrics?threshold_km=1", 200)["plan_rate"], 0.0);
  const auto bad_threshold = get("/metrics?threshold_km=abc", 400);
  EXPECT_EQ(bad_threshold["error"], "InvalidRequest");

  const auto ended = post("/sessions/" + id + "/turns", json{{"text", "x"}}.dump(), 409);
  EXPECT_EQ(ended["error"], "SessionEnded");
}

TEST_F(HttpApiTest, ErrorMapping) {
  start(std::make_shared<ScriptedBackend>(test::happy_script()));
  EXPECT_EQ(get("/sessions/doesnotexist", 404)["error"], "SessionNotFound");
  EXPECT_EQ(post("/sessions/doesnotexist/turns", R"({"text":"x"})", 404)["error"],
            "SessionNotFound");
  const std::string id = post("/sessions", "", 201)["session_id"];
  EXPECT_EQ(post("/sessions/" + id + "/turns", "not json", 400)["error"], "InvalidRequest");
  EXPECT_EQ(post("/sessions/" + id + "/turns", R"({"text":5})", 400)["error"], "InvalidRequest");
  EXPECT_EQ(post("/sessions/" + id + "/turns", R"({"text":"  "})", 400)["error"], "InvalidRequest");
  const auto table = get("/transitions", 200);
  ASSERT_TRUE(table.is_array());
  EXPECT_EQ(table[0]["from"], "Icebreaker");
  EXPECT_TRUE(table[0].contains("guard"));
}

TEST_F(HttpApiTest, BackendDownIs503) {
  start(std::make_shared<DownBackend>());
  const std::string id = post("/sessions", "", 201)["session_id"];
  const auto r = post("/sessions/" + id + "/turns", R"({"text":"こんにちは"})", 503);
  EXPECT_EQ(r["error"], "BackendUnavailable");
  EXPECT_EQ(get("/sessions/" + id, 200)["transcript"].size(), 0u);
}

TEST(HttpStatus, Mapping) {
  EXPECT_EQ(http_status(ErrorCode::SessionNotFound), 404);
  EXPECT_EQ(http_status(ErrorCode::SessionEnded), 409);
  EXPECT_EQ(http_status(ErrorCode::BackendUnavailable), 503);
  EXPECT_EQ(http_status(ErrorCode::InvalidRequest), 400);
  EXPECT_EQ(http_status(ErrorCode::StorageError), 500);
}

// --- Remote backend against a local stub -----------------------------------

class StubServer {
 public:
  explicit StubServer(std::function<void(const httplib::Request&, httplib::Response&)> h) {
    server_.Post("/v1/generate", std::move(h));
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~StubServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/generate"; }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

TEST(RemoteBackend, PostsPromptAndReadsText) {
  json seen;
  std::string auth;
  StubServer stub([&](const httplib::Request& req, httplib::Response& res) {
    seen = json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(json{{"text", "RESPONSE: やあ\nACT: ChatDone"}}.dump(), "application/json");
  });
  RemoteBackend backend({stub.endpoint(), "secret", std::chrono::milliseconds(2000)});
  EXPECT_EQ(backend.complete({"Icebreaker/1", "SYS", "USER"}), "RESPONSE: やあ\nACT: ChatDone");
  EXPECT_EQ(seen["system_prompt"], "SYS");
  EXPECT_EQ(seen["user_context"], "USER");
  EXPECT_EQ(auth, "Bearer secret");
}

TEST(RemoteBackend, HttpErrorsAreUnavailable) {
  StubServer stub([](const httplib::Request&, httplib::Response& res) { res.status = 500; });
  RemoteBackend backend({stub.endpoint(), "", std::chrono::milliseconds(2000)});
  try {
    backend.complete({"k", "", ""});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
  }
}

TEST(RemoteBackend, UnreachableIsUnavailableAndGenerateFallsBackOnlyOnBadText) {
  RemoteBackend dead({"http://127.0.0.1:1/x", "", std::chrono::milliseconds(300)});
  const auto b = build_prompt(ScenarioState::Icebreaker, SessionRecord{}, std::monostate{});
  EXPECT_THROW(generate(b, dead), Error);

  StubServer garbage([](const httplib::Request&, httplib::Response& res) {
    res.set_content("{not json", "application/json");
  });
  RemoteBackend bad({garbage.endpoint(), "", std::chrono::milliseconds(2000)});
  const auto out = generate(b, bad);
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(out.act, DialogueAct::ChatDone);
}

TEST(RemoteBackend, RejectsBadEndpoints) {
  EXPECT_THROW(RemoteBackend({"https://x", "", {}}), Error);
  EXPECT_THROW(RemoteBackend({"http://:80/x", "", {}}), Error);
  EXPECT_THROW(RemoteBackend({"http://h:port/x", "", {}}), Error);
}

}  // namespace
}  // namespace concierge
