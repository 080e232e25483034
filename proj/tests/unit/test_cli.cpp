#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "concierge/http_api.hpp"
#include "concierge_cli/cli.hpp"
#include "concierge_cli/persona.hpp"
#include "oracles.hpp"
#include "service_fixture.hpp"
#include "test_support.hpp"

namespace concierge {
namespace {

using nlohmann::json;

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args, const std::string& input = "") {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = cli::run(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string data_flag() { return test::data_dir().string(); }

TEST(Cli, GoldenInteractiveTranscript) {
  test::TempDir dir;
  const auto r = run({"--seed", "42", "--data-dir", data_flag(), "--storage-dir", dir.path().string(),
                      "--script", (test::fixtures_dir() / "happy_script.json").string(),
                      "interactive"},
                     test::read_file(test::fixtures_dir() / "happy_input.txt"));
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, test::read_file(test::golden_dir() / "happy_transcript.txt"));
}

TEST(Cli, EofSavesAndResumes) {
  test::TempDir dir;
  const std::vector<std::string> base = {
      "--seed", "5", "--data-dir", data_flag(), "--storage-dir", dir.path().string(),
      "--script", (test::fixtures_dir() / "happy_script.json").string(), "interactive"};
  auto r = run(base, "こんにちは\n東京から来ました\n");
  EXPECT_EQ(r.code, 0);
  const auto hint = r.out.find("resume with: concierge interactive --session ");
  ASSERT_NE(hint, std::string::npos);
  std::string id = r.out.substr(hint + 45);
  id = id.substr(0, id.find('\n'));
  auto resume = base;
  resume.insert(resume.end(), {"--session", id});
  r = run(resume, "静かなところがいいです\n");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("(Interview1)"), std::string::npos);
  EXPECT_NE(r.out.find("[Interview1 -> Interview1, AskMore]"), std::string::npos);
  resume.back() = "no-such-session";
  EXPECT_EQ(run(resume).code, 1);
}

TEST(Cli, InteractiveOverUrl) {
  test::TempDir dir;
  HttpApi api(test::make_service(dir.path(), std::make_shared<ScriptedBackend>(test::happy_script())));
  const int port = api.bind("127.0.0.1", 0);
  std::thread t([&] { api.listen(); });
  const auto r = run({"interactive", "--url", "http://127.0.0.1:" + std::to_string(port)},
                     test::read_file(test::fixtures_dir() / "happy_input.txt"));
  api.stop();
  t.join();
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("plan: 金閣寺 -> 下鴨神社"), std::string::npos) << r.out;
}

TEST(Cli, UnreachableServiceExits2) {
  const auto r = run({"interactive", "--url", "http://127.0.0.1:1"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("ConnectError"), std::string::npos);
}

TEST(Cli, UnreachableRemoteBackendExits2) {
  test::TempDir dir;
  const auto r = run({"--data-dir", data_flag(), "--storage-dir", dir.path().string(), "--backend",
                      "remote", "--endpoint", "http://127.0.0.1:1/x", "interactive"},
                     "こんにちは\n");
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, UsageErrorsExit1) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"bogus"}).code, 1);
  EXPECT_EQ(run({"--backend", "gpt", "validate"}).code, 1);
  EXPECT_EQ(run({"--threshold-km", "-3", "metrics"}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ValidateShippedDataIsClean) {
  const auto r = run({"--data-dir", data_flag(), "validate"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("ok: 0"), std::string::npos);
}

TEST(Cli, ValidateReportsFindings) {
  test::TempDir dir;
  std::filesystem::copy(test::data_dir(), dir.path(), std::filesystem::copy_options::recursive);
  auto spots = test::read_json(dir.path() / "kyoto_spots.json");
  spots[2]["lat"] = 200;
  spots[4]["id"] = spots[0]["id"];
  std::ofstream(dir.path() / "kyoto_spots.json") << spots.dump();
  auto profile = test::read_json(dir.path() / "emphasis_profile.json");
  profile["1"]["rate_factor"] = -1;
  std::ofstream(dir.path() / "emphasis_profile.json") << profile.dump();
  std::ofstream(dir.path() / "greetings.json") << "[\"\", 3]";
  const auto r = run({"--data-dir", dir.path().string(), "validate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("kyoto_spots.json: row 2 lat: latitude out of range"), std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("duplicate id"), std::string::npos);
  EXPECT_NE(r.out.find("emphasis_profile.json: level 1: rate_factor"), std::string::npos);
  EXPECT_NE(r.out.find("greetings.json: row 1"), std::string::npos);
  EXPECT_NE(r.out.find("findings: 5"), std::string::npos) << r.out;
}

TEST(Cli, MetricsCommand) {
  test::TempDir dir;
  auto svc = test::make_service(dir.path(), std::make_shared<ScriptedBackend>(test::happy_script()));
  const auto id = svc->create_session();
  for (const auto& line : test::happy_inputs()) svc->post_user_turn(id, line);
  auto r = run({"--storage-dir", dir.path().string(), "--threshold-km", "3", "metrics"});
  EXPECT_EQ(r.code, 0);
  auto j = json::parse(r.out);
  EXPECT_EQ(j["sessions_total"], 1);
  EXPECT_EQ(j["plan_rate"], 0.0);  // 3.99 km > 3 km
  EXPECT_EQ(j["threshold_km"], 3.0);
  EXPECT_EQ(run({"--storage-dir", (dir.path() / "missing").string(), "metrics"}).code, 3);
}

TEST(Cli, PersonasAreSeededAndReproducible) {
  const std::vector<std::string> args = {"--data-dir", data_flag(), "--seed", "11", "personas",
                                         "--persona", "picky", "--runs", "30"};
  const auto a = run(args);
  const auto b = run(args);
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const auto j = json::parse(a.out);
  EXPECT_EQ(j["runs"], 30);
  EXPECT_EQ(j["abandoned"], 0);
  EXPECT_EQ(j["metrics"]["sessions_total"], 30);
}

TEST(Cli, AlwaysAcceptPersonaIsFullyFeasibleAtCatalogDiameter) {
  // Every always-accept session confirms a plan; any plan is feasible once the
  // threshold covers the largest pairwise distance in the catalog.
  std::ostringstream km;
  km << test::kCatalogMaxPairKm + 0.001;
  const auto r = run({"--data-dir", data_flag(), "--seed", "3", "--threshold-km", km.str(),
                      "personas", "--persona", "always_accept", "--runs", "25"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["metrics"]["sessions_with_plan"], 25);
  EXPECT_EQ(j["metrics"]["plan_rate"], 1.0);
  EXPECT_EQ(j["mean_turns"], 8.0);
}

TEST(Cli, PersonaValidation) {
  EXPECT_FALSE(cli::validate_persona(json{{"acts", {{"Icebreaker", {{"SpotAccepted", 1}}}}}}).empty());
  EXPECT_FALSE(cli::validate_persona(json{{"acts", {{"Nowhere", {{"ChatDone", 1}}}}}}).empty());
  EXPECT_FALSE(cli::validate_persona(json{{"acts", {{"Icebreaker", {{"ChatDone", 0}}}}}}).empty());
  EXPECT_TRUE(cli::validate_persona(json{{"acts", {{"Icebreaker", {{"ChatDone", 1}}}}}}).empty());
  EXPECT_EQ(run({"--data-dir", data_flag(), "personas", "--persona", "nobody"}).code, 1);
}

}  // namespace
}  // namespace concierge
