#include <gtest/gtest.h>

#include <fstream>
#include <map>

#include "concierge/config.hpp"
#include "concierge/error.hpp"
#include "test_support.hpp"

namespace concierge {
namespace {

EnvLookup fake_env(std::map<std::string, std::string> vars) {
  return [vars](const std::string& k) -> std::optional<std::string> {
    auto it = vars.find(k);
    if (it == vars.end()) return std::nullopt;
    return it->second;
  };
}

TEST(Config, Defaults) {
  const auto c = load_config(std::nullopt, fake_env({}));
  EXPECT_EQ(c.backend, BackendKind::Scripted);
  EXPECT_EQ(c.loop_cap, 2);
  EXPECT_EQ(c.turn_cap, 5);
  EXPECT_EQ(c.threshold_km, 10.0);
  EXPECT_EQ(c.retries, 2);
}

TEST(Config, FileThenEnvPrecedence) {
  test::TempDir dir;
  const auto file = dir.path() / "c.json";
  std::ofstream(file) << R"({"storage_dir": "store", "loop_cap": 3, "threshold_km": 7.5,
                             "backend": "remote", "backend_endpoint": "http://h:1/x"})";
  auto c = load_config(file, fake_env({}));
  EXPECT_EQ(c.storage_dir, dir.path() / "store");
  EXPECT_EQ(c.loop_cap, 3);
  EXPECT_EQ(c.backend, BackendKind::Remote);
  c = load_config(file, fake_env({{"CONCIERGE_LOOP_CAP", "4"}, {"CONCIERGE_BACKEND", "scripted"}}));
  EXPECT_EQ(c.loop_cap, 4);
  EXPECT_EQ(c.backend, BackendKind::Scripted);
  EXPECT_EQ(c.threshold_km, 7.5);
  const auto sc = to_service_config(c);
  EXPECT_EQ(sc.engine.loop_cap, 4);
  EXPECT_EQ(sc.threshold_km, 7.5);
}

TEST(Config, RejectsBadInput) {
  test::TempDir dir;
  const auto file = dir.path() / "c.json";
  std::ofstream(file) << R"({"unknown_key": 1})";
  EXPECT_THROW(load_config(file, fake_env({})), Error);
  std::ofstream(file) << R"({"loop_cap": "two"})";
  EXPECT_THROW(load_config(file, fake_env({})), Error);
  EXPECT_THROW(load_config(std::nullopt, fake_env({{"CONCIERGE_TURN_CAP", "5x"}})), Error);
  EXPECT_THROW(load_config(std::nullopt, fake_env({{"CONCIERGE_BACKEND", "gpt"}})), Error);
  EXPECT_THROW(load_config(dir.path() / "missing.json", fake_env({})), Error);
}

TEST(Config, MakeBackend) {
  AppConfig c;
  EXPECT_NE(dynamic_cast<ScriptedBackend*>(make_backend(c).get()), nullptr);
  c.script_file = test::fixtures_dir() / "happy_script.json";
  EXPECT_NE(make_backend(c), nullptr);
  c.backend = BackendKind::Remote;
  EXPECT_THROW(make_backend(c), Error);
  c.backend_endpoint = "http://127.0.0.1:9/x";
  EXPECT_NE(dynamic_cast<RemoteBackend*>(make_backend(c).get()), nullptr);
}

}  // namespace
}  // namespace concierge
