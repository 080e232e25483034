#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <random>

#include "concierge/error.hpp"
#include "concierge/generation.hpp"
#include "concierge/text.hpp"
#include "test_support.hpp"

namespace concierge {
namespace {

using S = ScenarioState;
using A = DialogueAct;

const Resources& res() { return *test::shared_resources(); }

class ThrowingBackend : public GenerationBackend {
 public:
  int calls = 0;
  std::string complete(const BackendRequest&) override {
    ++calls;
    throw Error(ErrorCode::BackendUnavailable, "down");
  }
};

class SequenceBackend : public GenerationBackend {
 public:
  explicit SequenceBackend(std::vector<std::string> outs) : outs_(std::move(outs)) {}
  std::vector<BackendRequest> requests;
  std::string complete(const BackendRequest& r) override {
    requests.push_back(r);
    const auto i = std::min(requests.size() - 1, outs_.size() - 1);
    if (outs_[i] == "<down>") throw Error(ErrorCode::BackendUnavailable, "down");
    return outs_[i];
  }

 private:
  std::vector<std::string> outs_;
};

SessionRecord interview_session() {
  SessionRecord s;
  s.session_id = "golden";
  s.state = S::Interview1;
  s.transcript = {
      {Speaker::User, "こんにちは", 1000, S::Icebreaker},
      {Speaker::System, "こんにちは、京都観光のご相談へようこそ。", 1001, S::Icebreaker},
      {Speaker::User, "静かなお寺が好きです", 2000, S::Interview1},
  };
  return s;
}

SessionRecord recommendation2_session() {
  SessionRecord s = interview_session();
  s.state = S::Recommendation2;
  s.first_choice = res().catalog.at("kinkakuji");
  s.candidates[1] = {res().catalog.at("shimogamo_jinja"), res().catalog.at("yasaka_jinja")};
  s.transcript.push_back({Speaker::User, "神社がいいです", 3000, S::Interview2});
  return s;
}

void check_golden(const std::string& name, const std::string& actual) {
  const auto path = test::golden_dir() / name;
  if (std::getenv("CONCIERGE_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
  }
  EXPECT_EQ(test::read_file(path), actual) << "golden mismatch: " << path;
}

TEST(BuildPrompt, GoldenInterviewPrompt) {
  const auto b = build_prompt(S::Interview1, interview_session(), res().genres);
  EXPECT_EQ(b.turn_index, 2);
  EXPECT_FALSE(b.few_shot_examples.empty());
  check_golden("prompt_interview1.json", serialize(b) + "\n");
}

TEST(BuildPrompt, GoldenRecommendationPrompt) {
  const auto s = recommendation2_session();
  const auto b = build_prompt(S::Recommendation2, s, make_spot_digest(s, Slot::Second));
  const auto& digest = std::get<SpotDigest>(b.auxiliary);
  ASSERT_EQ(digest.rows.size(), 2u);
  EXPECT_EQ(digest.rows[0].reading, "しもがもじんじゃ");
  ASSERT_TRUE(digest.rows[0].distance_from_first_km);
  check_golden("prompt_recommendation2.json", serialize(b) + "\n");
  const auto req = to_request(b);
  EXPECT_EQ(req.key, "Recommendation2/3");
  EXPECT_NE(req.system_prompt.find("下鴨神社"), std::string::npos);
  EXPECT_NE(req.system_prompt.find("ACT: <SpotDiscuss"), std::string::npos);
}

TEST(BuildPrompt, DeterministicAndContextWindowBounded) {
  auto s = interview_session();
  for (int i = 0; i < 20; ++i) s.transcript.push_back({Speaker::User, "t" + std::to_string(i), i, S::Interview1});
  const auto a = build_prompt(S::Interview1, s, res().genres, {4});
  const auto b = build_prompt(S::Interview1, s, res().genres, {4});
  EXPECT_EQ(a, b);
  EXPECT_EQ(serialize(a), serialize(b));
  ASSERT_EQ(a.context_window.size(), 4u);
  EXPECT_EQ(a.context_window.back().text, "t19");
}

TEST(BuildPrompt, RejectsMismatchedAuxiliary) {
  const auto s = interview_session();
  for (auto state : kAllStates) {
    const CatalogView views[] = {std::monostate{}, res().genres, SpotDigest{}};
    int ok = 0;
    for (const auto& v : views) {
      try {
        build_prompt(state, s, v);
        ++ok;
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MismatchedAuxiliary);
      }
    }
    EXPECT_EQ(ok, 1) << to_string(state);
  }
  SpotDigest big;
  big.rows.resize(4);
  EXPECT_THROW(build_prompt(S::Recommendation1, s, big), Error);
}

TEST(ParseOutput, AcceptsWellFormed) {
  auto r = parse_output("RESPONSE: こんにちは\nACT: ChatDone\n\n", S::Icebreaker);
  ASSERT_TRUE(std::holds_alternative<GenerationOutput>(r));
  EXPECT_EQ(std::get<GenerationOutput>(r).response_text, "こんにちは");
  EXPECT_EQ(std::get<GenerationOutput>(r).act, A::ChatDone);
  r = parse_output("\n\r\nRESPONSE:  hi  \r\n\nACT:  ChatContinue  \r\n", S::Icebreaker);
  ASSERT_TRUE(std::holds_alternative<GenerationOutput>(r));
  EXPECT_EQ(std::get<GenerationOutput>(r).response_text, "hi");
}

TEST(ParseOutput, RejectsMalformed) {
  const char* bad[] = {
      "",
      "   \n\n",
      "ACT: ChatDone\nRESPONSE: hi",
      "RESPONSE: hi",
      "RESPONSE:\nACT: ChatDone",
      "RESPONSE: hi\nACT: chatdone",
      "RESPONSE: hi\nACT: SpotAccepted",
      "RESPONSE: hi\nACT: ChatDone\nmore",
      "RESPONSE: hi\nextra\nACT: ChatDone",
      "response: hi\nACT: ChatDone",
      "RESPONSE: \xff\xfe\nACT: ChatDone",
  };
  for (const char* raw : bad) {
    EXPECT_TRUE(std::holds_alternative<ParseFailure>(parse_output(raw, S::Icebreaker))) << raw;
  }
  for (auto a : kAllActs) {
    const auto raw = "RESPONSE: x\nACT: " + std::string(to_string(a));
    EXPECT_TRUE(std::holds_alternative<ParseFailure>(parse_output(raw, S::End)));
  }
}

TEST(ParseOutput, FuzzNeverThrows) {
  std::mt19937_64 rng(7);
  const std::vector<std::string> parts = {"RESPONSE:", "ACT:", "ChatDone", "AskMore", "\n", "\r\n",
                                          " ", "こんにちは", "\xe3\x81", "\xff", "\0", "：",
                                          "SpotAccepted", "KEYWORDS:", ",", "RESPONSE: x\nACT: "};
  for (int i = 0; i < 10000; ++i) {
    std::string raw;
    const int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int k = 0; k < n; ++k) {
      if (rng() % 3 == 0) raw.push_back(static_cast<char>(rng() & 0xff));
      else raw += parts[rng() % parts.size()];
    }
    const auto state = kAllStates[rng() % kAllStates.size()];
    const auto r = parse_output(raw, state);
    if (const auto* out = std::get_if<GenerationOutput>(&r)) {
      EXPECT_TRUE(accepts(state, out->act));
      EXPECT_FALSE(out->response_text.empty());
    }
    (void)parse_keywords(raw);
  }
}

TEST(Fallback, CoversEveryState) {
  for (auto s : kAllStates) {
    const auto a = fallback_act(s);
    if (s == S::End) {
      EXPECT_FALSE(a);
      continue;
    }
    ASSERT_TRUE(a) << to_string(s);
    EXPECT_TRUE(accepts(s, *a));
    EXPECT_FALSE(fallback_response(s).empty());
    EXPECT_TRUE(text::is_valid_utf8(fallback_response(s)));
  }
}

TEST(Generate, RetriesThenFallsBack) {
  const auto b = build_prompt(S::Icebreaker, SessionRecord{}, std::monostate{});
  SequenceBackend garbage({"nonsense"});
  auto out = generate(b, garbage);
  EXPECT_TRUE(out.fallback);
  EXPECT_EQ(out.act, A::ChatDone);
  EXPECT_EQ(out.attempts, 3);
  EXPECT_EQ(garbage.requests.size(), 3u);

  SequenceBackend second({"bad", "RESPONSE: ok\nACT: ChatContinue"});
  out = generate(b, second);
  EXPECT_FALSE(out.fallback);
  EXPECT_EQ(out.attempts, 2);
  EXPECT_EQ(out.act, A::ChatContinue);

  SequenceBackend mixed({"<down>", "<down>", "bad"});
  out = generate(b, mixed);
  EXPECT_TRUE(out.fallback);

  SequenceBackend no_retry({"bad"});
  out = generate(b, no_retry, {0});
  EXPECT_EQ(no_retry.requests.size(), 1u);
}

TEST(Generate, AllTransportFailuresPropagate) {
  const auto b = build_prompt(S::Icebreaker, SessionRecord{}, std::monostate{});
  ThrowingBackend down;
  try {
    generate(b, down);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BackendUnavailable);
  }
  EXPECT_EQ(down.calls, 3);
}

TEST(ScriptedBackend, LookupOrderAndArrays) {
  ScriptedBackend b(nlohmann::json{{"Icebreaker/1", "exact"},
                                   {"Icebreaker/turn2", "alias"},
                                   {"Icebreaker/*", nlohmann::json::array({"a", "b"})},
                                   {"Interview1/*/keywords", "KEYWORDS: 寺"},
                                   {"*", "any"}});
  EXPECT_EQ(b.complete({"Icebreaker/1", "", ""}), "exact");
  EXPECT_EQ(b.complete({"Icebreaker/2", "", ""}), "alias");
  EXPECT_EQ(b.complete({"Icebreaker/3", "", ""}), "a");
  EXPECT_EQ(b.complete({"Icebreaker/4", "", ""}), "b");
  EXPECT_EQ(b.complete({"Icebreaker/5", "", ""}), "b");
  EXPECT_EQ(b.complete({"Interview1/5/keywords", "", ""}), "KEYWORDS: 寺");
  EXPECT_EQ(b.complete({"Closing/9", "", ""}), "any");
  EXPECT_EQ(b.calls().size(), 7u);
  ScriptedBackend empty(nlohmann::json::object());
  EXPECT_EQ(empty.complete({"Closing/1", "", ""}), "");
  EXPECT_THROW(ScriptedBackend(nlohmann::json::array()), Error);
  EXPECT_THROW(ScriptedBackend(nlohmann::json{{"k", 1}}), Error);
}

TEST(Keywords, ParseKeywords) {
  EXPECT_EQ(parse_keywords("KEYWORDS: 寺, 庭園、寺;苔 ， 紅葉, 桜, 神社"),
            (std::vector<std::string>{"寺", "庭園", "苔", "紅葉", "桜"}));
  EXPECT_FALSE(parse_keywords("KEYWORDS:   "));
  EXPECT_FALSE(parse_keywords("寺, 庭園"));
  EXPECT_FALSE(parse_keywords("KEYWORDS: a\nmore"));
}

TEST(Keywords, RuleBasedFallback) {
  EXPECT_EQ(rule_based_keywords({"静かなお寺が好き"}, res().lexicon, res().genres),
            (std::vector<std::string>{"寺"}));
  EXPECT_EQ(rule_based_keywords({"紅葉と庭を見たい", "神社も"}, res().lexicon, res().genres),
            (std::vector<std::string>{"紅葉", "庭園", "神社"}));
  // Nothing matches: the last utterance, capped at 20 code points.
  const auto k = rule_based_keywords({"あいうえおかきくけこさしすせそたちつてとなにぬねの"},
                                     res().lexicon, res().genres);
  ASSERT_EQ(k.size(), 1u);
  EXPECT_EQ(text::decode(k[0]).size(), 20u);
  EXPECT_THROW(rule_based_keywords({"  "}, res().lexicon, res().genres), Error);
}

TEST(Keywords, ExtractUsesBackendThenFallsBack) {
  auto s = interview_session();
  s.transcript.push_back({Speaker::System, "なるほど", 2001, S::Interview1});
  s.transcript.push_back({Speaker::User, "庭も見たい", 2100, S::Interview1});
  EXPECT_EQ(interview_user_turns(s, Slot::First),
            (std::vector<std::string>{"静かなお寺が好きです", "庭も見たい"}));

  SequenceBackend good({"KEYWORDS: 寺院, 庭園"});
  EXPECT_EQ(extract_keywords(s, Slot::First, good, res().lexicon, res().genres),
            (std::vector<std::string>{"寺院", "庭園"}));
  EXPECT_EQ(good.requests[0].key, "Interview1/3/keywords");

  SequenceBackend bad({"???"});
  EXPECT_EQ(extract_keywords(s, Slot::First, bad, res().lexicon, res().genres),
            (std::vector<std::string>{"寺", "庭園"}));

  ThrowingBackend down;
  EXPECT_THROW(extract_keywords(s, Slot::First, down, res().lexicon, res().genres), Error);
  try {
    extract_keywords(s, Slot::Second, good, res().lexicon, res().genres);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInterview);
  }
}

TEST(GenreList, Validation) {
  EXPECT_THROW(GenreList(std::vector<GenreEntry>{}), Error);
  EXPECT_THROW(GenreList({{"a", ""}, {"a", "x"}}), Error);
  EXPECT_EQ(res().genres.entries().size(), 19u);
}

}  // namespace
}  // namespace concierge
