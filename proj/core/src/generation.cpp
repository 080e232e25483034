#include "concierge/generation.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "concierge/error.hpp"
#include "concierge/text.hpp"

namespace concierge {

namespace {

using S = ScenarioState;
using A = DialogueAct;

// Prompt text. Authored for this project; it does not reproduce any published
// prompt verbatim.
constexpr std::string_view kRole =
    "あなたは京都の旅行代理店のカウンター担当者です。"
    "お客様が京都市内で訪れる観光地を2か所決めるお手伝いをします。"
    "丁寧で親しみやすい話し言葉で、1回の発話は3文以内にしてください。";

std::string_view slot_word(S state) {
  return slot_of(state) == Slot::Second ? "二つ目" : "一つ目";
}

std::string instructions_for(S state) {
  std::string out(kRole);
  out += "\n";
  switch (state) {
    case S::Icebreaker:
      out += "まずはユーモアを交えた雑談でお客様の緊張をほぐしてください。"
             "雑談が一段落したら ChatDone、雑談を続けるなら ChatContinue を出力してください。";
      break;
    case S::Interview1:
    case S::Interview2:
      out += std::string(slot_word(state)) +
             "の観光地についてお客様の希望を聞き出してください。"
             "ジャンル一覧を参考に、興味のあるジャンルや雰囲気を具体的に質問してください。"
             "希望が十分に集まったら RequirementsComplete、さらに質問するなら AskMore "
             "を出力してください。";
      break;
    case S::ResearchInterview1:
    case S::ResearchInterview2:
      out += "ご提案した3か所はいずれもお気に召しませんでした。" +
             std::string(slot_word(state)) +
             "の観光地について、どこが合わなかったのかと新しい希望を聞き直してください。"
             "希望が集まったら RequirementsComplete、さらに質問するなら AskMore "
             "を出力してください。";
      break;
    case S::Introduction1:
    case S::Introduction2:
      out += "検索で見つかった観光地をモニターの画像とともに紹介し、"
             "それぞれのおすすめ理由を一言ずつ述べてください。"
             "紹介し終えたら IntroDelivered を出力してください。";
      break;
    case S::Recommendation1:
    case S::Recommendation2:
      out += "観光地情報だけを根拠にお客様へおすすめし、" + std::string(slot_word(state)) +
             "に訪れる観光地を決めてください。";
      if (state == S::Recommendation2) {
        out += "一つ目の観光地からの距離も伝えてください。";
      }
      out += "お客様が1か所に決めたら SpotAccepted、3か所とも気に入らなければ "
             "AllSpotsRejected、質問に答えるなど相談を続けるなら SpotDiscuss "
             "を出力してください。";
      break;
    case S::Closing:
      out += "決まった2か所の観光プランを読み上げて確認してください。"
             "お客様が了承したら PlanConfirmed、確認せずに別れの挨拶をされたら Farewell "
             "を出力してください。";
      break;
    case S::End:
      out += "対話は終了しています。";
      break;
  }
  return out;
}

std::string flow_for(S state) {
  std::string out =
      "1. 雑談 2. 一つ目の観光地の希望を聞く 3. 候補を3か所紹介する "
      "4. おすすめして一つ目を決める(全て断られたら希望を聞き直して再検索) "
      "5. 二つ目について2〜4を繰り返す 6. プランを確認して終了。";
  out += "\n現在の段階: ";
  out += to_string(state);
  return out;
}

std::vector<FewShotExample> examples_for(S state) {
  switch (state) {
    case S::Icebreaker:
      return {{"こんにちは。", "こんにちは、ようこそ。今日は京都日和ですね。私も観光したいくらいです。",
               A::ChatContinue},
              {"そうですね、楽しみです。", "それでは早速、行きたい場所のお話を伺いましょう。",
               A::ChatDone}};
    case S::Interview1:
    case S::Interview2:
    case S::ResearchInterview1:
    case S::ResearchInterview2:
      return {{"お寺が好きです。", "お寺ですね。庭園をゆっくり眺めるのと、建物を見るのとどちらがお好きですか？",
               A::AskMore},
              {"庭園を眺めたいです。", "ありがとうございます。ご希望に合う場所をお探ししますね。",
               A::RequirementsComplete}};
    case S::Introduction1:
    case S::Introduction2:
      return {{"お願いします。", "モニターをご覧ください。3か所ご紹介します。どれも庭園が見事なお寺です。",
               A::IntroDelivered}};
    case S::Recommendation1:
    case S::Recommendation2:
      return {{"一番静かなのはどこですか？", "落ち着いて過ごすなら石庭のあるお寺がおすすめです。",
               A::SpotDiscuss},
              {"そこにします。", "かしこまりました。そちらに決めましょう。", A::SpotAccepted},
              {"どれもピンとこないです。", "承知しました。もう少しご希望を伺わせてください。",
               A::AllSpotsRejected}};
    case S::Closing:
      return {{"はい、それでお願いします。", "ありがとうございます。素敵な旅をお楽しみください。",
               A::PlanConfirmed}};
    case S::End:
      return {};
  }
  return {};
}

std::string strip_breaks(std::string_view reading) {
  std::string out;
  for (char c : reading) {
    if (c != '|') out.push_back(c);
  }
  return out;
}

std::string first_sentence(std::string_view description) {
  const std::string_view stop = "。";
  auto pos = description.find(stop);
  if (pos == std::string_view::npos) return std::string(text::trim(description));
  return std::string(description.substr(0, pos + stop.size()));
}

std::string format_km(double km) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", km);
  return buf;
}

nlohmann::ordered_json entry_json(const TranscriptEntry& e) {
  nlohmann::ordered_json j;
  j["speaker"] = to_string(e.speaker);
  j["text"] = e.text;
  j["timestamp_ms"] = e.timestamp_ms;
  j["state"] = to_string(e.state);
  return j;
}

std::string act_list(S state) {
  std::string out;
  for (auto a : accepted_acts(state)) {
    if (!out.empty()) out += " | ";
    out += to_string(a);
  }
  return out;
}

bool starts_with(std::string_view s, std::string_view prefix) {
  return s.substr(0, prefix.size()) == prefix;
}

std::string_view after_prefix(std::string_view line, std::string_view prefix) {
  return text::trim(line.substr(prefix.size()));
}

// Index of the next non-blank line at or after i.
std::size_t next_content(const std::vector<std::string_view>& ls, std::size_t i) {
  while (i < ls.size() && text::trim(ls[i]).empty()) ++i;
  return i;
}

}  // namespace

GenreList::GenreList(std::vector<GenreEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw Error(ErrorCode::SchemaError, "genre list is empty");
  std::set<std::string> names;
  for (const auto& e : entries_) {
    if (text::trim(e.name).empty()) {
      throw Error(ErrorCode::SchemaError, "genre name is empty");
    }
    if (!names.insert(e.name).second) {
      throw Error(ErrorCode::SchemaError, "duplicate genre '" + e.name + "'");
    }
  }
}

GenreList load_genre_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read genres " + path.string());
  try {
    auto doc = nlohmann::json::parse(in);
    std::vector<GenreEntry> entries;
    for (const auto& row : doc) {
      entries.push_back({row.at("name").get<std::string>(),
                         row.value("detail", std::string{})});
    }
    return GenreList(std::move(entries));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

SpotDigest make_spot_digest(const SessionRecord& session, Slot slot) {
  SpotDigest digest;
  for (const auto& spot : session.candidates_for(slot)) {
    SpotDigestRow row;
    row.spot_id = spot.id;
    row.name = spot.name;
    row.reading = strip_breaks(spot.reading);
    row.reason = first_sentence(spot.description);
    for (std::size_t i = 0; i < spot.genres.size() && i < 3; ++i) {
      row.top_genres.push_back(spot.genres[i]);
    }
    if (slot == Slot::Second && session.first_choice) {
      row.distance_from_first_km = distance(*session.first_choice, spot);
    }
    digest.rows.push_back(std::move(row));
    if (digest.rows.size() == kMaxCandidates) break;
  }
  return digest;
}

PromptBundle build_prompt(ScenarioState state, const SessionRecord& session,
                          CatalogView catalog_view, const PromptOptions& options) {
  const bool wants_genres = is_interview(state);
  const bool wants_digest = shows_spots(state);
  const bool has_genres = std::holds_alternative<GenreList>(catalog_view);
  const bool has_digest = std::holds_alternative<SpotDigest>(catalog_view);
  if (wants_genres != has_genres || wants_digest != has_digest) {
    throw Error(ErrorCode::MismatchedAuxiliary,
                std::string(to_string(state)) + " expects " +
                    (wants_genres ? "a genre list" : wants_digest ? "a spot digest" : "no auxiliary"));
  }
  if (has_digest && std::get<SpotDigest>(catalog_view).rows.size() > kMaxCandidates) {
    throw Error(ErrorCode::MismatchedAuxiliary, "spot digest has more than 3 rows");
  }

  PromptBundle b;
  b.state = state;
  b.turn_index = session.user_turn_count();
  b.instructions = instructions_for(state);
  b.flow_description = flow_for(state);
  b.few_shot_examples = examples_for(state);
  const auto& tr = session.transcript;
  const auto keep = std::min(options.context_turns, tr.size());
  b.context_window.assign(tr.end() - static_cast<std::ptrdiff_t>(keep), tr.end());
  b.auxiliary = std::move(catalog_view);
  return b;
}

std::string serialize(const PromptBundle& b) {
  nlohmann::ordered_json j;
  j["state"] = to_string(b.state);
  j["turn_index"] = b.turn_index;
  j["instructions"] = b.instructions;
  j["flow_description"] = b.flow_description;
  auto shots = nlohmann::ordered_json::array();
  for (const auto& ex : b.few_shot_examples) {
    nlohmann::ordered_json e;
    e["user"] = ex.user_text;
    e["system"] = ex.system_text;
    e["act"] = to_string(ex.act);
    shots.push_back(std::move(e));
  }
  j["few_shot_examples"] = std::move(shots);
  auto ctx = nlohmann::ordered_json::array();
  for (const auto& e : b.context_window) ctx.push_back(entry_json(e));
  j["context_window"] = std::move(ctx);

  if (const auto* genres = std::get_if<GenreList>(&b.auxiliary)) {
    nlohmann::ordered_json aux;
    aux["kind"] = "genre_list";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& g : genres->entries()) {
      nlohmann::ordered_json r;
      r["name"] = g.name;
      r["detail"] = g.detail;
      rows.push_back(std::move(r));
    }
    aux["entries"] = std::move(rows);
    j["auxiliary"] = std::move(aux);
  } else if (const auto* digest = std::get_if<SpotDigest>(&b.auxiliary)) {
    nlohmann::ordered_json aux;
    aux["kind"] = "spot_digest";
    auto rows = nlohmann::ordered_json::array();
    for (const auto& d : digest->rows) {
      nlohmann::ordered_json r;
      r["spot_id"] = d.spot_id;
      r["name"] = d.name;
      r["reading"] = d.reading;
      r["reason"] = d.reason;
      r["top_genres"] = d.top_genres;
      if (d.distance_from_first_km) r["distance_from_first_km"] = *d.distance_from_first_km;
      rows.push_back(std::move(r));
    }
    aux["rows"] = std::move(rows);
    j["auxiliary"] = std::move(aux);
  } else {
    j["auxiliary"] = nullptr;
  }
  return j.dump(2);
}

BackendRequest to_request(const PromptBundle& b) {
  std::ostringstream sys;
  sys << "# 指示\n" << b.instructions << "\n\n# 対話の流れ\n" << b.flow_description << "\n";
  if (const auto* genres = std::get_if<GenreList>(&b.auxiliary)) {
    sys << "\n# ジャンル一覧\n";
    for (const auto& g : genres->entries()) sys << "- " << g.name << ": " << g.detail << "\n";
  } else if (const auto* digest = std::get_if<SpotDigest>(&b.auxiliary)) {
    sys << "\n# 観光地情報\n";
    for (const auto& d : digest->rows) {
      sys << "- " << d.name << "（" << d.reading << "）: " << d.reason << " ジャンル: ";
      for (std::size_t i = 0; i < d.top_genres.size(); ++i) {
        sys << (i ? "、" : "") << d.top_genres[i];
      }
      if (d.distance_from_first_km) {
        sys << " 一つ目の観光地からの距離: " << format_km(*d.distance_from_first_km) << " km";
      }
      sys << "\n";
    }
  }
  if (!b.few_shot_examples.empty()) {
    sys << "\n# 対話例\n";
    for (const auto& ex : b.few_shot_examples) {
      sys << "ユーザ: " << ex.user_text << "\nRESPONSE: " << ex.system_text
          << "\nACT: " << to_string(ex.act) << "\n\n";
    }
  }
  sys << "\n# 出力形式\nRESPONSE: <お客様への応答>\nACT: <" << act_list(b.state) << ">\n";

  std::ostringstream user;
  for (const auto& e : b.context_window) {
    user << (e.speaker == Speaker::User ? "ユーザ: " : "システム: ") << e.text << "\n";
  }
  return {std::string(to_string(b.state)) + "/" + std::to_string(b.turn_index), sys.str(),
          user.str()};
}

ParseResult parse_output(std::string_view raw, ScenarioState state) noexcept {
  try {
    if (!text::is_valid_utf8(raw)) return ParseFailure{"output is not valid UTF-8"};
    const auto ls = text::lines(raw);
    auto i = next_content(ls, 0);
    if (i == ls.size()) return ParseFailure{"empty output"};
    if (!starts_with(ls[i], "RESPONSE:")) return ParseFailure{"missing RESPONSE line"};
    const auto response = after_prefix(ls[i], "RESPONSE:");
    if (response.empty()) return ParseFailure{"empty response text"};
    i = next_content(ls, i + 1);
    if (i == ls.size() || !starts_with(ls[i], "ACT:")) {
      return ParseFailure{"missing ACT line"};
    }
    const auto label = after_prefix(ls[i], "ACT:");
    const auto act = parse_act(label);
    if (!act) return ParseFailure{"unknown act label '" + std::string(label) + "'"};
    if (!accepts(state, *act)) {
      return ParseFailure{std::string(label) + " not accepted in " +
                          std::string(to_string(state))};
    }
    if (next_content(ls, i + 1) != ls.size()) {
      return ParseFailure{"trailing content after ACT line"};
    }
    return GenerationOutput{std::string(response), *act, false, 1};
  } catch (...) {
    return ParseFailure{"internal parse error"};
  }
}

std::optional<DialogueAct> fallback_act(ScenarioState state) noexcept {
  switch (state) {
    case S::Icebreaker: return A::ChatDone;
    case S::Interview1:
    case S::ResearchInterview1:
    case S::Interview2:
    case S::ResearchInterview2: return A::AskMore;
    case S::Introduction1:
    case S::Introduction2: return A::IntroDelivered;
    case S::Recommendation1:
    case S::Recommendation2: return A::SpotDiscuss;
    case S::Closing: return A::PlanConfirmed;
    case S::End: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view fallback_response(ScenarioState state) noexcept {
  switch (state) {
    case S::Icebreaker:
      return "失礼しました。それでは、行きたい観光地のお話を伺ってもよろしいですか？";
    case S::Interview1:
    case S::ResearchInterview1:
    case S::Interview2:
    case S::ResearchInterview2:
      return "すみません、もう一度教えていただけますか？どんな場所に行ってみたいですか？";
    case S::Introduction1:
    case S::Introduction2:
      return "モニターに候補の観光地を表示しました。どうぞご覧ください。";
    case S::Recommendation1:
    case S::Recommendation2:
      return "失礼しました。気になる観光地はありましたか？";
    case S::Closing:
      return "こちらのプランで決定とさせていただきます。ありがとうございました。";
    case S::End:
      return "";
  }
  return "";
}

GenerationOutput generate(const PromptBundle& bundle, GenerationBackend& backend,
                          const GenerateOptions& options) {
  const auto fallback = fallback_act(bundle.state);
  if (!fallback) {
    throw Error(ErrorCode::InvalidAct,
                "no generation in " + std::string(to_string(bundle.state)));
  }
  const auto request = to_request(bundle);
  const int attempts = 1 + std::max(0, options.retries);
  int transport_failures = 0;
  std::string last_transport_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    std::string raw;
    try {
      raw = backend.complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable) throw;
      ++transport_failures;
      last_transport_error = e.what();
      continue;
    }
    auto parsed = parse_output(raw, bundle.state);
    if (auto* out = std::get_if<GenerationOutput>(&parsed)) {
      out->attempts = attempt;
      return std::move(*out);
    }
  }
  if (transport_failures == attempts) {
    throw Error(ErrorCode::BackendUnavailable, last_transport_error);
  }
  return GenerationOutput{std::string(fallback_response(bundle.state)), *fallback, true,
                          attempts};
}

KeywordLexicon load_keyword_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read lexicon " + path.string());
  try {
    auto doc = nlohmann::json::parse(in);
    KeywordLexicon lex;
    for (const auto& row : doc.at("entries")) {
      LexiconEntry e{row.at("surface").get<std::string>(), row.at("keyword").get<std::string>()};
      if (text::trim(e.surface).empty() || text::trim(e.keyword).empty()) {
        throw Error(ErrorCode::SchemaError, path.string() + ": empty lexicon entry");
      }
      lex.entries.push_back(std::move(e));
    }
    return lex;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

std::vector<std::string> interview_user_turns(const SessionRecord& session, Slot slot) {
  auto in_phase = [&](const TranscriptEntry& e) {
    return is_interview(e.state) && slot_of(e.state) == slot;
  };
  const auto& tr = session.transcript;
  auto it = tr.rbegin();
  while (it != tr.rend() && !in_phase(*it)) ++it;
  std::vector<std::string> out;
  for (; it != tr.rend() && in_phase(*it); ++it) {
    if (it->speaker == Speaker::User) out.push_back(it->text);
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<std::string> rule_based_keywords(const std::vector<std::string>& texts,
                                             const KeywordLexicon& lexicon,
                                             const GenreList& genres) {
  struct Pattern {
    std::u32string surface;
    std::string keyword;
  };
  std::vector<Pattern> patterns;
  for (const auto& e : lexicon.entries) {
    patterns.push_back({text::normalize(text::decode(e.surface)), e.keyword});
  }
  for (const auto& g : genres.entries()) {
    patterns.push_back({text::normalize(text::decode(g.name)), g.name});
  }
  std::erase_if(patterns, [](const Pattern& p) { return p.surface.empty(); });

  std::vector<std::string> out;
  for (const auto& t : texts) {
    const auto s = text::normalize(text::decode(t));
    std::size_t i = 0;
    while (i < s.size() && out.size() < kMaxKeywords) {
      const Pattern* best = nullptr;
      for (const auto& p : patterns) {
        if (p.surface.size() > s.size() - i) continue;
        if (s.compare(i, p.surface.size(), p.surface) != 0) continue;
        if (!best || p.surface.size() > best->surface.size()) best = &p;
      }
      if (!best) {
        ++i;
        continue;
      }
      if (std::find(out.begin(), out.end(), best->keyword) == out.end()) {
        out.push_back(best->keyword);
      }
      i += best->surface.size();
    }
  }
  if (out.empty()) {
    for (auto it = texts.rbegin(); it != texts.rend(); ++it) {
      const auto decoded = text::decode(*it);
      auto cps = text::trim(std::u32string_view(decoded));
      if (cps.empty()) continue;
      out.push_back(text::encode(cps.substr(0, 20)));
      break;
    }
  }
  if (out.empty()) throw Error(ErrorCode::EmptyInterview, "no usable interview text");
  return out;
}

std::optional<std::vector<std::string>> parse_keywords(std::string_view raw) noexcept {
  try {
    if (!text::is_valid_utf8(raw)) return std::nullopt;
    const auto ls = text::lines(raw);
    auto i = next_content(ls, 0);
    if (i == ls.size() || !starts_with(ls[i], "KEYWORDS:")) return std::nullopt;
    if (next_content(ls, i + 1) != ls.size()) return std::nullopt;
    std::vector<std::string> out;
    for (auto& k : text::split_list(after_prefix(ls[i], "KEYWORDS:"))) {
      if (std::find(out.begin(), out.end(), k) != out.end()) continue;
      out.push_back(std::move(k));
      if (out.size() == kMaxKeywords) break;
    }
    if (out.empty()) return std::nullopt;
    return out;
  } catch (...) {
    return std::nullopt;
  }
}

std::vector<std::string> extract_keywords(const SessionRecord& session, Slot slot,
                                          GenerationBackend& backend,
                                          const KeywordLexicon& lexicon,
                                          const GenreList& genres,
                                          const GenerateOptions& options) {
  const auto turns = interview_user_turns(session, slot);
  if (turns.empty()) {
    throw Error(ErrorCode::EmptyInterview,
                "no user turns in the " + std::string(to_string(slot)) + "-slot interview");
  }
  // Key the request by the state of the last interview turn.
  ScenarioState phase = slot == Slot::First ? S::Interview1 : S::Interview2;
  for (auto it = session.transcript.rbegin(); it != session.transcript.rend(); ++it) {
    if (is_interview(it->state) && slot_of(it->state) == slot) {
      phase = it->state;
      break;
    }
  }

  std::ostringstream sys;
  sys << "# 指示\n以下のインタビューから、観光地検索に使うキーワードを1〜5個抽出してください。"
         "ジャンル一覧の名前を優先してください。\n\n# ジャンル一覧\n";
  for (const auto& g : genres.entries()) sys << "- " << g.name << ": " << g.detail << "\n";
  sys << "\n# 出力形式\nKEYWORDS: <キーワード1>, <キーワード2>\n";
  std::ostringstream user;
  for (const auto& t : turns) user << "ユーザ: " << t << "\n";
  const BackendRequest request{std::string(to_string(phase)) + "/" +
                                   std::to_string(session.user_turn_count()) + "/keywords",
                               sys.str(), user.str()};

  const int attempts = 1 + std::max(0, options.retries);
  int transport_failures = 0;
  std::string last_transport_error;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    std::string raw;
    try {
      raw = backend.complete(request);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::BackendUnavailable) throw;
      ++transport_failures;
      last_transport_error = e.what();
      continue;
    }
    if (auto kws = parse_keywords(raw)) return *kws;
  }
  if (transport_failures == attempts) {
    throw Error(ErrorCode::BackendUnavailable, last_transport_error);
  }
  return rule_based_keywords(turns, lexicon, genres);
}

}  // namespace concierge
