#include "concierge/speech_markup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "concierge/error.hpp"
#include "concierge/text.hpp"

namespace concierge {

namespace {

// Sentence-final patterns that make a sentence a question even without a
// question mark.
constexpr std::array<std::u32string_view, 9> kInterrogativeEndings = {
    U"ですか", U"ますか", U"でしょうか", U"ませんか", U"だろうか",
    U"ようか", U"のか",   U"かな",       U"かしら"};

bool is_sentence_break(char32_t cp) {
  return cp == U'。' || cp == U'？' || cp == U'！' || cp == U'?' || cp == U'!' ||
         cp == U'\n';
}

bool is_question(std::u32string_view sentence) {
  sentence = text::trim(sentence);
  if (sentence.empty()) return false;
  if (sentence.back() == U'？' || sentence.back() == U'?') return true;
  while (!sentence.empty() &&
         (sentence.back() == U'。' || sentence.back() == U'！' || sentence.back() == U'!' ||
          sentence.back() == U'…' || text::is_space(sentence.back()))) {
    sentence.remove_suffix(1);
  }
  for (auto ending : kInterrogativeEndings) {
    if (sentence.size() >= ending.size() &&
        sentence.substr(sentence.size() - ending.size()) == ending) {
      return true;
    }
  }
  return false;
}

struct Match {
  std::size_t start;
  std::size_t end;
  EmphasisCategory category;
  std::optional<std::string> phonetic;
};

int priority(EmphasisCategory c) {
  switch (c) {
    case EmphasisCategory::SpotName: return 0;
    case EmphasisCategory::PersonName: return 1;
    case EmphasisCategory::Question: return 2;
  }
  return 3;
}

void find_all(std::u32string_view hay, std::u32string_view needle, EmphasisCategory cat,
              const std::optional<std::string>& phonetic, std::vector<Match>& out) {
  if (needle.empty()) return;
  for (auto pos = hay.find(needle); pos != std::u32string_view::npos;
       pos = hay.find(needle, pos + 1)) {
    out.push_back({pos, pos + needle.size(), cat, phonetic});
  }
}

void append_escaped(std::string& out, std::string_view s, bool attribute) {
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"':
        if (attribute) {
          out += "&quot;";
        } else {
          out += c;
        }
        break;
      default: out += c;
    }
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

int level_for(EmphasisCategory c, const EmphasisProfile& p) {
  switch (c) {
    case EmphasisCategory::SpotName: return p.spot_level;
    case EmphasisCategory::PersonName: return p.person_level;
    case EmphasisCategory::Question: return p.question_level;
  }
  return 1;
}

}  // namespace

std::string_view to_string(EmphasisCategory c) noexcept {
  switch (c) {
    case EmphasisCategory::SpotName: return "spot_name";
    case EmphasisCategory::PersonName: return "person_name";
    case EmphasisCategory::Question: return "question";
  }
  return "?";
}

EmphasisProfile EmphasisProfile::defaults() {
  EmphasisProfile p;
  p.levels[0] = {0.5, 0.95, 50, 50};
  p.levels[1] = {1.0, 0.9, 100, 100};
  p.levels[2] = {2.0, 0.85, 150, 150};
  return p;
}

std::vector<std::string> validate_profile(const nlohmann::json& doc) {
  std::vector<std::string> out;
  if (!doc.is_object()) return {"profile must be a JSON object"};
  for (const char* level : {"1", "2", "3"}) {
    if (!doc.contains(level) || !doc[level].is_object()) {
      out.push_back(std::string("level ") + level + ": missing");
      continue;
    }
    const auto& l = doc[level];
    for (const char* key : {"volume_delta", "rate_factor", "pause_before_ms", "pause_after_ms"}) {
      if (!l.contains(key) || !l[key].is_number()) {
        out.push_back(std::string("level ") + level + ": '" + key + "' missing or non-numeric");
      }
    }
    if (l.contains("rate_factor") && l["rate_factor"].is_number() &&
        l["rate_factor"].get<double>() <= 0.0) {
      out.push_back(std::string("level ") + level + ": rate_factor must be positive");
    }
    for (const char* key : {"pause_before_ms", "pause_after_ms"}) {
      if (l.contains(key) && l[key].is_number() && l[key].get<double>() < 0) {
        out.push_back(std::string("level ") + level + ": '" + key + "' must be >= 0");
      }
    }
  }
  if (doc.contains("categories")) {
    const auto& c = doc["categories"];
    for (const char* key : {"spot_name", "person_name", "question"}) {
      if (c.contains(key) && (!c[key].is_number_integer() || c[key].get<int>() < 1 ||
                              c[key].get<int>() > 3)) {
        out.push_back(std::string("categories: '") + key + "' must be 1, 2 or 3");
      }
    }
  }
  return out;
}

EmphasisProfile EmphasisProfile::from_json(const nlohmann::json& doc) {
  auto problems = validate_profile(doc);
  if (!problems.empty()) {
    std::string msg;
    for (const auto& p : problems) msg += (msg.empty() ? "" : "; ") + p;
    throw Error(ErrorCode::SchemaError, msg);
  }
  EmphasisProfile p;
  for (int level = 1; level <= 3; ++level) {
    const auto& l = doc[std::to_string(level)];
    p.levels[level - 1] = {l["volume_delta"].get<double>(), l["rate_factor"].get<double>(),
                           static_cast<int>(l["pause_before_ms"].get<double>()),
                           static_cast<int>(l["pause_after_ms"].get<double>())};
  }
  if (doc.contains("categories")) {
    const auto& c = doc["categories"];
    p.spot_level = c.value("spot_name", p.spot_level);
    p.person_level = c.value("person_name", p.person_level);
    p.question_level = c.value("question", p.question_level);
  }
  return p;
}

EmphasisProfile load_emphasis_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read profile " + path.string());
  try {
    return EmphasisProfile::from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
}

SpeechMarkup annotate(std::string_view utterance, const std::vector<Spot>& known_spots,
                      const std::vector<std::string>& person_lexicon,
                      const EmphasisProfile& profile) {
  SpeechMarkup out;
  out.plain_text = std::string(utterance);
  const auto u = text::decode(utterance);
  if (u.empty()) return out;

  std::vector<Match> names;
  for (const auto& spot : known_spots) {
    find_all(u, text::decode(spot.name), EmphasisCategory::SpotName, spot.reading, names);
  }
  for (const auto& person : person_lexicon) {
    find_all(u, text::decode(person), EmphasisCategory::PersonName, std::nullopt, names);
  }
  std::sort(names.begin(), names.end(), [](const Match& a, const Match& b) {
    const auto la = a.end - a.start, lb = b.end - b.start;
    if (la != lb) return la > lb;
    if (a.category != b.category) return priority(a.category) < priority(b.category);
    return a.start < b.start;
  });
  std::vector<Match> kept;
  for (auto& m : names) {
    const bool clash = std::any_of(kept.begin(), kept.end(), [&](const Match& k) {
      return m.start < k.end && k.start < m.end;
    });
    if (!clash) kept.push_back(std::move(m));
  }
  std::sort(kept.begin(), kept.end(),
            [](const Match& a, const Match& b) { return a.start < b.start; });

  // Question sentences, minus the name spans inside them.
  std::vector<Match> questions;
  std::size_t begin = 0;
  for (std::size_t i = 0; i <= u.size(); ++i) {
    const bool at_end = i == u.size();
    if (!at_end && !is_sentence_break(u[i])) continue;
    std::size_t end = at_end ? i : i + 1;
    std::u32string_view sentence(u.data() + begin, end - begin);
    if (is_question(sentence)) {
      std::size_t cursor = begin;
      auto emit = [&](std::size_t a, std::size_t b) {
        while (a < b && text::is_space(u[a])) ++a;
        while (b > a && text::is_space(u[b - 1])) --b;
        if (a < b) questions.push_back({a, b, EmphasisCategory::Question, std::nullopt});
      };
      for (const auto& k : kept) {
        if (k.end <= begin || k.start >= end) continue;
        emit(cursor, std::max(cursor, k.start));
        cursor = std::max(cursor, k.end);
      }
      emit(cursor, end);
    }
    begin = end;
  }

  kept.insert(kept.end(), questions.begin(), questions.end());
  std::sort(kept.begin(), kept.end(),
            [](const Match& a, const Match& b) { return a.start < b.start; });
  for (auto& m : kept) {
    EmphasisSpan span;
    span.start = m.start;
    span.end = m.end;
    span.category = m.category;
    span.level = level_for(m.category, profile);
    const auto& pros = profile.at(span.level);
    span.volume_delta = pros.volume_delta;
    span.rate_factor = pros.rate_factor;
    span.pause_before_ms = pros.pause_before_ms;
    span.pause_after_ms = pros.pause_after_ms;
    span.phonetic = std::move(m.phonetic);
    out.spans.push_back(std::move(span));
  }
  return out;
}

std::string render(const SpeechMarkup& markup, const EmphasisProfile& profile) {
  const auto u = text::decode(markup.plain_text);
  std::string doc = "<speak>";
  std::size_t cursor = 0;
  for (const auto& span : markup.spans) {
    const auto start = std::min(span.start, u.size());
    const auto end = std::min(span.end, u.size());
    if (start < cursor || start >= end) continue;
    append_escaped(doc, text::encode(std::u32string_view(u).substr(cursor, start - cursor)),
                   false);
    const auto& pros = profile.at(span.level);
    if (pros.pause_before_ms > 0) {
      doc += "<break time=\"" + std::to_string(pros.pause_before_ms) + "ms\"/>";
    }
    doc += "<prosody volume=\"";
    doc += pros.volume_delta < 0 ? "-" : "+";
    doc += format_number(std::fabs(pros.volume_delta)) + "dB\" rate=\"" +
           format_number(std::round(pros.rate_factor * 100.0)) + "%\">";
    const auto content = text::encode(std::u32string_view(u).substr(start, end - start));
    if (span.phonetic) {
      std::string alias = *span.phonetic;
      std::replace(alias.begin(), alias.end(), '|', ' ');
      doc += "<sub alias=\"";
      append_escaped(doc, alias, true);
      doc += "\">";
      append_escaped(doc, content, false);
      doc += "</sub>";
    } else {
      append_escaped(doc, content, false);
    }
    doc += "</prosody>";
    if (pros.pause_after_ms > 0) {
      doc += "<break time=\"" + std::to_string(pros.pause_after_ms) + "ms\"/>";
    }
    cursor = end;
  }
  append_escaped(doc, text::encode(std::u32string_view(u).substr(cursor)), false);
  doc += "</speak>";
  return doc;
}

std::string strip_markup(std::string_view document) {
  std::string out;
  out.reserve(document.size());
  for (std::size_t i = 0; i < document.size();) {
    const char c = document[i];
    if (c == '<') {
      auto close = document.find('>', i);
      if (close == std::string_view::npos) break;
      i = close + 1;
    } else if (c == '&') {
      static constexpr std::array<std::pair<std::string_view, char>, 5> kEntities = {{
          {"&amp;", '&'}, {"&lt;", '<'}, {"&gt;", '>'}, {"&quot;", '"'}, {"&apos;", '\''}}};
      bool matched = false;
      for (const auto& [entity, ch] : kEntities) {
        if (document.substr(i, entity.size()) == entity) {
          out.push_back(ch);
          i += entity.size();
          matched = true;
          break;
        }
      }
      if (!matched) {
        out.push_back(c);
        ++i;
      }
    } else {
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

}  // namespace concierge
