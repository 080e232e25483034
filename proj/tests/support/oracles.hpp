#pragma once

// Independent reference implementations used as test oracles.

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "concierge/spot_catalog.hpp"
#include "concierge/text.hpp"

namespace concierge::test {

/// Distances from tests/oracles/distance_oracle.py (spherical Vincenty
/// formula, R = 6371.0088 km), frozen.
struct DistanceFixture {
  const char* a;
  const char* b;
  double km;
};
inline constexpr DistanceFixture kDistanceFixtures[] = {
    {"kinkakuji", "kiyomizudera", 7.092693},
    {"arashiyama_bamboo", "fushimi_inari", 10.775399},
    {"ginkakuji", "nanzenji", 1.787168},
    {"kibune_jinja", "daigoji", 19.654965},
    {"kyoto_tower", "toji", 1.298584},
};
/// Largest pairwise distance in the shipped catalog (daigoji-kibune_jinja).
inline constexpr double kCatalogMaxPairKm = 19.654965;

/// Scores every spot by scanning its fields directly (no index).
inline std::vector<SearchHit> brute_force_ranked(const std::vector<Spot>& spots,
                                                 const SearchQuery& q) {
  std::vector<std::string> keys;
  for (const auto& k : q.keywords) {
    auto n = text::normalize(k);
    if (!n.empty() && std::find(keys.begin(), keys.end(), n) == keys.end()) keys.push_back(n);
  }
  std::vector<SearchHit> hits;
  for (const auto& s : spots) {
    if (q.exclude_ids.count(s.id)) continue;
    const auto name = text::normalize(s.name);
    std::vector<std::string> genres;
    for (const auto& g : s.genres) genres.push_back(text::normalize(g));
    std::vector<std::string> tokens;
    for (const auto& t : text::tokenize(text::normalize(text::decode(s.description)))) {
      tokens.push_back(text::encode(t));
    }
    auto contains = [](const std::string& hay, const std::string& needle) {
      return hay.find(needle) != std::string::npos;
    };
    int score = 0;
    for (const auto& k : keys) {
      if (contains(name, k)) score += 3;
      if (std::any_of(genres.begin(), genres.end(), [&](auto& g) { return contains(g, k); })) {
        score += 2;
      }
      if (std::any_of(tokens.begin(), tokens.end(), [&](auto& t) { return contains(t, k); })) {
        score += 1;
      }
    }
    if (score > 0) hits.push_back({s.id, score});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.score != b.score ? a.score > b.score : a.id < b.id;
  });
  return hits;
}

/// Random query built from catalog substrings, full-width variants and junk.
inline SearchQuery random_query(const std::vector<Spot>& spots, std::mt19937_64& rng) {
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  auto substring = [&](const std::string& s) {
    const auto u = text::decode(s);
    if (u.empty()) return std::string();
    const auto a = pick(u.size());
    const auto len = 1 + pick(std::min<std::size_t>(4, u.size() - a));
    return text::encode(std::u32string_view(u).substr(a, len));
  };
  static const std::vector<std::string> junk = {"ＧＡＲＤＥＮ", "  寺 ", "xyz", "庭園", "神社",
                                                "Kyoto", "ｋｙｏｔｏ", "", "の", "禅"};
  SearchQuery q;
  const auto n = 1 + pick(4);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& s = spots[pick(spots.size())];
    switch (pick(4)) {
      case 0: q.keywords.push_back(substring(s.name)); break;
      case 1: q.keywords.push_back(substring(s.genres[pick(s.genres.size())])); break;
      case 2: q.keywords.push_back(substring(s.description)); break;
      default: q.keywords.push_back(junk[pick(junk.size())]); break;
    }
  }
  const auto excl = pick(4);
  for (std::size_t i = 0; i < excl; ++i) q.exclude_ids.insert(spots[pick(spots.size())].id);
  return q;
}

}  // namespace concierge::test
