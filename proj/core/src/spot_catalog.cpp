#include "concierge/spot_catalog.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <unordered_set>

#include "concierge/error.hpp"
#include "concierge/text.hpp"

namespace concierge {

namespace {

constexpr std::uint8_t kNameField = 1;
constexpr std::uint8_t kGenreField = 2;
constexpr std::uint8_t kDescriptionField = 4;

void add_substrings(std::u32string_view s, std::uint8_t field,
                    std::map<std::string, std::uint8_t>& into) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::string piece;
    for (std::size_t j = i; j < s.size(); ++j) {
      piece += text::encode(s[j]);
      into[piece] |= field;
    }
  }
}

int score_of(std::uint8_t fields) {
  int score = 0;
  if (fields & kNameField) score += search_weight::kName;
  if (fields & kGenreField) score += search_weight::kGenre;
  if (fields & kDescriptionField) score += search_weight::kDescription;
  return score;
}

bool non_empty_string(const nlohmann::json& row, const char* key) {
  return row.contains(key) && row[key].is_string() &&
         !text::trim(row[key].get_ref<const std::string&>()).empty();
}

Spot spot_from_row(const nlohmann::json& row) {
  Spot s;
  s.id = row.at("id").get<std::string>();
  s.name = row.at("name").get<std::string>();
  s.reading = row.at("reading").get<std::string>();
  s.genres = row.at("genres").get<std::vector<std::string>>();
  s.description = row.value("description", std::string{});
  s.image_ref = row.value("image_ref", std::string{});
  s.lat = row.at("lat").get<double>();
  s.lon = row.at("lon").get<double>();
  return s;
}

nlohmann::json spot_to_row(const Spot& s) {
  return {{"id", s.id},           {"name", s.name},
          {"reading", s.reading}, {"genres", s.genres},
          {"description", s.description}, {"image_ref", s.image_ref},
          {"lat", s.lat},         {"lon", s.lon}};
}

std::string describe(const std::vector<SchemaFinding>& findings) {
  std::ostringstream os;
  for (std::size_t i = 0; i < findings.size(); ++i) {
    if (i) os << "; ";
    os << "row " << findings[i].row << " field '" << findings[i].field
       << "': " << findings[i].message;
  }
  return os.str();
}

}  // namespace

std::vector<SchemaFinding> validate_catalog(const nlohmann::json& doc) {
  std::vector<SchemaFinding> out;
  if (!doc.is_array()) {
    out.push_back({0, "", "catalog must be a JSON array of spot objects"});
    return out;
  }
  std::map<std::string, std::size_t> seen;
  for (std::size_t row = 0; row < doc.size(); ++row) {
    const auto& r = doc[row];
    if (!r.is_object()) {
      out.push_back({row, "", "row is not an object"});
      continue;
    }
    for (const char* key : {"id", "name", "reading"}) {
      if (!non_empty_string(r, key)) {
        out.push_back({row, key, "missing or empty string"});
      }
    }
    for (const char* key : {"description", "image_ref"}) {
      if (r.contains(key) && !r[key].is_string()) {
        out.push_back({row, key, "must be a string"});
      }
    }
    if (!r.contains("genres") || !r["genres"].is_array() || r["genres"].empty()) {
      out.push_back({row, "genres", "must be a non-empty array"});
    } else {
      for (const auto& g : r["genres"]) {
        if (!g.is_string() || text::trim(g.get_ref<const std::string&>()).empty()) {
          out.push_back({row, "genres", "genre names must be non-empty strings"});
          break;
        }
      }
    }
    auto check_coord = [&](const char* key, double bound) {
      if (!r.contains(key) || !r[key].is_number()) {
        out.push_back({row, key, "missing or non-numeric"});
        return;
      }
      const double v = r[key].get<double>();
      if (!std::isfinite(v) || v < -bound || v > bound) {
        std::ostringstream os;
        os << (std::string_view(key) == "lat" ? "latitude" : "longitude")
           << " out of range [-" << bound << ", " << bound << "]: " << v;
        out.push_back({row, key, os.str()});
      }
    };
    check_coord("lat", 90.0);
    check_coord("lon", 180.0);
    if (non_empty_string(r, "id")) {
      const auto& id = r["id"].get_ref<const std::string&>();
      auto [it, inserted] = seen.emplace(id, row);
      if (!inserted) {
        out.push_back({row, "id",
                       "duplicate id '" + id + "' (first seen in row " +
                           std::to_string(it->second) + ")"});
      }
    }
  }
  return out;
}

Catalog::Catalog(std::vector<Spot> spots) : spots_(std::move(spots)) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& s : spots_) doc.push_back(spot_to_row(s));
  auto findings = validate_catalog(doc);
  const bool only_duplicates =
      std::all_of(findings.begin(), findings.end(), [](const SchemaFinding& f) {
        return f.message.rfind("duplicate id", 0) == 0;
      });
  if (!findings.empty()) {
    throw Error(only_duplicates ? ErrorCode::DuplicateId : ErrorCode::SchemaError,
                describe(findings));
  }
  for (std::size_t i = 0; i < spots_.size(); ++i) by_id_.emplace(spots_[i].id, i);
  build_index();
}

Catalog Catalog::from_json(const nlohmann::json& doc) {
  auto findings = validate_catalog(doc);
  if (!findings.empty()) {
    const bool only_duplicates = std::all_of(
        findings.begin(), findings.end(), [](const SchemaFinding& f) {
          return f.message.rfind("duplicate id", 0) == 0;
        });
    throw Error(only_duplicates ? ErrorCode::DuplicateId : ErrorCode::SchemaError,
                describe(findings));
  }
  std::vector<Spot> spots;
  spots.reserve(doc.size());
  for (const auto& row : doc) spots.push_back(spot_from_row(row));
  return Catalog(std::move(spots));
}

void Catalog::build_index() {
  for (std::uint32_t i = 0; i < spots_.size(); ++i) {
    const auto& s = spots_[i];
    std::map<std::string, std::uint8_t> terms;
    add_substrings(text::normalize(text::decode(s.name)), kNameField, terms);
    for (const auto& g : s.genres) {
      add_substrings(text::normalize(text::decode(g)), kGenreField, terms);
    }
    for (const auto& tok : text::tokenize(text::normalize(text::decode(s.description)))) {
      add_substrings(tok, kDescriptionField, terms);
    }
    for (const auto& [term, fields] : terms) index_[term].push_back({i, fields});
  }
}

const Spot* Catalog::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &spots_[it->second];
}

const Spot& Catalog::at(std::string_view id) const {
  if (const Spot* s = find(id)) return *s;
  throw Error(ErrorCode::NotACandidate, "unknown spot id '" + std::string(id) + "'");
}

std::vector<SearchHit> Catalog::ranked(const SearchQuery& query) const {
  std::vector<std::string> keys;
  std::unordered_set<std::string> seen;
  for (const auto& kw : query.keywords) {
    auto norm = text::normalize(kw);
    if (norm.empty() || !seen.insert(norm).second) continue;
    keys.push_back(std::move(norm));
  }
  std::vector<int> scores(spots_.size(), 0);
  for (const auto& key : keys) {
    auto it = index_.find(key);
    if (it == index_.end()) continue;
    for (const auto& p : it->second) scores[p.spot] += score_of(p.fields);
  }
  std::vector<SearchHit> hits;
  for (std::size_t i = 0; i < spots_.size(); ++i) {
    if (scores[i] == 0 || query.exclude_ids.count(spots_[i].id)) continue;
    hits.push_back({spots_[i].id, scores[i]});
  }
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
  });
  return hits;
}

std::vector<Spot> Catalog::search(const SearchQuery& query) const {
  auto hits = ranked(query);
  std::vector<Spot> out;
  for (std::size_t i = 0; i < hits.size() && i < kMaxCandidates; ++i) {
    out.push_back(at(hits[i].id));
  }
  return out;
}

std::vector<std::string> Catalog::genres() const {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& s : spots_) {
    for (const auto& g : s.genres) {
      if (seen.insert(g).second) out.push_back(g);
    }
  }
  return out;
}

Catalog load_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::StorageError, "cannot read catalog " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::SchemaError, path.string() + ": " + e.what());
  }
  return Catalog::from_json(doc);
}

double haversine_km(double lat1, double lon1, double lat2, double lon2) noexcept {
  constexpr double kRad = std::numbers::pi / 180.0;
  const double phi1 = lat1 * kRad;
  const double phi2 = lat2 * kRad;
  const double dphi = (lat2 - lat1) * kRad;
  const double dlambda = (lon2 - lon1) * kRad;
  const double s1 = std::sin(dphi / 2);
  const double s2 = std::sin(dlambda / 2);
  double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  h = std::clamp(h, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(h));
}

double distance(const Spot& a, const Spot& b) noexcept {
  return haversine_km(a.lat, a.lon, b.lat, b.lon);
}

bool feasible(const TourPlan& plan, double threshold_km) noexcept {
  return plan.inter_spot_distance_km <= threshold_km;
}

}  // namespace concierge
