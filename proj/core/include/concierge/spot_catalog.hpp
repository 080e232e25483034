#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace concierge {

struct Spot {
  std::string id;
  std::string name;
  /// Phonetic reading; '|' marks a word break.
  std::string reading;
  std::vector<std::string> genres;
  std::string description;
  std::string image_ref;
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const Spot&) const = default;
};

struct TourPlan {
  Spot first_spot;
  Spot second_spot;
  double inter_spot_distance_km = 0.0;

  bool operator==(const TourPlan&) const = default;
};

struct SearchQuery {
  std::vector<std::string> keywords;
  std::set<std::string> exclude_ids;
};

struct SearchHit {
  std::string id;
  int score = 0;

  bool operator==(const SearchHit&) const = default;
};

/// One schema problem in a catalog document. row is the 0-based array index.
struct SchemaFinding {
  std::size_t row = 0;
  std::string field;
  std::string message;
};

inline constexpr double kEarthRadiusKm = 6371.0088;
inline constexpr std::size_t kMaxCandidates = 3;

namespace search_weight {
inline constexpr int kName = 3;
inline constexpr int kGenre = 2;
inline constexpr int kDescription = 1;
}  // namespace search_weight

/// Immutable after construction; safe for concurrent reads.
class Catalog {
 public:
  /// Throws Error(SchemaError) or Error(DuplicateId).
  explicit Catalog(std::vector<Spot> spots);

  static Catalog from_json(const nlohmann::json& doc);

  const std::vector<Spot>& spots() const noexcept { return spots_; }
  std::size_t size() const noexcept { return spots_.size(); }
  const Spot* find(std::string_view id) const;
  /// Throws Error(NotACandidate) for unknown ids.
  const Spot& at(std::string_view id) const;

  /// Top min(3, matches) spots by weighted keyword score, ties by id.
  std::vector<Spot> search(const SearchQuery& query) const;
  /// Every matching spot with its score, in ranked order.
  std::vector<SearchHit> ranked(const SearchQuery& query) const;

  /// Distinct genre names across the catalog in first-seen order.
  std::vector<std::string> genres() const;

 private:
  struct Posting {
    std::uint32_t spot;
    std::uint8_t fields;
  };

  void build_index();

  std::vector<Spot> spots_;
  std::unordered_map<std::string, std::size_t> by_id_;
  // normalized substring (UTF-8) -> spots whose fields contain it
  std::unordered_map<std::string, std::vector<Posting>> index_;
};

/// Reads and validates a catalog file. Throws Error(SchemaError) with row and
/// field diagnostics, Error(DuplicateId), or Error(StorageError) when unreadable.
Catalog load_catalog(const std::filesystem::path& path);

/// All schema findings for a catalog document, including duplicate ids.
std::vector<SchemaFinding> validate_catalog(const nlohmann::json& doc);

double haversine_km(double lat1, double lon1, double lat2, double lon2) noexcept;
double distance(const Spot& a, const Spot& b) noexcept;

inline constexpr double kDefaultFeasibleKm = 10.0;

/// Inclusive: a plan exactly at the threshold is feasible.
bool feasible(const TourPlan& plan, double threshold_km = kDefaultFeasibleKm) noexcept;

}  // namespace concierge
