#include <gtest/gtest.h>

#include <random>

#include "concierge/error.hpp"
#include "concierge/spot_catalog.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace concierge {
namespace {

const Catalog& catalog() { return test::shared_resources()->catalog; }

TEST(Haversine, MatchesIndependentOracle) {
  for (const auto& f : test::kDistanceFixtures) {
    const double km = distance(catalog().at(f.a), catalog().at(f.b));
    EXPECT_NEAR(km, f.km, f.km * 0.005) << f.a << "-" << f.b;
    EXPECT_NEAR(km, f.km, 1e-6) << "same sphere, same radius: should agree tightly";
  }
}

TEST(Haversine, SymmetryAndZeroIdentity) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> lat(-89.9, 89.9), lon(-180.0, 180.0);
  for (int i = 0; i < 1000; ++i) {
    const double a1 = lat(rng), o1 = lon(rng), a2 = lat(rng), o2 = lon(rng);
    EXPECT_DOUBLE_EQ(haversine_km(a1, o1, a2, o2), haversine_km(a2, o2, a1, o1));
    EXPECT_EQ(haversine_km(a1, o1, a1, o1), 0.0);
    EXPECT_LE(haversine_km(a1, o1, a2, o2), std::numbers::pi * kEarthRadiusKm + 1e-9);
  }
  // Antipodes.
  EXPECT_NEAR(haversine_km(0, 0, 0, 180), std::numbers::pi * kEarthRadiusKm, 1e-9);
}

TEST(Feasibility, ThresholdIsInclusive) {
  TourPlan p;
  p.inter_spot_distance_km = 10.0;
  EXPECT_TRUE(feasible(p));
  p.inter_spot_distance_km = 10.000001;
  EXPECT_FALSE(feasible(p));
  EXPECT_TRUE(feasible(p, 11.0));
}

TEST(Catalog, LoadsShippedData) {
  EXPECT_EQ(catalog().size(), 25u);
  const auto& k = catalog().at("kinkakuji");
  EXPECT_EQ(k.name, "金閣寺");
  EXPECT_EQ(k.reading, "きんかく|じ");
  EXPECT_EQ(catalog().find("nope"), nullptr);
  EXPECT_THROW(catalog().at("nope"), Error);
  EXPECT_FALSE(catalog().genres().empty());
}

TEST(Catalog, SearchScoresAndOrders) {
  const auto hits = catalog().ranked({{"寺", "庭園"}, {}});
  ASSERT_GE(hits.size(), 3u);
  for (std::size_t i = 1; i < hits.size(); ++i) {
    EXPECT_TRUE(hits[i - 1].score > hits[i].score ||
                (hits[i - 1].score == hits[i].score && hits[i - 1].id < hits[i].id));
  }
  const auto top = catalog().search({{"寺", "庭園"}, {}});
  ASSERT_EQ(top.size(), 3u);
  EXPECT_EQ(top[0].id, hits[0].id);
}

TEST(Catalog, SearchNormalizesAndDeduplicates) {
  const auto a = catalog().ranked({{"寺"}, {}});
  const auto b = catalog().ranked({{" 寺 ", "寺"}, {}});
  EXPECT_EQ(a, b);
  // Full-width ASCII folds to lowercase ASCII.
  Catalog c({Spot{"x", "Kyoto Tower", "きょうと|たわー", {"view"}, "Tall tower.", "", 35, 135}});
  EXPECT_EQ(c.ranked({{"ＫＹＯＴＯ"}, {}}).size(), 1u);
  EXPECT_EQ(c.ranked({{"ＫＹＯＴＯ"}, {}})[0].score, 3);
}

TEST(Catalog, SearchExcludesIds) {
  const auto all = catalog().search({{"寺"}, {}});
  SearchQuery q{{"寺"}, {all[0].id}};
  for (const auto& s : catalog().search(q)) EXPECT_NE(s.id, all[0].id);
}

TEST(Catalog, NoMatchReturnsEmpty) {
  EXPECT_TRUE(catalog().search({{"zzzz"}, {}}).empty());
  EXPECT_TRUE(catalog().search({{}, {}}).empty());
}

TEST(Catalog, IndexedSearchEqualsBruteForce) {
  std::mt19937_64 rng(2024);
  for (int i = 0; i < 500; ++i) {
    const auto q = test::random_query(catalog().spots(), rng);
    ASSERT_EQ(catalog().ranked(q), test::brute_force_ranked(catalog().spots(), q)) << i;
  }
}

TEST(Catalog, ValidationFindings) {
  auto doc = test::read_json(test::data_dir() / "kyoto_spots.json");
  EXPECT_TRUE(validate_catalog(doc).empty());

  auto bad = doc;
  bad[3]["lat"] = 123.0;
  bad[4].erase("genres");
  bad[5]["id"] = bad[0]["id"];
  const auto f = validate_catalog(bad);
  ASSERT_EQ(f.size(), 3u);
  EXPECT_EQ(f[0].row, 3u);
  EXPECT_EQ(f[0].field, "lat");
  EXPECT_EQ(f[1].field, "genres");
  EXPECT_EQ(f[2].field, "id");
  EXPECT_EQ(f[2].message.rfind("duplicate id", 0), 0u);

  try {
    auto dup = doc;
    dup[1]["id"] = dup[0]["id"];
    Catalog::from_json(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DuplicateId);
  }
  try {
    Catalog::from_json(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaError);
  }
  EXPECT_FALSE(validate_catalog(nlohmann::json::object()).empty());
}

}  // namespace
}  // namespace concierge
