#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>

#include "catbox/domain.hpp"
#include "catbox/errors.hpp"
#include "oracles.hpp"

using namespace catbox;

namespace {

SearchSpace one_by_one() { return SearchSpace({{"c", {"A", "B"}}}, {{"x", 0.0, 1.0}}); }

}  // namespace

TEST(ValidatePoint, InBoundsPointIsAccepted) {
  EXPECT_FALSE(validate_point(one_by_one(), {{0}, {0.5}}).has_value());
}

TEST(ValidatePoint, LevelIndexPastEndIsReported) {
  auto v = validate_point(one_by_one(), {{2}, {0.5}});
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(*v, "cat[0] out of range");
}

TEST(ValidatePoint, CoordinateAboveUpperIsReported) {
  auto v = validate_point(one_by_one(), {{1}, {1.5}});
  ASSERT_TRUE(v.has_value());
  EXPECT_EQ(*v, "con[0] above upper");
}

TEST(ValidatePoint, NegativeIndexNanAndWrongLengthsAreReported) {
  auto s = one_by_one();
  EXPECT_EQ(*validate_point(s, {{-1}, {0.5}}), "cat[0] out of range");
  EXPECT_EQ(*validate_point(s, {{0}, {-0.1}}), "con[0] below lower");
  EXPECT_EQ(*validate_point(s, {{0}, {std::nan("")}}), "con[0] not finite");
  EXPECT_TRUE(validate_point(s, {{0, 0}, {0.5}}).has_value());
  EXPECT_TRUE(validate_point(s, {{0}, {}}).has_value());
}

TEST(Normalize, MidpointLowerEdgeAndAffineInverse) {
  SearchSpace s({}, {{"x", -5.0, 5.0}});
  EXPECT_DOUBLE_EQ(normalize(s, {{}, {0.0}}).con01[0], 0.5);
  EXPECT_DOUBLE_EQ(normalize(s, {{}, {-5.0}}).con01[0], 0.0);
  SearchSpace t({}, {{"x", 2.0, 4.0}});
  NormalizedPoint q{{}, Eigen::VectorXd::Constant(1, 0.25)};
  EXPECT_DOUBLE_EQ(denormalize(t, q).con[0], 2.5);
}

TEST(Normalize, RoundTripOnRandomSpaces) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    SearchSpace s = oracle::random_space(rng);
    for (int i = 0; i < 1000; ++i) {
      MixedPoint p = sample_point(s, rng);
      NormalizedPoint q = normalize(s, p);
      for (Eigen::Index j = 0; j < q.con01.size(); ++j) {
        EXPECT_GE(q.con01[j], 0.0);
        EXPECT_LE(q.con01[j], 1.0);
      }
      MixedPoint r = denormalize(s, q);
      ASSERT_EQ(r.cat, p.cat);
      for (std::size_t j = 0; j < p.con.size(); ++j) {
        EXPECT_LE(std::abs(r.con[j] - p.con[j]), 1e-12 * std::max(1.0, std::abs(p.con[j])));
      }
    }
  }
}

TEST(EncodeLevel, GridValues) {
  EXPECT_DOUBLE_EQ(encode_level(1, 3, -32.768, 32.768), 0.0);
  EXPECT_DOUBLE_EQ(encode_level(0, 2, 0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(encode_level(1, 2, 0.0, 1.0), 1.0);
  // -10 + 3 * 20 / 4
  EXPECT_DOUBLE_EQ(encode_level(3, 5, -10.0, 10.0), 5.0);
}

TEST(EncodeLevel, InjectivePerVariable) {
  for (std::size_t levels = 2; levels <= 12; ++levels) {
    std::set<double> seen;
    for (std::size_t j = 0; j < levels; ++j) seen.insert(encode_level(static_cast<int>(j), levels, -3.0, 7.0));
    EXPECT_EQ(seen.size(), levels);
  }
}

TEST(EncodeCategorical, MapsEveryVariable) {
  SearchSpace s({{"a", {"x", "y", "z"}}, {"b", {"p", "q"}}}, {{"v", 0.0, 1.0}});
  auto z = encode_categorical_for_benchmark(s, {{2, 0}, {0.3}}, -1.0, 1.0);
  ASSERT_EQ(z.size(), 2u);
  EXPECT_DOUBLE_EQ(z[0], 1.0);
  EXPECT_DOUBLE_EQ(z[1], -1.0);
}

TEST(Sampler, EverySampleValidates) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    SearchSpace s = oracle::random_space(rng);
    for (int i = 0; i < 200; ++i) EXPECT_FALSE(validate_point(s, sample_point(s, rng)).has_value());
  }
}

TEST(Sampler, InvalidPointsAreRejected) {
  // Converse direction: perturbations that leave the space are never accepted.
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    SearchSpace s = oracle::random_space(rng);
    MixedPoint p = sample_point(s, rng);
    if (!p.cat.empty()) {
      MixedPoint q = p;
      q.cat[0] = static_cast<int>(s.level_count(0));
      EXPECT_TRUE(validate_point(s, q).has_value());
    }
    if (!p.con.empty()) {
      MixedPoint q = p;
      q.con[0] = s.continuous()[0].upper + 1e-9;
      EXPECT_TRUE(validate_point(s, q).has_value());
    }
  }
}

TEST(SearchSpace, ConstructionRejectsInvalidDefinitions) {
  EXPECT_THROW(SearchSpace({}, {}), SpaceError);
  EXPECT_THROW(SearchSpace({}, {{"x", 1.0, 1.0}}), SpaceError);
  EXPECT_THROW(SearchSpace({}, {{"x", 2.0, 1.0}}), SpaceError);
  EXPECT_THROW(SearchSpace({{"c", {"A"}}}, {}), SpaceError);
  EXPECT_THROW(SearchSpace({{"c", {"A", "A"}}}, {}), SpaceError);
  EXPECT_THROW(SearchSpace({{"x", {"A", "B"}}}, {{"x", 0.0, 1.0}}), SpaceError);
  EXPECT_THROW(SearchSpace({}, {{"", 0.0, 1.0}}), SpaceError);
  EXPECT_THROW(SearchSpace({}, {{"x", 0.0, std::numeric_limits<double>::infinity()}}), SpaceError);
  try {
    SearchSpace({}, {{"a", 0.0, 1.0}, {"temp", 3.0, 3.0}});
    FAIL();
  } catch (const SpaceError& e) {
    EXPECT_NE(std::string(e.what()).find("temp"), std::string::npos);
  }
}

TEST(SpaceJson, RoundTripAndFieldNames) {
  SearchSpace s({{"solvent", {"water", "ethanol"}}}, {{"temp", 20.0, 80.0}});
  auto j = space_to_json(s);
  ASSERT_TRUE(j.contains("categoricals"));
  ASSERT_TRUE(j.contains("continuous"));
  EXPECT_EQ(j["categoricals"][0]["name"], "solvent");
  EXPECT_EQ(j["categoricals"][0]["levels"][1], "ethanol");
  EXPECT_EQ(j["continuous"][0]["lower"], 20.0);
  EXPECT_EQ(space_from_json(j), s);
}

TEST(SpaceJson, MissingFieldsAreNamed) {
  nlohmann::json j = {{"categoricals", nlohmann::json::array()},
                      {"continuous", {{{"name", "x"}, {"lower", 1.0}}}}};
  try {
    space_from_json(j);
    FAIL();
  } catch (const SpaceError& e) {
    EXPECT_NE(e.field().find("continuous[0]"), std::string::npos);
  }
}

TEST(PointJson, AcceptsLabelsAndRejectsOutOfSpace) {
  SearchSpace s({{"solvent", {"water", "ethanol"}}}, {{"temp", 20.0, 80.0}});
  MixedPoint p = point_from_json(s, {{"cat", {"ethanol"}}, {"con", {25.0}}});
  EXPECT_EQ(p.cat[0], 1);
  EXPECT_EQ(point_from_json(s, point_to_json(p)), p);
  EXPECT_THROW(point_from_json(s, {{"cat", {"milk"}}, {"con", {25.0}}}), PointError);
  EXPECT_THROW(point_from_json(s, {{"cat", {0}}, {"con", {90.0}}}), PointError);
  EXPECT_THROW(point_from_json(s, {{"cat", {0}}}), PointError);
  EXPECT_THROW(point_from_json(s, nlohmann::json::array()), PointError);
}
