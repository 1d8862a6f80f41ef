// Copyright 2026 The weakproj Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "support/oracles.h"
#include "weakproj/errors.h"
#include "weakproj/scoring.h"

namespace weakproj::scoring {
namespace {

ScoredSentence Scored(SentenceId id, double score) {
  ScoredSentence s;
  s.weak.id = id;
  s.weak.sentence_score = score;
  s.entity_records = {{1.0, 1.0}};
  return s;
}

TEST_CASE("entity alignment score is the mean of word scores") {
  std::vector<double> one{0.8}, two{0.8, 0.6}, ones{1.0, 1.0, 1.0};
  CHECK(EntityAlignmentScore(one) == 0.8);
  CHECK(EntityAlignmentScore(two) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(EntityAlignmentScore(ones) == 1.0);
  CHECK_THROWS_AS(EntityAlignmentScore(std::vector<double>{}), ValidationError);
}

TEST_CASE("sentence score hand values") {
  std::vector<EntityRecord> perfect{{1.0, 1.0}};
  CHECK(SentenceScore(perfect) == 0.0);

  // (ln 0.72 + ln 0.5) / 2 = -0.5108256...
  std::vector<EntityRecord> two{{0.8, 0.9}, {0.5, 1.0}};
  CHECK(std::abs(SentenceScore(two) - (-0.510826)) < 1e-6);

  // ln 1e-6 = -13.8155106
  std::vector<EntityRecord> floor{{1e-6, 1.0}};
  CHECK(std::abs(SentenceScore(floor) - (-13.815511)) < 1e-6);

  CHECK_THROWS_WITH_AS(SentenceScore(std::vector<EntityRecord>{}), "no entities", ValidationError);
  std::vector<EntityRecord> bad{{0.0, 1.0}};
  CHECK_THROWS_AS(SentenceScore(bad), ValidationError);
}

TEST_CASE("sentence score is non-positive and monotone") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<EntityRecord> records(1 + rng() % 5);
    for (auto& r : records) r = {unit(rng), unit(rng)};
    const double base = SentenceScore(records);
    CHECK(base <= 0.0);
    auto bumped = records;
    auto& target = bumped[rng() % bumped.size()];
    double& field = rng() % 2 ? target.alignment_score : target.ner_score;
    field = std::min(1.0, field + unit(rng) * (1.0 - field));
    CHECK(SentenceScore(bumped) >= base);
  }
}

TEST_CASE("CollectEntityRecords averages each span's words") {
  std::vector<EntitySpan> spans{{0, 1, EntityType::kPer, 0.9},
                                {1, 2, EntityType::kLoc, 0.8},
                                {2, 3, EntityType::kOrg, 0.7}};
  std::vector<projection::ProjectedWord> projected(4);
  projected[0] = {0, EntityType::kPer, 0.8, 0};
  projected[1] = {1, EntityType::kPer, 0.6, 0};
  projected[3] = {3, EntityType::kLoc, 0.5, 1};
  auto records = CollectEntityRecords(spans, projected);
  REQUIRE(records.size() == 2);
  CHECK(records[0].alignment_score == doctest::Approx(0.7));
  CHECK(records[0].ner_score == 0.9);
  CHECK(records[1] == EntityRecord{0.5, 0.8});
}

TEST_CASE("filter examples") {
  std::vector<ScoredSentence> ten;
  for (int i = 0; i < 10; ++i) ten.push_back(Scored(i, -0.1 * ((i * 7) % 10)));
  auto result = FilterTop(ten, 0.4);
  REQUIRE(result.kept.size() == 4);
  std::vector<SentenceId> kept_ids;
  for (const auto& s : result.kept) kept_ids.push_back(s.weak.id);
  // Scores -0.0, -0.7, -0.4, -0.1, -0.8, -0.5, -0.2, -0.9, -0.6, -0.3.
  CHECK(kept_ids == std::vector<SentenceId>{0, 3, 6, 9});

  CHECK(FilterTop({Scored(5, -1.0)}, 0.4).kept.size() == 1);

  auto tied = FilterTop({Scored(2, -0.5), Scored(1, -0.5)}, 0.5);
  REQUIRE(tied.kept.size() == 1);
  CHECK(tied.kept[0].weak.id == 1);

  CHECK_THROWS_AS(FilterTop(ten, 0.0), ValidationError);
  CHECK_THROWS_AS(FilterTop(ten, 1.5), ValidationError);
  CHECK(FilterTop(ten, 1.0).kept.size() == 10);
  CHECK(FilterTop({}, 0.4).kept.empty());
}

TEST_CASE("KeepCount matches the integer ceiling") {
  for (std::size_t n = 0; n <= 200; ++n) {
    CHECK(KeepCount(n, 0.4) == oracle::CeilFraction(n, 2, 5));
    CHECK(KeepCount(n, 0.7) == oracle::CeilFraction(n, 7, 10));
    CHECK(KeepCount(n, 0.1) == oracle::CeilFraction(n, 1, 10));
  }
}

TEST_CASE("ranking is invariant to the log base") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unit(1e-6, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ScoredSentence> natural, base2;
    for (int i = 0; i < 30; ++i) {
      std::vector<EntityRecord> records(1 + rng() % 3);
      for (auto& r : records) r = {unit(rng), unit(rng)};
      double log2_score = 0.0;
      for (const auto& r : records) log2_score += std::log2(r.alignment_score * r.ner_score);
      log2_score /= static_cast<double>(records.size());
      natural.push_back(Scored(i, SentenceScore(records)));
      base2.push_back(Scored(i, log2_score));
    }
    auto a = FilterTop(natural, 0.4);
    auto b = FilterTop(base2, 0.4);
    REQUIRE(a.kept.size() == b.kept.size());
    for (std::size_t i = 0; i < a.kept.size(); ++i) CHECK(a.kept[i].weak.id == b.kept[i].weak.id);
  }
}

}  // namespace
}  // namespace weakproj::scoring
