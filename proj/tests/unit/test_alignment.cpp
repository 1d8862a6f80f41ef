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

#include <random>
#include <set>
#include <vector>

#include "doctest.h"
#include "support/oracles.h"
#include "weakproj/alignment.h"
#include "weakproj/errors.h"

namespace weakproj::align {
namespace {

using LinkSet = oracle::LinkSet;

Eigen::MatrixXd M(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return m;
}

EmbeddingSet Words(const Eigen::MatrixXd& vectors) {
  return EmbeddingSet{Granularity::kWord, vectors, {}};
}

LinkSet Pairs(const std::vector<AlignmentLink>& links) {
  LinkSet out;
  for (const auto& l : links) out.emplace_back(static_cast<int>(l.src), static_cast<int>(l.tgt));
  return out;
}

TEST_CASE("similarity normalizes cosine into [epsilon, 1]") {
  Eigen::MatrixXd v = M({{1.0, 2.0, 0.0}});
  Eigen::MatrixXd w = M({{2.0, 4.0, 0.0}, {-2.0, 1.0, 0.0}, {-1.0, -2.0, 0.0}});
  SimilarityMatrix sim = ComputeSimilarity(Words(v), Words(w));
  CHECK(sim(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(sim(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(sim(0, 2) == 1e-6);
}

TEST_CASE("similarity rejects bad inputs") {
  CHECK_THROWS_AS(ComputeSimilarity(Words(M({{0.0, 0.0}})), Words(M({{1.0, 0.0}}))),
                  ValidationError);
  CHECK_THROWS_AS(ComputeSimilarity(Words(M({{1.0, 0.0}})), Words(M({{1.0, 0.0, 0.0}}))),
                  ValidationError);
  EmbeddingSet sub{Granularity::kSubword, M({{1.0, 0.0}}), {0}};
  CHECK_THROWS_AS(ComputeSimilarity(Words(M({{1.0, 0.0}})), sub), ValidationError);
  CHECK_THROWS_AS(SimilarityMatrix(M({{1.5}})), ValidationError);
  CHECK_THROWS_AS(SimilarityMatrix(M({{-0.1}})), ValidationError);
}

TEST_CASE("mutual argmax examples") {
  auto dominant = MutualArgmaxAlign(SimilarityMatrix(M({{0.9, 0.1}, {0.2, 0.8}})));
  REQUIRE(dominant.size() == 2);
  CHECK(dominant[0] == AlignmentLink{0, 0, 0.9, LinkMethod::kMutual});
  CHECK(dominant[1] == AlignmentLink{1, 1, 0.8, LinkMethod::kMutual});

  auto tied = MutualArgmaxAlign(SimilarityMatrix(M({{0.9, 0.9}, {0.1, 0.2}})));
  REQUIRE(tied.size() == 1);
  CHECK(tied[0] == AlignmentLink{0, 0, 0.9, LinkMethod::kMutual});

  auto single = MutualArgmaxAlign(SimilarityMatrix(M({{0.7}})));
  REQUIRE(single.size() == 1);
  CHECK(single[0] == AlignmentLink{0, 0, 0.7, LinkMethod::kMutual});

  CHECK(MutualArgmaxAlign(Eigen::MatrixXd(0, 3)).empty());
}

TEST_CASE("mutual argmax column ties prefer the smaller row") {
  // Column 0 ties between rows 0 and 1; row 1 also prefers column 0.
  auto links = MutualArgmaxAlign(M({{0.6, 0.5}, {0.6, 0.1}}));
  CHECK(Pairs(links) == LinkSet{{0, 0}});
}

TEST_CASE("mutual argmax output is a partial matching of mutual maxima") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = oracle::RandomMatrix(rng, 1 + rng() % 7, 1 + rng() % 7);
    auto links = MutualArgmaxAlign(m);
    std::set<std::size_t> srcs, tgts;
    for (const auto& l : links) {
      CHECK(srcs.insert(l.src).second);
      CHECK(tgts.insert(l.tgt).second);
      CHECK(l.score == m(l.src, l.tgt));
      CHECK(m.row(l.src).maxCoeff() == l.score);
      CHECK(m.col(l.tgt).maxCoeff() == l.score);
    }
  }
}

TEST_CASE("matching examples") {
  auto cross = SolveMaxWeightMatching(SimilarityMatrix(M({{0.9, 0.8}, {0.8, 0.1}})));
  REQUIRE(cross.size() == 2);
  CHECK(cross[0] == AlignmentLink{0, 1, 0.8, LinkMethod::kMatchFallback});
  CHECK(cross[1] == AlignmentLink{1, 0, 0.8, LinkMethod::kMatchFallback});
  CHECK(TotalWeight(cross) == doctest::Approx(1.6));

  auto identity = SolveMaxWeightMatching(SimilarityMatrix(M({{1.0, 1e-6}, {1e-6, 1.0}})));
  CHECK(Pairs(identity) == LinkSet{{0, 0}, {1, 1}});

  CHECK(SolveMaxWeightMatching(Eigen::MatrixXd(0, 0)).empty());
}

TEST_CASE("matching equals exhaustive search on small matrices") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto m = oracle::RandomMatrix(rng, 1 + rng() % 5, 1 + rng() % 5);
    auto links = SolveMaxWeightMatching(m);
    auto best = oracle::BruteForceMatching(m);
    CHECK(TotalWeight(links) == best.weight);
    CHECK(Pairs(links) == best.links);
    CHECK(links.size() == static_cast<std::size_t>(std::min(m.rows(), m.cols())));
  }
}

TEST_CASE("matching ties resolve to the lexicographically smallest link set") {
  Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 3, 0.5);
  CHECK(Pairs(SolveMaxWeightMatching(flat)) == LinkSet{{0, 0}, {1, 1}, {2, 2}});

  // Quantized entries produce many equal-weight optima.
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 300; ++trial) {
    Eigen::MatrixXd m(1 + rng() % 5, 1 + rng() % 5);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      m.reshaped()(i) = 0.25 * static_cast<double>(rng() % 5);
    }
    auto best = oracle::BruteForceMatching(m);
    auto links = SolveMaxWeightMatching(m);
    CHECK(Pairs(links) == best.links);
    CHECK(TotalWeight(links) == best.weight);
  }
}

TEST_CASE("matching with signed weights leaves harmful links out") {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    auto m = oracle::RandomMatrix(rng, 1 + rng() % 5, 1 + rng() % 5, -1.0, 1.0);
    auto links = SolveMaxWeightMatching(m);
    for (const auto& l : links) CHECK(l.score > 0.0);
    CHECK(TotalWeight(links) == doctest::Approx(oracle::BruteForceMatchingWeightAnyLinks(m)).epsilon(1e-12));
  }
}

TEST_CASE("subword links collapse to word links by maximum") {
  std::vector<std::size_t> one{0};
  std::vector<AlignmentLink> single{{0, 0, 0.9, LinkMethod::kMatchFallback}};
  auto word = SubwordToWordLinks(single, one, one);
  REQUIRE(word.size() == 1);
  CHECK(word[0] == AlignmentLink{0, 0, 0.9, LinkMethod::kMatchFallback});

  std::vector<std::size_t> src_map{0, 0, 1, 1};
  std::vector<std::size_t> tgt_map{0, 1, 1, 2};
  std::vector<AlignmentLink> sub{{2, 3, 0.6, LinkMethod::kMatchFallback},
                                 {3, 3, 0.8, LinkMethod::kMatchFallback}};
  auto merged = SubwordToWordLinks(sub, src_map, tgt_map);
  REQUIRE(merged.size() == 1);
  CHECK(merged[0] == AlignmentLink{1, 2, 0.8, LinkMethod::kMatchFallback});

  CHECK(SubwordToWordLinks({}, src_map, tgt_map).empty());
  std::vector<AlignmentLink> outside{{4, 0, 0.5, LinkMethod::kMutual}};
  CHECK_THROWS_AS(SubwordToWordLinks(outside, src_map, tgt_map), ValidationError);
}

TEST_CASE("AlignPair stage one only when every entity word is covered") {
  SimilarityMatrix word(M({{0.9, 0.1}, {0.2, 0.8}}));
  SimilarityMatrix sub(M({{0.1, 0.9}, {0.9, 0.1}}));
  std::vector<std::size_t> map{0, 1};
  std::vector<std::size_t> entities{0, 1};
  CHECK(AlignPair(word, sub, map, map, entities) == MutualArgmaxAlign(word));
}

TEST_CASE("AlignPair falls back to subword matching for a missed entity word") {
  SimilarityMatrix word(M({{0.9, 0.9}, {0.1, 0.2}}));
  // Subwords: source word 1 has two pieces, target words one each.
  SimilarityMatrix sub(M({{0.95, 0.1}, {0.2, 0.7}, {0.1, 0.6}}));
  std::vector<std::size_t> src_map{0, 1, 1};
  std::vector<std::size_t> tgt_map{0, 1};
  std::vector<std::size_t> entities{1};
  auto links = AlignPair(word, sub, src_map, tgt_map, entities);
  REQUIRE(links.size() == 2);
  CHECK(links[0] == AlignmentLink{0, 0, 0.9, LinkMethod::kMutual});
  CHECK(links[1] == AlignmentLink{1, 1, 0.7, LinkMethod::kMatchFallback});
}

TEST_CASE("AlignPair leaves the word uncovered when the fallback cannot place it") {
  SimilarityMatrix word(M({{0.9, 0.9}, {0.1, 0.2}}));
  // The matching sends word 1 to target 0, which stage one already holds.
  SimilarityMatrix sub(M({{0.1, 0.9}, {0.9, 0.1}}));
  std::vector<std::size_t> map{0, 1};
  std::vector<std::size_t> entities{1};
  auto links = AlignPair(word, sub, map, map, entities);
  CHECK(links == MutualArgmaxAlign(word));
}

TEST_CASE("AlignPair never removes stage one links") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Index m = 1 + rng() % 6, n = 1 + rng() % 6;
    SimilarityMatrix word(oracle::RandomMatrix(rng, m, n));
    SimilarityMatrix sub(oracle::RandomMatrix(rng, m, n));
    std::vector<std::size_t> src_map(m), tgt_map(n), entities;
    for (Eigen::Index i = 0; i < m; ++i) src_map[i] = i;
    for (Eigen::Index j = 0; j < n; ++j) tgt_map[j] = j;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (rng() % 2) entities.push_back(i);
    }
    auto stage_one = MutualArgmaxAlign(word);
    auto links = AlignPair(word, sub, src_map, tgt_map, entities);
    for (const auto& l : stage_one) {
      CHECK(std::find(links.begin(), links.end(), l) != links.end());
    }
    CHECK(links == AlignPair(word, sub, src_map, tgt_map, entities));
  }
}

TEST_CASE("FormatLinks prints src-tgt:score:method") {
  std::vector<AlignmentLink> links{{0, 1, 0.5, LinkMethod::kMutual},
                                   {2, 0, 0.25, LinkMethod::kMatchFallback}};
  CHECK(FormatLinks(links) == "0-1:0.500000:mutual 2-0:0.250000:match_fallback");
}

}  // namespace
}  // namespace weakproj::align
