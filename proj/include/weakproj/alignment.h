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

#ifndef WEAKPROJ_ALIGNMENT_H_
#define WEAKPROJ_ALIGNMENT_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "weakproj/types.h"

namespace weakproj::align {

inline constexpr double kDefaultEpsilon = 1e-6;

enum class LinkMethod : std::uint8_t { kMutual, kMatchFallback };

std::string_view ToString(LinkMethod method);
LinkMethod ParseLinkMethod(std::string_view text);  // throws ValidationError

// One (source word, target word) link. score is the similarity entry the
// link was read from.
struct AlignmentLink {
  std::size_t src = 0;
  std::size_t tgt = 0;
  double score = 0.0;
  LinkMethod method = LinkMethod::kMutual;

  friend bool operator==(const AlignmentLink&, const AlignmentLink&) = default;
};

// m x n matrix of finite similarities in [0, 1].
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  // Throws ValidationError if any entry is non-finite or outside [0, 1].
  explicit SimilarityMatrix(Eigen::MatrixXd values);

  const Eigen::MatrixXd& values() const { return values_; }
  Eigen::Index rows() const { return values_.rows(); }
  Eigen::Index cols() const { return values_.cols(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return values_(i, j); }

 private:
  Eigen::MatrixXd values_;
};

// Raw cosine similarities between L2-normalized rows. Both sets must share
// level and dimension; zero-norm rows are rejected.
Eigen::MatrixXd CosineMatrix(const EmbeddingSet& src, const EmbeddingSet& tgt);

// (cos + 1) / 2, clamped to [epsilon, 1]. The clamp keeps every alignment
// score strictly positive so that log(alignment * ner) is defined.
SimilarityMatrix NormalizeCosine(const Eigen::MatrixXd& cosine,
                                 double epsilon = kDefaultEpsilon);

SimilarityMatrix ComputeSimilarity(const EmbeddingSet& src, const EmbeddingSet& tgt,
                                   double epsilon = kDefaultEpsilon);

// Links (i, j) where j is the first maximum of row i and i is the first
// maximum of column j. Accepts any finite score matrix, so it can be run on
// raw cosines as well. Result is sorted by (src, tgt).
std::vector<AlignmentLink> MutualArgmaxAlign(const Eigen::MatrixXd& scores);
std::vector<AlignmentLink> MutualArgmaxAlign(const SimilarityMatrix& sim);

// Exact maximum-weight bipartite matching over strictly positive entries.
// Among optimal matchings the lexicographically smallest (src, tgt) link
// sequence is returned. Links carry LinkMethod::kMatchFallback.
std::vector<AlignmentLink> SolveMaxWeightMatching(const Eigen::MatrixXd& weights);
std::vector<AlignmentLink> SolveMaxWeightMatching(const SimilarityMatrix& sim);

// Sum of link scores, accumulated in list order.
double TotalWeight(std::span<const AlignmentLink> links);

// Collapses subword links to word links; a word pair keeps the maximum
// score among its subword links (and that link's method).
std::vector<AlignmentLink> SubwordToWordLinks(std::span<const AlignmentLink> links,
                                              std::span<const std::size_t> src_map,
                                              std::span<const std::size_t> tgt_map);

// Two-stage alignment of one sentence pair. Stage one is mutual argmax on
// word similarities. If any entity word is left without a link, stage two
// runs the matching on subword similarities and adds the word links whose
// source is an uncovered entity word and whose target is still free.
std::vector<AlignmentLink> AlignPair(const SimilarityMatrix& word_sim,
                                     const SimilarityMatrix& subword_sim,
                                     std::span<const std::size_t> src_map,
                                     std::span<const std::size_t> tgt_map,
                                     std::span<const std::size_t> entity_words);

// "src-tgt:score:method" tokens, space separated.
std::string FormatLinks(std::span<const AlignmentLink> links);

}  // namespace weakproj::align

#endif  // WEAKPROJ_ALIGNMENT_H_
