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

#include "weakproj/alignment.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <utility>

#include "weakproj/errors.h"

namespace weakproj::align {
namespace {

using Index = Eigen::Index;

Eigen::MatrixXd UnitRows(const Eigen::MatrixXd& m, const char* side) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (Index r = 0; r < m.rows(); ++r) {
    double norm = m.row(r).norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
      throw ValidationError(std::string("zero-norm ") + side + " vector at row " +
                            std::to_string(r));
    }
    out.row(r) = m.row(r) / norm;
  }
  return out;
}

void CheckFinite(const Eigen::MatrixXd& m) {
  if (!m.allFinite()) throw ValidationError("score matrix has non-finite entries");
}

// Value of the best matching between the given rows and columns, where an
// edge is worth max(w, 0). Equivalent to the best partial matching on w.
// Rectangular Hungarian method (shortest augmenting paths with potentials).
double BestMatchingValue(const Eigen::MatrixXd& w, std::span<const Index> rows,
                         std::span<const Index> cols,
                         std::vector<std::pair<Index, Index>>* assignment = nullptr) {
  if (rows.empty() || cols.empty()) return 0.0;
  const bool transposed = rows.size() > cols.size();
  std::span<const Index> short_side = transposed ? cols : rows;
  std::span<const Index> long_side = transposed ? rows : cols;
  const std::size_t n = short_side.size();
  const std::size_t m = long_side.size();
  auto gain = [&](std::size_t a, std::size_t b) {
    double v = transposed ? w(long_side[b], short_side[a]) : w(short_side[a], long_side[b]);
    return v > 0.0 ? v : 0.0;
  };

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
  std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(m + 1, kInf);
    std::vector<char> used(m + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0];
      std::size_t j1 = 0;
      double delta = kInf;
      for (std::size_t j = 1; j <= m; ++j) {
        if (used[j]) continue;
        double cur = -gain(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  double total = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    if (p[j] == 0) continue;
    double g = gain(p[j] - 1, j - 1);
    total += g;
    if (assignment && g > 0.0) {
      Index a = short_side[p[j] - 1];
      Index b = long_side[j - 1];
      assignment->emplace_back(transposed ? b : a, transposed ? a : b);
    }
  }
  return total;
}

}  // namespace

std::string_view ToString(LinkMethod method) {
  return method == LinkMethod::kMutual ? "mutual" : "match_fallback";
}

LinkMethod ParseLinkMethod(std::string_view text) {
  if (text == "mutual") return LinkMethod::kMutual;
  if (text == "match_fallback") return LinkMethod::kMatchFallback;
  throw ValidationError("unknown link method \"" + std::string(text) + "\"");
}

SimilarityMatrix::SimilarityMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  for (Index i = 0; i < values_.rows(); ++i) {
    for (Index j = 0; j < values_.cols(); ++j) {
      double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
        throw ValidationError("similarity entry (" + std::to_string(i) + ", " +
                              std::to_string(j) + ") outside [0, 1]");
      }
    }
  }
}

Eigen::MatrixXd CosineMatrix(const EmbeddingSet& src, const EmbeddingSet& tgt) {
  if (src.level != tgt.level) {
    throw ValidationError("source and target embeddings are at different levels");
  }
  if (src.vectors.cols() != tgt.vectors.cols()) {
    throw ValidationError("embedding dimension mismatch: " +
                          std::to_string(src.vectors.cols()) + " vs " +
                          std::to_string(tgt.vectors.cols()));
  }
  Eigen::MatrixXd cosine = UnitRows(src.vectors, "source") * UnitRows(tgt.vectors, "target").transpose();
  return cosine.cwiseMax(-1.0).cwiseMin(1.0);
}

SimilarityMatrix NormalizeCosine(const Eigen::MatrixXd& cosine, double epsilon) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ValidationError("epsilon must be in (0, 1)");
  CheckFinite(cosine);
  Eigen::MatrixXd normalized = ((cosine.array() + 1.0) / 2.0).cwiseMax(epsilon).cwiseMin(1.0);
  return SimilarityMatrix(std::move(normalized));
}

SimilarityMatrix ComputeSimilarity(const EmbeddingSet& src, const EmbeddingSet& tgt,
                                   double epsilon) {
  return NormalizeCosine(CosineMatrix(src, tgt), epsilon);
}

std::vector<AlignmentLink> MutualArgmaxAlign(const Eigen::MatrixXd& scores) {
  CheckFinite(scores);
  const Index m = scores.rows();
  const Index n = scores.cols();
  std::vector<AlignmentLink> links;
  if (m == 0 || n == 0) return links;

  // Strict '>' keeps the first (smallest) index among ties.
  std::vector<Index> col_best(static_cast<std::size_t>(n), 0);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 1; i < m; ++i) {
      if (scores(i, j) > scores(col_best[j], j)) col_best[j] = i;
    }
  }
  for (Index i = 0; i < m; ++i) {
    Index best = 0;
    for (Index j = 1; j < n; ++j) {
      if (scores(i, j) > scores(i, best)) best = j;
    }
    if (col_best[best] == i) {
      links.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(best),
                       scores(i, best), LinkMethod::kMutual});
    }
  }
  return links;
}

std::vector<AlignmentLink> MutualArgmaxAlign(const SimilarityMatrix& sim) {
  return MutualArgmaxAlign(sim.values());
}

std::vector<AlignmentLink> SolveMaxWeightMatching(const Eigen::MatrixXd& weights) {
  CheckFinite(weights);
  const Index m = weights.rows();
  const Index n = weights.cols();
  std::vector<AlignmentLink> links;
  if (m == 0 || n == 0) return links;

  std::vector<Index> all_rows(static_cast<std::size_t>(m));
  std::vector<Index> all_cols(static_cast<std::size_t>(n));
  for (Index i = 0; i < m; ++i) all_rows[i] = i;
  for (Index j = 0; j < n; ++j) all_cols[j] = j;
  const double optimum = BestMatchingValue(weights, all_rows, all_cols);
  const double tol = 1e-12 * (1.0 + std::abs(optimum));

  // Build the lexicographically smallest optimal link sequence greedily:
  // take row i's smallest column j that still admits an optimal completion
  // from the rows after i, or leave row i unmatched.
  std::vector<char> col_used(static_cast<std::size_t>(n), 0);
  double achieved = 0.0;
  std::vector<Index> rest_rows;
  std::vector<Index> rest_cols;
  for (Index i = 0; i < m; ++i) {
    if (achieved >= optimum - tol) break;
    rest_rows.assign(all_rows.begin() + i + 1, all_rows.end());
    for (Index j = 0; j < n; ++j) {
      if (col_used[j] || !(weights(i, j) > 0.0)) continue;
      rest_cols.clear();
      for (Index c = 0; c < n; ++c) {
        if (!col_used[c] && c != j) rest_cols.push_back(c);
      }
      double rest = BestMatchingValue(weights, rest_rows, rest_cols);
      if (achieved + weights(i, j) + rest >= optimum - tol) {
        links.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j),
                         weights(i, j), LinkMethod::kMatchFallback});
        col_used[j] = 1;
        achieved += weights(i, j);
        break;
      }
    }
  }
  return links;
}

std::vector<AlignmentLink> SolveMaxWeightMatching(const SimilarityMatrix& sim) {
  return SolveMaxWeightMatching(sim.values());
}

double TotalWeight(std::span<const AlignmentLink> links) {
  double total = 0.0;
  for (const AlignmentLink& link : links) total += link.score;
  return total;
}

std::vector<AlignmentLink> SubwordToWordLinks(std::span<const AlignmentLink> links,
                                              std::span<const std::size_t> src_map,
                                              std::span<const std::size_t> tgt_map) {
  std::map<std::pair<std::size_t, std::size_t>, AlignmentLink> merged;
  for (const AlignmentLink& link : links) {
    if (link.src >= src_map.size() || link.tgt >= tgt_map.size()) {
      throw ValidationError("subword link outside the word maps");
    }
    AlignmentLink word{src_map[link.src], tgt_map[link.tgt], link.score, link.method};
    auto [it, inserted] = merged.try_emplace({word.src, word.tgt}, word);
    if (!inserted && word.score > it->second.score) it->second = word;
  }
  std::vector<AlignmentLink> out;
  out.reserve(merged.size());
  for (auto& [key, link] : merged) out.push_back(link);
  return out;
}

std::vector<AlignmentLink> AlignPair(const SimilarityMatrix& word_sim,
                                     const SimilarityMatrix& subword_sim,
                                     std::span<const std::size_t> src_map,
                                     std::span<const std::size_t> tgt_map,
                                     std::span<const std::size_t> entity_words) {
  if (static_cast<std::size_t>(subword_sim.rows()) != src_map.size() ||
      static_cast<std::size_t>(subword_sim.cols()) != tgt_map.size()) {
    throw ValidationError("subword similarity shape does not match the word maps");
  }
  for (std::size_t word : entity_words) {
    if (word >= static_cast<std::size_t>(word_sim.rows())) {
      throw ValidationError("entity word index " + std::to_string(word) + " out of range");
    }
  }

  std::vector<AlignmentLink> links = MutualArgmaxAlign(word_sim);
  std::set<std::size_t> covered_src;
  std::set<std::size_t> taken_tgt;
  for (const AlignmentLink& link : links) {
    covered_src.insert(link.src);
    taken_tgt.insert(link.tgt);
  }
  std::set<std::size_t> uncovered;
  for (std::size_t word : entity_words) {
    if (!covered_src.count(word)) uncovered.insert(word);
  }
  if (uncovered.empty()) return links;

  std::vector<AlignmentLink> matched = SolveMaxWeightMatching(subword_sim);
  for (const AlignmentLink& link : SubwordToWordLinks(matched, src_map, tgt_map)) {
    if (link.tgt >= static_cast<std::size_t>(word_sim.cols())) {
      throw ValidationError("subword word map exceeds the target word count");
    }
    if (uncovered.count(link.src) && !taken_tgt.count(link.tgt)) links.push_back(link);
  }
  std::sort(links.begin(), links.end(), [](const AlignmentLink& a, const AlignmentLink& b) {
    return std::pair(a.src, a.tgt) < std::pair(b.src, b.tgt);
  });
  return links;
}

std::string FormatLinks(std::span<const AlignmentLink> links) {
  std::string out;
  char buf[96];
  for (const AlignmentLink& link : links) {
    if (!out.empty()) out += ' ';
    std::snprintf(buf, sizeof(buf), "%zu-%zu:%.6f:", link.src, link.tgt, link.score);
    out += buf;
    out += ToString(link.method);
  }
  return out;
}

}  // namespace weakproj::align
