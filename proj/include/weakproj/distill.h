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

#ifndef WEAKPROJ_DISTILL_H_
#define WEAKPROJ_DISTILL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "weakproj/types.h"

// Teacher-student objective: per sentence, MSE between teacher and student
// tag distributions plus NLL of the weak tags under the student. Batch
// values are the mean of per-sentence values.
namespace weakproj::distill {

// Student probabilities are clamped below by this before taking logs.
inline constexpr double kProbFloor = 1e-12;
inline constexpr double kRowSumTolerance = 1e-6;

// Per-token probability rows (tokens x tags). Rows are non-negative and sum
// to 1 within kRowSumTolerance.
class TagDistribution {
 public:
  TagDistribution() = default;
  explicit TagDistribution(Eigen::MatrixXd probs);

  static TagDistribution FromLogits(const Eigen::MatrixXd& logits);
  static TagDistribution OneHot(std::span<const int> tags, int num_tags);

  const Eigen::MatrixXd& probs() const { return probs_; }
  Eigen::Index tokens() const { return probs_.rows(); }
  Eigen::Index tags() const { return probs_.cols(); }

 private:
  Eigen::MatrixXd probs_;
};

struct LossBreakdown {
  double mse = 0.0;
  double nll = 0.0;
  double total = 0.0;
};

// Row-wise softmax, shifted by the row maximum.
Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits);

// Mean over tokens and tags of (teach - stud)^2.
double MseLoss(const TagDistribution& teach, const TagDistribution& stud);

// Mean over tokens of -ln max(stud[t][weak[t]], kProbFloor).
double NllLoss(const TagDistribution& stud, std::span<const int> weak_tags);

LossBreakdown JointLoss(const TagDistribution& teach, const TagDistribution& stud,
                        std::span<const int> weak_tags);

// Component-wise mean; an empty batch yields zeros.
LossBreakdown MeanLoss(std::span<const LossBreakdown> per_sentence);

// d JointLoss(teach, softmax(logits), weak) / d logits.
Eigen::MatrixXd JointLossGradient(const Eigen::MatrixXd& logits, const TagDistribution& teach,
                                  std::span<const int> weak_tags);

// Central differences of the same loss with step h.
Eigen::MatrixXd NumericGradient(const Eigen::MatrixXd& logits, const TagDistribution& teach,
                                std::span<const int> weak_tags, double h = 1e-5);

// Largest elementwise |a - b| / max(|a|, |b|, floor).
double MaxRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                        double floor = 1e-8);

struct GradientCheckReport {
  std::size_t instances = 0;
  double max_rel_error = 0.0;
};

// Random instances with 3-10 tokens over the 9-tag set: standard-normal
// logits, teacher rows from softmax of random logits, uniform weak tags.
GradientCheckReport RunGradientCheck(std::size_t instances, std::uint64_t seed);

// Same check with given teachers and weak tags (random student logits).
GradientCheckReport RunGradientCheck(std::span<const TagDistribution> teachers,
                                     std::span<const std::vector<int>> weak_tags,
                                     std::uint64_t seed);

// Per-token linear-softmax tagger: logits = features * weights^T + bias^T.
struct ToyStudent {
  Eigen::MatrixXd weights;  // tags x d
  Eigen::VectorXd bias;     // tags

  Eigen::MatrixXd Logits(const Eigen::MatrixXd& features) const;
  TagDistribution Predict(const Eigen::MatrixXd& features) const;
};

struct ToyExample {
  Eigen::MatrixXd features;  // tokens x d
  TagDistribution teacher;
  std::vector<int> weak_tags;
};

struct TrainResult {
  ToyStudent student;
  std::vector<double> loss_trace;  // batch total loss after each epoch's update
};

LossBreakdown EvaluateToyStudent(const ToyStudent& student, std::span<const ToyExample> batch);

// Full-batch gradient descent on the mean joint loss. The seed only drives
// the uniform [-0.1, 0.1] weight initialization. Throws Error naming the
// epoch if the loss becomes non-finite.
TrainResult TrainToyStudent(std::span<const ToyExample> batch, double lr, int epochs,
                            std::uint64_t seed);

// Teacher distributions: {"id":0,"probs":[[9 floats], ...]} per line.
std::map<SentenceId, TagDistribution> ParseTeacher(std::istream& in);
std::map<SentenceId, TagDistribution> ReadTeacher(const std::filesystem::path& path);

// Toy training data: {"id":0,"features":[[...]],"weak":[tag indices]} per
// line, with an optional "teacher" matrix (defaults to one-hot weak tags).
std::vector<ToyExample> ParseToyExamples(std::istream& in);
std::vector<ToyExample> ReadToyExamples(const std::filesystem::path& path);

}  // namespace weakproj::distill

#endif  // WEAKPROJ_DISTILL_H_
