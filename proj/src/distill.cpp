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

#include "weakproj/distill.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <random>
#include <string>

#include "json.hpp"
#include "weakproj/corpus_io.h"
#include "weakproj/errors.h"
#include "weakproj/tags.h"

namespace weakproj::distill {
namespace {

using nlohmann::json;

void CheckWeakTags(std::span<const int> weak_tags, Eigen::Index tokens, Eigen::Index tags) {
  if (static_cast<Eigen::Index>(weak_tags.size()) != tokens) {
    throw ValidationError("weak tag count " + std::to_string(weak_tags.size()) +
                          " does not match " + std::to_string(tokens) + " tokens");
  }
  for (int tag : weak_tags) {
    if (tag < 0 || tag >= tags) {
      throw ValidationError("weak tag index out of range: " + std::to_string(tag));
    }
  }
}

// Uniform double in [0, 1) from the top 53 bits, independent of the
// standard library's distribution implementations.
double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::MatrixXd JsonMatrix(const json& rows, const char* name, std::size_t line_no) {
  auto fail = [&](const std::string& what) {
    throw ValidationError("line " + std::to_string(line_no) + ": " + what);
  };
  if (!rows.is_array() || rows.empty()) fail(std::string("\"") + name + "\" must be a non-empty array");
  const std::size_t cols = rows[0].is_array() ? rows[0].size() : 0;
  if (cols == 0) fail(std::string("\"") + name + "\" rows must be non-empty arrays");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) fail(std::string("ragged \"") + name + "\"");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!rows[r][c].is_number()) fail(std::string("\"") + name + "\" entries must be numbers");
      double v = rows[r][c].get<double>();
      if (!std::isfinite(v)) fail(std::string("non-finite value in \"") + name + "\"");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = v;
    }
  }
  return m;
}

template <class Fn>
void ForEachJsonLine(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json record;
    try {
      record = json::parse(line);
    } catch (const json::exception& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    if (!record.is_object() || !record.contains("id") || !record["id"].is_number_integer() ||
        record["id"].get<SentenceId>() < 0) {
      throw ValidationError("line " + std::to_string(line_no) + ": missing or invalid \"id\"");
    }
    try {
      fn(record, line_no);
    } catch (const ValidationError& e) {
      std::string what = e.what();
      if (what.rfind("line ", 0) == 0) throw;
      throw ValidationError("line " + std::to_string(line_no) + ": " + what);
    }
  }
}

}  // namespace

TagDistribution::TagDistribution(Eigen::MatrixXd probs) : probs_(std::move(probs)) {
  for (Eigen::Index t = 0; t < probs_.rows(); ++t) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < probs_.cols(); ++k) {
      double p = probs_(t, k);
      if (!std::isfinite(p) || p < 0.0) {
        throw ValidationError("probability at token " + std::to_string(t) +
                              " is negative or non-finite");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > kRowSumTolerance) {
      throw ValidationError("probabilities at token " + std::to_string(t) +
                            " sum to " + std::to_string(sum));
    }
  }
}

TagDistribution TagDistribution::FromLogits(const Eigen::MatrixXd& logits) {
  return TagDistribution(Softmax(logits));
}

TagDistribution TagDistribution::OneHot(std::span<const int> tags, int num_tags) {
  CheckWeakTags(tags, static_cast<Eigen::Index>(tags.size()), num_tags);
  Eigen::MatrixXd probs = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tags.size()), num_tags);
  for (std::size_t t = 0; t < tags.size(); ++t) probs(static_cast<Eigen::Index>(t), tags[t]) = 1.0;
  return TagDistribution(std::move(probs));
}

Eigen::MatrixXd Softmax(const Eigen::MatrixXd& logits) {
  if (!logits.allFinite()) throw ValidationError("non-finite logits");
  Eigen::MatrixXd out(logits.rows(), logits.cols());
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    Eigen::RowVectorXd e = (logits.row(t).array() - logits.row(t).maxCoeff()).exp();
    out.row(t) = e / e.sum();
  }
  return out;
}

double MseLoss(const TagDistribution& teach, const TagDistribution& stud) {
  if (teach.tokens() != stud.tokens() || teach.tags() != stud.tags()) {
    throw ValidationError("teacher and student shapes differ");
  }
  if (teach.probs().size() == 0) return 0.0;
  return (teach.probs() - stud.probs()).array().square().mean();
}

double NllLoss(const TagDistribution& stud, std::span<const int> weak_tags) {
  CheckWeakTags(weak_tags, stud.tokens(), stud.tags());
  if (weak_tags.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t t = 0; t < weak_tags.size(); ++t) {
    double p = stud.probs()(static_cast<Eigen::Index>(t), weak_tags[t]);
    sum -= std::log(std::max(p, kProbFloor));
  }
  return sum / static_cast<double>(weak_tags.size());
}

LossBreakdown JointLoss(const TagDistribution& teach, const TagDistribution& stud,
                        std::span<const int> weak_tags) {
  LossBreakdown loss;
  loss.mse = MseLoss(teach, stud);
  loss.nll = NllLoss(stud, weak_tags);
  loss.total = loss.mse + loss.nll;
  return loss;
}

LossBreakdown MeanLoss(std::span<const LossBreakdown> per_sentence) {
  LossBreakdown mean;
  if (per_sentence.empty()) return mean;
  for (const LossBreakdown& l : per_sentence) {
    mean.mse += l.mse;
    mean.nll += l.nll;
  }
  const auto n = static_cast<double>(per_sentence.size());
  mean.mse /= n;
  mean.nll /= n;
  mean.total = mean.mse + mean.nll;
  return mean;
}

Eigen::MatrixXd JointLossGradient(const Eigen::MatrixXd& logits, const TagDistribution& teach,
                                  std::span<const int> weak_tags) {
  if (logits.rows() != teach.tokens() || logits.cols() != teach.tags()) {
    throw ValidationError("logits and teacher shapes differ");
  }
  CheckWeakTags(weak_tags, logits.rows(), logits.cols());
  const Eigen::Index tokens = logits.rows();
  const Eigen::Index tags = logits.cols();
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(tokens, tags);
  if (tokens == 0) return grad;

  const Eigen::MatrixXd probs = Softmax(logits);
  const double mse_scale = 2.0 / static_cast<double>(tokens * tags);
  const double nll_scale = 1.0 / static_cast<double>(tokens);
  for (Eigen::Index t = 0; t < tokens; ++t) {
    // MSE through the softmax Jacobian: p * (g - <g, p>).
    Eigen::RowVectorXd g = mse_scale * (probs.row(t) - teach.probs().row(t));
    double inner = g.dot(probs.row(t));
    grad.row(t) = probs.row(t).array() * (g.array() - inner);

    // NLL is constant in the logits once the probability hits the floor.
    const int weak = weak_tags[static_cast<std::size_t>(t)];
    if (probs(t, weak) > kProbFloor) {
      Eigen::RowVectorXd ce = probs.row(t);
      ce(weak) -= 1.0;
      grad.row(t) += nll_scale * ce;
    }
  }
  return grad;
}

Eigen::MatrixXd NumericGradient(const Eigen::MatrixXd& logits, const TagDistribution& teach,
                                std::span<const int> weak_tags, double h) {
  Eigen::MatrixXd grad(logits.rows(), logits.cols());
  Eigen::MatrixXd probe = logits;
  for (Eigen::Index t = 0; t < logits.rows(); ++t) {
    for (Eigen::Index k = 0; k < logits.cols(); ++k) {
      const double saved = probe(t, k);
      probe(t, k) = saved + h;
      double plus = JointLoss(teach, TagDistribution(Softmax(probe)), weak_tags).total;
      probe(t, k) = saved - h;
      double minus = JointLoss(teach, TagDistribution(Softmax(probe)), weak_tags).total;
      probe(t, k) = saved;
      grad(t, k) = (plus - minus) / (2.0 * h);
    }
  }
  return grad;
}

double MaxRelativeError(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double floor) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ValidationError("gradient shapes differ");
  }
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    double x = a.reshaped()(i);
    double y = b.reshaped()(i);
    double denom = std::max({std::abs(x), std::abs(y), floor});
    worst = std::max(worst, std::abs(x - y) / denom);
  }
  return worst;
}

GradientCheckReport RunGradientCheck(std::size_t instances, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradientCheckReport report;
  for (std::size_t n = 0; n < instances; ++n) {
    const Eigen::Index tokens = 3 + static_cast<Eigen::Index>(rng() % 8);
    Eigen::MatrixXd logits(tokens, kNumTags);
    Eigen::MatrixXd teacher_logits(tokens, kNumTags);
    for (Eigen::Index i = 0; i < logits.size(); ++i) {
      logits.reshaped()(i) = normal(rng);
      teacher_logits.reshaped()(i) = 2.0 * normal(rng);
    }
    std::vector<int> weak(static_cast<std::size_t>(tokens));
    for (int& tag : weak) tag = static_cast<int>(rng() % kNumTags);
    TagDistribution teach = TagDistribution::FromLogits(teacher_logits);
    double err = MaxRelativeError(JointLossGradient(logits, teach, weak),
                                  NumericGradient(logits, teach, weak));
    report.max_rel_error = std::max(report.max_rel_error, err);
    ++report.instances;
  }
  return report;
}

GradientCheckReport RunGradientCheck(std::span<const TagDistribution> teachers,
                                     std::span<const std::vector<int>> weak_tags,
                                     std::uint64_t seed) {
  if (teachers.size() != weak_tags.size()) {
    throw ValidationError("teacher and weak tag batches differ in size");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradientCheckReport report;
  for (std::size_t n = 0; n < teachers.size(); ++n) {
    const TagDistribution& teach = teachers[n];
    Eigen::MatrixXd logits(teach.tokens(), teach.tags());
    for (Eigen::Index i = 0; i < logits.size(); ++i) logits.reshaped()(i) = normal(rng);
    double err = MaxRelativeError(JointLossGradient(logits, teach, weak_tags[n]),
                                  NumericGradient(logits, teach, weak_tags[n]));
    report.max_rel_error = std::max(report.max_rel_error, err);
    ++report.instances;
  }
  return report;
}

Eigen::MatrixXd ToyStudent::Logits(const Eigen::MatrixXd& features) const {
  if (features.cols() != weights.cols()) {
    throw ValidationError("feature dimension does not match the student");
  }
  return (features * weights.transpose()).rowwise() + bias.transpose();
}

TagDistribution ToyStudent::Predict(const Eigen::MatrixXd& features) const {
  return TagDistribution::FromLogits(Logits(features));
}

LossBreakdown EvaluateToyStudent(const ToyStudent& student, std::span<const ToyExample> batch) {
  std::vector<LossBreakdown> losses;
  losses.reserve(batch.size());
  for (const ToyExample& ex : batch) {
    losses.push_back(JointLoss(ex.teacher, student.Predict(ex.features), ex.weak_tags));
  }
  return MeanLoss(losses);
}

TrainResult TrainToyStudent(std::span<const ToyExample> batch, double lr, int epochs,
                            std::uint64_t seed) {
  if (batch.empty()) throw ValidationError("empty training batch");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be >= 0");
  if (epochs < 1) throw ValidationError("epochs must be >= 1");
  const Eigen::Index dim = batch.front().features.cols();
  const Eigen::Index tags = batch.front().teacher.tags();
  for (const ToyExample& ex : batch) {
    if (ex.features.cols() != dim || ex.teacher.tags() != tags ||
        ex.features.rows() != ex.teacher.tokens()) {
      throw ValidationError("inconsistent toy example shapes");
    }
    CheckWeakTags(ex.weak_tags, ex.features.rows(), tags);
  }

  std::mt19937_64 rng(seed);
  TrainResult result;
  ToyStudent& student = result.student;
  student.weights.resize(tags, dim);
  student.bias.resize(tags);
  for (Eigen::Index i = 0; i < student.weights.size(); ++i) {
    student.weights.reshaped()(i) = -0.1 + 0.2 * Uniform01(rng);
  }
  for (Eigen::Index i = 0; i < tags; ++i) student.bias(i) = -0.1 + 0.2 * Uniform01(rng);

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    Eigen::MatrixXd grad_w = Eigen::MatrixXd::Zero(tags, dim);
    Eigen::VectorXd grad_b = Eigen::VectorXd::Zero(tags);
    for (const ToyExample& ex : batch) {
      Eigen::MatrixXd g = inv_n * JointLossGradient(student.Logits(ex.features), ex.teacher,
                                                    ex.weak_tags);
      grad_w += g.transpose() * ex.features;
      grad_b += g.colwise().sum().transpose();
    }
    student.weights -= lr * grad_w;
    student.bias -= lr * grad_b;

    double loss = std::numeric_limits<double>::quiet_NaN();
    bool finite = student.weights.allFinite() && student.bias.allFinite();
    for (const ToyExample& ex : batch) {
      if (!finite) break;
      finite = student.Logits(ex.features).allFinite();
    }
    if (finite) loss = EvaluateToyStudent(student, batch).total;
    if (!std::isfinite(loss)) {
      throw Error("training diverged at epoch " + std::to_string(epoch));
    }
    result.loss_trace.push_back(loss);
  }
  return result;
}

std::map<SentenceId, TagDistribution> ParseTeacher(std::istream& in) {
  std::map<SentenceId, TagDistribution> teachers;
  ForEachJsonLine(in, [&](const json& record, std::size_t line_no) {
    SentenceId id = record["id"].get<SentenceId>();
    if (!record.contains("probs")) throw ValidationError("missing \"probs\"");
    Eigen::MatrixXd probs = JsonMatrix(record["probs"], "probs", line_no);
    if (probs.cols() != kNumTags) {
      throw ValidationError("expected " + std::to_string(kNumTags) + " probabilities per token, got " +
                            std::to_string(probs.cols()));
    }
    if (!teachers.emplace(id, TagDistribution(std::move(probs))).second) {
      throw ValidationError("duplicate id " + std::to_string(id));
    }
  });
  return teachers;
}

std::map<SentenceId, TagDistribution> ReadTeacher(const std::filesystem::path& path) {
  std::ifstream in = io::OpenInput(path);
  try {
    return ParseTeacher(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::vector<ToyExample> ParseToyExamples(std::istream& in) {
  std::vector<ToyExample> examples;
  ForEachJsonLine(in, [&](const json& record, std::size_t line_no) {
    if (!record.contains("features")) throw ValidationError("missing \"features\"");
    if (!record.contains("weak") || !record["weak"].is_array()) {
      throw ValidationError("missing \"weak\" array");
    }
    ToyExample ex;
    ex.features = JsonMatrix(record["features"], "features", line_no);
    for (const json& tag : record["weak"]) {
      if (!tag.is_number_integer()) throw ValidationError("weak tags must be integers");
      ex.weak_tags.push_back(tag.get<int>());
    }
    CheckWeakTags(ex.weak_tags, ex.features.rows(), kNumTags);
    if (record.contains("teacher") && !record["teacher"].is_null()) {
      ex.teacher = TagDistribution(JsonMatrix(record["teacher"], "teacher", line_no));
      if (ex.teacher.tokens() != ex.features.rows() || ex.teacher.tags() != kNumTags) {
        throw ValidationError("teacher shape does not match features");
      }
    } else {
      ex.teacher = TagDistribution::OneHot(ex.weak_tags, kNumTags);
    }
    examples.push_back(std::move(ex));
  });
  return examples;
}

std::vector<ToyExample> ReadToyExamples(const std::filesystem::path& path) {
  std::ifstream in = io::OpenInput(path);
  try {
    return ParseToyExamples(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace weakproj::distill
