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

#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "support/oracles.h"
#include "weakproj/distill.h"
#include "weakproj/errors.h"

namespace weakproj::distill {
namespace {

TagDistribution Dist(std::initializer_list<std::initializer_list<double>> rows) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) m(i, j++) = v;
    ++i;
  }
  return TagDistribution(m);
}

Eigen::MatrixXd RandomLogits(std::mt19937_64& rng, Eigen::Index tokens, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd z(tokens, kNumTags);
  for (Eigen::Index i = 0; i < z.size(); ++i) z.reshaped()(i) = normal(rng);
  return z;
}

TEST_CASE("TagDistribution enforces normalization") {
  CHECK_NOTHROW(Dist({{0.5, 0.5}}));
  CHECK_THROWS_AS(Dist({{0.5, 0.6}}), ValidationError);
  CHECK_THROWS_AS(Dist({{1.5, -0.5}}), ValidationError);
}

TEST_CASE("mse hand values") {
  auto a = Dist({{0.5, 0.5}});
  auto b = Dist({{1.0, 0.0}});
  CHECK(MseLoss(a, a) == 0.0);
  CHECK(MseLoss(a, b) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK_THROWS_AS(MseLoss(a, Dist({{0.5, 0.5}, {0.5, 0.5}})), ValidationError);
}

TEST_CASE("mse is symmetric") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index tokens = 1 + rng() % 6;
    auto a = TagDistribution::FromLogits(RandomLogits(rng, tokens));
    auto b = TagDistribution::FromLogits(RandomLogits(rng, tokens));
    CHECK(MseLoss(a, b) == MseLoss(b, a));
  }
}

TEST_CASE("nll hand values") {
  std::vector<int> zero{0};
  CHECK(NllLoss(Dist({{1.0, 0.0}}), zero) == 0.0);
  CHECK(std::abs(NllLoss(Dist({{0.5, 0.5}}), zero) - 0.693147) < 1e-6);
  std::vector<int> two{0, 1};
  CHECK(std::abs(NllLoss(Dist({{0.5, 0.5}, {0.75, 0.25}}), two) - 1.039721) < 1e-6);
  std::vector<int> bad{2};
  CHECK_THROWS_AS(NllLoss(Dist({{0.5, 0.5}}), bad), ValidationError);
}

TEST_CASE("nll clamps zero probabilities") {
  std::vector<int> one{1};
  CHECK(NllLoss(Dist({{1.0, 0.0}}), one) == doctest::Approx(-std::log(1e-12)));
}

TEST_CASE("nll decreases as the weak tag gains mass") {
  std::vector<int> weak{0};
  double prev = INFINITY;
  for (double p = 0.05; p < 1.0; p += 0.05) {
    double rest = (1.0 - p) / 2.0;
    double nll = NllLoss(Dist({{p, rest, rest}}), weak);
    CHECK(nll < prev);
    prev = nll;
  }
}

TEST_CASE("joint loss hand values") {
  std::vector<int> zero{0};
  auto onehot = Dist({{1.0, 0.0}});
  auto joint0 = JointLoss(onehot, onehot, zero);
  CHECK(joint0.total == 0.0);

  auto half = Dist({{0.5, 0.5}});
  auto joint = JointLoss(half, half, zero);
  CHECK(joint.mse == 0.0);
  CHECK(std::abs(joint.nll - 0.693147) < 1e-6);
  CHECK(std::abs(joint.total - 0.693147) < 1e-6);

  std::vector<LossBreakdown> batch{{0.1, 0.1, 0.2}, {0.25, 0.15, 0.4}};
  auto mean = MeanLoss(batch);
  CHECK(mean.total == doctest::Approx(0.3));
  CHECK(mean.total == mean.mse + mean.nll);
}

TEST_CASE("joint loss is zero only at one-hot agreement") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::Index tokens = 1 + rng() % 5;
    auto teach = TagDistribution::FromLogits(RandomLogits(rng, tokens));
    auto stud = TagDistribution::FromLogits(RandomLogits(rng, tokens));
    std::vector<int> weak(tokens);
    for (int& w : weak) w = static_cast<int>(rng() % kNumTags);
    auto loss = JointLoss(teach, stud, weak);
    CHECK(loss.mse >= 0.0);
    CHECK(loss.nll > 0.0);
    CHECK(loss.total == loss.mse + loss.nll);
  }
}

TEST_CASE("analytic gradient matches independent finite differences") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::Index tokens = 3 + rng() % 8;
    Eigen::MatrixXd logits = RandomLogits(rng, tokens);
    auto teach = TagDistribution::FromLogits(RandomLogits(rng, tokens, 2.0));
    std::vector<int> weak(tokens);
    for (int& w : weak) w = static_cast<int>(rng() % kNumTags);
    Eigen::MatrixXd analytic = JointLossGradient(logits, teach, weak);
    auto numeric = oracle::FiniteDifferenceGradient(oracle::ToNested(logits),
                                                    oracle::ToNested(teach.probs()), weak);
    for (Eigen::Index t = 0; t < tokens; ++t) {
      for (Eigen::Index k = 0; k < kNumTags; ++k) {
        double a = analytic(t, k), n = numeric[t][k];
        double rel = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
        CHECK(rel < 1e-4);
      }
    }
  }
}

TEST_CASE("nll gradient has the softmax cross-entropy form") {
  // With teach == stud the MSE term and its gradient vanish, leaving
  // (p - onehot) / tokens.
  std::mt19937_64 rng(4);
  Eigen::MatrixXd logits = RandomLogits(rng, 4);
  auto stud = TagDistribution::FromLogits(logits);
  std::vector<int> weak{0, 3, 8, 1};
  Eigen::MatrixXd grad = JointLossGradient(logits, stud, weak);
  for (Eigen::Index t = 0; t < 4; ++t) {
    for (Eigen::Index k = 0; k < kNumTags; ++k) {
      double expected = (stud.probs()(t, k) - (k == weak[t] ? 1.0 : 0.0)) / 4.0;
      CHECK(grad(t, k) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  auto numeric = oracle::FiniteDifferenceGradient(oracle::ToNested(logits),
                                                  oracle::ToNested(stud.probs()), weak);
  for (Eigen::Index t = 0; t < 4; ++t) {
    for (Eigen::Index k = 0; k < kNumTags; ++k) {
      CHECK(grad(t, k) == doctest::Approx(numeric[t][k]).epsilon(1e-6));
    }
  }
}

TEST_CASE("gradient at a confident one-hot student is small") {
  // Near one-hot agreement the point is close to stationary; the value is
  // whatever finite differences say it is.
  Eigen::MatrixXd logits = Eigen::MatrixXd::Zero(2, kNumTags);
  logits(0, 1) = 30.0;
  logits(1, 0) = 30.0;
  auto stud = TagDistribution::FromLogits(logits);
  std::vector<int> weak{1, 0};
  Eigen::MatrixXd grad = JointLossGradient(logits, stud, weak);
  auto numeric = oracle::FiniteDifferenceGradient(oracle::ToNested(logits),
                                                  oracle::ToNested(stud.probs()), weak);
  for (Eigen::Index t = 0; t < 2; ++t) {
    for (Eigen::Index k = 0; k < kNumTags; ++k) {
      CHECK(std::abs(grad(t, k) - numeric[t][k]) < 1e-9);
    }
  }
  CHECK(grad.norm() < 1e-6);
}

TEST_CASE("built-in gradient check agrees") {
  auto report = RunGradientCheck(20, 99);
  CHECK(report.instances == 20);
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("toy student trains on separable data") {
  std::mt19937_64 rng(5);
  std::vector<ToyExample> batch(2);
  const double protos[4][4] = {{3, 0, 0, 0}, {0, 3, 0, 0}, {0, 0, 3, 0}, {0, 0, 0, 3}};
  const int tags[4] = {0, 1, 2, 5};
  std::normal_distribution<double> noise(0.0, 0.2);
  for (auto& ex : batch) {
    ex.features.resize(10, 4);
    for (int t = 0; t < 10; ++t) {
      int c = static_cast<int>(rng() % 4);
      for (int d = 0; d < 4; ++d) ex.features(t, d) = protos[c][d] + noise(rng);
      ex.weak_tags.push_back(tags[c]);
    }
    ex.teacher = TagDistribution::OneHot(ex.weak_tags, kNumTags);
  }
  auto result = TrainToyStudent(batch, 0.5, 200, 1);
  CHECK(result.loss_trace.size() == 200);
  CHECK(result.loss_trace.back() < 0.05);
  CHECK(result.loss_trace.back() == doctest::Approx(EvaluateToyStudent(result.student, batch).total));

  for (const auto& ex : batch) {
    auto probs = result.student.Predict(ex.features).probs();
    for (Eigen::Index t = 0; t < probs.rows(); ++t) {
      CHECK(std::abs(probs.row(t).sum() - 1.0) < 1e-6);
    }
  }

  CHECK(TrainToyStudent(batch, 0.5, 1, 1).loss_trace.size() == 1);
  auto frozen = TrainToyStudent(batch, 0.0, 5, 1).loss_trace;
  for (double v : frozen) CHECK(v == frozen.front());

  auto a = TrainToyStudent(batch, 0.5, 20, 7);
  auto b = TrainToyStudent(batch, 0.5, 20, 7);
  CHECK(a.loss_trace == b.loss_trace);
  CHECK(a.student.weights == b.student.weights);
  for (double w : a.student.weights.reshaped()) CHECK(std::isfinite(w));
}

TEST_CASE("toy student reports divergence with the epoch") {
  std::vector<ToyExample> batch(1);
  batch[0].features = Eigen::MatrixXd::Constant(2, 2, 100.0);
  batch[0].weak_tags = {0, 1};
  batch[0].teacher = TagDistribution::OneHot(batch[0].weak_tags, kNumTags);
  CHECK_THROWS_WITH(TrainToyStudent(batch, 1e308, 5, 1), "training diverged at epoch 1");
  CHECK_THROWS_AS(TrainToyStudent(batch, 0.1, 0, 1), ValidationError);
}

TEST_CASE("teacher file parsing") {
  std::istringstream ok(R"({"id":3,"probs":[[1,0,0,0,0,0,0,0,0],[0.5,0.5,0,0,0,0,0,0,0]]})");
  auto teachers = ParseTeacher(ok);
  CHECK(teachers.at(3).tokens() == 2);

  std::istringstream short_row(R"({"id":0,"probs":[[1,0]]})");
  CHECK_THROWS_AS(ParseTeacher(short_row), ValidationError);
  std::istringstream bad_sum("\n" R"({"id":0,"probs":[[0.5,0,0,0,0,0,0,0,0]]})");
  try {
    ParseTeacher(bad_sum);
    FAIL("expected an error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).rfind("line 2: ", 0) == 0);
  }
}

TEST_CASE("toy example parsing defaults the teacher to one-hot weak tags") {
  std::istringstream in(R"({"id":0,"features":[[1,2],[3,4]],"weak":[0,5]})");
  auto examples = ParseToyExamples(in);
  REQUIRE(examples.size() == 1);
  CHECK(examples[0].teacher.probs()(1, 5) == 1.0);
  std::istringstream bad(R"({"id":0,"features":[[1,2]],"weak":[0,5]})");
  CHECK_THROWS_AS(ParseToyExamples(bad), ValidationError);
}

}  // namespace
}  // namespace weakproj::distill
