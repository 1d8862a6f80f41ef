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

// Python bindings for the weakproj core.

#include <cstdint>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "weakproj/alignment.h"
#include "weakproj/corpus_io.h"
#include "weakproj/distill.h"
#include "weakproj/errors.h"
#include "weakproj/pipeline.h"
#include "weakproj/projection.h"
#include "weakproj/scoring.h"
#include "weakproj/tags.h"

namespace py = pybind11;

namespace weakproj {
namespace {

EmbeddingSet Words(const Eigen::MatrixXd& vectors) {
  EmbeddingSet set;
  set.level = Granularity::kWord;
  set.vectors = vectors;
  return set;
}

std::vector<std::string> TagStrings(const std::vector<Tag>& tags) {
  std::vector<std::string> out;
  out.reserve(tags.size());
  for (const Tag& t : tags) out.emplace_back(ToString(t));
  return out;
}

py::dict SummaryDict(const pipeline::Summary& s) {
  py::dict d;
  d["read"] = s.read;
  d["zero_entity"] = s.zero_entity;
  d["dropped_uncovered"] = s.dropped_uncovered;
  d["scored"] = s.scored;
  d["kept"] = s.kept;
  d["mean_score_scored"] = s.mean_score_scored;
  d["mean_score_kept"] = s.mean_score_kept;
  return d;
}

pipeline::Stage ParseStage(const std::string& name) {
  for (auto stage : {pipeline::Stage::kAlign, pipeline::Stage::kProject, pipeline::Stage::kScore,
                     pipeline::Stage::kFilter}) {
    if (pipeline::ToString(stage) == name) return stage;
  }
  throw ValidationError("unknown stage \"" + name + "\"");
}

}  // namespace
}  // namespace weakproj

PYBIND11_MODULE(_core, m) {
  using namespace weakproj;
  m.doc() = "Weak NER label projection across parallel sentences.";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  static py::exception<ValidationError> validation_error(m, "ValidationError", error.ptr());
  static py::exception<IoError> io_error(m, "IoError", error.ptr());
  static py::exception<pipeline::StageError> stage_error(m, "StageError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pipeline::StageError& e) {
      // Raise an instance carrying the stage name and CLI exit code.
      py::object exc = py::handle(stage_error.ptr())(e.what());
      exc.attr("stage") = std::string(pipeline::ToString(e.stage()));
      exc.attr("exit_code") = e.exit_code();
      PyErr_SetObject(stage_error.ptr(), exc.ptr());
    } catch (const ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const IoError& e) {
      py::set_error(io_error, e.what());
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.attr("NUM_TAGS") = kNumTags;
  m.attr("DEFAULT_EPSILON") = align::kDefaultEpsilon;
  m.attr("DEFAULT_KEEP_FRACTION") = scoring::kDefaultKeepFraction;

  py::class_<align::AlignmentLink>(m, "Link")
      .def(py::init([](std::size_t src, std::size_t tgt, double score, const std::string& method) {
             return align::AlignmentLink{src, tgt, score, align::ParseLinkMethod(method)};
           }),
           py::arg("src"), py::arg("tgt"), py::arg("score"), py::arg("method") = "mutual")
      .def_readonly("src", &align::AlignmentLink::src)
      .def_readonly("tgt", &align::AlignmentLink::tgt)
      .def_readonly("score", &align::AlignmentLink::score)
      .def_property_readonly("method",
                             [](const align::AlignmentLink& l) {
                               return std::string(align::ToString(l.method));
                             })
      .def("__eq__", [](const align::AlignmentLink& a,
                        const align::AlignmentLink& b) { return a == b; })
      .def("__repr__", [](const align::AlignmentLink& l) {
        return "Link(" + align::FormatLinks(std::vector<align::AlignmentLink>{l}) + ")";
      });

  py::class_<EntitySpan>(m, "Span")
      .def(py::init([](std::size_t start, std::size_t end, const std::string& label,
                       double ner_score) {
             auto type = ParseEntityType(label);
             if (!type) throw ValidationError("unknown label \"" + label + "\"");
             return EntitySpan{start, end, *type, ner_score};
           }),
           py::arg("start"), py::arg("end"), py::arg("label"), py::arg("ner_score") = 1.0)
      .def_readonly("start", &EntitySpan::start)
      .def_readonly("end", &EntitySpan::end)
      .def_property_readonly("label",
                             [](const EntitySpan& s) { return std::string(ToString(s.label)); })
      .def_readonly("ner_score", &EntitySpan::ner_score);

  m.def(
      "similarity",
      [](const Eigen::MatrixXd& src, const Eigen::MatrixXd& tgt, double epsilon) {
        return align::ComputeSimilarity(Words(src), Words(tgt), epsilon).values();
      },
      py::arg("src"), py::arg("tgt"), py::arg("epsilon") = align::kDefaultEpsilon,
      "(cos + 1) / 2 similarity between word vectors, clamped to [epsilon, 1].");
  m.def(
      "mutual_argmax_align",
      [](const Eigen::MatrixXd& scores) { return align::MutualArgmaxAlign(scores); },
      py::arg("scores"));
  m.def(
      "solve_max_weight_matching",
      [](const Eigen::MatrixXd& weights) { return align::SolveMaxWeightMatching(weights); },
      py::arg("weights"));
  m.def(
      "total_weight",
      [](const std::vector<align::AlignmentLink>& links) { return align::TotalWeight(links); },
      py::arg("links"));

  m.def(
      "project_tags",
      [](const std::vector<EntitySpan>& spans, const std::vector<align::AlignmentLink>& links,
         std::size_t tgt_len) {
        return TagStrings(projection::ToBio(projection::ProjectTags(spans, links, tgt_len)));
      },
      py::arg("spans"), py::arg("links"), py::arg("tgt_len"),
      "Projects source spans through links and returns BIO tag strings.");
  m.def(
      "is_bio_valid",
      [](const std::vector<std::string>& tags) {
        std::vector<Tag> parsed;
        for (const auto& t : tags) {
          auto tag = ParseTag(t);
          if (!tag) return false;
          parsed.push_back(*tag);
        }
        return IsBioValid(parsed);
      },
      py::arg("tags"));

  m.def(
      "sentence_score",
      [](const std::vector<std::pair<double, double>>& records) {
        std::vector<scoring::EntityRecord> recs;
        for (const auto& [a, n] : records) recs.push_back({a, n});
        return scoring::SentenceScore(recs);
      },
      py::arg("records"), "Mean log(alignment * ner) over (alignment, ner) pairs.");
  m.def("keep_count", &scoring::KeepCount, py::arg("n"),
        py::arg("fraction") = scoring::kDefaultKeepFraction);
  m.def(
      "filter_top",
      [](const std::vector<std::pair<SentenceId, double>>& scored, double fraction) {
        std::vector<scoring::ScoredSentence> batch;
        for (const auto& [id, score] : scored) {
          scoring::ScoredSentence s;
          s.weak.id = id;
          s.weak.sentence_score = score;
          batch.push_back(std::move(s));
        }
        std::vector<SentenceId> kept;
        for (const auto& s : scoring::FilterTop(std::move(batch), fraction).kept) {
          kept.push_back(s.weak.id);
        }
        return kept;
      },
      py::arg("scored"), py::arg("fraction") = scoring::kDefaultKeepFraction,
      "Returns the ids kept from (id, score) pairs, in id order.");

  m.def("softmax", &distill::Softmax, py::arg("logits"));
  m.def(
      "joint_loss",
      [](const Eigen::MatrixXd& teacher, const Eigen::MatrixXd& student,
         const std::vector<int>& weak) {
        auto loss = distill::JointLoss(distill::TagDistribution(teacher),
                                       distill::TagDistribution(student), weak);
        return py::make_tuple(loss.mse, loss.nll, loss.total);
      },
      py::arg("teacher"), py::arg("student"), py::arg("weak_tags"),
      "Returns (mse, nll, total) for probability matrices.");
  m.def(
      "joint_loss_gradient",
      [](const Eigen::MatrixXd& logits, const Eigen::MatrixXd& teacher,
         const std::vector<int>& weak) {
        return distill::JointLossGradient(logits, distill::TagDistribution(teacher), weak);
      },
      py::arg("logits"), py::arg("teacher"), py::arg("weak_tags"));
  m.def(
      "gradient_check",
      [](std::size_t instances, std::uint64_t seed) {
        return distill::RunGradientCheck(instances, seed).max_rel_error;
      },
      py::arg("instances") = 100, py::arg("seed") = 1,
      "Largest relative error between analytic and numeric gradients.");
  m.def(
      "train_toy_student",
      [](const std::filesystem::path& path, double lr, int epochs, std::uint64_t seed) {
        auto examples = distill::ReadToyExamples(path);
        return distill::TrainToyStudent(examples, lr, epochs, seed).loss_trace;
      },
      py::arg("path"), py::arg("lr") = 0.5, py::arg("epochs") = 200, py::arg("seed") = 1,
      "Trains the toy student on a file and returns the per-epoch loss trace.");

  py::class_<pipeline::PipelineConfig>(m, "Config")
      .def(py::init<>())
      .def_static("load", &pipeline::LoadConfig, py::arg("path"))
      .def_readwrite("keep_fraction", &pipeline::PipelineConfig::keep_fraction)
      .def_readwrite("epsilon", &pipeline::PipelineConfig::epsilon)
      .def_readwrite("drop_uncovered", &pipeline::PipelineConfig::drop_uncovered)
      .def_readwrite("corpus", &pipeline::PipelineConfig::corpus)
      .def_readwrite("annotations", &pipeline::PipelineConfig::annotations)
      .def_readwrite("word_emb", &pipeline::PipelineConfig::word_emb)
      .def_readwrite("subword_emb", &pipeline::PipelineConfig::subword_emb)
      .def_readwrite("out", &pipeline::PipelineConfig::out)
      .def_property(
          "tag_set",
          [](const pipeline::PipelineConfig& c) {
            std::vector<std::string> out;
            for (EntityType t : c.tag_set) out.emplace_back(ToString(t));
            return out;
          },
          [](pipeline::PipelineConfig& c, const std::vector<std::string>& labels) {
            std::string joined;
            for (const auto& l : labels) joined += (joined.empty() ? "" : ",") + l;
            pipeline::ApplyConfigEntry(c, "tag_set", joined);
          })
      .def("set", [](pipeline::PipelineConfig& c, const std::string& key,
                     const std::string& value) { pipeline::ApplyConfigEntry(c, key, value); });

  m.def(
      "generate",
      [](const pipeline::PipelineConfig& config) {
        return SummaryDict(pipeline::RunGenerate(config));
      },
      py::arg("config"), "Runs every stage in memory and writes the CoNLL file.");
  m.def(
      "run_stage",
      [](const std::string& stage, const pipeline::PipelineConfig& config) {
        pipeline::Summary summary;
        auto path = pipeline::RunStage(ParseStage(stage), config, &summary);
        return py::make_tuple(path, stage == "filter" ? py::object(SummaryDict(summary))
                                                      : py::object(py::none()));
      },
      py::arg("stage"), py::arg("config"),
      "Runs one of align/project/score/filter; returns (artifact, summary or None).");

  m.def(
      "read_conll",
      [](const std::filesystem::path& path) {
        py::list out;
        for (const WeakSentence& s : io::ReadConll(path)) {
          py::dict d;
          d["id"] = s.id;
          d["tokens"] = s.tgt_tokens;
          d["tags"] = TagStrings(s.tags);
          d["score"] = s.sentence_score;
          out.append(d);
        }
        return out;
      },
      py::arg("path"));
}
