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

#ifndef WEAKPROJ_PIPELINE_H_
#define WEAKPROJ_PIPELINE_H_

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "weakproj/alignment.h"
#include "weakproj/corpus_io.h"
#include "weakproj/errors.h"
#include "weakproj/scoring.h"
#include "weakproj/types.h"

// End-to-end weak data generation: align -> project -> score -> filter.
//
// Every stage can also run on its own. Stages exchange JSON-lines artifacts
// named after the output file:
//
//   <out>.links.jsonl      align
//   <out>.projected.jsonl  project
//   <out>.scored.jsonl     score
//   <out>.kept.jsonl       filter (plus the CoNLL file itself at <out>)
namespace weakproj::pipeline {

struct PipelineConfig {
  double keep_fraction = scoring::kDefaultKeepFraction;
  double epsilon = align::kDefaultEpsilon;
  std::vector<EntityType> tag_set{kAllEntityTypes.begin(), kAllEntityTypes.end()};
  bool drop_uncovered = true;

  std::filesystem::path corpus;
  std::filesystem::path annotations;
  std::filesystem::path word_emb;
  std::filesystem::path subword_emb;
  std::filesystem::path out;
};

// key = value lines; '#' starts a comment. Keys: corpus, annotations,
// word_emb, subword_emb, out, keep_fraction, epsilon, tag_set (comma
// separated), drop_uncovered. Dashes in keys are read as underscores.
void ApplyConfigEntry(PipelineConfig& config, std::string_view key, std::string_view value);
PipelineConfig ParseConfig(std::istream& in);
PipelineConfig LoadConfig(const std::filesystem::path& path);

enum class Stage { kLoad, kAlign, kProject, kScore, kFilter };

std::string_view ToString(Stage stage);

// An error raised while a stage ran. what() reads "stage=<name>: <detail>".
class StageError : public Error {
 public:
  StageError(Stage stage, const std::string& detail, bool io_failure);

  Stage stage() const { return stage_; }
  bool io_failure() const { return io_failure_; }
  // 2 for I/O failures, 1 for validation failures.
  int exit_code() const { return io_failure_ ? 2 : 1; }

 private:
  Stage stage_;
  bool io_failure_;
};

enum class SentenceStatus { kOk, kZeroEntity, kUncovered };

std::string_view ToString(SentenceStatus status);

struct SentenceAlignment {
  SentenceId id = 0;
  SentenceStatus status = SentenceStatus::kOk;
  std::vector<align::AlignmentLink> links;
  std::vector<std::size_t> uncovered;
};

struct SentenceProjection {
  SentenceId id = 0;
  SentenceStatus status = SentenceStatus::kOk;
  std::vector<Tag> tags;
  std::vector<scoring::EntityRecord> entities;
};

struct SentenceScoreRecord {
  SentenceId id = 0;
  SentenceStatus status = SentenceStatus::kOk;
  double score = 0.0;  // meaningful only for kOk
};

struct Summary {
  std::size_t read = 0;
  std::size_t zero_entity = 0;
  std::size_t dropped_uncovered = 0;
  std::size_t scored = 0;
  std::size_t kept = 0;
  double mean_score_scored = 0.0;
  double mean_score_kept = 0.0;

  std::string ToString() const;
};

// Spans of one sentence restricted to the configured tag set.
std::vector<EntitySpan> ActiveSpans(const io::AnnotationMap& annotations, SentenceId id,
                                    const PipelineConfig& config);

std::vector<SentenceAlignment> AlignCorpus(std::span<const SentencePair> corpus,
                                           const io::AnnotationMap& annotations,
                                           const io::EmbeddingMap& word_emb,
                                           const io::EmbeddingMap& subword_emb,
                                           const PipelineConfig& config);

std::vector<SentenceProjection> ProjectCorpus(std::span<const SentencePair> corpus,
                                              const io::AnnotationMap& annotations,
                                              std::span<const SentenceAlignment> alignments,
                                              const PipelineConfig& config);

std::vector<SentenceScoreRecord> ScoreCorpus(std::span<const SentenceProjection> projections);

struct FilterOutput {
  std::vector<WeakSentence> kept;
  Summary summary;
};

FilterOutput FilterCorpus(std::span<const SentencePair> corpus,
                          std::span<const SentenceProjection> projections,
                          std::span<const SentenceScoreRecord> scores,
                          const PipelineConfig& config);

// Runs every stage in memory and writes the CoNLL file to config.out.
Summary RunGenerate(const PipelineConfig& config);

std::filesystem::path ArtifactPath(const PipelineConfig& config, Stage stage);

// Runs one stage from its inputs or upstream artifacts and writes its
// artifact. The filter stage also writes the CoNLL file and fills summary.
std::filesystem::path RunStage(Stage stage, const PipelineConfig& config,
                               Summary* summary = nullptr);

}  // namespace weakproj::pipeline

#endif  // WEAKPROJ_PIPELINE_H_
