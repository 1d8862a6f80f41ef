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

#include "weakproj/pipeline.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "json.hpp"
#include "parallel.h"
#include "weakproj/projection.h"

namespace weakproj::pipeline {
namespace {

using nlohmann::json;

template <class Fn>
auto InStage(Stage stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const IoError& e) {
    throw StageError(stage, e.what(), true);
  } catch (const Error& e) {
    throw StageError(stage, e.what(), false);
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), false);
  }
}

std::string Trim(std::string_view text) {
  auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string_view::npos) return {};
  auto end = text.find_last_not_of(" \t\r");
  return std::string(text.substr(begin, end - begin + 1));
}

double ParseDouble(std::string_view key, const std::string& value) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != value.size()) {
    throw ValidationError("invalid number for " + std::string(key) + ": \"" + value + "\"");
  }
  return v;
}

SentenceStatus ParseStatus(const std::string& text) {
  if (text == "ok") return SentenceStatus::kOk;
  if (text == "zero_entity") return SentenceStatus::kZeroEntity;
  if (text == "uncovered") return SentenceStatus::kUncovered;
  throw ValidationError("unknown sentence status \"" + text + "\"");
}

void RequirePath(const std::filesystem::path& path, const char* flag) {
  if (path.empty()) throw ValidationError(std::string("missing required path: ") + flag);
}

const EmbeddingSet& LookupEmbedding(const io::EmbeddingMap& map, SentenceId id, Side side,
                                    Granularity level, std::size_t tokens) {
  const char* side_name = side == Side::kSource ? "src" : "tgt";
  const char* level_name = level == Granularity::kWord ? "word" : "subword";
  auto it = map.find({id, side});
  if (it == map.end()) {
    throw IoError("missing embeddings for id=" + std::to_string(id) + " side=" + side_name +
                  " level=" + level_name);
  }
  if (it->second.level != level) {
    throw ValidationError("embeddings for id=" + std::to_string(id) + " side=" + side_name +
                          " are not at " + level_name + " level");
  }
  try {
    io::CheckEmbeddingCoversTokens(it->second, tokens);
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(level_name) + " embeddings for id=" + std::to_string(id) +
                          " side=" + side_name + ": " + e.what());
  }
  return it->second;
}

// Intermediate artifacts --------------------------------------------------

void WriteJsonLines(const std::filesystem::path& path, const std::vector<json>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  for (const json& record : records) out << record.dump() << '\n';
  out.flush();
  if (!out) throw IoError("write failed: " + path.string());
}

// Reads an intermediate artifact and checks that its records line up with
// the corpus ids in order.
std::vector<json> ReadArtifact(const std::filesystem::path& path,
                               std::span<const SentencePair> corpus, Stage producer) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("missing intermediate " + path.string() + " (run the " +
                  std::string(ToString(producer)) + " stage first)");
  }
  std::vector<json> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(line_no) +
                            ": invalid JSON: " + e.what());
    }
  }
  bool stale = records.size() != corpus.size();
  for (std::size_t i = 0; !stale && i < records.size(); ++i) {
    const json& id = records[i].is_object() ? records[i].value("id", json()) : json();
    stale = !id.is_number_integer() || id.get<SentenceId>() != corpus[i].id;
  }
  if (stale) {
    throw ValidationError("stale intermediate " + path.string() +
                          ": records do not match the corpus ids");
  }
  return records;
}

json ToJson(const SentenceAlignment& a) {
  json links = json::array();
  for (const align::AlignmentLink& link : a.links) {
    links.push_back({{"src", link.src},
                     {"tgt", link.tgt},
                     {"score", link.score},
                     {"method", align::ToString(link.method)}});
  }
  return {{"id", a.id}, {"status", ToString(a.status)}, {"links", links}, {"uncovered", a.uncovered}};
}

SentenceAlignment AlignmentFromJson(const json& j) {
  SentenceAlignment a;
  a.id = j.at("id").get<SentenceId>();
  a.status = ParseStatus(j.at("status").get<std::string>());
  for (const json& l : j.at("links")) {
    a.links.push_back({l.at("src").get<std::size_t>(), l.at("tgt").get<std::size_t>(),
                       l.at("score").get<double>(),
                       align::ParseLinkMethod(l.at("method").get<std::string>())});
  }
  a.uncovered = j.at("uncovered").get<std::vector<std::size_t>>();
  return a;
}

json ToJson(const SentenceProjection& p) {
  json tags = json::array();
  for (const Tag& tag : p.tags) tags.push_back(ToString(tag));
  json entities = json::array();
  for (const scoring::EntityRecord& e : p.entities) {
    entities.push_back({{"alignment", e.alignment_score}, {"ner", e.ner_score}});
  }
  return {{"id", p.id}, {"status", ToString(p.status)}, {"tags", tags}, {"entities", entities}};
}

SentenceProjection ProjectionFromJson(const json& j) {
  SentenceProjection p;
  p.id = j.at("id").get<SentenceId>();
  p.status = ParseStatus(j.at("status").get<std::string>());
  for (const json& t : j.at("tags")) {
    auto tag = ParseTag(t.get<std::string>());
    if (!tag) throw ValidationError("unknown tag in projected artifact");
    p.tags.push_back(*tag);
  }
  for (const json& e : j.at("entities")) {
    p.entities.push_back({e.at("alignment").get<double>(), e.at("ner").get<double>()});
  }
  return p;
}

json ToJson(const SentenceScoreRecord& s) {
  json record = {{"id", s.id}, {"status", ToString(s.status)}};
  record["score"] = s.status == SentenceStatus::kOk ? json(s.score) : json();
  return record;
}

SentenceScoreRecord ScoreFromJson(const json& j) {
  SentenceScoreRecord s;
  s.id = j.at("id").get<SentenceId>();
  s.status = ParseStatus(j.at("status").get<std::string>());
  if (s.status == SentenceStatus::kOk) s.score = j.at("score").get<double>();
  return s;
}

template <class T, class Fn>
std::vector<T> Decode(const std::vector<json>& records, const std::filesystem::path& path,
                      Fn&& decode) {
  std::vector<T> out;
  out.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      out.push_back(decode(records[i]));
    } catch (const json::exception& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(i + 1) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

template <class T>
void WriteArtifact(const std::filesystem::path& path, std::span<const T> items) {
  std::vector<json> records;
  records.reserve(items.size());
  for (const T& item : items) records.push_back(ToJson(item));
  WriteJsonLines(path, records);
}

struct Inputs {
  std::vector<SentencePair> corpus;
  io::AnnotationMap annotations;
};

Inputs LoadInputs(const PipelineConfig& config, bool need_annotations) {
  return InStage(Stage::kLoad, [&] {
    Inputs inputs;
    RequirePath(config.corpus, "--corpus");
    inputs.corpus = io::ReadParallel(config.corpus);
    if (need_annotations) {
      RequirePath(config.annotations, "--annotations");
      inputs.annotations = io::ReadSourceAnnotations(config.annotations);
      io::CheckAnnotations(inputs.annotations, inputs.corpus);
    }
    return inputs;
  });
}

void ValidateConfig(const PipelineConfig& config) {
  InStage(Stage::kLoad, [&] {
    scoring::KeepCount(1, config.keep_fraction);
    if (!(config.epsilon > 0.0 && config.epsilon < 1.0)) {
      throw ValidationError("epsilon must be in (0, 1)");
    }
    RequirePath(config.out, "--out");
    return 0;
  });
}

std::vector<SentenceAlignment> AlignStage(const Inputs& inputs, const PipelineConfig& config) {
  return InStage(Stage::kAlign, [&] {
    RequirePath(config.word_emb, "--word-emb");
    RequirePath(config.subword_emb, "--subword-emb");
    io::EmbeddingMap word_emb = io::ReadEmbeddings(config.word_emb);
    io::EmbeddingMap subword_emb = io::ReadEmbeddings(config.subword_emb);
    return AlignCorpus(inputs.corpus, inputs.annotations, word_emb, subword_emb, config);
  });
}

}  // namespace

// Config ------------------------------------------------------------------

void ApplyConfigEntry(PipelineConfig& config, std::string_view raw_key, std::string_view raw_value) {
  std::string key = Trim(raw_key);
  std::replace(key.begin(), key.end(), '-', '_');
  const std::string value = Trim(raw_value);
  if (key == "corpus") {
    config.corpus = value;
  } else if (key == "annotations") {
    config.annotations = value;
  } else if (key == "word_emb") {
    config.word_emb = value;
  } else if (key == "subword_emb") {
    config.subword_emb = value;
  } else if (key == "out") {
    config.out = value;
  } else if (key == "keep_fraction") {
    config.keep_fraction = ParseDouble(key, value);
  } else if (key == "epsilon") {
    config.epsilon = ParseDouble(key, value);
  } else if (key == "tag_set") {
    std::vector<EntityType> types;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      auto type = ParseEntityType(Trim(item));
      if (!type) throw ValidationError("unknown entity type in tag_set: \"" + Trim(item) + "\"");
      if (std::find(types.begin(), types.end(), *type) == types.end()) types.push_back(*type);
    }
    if (types.empty()) throw ValidationError("tag_set must not be empty");
    config.tag_set = std::move(types);
  } else if (key == "drop_uncovered") {
    if (value == "true" || value == "1") {
      config.drop_uncovered = true;
    } else if (value == "false" || value == "0") {
      config.drop_uncovered = false;
    } else {
      throw ValidationError("drop_uncovered must be true or false");
    }
  } else {
    throw ValidationError("unknown config key \"" + key + "\"");
  }
}

PipelineConfig ParseConfig(std::istream& in) {
  PipelineConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (Trim(line).empty()) continue;
    auto eq = line.find('=');
    try {
      if (eq == std::string::npos) throw ValidationError("expected key = value");
      ApplyConfigEntry(config, std::string_view(line).substr(0, eq),
                       std::string_view(line).substr(eq + 1));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in = io::OpenInput(path);
  try {
    return ParseConfig(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

std::string_view ToString(Stage stage) {
  switch (stage) {
    case Stage::kLoad: return "load";
    case Stage::kAlign: return "align";
    case Stage::kProject: return "project";
    case Stage::kScore: return "score";
    case Stage::kFilter: return "filter";
  }
  return "?";
}

std::string_view ToString(SentenceStatus status) {
  switch (status) {
    case SentenceStatus::kOk: return "ok";
    case SentenceStatus::kZeroEntity: return "zero_entity";
    case SentenceStatus::kUncovered: return "uncovered";
  }
  return "?";
}

StageError::StageError(Stage stage, const std::string& detail, bool io_failure)
    : Error("stage=" + std::string(ToString(stage)) + ": " + detail),
      stage_(stage),
      io_failure_(io_failure) {}

std::string Summary::ToString() const {
  auto mean = [](double v, std::size_t n) {
    return n == 0 ? std::string("n/a") : io::FormatScore(v);
  };
  std::ostringstream out;
  out << "sentences_read     " << read << '\n'
      << "zero_entity        " << zero_entity << '\n'
      << "dropped_uncovered  " << dropped_uncovered << '\n'
      << "scored             " << scored << '\n'
      << "kept               " << kept << '\n'
      << "mean_score_scored  " << mean(mean_score_scored, scored) << '\n'
      << "mean_score_kept    " << mean(mean_score_kept, kept) << '\n';
  return out.str();
}

// Stages ------------------------------------------------------------------

std::vector<EntitySpan> ActiveSpans(const io::AnnotationMap& annotations, SentenceId id,
                                    const PipelineConfig& config) {
  std::vector<EntitySpan> spans;
  for (const EntitySpan& span : io::SpansFor(annotations, id)) {
    if (std::find(config.tag_set.begin(), config.tag_set.end(), span.label) !=
        config.tag_set.end()) {
      spans.push_back(span);
    }
  }
  return spans;
}

std::vector<SentenceAlignment> AlignCorpus(std::span<const SentencePair> corpus,
                                           const io::AnnotationMap& annotations,
                                           const io::EmbeddingMap& word_emb,
                                           const io::EmbeddingMap& subword_emb,
                                           const PipelineConfig& config) {
  std::vector<SentenceAlignment> out(corpus.size());
  internal::ParallelFor(corpus.size(), [&](std::size_t i) {
    const SentencePair& pair = corpus[i];
    SentenceAlignment& result = out[i];
    result.id = pair.id;
    std::vector<EntitySpan> spans = ActiveSpans(annotations, pair.id, config);
    if (spans.empty()) {
      result.status = SentenceStatus::kZeroEntity;
      return;
    }
    const std::size_t src_len = pair.src_tokens.size();
    const std::size_t tgt_len = pair.tgt_tokens.size();
    const EmbeddingSet& src_word =
        LookupEmbedding(word_emb, pair.id, Side::kSource, Granularity::kWord, src_len);
    const EmbeddingSet& tgt_word =
        LookupEmbedding(word_emb, pair.id, Side::kTarget, Granularity::kWord, tgt_len);
    const EmbeddingSet& src_sub =
        LookupEmbedding(subword_emb, pair.id, Side::kSource, Granularity::kSubword, src_len);
    const EmbeddingSet& tgt_sub =
        LookupEmbedding(subword_emb, pair.id, Side::kTarget, Granularity::kSubword, tgt_len);
    try {
      result.links = align::AlignPair(align::ComputeSimilarity(src_word, tgt_word, config.epsilon),
                                      align::ComputeSimilarity(src_sub, tgt_sub, config.epsilon),
                                      src_sub.word_map, tgt_sub.word_map,
                                      projection::EntityWords(spans));
    } catch (const ValidationError& e) {
      throw ValidationError("id=" + std::to_string(pair.id) + ": " + e.what());
    }
    result.uncovered = projection::CheckEntityCoverage(spans, result.links);
  });
  return out;
}

std::vector<SentenceProjection> ProjectCorpus(std::span<const SentencePair> corpus,
                                              const io::AnnotationMap& annotations,
                                              std::span<const SentenceAlignment> alignments,
                                              const PipelineConfig& config) {
  if (alignments.size() != corpus.size()) {
    throw ValidationError("alignment count does not match the corpus");
  }
  std::vector<SentenceProjection> out(corpus.size());
  internal::ParallelFor(corpus.size(), [&](std::size_t i) {
    const SentencePair& pair = corpus[i];
    const SentenceAlignment& aligned = alignments[i];
    SentenceProjection& result = out[i];
    result.id = pair.id;
    if (aligned.id != pair.id) throw ValidationError("alignment ids out of order");
    if (aligned.status != SentenceStatus::kOk) {
      result.status = aligned.status;
      return;
    }
    if (!aligned.uncovered.empty() && config.drop_uncovered) {
      result.status = SentenceStatus::kUncovered;
      return;
    }
    std::vector<EntitySpan> spans = ActiveSpans(annotations, pair.id, config);
    auto projected = projection::ProjectTags(spans, aligned.links, pair.tgt_tokens.size());
    result.entities = scoring::CollectEntityRecords(spans, projected);
    if (result.entities.empty()) {
      result.status = SentenceStatus::kUncovered;
      return;
    }
    result.tags = projection::ToBio(projected);
  });
  return out;
}

std::vector<SentenceScoreRecord> ScoreCorpus(std::span<const SentenceProjection> projections) {
  std::vector<SentenceScoreRecord> out(projections.size());
  internal::ParallelFor(projections.size(), [&](std::size_t i) {
    out[i].id = projections[i].id;
    out[i].status = projections[i].status;
    if (out[i].status == SentenceStatus::kOk) {
      out[i].score = scoring::SentenceScore(projections[i].entities);
    }
  });
  return out;
}

FilterOutput FilterCorpus(std::span<const SentencePair> corpus,
                          std::span<const SentenceProjection> projections,
                          std::span<const SentenceScoreRecord> scores,
                          const PipelineConfig& config) {
  if (projections.size() != corpus.size() || scores.size() != corpus.size()) {
    throw ValidationError("stage outputs do not match the corpus");
  }
  FilterOutput output;
  Summary& summary = output.summary;
  summary.read = corpus.size();
  std::vector<scoring::ScoredSentence> scored;
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (projections[i].id != corpus[i].id || scores[i].id != corpus[i].id ||
        projections[i].status != scores[i].status) {
      throw ValidationError("stage outputs out of step at id " + std::to_string(corpus[i].id));
    }
    switch (scores[i].status) {
      case SentenceStatus::kZeroEntity: ++summary.zero_entity; continue;
      case SentenceStatus::kUncovered: ++summary.dropped_uncovered; continue;
      case SentenceStatus::kOk: break;
    }
    scoring::ScoredSentence s;
    s.weak.id = corpus[i].id;
    s.weak.tgt_tokens = corpus[i].tgt_tokens;
    s.weak.tags = projections[i].tags;
    s.weak.sentence_score = scores[i].score;
    s.entity_records = projections[i].entities;
    io::ValidateWeakSentence(s.weak);
    summary.mean_score_scored += s.weak.sentence_score;
    scored.push_back(std::move(s));
  }
  summary.scored = scored.size();
  if (summary.scored > 0) summary.mean_score_scored /= static_cast<double>(summary.scored);

  scoring::FilterResult filtered = scoring::FilterTop(std::move(scored), config.keep_fraction);
  summary.kept = filtered.kept.size();
  for (scoring::ScoredSentence& s : filtered.kept) {
    summary.mean_score_kept += s.weak.sentence_score;
    output.kept.push_back(std::move(s.weak));
  }
  if (summary.kept > 0) summary.mean_score_kept /= static_cast<double>(summary.kept);
  return output;
}

Summary RunGenerate(const PipelineConfig& config) {
  ValidateConfig(config);
  Inputs inputs = LoadInputs(config, true);
  auto alignments = AlignStage(inputs, config);
  auto projections = InStage(Stage::kProject, [&] {
    return ProjectCorpus(inputs.corpus, inputs.annotations, alignments, config);
  });
  auto scores = InStage(Stage::kScore, [&] { return ScoreCorpus(projections); });
  return InStage(Stage::kFilter, [&] {
    FilterOutput output = FilterCorpus(inputs.corpus, projections, scores, config);
    io::WriteConll(output.kept, config.out);
    return output.summary;
  });
}

std::filesystem::path ArtifactPath(const PipelineConfig& config, Stage stage) {
  std::string suffix;
  switch (stage) {
    case Stage::kAlign: suffix = ".links.jsonl"; break;
    case Stage::kProject: suffix = ".projected.jsonl"; break;
    case Stage::kScore: suffix = ".scored.jsonl"; break;
    case Stage::kFilter: suffix = ".kept.jsonl"; break;
    case Stage::kLoad: throw ValidationError("the load stage has no artifact");
  }
  std::filesystem::path path = config.out;
  path += suffix;
  return path;
}

std::filesystem::path RunStage(Stage stage, const PipelineConfig& config, Summary* summary) {
  ValidateConfig(config);
  const std::filesystem::path artifact = InStage(stage, [&] { return ArtifactPath(config, stage); });
  switch (stage) {
    case Stage::kLoad:
      break;
    case Stage::kAlign: {
      Inputs inputs = LoadInputs(config, true);
      auto alignments = AlignStage(inputs, config);
      InStage(stage, [&] {
        WriteArtifact<SentenceAlignment>(artifact, alignments);
        return 0;
      });
      break;
    }
    case Stage::kProject: {
      Inputs inputs = LoadInputs(config, true);
      InStage(stage, [&] {
        auto path = ArtifactPath(config, Stage::kAlign);
        auto alignments = Decode<SentenceAlignment>(ReadArtifact(path, inputs.corpus, Stage::kAlign),
                                                    path, AlignmentFromJson);
        auto projections = ProjectCorpus(inputs.corpus, inputs.annotations, alignments, config);
        WriteArtifact<SentenceProjection>(artifact, projections);
        return 0;
      });
      break;
    }
    case Stage::kScore: {
      Inputs inputs = LoadInputs(config, false);
      InStage(stage, [&] {
        auto path = ArtifactPath(config, Stage::kProject);
        auto projections = Decode<SentenceProjection>(
            ReadArtifact(path, inputs.corpus, Stage::kProject), path, ProjectionFromJson);
        auto scores = ScoreCorpus(projections);
        WriteArtifact<SentenceScoreRecord>(artifact, scores);
        return 0;
      });
      break;
    }
    case Stage::kFilter: {
      Inputs inputs = LoadInputs(config, false);
      InStage(stage, [&] {
        auto projected_path = ArtifactPath(config, Stage::kProject);
        auto scored_path = ArtifactPath(config, Stage::kScore);
        auto projections = Decode<SentenceProjection>(
            ReadArtifact(projected_path, inputs.corpus, Stage::kProject), projected_path,
            ProjectionFromJson);
        auto scores = Decode<SentenceScoreRecord>(
            ReadArtifact(scored_path, inputs.corpus, Stage::kScore), scored_path, ScoreFromJson);
        FilterOutput output = FilterCorpus(inputs.corpus, projections, scores, config);
        io::WriteConll(output.kept, config.out);
        std::vector<json> kept;
        for (const WeakSentence& s : output.kept) {
          kept.push_back({{"id", s.id}, {"score", s.sentence_score}});
        }
        WriteJsonLines(artifact, kept);
        if (summary) *summary = output.summary;
        return 0;
      });
      break;
    }
  }
  return artifact;
}

}  // namespace weakproj::pipeline
