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

// weakproj: generate weakly labeled NER data by projecting source entities
// across word alignments.
//
//   weakproj gen --corpus c.tsv --annotations a.jsonl --word-emb w.jsonl \
//                --subword-emb s.jsonl --out weak.conll
//
// The stages can also be run one at a time (align, project, score, filter)
// with the same flags; each writes <out>.<stage>.jsonl next to the output.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "weakproj/corpus_io.h"
#include "weakproj/distill.h"
#include "weakproj/errors.h"
#include "weakproj/pipeline.h"

namespace {

using weakproj::pipeline::PipelineConfig;
using weakproj::pipeline::Stage;

constexpr double kGradientTolerance = 1e-4;

struct PipelineFlags {
  std::string config;
  std::map<std::string, std::string> values;
  bool no_drop_uncovered = false;
};

void AddPipelineFlags(CLI::App* cmd, PipelineFlags& flags) {
  cmd->add_option("--config", flags.config, "key=value config file; flags override it");
  for (const char* name : {"corpus", "annotations", "word-emb", "subword-emb", "out",
                           "keep-fraction", "epsilon", "tag-set"}) {
    cmd->add_option(std::string("--") + name, flags.values[name]);
  }
  cmd->get_option("--corpus")->description("parallel corpus (id<TAB>src<TAB>tgt)");
  cmd->get_option("--annotations")->description("source entity spans, JSON lines");
  cmd->get_option("--word-emb")->description("word-level embeddings, JSON lines");
  cmd->get_option("--subword-emb")->description("subword-level embeddings, JSON lines");
  cmd->get_option("--out")->description("weak CoNLL output path");
  cmd->get_option("--keep-fraction")->description("fraction of scored sentences to keep (default 0.4)");
  cmd->get_option("--epsilon")->description("lower clamp for alignment scores (default 1e-6)");
  cmd->get_option("--tag-set")->description("comma-separated entity types to project");
  cmd->add_flag("--no-drop-uncovered", flags.no_drop_uncovered,
                "keep sentences whose entity words stay unaligned");
}

PipelineConfig BuildConfig(CLI::App* cmd, const PipelineFlags& flags) {
  PipelineConfig config;
  if (!flags.config.empty()) config = weakproj::pipeline::LoadConfig(flags.config);
  for (const auto& [name, value] : flags.values) {
    if (cmd->get_option("--" + name)->count() > 0) {
      weakproj::pipeline::ApplyConfigEntry(config, name, value);
    }
  }
  if (flags.no_drop_uncovered) config.drop_uncovered = false;
  return config;
}

int RunDistillCheck(std::size_t instances, std::uint64_t seed, const std::string& teacher_path,
                    const std::string& weak_path, const std::string& toy_path, double lr,
                    int epochs) {
  namespace distill = weakproj::distill;
  distill::GradientCheckReport report = distill::RunGradientCheck(instances, seed);
  std::printf("random_instances   %zu\n", report.instances);
  double worst = report.max_rel_error;

  if (!teacher_path.empty() || !weak_path.empty()) {
    if (teacher_path.empty() || weak_path.empty()) {
      throw weakproj::ValidationError("--teacher and --weak must be given together");
    }
    auto teachers = distill::ReadTeacher(teacher_path);
    std::vector<distill::TagDistribution> batch;
    std::vector<std::vector<int>> weak_tags;
    for (const weakproj::WeakSentence& s : weakproj::io::ReadConll(weak_path)) {
      auto it = teachers.find(s.id);
      if (it == teachers.end()) {
        throw weakproj::ValidationError("no teacher distribution for id " + std::to_string(s.id));
      }
      if (it->second.tokens() != static_cast<Eigen::Index>(s.tags.size())) {
        throw weakproj::ValidationError("teacher token count differs for id " + std::to_string(s.id));
      }
      std::vector<int> tags;
      for (const weakproj::Tag& tag : s.tags) tags.push_back(weakproj::TagIndex(tag));
      batch.push_back(it->second);
      weak_tags.push_back(std::move(tags));
    }
    distill::GradientCheckReport file_report = distill::RunGradientCheck(batch, weak_tags, seed);
    std::printf("teacher_instances  %zu\n", file_report.instances);
    worst = std::max(worst, file_report.max_rel_error);
  }

  std::printf("max_rel_error      %.3e\n", worst);

  if (!toy_path.empty()) {
    auto examples = distill::ReadToyExamples(toy_path);
    distill::TrainResult trained = distill::TrainToyStudent(examples, lr, epochs, seed);
    distill::LossBreakdown final_loss = distill::EvaluateToyStudent(trained.student, examples);
    std::printf("toy_epochs         %d\n", epochs);
    std::printf("toy_final_mse      %.6f\n", final_loss.mse);
    std::printf("toy_final_nll      %.6f\n", final_loss.nll);
    std::printf("toy_final_total    %.6f\n", final_loss.total);
  }

  if (!(worst < kGradientTolerance)) {
    std::fprintf(stderr, "gradient check failed: max relative error %.3e >= %.0e\n", worst,
                 kGradientTolerance);
    return 1;
  }
  return 0;
}

int PrintLinks(const std::string& path) {
  std::ifstream in = weakproj::io::OpenInput(path);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto record = nlohmann::json::parse(line);
    std::vector<weakproj::align::AlignmentLink> links;
    for (const auto& l : record.at("links")) {
      links.push_back({l.at("src").get<std::size_t>(), l.at("tgt").get<std::size_t>(),
                       l.at("score").get<double>(),
                       weakproj::align::ParseLinkMethod(l.at("method").get<std::string>())});
    }
    std::cout << record.at("id").get<weakproj::SentenceId>() << '\t'
              << weakproj::align::FormatLinks(links) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Weakly labeled NER data by annotation projection"};
  app.require_subcommand(1);

  struct StageCommand {
    CLI::App* cmd;
    std::optional<Stage> stage;  // empty for gen
    PipelineFlags flags;
  };
  std::vector<StageCommand> stage_commands;
  stage_commands.reserve(5);
  stage_commands.push_back({app.add_subcommand("gen", "run the whole pipeline"), std::nullopt, {}});
  stage_commands.push_back({app.add_subcommand("align", "write <out>.links.jsonl"), Stage::kAlign, {}});
  stage_commands.push_back({app.add_subcommand("project", "write <out>.projected.jsonl"), Stage::kProject, {}});
  stage_commands.push_back({app.add_subcommand("score", "write <out>.scored.jsonl"), Stage::kScore, {}});
  stage_commands.push_back({app.add_subcommand("filter", "write <out> and <out>.kept.jsonl"), Stage::kFilter, {}});
  for (StageCommand& sc : stage_commands) AddPipelineFlags(sc.cmd, sc.flags);

  CLI::App* check = app.add_subcommand("distill-check", "verify joint-loss gradients");
  std::size_t instances = 100;
  std::uint64_t seed = 1;
  std::string teacher_path, weak_path, toy_path;
  double lr = 0.5;
  int epochs = 200;
  check->add_option("--instances", instances, "random instances to check")->capture_default_str();
  check->add_option("--seed", seed, "random seed")->capture_default_str();
  check->add_option("--teacher", teacher_path, "teacher distributions, JSON lines");
  check->add_option("--weak", weak_path, "weak CoNLL file paired with --teacher");
  check->add_option("--toy", toy_path, "toy training data; trains the linear student");
  check->add_option("--lr", lr, "toy learning rate")->capture_default_str();
  check->add_option("--epochs", epochs, "toy epochs")->capture_default_str();

  CLI::App* show = app.add_subcommand("show-links", "print a links artifact as src-tgt:score:method");
  std::string links_path;
  show->add_option("links", links_path, "links artifact")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (check->parsed()) {
      return RunDistillCheck(instances, seed, teacher_path, weak_path, toy_path, lr, epochs);
    }
    if (show->parsed()) return PrintLinks(links_path);
    for (StageCommand& sc : stage_commands) {
      if (!sc.cmd->parsed()) continue;
      PipelineConfig config = BuildConfig(sc.cmd, sc.flags);
      weakproj::pipeline::Summary summary;
      if (!sc.stage) {
        summary = weakproj::pipeline::RunGenerate(config);
        std::cout << summary.ToString();
      } else {
        auto artifact = weakproj::pipeline::RunStage(*sc.stage, config, &summary);
        std::cout << "wrote " << artifact.string() << '\n';
        if (*sc.stage == Stage::kFilter) {
          std::cout << "wrote " << config.out.string() << '\n' << summary.ToString();
        }
      }
      return 0;
    }
  } catch (const weakproj::pipeline::StageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.exit_code();
  } catch (const weakproj::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
