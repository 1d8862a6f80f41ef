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

#ifndef WEAKPROJ_TESTS_SUPPORT_FIXTURE_H_
#define WEAKPROJ_TESTS_SUPPORT_FIXTURE_H_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "weakproj/pipeline.h"

#ifndef WEAKPROJ_FIXTURE_DIR
#error "WEAKPROJ_FIXTURE_DIR must be defined"
#endif

namespace weakproj::testing {

inline std::filesystem::path FixtureDir() { return WEAKPROJ_FIXTURE_DIR; }

// A scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("weakproj_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline pipeline::PipelineConfig FixtureConfig(const std::filesystem::path& out) {
  pipeline::PipelineConfig config;
  config.corpus = FixtureDir() / "corpus.tsv";
  config.annotations = FixtureDir() / "annotations.jsonl";
  config.word_emb = FixtureDir() / "word_emb.jsonl";
  config.subword_emb = FixtureDir() / "subword_emb.jsonl";
  config.out = out;
  return config;
}

inline std::string Slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace weakproj::testing

#endif  // WEAKPROJ_TESTS_SUPPORT_FIXTURE_H_
