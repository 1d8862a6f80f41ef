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

#include "weakproj/tags.h"

#include <string>

#include "weakproj/errors.h"
#include "weakproj/types.h"

namespace weakproj {

std::string_view ToString(EntityType type) {
  switch (type) {
    case EntityType::kPer: return "PER";
    case EntityType::kOrg: return "ORG";
    case EntityType::kLoc: return "LOC";
    case EntityType::kMisc: return "MISC";
  }
  return "?";
}

std::optional<EntityType> ParseEntityType(std::string_view text) {
  for (EntityType type : kAllEntityTypes) {
    if (ToString(type) == text) return type;
  }
  return std::nullopt;
}

int TagIndex(Tag tag) {
  if (tag.is_outside()) return 0;
  int base = 1 + 2 * static_cast<int>(tag.type);
  return tag.kind == Tag::Kind::kBegin ? base : base + 1;
}

Tag TagFromIndex(int index) {
  if (index < 0 || index >= kNumTags) {
    throw ValidationError("tag index out of range: " + std::to_string(index));
  }
  if (index == 0) return Tag::Outside();
  auto type = static_cast<EntityType>((index - 1) / 2);
  return (index - 1) % 2 == 0 ? Tag::Begin(type) : Tag::Inside(type);
}

std::string ToString(Tag tag) {
  if (tag.is_outside()) return "O";
  std::string out = tag.kind == Tag::Kind::kBegin ? "B-" : "I-";
  out += ToString(tag.type);
  return out;
}

std::optional<Tag> ParseTag(std::string_view text) {
  if (text == "O") return Tag::Outside();
  if (text.size() < 3 || text[1] != '-') return std::nullopt;
  auto type = ParseEntityType(text.substr(2));
  if (!type) return std::nullopt;
  if (text[0] == 'B') return Tag::Begin(*type);
  if (text[0] == 'I') return Tag::Inside(*type);
  return std::nullopt;
}

bool IsBioValid(std::span<const Tag> tags) {
  for (std::size_t t = 0; t < tags.size(); ++t) {
    if (tags[t].kind != Tag::Kind::kInside) continue;
    if (t == 0) return false;
    const Tag& prev = tags[t - 1];
    if (prev.is_outside() || prev.type != tags[t].type) return false;
  }
  return true;
}

std::size_t EmbeddingSet::WordCount() const {
  if (level == Granularity::kWord) return static_cast<std::size_t>(vectors.rows());
  return word_map.empty() ? 0 : word_map.back() + 1;
}

}  // namespace weakproj
