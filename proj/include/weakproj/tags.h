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

#ifndef WEAKPROJ_TAGS_H_
#define WEAKPROJ_TAGS_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace weakproj {

// CoNLL-2003 entity inventory. The enumerator order is also the fixed
// tie-break order used when projected labels conflict.
enum class EntityType : std::uint8_t { kPer = 0, kOrg = 1, kLoc = 2, kMisc = 3 };

inline constexpr std::array<EntityType, 4> kAllEntityTypes = {
    EntityType::kPer, EntityType::kOrg, EntityType::kLoc, EntityType::kMisc};

std::string_view ToString(EntityType type);
std::optional<EntityType> ParseEntityType(std::string_view text);

// A BIO tag. Dense indices: O = 0, then B-X = 1 + 2*X, I-X = 2 + 2*X
// for X in PER, ORG, LOC, MISC, giving 9 tags total.
struct Tag {
  enum class Kind : std::uint8_t { kOutside, kBegin, kInside };

  Kind kind = Kind::kOutside;
  EntityType type = EntityType::kPer;  // ignored when kind == kOutside

  static constexpr Tag Outside() { return {}; }
  static constexpr Tag Begin(EntityType t) { return {Kind::kBegin, t}; }
  static constexpr Tag Inside(EntityType t) { return {Kind::kInside, t}; }

  bool is_outside() const { return kind == Kind::kOutside; }

  friend bool operator==(const Tag& a, const Tag& b) {
    if (a.kind != b.kind) return false;
    return a.kind == Kind::kOutside || a.type == b.type;
  }
};

inline constexpr int kNumTags = 9;

int TagIndex(Tag tag);
Tag TagFromIndex(int index);  // throws ValidationError when out of range
std::string ToString(Tag tag);
std::optional<Tag> ParseTag(std::string_view text);

// True when no I-X follows O, a different type, or the sequence start.
bool IsBioValid(std::span<const Tag> tags);

}  // namespace weakproj

#endif  // WEAKPROJ_TAGS_H_
