// Copyright 2026 The pcdgen Authors
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

#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace pcdgen {

using IdSet = std::set<int>;

enum class SegmentKind { kMotion, kSkill };

// Frames are 1-based and inclusive. Single-arm skills use `hand`; bimanual
// skills use `left_hand` and `right_hand`.
struct Segment {
  SegmentKind kind = SegmentKind::kMotion;
  int start_frame = 1;
  int end_frame = 1;
  IdSet target;
  IdSet hand;
  IdSet left_hand;
  IdSet right_hand;

  bool is_skill() const { return kind == SegmentKind::kSkill; }
  int length() const { return end_frame - start_frame + 1; }
  // Union of every in-hand set.
  IdSet held() const;
  // Held by arm `arm` (0 = left / only arm, 1 = right).
  const IdSet& held_by(int arm) const;
  // target ∪ held(): the group moved together by one transform.
  IdSet group() const;

  bool operator==(const Segment&) const = default;
};

struct AnnotationSet {
  std::vector<std::string> mask_files;
  int arm_count = 1;
  int horizon = 0;  // last annotated frame
  std::vector<Segment> segments;
  std::vector<std::string> warnings;

  bool operator==(const AnnotationSet& o) const {
    return mask_files == o.mask_files && arm_count == o.arm_count && horizon == o.horizon &&
           segments == o.segments;
  }
};

struct AnnotationOptions {
  // Reject a trailing motion segment instead of trimming it with a warning.
  bool strict_trailing_motion = false;
  // Require referenced mask files to exist next to the annotation file.
  bool check_masks = false;
};

// Parses and validates an annotation file. K is the object count (negative:
// inferred from the mask list), horizon the demonstration length. Throws
// SchemaError, InterleaveError or RangeError.
AnnotationSet parse_annotation(const std::filesystem::path& path, int object_count, int horizon,
                               const AnnotationOptions& options = {});
AnnotationSet parse_annotation_text(const std::string& text, int object_count, int horizon,
                                    const AnnotationOptions& options = {});
AnnotationSet parse_annotation_json(const nlohmann::json& root, int object_count, int horizon,
                                    const AnnotationOptions& options = {});

// Inserts the commas that the typeset example in the original annotation
// tool documentation drops between adjacent values. Valid JSON is unchanged.
std::string repair_missing_commas(const std::string& text);

// Structural validation of an in-memory set (tiling, interleaving, id range).
void validate_annotation(const AnnotationSet& a, int object_count);

nlohmann::ordered_json serialize_annotation(const AnnotationSet& a);
void write_annotation(const AnnotationSet& a, const std::filesystem::path& path);

// Skill segments in order.
std::vector<Segment> skills(const AnnotationSet& a);

// Builds a tiled set from segment lengths and skill id sets; handy for tests
// and for re-deriving annotations of generated demonstrations.
AnnotationSet make_annotation(int arm_count, const std::vector<Segment>& segments);

}  // namespace pcdgen
