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

#include "pcdgen/annotation.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "pcdgen/errors.hpp"

namespace pcdgen {

using nlohmann::json;

IdSet Segment::held() const {
  IdSet out = hand;
  out.insert(left_hand.begin(), left_hand.end());
  out.insert(right_hand.begin(), right_hand.end());
  return out;
}

const IdSet& Segment::held_by(int arm) const {
  if (arm == 1) return right_hand;
  return left_hand.empty() && right_hand.empty() ? hand : left_hand;
}

IdSet Segment::group() const {
  IdSet out = held();
  out.insert(target.begin(), target.end());
  return out;
}

namespace {

std::string entry_prefix(std::size_t i) { return "annotations[" + std::to_string(i) + "]: "; }

IdSet parse_ids(const json& entry, const char* key, std::size_t index, int object_count) {
  if (!entry.contains(key)) throw SchemaError(entry_prefix(index) + "missing field \"" + key + "\"");
  const json& v = entry.at(key);
  IdSet ids;
  if (v.is_null()) return ids;
  if (!v.is_array()) throw SchemaError(entry_prefix(index) + "\"" + key + "\" must be an array or null");
  for (const json& id : v) {
    if (!id.is_number_integer())
      throw SchemaError(entry_prefix(index) + "\"" + key + "\" must hold integer ids");
    const int value = id.get<int>();
    if (value < 1 || (object_count >= 0 && value > object_count))
      throw RangeError(entry_prefix(index) + "object id " + std::to_string(value) + " outside [1, " +
                       std::to_string(object_count) + "]");
    ids.insert(value);
  }
  return ids;
}

json ids_to_json(const IdSet& ids) {
  if (ids.empty()) return nullptr;
  return json(std::vector<int>(ids.begin(), ids.end()));
}

bool value_end(char c) { return c == '"' || c == '}' || c == ']' || std::isalnum(static_cast<unsigned char>(c)); }
bool value_start(char c) {
  return c == '"' || c == '{' || c == '[' || c == '-' || std::isalnum(static_cast<unsigned char>(c));
}

}  // namespace

std::string repair_missing_commas(const std::string& text) {
  std::string out;
  out.reserve(text.size() + 16);
  char last = 0;  // last significant character emitted outside strings
  bool in_string = false, escaped = false;
  for (char c : text) {
    if (in_string) {
      out.push_back(c);
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
        last = '"';
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      out.push_back(c);
      continue;
    }
    // A token boundary between two values with only whitespace in between.
    const bool after_space = !out.empty() && std::isspace(static_cast<unsigned char>(out.back()));
    const bool joins_token = !after_space && std::isalnum(static_cast<unsigned char>(last)) &&
                             (std::isalnum(static_cast<unsigned char>(c)) || c == '-');
    if (last != 0 && value_end(last) && value_start(c) && !joins_token) out.push_back(',');
    out.push_back(c);
    if (c == '"') in_string = true;
    last = c;
  }
  return out;
}

AnnotationSet parse_annotation_json(const json& root, int object_count, int horizon,
                                    const AnnotationOptions& options) {
  if (!root.is_object()) throw SchemaError("annotation root must be an object");
  for (const char* key : {"masks", "arms", "annotations"})
    if (!root.contains(key)) throw SchemaError(std::string("missing field \"") + key + "\"");

  AnnotationSet a;
  if (!root["masks"].is_array()) throw SchemaError("\"masks\" must be an array");
  for (const json& m : root["masks"]) {
    if (!m.is_string()) throw SchemaError("\"masks\" entries must be file names");
    a.mask_files.push_back(m.get<std::string>());
  }
  if (object_count < 0 && a.mask_files.size() >= 2) object_count = static_cast<int>(a.mask_files.size()) - 1;
  if (!root["arms"].is_number_integer()) throw SchemaError("\"arms\" must be an integer");
  a.arm_count = root["arms"].get<int>();
  if (a.arm_count != 1 && a.arm_count != 2) throw RangeError("\"arms\" must be 1 or 2");
  const json& entries = root["annotations"];
  if (!entries.is_array()) throw SchemaError("\"annotations\" must be an array");
  if (entries.empty()) throw InterleaveError("annotation has no segments");

  std::vector<Segment> segs;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const json& e = entries[i];
    if (!e.is_object()) throw SchemaError(entry_prefix(i) + "entry must be an object");
    if (!e.contains("frame")) throw SchemaError(entry_prefix(i) + "missing field \"frame\"");
    if (!e.contains("type")) throw SchemaError(entry_prefix(i) + "missing field \"type\"");
    if (!e["frame"].is_number_integer()) throw SchemaError(entry_prefix(i) + "\"frame\" must be an integer");
    if (!e["type"].is_string()) throw SchemaError(entry_prefix(i) + "\"type\" must be a string");
    Segment s;
    const std::string type = e["type"].get<std::string>();
    if (type == "motion") {
      s.kind = SegmentKind::kMotion;
    } else if (type == "skill") {
      s.kind = SegmentKind::kSkill;
      s.target = parse_ids(e, "target", i, object_count);
      if (a.arm_count == 1) {
        if (e.contains("left_hand") || e.contains("right_hand"))
          throw SchemaError(entry_prefix(i) + "single-arm skill uses \"hand\", not left/right");
        s.hand = parse_ids(e, "hand", i, object_count);
      } else {
        if (e.contains("hand")) throw SchemaError(entry_prefix(i) + "bimanual skill uses \"left_hand\"/\"right_hand\"");
        s.left_hand = parse_ids(e, "left_hand", i, object_count);
        s.right_hand = parse_ids(e, "right_hand", i, object_count);
      }
    } else {
      throw SchemaError(entry_prefix(i) + "unknown segment type \"" + type + "\"");
    }
    const int frame = e["frame"].get<int>();
    if (frame < 1 || frame > horizon)
      throw RangeError(entry_prefix(i) + "frame " + std::to_string(frame) + " outside [1, " +
                       std::to_string(horizon) + "]");
    if (!segs.empty() && frame <= segs.back().start_frame)
      throw RangeError(entry_prefix(i) + "frames must increase strictly");
    if (segs.empty() && s.is_skill()) throw InterleaveError(entry_prefix(i) + "first segment must be a motion");
    if (!segs.empty() && segs.back().kind == s.kind)
      throw InterleaveError(entry_prefix(i) + "adjacent segments of the same type");
    // The first entry opens the trajectory at frame 1 whatever key frame it marks.
    s.start_frame = segs.empty() ? 1 : frame;
    segs.push_back(s);
  }
  for (std::size_t i = 0; i < segs.size(); ++i)
    segs[i].end_frame = i + 1 < segs.size() ? segs[i + 1].start_frame - 1 : horizon;

  if (!segs.back().is_skill()) {
    if (options.strict_trailing_motion || segs.size() == 1)
      throw InterleaveError("annotation must end with a skill segment");
    a.warnings.push_back("trailing motion from frame " + std::to_string(segs.back().start_frame) +
                         " trimmed");
    segs.pop_back();
  }
  a.segments = std::move(segs);
  a.horizon = a.segments.back().end_frame;
  return a;
}

AnnotationSet parse_annotation_text(const std::string& text, int object_count, int horizon,
                                    const AnnotationOptions& options) {
  json root;
  try {
    root = json::parse(repair_missing_commas(text));
  } catch (const json::exception& e) {
    throw SchemaError(std::string("annotation is not valid JSON: ") + e.what());
  }
  return parse_annotation_json(root, object_count, horizon, options);
}

AnnotationSet parse_annotation(const std::filesystem::path& path, int object_count, int horizon,
                               const AnnotationOptions& options) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open annotation " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  AnnotationSet a = parse_annotation_text(ss.str(), object_count, horizon, options);
  if (options.check_masks) {
    for (const std::string& m : a.mask_files)
      if (!std::filesystem::exists(path.parent_path() / m)) throw SchemaError("mask file not found: " + m);
  }
  return a;
}

void validate_annotation(const AnnotationSet& a, int object_count) {
  if (a.arm_count != 1 && a.arm_count != 2) throw RangeError("arm count must be 1 or 2");
  if (a.segments.empty()) throw InterleaveError("annotation has no segments");
  int next = 1;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    const Segment& s = a.segments[i];
    if (s.start_frame != next) throw RangeError(entry_prefix(i) + "segments must tile the horizon");
    if (s.end_frame < s.start_frame) throw RangeError(entry_prefix(i) + "empty segment");
    if ((i % 2 == 0) == s.is_skill()) throw InterleaveError(entry_prefix(i) + "segments must alternate motion/skill");
    for (int id : s.group())
      if (id < 1 || (object_count >= 0 && id > object_count))
        throw RangeError(entry_prefix(i) + "object id " + std::to_string(id) + " out of range");
    if (a.arm_count == 1 && (!s.left_hand.empty() || !s.right_hand.empty()))
      throw SchemaError(entry_prefix(i) + "single-arm skill with left/right hand sets");
    if (a.arm_count == 2 && !s.hand.empty()) throw SchemaError(entry_prefix(i) + "bimanual skill with \"hand\"");
    next = s.end_frame + 1;
  }
  if (!a.segments.back().is_skill()) throw InterleaveError("annotation must end with a skill segment");
  if (a.horizon != a.segments.back().end_frame) throw RangeError("horizon differs from last segment end");
}

nlohmann::ordered_json serialize_annotation(const AnnotationSet& a) {
  nlohmann::ordered_json root;
  root["masks"] = a.mask_files;
  root["arms"] = a.arm_count;
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const Segment& s : a.segments) {
    nlohmann::ordered_json e;
    e["frame"] = s.start_frame;
    e["type"] = s.is_skill() ? "skill" : "motion";
    if (s.is_skill()) {
      e["target"] = ids_to_json(s.target);
      if (a.arm_count == 1) {
        e["hand"] = ids_to_json(s.hand);
      } else {
        e["left_hand"] = ids_to_json(s.left_hand);
        e["right_hand"] = ids_to_json(s.right_hand);
      }
    }
    entries.push_back(std::move(e));
  }
  root["annotations"] = std::move(entries);
  return root;
}

void write_annotation(const AnnotationSet& a, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoFailure("cannot write " + path.string());
  out << serialize_annotation(a).dump(2) << '\n';
  if (!out) throw IoFailure("write failed for " + path.string());
}

std::vector<Segment> skills(const AnnotationSet& a) {
  std::vector<Segment> out;
  for (const Segment& s : a.segments)
    if (s.is_skill()) out.push_back(s);
  return out;
}

AnnotationSet make_annotation(int arm_count, const std::vector<Segment>& segments) {
  AnnotationSet a;
  a.arm_count = arm_count;
  a.segments = segments;
  a.horizon = segments.empty() ? 0 : segments.back().end_frame;
  validate_annotation(a, -1);
  return a;
}

}  // namespace pcdgen
