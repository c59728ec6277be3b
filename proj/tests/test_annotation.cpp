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

#include <gtest/gtest.h>

#include "annotation_fixtures.hpp"
#include "pcdgen/annotation.hpp"
#include "pcdgen/errors.hpp"
#include "test_support.hpp"

namespace pcdgen {
namespace {

using testing::kExampleAnnotation;
using testing::kExampleHorizon;
using testing::kExampleObjects;

TEST(Annotation, ExampleFileParsesToFourSegments) {
  const AnnotationSet a = parse_annotation_text(kExampleAnnotation, kExampleObjects, kExampleHorizon);
  ASSERT_EQ(a.segments.size(), 4u);
  EXPECT_EQ(a.arm_count, 2);
  EXPECT_EQ(a.mask_files.size(), 4u);
  EXPECT_EQ(a.mask_files.front(), "mask_gripper.png");

  const auto& s = a.segments;
  EXPECT_FALSE(s[0].is_skill());
  EXPECT_EQ(s[0].start_frame, 1);
  EXPECT_EQ(s[0].end_frame, 11);
  EXPECT_TRUE(s[1].is_skill());
  EXPECT_EQ(s[1].start_frame, 12);
  EXPECT_EQ(s[1].end_frame, 22);
  EXPECT_EQ(s[1].target, (IdSet{2}));
  EXPECT_TRUE(s[1].left_hand.empty());
  EXPECT_TRUE(s[1].right_hand.empty());
  EXPECT_EQ(s[2].start_frame, 23);
  EXPECT_EQ(s[2].end_frame, 30);
  EXPECT_EQ(s[3].start_frame, 31);
  EXPECT_EQ(s[3].end_frame, 40);
  EXPECT_EQ(s[3].target, (IdSet{1, 3}));
  EXPECT_EQ(s[3].left_hand, (IdSet{2}));
  EXPECT_TRUE(s[3].right_hand.empty());
  EXPECT_EQ(skills(a).size(), 2u);
}

TEST(Annotation, SerializeRoundTripIsSemanticIdentity) {
  const AnnotationSet a = parse_annotation_text(kExampleAnnotation, kExampleObjects, kExampleHorizon);
  const auto text = serialize_annotation(a).dump(2);
  for (const char* key : {"\"masks\"", "\"arms\"", "\"annotations\"", "\"frame\"", "\"type\"", "\"target\"",
                          "\"left_hand\"", "\"right_hand\""})
    EXPECT_NE(text.find(key), std::string::npos) << key;
  EXPECT_EQ(text.find("\"hand\""), std::string::npos);
  const AnnotationSet b = parse_annotation_text(text, kExampleObjects, kExampleHorizon);
  EXPECT_EQ(a, b);
  const auto path = testing::scratch_dir("annotation_rt") / "annotation.json";
  write_annotation(a, path);
  EXPECT_EQ(parse_annotation(path, kExampleObjects, kExampleHorizon), a);
}

TEST(Annotation, MutationsRaiseTheirErrorClass) {
  const auto mutations = testing::annotation_mutations();
  ASSERT_GE(mutations.size(), 50u);
  for (const auto& m : mutations) {
    try {
      parse_annotation_json(m.body, kExampleObjects, kExampleHorizon);
      ADD_FAILURE() << m.name << ": accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), m.expected) << m.name << ": " << e.what();
    }
  }
}

TEST(Annotation, SegmentsTileTheHorizonAndAlternate) {
  const AnnotationSet a = parse_annotation_text(kExampleAnnotation, kExampleObjects, kExampleHorizon);
  EXPECT_NO_THROW(validate_annotation(a, kExampleObjects));
  int next = 1;
  for (std::size_t i = 0; i < a.segments.size(); ++i) {
    EXPECT_EQ(a.segments[i].start_frame, next);
    EXPECT_EQ(a.segments[i].is_skill(), i % 2 == 1);
    next = a.segments[i].end_frame + 1;
  }
  EXPECT_EQ(next, kExampleHorizon + 1);
}

TEST(Annotation, SingleArmUsesHandField) {
  const std::string text = R"({"masks": ["mask_gripper.png", "mask_1.png"], "arms": 1,
    "annotations": [{"frame": 1, "type": "motion"},
                    {"frame": 5, "type": "skill", "target": [1], "hand": null}]})";
  const AnnotationSet a = parse_annotation_text(text, 1, 9);
  ASSERT_EQ(skills(a).size(), 1u);
  EXPECT_EQ(a.segments[1].end_frame, 9);
  const auto with_left = R"({"masks": [], "arms": 1, "annotations": [{"frame": 1, "type": "motion"},
    {"frame": 5, "type": "skill", "target": [1], "left_hand": null, "right_hand": null}]})";
  EXPECT_THROW(parse_annotation_text(with_left, 1, 9), SchemaError);
}

TEST(Annotation, TrailingMotionTrimmedOrRejected) {
  nlohmann::json j = testing::example_json();
  j["annotations"].push_back({{"frame", 38}, {"type", "motion"}});
  const AnnotationSet a = parse_annotation_json(j, kExampleObjects, kExampleHorizon);
  EXPECT_EQ(a.segments.size(), 4u);
  EXPECT_EQ(a.horizon, 37);
  EXPECT_EQ(a.warnings.size(), 1u);
  AnnotationOptions strict;
  strict.strict_trailing_motion = true;
  EXPECT_THROW(parse_annotation_json(j, kExampleObjects, kExampleHorizon, strict), InterleaveError);
}

TEST(Annotation, ProgrammaticSkillCount) {
  std::vector<Segment> segs;
  int frame = 1;
  for (int i = 0; i < 6; ++i) {
    Segment s;
    s.kind = i % 2 ? SegmentKind::kSkill : SegmentKind::kMotion;
    s.start_frame = frame;
    s.end_frame = frame + 2;
    if (s.is_skill()) s.target = {1};
    frame += 3;
    segs.push_back(s);
  }
  const AnnotationSet a = make_annotation(1, segs);
  EXPECT_EQ(skills(a).size(), 3u);
  EXPECT_NO_THROW(validate_annotation(a, 1));
}

TEST(Annotation, CommaRepairLeavesValidJsonAlone) {
  const std::string valid = R"({"a": [1, 2, "x y"], "b": {"c": null, "d": -1.5e3}, "e": "q\"uote"})";
  EXPECT_EQ(repair_missing_commas(valid), valid);
  EXPECT_EQ(nlohmann::json::parse(repair_missing_commas("[1 2 3]")), nlohmann::json({1, 2, 3}));
  EXPECT_EQ(nlohmann::json::parse(repair_missing_commas("[{\"a\":1}\n{\"a\":2}]")).size(), 2u);
  EXPECT_EQ(repair_missing_commas("\"a b\""), "\"a b\"");
}

TEST(Annotation, MissingMaskFileDetectedOnRequest) {
  const auto dir = testing::scratch_dir("annotation_masks");
  write_annotation(parse_annotation_text(kExampleAnnotation, kExampleObjects, kExampleHorizon), dir / "a.json");
  AnnotationOptions opt;
  opt.check_masks = true;
  EXPECT_THROW(parse_annotation(dir / "a.json", kExampleObjects, kExampleHorizon, opt), SchemaError);
  EXPECT_NO_THROW(parse_annotation(dir / "a.json", kExampleObjects, kExampleHorizon));
}

}  // namespace
}  // namespace pcdgen
