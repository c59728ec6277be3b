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

// Annotation bodies shared by the parser, service and acceptance tests.
#pragma once

#include <functional>
#include <string>
#include <typeinfo>
#include <vector>

#include <nlohmann/json.hpp>

namespace pcdgen::testing {

// Two-arm example file as produced by the annotation tool, including its two
// missing separators (after "mask_2.png" and between the second and third
// entries).
inline const char* kExampleAnnotation = R"({
  "masks": [
    "mask_gripper.png",
    "mask_1.png",
    "mask_2.png"
    "mask_3.png"
  ],
  "arms": 2,
  "annotations": [
    {
      "frame": 4,
      "type": "motion"
    },
    {
      "frame": 12,
      "type": "skill",
      "target": [2],
      "left_hand": null,
      "right_hand": null
    }
    {
      "frame": 23,
      "type": "motion"
    },
    {
      "frame": 31,
      "type": "skill",
      "target": [1,3],
      "left_hand": [2],
      "right_hand": null
    }
  ]
})";

inline constexpr int kExampleObjects = 3;
inline constexpr int kExampleHorizon = 40;

inline nlohmann::json example_json() {
  return nlohmann::json{
      {"masks", {"mask_gripper.png", "mask_1.png", "mask_2.png", "mask_3.png"}},
      {"arms", 2},
      {"annotations",
       {{{"frame", 4}, {"type", "motion"}},
        {{"frame", 12}, {"type", "skill"}, {"target", {2}}, {"left_hand", nullptr}, {"right_hand", nullptr}},
        {{"frame", 23}, {"type", "motion"}},
        {{"frame", 31}, {"type", "skill"}, {"target", {1, 3}}, {"left_hand", {2}}, {"right_hand", nullptr}}}}};
}

// A mutated body plus the error class the parser must raise.
struct Mutation {
  std::string name;
  std::string expected;  // Error::kind()
  nlohmann::json body;
};

inline std::vector<Mutation> annotation_mutations() {
  using json = nlohmann::json;
  std::vector<Mutation> out;
  auto add = [&](std::string name, std::string kind, const std::function<void(json&)>& edit) {
    json j = example_json();
    edit(j);
    out.push_back({std::move(name), std::move(kind), std::move(j)});
  };
  // Adjacent segments of the same kind.
  add("second entry becomes motion", "InterleaveError", [](json& j) {
    j["annotations"][1] = {{"frame", 12}, {"type", "motion"}};
  });
  add("third entry becomes skill", "InterleaveError", [](json& j) {
    j["annotations"][2] = {{"frame", 23}, {"type", "skill"}, {"target", {1}}, {"left_hand", nullptr},
                           {"right_hand", nullptr}};
  });
  add("first entry is a skill", "InterleaveError", [](json& j) {
    j["annotations"][0] = {{"frame", 4}, {"type", "skill"}, {"target", {1}}, {"left_hand", nullptr},
                           {"right_hand", nullptr}};
  });
  add("motion entry removed", "InterleaveError", [](json& j) { j["annotations"].erase(2); });
  add("leading motion removed", "InterleaveError", [](json& j) { j["annotations"].erase(0); });
  add("empty annotation list", "InterleaveError", [](json& j) { j["annotations"] = json::array(); });
  add("only a motion", "InterleaveError", [](json& j) { j["annotations"] = {{{"frame", 1}, {"type", "motion"}}}; });
  add("duplicated skill", "InterleaveError", [](json& j) {
    j["annotations"].push_back(j["annotations"][3]);
    j["annotations"][4]["frame"] = 35;
  });
  // Object ids outside [1, K].
  for (int bad : {0, 4, 5, 17, -1}) {
    add("target id " + std::to_string(bad), "RangeError", [bad](json& j) { j["annotations"][1]["target"] = {bad}; });
    add("left_hand id " + std::to_string(bad), "RangeError",
        [bad](json& j) { j["annotations"][3]["left_hand"] = {bad}; });
    add("right_hand id " + std::to_string(bad), "RangeError",
        [bad](json& j) { j["annotations"][3]["right_hand"] = {1, bad}; });
  }
  // Frames outside [1, H] or out of order.
  for (int bad : {0, -3, 41, 100}) {
    add("frame " + std::to_string(bad), "RangeError", [bad](json& j) { j["annotations"][3]["frame"] = bad; });
  }
  add("first frame 0", "RangeError", [](json& j) { j["annotations"][0]["frame"] = 0; });
  add("frames decrease", "RangeError", [](json& j) { j["annotations"][2]["frame"] = 11; });
  add("frames repeat", "RangeError", [](json& j) { j["annotations"][2]["frame"] = 12; });
  add("arms 3", "RangeError", [](json& j) { j["arms"] = 3; });
  add("arms 0", "RangeError", [](json& j) { j["arms"] = 0; });

  // Missing or mistyped fields.
  for (const char* key : {"masks", "arms", "annotations"})
    add(std::string("missing ") + key, "SchemaError", [key](json& j) { j.erase(key); });
  for (const char* key : {"frame", "type"}) {
    add(std::string("motion missing ") + key, "SchemaError", [key](json& j) { j["annotations"][0].erase(key); });
    add(std::string("skill missing ") + key, "SchemaError", [key](json& j) { j["annotations"][3].erase(key); });
  }
  for (const char* key : {"target", "left_hand", "right_hand"})
    add(std::string("skill missing ") + key, "SchemaError", [key](json& j) { j["annotations"][1].erase(key); });
  add("frame as string", "SchemaError", [](json& j) { j["annotations"][1]["frame"] = "12"; });
  add("frame as float", "SchemaError", [](json& j) { j["annotations"][1]["frame"] = 12.5; });
  add("unknown type", "SchemaError", [](json& j) { j["annotations"][1]["type"] = "grasp"; });
  add("target as scalar", "SchemaError", [](json& j) { j["annotations"][1]["target"] = 2; });
  add("target with string id", "SchemaError", [](json& j) { j["annotations"][1]["target"] = {"2"}; });
  add("masks not a list", "SchemaError", [](json& j) { j["masks"] = "mask_gripper.png"; });
  add("mask entry not a string", "SchemaError", [](json& j) { j["masks"][1] = 1; });
  add("arms as string", "SchemaError", [](json& j) { j["arms"] = "2"; });
  add("annotations not a list", "SchemaError", [](json& j) { j["annotations"] = json::object(); });
  add("entry not an object", "SchemaError", [](json& j) { j["annotations"][2] = 23; });
  add("bimanual skill uses hand", "SchemaError", [](json& j) { j["annotations"][1]["hand"] = nullptr; });
  add("root is a list", "SchemaError", [](json& j) { j = json::array({1, 2}); });
  return out;
}

}  // namespace pcdgen::testing
