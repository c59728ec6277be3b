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


#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <string>

#include <gtest/gtest.h>

#include "pcdgen/container_io.hpp"
#include "pcdgen/validate.hpp"
#include "test_support.hpp"

namespace pcdgen {
namespace {

using testing::source_fixture;

std::vector<ValidationRecord> failures(const std::vector<ValidationRecord>& records) {
  std::vector<ValidationRecord> out;
  for (const auto& r : records)
    if (!r.ok) out.push_back(r);
  return out;
}

GeneratedRecord sample_record(const std::string& scene, std::uint64_t seed) {
  const auto& fx = source_fixture(scene);
  const GroupTransformPlan plan = plan_augmentation(*fx.context, SamplerConfig{}, seed);
  return record_from(materialize(*fx.context, plan, SamplerConfig{}), "gen_" + std::to_string(seed));
}

TEST(Validate, GeneratedDemosPass) {
  for (const char* scene : {"pick_place", "bridge", "bimanual"})
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      const auto records = validate_demo(sample_record(scene, seed), *source_fixture(scene).context, {});
      EXPECT_GE(records.size(), 9u);
      for (const auto& r : failures(records)) ADD_FAILURE() << scene << " " << r.check << ": " << r.detail;
    }
}

TEST(Validate, RigidityFaultNamesDemoAndSkill) {
  GeneratedRecord g = sample_record("pick_place", 1);
  // nudge object 2 (target of skill 2) by a millimetre in one skill frame
  const Segment s2 = skills(g.annotation)[1];
  const int k = source_fixture("pick_place").scene.index_of(2);
  Pose& p = g.object_poses[s2.start_frame][k];
  p.translation().x() += 1e-3;
  const auto bad = failures(validate_demo(g, *source_fixture("pick_place").context, {}));
  ASSERT_EQ(bad.size(), 1u);
  EXPECT_EQ(bad[0].check, "rigidity");
  EXPECT_EQ(bad[0].demo, "gen_1");
  ASSERT_TRUE(bad[0].skill.has_value());
  EXPECT_EQ(*bad[0].skill, 1);
  EXPECT_EQ(record_to_json(bad[0]).at("skill"), 1);
}

TEST(Validate, ContinuityFaultDetected) {
  GeneratedRecord g = sample_record("bridge", 2);
  const Segment m = g.annotation.segments[2];
  ASSERT_FALSE(m.is_skill());
  g.demo.frames[m.start_frame + 1].action.ee[0].translation().z() += 0.2;
  bool seen = false;
  for (const auto& r : failures(validate_demo(g, *source_fixture("bridge").context, {})))
    seen = seen || r.check == "continuity";
  EXPECT_TRUE(seen);
}

TEST(Validate, GripperFaultDetected) {
  GeneratedRecord g = sample_record("pick_place", 3);
  const Segment s1 = skills(g.annotation)[0];
  auto& grip = g.demo.frames[s1.end_frame - 1].action.grip[0];
  grip = grip > 0.05f ? 0.02f : 0.08f;
  const auto bad = failures(validate_demo(g, *source_fixture("pick_place").context, {}));
  ASSERT_FALSE(bad.empty());
  EXPECT_EQ(bad[0].check, "gripper");
  EXPECT_EQ(bad[0].skill, 0);
}

TEST(Validate, BimanualFaultDetected) {
  GeneratedRecord g = sample_record("bimanual", 0);
  // the carry is the motion before the second skill
  const Segment m = g.annotation.segments[2];
  ASSERT_FALSE(m.is_skill());
  Pose& right = g.demo.frames[m.start_frame + 1].action.ee[1];
  right = right * make_pose(Eigen::AngleAxisd(0.17, Eigen::Vector3d::UnitZ()).toRotationMatrix(),
                            Eigen::Vector3d::Zero());
  bool seen = false;
  for (const auto& r : failures(validate_demo(g, *source_fixture("bimanual").context, {})))
    if (r.check == "bimanual") {
      seen = true;
      EXPECT_EQ(r.skill, 1);
    }
  EXPECT_TRUE(seen);
}

TEST(Validate, PlanFaultDetected) {
  GeneratedRecord g = sample_record("pick_place", 4);
  g.plan.effective[0].translation().y() += 0.01;
  bool seen = false;
  for (const auto& r : failures(validate_demo(g, *source_fixture("pick_place").context, {})))
    seen = seen || r.check == "plan";
  EXPECT_TRUE(seen);
}

// --- command line ---------------------------------------------------------

int run(const std::string& args) {
  const std::string cmd = std::string(PCDGEN_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class CliTest : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    root_ = testing::scratch_dir("cli").string();
    std::ofstream(root_ + "/small.json") << R"({"sampler": {"replays": 1, "combinations": 2, "perturbations": 2}})";
    ASSERT_EQ(run("synth --builtin pick_place --out " + root_ + "/src --seed 3"), 0);
    ASSERT_EQ(run("parse --demo " + root_ + "/src/demo --tracking " + root_ + "/src/tracking --out " + root_ +
                  "/scene"),
              0);
    ASSERT_EQ(run("generate --scene " + root_ + "/scene --annotation " + root_ + "/src/annotation.json --config " +
                  root_ + "/small.json --out " + root_ + "/gen --seed 5"),
              0);
  }
  static std::string root_;
};
std::string CliTest::root_;

TEST_F(CliTest, ValidDatasetExitsZero) {
  EXPECT_EQ(run("validate --dataset " + root_ + "/gen"), 0);
  EXPECT_EQ(list_generated(root_ + "/gen").size(), 4u);
}

TEST_F(CliTest, UsageErrorsExitTwo) {
  EXPECT_EQ(run("validate --dataset " + root_ + "/gen --no-such-flag"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("generate --out " + root_ + "/x"), 2);
  std::ofstream(root_ + "/typo.json") << R"({"sampler": {"replay": 2}})";
  EXPECT_EQ(run("generate --scene " + root_ + "/scene --annotation " + root_ + "/src/annotation.json --config " +
                root_ + "/typo.json --out " + root_ + "/never"),
            2);
}

TEST_F(CliTest, MissingDataset) {
  // a path that does not exist is caught by argument checking
  EXPECT_EQ(run("validate --dataset " + root_ + "/nowhere"), 2);
  // a directory without dataset metadata is reported as a failed dataset check
  std::filesystem::create_directories(root_ + "/empty");
  EXPECT_EQ(run("validate --dataset " + root_ + "/empty"), 1);
  const ValidationReport report = validate_dataset(root_ + "/empty");
  ASSERT_EQ(report.failures(), 1u);
  EXPECT_EQ(report.records[0].check, "dataset");
}

TEST_F(CliTest, RuntimeFailureExitsThree) {
  std::filesystem::create_directories(root_ + "/not_a_scene");
  EXPECT_EQ(run("generate --scene " + root_ + "/not_a_scene --annotation " + root_ + "/src/annotation.json --out " +
                root_ + "/never"),
            3);
}

TEST_F(CliTest, BrokenDatasetExitsOne) {
  const std::filesystem::path copy = root_ + "/broken";
  std::filesystem::remove_all(copy);
  std::filesystem::copy(root_ + "/gen", copy, std::filesystem::copy_options::recursive);
  const auto plan_file = copy / plan_name(1);
  auto plan = read_json(plan_file);
  plan["skills"][0]["effective"][3] = plan["skills"][0]["effective"][3].get<double>() + 0.02;
  write_json(plan, plan_file);
  EXPECT_EQ(run("validate --dataset " + copy.string()), 1);
}

TEST_F(CliTest, PrintConfigEchoIsReloadable) {
  const std::string echo = root_ + "/echo.json";
  const std::string cmd = std::string(PCDGEN_CLI) + " --print-config generate --scene " + root_ + "/scene --annotation " +
                          root_ + "/src/annotation.json --config " + root_ + "/small.json --out " + root_ +
                          "/unused > " + echo;
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  const auto j = read_json(echo);
  EXPECT_EQ(j.at("command"), "generate");
  EXPECT_EQ(config_from_json(j.at("config")).sampler.combinations, 2);
}

}  // namespace
}  // namespace pcdgen
