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
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcdgen/dataset.hpp"

namespace pcdgen {

struct ValidationRecord {
  std::string demo;
  std::string check;
  bool ok = true;
  std::optional<int> skill;  // 0-based skill index of the first failure
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationRecord> records;
  std::size_t demos = 0;
  std::size_t failures() const;
  bool ok() const { return failures() == 0; }
};

nlohmann::json record_to_json(const ValidationRecord& r);
nlohmann::json summary_to_json(const ValidationReport& report);


GeneratedRecord record_from(const GeneratedDemo& demo, std::string name);

// Runs every per-demo check; one record per check.
std::vector<ValidationRecord> validate_demo(const GeneratedRecord& g, const AugmentContext& source,
                                            const PipelineConfig& cfg);

// Loads dataset.json, every source it names and every gen_* directory.
ValidationReport validate_dataset(const std::filesystem::path& root, int jobs = 1);

}  // namespace pcdgen
