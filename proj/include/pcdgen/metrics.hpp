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

#include "pcdgen/types.hpp"

namespace pcdgen {

// Mean nearest-neighbour distance from every point of `from` to `to`.
double mean_nearest_distance(const PointCloud& from, const PointCloud& to);

// Symmetric chamfer distance: average of the two directed means. Zero for
// two empty clouds, infinite when exactly one is empty.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

// Fraction of `reference` points with a point of `candidate` within
// `tolerance` (1 for an empty reference).
double coverage_fraction(const PointCloud& reference, const PointCloud& candidate, double tolerance);

}  // namespace pcdgen
