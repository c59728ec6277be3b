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

#include <stdexcept>
#include <string>

namespace pcdgen {

// Base class for every error raised by the library. kind() names the error
// class so that reports and HTTP responses can carry it verbatim.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define PCDGEN_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                      \
   public:                                                         \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  };

PCDGEN_DEFINE_ERROR(MalformedContainer)
PCDGEN_DEFINE_ERROR(IoFailure)
PCDGEN_DEFINE_ERROR(NonRigidTemplate)
PCDGEN_DEFINE_ERROR(SchemaError)
PCDGEN_DEFINE_ERROR(InterleaveError)
PCDGEN_DEFINE_ERROR(RangeError)
PCDGEN_DEFINE_ERROR(DegenerateGeometry)
PCDGEN_DEFINE_ERROR(SamplingExhausted)
PCDGEN_DEFINE_ERROR(PlanConflict)
PCDGEN_DEFINE_ERROR(FillInfeasible)
PCDGEN_DEFINE_ERROR(SpecError)
PCDGEN_DEFINE_ERROR(ConfigError)

#undef PCDGEN_DEFINE_ERROR

// Carries the offending frame index (1-based, -1 when not frame specific).
class InvariantViolation : public Error {
 public:
  InvariantViolation(const std::string& message, int frame = -1)
      : Error("InvariantViolation",
              frame >= 0 ? message + " (frame " + std::to_string(frame) + ")"
                         : message),
        frame_(frame) {}
  int frame() const noexcept { return frame_; }

 private:
  int frame_;
};

class MissingPose : public Error {
 public:
  MissingPose(int frame, int object)
      : Error("MissingPose", "missing pose for object " +
                                 std::to_string(object) + " at frame " +
                                 std::to_string(frame)),
        frame_(frame),
        object_(object) {}
  int frame() const noexcept { return frame_; }
  int object() const noexcept { return object_; }

 private:
  int frame_;
  int object_;
};

class ConstraintViolation : public Error {
 public:
  ConstraintViolation(const std::string& message, int frame)
      : Error("ConstraintViolation",
              message + " (frame " + std::to_string(frame) + ")"),
        frame_(frame) {}
  int frame() const noexcept { return frame_; }

 private:
  int frame_;
};

}  // namespace pcdgen
