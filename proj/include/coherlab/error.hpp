// Copyright 2026 The coherlab Authors
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
#include <string_view>

namespace coherlab {

enum class ErrorCode {
  NonHermitian,
  NoConvergence,
  NotSquare,
  BadSubsystemIndex,
  BadDimension,
  BadRank,
  InvalidState,
  InvalidCoefficients,
  DimensionMismatch,
  DimensionTooLarge,
  IncompleteChannel,
  NotIncoherentInput,
  SingularNormalizer,
  IncoherenceViolation,
  BadBranch,
  EnsembleMismatch,
  NotMaximallyCorrelated,
  NotSQI,
  NotSI,
  InternalConsistency,
  Parse,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonHermitian: return "NonHermitian";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::BadSubsystemIndex: return "BadSubsystemIndex";
    case ErrorCode::BadDimension: return "BadDimension";
    case ErrorCode::BadRank: return "BadRank";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::InvalidCoefficients: return "InvalidCoefficients";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::IncompleteChannel: return "IncompleteChannel";
    case ErrorCode::NotIncoherentInput: return "NotIncoherentInput";
    case ErrorCode::SingularNormalizer: return "SingularNormalizer";
    case ErrorCode::IncoherenceViolation: return "IncoherenceViolation";
    case ErrorCode::BadBranch: return "BadBranch";
    case ErrorCode::EnsembleMismatch: return "EnsembleMismatch";
    case ErrorCode::NotMaximallyCorrelated: return "NotMaximallyCorrelated";
    case ErrorCode::NotSQI: return "NotSQI";
    case ErrorCode::NotSI: return "NotSI";
    case ErrorCode::InternalConsistency: return "InternalConsistency";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace coherlab
