// Copyright 2026 The JuryLearn Authors
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

#ifndef JURY_ERROR_HPP_
#define JURY_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace jury {

enum class ErrorCode {
  kInvalidArgument,
  kIoError,
  // dataset
  kMalformedRecord,
  kReferentialIntegrity,
  kScoreOutOfRange,
  kDuplicateId,
  kUnknownAttribute,
  kUnknownValue,
  // encoder
  kMissingEmbedding,
  kNotTrainable,
  // model
  kShapeMismatch,
  kEmptyDataset,
  kNonFiniteLoss,
  kVersionMismatch,
  kCorruptCheckpoint,
  // jury
  kInsufficientAnnotators,
  kUnknownAnnotator,
  kInvalidComposition,
  // counterfactual
  kInfeasible,
  kInvalidAllocation,
  // conditional
  kEncoderRequired,
  // eval
  kEmptyFilter,
  kNoPairs,
  kNoQualifyingItems,
};

// Stable machine-readable name, e.g. "InsufficientAnnotators".
std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. `detail` carries
// structured context (line number, offending id, counts) as free text.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::string detail = {})
      : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace jury

#endif  // JURY_ERROR_HPP_
