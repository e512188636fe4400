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

#include "jury/error.hpp"

namespace jury {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kReferentialIntegrity: return "ReferentialIntegrity";
    case ErrorCode::kScoreOutOfRange: return "ScoreOutOfRange";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kUnknownAttribute: return "UnknownAttribute";
    case ErrorCode::kUnknownValue: return "UnknownValue";
    case ErrorCode::kMissingEmbedding: return "MissingEmbedding";
    case ErrorCode::kNotTrainable: return "NotTrainable";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kNonFiniteLoss: return "NonFiniteLoss";
    case ErrorCode::kVersionMismatch: return "VersionMismatch";
    case ErrorCode::kCorruptCheckpoint: return "CorruptCheckpoint";
    case ErrorCode::kInsufficientAnnotators: return "InsufficientAnnotators";
    case ErrorCode::kUnknownAnnotator: return "UnknownAnnotator";
    case ErrorCode::kInvalidComposition: return "InvalidComposition";
    case ErrorCode::kInfeasible: return "Infeasible";
    case ErrorCode::kInvalidAllocation: return "InvalidAllocation";
    case ErrorCode::kEncoderRequired: return "EncoderRequired";
    case ErrorCode::kEmptyFilter: return "EmptyFilter";
    case ErrorCode::kNoPairs: return "NoPairs";
    case ErrorCode::kNoQualifyingItems: return "NoQualifyingItems";
  }
  return "Unknown";
}

}  // namespace jury
