// Copyright 2026 The uncertainty-lab Authors
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

#include "ulab/error.hpp"

namespace ulab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::NotNormalized: return "NotNormalized";
    case ErrorCode::JointEigenstate: return "JointEigenstate";
    case ErrorCode::NotOrthogonal: return "NotOrthogonal";
    case ErrorCode::SumEigenstate: return "SumEigenstate";
    case ErrorCode::BadIndex: return "BadIndex";
    case ErrorCode::LeakageDetected: return "LeakageDetected";
    case ErrorCode::ComplexNotSupported: return "ComplexNotSupported";
    case ErrorCode::NotReflection: return "NotReflection";
    case ErrorCode::NotCompilable: return "NotCompilable";
    case ErrorCode::BadProbabilities: return "BadProbabilities";
    case ErrorCode::EmptyRecord: return "EmptyRecord";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what),
      code_(code) {}

}  // namespace ulab
