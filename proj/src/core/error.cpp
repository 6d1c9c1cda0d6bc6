/*
 * Copyright 2026 The cropid Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cropid/core/error.hpp"

namespace cropid {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::AlignmentError: return "AlignmentError";
    case ErrorCode::StatsMismatch: return "StatsMismatch";
    case ErrorCode::LengthOverflow: return "LengthOverflow";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::UnknownCrop: return "UnknownCrop";
    case ErrorCode::InvalidPolygon: return "InvalidPolygon";
    case ErrorCode::EmptyInterior: return "EmptyInterior";
    case ErrorCode::EmptySlice: return "EmptySlice";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ZeroMaskLoss: return "ZeroMaskLoss";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::BucketError: return "BucketError";
    case ErrorCode::DependencyError: return "DependencyError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace cropid
