// Copyright 2026 The ssk Authors.
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

#ifndef SSK_ERROR_H_
#define SSK_ERROR_H_

#include <stdexcept>
#include <string>

namespace ssk {

enum class ErrorCode {
  kInvalidArgument,
  kDegenerateInput,
  kConfiguration,
  kFormat,
  kTruncated,
  kUnsupported,
  kRateMismatch,
  kSchema,
  kMissingFile,
  kGeneration,
  kIo,
};

const char* to_string(ErrorCode code);

// All library failures are reported through this exception type. The code
// lets callers (the CLI in particular) branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& message);

inline void require(bool condition, const std::string& message) {
  if (!condition) fail(ErrorCode::kInvalidArgument, message);
}

}  // namespace ssk

#endif  // SSK_ERROR_H_
