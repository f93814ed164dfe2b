// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace vigil {

// Input data violated its documented schema or an invariant of the data
// model. Carries the source location when the offending record came from a
// file (line is 1-based; 0 means "not tied to a file").
class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string file, std::size_t line, const std::string& reason)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + reason),
        file_(std::move(file)),
        line_(line) {}

  explicit ValidationError(const std::string& reason)
      : std::runtime_error(reason) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

}  // namespace vigil
