/*
 *   Copyright 2026 The thyper Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace thyper {

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : std::runtime_error(source + (line ? ":" + std::to_string(line) : std::string{}) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A frequency-domain slice could not be inverted.
class SingularError : public std::runtime_error {
 public:
  SingularError(std::size_t frequency, double rcond)
      : std::runtime_error("singular frequency slice " + std::to_string(frequency) +
                           " (rcond " + std::to_string(rcond) + ")"),
        frequency_(frequency) {}

  std::size_t frequency() const noexcept { return frequency_; }

 private:
  std::size_t frequency_;
};

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Violation of an invariant the library itself is supposed to maintain.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace thyper
