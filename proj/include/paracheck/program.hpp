/*
 * Copyright 2026 The paracheck Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PARACHECK_PROGRAM_HPP
#define PARACHECK_PROGRAM_HPP

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "paracheck/isa.hpp"

namespace paracheck {

struct Program {
  std::vector<Instruction> code;
  std::map<std::string, std::size_t> labels;
  std::size_t entry = 0;

  std::size_t size() const { return code.size(); }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Parses the text program format:
///
///     # comment
///     loop: addi x1, x1, -1
///           ld   x5, 16(x2)
///           bne  x1, x0, loop
///
/// Branch immediates are stored instruction-index relative; `jal rd, label`
/// stores the absolute label index with src1 = x0.
Program parse_program(std::string_view text);

/// Inverse of parse_program; every control-flow target gets a label.
std::string format_program(const Program& program);

std::string format_instruction(const Instruction& instr);

/// Static control-flow targets; throws ParseError(0, ...) if one is invalid.
void validate_targets(const Program& program);

}  // namespace paracheck

#endif  // PARACHECK_PROGRAM_HPP
