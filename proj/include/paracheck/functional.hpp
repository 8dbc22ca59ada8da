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

#ifndef PARACHECK_FUNCTIONAL_HPP
#define PARACHECK_FUNCTIONAL_HPP

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "paracheck/isa.hpp"
#include "paracheck/program.hpp"

namespace paracheck {

struct TraceEntry {
  std::uint64_t seq = 0;
  std::uint64_t pc = 0;
  Instruction instr;
  ExecEffect effect;

  friend bool operator==(const TraceEntry&, const TraceEntry&) = default;
};

/// Golden retirement stream of a program.
struct FunctionalTrace {
  ArchRegs initial;
  ArchRegs final;
  std::vector<TraceEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
};

class RunawayError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Runs `program` to completion (pc falls off the end). Throws RunawayError
/// past `max_instrs`, MemoryError on an out-of-bounds access and
/// std::out_of_range on a jump outside the program.
FunctionalTrace run_functional(const Program& program, Memory& memory,
                               std::uint64_t max_instrs);

}  // namespace paracheck

#endif  // PARACHECK_FUNCTIONAL_HPP
