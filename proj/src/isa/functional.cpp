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

#include "paracheck/functional.hpp"

#include <string>

namespace paracheck {

FunctionalTrace run_functional(const Program& program, Memory& memory,
                               std::uint64_t max_instrs) {
  FunctionalTrace trace;
  trace.initial = ArchRegs::reset(program.entry);
  ArchRegs regs = trace.initial;
  CsrCounters counters;

  while (regs.pc != program.size()) {
    if (regs.pc > program.size()) {
      throw std::out_of_range("control transferred outside the program to index " +
                              std::to_string(regs.pc));
    }
    if (trace.entries.size() >= max_instrs) {
      throw RunawayError("exceeded " + std::to_string(max_instrs) +
                         " retired instructions");
    }
    const Instruction& in = program.code[regs.pc];
    ExecEffect fx = exec_instr(regs, in, memory, counters);
    trace.entries.push_back(TraceEntry{trace.entries.size(), regs.pc, in, fx});
    apply_effect(regs, memory, counters, fx);
  }
  trace.final = regs;
  return trace;
}

}  // namespace paracheck
