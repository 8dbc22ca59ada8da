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

#ifndef PARACHECK_TESTS_HELPERS_HPP
#define PARACHECK_TESTS_HELPERS_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "paracheck/functional.hpp"
#include "paracheck/program.hpp"
#include "paracheck/sim.hpp"
#include "paracheck/workload.hpp"

namespace paracheck::test {

inline FunctionalTrace trace_of(const Program& p, std::uint64_t memory_bytes = 65536,
                                std::uint64_t seed = 1) {
  Memory mem = Memory::patterned(memory_bytes, seed);
  return run_functional(p, mem, 10'000'000);
}

/// A suite member sized for fast unit tests.
inline Program small_suite(std::string_view name, std::uint64_t seed = 1,
                           std::size_t length = 2000, std::uint64_t loops = 5) {
  return gen_workload(suite_member(name, length, loops, seed).mix);
}

/// Straight-line IntAlu body repeated `loops` times.
inline Program alu_loop(std::uint64_t loops, std::size_t body = 1000) {
  std::string text = "    li x1, " + std::to_string(loops) + "\nloop:\n";
  for (std::size_t i = 0; i < body; ++i) {
    text += "    addi x" + std::to_string(2 + i % 20) + ", x" + std::to_string(2 + (i + 7) % 20) +
            ", " + std::to_string(i % 97) + "\n";
  }
  text += "    addi x1, x1, -1\n    bne x1, x0, loop\n";
  return parse_program(text);
}

}  // namespace paracheck::test

#endif  // PARACHECK_TESTS_HELPERS_HPP
