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

#ifndef PARACHECK_WORKLOAD_HPP
#define PARACHECK_WORKLOAD_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "paracheck/isa.hpp"
#include "paracheck/program.hpp"

namespace paracheck {

class WorkloadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InstrMix {
  std::array<double, kNumClasses> fractions{};
  /// Static instructions in the emitted program (prologue and loop control
  /// included).
  std::size_t length = 10000;
  std::uint64_t loop_count = 1;
  std::uint64_t memory_footprint_bytes = 65536;
  std::uint64_t seed = 1;

  double fraction(InstrClass c) const { return fractions[class_index(c)]; }
  void set(InstrClass c, double f) { fractions[class_index(c)] = f; }

  /// Throws WorkloadError when fractions are negative, do not sum to one,
  /// or the mix needs memory it does not have.
  void validate() const;
};

/// Parses "Div=0.3,IntAlu=0.7" into fractions; other fields keep defaults.
InstrMix parse_mix(std::string_view spec);
std::string format_mix(const InstrMix& mix);

/// Deterministic in the whole mix, seed included.
Program gen_workload(const InstrMix& mix);

struct NamedWorkload {
  std::string name;
  InstrMix mix;
};

/// The eight synthetic suite members. `length` and `loop_count` size every
/// member identically; div-heavy is the division-bound outlier.
std::vector<NamedWorkload> workload_suite(std::size_t length = 10000,
                                          std::uint64_t loop_count = 20,
                                          std::uint64_t seed = 1);

NamedWorkload suite_member(std::string_view name, std::size_t length = 10000,
                           std::uint64_t loop_count = 20,
                           std::uint64_t seed = 1);

/// Static class histogram of a program.
std::array<std::size_t, kNumClasses> class_histogram(const Program& program);

}  // namespace paracheck

#endif  // PARACHECK_WORKLOAD_HPP
