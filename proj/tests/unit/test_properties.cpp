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

#include "../common/properties.hpp"
#include "doctest.h"

using namespace paracheck;

TEST_SUITE("properties") {

TEST_CASE("randomized programs satisfy the oracle invariants") {
  int generated = 0;
  for (std::uint64_t seed = 1; generated < 1000; ++seed) {
    const test::PropertyCase c = test::random_case(seed);
    Program p;
    try {
      p = gen_workload(c.mix);
    } catch (const WorkloadError&) {
      continue;  // infeasible random mix
    }
    ++generated;
    CAPTURE(seed);
    CAPTURE(format_config(c.config));
    const auto failure = test::check_properties(c.config, p);
    CHECK_MESSAGE(!failure, failure.value_or(""));
  }
}

}  // TEST_SUITE
