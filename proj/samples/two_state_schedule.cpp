// Copyright 2026 The seqmcm Authors
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

// Optimal equal-gain schedule for two mixed qubit states shared by R parties.

#include <cstdio>
#include <cstdlib>

#include "seqmcm/seqmcm.hpp"

int main(int argc, char** argv) {
  using namespace seqmcm;
  const double p = argc > 1 ? std::atof(argv[1]) : 0.8;
  const double theta = argc > 2 ? std::atof(argv[2]) : kPi / 3;
  const families::TwoMixedParams params{p, theta};
  const auto o = families::two_mixed_oracle(params);
  std::printf("C = %.6f  s = %.6f\n", o.confidence, o.overlap);
  for (std::size_t r = 1; r <= 5; ++r) {
    const GainSchedule s = families::two_mixed_schedule(params, r);
    const SequentialTrace t = run_sequence(families::two_mixed(params), families::two_mixed_strategy(s), r);
    std::printf("R = %zu  P_J = %.6f (closed form %.6f)  P_I = %.6f\n", r, t.joint_success,
                s.joint_success, t.joint_inconclusive);
  }
  return 0;
}
