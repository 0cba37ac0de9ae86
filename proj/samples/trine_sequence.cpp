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

// Three parties measure the trine in turn, each at inconclusive rate 0.5,
// and print their confidences and disturbances.

#include <cstdio>

#include "seqmcm/seqmcm.hpp"

int main() {
  using namespace seqmcm;
  const Ensemble trine = families::gu({3});
  const SequentialTrace t = run_sequence(trine, families::gu_strategy(3, {0.5}), 3);
  std::printf("%-3s %-10s %-10s %-10s\n", "j", "C", "G", "D");
  for (std::size_t j = 0; j < t.parties.size(); ++j) {
    const PartyRecord& p = t.parties[j];
    std::printf("%-3zu %-10.6f %-10.6f %-10.6f\n", j + 1, p.mcm[0].confidence, p.gain, p.disturbance);
  }
  std::printf("P_J = %.6f  P_I = %.6f\n", t.joint_success, t.joint_inconclusive);
  return 0;
}
