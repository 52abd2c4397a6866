/* Copyright 2026 The IdleNet Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Invariant battery shared by `idlenet verify` and the acceptance suite.
// Every check is deterministic given its seed and reports what it compared.

#ifndef IDLENET_INVARIANTS_H_
#define IDLENET_INVARIANTS_H_

#include <cstdint>
#include <string>
#include <vector>

namespace idlenet {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

// Closed-form block MAdds == 2 x executed MAC count (tolerance 0) on
// `cases` random MBBlock and `cases` random idle-block configurations.
CheckResult CheckCostOracle(uint64_t seed, int cases = 50);
// MBBlock - IdleBlock == IdleSavings exactly on random draws, plus the
// C=16, r=6, k=3, alpha=0.5, 32x32 spot values.
CheckResult CheckSavingsIdentity(uint64_t seed, int cases = 50);
// Idle channels of IdleL/IdleR/ISB pass through bitwise (ISB through the
// shuffle permutation) for random weights and inputs.
CheckResult CheckIdleIdentity(uint64_t seed, int cases = 100);
// shuffle(g) then shuffle(C/g) is the identity for all g | C, C <= 64.
CheckResult CheckShuffleInvolution(uint64_t seed);
// Analytic RF == probe on random stacks of depth <= 4, plus the two-IdleR
// (1, 5) and alternating (3, 3) group claims.
CheckResult CheckReceptiveField(uint64_t seed, int stacks = 20);
// Every op at 1e-6, every block kind and the toy HC network at 1e-5.
CheckResult CheckGradients(uint64_t seed);
// HC cost == base + inserted idle costs; replacing idle blocks with
// MBBlocks adds exactly the reported savings.
CheckResult CheckCostAdditivity(uint64_t seed);

std::vector<CheckResult> RunInvariantBattery(uint64_t seed);

}  // namespace idlenet

#endif  // IDLENET_INVARIANTS_H_
