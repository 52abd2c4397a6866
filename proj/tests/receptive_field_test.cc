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

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "idlenet/receptive_field.h"

namespace idlenet {
namespace {

const std::string kConfigs = IDLENET_CONFIG_DIR;

std::vector<int64_t> GroupRFs(const RFState& s) {
  std::vector<int64_t> out;
  for (const RFGroup& g : s.Groups()) out.push_back(g.rf);
  return out;
}

TEST(ReceptiveFieldTest, SingleMBBlockIsOneGroup) {
  const RFState s = PropagateRF(LoadSpec(kConfigs + "/rf-mbblock.json"));
  EXPECT_EQ(GroupRFs(s), (std::vector<int64_t>{3}));
}

TEST(ReceptiveFieldTest, SameSideIdleStackFreezesOneGroup) {
  const NetworkSpec spec = LoadSpec(kConfigs + "/rf-two-idler.json");
  const std::vector<RFGroup> groups = PropagateRF(spec).Groups();
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups[0], (RFGroup{0, 4, 1, 1, false}));
  EXPECT_EQ(groups[1], (RFGroup{4, 8, 5, 1, false}));
}

TEST(ReceptiveFieldTest, AlternationUpdatesBothGroups) {
  const RFState s = PropagateRF(LoadSpec(kConfigs + "/rf-alternating.json"));
  EXPECT_EQ(GroupRFs(s), (std::vector<int64_t>{3}));
  EXPECT_EQ(s.size(), 8);
}

TEST(ReceptiveFieldTest, ProbeAgreesOnBundledFragments) {
  for (const char* name : {"rf-two-idler", "rf-alternating", "rf-mbblock"}) {
    const RFComparison cmp = CompareRF(LoadSpec(kConfigs + "/" + name + ".json"));
    EXPECT_TRUE(cmp.ok()) << name << ": " << cmp.disagreements.front();
    EXPECT_GT(cmp.compared, 0) << name;
  }
}

TEST(ReceptiveFieldTest, StridesScaleTheJump) {
  NetworkSpec spec{.name = "s", .in_channels = 4, .in_height = 33,
                   .in_width = 33};
  spec.blocks = {MakeMBBlockConfig(4, 4, 2.0, 3, 2),
                 MakeMBBlockConfig(4, 4, 2.0, 5, 1)};
  const RFState s = PropagateRF(spec);
  EXPECT_EQ(s.channels[0], (ChannelRF{3 + 4 * 2, 2, false}));
  EXPECT_TRUE(CompareRF(spec).ok());
}

TEST(ReceptiveFieldTest, MBBlockAfterIdleStackMerges) {
  NetworkSpec spec = LoadSpec(kConfigs + "/rf-two-idler.json");
  spec.blocks.push_back(MakeMBBlockConfig(8, 8, 2.0, 3, 1));
  EXPECT_EQ(GroupRFs(PropagateRF(spec)), (std::vector<int64_t>{7}));
}

TEST(ReceptiveFieldTest, CsvSchema) {
  const std::string csv =
      PropagateRF(LoadSpec(kConfigs + "/rf-two-idler.json")).ToCsv();
  EXPECT_EQ(csv, "group,ch_lo,ch_hi,rf,jump\n0,0,4,1,1\n1,4,8,5,1\n");
}

TEST(ReceptiveFieldTest, ProbeRejectsOutsidePosition) {
  EXPECT_THROW(ProbeRF(LoadSpec(kConfigs + "/rf-mbblock.json"), 100, 0),
               std::out_of_range);
}

}  // namespace
}  // namespace idlenet
