# Copyright 2026 The IdleNet Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ==============================================================================
"""IdleBlock and hybrid-composition cost model, receptive-field analysis and
verification tools. Native code lives in ``idlenet._core``."""

from idlenet._core import (  # noqa: F401
    ConfigError,
    ShapeError,
    channel_shuffle,
    conv2d,
    gradcheck_ops,
    idle_savings,
    madds_idleblock,
    madds_mbblock,
    network_cost,
    rf_groups,
    rf_probe_agrees,
    run_cli,
    train_smoke,
    verify,
)

__version__ = "0.1.0"
