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
"""Smoke tests for the Python bindings."""

import os

import numpy as np
import pytest

import idlenet

CONFIGS = os.environ.get(
    "IDLENET_CONFIG_DIR",
    os.path.join(os.path.dirname(__file__), "..", "..", "configs"))


def config(name):
    return os.path.join(CONFIGS, name + ".json")


def test_closed_form_spot_values():
    assert idlenet.madds_mbblock(16, 16, 6.0, 3, 1, 32, 32) == 8060928
    assert idlenet.madds_idleblock(16, 6.0, 3, 1, 0.5, 32, 32) == 4915200
    assert idlenet.idle_savings(16, 6.0, 0.5, 32, 32) == 3145728


def test_network_cost_verified():
    report = idlenet.network_cost(config("toy-hc4"), verify=True)
    assert report["oracle_madds"] == report["madds"]
    assert not report["mismatches"]
    assert report["rows"][-1]["index"] == "head"


def test_hybrid_table_row():
    report = idlenet.network_cost(config("mbv3-hc-15-10"))
    assert abs(report["madds"] / 2e6 / 299.8 - 1) < 0.05


def test_channel_shuffle_order():
    x = np.arange(6, dtype=np.float64).reshape(1, 6, 1, 1)
    y = idlenet.channel_shuffle(x, 2)
    assert y.ravel().tolist() == [0, 3, 1, 4, 2, 5]
    np.testing.assert_array_equal(idlenet.channel_shuffle(y, 3), x)
    with pytest.raises(ValueError):
        idlenet.channel_shuffle(x, 4)


def test_conv2d_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((1, 2, 5, 5))
    w = rng.standard_normal((3, 2, 3, 3))
    y, macs = idlenet.conv2d(x, w)
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)))
    want = np.zeros((1, 3, 5, 5))
    for i in range(5):
        for j in range(5):
            want[0, :, i, j] = np.tensordot(w, xp[0, :, i:i + 3, j:j + 3], 3)
    np.testing.assert_allclose(y, want, rtol=0, atol=1e-12)
    assert macs == 3 * 25 * 2 * 9


def test_rf_groups():
    assert [g[2] for g in idlenet.rf_groups(config("rf-two-idler"))] == [1, 5]
    assert idlenet.rf_probe_agrees(config("rf-alternating"))


def test_gradcheck_ops():
    assert all(err < 1e-6 for _, err in idlenet.gradcheck_ops(0))


def test_train_smoke_learns():
    result = idlenet.train_smoke(steps=40, seed=0)
    assert not result["diverged"]
    assert result["final_accuracy"] >= 0.95
    assert result["curve"].startswith("step,loss,accuracy\n")


def test_cli_exit_codes():
    code, out, _ = idlenet.run_cli(["cost", "--config", config("toy-hc4"),
                                    "--format", "csv"])
    assert code == 0 and out.startswith("index,kind,")
    assert idlenet.run_cli(["cost"])[0] == 2
