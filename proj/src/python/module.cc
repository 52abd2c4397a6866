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

// Python bindings: cost model, receptive fields, checks and a NumPy view of
// the shuffle / conv ops. Tensors cross the boundary as float64 NCHW arrays.

#include <sstream>
#include <string>
#include <vector>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.h"
#include "idlenet/cost_model.h"
#include "idlenet/gradcheck.h"
#include "idlenet/invariants.h"
#include "idlenet/ops.h"
#include "idlenet/receptive_field.h"
#include "idlenet/toy_train.h"

namespace py = pybind11;

namespace idlenet {
namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor4 ToTensor(const Array& a) {
  if (a.ndim() != 4) throw ShapeError("expected a 4-d (n, c, h, w) array");
  const Shape4 s{a.shape(0), a.shape(1), a.shape(2), a.shape(3)};
  return Tensor4(s, std::vector<double>(a.data(), a.data() + a.size()));
}

Array ToArray(const Tensor4& t) {
  Array out({t.n(), t.c(), t.h(), t.w()});
  std::copy(t.data().begin(), t.data().end(), out.mutable_data());
  return out;
}

py::dict CostDict(const CostReport& r) {
  py::list rows;
  for (const CostRow& row : r.rows) {
    py::dict d;
    d["index"] = row.index;
    d["kind"] = row.kind;
    d["madds"] = row.analytic_madds;
    d["params"] = row.analytic_params;
    d["oracle_madds"] = row.oracle_madds;
    rows.append(d);
  }
  py::dict d;
  d["name"] = r.name;
  d["height"] = r.height;
  d["width"] = r.width;
  d["madds"] = r.total_madds;
  d["params"] = r.total_params;
  d["oracle_madds"] = r.total_oracle_madds;
  d["savings_vs_monotonic"] = r.savings_vs_monotonic;
  d["mismatches"] = r.mismatches;
  d["rows"] = rows;
  return d;
}

}  // namespace
}  // namespace idlenet

PYBIND11_MODULE(_core, m) {
  using namespace idlenet;
  m.doc() = "IdleBlock / hybrid-composition cost and verification toolkit";

  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("madds_mbblock", &MaddsMBBlock, py::arg("cin"), py::arg("cout"),
        py::arg("r"), py::arg("k"), py::arg("s"), py::arg("h"), py::arg("w"),
        py::arg("se") = false, py::arg("se_reduction") = 4);
  m.def("madds_idleblock", &MaddsIdleBlock, py::arg("c"), py::arg("r"),
        py::arg("k"), py::arg("s"), py::arg("alpha"), py::arg("h"),
        py::arg("w"), py::arg("se") = false, py::arg("se_reduction") = 4);
  m.def("idle_savings", &IdleSavings, py::arg("c"), py::arg("r"),
        py::arg("alpha"), py::arg("h"), py::arg("w"), py::arg("s") = 1);

  m.def(
      "network_cost",
      [](const std::string& path, int64_t h, int64_t w, bool verify) {
        return CostDict(NetworkCost(LoadSpec(path), h, w, verify));
      },
      py::arg("config"), py::arg("h") = 0, py::arg("w") = 0,
      py::arg("verify") = false,
      "Per-block and total MAdds/params for a JSON network config.");

  m.def(
      "rf_groups",
      [](const std::string& path) {
        std::vector<py::tuple> out;
        for (const RFGroup& g : PropagateRF(LoadSpec(path)).Groups()) {
          out.push_back(py::make_tuple(g.lo, g.hi, g.rf, g.jump, g.global));
        }
        return out;
      },
      py::arg("config"), "(lo, hi, rf, jump, global) per channel group.");
  m.def(
      "rf_probe_agrees",
      [](const std::string& path) { return CompareRF(LoadSpec(path)).ok(); },
      py::arg("config"));

  m.def(
      "channel_shuffle",
      [](const Array& x, int64_t g) { return ToArray(ChannelShuffle(ToTensor(x), g)); },
      py::arg("x"), py::arg("groups"));
  m.def(
      "conv2d",
      [](const Array& x, const Array& weights, int64_t stride, int64_t groups) {
        const Tensor4 wt = ToTensor(weights);
        ConvGeometry g{x.shape(1), wt.n(), wt.h(), stride, groups};
        ExecContext ctx;
        Tensor4 y = Conv2d(ToTensor(x), g, wt, &ctx);
        return py::make_tuple(ToArray(y), ctx.macs());
      },
      py::arg("x"), py::arg("weights"), py::arg("stride") = 1,
      py::arg("groups") = 1, "Returns (output, MAC count).");

  m.def(
      "verify",
      [](uint64_t seed) {
        std::vector<py::tuple> out;
        for (const CheckResult& r : RunInvariantBattery(seed)) {
          out.push_back(py::make_tuple(r.name, r.pass, r.detail));
        }
        return out;
      },
      py::arg("seed") = 0, py::call_guard<py::gil_scoped_release>());
  m.def(
      "gradcheck_ops",
      [](uint64_t seed) {
        std::vector<py::tuple> out;
        for (const GradCheckReport& r : GradCheckAllOps(seed)) {
          out.push_back(py::make_tuple(r.subject, r.max_rel_err()));
        }
        return out;
      },
      py::arg("seed") = 0);

  m.def(
      "train_smoke",
      [](int64_t steps, uint64_t seed, int64_t n) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = TrainSmoke(ToyHCSpec(seed), MakeToyDataset(n, seed),
                         {.steps = steps});
        }
        py::dict d;
        d["final_accuracy"] = r.final_accuracy;
        d["final_loss"] = r.final_loss;
        d["diverged"] = r.diverged;
        d["curve"] = r.CurveCsv();
        return d;
      },
      py::arg("steps") = 200, py::arg("seed") = 0, py::arg("n") = 128);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = RunCli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command line tool; returns (code, out, err).");
}
