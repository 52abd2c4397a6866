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

#include "cli.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <optional>

#include "CLI11.hpp"
#include "idlenet/cost_model.h"
#include "idlenet/gradcheck.h"
#include "idlenet/init.h"
#include "idlenet/invariants.h"
#include "idlenet/parallel.h"
#include "idlenet/receptive_field.h"
#include "idlenet/toy_train.h"

namespace idlenet {
namespace {

std::string Fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct CostArgs {
  std::string config;
  std::vector<int64_t> hw;
  std::string format = "table";
  bool verify = false;
};

int Cost(const CostArgs& a, std::ostream& out) {
  const NetworkSpec spec = LoadSpec(a.config);
  const int64_t h = a.hw.empty() ? 0 : a.hw[0];
  const int64_t w = a.hw.empty() ? 0 : a.hw[1];
  const CostReport rep = NetworkCost(spec, h, w, a.verify);
  out << (a.format == "csv" ? rep.ToCsv() : rep.ToTable());
  return rep.ok() ? kExitOk : kExitCheckFailed;
}

struct VerifyArgs {
  uint64_t seed = 0;
  std::optional<double> alpha;
};

// Idle block C=4 at the requested alpha: valid configs must keep their idle
// channels bitwise and match the closed-form cost.
CheckResult CheckAlpha(double alpha, uint64_t seed) {
  BlockConfig c = MakeIdleConfig(BlockKind::kIdleL, 4, 2, 3, alpha);
  c.Validate();  // ConfigError -> usage error
  const Block b = BuildBlock(c, {seed, "alpha."});
  const Tensor4 x = RandomTensor({1, 4, 5, 5}, seed, "alpha.x");
  ExecContext ctx;
  const Tensor4 y = b.Forward(x, &ctx);
  bool ok = ctx.madds() == MaddsIdleBlock(4, 2, 3, 1, alpha, 5, 5);
  const ChannelRange idle = c.idle_range();
  for (int64_t ch = idle.lo; ch < idle.hi; ++ch) {
    ok = ok && std::equal(x.plane(0, ch), x.plane(0, ch) + 25, y.plane(0, ch));
  }
  return {"alpha-" + Fixed(alpha, 2), ok,
          "C=4 idle " + std::to_string(c.idle_channels()) + ", active " +
              std::to_string(c.active_channels())};
}

int Verify(const VerifyArgs& a, std::ostream& out) {
  std::vector<CheckResult> results;
  if (a.alpha) results.push_back(CheckAlpha(*a.alpha, a.seed));
  for (auto& r : RunInvariantBattery(a.seed)) results.push_back(std::move(r));
  int failed = 0;
  for (const CheckResult& r : results) {
    out << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
    failed += !r.pass;
  }
  out << (failed ? std::to_string(failed) + " invariant(s) failed\n"
                 : "all invariants hold\n");
  return failed ? kExitCheckFailed : kExitOk;
}

struct RfArgs {
  std::string config;
  bool probe = false;
  std::string format = "table";
};

int Rf(const RfArgs& a, std::ostream& out) {
  const NetworkSpec spec = LoadSpec(a.config);
  const RFState state = PropagateRF(spec);
  if (a.format == "csv") {
    out << state.ToCsv();
  } else {
    out << (spec.name.empty() ? a.config : spec.name) << ": "
        << state.Groups().size() << " receptive-field group(s)\n";
    for (const RFGroup& g : state.Groups()) {
      out << "  channels [" << g.lo << ", " << g.hi << ")  rf "
          << (g.global ? std::string("global") : std::to_string(g.rf))
          << "  jump " << g.jump << "\n";
    }
  }
  if (!a.probe) return kExitOk;
  const RFComparison cmp = CompareRF(spec);
  const std::vector<ProbeExtent> probed = ProbeRF(spec);
  if (a.format != "csv") {
    out << "probe (centre output position):\n";
    for (const RFGroup& g : state.Groups()) {
      const ProbeExtent& p = probed[g.lo];
      out << "  channels [" << g.lo << ", " << g.hi << ")  measured "
          << p.rows << "x" << p.cols << "\n";
    }
  }
  for (const auto& d : cmp.disagreements) out << "DISAGREE " << d << "\n";
  out << "probe: " << cmp.compared << " channel(s) compared, " << cmp.skipped
      << " skipped, " << (cmp.ok() ? "agree" : "DISAGREE") << "\n";
  return cmp.ok() ? kExitOk : kExitCheckFailed;
}

struct GradArgs {
  uint64_t seed = 0;
  std::string config;
  bool verbose = false;
};

int Grad(const GradArgs& a, std::ostream& out) {
  std::vector<GradCheckReport> reports;
  if (a.config.empty()) {
    reports = GradCheckAllOps(a.seed);
    for (auto& r : GradCheckAllBlocks(a.seed)) reports.push_back(std::move(r));
  } else {
    const NetworkSpec spec = LoadSpec(a.config);
    GradCheckOptions opts;
    opts.seed = a.seed;
    reports.push_back(
        GradCheckNetwork(BuildNetwork(spec), spec.InputShape(2), opts));
  }
  int failed = 0;
  for (const auto& r : reports) {
    if (a.verbose) {
      out << r.ToString();
    } else {
      out << (r.pass() ? "PASS " : "FAIL ") << r.subject
          << " max_rel_err=" << r.max_rel_err() << " tol=" << r.tolerance
          << "\n";
    }
    failed += !r.pass();
  }
  return failed ? kExitCheckFailed : kExitOk;
}

struct TrainArgs {
  std::string config;
  int64_t steps = 200;
  double lr = 0.05;
  double momentum = 0.9;
  uint64_t seed = 0;
  int64_t n = 128;
  int64_t batch = 32;
  std::string format = "table";
  std::optional<double> expect;
};

int Train(const TrainArgs& a, std::ostream& out) {
  NetworkSpec spec = a.config.empty() ? ToyHCSpec(a.seed) : LoadSpec(a.config);
  spec.seed = a.seed;
  const ToyDataset data = MakeToyDataset(a.n, a.seed);
  TrainOptions opts{a.steps, a.lr, a.momentum, a.batch};
  const TrainResult r = TrainSmoke(spec, data, opts);
  if (a.format == "csv") {
    out << r.CurveCsv();
  } else {
    out << "trained " << r.curve.size() << " step(s) on " << a.n
        << " images: final loss " << Fixed(r.final_loss, 6) << ", accuracy "
        << Fixed(100.0 * r.final_accuracy, 2) << "%"
        << (r.diverged ? " (DIVERGED)" : "") << "\n";
  }
  if (r.diverged) return kExitCheckFailed;
  if (a.expect && r.final_accuracy < *a.expect) return kExitCheckFailed;
  return kExitOk;
}

struct BenchArgs {
  std::string config;
  int repeat = 5;
  int threads = 1;
  int64_t batch = 1;
  std::vector<int64_t> hw;
};

int Bench(const BenchArgs& a, std::ostream& out) {
  NetworkSpec spec = LoadSpec(a.config);
  if (!a.hw.empty()) {
    spec.in_height = a.hw[0];
    spec.in_width = a.hw[1];
  }
  const Network net = BuildNetwork(spec);
  const Tensor4 x = RandomTensor(spec.InputShape(a.batch), spec.seed, "bench.x");
  SetNumThreads(a.threads);
  std::vector<double> ms;
  for (int i = 0; i < a.repeat; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    const Tensor4 y = net.Forward(x);
    const auto t1 = std::chrono::steady_clock::now();
    ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  SetNumThreads(1);
  std::sort(ms.begin(), ms.end());
  const size_t n = ms.size();
  const double median =
      n % 2 ? ms[n / 2] : 0.5 * (ms[n / 2 - 1] + ms[n / 2]);
  // Nearest-rank percentile.
  const size_t rank = static_cast<size_t>(std::ceil(0.9 * n));
  const double p90 = ms[std::max<size_t>(rank, 1) - 1];
  out << (spec.name.empty() ? a.config : spec.name) << " @ "
      << spec.in_height << "x" << spec.in_width << " batch " << a.batch
      << ", threads " << a.threads << ", " << n << " sample(s): median "
      << Fixed(median, 3) << " ms, p90 " << Fixed(p90, 3) << " ms\n";
  return kExitOk;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"IdleNet: cost, receptive-field and gradient tooling for "
               "idle-channel networks",
               "idlenet"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  CostArgs cost;
  auto* c = app.add_subcommand("cost", "Closed-form MAdds and parameter report");
  c->add_option("--config", cost.config, "Network config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  c->add_option("--hw", cost.hw, "Input height and width (default: config)")
      ->expected(2);
  c->add_option("--format", cost.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}));
  c->add_flag("--verify", cost.verify,
              "Run a forward pass and require analytic == executed counts");

  VerifyArgs verify;
  auto* v = app.add_subcommand("verify", "Run the invariant battery");
  v->add_option("--seed", verify.seed, "Seed for random draws");
  v->add_option("--alpha", verify.alpha,
                "Also check a C=4 idle block at this idle ratio");

  RfArgs rf;
  auto* r = app.add_subcommand("rf", "Per-channel receptive-field analysis");
  r->add_option("--config", rf.config, "Network or fragment config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  r->add_flag("--probe", rf.probe, "Compare against the perturbation probe");
  r->add_option("--format", rf.format, "table or csv")
      ->check(CLI::IsMember({"table", "csv"}));

  GradArgs grad;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  g->add_option("--seed", grad.seed, "Seed for inputs and sampled entries");
  g->add_option("--config", grad.config,
                "Check this network instead of the op/block set")
      ->check(CLI::ExistingFile);
  g->add_flag("-v,--verbose", grad.verbose, "Per-tensor detail");

  TrainArgs train;
  auto* t = app.add_subcommand("train-smoke", "Train on the synthetic blob task");
  t->add_option("--config", train.config,
                "Network config (default: built-in 4-block hybrid net)")
      ->check(CLI::ExistingFile);
  t->add_option("--steps", train.steps, "SGD steps")->check(CLI::NonNegativeNumber);
  t->add_option("--lr", train.lr, "Learning rate")->check(CLI::PositiveNumber);
  t->add_option("--momentum", train.momentum, "Momentum")->check(CLI::Range(0.0, 1.0));
  t->add_option("--seed", train.seed, "Data and init seed");
  t->add_option("--n", train.n, "Dataset size")->check(CLI::Range(2, 1 << 20));
  t->add_option("--batch", train.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  t->add_option("--format", train.format, "table or csv (loss curve)")
      ->check(CLI::IsMember({"table", "csv"}));
  t->add_option("--expect-accuracy", train.expect,
                "Exit 1 if final accuracy is below this fraction");

  BenchArgs bench;
  auto* b = app.add_subcommand("bench", "Wall-clock forward-pass timing");
  b->add_option("--config", bench.config, "Network config (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  b->add_option("--repeat", bench.repeat, "Timed forward passes")
      ->check(CLI::PositiveNumber);
  b->add_option("--threads", bench.threads, "Intra-op threads")
      ->check(CLI::PositiveNumber);
  b->add_option("--batch", bench.batch, "Batch size")->check(CLI::PositiveNumber);
  b->add_option("--hw", bench.hw, "Input height and width (default: config)")
      ->expected(2);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (*c) return Cost(cost, out);
    if (*v) return Verify(verify, out);
    if (*r) return Rf(rf, out);
    if (*g) return Grad(grad, out);
    if (*t) return Train(train, out);
    if (*b) return Bench(bench, out);
  } catch (const std::invalid_argument& e) {  // ConfigError, SpecError, ShapeError
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace idlenet
