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

#include "idlenet/network.h"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace idlenet {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string Join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += "; ";
    out += p;
  }
  return out;
}

// Accumulates schema errors while walking the JSON tree.
class Reader {
 public:
  std::vector<std::string> errors;

  bool Object(const json& j, const std::string& where) {
    if (j.is_object()) return true;
    errors.push_back(where + ": expected an object");
    return false;
  }

  void Keys(const json& j, const std::string& where,
            std::initializer_list<std::string_view> allowed) {
    for (const auto& [key, value] : j.items()) {
      bool ok = false;
      for (auto a : allowed) ok = ok || key == a;
      if (!ok) errors.push_back(where + ": unknown key '" + key + "'");
    }
  }

  const json* Find(const json& j, const std::string& where,
                   const std::string& key, bool required) {
    auto it = j.find(key);
    if (it == j.end()) {
      if (required) errors.push_back(where + ": missing key '" + key + "'");
      return nullptr;
    }
    return &*it;
  }

  template <typename Fn>
  void Int(const json& j, const std::string& where, const std::string& key,
           bool required, Fn&& set) {
    const json* v = Find(j, where, key, required);
    if (!v) return;
    if (!v->is_number_integer()) {
      errors.push_back(where + "." + key + ": expected an integer");
      return;
    }
    set(v->get<int64_t>());
  }

  template <typename Fn>
  void Number(const json& j, const std::string& where, const std::string& key,
              bool required, Fn&& set) {
    const json* v = Find(j, where, key, required);
    if (!v) return;
    if (!v->is_number()) {
      errors.push_back(where + "." + key + ": expected a number");
      return;
    }
    set(v->get<double>());
  }

  template <typename Fn>
  void Bool(const json& j, const std::string& where, const std::string& key,
            bool required, Fn&& set) {
    const json* v = Find(j, where, key, required);
    if (!v) return;
    if (!v->is_boolean()) {
      errors.push_back(where + "." + key + ": expected true/false");
      return;
    }
    set(v->get<bool>());
  }

  template <typename Fn>
  void String(const json& j, const std::string& where, const std::string& key,
              bool required, Fn&& set) {
    const json* v = Find(j, where, key, required);
    if (!v) return;
    if (!v->is_string()) {
      errors.push_back(where + "." + key + ": expected a string");
      return;
    }
    try {
      set(v->get<std::string>());
    } catch (const std::invalid_argument& e) {
      errors.push_back(where + "." + key + ": " + e.what());
    }
  }
};

BlockConfig ParseBlock(Reader& rd, const json& j, const std::string& where) {
  BlockConfig b;
  if (!rd.Object(j, where)) return b;
  rd.Keys(j, where, {"kind", "cin", "cout", "r", "k", "s", "alpha", "se",
                     "se_reduction", "act", "active_residual", "groups"});
  rd.String(j, where, "kind", true,
            [&](const std::string& v) { b.kind = ParseBlockKind(v); });
  rd.Int(j, where, "cin", true, [&](int64_t v) { b.in_channels = v; });
  rd.Int(j, where, "cout", true, [&](int64_t v) { b.out_channels = v; });
  rd.Number(j, where, "r", true, [&](double v) { b.expansion = v; });
  rd.Int(j, where, "k", true, [&](int64_t v) { b.kernel = v; });
  rd.Int(j, where, "s", true, [&](int64_t v) { b.stride = v; });
  rd.Number(j, where, "alpha", false, [&](double v) { b.idle_alpha = v; });
  rd.Bool(j, where, "se", false, [&](bool v) { b.se = v; });
  rd.Int(j, where, "se_reduction", false,
         [&](int64_t v) { b.se_reduction = v; });
  rd.String(j, where, "act", false,
            [&](const std::string& v) { b.activation = ParseActivation(v); });
  rd.Bool(j, where, "active_residual", false,
          [&](bool v) { b.active_residual = v; });
  rd.Int(j, where, "groups", false, [&](int64_t v) { b.shuffle_groups = v; });
  return b;
}

HCPattern ParseHC(Reader& rd, const json& j) {
  HCPattern hc;
  const std::string where = "hc";
  if (!rd.Object(j, where)) return hc;
  rd.Keys(j, where, {"base", "mode", "alpha", "insertions"});
  rd.String(j, where, "base", false,
            [&](const std::string& v) { hc.base = v; });
  rd.String(j, where, "mode", true,
            [&](const std::string& v) { hc.mode = ParseHCMode(v); });
  rd.Number(j, where, "alpha", false, [&](double v) { hc.alpha = v; });
  const json* ins = rd.Find(j, where, "insertions", true);
  if (ins && !ins->is_array()) {
    rd.errors.push_back("hc.insertions: expected an array of [position, count]");
  } else if (ins) {
    for (size_t i = 0; i < ins->size(); ++i) {
      const json& e = (*ins)[i];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
          !e[1].is_number_integer()) {
        rd.errors.push_back("hc.insertions[" + std::to_string(i) +
                            "]: expected [position, count]");
        continue;
      }
      hc.insertions.push_back({e[0].get<int64_t>(), e[1].get<int64_t>()});
    }
  }
  return hc;
}

ordered_json BlockToJson(const BlockConfig& b) {
  ordered_json j;
  j["kind"] = BlockKindName(b.kind);
  j["cin"] = b.in_channels;
  j["cout"] = b.out_channels;
  j["r"] = b.expansion;
  j["k"] = b.kernel;
  j["s"] = b.stride;
  if (IsIdleKind(b.kind)) j["alpha"] = b.idle_alpha;
  j["se"] = b.se;
  if (b.se_reduction != 4) j["se_reduction"] = b.se_reduction;
  j["act"] = ActivationName(b.activation);
  if (IsIdleKind(b.kind)) j["active_residual"] = b.active_residual;
  if (b.kind == BlockKind::kISB || b.kind == BlockKind::kShuffleV1) {
    j["groups"] = b.shuffle_groups;
  }
  return j;
}

std::string BlockWhere(size_t i) { return "blocks[" + std::to_string(i) + "]"; }

}  // namespace

SpecError::SpecError(std::vector<std::string> violations)
    : ConfigError(Join(violations)), violations_(std::move(violations)) {}

std::string_view HeadPoolName(HeadPool pool) {
  return pool == HeadPool::kFlatten ? "flatten" : "avg";
}

std::string_view HCModeName(HCMode mode) {
  switch (mode) {
    case HCMode::kMonotonicIdle: return "monotonic_idle";
    case HCMode::kAlternatingLR: return "alternating_lr";
    case HCMode::kMonotonicMB: return "monotonic_mb";
  }
  return "?";
}

HCMode ParseHCMode(std::string_view name) {
  for (HCMode m : {HCMode::kMonotonicIdle, HCMode::kAlternatingLR,
                   HCMode::kMonotonicMB}) {
    if (HCModeName(m) == name) return m;
  }
  throw ConfigError("unknown hc mode '" + std::string(name) + "'");
}

int64_t HCPattern::total() const {
  int64_t n = 0;
  for (const auto& i : insertions) n += i.count;
  return n;
}

std::vector<std::string> NetworkSpec::Violations() const {
  std::vector<std::string> v;
  if (in_channels < 1 || in_height < 1 || in_width < 1) {
    v.push_back("input: c, h and w must be positive");
  }
  int64_t channels = in_channels;
  int64_t h = in_height, w = in_width;
  if (stem) {
    if (stem->out_channels < 1) v.push_back("stem.out: must be positive");
    if (stem->kernel < 1 || stem->kernel % 2 == 0) {
      v.push_back("stem.k: must be odd and positive");
    }
    if (stem->stride < 1) v.push_back("stem.s: must be positive");
    channels = stem->out_channels;
    h = ConvOutputSize(h, std::max<int64_t>(stem->stride, 1));
    w = ConvOutputSize(w, std::max<int64_t>(stem->stride, 1));
  }
  if (blocks.empty()) v.push_back("blocks: list is empty");
  for (size_t i = 0; i < blocks.size(); ++i) {
    const BlockConfig& b = blocks[i];
    try {
      b.Validate();
    } catch (const ConfigError& e) {
      v.push_back(BlockWhere(i) + ": " + e.what());
    }
    if (b.in_channels != channels) {
      v.push_back(BlockWhere(i) + ": cin " + std::to_string(b.in_channels) +
                  " does not match preceding output width " +
                  std::to_string(channels));
    }
    channels = b.out_channels;
    if (b.stride >= 1) {
      h = ConvOutputSize(h, b.stride);
      w = ConvOutputSize(w, b.stride);
    }
  }
  if (h < 1 || w < 1) v.push_back("spatial size collapses below 1");
  if (head) {
    if (head->widths.empty()) v.push_back("head.widths: list is empty");
    for (size_t i = 0; i < head->widths.size(); ++i) {
      if (head->widths[i] < 1) {
        v.push_back("head.widths[" + std::to_string(i) + "]: must be positive");
      }
    }
  }
  if (classes && *classes < 1) v.push_back("classifier.classes: must be positive");
  if (hc) {
    if (!(hc->alpha > 0.0 && hc->alpha < 1.0)) {
      v.push_back("hc.alpha: must lie in (0, 1)");
    }
  }
  return v;
}

void NetworkSpec::Validate() const {
  auto v = Violations();
  if (!v.empty()) throw SpecError(std::move(v));
}

int64_t NetworkSpec::CountKind(BlockKind kind) const {
  int64_t n = 0;
  for (const auto& b : blocks) n += b.kind == kind;
  return n;
}

int64_t NetworkSpec::CountIdle() const {
  int64_t n = 0;
  for (const auto& b : blocks) n += IsIdleKind(b.kind);
  return n;
}

NetworkSpec ParseSpec(const std::string& json_text, const std::string& source) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw SpecError({source + ": parse error: " + e.what()});
  }
  Reader rd;
  NetworkSpec spec;
  if (!rd.Object(root, source)) throw SpecError(rd.errors);
  rd.Keys(root, "spec", {"name", "input", "stem", "blocks", "head",
                         "classifier", "seed", "hc"});
  rd.String(root, "spec", "name", false,
            [&](const std::string& v) { spec.name = v; });
  if (const json* in = rd.Find(root, "spec", "input", true);
      in && rd.Object(*in, "input")) {
    rd.Keys(*in, "input", {"c", "h", "w"});
    rd.Int(*in, "input", "c", true, [&](int64_t v) { spec.in_channels = v; });
    rd.Int(*in, "input", "h", true, [&](int64_t v) { spec.in_height = v; });
    rd.Int(*in, "input", "w", true, [&](int64_t v) { spec.in_width = v; });
  }
  if (const json* st = rd.Find(root, "spec", "stem", false);
      st && rd.Object(*st, "stem")) {
    StemSpec s;
    rd.Keys(*st, "stem", {"out", "k", "s", "act"});
    rd.Int(*st, "stem", "out", true, [&](int64_t v) { s.out_channels = v; });
    rd.Int(*st, "stem", "k", true, [&](int64_t v) { s.kernel = v; });
    rd.Int(*st, "stem", "s", true, [&](int64_t v) { s.stride = v; });
    rd.String(*st, "stem", "act", false,
              [&](const std::string& v) { s.activation = ParseActivation(v); });
    spec.stem = s;
  }
  if (const json* bl = rd.Find(root, "spec", "blocks", true)) {
    if (!bl->is_array()) {
      rd.errors.push_back("blocks: expected an array");
    } else {
      for (size_t i = 0; i < bl->size(); ++i) {
        spec.blocks.push_back(ParseBlock(rd, (*bl)[i], BlockWhere(i)));
      }
    }
  }
  if (const json* hd = rd.Find(root, "spec", "head", false);
      hd && rd.Object(*hd, "head")) {
    HeadSpec h;
    rd.Keys(*hd, "head", {"widths", "act", "pool"});
    if (const json* ws = rd.Find(*hd, "head", "widths", true)) {
      if (!ws->is_array()) {
        rd.errors.push_back("head.widths: expected an array");
      } else {
        for (const auto& x : *ws) {
          if (!x.is_number_integer()) {
            rd.errors.push_back("head.widths: expected integers");
            break;
          }
          h.widths.push_back(x.get<int64_t>());
        }
      }
    }
    rd.String(*hd, "head", "act", false,
              [&](const std::string& v) { h.activation = ParseActivation(v); });
    rd.String(*hd, "head", "pool", false, [&](const std::string& v) {
      if (v == "avg") {
        h.pool = HeadPool::kAverage;
      } else if (v == "flatten") {
        h.pool = HeadPool::kFlatten;
      } else {
        throw std::invalid_argument("expected \"avg\" or \"flatten\"");
      }
    });
    spec.head = h;
  }
  if (const json* cl = rd.Find(root, "spec", "classifier", false);
      cl && rd.Object(*cl, "classifier")) {
    rd.Keys(*cl, "classifier", {"classes"});
    rd.Int(*cl, "classifier", "classes", true,
           [&](int64_t v) { spec.classes = v; });
  }
  if (const json* sd = rd.Find(root, "spec", "seed", false)) {
    if (!sd->is_number_unsigned()) {
      rd.errors.push_back("seed: expected a non-negative integer");
    } else {
      spec.seed = sd->get<uint64_t>();
    }
  }
  if (const json* hc = rd.Find(root, "spec", "hc", false)) {
    spec.hc = ParseHC(rd, *hc);
  }

  std::vector<std::string> errors = std::move(rd.errors);
  if (errors.empty()) {
    errors = spec.Violations();
  }
  if (!errors.empty()) {
    for (auto& e : errors) e = source + ": " + e;
    throw SpecError(std::move(errors));
  }
  return spec;
}

NetworkSpec LoadSpec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError({path + ": cannot open file"});
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseSpec(ss.str(), path);
}

std::string SpecToJson(const NetworkSpec& spec) {
  ordered_json j;
  if (!spec.name.empty()) j["name"] = spec.name;
  j["input"] = {{"c", spec.in_channels}, {"h", spec.in_height},
                {"w", spec.in_width}};
  if (spec.stem) {
    j["stem"] = {{"out", spec.stem->out_channels},
                 {"k", spec.stem->kernel},
                 {"s", spec.stem->stride},
                 {"act", ActivationName(spec.stem->activation)}};
  }
  j["blocks"] = ordered_json::array();
  for (const auto& b : spec.blocks) j["blocks"].push_back(BlockToJson(b));
  if (spec.head) {
    j["head"] = {{"widths", spec.head->widths},
                 {"act", ActivationName(spec.head->activation)}};
    if (spec.head->pool != HeadPool::kAverage) {
      j["head"]["pool"] = HeadPoolName(spec.head->pool);
    }
  }
  if (spec.classes) j["classifier"] = {{"classes", *spec.classes}};
  j["seed"] = spec.seed;
  if (spec.hc) {
    ordered_json ins = ordered_json::array();
    for (const auto& i : spec.hc->insertions) {
      ins.push_back({i.position, i.count});
    }
    j["hc"] = {{"base", spec.hc->base},
               {"mode", HCModeName(spec.hc->mode)},
               {"alpha", spec.hc->alpha},
               {"insertions", ins}};
  }
  return j.dump(2);
}

NetworkSpec ApplyHC(const NetworkSpec& base, const HCPattern& pattern) {
  const int64_t n = static_cast<int64_t>(base.blocks.size());
  std::vector<int64_t> count(n, 0);
  std::set<int64_t> seen;
  for (const auto& ins : pattern.insertions) {
    if (ins.position < 0 || ins.position >= n) {
      throw ConfigError("hc: insertion position " +
                        std::to_string(ins.position) + " outside [0, " +
                        std::to_string(n) + ")");
    }
    if (ins.count < 0) throw ConfigError("hc: negative insertion count");
    if (!seen.insert(ins.position).second) {
      throw ConfigError("hc: position " + std::to_string(ins.position) +
                        " listed twice");
    }
    count[ins.position] = ins.count;
  }

  NetworkSpec out = base;
  out.blocks.clear();
  for (int64_t i = 0; i < n; ++i) {
    const BlockConfig& prev = base.blocks[i];
    out.blocks.push_back(prev);
    for (int64_t j = 0; j < count[i]; ++j) {
      BlockConfig b = prev;
      b.in_channels = b.out_channels = prev.out_channels;
      b.stride = 1;
      switch (pattern.mode) {
        case HCMode::kMonotonicMB:
          b.kind = BlockKind::kMBBlock;
          break;
        case HCMode::kMonotonicIdle:
          b.kind = BlockKind::kIdleL;
          break;
        case HCMode::kAlternatingLR:
          b.kind = j % 2 == 0 ? BlockKind::kIdleL : BlockKind::kIdleR;
          break;
      }
      if (b.kind != BlockKind::kMBBlock) {
        b.idle_alpha = pattern.alpha;
        b.active_residual = true;
      }
      out.blocks.push_back(b);
    }
  }
  out.hc = pattern;
  return out;
}

NetworkSpec ReplaceIdleWithMB(const NetworkSpec& spec) {
  NetworkSpec out = spec;
  for (auto& b : out.blocks) {
    if (IsIdleKind(b.kind)) b.kind = BlockKind::kMBBlock;
  }
  out.hc.reset();
  return out;
}

Network BuildNetwork(const NetworkSpec& spec) {
  spec.Validate();
  Network net;
  net.spec_ = spec;
  int64_t channels = spec.in_channels;
  if (spec.stem) {
    const StemSpec& s = *spec.stem;
    GraphBuilder b("stem.", spec.seed);
    int t = b.Conv(GraphBuilder::input(), "conv", channels, s.out_channels,
                   s.kernel, s.stride, 1);
    t = b.Affine(t, "bn", s.out_channels);
    t = b.Act(t, s.activation);
    net.stem_ = std::move(b).Finish(t);
    channels = s.out_channels;
  }
  for (size_t i = 0; i < spec.blocks.size(); ++i) {
    BuildOptions opts{spec.seed, "blocks." + std::to_string(i) + "."};
    net.blocks_.push_back(BuildBlock(spec.blocks[i], opts));
    channels = spec.blocks[i].out_channels;
  }
  if (spec.head || spec.classes) {
    int64_t h = spec.in_height, w = spec.in_width;
    if (spec.stem) {
      h = ConvOutputSize(h, spec.stem->stride);
      w = ConvOutputSize(w, spec.stem->stride);
    }
    for (const auto& blk : spec.blocks) {
      h = ConvOutputSize(h, blk.stride);
      w = ConvOutputSize(w, blk.stride);
    }
    GraphBuilder b("head.", spec.seed);
    int t = GraphBuilder::input();
    if (spec.head) {
      const HeadSpec& h = *spec.head;
      t = b.Conv(t, "conv", channels, h.widths[0], 1, 1, 1);
      t = b.Affine(t, "bn", h.widths[0]);
      t = b.Act(t, h.activation);
      channels = h.widths[0];
    }
    if (spec.head && spec.head->pool == HeadPool::kFlatten) {
      t = b.FlattenValue(t);
      channels *= h * w;
    } else {
      t = b.GlobalPool(t);
    }
    if (spec.head) {
      for (size_t i = 1; i < spec.head->widths.size(); ++i) {
        const int64_t width = spec.head->widths[i];
        t = b.DenseLayer(t, "fc" + std::to_string(i), channels, width);
        t = b.Act(t, spec.head->activation);
        channels = width;
      }
    }
    if (spec.classes) {
      t = b.DenseLayer(t, "classifier", channels, *spec.classes);
    }
    net.head_ = std::move(b).Finish(t);
  }
  return net;
}

void Network::CheckInput(const Tensor4& x) const {
  if (x.c() != spec_.in_channels || x.h() != spec_.in_height ||
      x.w() != spec_.in_width) {
    throw ShapeError("network input " + x.shape().ToString() +
                     " does not match spec " + spec_.InputShape(x.n()).ToString());
  }
}

Tensor4 Network::Forward(const Tensor4& x, ExecContext* ctx) const {
  CheckInput(x);
  Tensor4 t = stem_.Forward(x, ctx);
  for (const Block& b : blocks_) t = b.graph.Forward(t, ctx);
  return head_.Forward(t, ctx);
}

Network::Trace Network::ForwardTraced(const Tensor4& x,
                                      ExecContext* ctx) const {
  CheckInput(x);
  Trace trace;
  trace.stem = stem_.ForwardTraced(x, ctx);
  const Tensor4* t = &stem_.TraceOutput(trace.stem);
  trace.blocks.reserve(blocks_.size());
  for (const Block& b : blocks_) {
    trace.blocks.push_back(b.graph.ForwardTraced(*t, ctx));
    t = &b.graph.TraceOutput(trace.blocks.back());
  }
  trace.head = head_.ForwardTraced(*t, ctx);
  return trace;
}

const Tensor4& Network::TraceOutput(const Trace& trace) const {
  return head_.TraceOutput(trace.head);
}

Network::Gradients Network::Backward(const Trace& trace,
                                     const Tensor4& cotangent) const {
  std::vector<std::vector<Tensor4>> block_grads(blocks_.size());
  Graph::Gradients head = head_.Backward(trace.head, cotangent);
  Tensor4 g = std::move(head.input);
  for (size_t i = blocks_.size(); i-- > 0;) {
    Graph::Gradients bg = blocks_[i].graph.Backward(trace.blocks[i], g);
    g = std::move(bg.input);
    block_grads[i] = std::move(bg.params);
  }
  Graph::Gradients stem = stem_.Backward(trace.stem, g);

  Gradients out{std::move(stem.input), {}};
  for (auto& p : stem.params) out.params.push_back(std::move(p));
  for (auto& bg : block_grads) {
    for (auto& p : bg) out.params.push_back(std::move(p));
  }
  for (auto& p : head.params) out.params.push_back(std::move(p));
  return out;
}

std::vector<const NamedTensor*> Network::params() const {
  std::vector<const NamedTensor*> out;
  for (const auto& p : stem_.params()) out.push_back(&p);
  for (const auto& b : blocks_) {
    for (const auto& p : b.graph.params()) out.push_back(&p);
  }
  for (const auto& p : head_.params()) out.push_back(&p);
  return out;
}

std::vector<NamedTensor*> Network::mutable_params() {
  std::vector<NamedTensor*> out;
  for (auto& p : stem_.mutable_params()) out.push_back(&p);
  for (auto& b : blocks_) {
    for (auto& p : b.graph.mutable_params()) out.push_back(&p);
  }
  for (auto& p : head_.mutable_params()) out.push_back(&p);
  return out;
}

int64_t Network::ParamCount() const {
  int64_t n = stem_.ParamCount() + head_.ParamCount();
  for (const auto& b : blocks_) n += b.ParamCount();
  return n;
}

}  // namespace idlenet
