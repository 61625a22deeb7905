// Copyright (c) 2026 The traincast Authors
// SPDX-License-Identifier: Apache-2.0

#include "traincast/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "traincast/errors.hpp"

namespace traincast {

namespace {

using json = nlohmann::ordered_json;

void require(bool condition, Errc code, const std::string& message) {
  if (!condition) fail(code, message);
}

std::string fmt_count(std::int64_t value) { return std::to_string(value); }

}  // namespace

const char* model_kind_name(ModelKind kind) noexcept {
  return kind == ModelKind::Moe ? "moe" : "dense-gpt";
}

const char* intra_topology_name(IntraTopology topo) noexcept {
  switch (topo) {
    case IntraTopology::Pcie: return "pcie";
    case IntraTopology::Nvlink: return "nvlink";
    case IntraTopology::Nvswitch: return "nvswitch";
  }
  return "nvswitch";
}

DerivedParams validate(const ModelSpec& model, const ParallelismConfig& parallel,
                       const PlatformSpec& platform) {
  require(model.layers >= 1 && model.hidden >= 1 && model.seq_len >= 1 &&
              model.global_batch >= 1 && model.attn_heads >= 1 &&
              model.vocab_size >= 0 && model.param_count > 0.0,
          Errc::InvalidSpec, "model counts must be >= 1 and params > 0");
  require(model.precision_bytes == 1 || model.precision_bytes == 2 ||
              model.precision_bytes == 4,
          Errc::InvalidSpec, "precision_bytes must be one of {1, 2, 4}");
  require(parallel.pp >= 1 && parallel.tp >= 1 && parallel.dp >= 1 &&
              parallel.ep >= 1 && parallel.micro_batch >= 1 &&
              parallel.interleave >= 1,
          Errc::InvalidSpec, "parallel degrees must be >= 1");
  require(platform.machines >= 1 && platform.gpus_per_machine >= 1 &&
              platform.peak_flops > 0.0,
          Errc::InvalidSpec, "platform must have machines, GPUs and F > 0");

  if (model.is_moe()) {
    require(model.moe_expert_interval >= 1 &&
                model.layers % model.moe_expert_interval == 0,
            Errc::InvalidSpec,
            "layers must be divisible by moe_expert_interval");
    require(model.moe_top_k_max >= 1, Errc::InvalidSpec,
            "moe_top_k_max must be >= 1");
    require(parallel.dp % parallel.ep == 0, Errc::NonDivisibleExpertGroups,
            "expert-parallel groups fold into DP: d mod e != 0 (d=" +
                fmt_count(parallel.dp) + ", e=" + fmt_count(parallel.ep) + ")");
  } else {
    require(parallel.ep == 1, Errc::InvalidSpec,
            "dense models must use ep = 1");
  }

  const std::int64_t replica_chunk = parallel.dp * parallel.micro_batch;
  require(model.global_batch % replica_chunk == 0, Errc::NonDivisibleBatch,
          "g mod (d*b) != 0 (g=" + fmt_count(model.global_batch) +
              ", d=" + fmt_count(parallel.dp) +
              ", b=" + fmt_count(parallel.micro_batch) + ")");

  const std::int64_t stage_chunk = parallel.pp * parallel.interleave;
  require(model.layers % stage_chunk == 0, Errc::NonDivisibleLayers,
          "l mod (p*v) != 0 (l=" + fmt_count(model.layers) +
              ", p=" + fmt_count(parallel.pp) +
              ", v=" + fmt_count(parallel.interleave) + ")");

  require(parallel.total_gpus() == platform.total_gpus(), Errc::GpuCountMismatch,
          "p*t*d = " + fmt_count(parallel.total_gpus()) +
              " but platform has " + fmt_count(platform.total_gpus()) + " GPUs");

  DerivedParams derived;
  derived.micro_batches = model.global_batch / replica_chunk;
  derived.layers_per_stage = model.layers / parallel.pp;
  derived.params_per_gpu =
      model.param_count / static_cast<double>(parallel.pp * parallel.tp);
  return derived;
}

double estimate_param_count(std::int64_t layers, std::int64_t hidden,
                            std::int64_t vocab_size, std::int64_t seq_len) {
  require(layers >= 1 && hidden >= 1, Errc::InvalidSpec,
          "estimator needs layers >= 1 and hidden >= 1");
  const double h = static_cast<double>(hidden);
  return 12.0 * static_cast<double>(layers) * h * h +
         static_cast<double>(vocab_size) * h + static_cast<double>(seq_len) * h;
}

double estimate_memory_per_gpu(const ModelSpec& model,
                               const ParallelismConfig& parallel,
                               const MemoryModelOptions& options) {
  require(parallel.micro_batch >= 1, Errc::InvalidSpec, "micro_batch must be >= 1");
  const double params_per_gpu =
      model.param_count / static_cast<double>(parallel.pp * parallel.tp);
  const double layers_per_stage =
      static_cast<double>(model.layers) / static_cast<double>(parallel.pp);
  const double s = static_cast<double>(model.seq_len);
  const double h = static_cast<double>(model.hidden);
  const double b = static_cast<double>(parallel.micro_batch);
  const double heads = static_cast<double>(model.attn_heads);
  // Per-layer activation footprint of the micro-batch being computed; the
  // 34 + 5*a*s/h factor assumes 2-byte activations.
  const double per_layer = s * b * h *
                           (options.activation_fixed_factor +
                            options.activation_attn_factor * heads * s / h) /
                           static_cast<double>(parallel.tp);
  return params_per_gpu * options.bytes_per_param + layers_per_stage * per_layer;
}

namespace {

std::int64_t get_count(const json& obj, const char* key, std::int64_t fallback,
                       bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(Errc::InvalidSpec, std::string("missing config key: ") + key);
    return fallback;
  }
  const auto& v = obj.at(key);
  if (v.is_number_integer() || v.is_number_unsigned())
    return v.get<std::int64_t>();
  if (v.is_number_float()) {
    const double d = v.get<double>();
    const auto n = static_cast<std::int64_t>(d);
    if (static_cast<double>(n) != d)
      fail(Errc::InvalidSpec, std::string(key) + " must be an integer");
    return n;
  }
  fail(Errc::InvalidSpec, std::string(key) + " must be a number");
}

double get_real(const json& obj, const char* key, double fallback,
                bool required = false) {
  if (!obj.contains(key)) {
    if (required) fail(Errc::InvalidSpec, std::string("missing config key: ") + key);
    return fallback;
  }
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(Errc::InvalidSpec, std::string(key) + " must be a number");
  return v.get<double>();
}

IntraTopology parse_topology(const std::string& name) {
  if (name == "pcie") return IntraTopology::Pcie;
  if (name == "nvlink") return IntraTopology::Nvlink;
  if (name == "nvswitch") return IntraTopology::Nvswitch;
  fail(Errc::InvalidSpec, "unknown intra_topology: " + name);
}

ModelKind parse_kind(const std::string& name) {
  if (name == "dense-gpt") return ModelKind::DenseGpt;
  if (name == "moe") return ModelKind::Moe;
  fail(Errc::InvalidSpec, "unknown model kind: " + name);
}

}  // namespace

ScenarioConfig parse_config_json(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const std::exception& e) {
    fail(Errc::InvalidSpec, std::string("config is not valid JSON: ") + e.what());
  }
  // Reports echo their scenario under "config", so they can be re-fed as-is.
  if (!doc.contains("model") && doc.contains("config")) doc = doc.at("config");
  require(doc.contains("model") && doc.contains("parallel") && doc.contains("platform"),
          Errc::InvalidSpec, "config needs model, parallel and platform sections");

  ScenarioConfig cfg;
  const json& m = doc.at("model");
  cfg.model.kind = parse_kind(m.value("kind", "dense-gpt"));
  cfg.model.layers = get_count(m, "layers", 1, true);
  cfg.model.hidden = get_count(m, "hidden", 1, true);
  cfg.model.seq_len = get_count(m, "seq_len", 1, true);
  cfg.model.global_batch = get_count(m, "global_batch", 1, true);
  cfg.model.attn_heads = get_count(m, "attn_heads", 1);
  cfg.model.vocab_size = get_count(m, "vocab_size", 0);
  cfg.model.precision_bytes = get_count(m, "precision_bytes", 2);
  cfg.model.moe_expert_interval = get_count(m, "moe_expert_interval", 2);
  cfg.model.moe_top_k_max = get_count(m, "moe_top_k_max", 2);
  cfg.model.param_count = get_real(m, "params", 0.0);
  if (cfg.model.param_count <= 0.0) {
    cfg.model.param_count = estimate_param_count(
        cfg.model.layers, cfg.model.hidden, cfg.model.vocab_size, cfg.model.seq_len);
  }

  const json& p = doc.at("parallel");
  cfg.parallel.tp = get_count(p, "tp", 1);
  cfg.parallel.pp = get_count(p, "pp", 1);
  cfg.parallel.dp = get_count(p, "dp", 1);
  cfg.parallel.ep = get_count(p, "ep", 1);
  cfg.parallel.micro_batch = get_count(p, "micro_batch", 1);
  cfg.parallel.interleave = get_count(p, "interleave", 1);

  const json& h = doc.at("platform");
  cfg.platform.machines = get_count(h, "machines", 1, true);
  cfg.platform.gpus_per_machine = get_count(h, "gpus_per_machine", 1, true);
  cfg.platform.peak_flops = get_real(h, "peak_flops", 0.0, true);
  cfg.platform.gpu_mem_bytes = get_real(h, "gpu_mem_bytes", 0.0);
  cfg.platform.intra_topology = parse_topology(h.value("intra_topology", "nvswitch"));
  cfg.platform.nics_per_machine = get_count(h, "nics_per_machine", 1);
  cfg.platform.nic_bw = get_real(h, "nic_bw_bytes_per_s", 0.0);
  return cfg;
}

ScenarioConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::IoError, "cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config_json(buf.str());
}

std::string config_to_json(const ScenarioConfig& config) {
  json doc;
  doc["model"] = {
      {"kind", model_kind_name(config.model.kind)},
      {"params", config.model.param_count},
      {"layers", config.model.layers},
      {"hidden", config.model.hidden},
      {"seq_len", config.model.seq_len},
      {"global_batch", config.model.global_batch},
      {"attn_heads", config.model.attn_heads},
      {"vocab_size", config.model.vocab_size},
      {"precision_bytes", config.model.precision_bytes},
      {"moe_expert_interval", config.model.moe_expert_interval},
      {"moe_top_k_max", config.model.moe_top_k_max},
  };
  doc["parallel"] = {
      {"tp", config.parallel.tp},   {"pp", config.parallel.pp},
      {"dp", config.parallel.dp},   {"ep", config.parallel.ep},
      {"micro_batch", config.parallel.micro_batch},
      {"interleave", config.parallel.interleave},
  };
  doc["platform"] = {
      {"machines", config.platform.machines},
      {"gpus_per_machine", config.platform.gpus_per_machine},
      {"peak_flops", config.platform.peak_flops},
      {"gpu_mem_bytes", config.platform.gpu_mem_bytes},
      {"intra_topology", intra_topology_name(config.platform.intra_topology)},
      {"nics_per_machine", config.platform.nics_per_machine},
      {"nic_bw_bytes_per_s", config.platform.nic_bw},
  };
  return doc.dump(2);
}

std::string config_digest(const ScenarioConfig& config) {
  const std::string canonical = config_to_json(config);
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a 64
  for (unsigned char c : canonical) {
    hash ^= c;
    hash *= 1099511628211ULL;
  }
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(hash));
  return out;
}

}  // namespace traincast
