#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "raglog/embed.hpp"
#include "raglog/error.hpp"
#include "raglog/ragqa.hpp"
#include "raglog/refset.hpp"

namespace raglog {

struct DatasetSpec {
  std::string path;
  std::string format = "jsonl";  // "jsonl" for ingest output, else a raw log format
  std::string name;              // defaults to the dataset's own source name
};

struct EmbedderSpec {
  std::string kind = "hashing";  // hashing | remote
  std::size_t dim = 256;
  std::string model;  // remote only
};

struct BackendSpec {
  std::string kind = "mock";  // mock | remote
  double threshold = 0.8;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.1;
  int max_attempts = 5;
};

/// Everything that determines an evaluation run. Output locations are not
/// part of the digest.
struct RunConfig {
  std::vector<DatasetSpec> datasets;
  double test_fraction = 0.2;
  std::uint64_t split_seed = 42;
  std::uint64_t sample_seed = 42;
  std::uint64_t build_seed = 42;
  std::optional<std::size_t> test_sample;  // absent: classify the whole test split
  bool dedup = false;
  EmbedderSpec embedder;
  std::vector<std::string> strategies = {"clustered", "random"};
  std::size_t random_n = 50000;
  std::optional<std::size_t> clustered_k = 5;  // absent: elbow
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t per_cluster = 10000;
  std::size_t candidate_cap = 200000;
  std::size_t kmeans_restarts = 4;
  std::string template_path;  // empty: built-in template
  BackendSpec backend;
  std::size_t top_k = 5;
  std::size_t max_in_flight = 4;
  std::string out_dir = "raglog-out";

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json ds = nlohmann::json::array();
    for (const auto& d : datasets) ds.push_back({{"path", d.path}, {"format", d.format}, {"name", d.name}});
    nlohmann::json j = {
        {"datasets", ds},
        {"test_fraction", test_fraction},
        {"seeds", {{"split", split_seed}, {"sample", sample_seed}, {"build", build_seed}}},
        {"test_sample", test_sample ? nlohmann::json(*test_sample) : nlohmann::json(nullptr)},
        {"dedup", dedup},
        {"embedder", {{"kind", embedder.kind}, {"dim", embedder.dim}, {"model", embedder.model}}},
        {"strategies", strategies},
        {"random", {{"n", random_n}}},
        {"clustered",
         {{"k", clustered_k ? nlohmann::json(*clustered_k) : nlohmann::json("auto")},
          {"k_min", k_min},
          {"k_max", k_max},
          {"per_cluster", per_cluster},
          {"candidate_cap", candidate_cap},
          {"restarts", kmeans_restarts}}},
        {"template", template_path},
        {"backend",
         {{"kind", backend.kind},
          {"threshold", backend.threshold},
          {"model", backend.model},
          {"temperature", backend.temperature},
          {"max_attempts", backend.max_attempts}}},
        {"top_k", top_k},
        {"max_in_flight", max_in_flight},
    };
    return j;
  }

  /// Reads a (possibly partial) config document over the defaults.
  static RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
      if (j.contains("datasets")) {
        for (const auto& d : j["datasets"]) {
          DatasetSpec s;
          if (d.is_string()) {
            s.path = d.get<std::string>();
          } else {
            s.path = d.at("path").get<std::string>();
            s.format = d.value("format", s.format);
            s.name = d.value("name", s.name);
          }
          c.datasets.push_back(std::move(s));
        }
      }
      c.test_fraction = j.value("test_fraction", c.test_fraction);
      if (j.contains("seeds")) {
        const auto& s = j["seeds"];
        c.split_seed = s.value("split", c.split_seed);
        c.sample_seed = s.value("sample", c.sample_seed);
        c.build_seed = s.value("build", c.build_seed);
      }
      if (j.contains("test_sample") && !j["test_sample"].is_null()) c.test_sample = j["test_sample"].get<std::size_t>();
      c.dedup = j.value("dedup", c.dedup);
      if (j.contains("embedder")) {
        const auto& e = j["embedder"];
        c.embedder.kind = e.value("kind", c.embedder.kind);
        c.embedder.dim = e.value("dim", c.embedder.dim);
        c.embedder.model = e.value("model", c.embedder.model);
      }
      if (j.contains("strategies")) c.strategies = j["strategies"].get<std::vector<std::string>>();
      if (j.contains("random")) c.random_n = j["random"].value("n", c.random_n);
      if (j.contains("clustered")) {
        const auto& cl = j["clustered"];
        if (cl.contains("k")) {
          if (cl["k"].is_string() && cl["k"] == "auto") {
            c.clustered_k.reset();
          } else {
            c.clustered_k = cl["k"].get<std::size_t>();
          }
        }
        c.k_min = cl.value("k_min", c.k_min);
        c.k_max = cl.value("k_max", c.k_max);
        c.per_cluster = cl.value("per_cluster", c.per_cluster);
        c.candidate_cap = cl.value("candidate_cap", c.candidate_cap);
        c.kmeans_restarts = cl.value("restarts", c.kmeans_restarts);
      }
      c.template_path = j.value("template", c.template_path);
      if (j.contains("backend")) {
        const auto& b = j["backend"];
        c.backend.kind = b.value("kind", c.backend.kind);
        c.backend.threshold = b.value("threshold", c.backend.threshold);
        c.backend.model = b.value("model", c.backend.model);
        c.backend.temperature = b.value("temperature", c.backend.temperature);
        c.backend.max_attempts = b.value("max_attempts", c.backend.max_attempts);
      }
      c.top_k = j.value("top_k", c.top_k);
      c.max_in_flight = j.value("max_in_flight", c.max_in_flight);
      c.out_dir = j.value("out_dir", c.out_dir);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, std::string("bad config: ") + e.what());
    }
    return c;
  }

  static RunConfig load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::IoError, "cannot read config '" + path.string() + "'");
    try {
      return from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::InvalidArgument, "config '" + path.string() + "' is not JSON: " + e.what());
    }
  }

  [[nodiscard]] ReferencePlan plan_for(const std::string& strategy) const {
    ReferencePlan plan;
    plan.seed = build_seed;
    if (strategy == "random") {
      plan.strategy = RandomPlan{random_n};
    } else if (strategy == "clustered") {
      ClusteredPlan cp;
      cp.per_cluster = per_cluster;
      if (clustered_k) {
        cp.k = FixedK{*clustered_k};
      } else {
        cp.k = AutoK{k_min, k_max};
      }
      plan.strategy = cp;
    } else {
      throw Error(Errc::InvalidArgument, "unknown strategy '" + strategy + "'");
    }
    plan.validate();
    return plan;
  }
};

/// Stable 64-bit digest of a JSON value, rendered as 16 hex digits.
/// nlohmann::json keeps object keys sorted, so dump() is canonical.
inline std::string config_digest(const nlohmann::json& canonical) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical.dump())));
  return buf;
}

inline std::unique_ptr<Embedder> make_embedder(const EmbedderSpec& spec) {
  if (spec.kind == "hashing") return std::make_unique<HashingEmbedder>(spec.dim);
  if (spec.kind == "remote") {
    if (spec.model.empty()) throw Error(Errc::InvalidArgument, "remote embedder needs a model name");
    return std::make_unique<RemoteEmbedder>(RemoteEmbedderConfig::from_env(spec.model, spec.dim));
  }
  throw Error(Errc::InvalidArgument, "unknown embedder '" + spec.kind + "'");
}

/// Rebuilds the embedder a store was built with from its header.
inline std::unique_ptr<Embedder> embedder_for_store(const StoreHeader& h) {
  const std::string hashing_prefix = "hash3-fnv1a64-d";
  if (h.embedder.rfind(hashing_prefix, 0) == 0) return std::make_unique<HashingEmbedder>(h.dim);
  const std::string remote_prefix = "remote:";
  if (h.embedder.rfind(remote_prefix, 0) == 0) {
    auto cfg = RemoteEmbedderConfig::from_env(h.embedder.substr(remote_prefix.size()), h.dim);
    cfg.normalize = h.normalized;
    return std::make_unique<RemoteEmbedder>(cfg);
  }
  throw Error(Errc::DescriptorMismatch, "store was built with unknown embedder '" + h.embedder + "'");
}

inline std::unique_ptr<LlmBackend> make_backend(const BackendSpec& spec) {
  if (spec.kind == "mock") return std::make_unique<MockBackend>(spec.threshold);
  if (spec.kind == "remote") {
    auto cfg = RemoteBackendConfig::from_env(spec.model);
    cfg.temperature = spec.temperature;
    cfg.max_attempts = spec.max_attempts;
    if (cfg.api_key.empty()) throw Error(Errc::Unavailable, "credential missing (set RAGLOG_API_KEY)");
    return std::make_unique<RemoteBackend>(cfg);
  }
  throw Error(Errc::InvalidArgument, "unknown backend '" + spec.kind + "'");
}

inline PromptTemplate load_template(const std::string& path) {
  if (path.empty()) return PromptTemplate{};
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read template '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return PromptTemplate{ss.str()};
}

}  // namespace raglog
