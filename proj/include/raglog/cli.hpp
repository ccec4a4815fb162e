#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <unordered_set>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "raglog/config.hpp"
#include "raglog/embed.hpp"
#include "raglog/error.hpp"
#include "raglog/eval.hpp"
#include "raglog/ingest.hpp"
#include "raglog/ragqa.hpp"
#include "raglog/refset.hpp"
#include "raglog/store.hpp"

// Subcommands of the `raglog` tool. Exit codes: 0 success, 1 runtime
// failure, 2 usage error.
namespace raglog::cli {

inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kUsageError = 2;

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  out << body;
  if (!out) throw Error(Errc::IoError, "write failure on '" + path.string() + "'");
}

struct NamedEntries {
  std::string source;
  std::vector<LogEntry> entries;
};

/// Reads a dataset file (ingest output) or a raw log.
inline NamedEntries load_entries(const std::string& path, const std::string& format, bool dedup) {
  if (format == "jsonl") {
    auto file = read_dataset(path);
    if (dedup) {
      std::vector<LogEntry> kept;
      std::unordered_set<std::string> seen;
      for (auto& e : file.entries) {
        if (seen.insert(e.message).second) kept.push_back(std::move(e));
      }
      file.entries = std::move(kept);
    }
    return {file.source, std::move(file.entries)};
  }
  LoadOptions opt;
  opt.format = log_format_from_string(format);
  opt.dedup = dedup;
  auto loaded = load_dataset(path, opt);
  return {loaded.source, std::move(loaded.entries)};
}

inline std::vector<LogEntry> normals_only(std::vector<LogEntry> entries, std::size_t& dropped) {
  const auto before = entries.size();
  std::erase_if(entries, [](const LogEntry& e) { return e.label != GroundTruth::Normal; });
  dropped = before - entries.size();
  return entries;
}

inline std::vector<std::size_t> store_clusters(const VectorStore& store) {
  const auto& meta = store.header().meta;
  if (!meta.contains("record_clusters")) return {};
  auto clusters = meta["record_clusters"].get<std::vector<std::size_t>>();
  if (clusters.size() != store.size()) return {};
  return clusters;
}

}  // namespace detail

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string input;
  std::string out;
  std::string format = "bgl";
  std::optional<std::size_t> limit;
  bool lenient = false;
  bool dedup = false;
  std::string source;
};

inline int cmd_ingest(const IngestArgs& a, std::ostream& out) {
  LoadOptions opt;
  opt.format = log_format_from_string(a.format);
  opt.limit = a.limit;
  opt.strict = !a.lenient;
  opt.dedup = a.dedup;
  opt.source = a.source;
  const auto data = load_dataset(a.input, opt);
  const nlohmann::json meta = {{"format", a.format},
                               {"strict", opt.strict},
                               {"dedup", opt.dedup},
                               {"limit", a.limit ? nlohmann::json(*a.limit) : nlohmann::json(nullptr)},
                               {"blank_lines", data.blank_lines},
                               {"skipped_lines", data.skipped_lines},
                               {"duplicates", data.duplicates}};
  write_dataset(a.out, data.source, data.entries, meta);
  const auto anomalous = std::count_if(data.entries.begin(), data.entries.end(),
                                       [](const LogEntry& e) { return e.label == GroundTruth::Anomalous; });
  out << "entries=" << data.entries.size() << " anomalous=" << anomalous << " blank=" << data.blank_lines
      << " skipped=" << data.skipped_lines << '\n';
  return kOk;
}

struct SplitArgs {
  std::string dataset;
  std::string format = "jsonl";
  double test_fraction = 0.2;
  std::uint64_t seed = 42;
  std::string out_train;
  std::string out_test;
};

inline int cmd_split(const SplitArgs& a, std::ostream& out) {
  const auto data = detail::load_entries(a.dataset, a.format, false);
  const auto split = split_dataset(data.entries, a.test_fraction, a.seed);
  const nlohmann::json meta = {{"split",
                                {{"policy", "row-uniform"},
                                 {"seed", a.seed},
                                 {"test_fraction", a.test_fraction},
                                 {"train_normals", split.train_normals.size()},
                                 {"test", split.test.size()},
                                 {"discarded_anomalous", split.discarded_anomalous}}}};
  nlohmann::json train_meta = meta;
  train_meta["split"]["side"] = "train";
  nlohmann::json test_meta = meta;
  test_meta["split"]["side"] = "test";
  write_dataset(a.out_train, data.source, split.train_normals, train_meta);
  write_dataset(a.out_test, data.source, split.test, test_meta);
  out << "train_normals=" << split.train_normals.size() << " test=" << split.test.size()
      << " discarded_anomalous=" << split.discarded_anomalous.size() << '\n';
  return kOk;
}

struct BuildArgs {
  std::string dataset;
  std::string format = "jsonl";
  std::string strategy = "clustered";
  std::size_t n = 50000;
  std::string k = "5";  // a number or "auto"
  std::size_t k_min = 2;
  std::size_t k_max = 10;
  std::size_t per_cluster = 10000;
  std::uint64_t seed = 42;
  std::size_t candidate_cap = 200000;
  std::size_t restarts = 4;
  EmbedderSpec embedder;
  std::size_t max_in_flight = 4;
  std::string out;
  std::string report;      // defaults to <out>.report.json
  std::string elbow_csv;
};

inline int cmd_build(const BuildArgs& a, std::ostream& out) {
  const auto data = detail::load_entries(a.dataset, a.format, false);
  std::size_t dropped = 0;
  const auto normals = detail::normals_only(data.entries, dropped);

  RunConfig cfg;
  cfg.build_seed = a.seed;
  cfg.random_n = a.n;
  cfg.per_cluster = a.per_cluster;
  cfg.k_min = a.k_min;
  cfg.k_max = a.k_max;
  if (a.k == "auto") {
    cfg.clustered_k.reset();
  } else {
    try {
      cfg.clustered_k = static_cast<std::size_t>(std::stoull(a.k));
    } catch (const std::exception&) {
      throw Error(Errc::InvalidArgument, "--k must be a number or 'auto'");
    }
  }
  const ReferencePlan plan = cfg.plan_for(a.strategy);
  auto embedder = make_embedder(a.embedder);
  BuildOptions options;
  options.candidate_cap = a.candidate_cap;
  options.max_in_flight = a.max_in_flight;
  options.kmeans.restarts = a.restarts;

  auto built = build_reference_store(normals, plan, *embedder, options);
  const nlohmann::json build_config = {
      {"dataset", a.dataset}, {"strategy", a.strategy}, {"n", a.n}, {"k", a.k}, {"k_min", a.k_min},
      {"k_max", a.k_max}, {"per_cluster", a.per_cluster}, {"seed", a.seed}, {"candidate_cap", a.candidate_cap},
      {"restarts", a.restarts},
      {"embedder", {{"kind", a.embedder.kind}, {"dim", a.embedder.dim}, {"model", a.embedder.model}}}};
  const std::string digest = config_digest(build_config);
  built.store.meta()["config"] = build_config;
  built.store.meta()["config_digest"] = digest;
  built.store.save(a.out);

  nlohmann::json report = built.report.to_json();
  report["source"] = data.source;
  report["dropped_anomalous"] = dropped;
  report["config"] = build_config;
  report["config_digest"] = digest;
  detail::write_text(a.report.empty() ? a.out + ".report.json" : a.report, report.dump(2) + "\n");
  if (!a.elbow_csv.empty()) {
    std::ostringstream csv;
    write_elbow_csv(csv, built.report.elbow_curve);
    detail::write_text(a.elbow_csv, csv.str());
  }
  out << "records=" << built.store.size() << " strategy=" << built.report.strategy;
  if (built.report.strategy == "clustered") out << " k=" << built.report.k;
  out << " shortfall=" << (built.report.shortfall ? "yes" : "no") << '\n';
  return kOk;
}

struct ClassifyArgs {
  std::string store;
  std::string line;
  BackendSpec backend;
  std::size_t top_k = 5;
  std::string template_path;
  std::string trace;
};

inline int cmd_classify(const ClassifyArgs& a, std::ostream& out, std::ostream& err) {
  auto backend = make_backend(a.backend);
  const auto store = VectorStore::load(a.store);
  auto embedder = embedder_for_store(store.header());
  const auto tpl = load_template(a.template_path);
  try {
    auto c = classify_entry(store, *embedder, *backend, tpl, a.line, a.top_k);
    if (!a.trace.empty()) detail::write_text(a.trace, c.trace.to_json().dump(2) + "\n");
    out << to_string(c.verdict.value) << '\n';
    return kOk;
  } catch (const ClassificationError& e) {
    if (!a.trace.empty()) detail::write_text(a.trace, e.trace().to_json().dump(2) + "\n");
    err << "raglog: " << e.what() << "\nraw response: " << e.trace().raw_response << '\n';
    return kRuntimeError;
  }
}

struct EvalArgs {
  RunConfig config;
  bool traces = false;
};

/// Runs every (dataset, strategy) pair of the config and writes
/// report.json and comparison.csv into out_dir.
inline int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const RunConfig& cfg = a.config;
  if (cfg.datasets.empty()) throw Error(Errc::InvalidArgument, "no datasets configured");
  if (cfg.strategies.empty()) throw Error(Errc::InvalidArgument, "no strategies configured");
  if (cfg.top_k == 0) throw Error(Errc::InvalidArgument, "top_k must be >= 1");
  const nlohmann::json canonical = cfg.to_json();
  const std::string digest = config_digest(canonical);

  auto embedder = make_embedder(cfg.embedder);
  auto backend = make_backend(cfg.backend);
  const auto tpl = load_template(cfg.template_path);
  BuildOptions options;
  options.candidate_cap = cfg.candidate_cap;
  options.kmeans.restarts = cfg.kmeans_restarts;
  options.max_in_flight = cfg.max_in_flight;

  std::vector<ComparisonRow> rows;
  nlohmann::json datasets = nlohmann::json::array();
  for (const auto& spec : cfg.datasets) {
    auto data = detail::load_entries(spec.path, spec.format, cfg.dedup);
    const std::string name = spec.name.empty() ? data.source : spec.name;
    const auto split = split_dataset(data.entries, cfg.test_fraction, cfg.split_seed);
    const auto sample = cfg.test_sample ? sample_test(split.test, *cfg.test_sample, cfg.sample_seed)
                                        : TestSample{split.test, false};
    std::vector<std::string> queries;
    std::vector<GroundTruth> labels;
    for (const auto& e : sample.entries) {
      queries.push_back(e.message);
      labels.push_back(e.label);
    }
    const auto anomalous = std::count_if(data.entries.begin(), data.entries.end(),
                                         [](const LogEntry& e) { return e.label == GroundTruth::Anomalous; });
    nlohmann::json ds = {{"name", name},
                         {"entries", data.entries.size()},
                         {"anomalous", anomalous},
                         {"train_normals", split.train_normals.size()},
                         {"discarded_anomalous", split.discarded_anomalous.size()},
                         {"test", split.test.size()},
                         {"sampled", sample.entries.size()},
                         {"sample_shortfall", sample.shortfall},
                         {"builds", nlohmann::json::object()}};

    for (const auto& strategy : cfg.strategies) {
      const auto built = build_reference_store(split.train_normals, cfg.plan_for(strategy), *embedder, options);
      const auto outcomes =
          classify_batch(built.store, *embedder, *backend, tpl, queries, cfg.top_k, cfg.max_in_flight);
      std::vector<Prediction> predictions;
      predictions.reserve(outcomes.size());
      for (const auto& o : outcomes) predictions.push_back(o.verdict);
      rows.push_back({name, strategy, metrics(accumulate(predictions, labels), digest)});
      ds["builds"][strategy] = built.report.to_json();

      if (a.traces) {
        std::string body;
        for (std::size_t i = 0; i < outcomes.size(); ++i) {
          auto t = outcomes[i].trace.to_json(false);
          t["index"] = i;
          t["entry_id"] = sample.entries[i].id;
          t["label"] = to_string(labels[i]);
          body += t.dump() + "\n";
        }
        detail::write_text(std::filesystem::path(cfg.out_dir) / ("traces-" + name + "-" + strategy + ".jsonl"), body);
      }
    }
    datasets.push_back(std::move(ds));
  }

  const auto comparison = compare_strategies(std::move(rows));
  const nlohmann::json report = {{"format", "raglog-eval"},
                                 {"version", 1},
                                 {"config", canonical},
                                 {"config_digest", digest},
                                 {"datasets", datasets},
                                 {"comparison", comparison.to_json()}};
  const std::filesystem::path dir(cfg.out_dir);
  detail::write_text(dir / "report.json", report.dump(2) + "\n");
  detail::write_text(dir / "comparison.csv", comparison.to_csv());
  comparison.print_table(out);
  out << "config_digest=" << digest << '\n';
  return kOk;
}

struct ProjectArgs {
  std::string store;
  std::string out;
  std::optional<std::size_t> k;  // only used when the store has no cluster labels
  std::size_t k_max = 10;
  std::uint64_t seed = 42;
};

inline int cmd_project(const ProjectArgs& a, std::ostream& out, std::ostream& err) {
  const auto store = VectorStore::load(a.store);
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(store.size());
  for (const auto& r : store.records()) vectors.push_back(r.vector);

  auto clusters = detail::store_clusters(store);
  if (clusters.empty()) {
    std::size_t k = 1;
    if (a.k) {
      k = *a.k;
    } else if (vectors.size() > std::max<std::size_t>(a.k_max, 3)) {
      k = elbow_select_k(vectors, 2, a.k_max, a.seed).k;
    }
    clusters = kmeans(vectors, k, a.seed).assignments;
  }
  const auto projection = project_2d(vectors, clusters, a.seed);
  std::ostringstream csv;
  write_projection_csv(csv, projection);
  detail::write_text(a.out, csv.str());
  if (projection.degenerate) err << "raglog: warning: DegenerateData (rank < 2); missing components are zero\n";
  out << "points=" << projection.points.size() << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

/// Parses argv-style arguments (args[0] is the program name) and runs one
/// subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"raglog: retrieval-augmented log anomaly detection"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Load a raw log file into a labeled dataset (JSON-Lines)");
  ingest_cmd->add_option("--input", ingest.input, "Raw log file")->required();
  ingest_cmd->add_option("--out", ingest.out, "Dataset file to write")->required();
  ingest_cmd->add_option("--format", ingest.format, "Log format: bgl | thunderbird")->capture_default_str();
  ingest_cmd->add_option("--limit", ingest.limit, "Keep at most this many entries");
  ingest_cmd->add_flag("--lenient", ingest.lenient, "Skip and count unparseable lines instead of failing");
  ingest_cmd->add_flag("--dedup", ingest.dedup, "Drop entries whose message was already seen");
  ingest_cmd->add_option("--source", ingest.source, "Dataset name (default: file stem)");

  SplitArgs split;
  auto* split_cmd = app.add_subcommand("split", "Split a dataset into train normals and a test set");
  split_cmd->add_option("--dataset", split.dataset, "Dataset file (or raw log with --format)")->required();
  split_cmd->add_option("--format", split.format, "jsonl | bgl | thunderbird")->capture_default_str();
  split_cmd->add_option("--test-fraction", split.test_fraction, "Fraction held out for testing")->capture_default_str();
  split_cmd->add_option("--seed", split.seed)->capture_default_str();
  split_cmd->add_option("--out-train", split.out_train, "Train normals dataset file")->required();
  split_cmd->add_option("--out-test", split.out_test, "Test dataset file")->required();

  BuildArgs build;
  auto* build_cmd = app.add_subcommand("build", "Build a normal-only reference store");
  build_cmd->add_option("--dataset", build.dataset, "Dataset file (anomalous entries are dropped)")->required();
  build_cmd->add_option("--format", build.format, "jsonl | bgl | thunderbird")->capture_default_str();
  build_cmd->add_option("--strategy", build.strategy, "clustered | random")
      ->check(CLI::IsMember({"clustered", "random"}))
      ->capture_default_str();
  build_cmd->add_option("--n", build.n, "Records for the random strategy")->capture_default_str();
  build_cmd->add_option("--k", build.k, "Cluster count or 'auto' (elbow)")->capture_default_str();
  build_cmd->add_option("--k-min", build.k_min)->capture_default_str();
  build_cmd->add_option("--k-max", build.k_max)->capture_default_str();
  build_cmd->add_option("--per-cluster", build.per_cluster, "Records sampled per cluster")->capture_default_str();
  build_cmd->add_option("--seed", build.seed)->capture_default_str();
  build_cmd->add_option("--candidate-cap", build.candidate_cap, "Cluster at most this many candidates")
      ->capture_default_str();
  build_cmd->add_option("--restarts", build.restarts, "k-means seedings; the lowest WCSS wins")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  build_cmd->add_option("--embedder", build.embedder.kind, "hashing | remote")
      ->check(CLI::IsMember({"hashing", "remote"}))
      ->capture_default_str();
  build_cmd->add_option("--dim", build.embedder.dim, "Embedding dimension")->capture_default_str();
  build_cmd->add_option("--embed-model", build.embedder.model, "Remote embedding model");
  build_cmd->add_option("--max-in-flight", build.max_in_flight)->capture_default_str();
  build_cmd->add_option("--out", build.out, "Store file to write")->required();
  build_cmd->add_option("--report", build.report, "BuildReport JSON (default: <out>.report.json)");
  build_cmd->add_option("--elbow-csv", build.elbow_csv, "Write the elbow curve as k,wcss CSV");

  ClassifyArgs classify;
  auto* classify_cmd = app.add_subcommand("classify", "Classify one log message against a store");
  classify_cmd->add_option("--store", classify.store, "Store file")->required();
  classify_cmd->add_option("--line", classify.line, "Log message to classify")->required();
  classify_cmd->add_option("--backend", classify.backend.kind, "mock | remote")
      ->check(CLI::IsMember({"mock", "remote"}))
      ->capture_default_str();
  classify_cmd->add_option("--threshold", classify.backend.threshold, "Mock score threshold")->capture_default_str();
  classify_cmd->add_option("--model", classify.backend.model, "Remote model")->capture_default_str();
  classify_cmd->add_option("--temperature", classify.backend.temperature)->capture_default_str();
  classify_cmd->add_option("--top-k", classify.top_k)->capture_default_str();
  classify_cmd->add_option("--template", classify.template_path, "Prompt template file");
  classify_cmd->add_option("--trace", classify.trace, "Write the trace JSON here");

  RunConfig eval_cfg;
  std::string config_path;
  std::vector<std::string> eval_datasets;
  std::string eval_format = "jsonl";
  std::string eval_strategies;
  std::string eval_k;
  std::optional<std::uint64_t> eval_seed;
  bool eval_traces = false;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate strategies end to end and write reports");
  eval_cmd->add_option("--config", config_path, "JSON run config; flags override its values");
  auto* o_dataset = eval_cmd->add_option("--dataset", eval_datasets, "Dataset file (repeatable)");
  auto* o_format = eval_cmd->add_option("--format", eval_format, "jsonl | bgl | thunderbird");
  auto* o_strategies = eval_cmd->add_option("--strategies", eval_strategies, "Comma list: clustered,random");
  auto* o_fraction = eval_cmd->add_option("--test-fraction", eval_cfg.test_fraction);
  eval_cmd->add_option("--seed", eval_seed, "Sets the split, sample and build seeds");
  auto* o_sample = eval_cmd->add_option("--sample", eval_cfg.test_sample, "Test entries to classify");
  auto* o_n = eval_cmd->add_option("--n", eval_cfg.random_n, "Records for the random strategy");
  auto* o_k = eval_cmd->add_option("--k", eval_k, "Cluster count or 'auto'");
  auto* o_kmin = eval_cmd->add_option("--k-min", eval_cfg.k_min);
  auto* o_kmax = eval_cmd->add_option("--k-max", eval_cfg.k_max);
  auto* o_per = eval_cmd->add_option("--per-cluster", eval_cfg.per_cluster);
  auto* o_cap = eval_cmd->add_option("--candidate-cap", eval_cfg.candidate_cap);
  auto* o_restarts = eval_cmd->add_option("--restarts", eval_cfg.kmeans_restarts)->check(CLI::PositiveNumber);
  auto* o_embedder = eval_cmd->add_option("--embedder", eval_cfg.embedder.kind)->check(CLI::IsMember({"hashing", "remote"}));
  auto* o_dim = eval_cmd->add_option("--dim", eval_cfg.embedder.dim);
  auto* o_emodel = eval_cmd->add_option("--embed-model", eval_cfg.embedder.model);
  auto* o_backend = eval_cmd->add_option("--backend", eval_cfg.backend.kind)->check(CLI::IsMember({"mock", "remote"}));
  auto* o_threshold = eval_cmd->add_option("--threshold", eval_cfg.backend.threshold);
  auto* o_model = eval_cmd->add_option("--model", eval_cfg.backend.model);
  auto* o_temp = eval_cmd->add_option("--temperature", eval_cfg.backend.temperature);
  auto* o_topk = eval_cmd->add_option("--top-k", eval_cfg.top_k);
  auto* o_template = eval_cmd->add_option("--template", eval_cfg.template_path);
  auto* o_inflight = eval_cmd->add_option("--max-in-flight", eval_cfg.max_in_flight);
  auto* o_dedup = eval_cmd->add_flag("--dedup", eval_cfg.dedup);
  auto* o_out = eval_cmd->add_option("--out", eval_cfg.out_dir, "Output directory");
  eval_cmd->add_flag("--traces", eval_traces, "Write per-entry traces as JSON-Lines");

  ProjectArgs project;
  auto* project_cmd = app.add_subcommand("project", "Export a 2D cluster map of a store as CSV");
  project_cmd->add_option("--store", project.store, "Store file")->required();
  project_cmd->add_option("--out", project.out, "CSV file (x,y,cluster)")->required();
  project_cmd->add_option("--k", project.k, "Clusters for stores built without clustering (default: elbow)");
  project_cmd->add_option("--k-max", project.k_max)->capture_default_str();
  project_cmd->add_option("--seed", project.seed)->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "raglog: " << e.what() << "\n";
    err << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kUsageError;
  }

  try {
    if (*ingest_cmd) return cmd_ingest(ingest, out);
    if (*split_cmd) return cmd_split(split, out);
    if (*build_cmd) return cmd_build(build, out);
    if (*classify_cmd) return cmd_classify(classify, out, err);
    if (*project_cmd) return cmd_project(project, out, err);
    if (*eval_cmd) {
      // Precedence: built-in defaults < config file < flags.
      RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
      const auto given = [](const CLI::Option* o) { return o->count() > 0; };
      if (given(o_dataset)) {
        cfg.datasets.clear();
        for (const auto& p : eval_datasets) cfg.datasets.push_back({p, eval_format, ""});
      } else if (given(o_format)) {
        for (auto& d : cfg.datasets) d.format = eval_format;
      }
      if (given(o_strategies)) {
        cfg.strategies.clear();
        std::stringstream ss(eval_strategies);
        for (std::string s; std::getline(ss, s, ',');) {
          if (!s.empty()) cfg.strategies.push_back(s);
        }
      }
      if (given(o_fraction)) cfg.test_fraction = eval_cfg.test_fraction;
      if (eval_seed) cfg.split_seed = cfg.sample_seed = cfg.build_seed = *eval_seed;
      if (given(o_sample)) cfg.test_sample = eval_cfg.test_sample;
      if (given(o_n)) cfg.random_n = eval_cfg.random_n;
      if (given(o_k)) {
        if (eval_k == "auto") {
          cfg.clustered_k.reset();
        } else {
          try {
            cfg.clustered_k = static_cast<std::size_t>(std::stoull(eval_k));
          } catch (const std::exception&) {
            err << "raglog: --k must be a number or 'auto'\n" << eval_cmd->help();
            return kUsageError;
          }
        }
      }
      if (given(o_kmin)) cfg.k_min = eval_cfg.k_min;
      if (given(o_kmax)) cfg.k_max = eval_cfg.k_max;
      if (given(o_per)) cfg.per_cluster = eval_cfg.per_cluster;
      if (given(o_cap)) cfg.candidate_cap = eval_cfg.candidate_cap;
      if (given(o_restarts)) cfg.kmeans_restarts = eval_cfg.kmeans_restarts;
      if (given(o_embedder)) cfg.embedder.kind = eval_cfg.embedder.kind;
      if (given(o_dim)) cfg.embedder.dim = eval_cfg.embedder.dim;
      if (given(o_emodel)) cfg.embedder.model = eval_cfg.embedder.model;
      if (given(o_backend)) cfg.backend.kind = eval_cfg.backend.kind;
      if (given(o_threshold)) cfg.backend.threshold = eval_cfg.backend.threshold;
      if (given(o_model)) cfg.backend.model = eval_cfg.backend.model;
      if (given(o_temp)) cfg.backend.temperature = eval_cfg.backend.temperature;
      if (given(o_topk)) cfg.top_k = eval_cfg.top_k;
      if (given(o_template)) cfg.template_path = eval_cfg.template_path;
      if (given(o_inflight)) cfg.max_in_flight = eval_cfg.max_in_flight;
      if (given(o_dedup)) cfg.dedup = eval_cfg.dedup;
      if (given(o_out)) cfg.out_dir = eval_cfg.out_dir;
      if (cfg.datasets.empty()) {
        err << "raglog: eval needs --dataset or a config with datasets\n" << eval_cmd->help();
        return kUsageError;
      }
      return cmd_eval({cfg, eval_traces}, out);
    }
  } catch (const Error& e) {
    err << "raglog: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "raglog: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace raglog::cli
