#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "raglog/embed.hpp"
#include "raglog/error.hpp"
#include "raglog/http.hpp"
#include "raglog/parallel.hpp"
#include "raglog/store.hpp"

namespace raglog {

inline constexpr std::string_view kExamplesSlot = "{{EXAMPLES}}";
inline constexpr std::string_view kQuerySlot = "{{QUERY}}";

inline constexpr std::string_view kDefaultTemplate =
    "You are a log analysis assistant. Below are examples of NORMAL log entries from this system:\n"
    "{{EXAMPLES}}\n"
    "Question: Is the following log entry normal or abnormal? Answer with exactly one word: normal or abnormal.\n"
    "Log entry: {{QUERY}}\n"
    "Answer:";

class PromptTemplate {
 public:
  explicit PromptTemplate(std::string body = std::string(kDefaultTemplate)) : body_(std::move(body)) {
    if (body_.empty()) throw Error(Errc::InvalidTemplate, "template body is empty");
    for (auto slot : {kExamplesSlot, kQuerySlot}) {
      const auto first = body_.find(slot);
      if (first == std::string::npos) throw Error(Errc::InvalidTemplate, std::string(slot) + " missing");
      if (body_.find(slot, first + 1) != std::string::npos) {
        throw Error(Errc::InvalidTemplate, std::string(slot) + " appears more than once");
      }
    }
  }

  [[nodiscard]] const std::string& body() const noexcept { return body_; }

 private:
  std::string body_;
};

struct RagContext {
  std::vector<RetrievalHit> hits;  // best first
  std::string query_text;

  [[nodiscard]] float top_score() const noexcept {
    return hits.empty() ? -std::numeric_limits<float>::infinity() : hits.front().score;
  }
};

struct RenderedPrompt {
  std::string text;
  bool empty_context = false;
};

/// Fills the two slots in one pass, so slot-like text inside hits or the
/// query is never expanded.
inline RenderedPrompt render_prompt(const PromptTemplate& tpl, const RagContext& context) {
  std::string examples;
  for (std::size_t i = 0; i < context.hits.size(); ++i) {
    if (i > 0) examples += '\n';
    examples += "- ";
    examples += context.hits[i].text;
  }
  const std::string& body = tpl.body();
  const auto ex = body.find(kExamplesSlot);
  const auto q = body.find(kQuerySlot);

  RenderedPrompt out;
  out.empty_context = context.hits.empty();
  const bool examples_first = ex < q;
  const auto [first_pos, first_len] =
      examples_first ? std::pair{ex, kExamplesSlot.size()} : std::pair{q, kQuerySlot.size()};
  const auto [second_pos, second_len] =
      examples_first ? std::pair{q, kQuerySlot.size()} : std::pair{ex, kExamplesSlot.size()};
  out.text.reserve(body.size() + examples.size() + context.query_text.size());
  out.text.append(body, 0, first_pos);
  out.text += examples_first ? examples : context.query_text;
  out.text.append(body, first_pos + first_len, second_pos - first_pos - first_len);
  out.text += examples_first ? context.query_text : examples;
  out.text.append(body, second_pos + second_len);
  return out;
}

// ---------------------------------------------------------------------------
// Verdicts

enum class VerdictValue { Normal, Abnormal };

constexpr std::string_view to_string(VerdictValue v) noexcept {
  return v == VerdictValue::Normal ? "normal" : "abnormal";
}

struct Verdict {
  VerdictValue value = VerdictValue::Normal;
  std::string raw_response;
};

enum class VerdictOutcome { Normal, Abnormal, NoVerdict, AmbiguousVerdict };

/// Lowercases, splits into maximal ASCII-letter runs, and looks for the
/// whole tokens "normal" and "abnormal". Substrings never count.
inline VerdictOutcome classify_response(std::string_view response) noexcept {
  bool has_normal = false;
  bool has_abnormal = false;
  std::string token;
  const auto flush = [&] {
    if (token == "normal") has_normal = true;
    if (token == "abnormal") has_abnormal = true;
    token.clear();
  };
  for (char c : response) {
    const char l = text::ascii_lower(c);
    if (l >= 'a' && l <= 'z') {
      token.push_back(l);
    } else if (!token.empty()) {
      flush();
    }
  }
  flush();
  if (has_normal && has_abnormal) return VerdictOutcome::AmbiguousVerdict;
  if (has_abnormal) return VerdictOutcome::Abnormal;
  if (has_normal) return VerdictOutcome::Normal;
  return VerdictOutcome::NoVerdict;
}

inline Verdict parse_verdict(std::string_view response) {
  switch (classify_response(response)) {
    case VerdictOutcome::Normal: return {VerdictValue::Normal, std::string(response)};
    case VerdictOutcome::Abnormal: return {VerdictValue::Abnormal, std::string(response)};
    case VerdictOutcome::AmbiguousVerdict:
      throw Error(Errc::AmbiguousVerdict, "response names both normal and abnormal");
    case VerdictOutcome::NoVerdict: break;
  }
  throw Error(Errc::NoVerdict, "response names neither normal nor abnormal");
}

// ---------------------------------------------------------------------------
// Language-model backends

class LlmBackend {
 public:
  virtual ~LlmBackend() = default;
  /// top_score is the best retrieval score in the prompt's context (-inf if none).
  virtual std::string complete(const std::string& prompt, float top_score) = 0;
};

/// Offline stand-in: answers from the retrieval score alone.
class MockBackend final : public LlmBackend {
 public:
  explicit MockBackend(double threshold = 0.8) : threshold_(threshold) {
    if (!(threshold >= -1.0 && threshold <= 1.0)) throw Error(Errc::InvalidArgument, "mock threshold must lie in [-1, 1]");
  }

  std::string complete(const std::string&, float top_score) override {
    return static_cast<double>(top_score) >= threshold_ ? "normal" : "abnormal";
  }

  [[nodiscard]] double threshold() const noexcept { return threshold_; }

 private:
  double threshold_;
};

struct RemoteBackendConfig {
  std::string base_url = kDefaultApiBase;
  std::string model = "gpt-3.5-turbo";
  double temperature = 0.1;
  int max_attempts = 5;
  std::string api_key;  // never logged

  static RemoteBackendConfig from_env(std::string model = "gpt-3.5-turbo") {
    RemoteBackendConfig c;
    c.base_url = env_or("RAGLOG_API_BASE", kDefaultApiBase);
    c.api_key = env_or("RAGLOG_API_KEY");
    c.model = std::move(model);
    return c;
  }
};

/// Chat-completions client:
///   POST {base}/chat/completions {model, temperature, messages}
/// and returns choices[0].message.content untouched.
class RemoteBackend final : public LlmBackend {
 public:
  RemoteBackend(RemoteBackendConfig config, std::shared_ptr<HttpTransport> transport, RetryPolicy retry = {})
      : config_(std::move(config)), transport_(std::move(transport)), retry_(std::move(retry)) {
    if (!(config_.temperature >= 0.0 && config_.temperature <= 2.0)) {
      throw Error(Errc::InvalidArgument, "temperature must lie in [0, 2]");
    }
    if (config_.max_attempts < 1) throw Error(Errc::InvalidArgument, "max_attempts must be >= 1");
    retry_.max_attempts = config_.max_attempts;
  }

  explicit RemoteBackend(RemoteBackendConfig config)
      : RemoteBackend(config, std::make_shared<HttplibTransport>(config.base_url)) {}

  std::string complete(const std::string& prompt, float) override {
    if (config_.api_key.empty()) throw Error(Errc::Unavailable, "credential missing (RAGLOG_API_KEY)");
    const nlohmann::json request = {
        {"model", config_.model},
        {"temperature", config_.temperature},
        {"messages", {{{"role", "user"}, {"content", prompt}}}},
    };
    auto [response, attempts] =
        post_with_retry(*transport_, retry_, "/chat/completions", request.dump(), config_.api_key);
    (void)attempts;
    try {
      const auto body = nlohmann::json::parse(response.body);
      return body.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::RemoteError, std::string("malformed completion response: ") + e.what());
    }
  }

  [[nodiscard]] const RemoteBackendConfig& config() const noexcept { return config_; }

 private:
  RemoteBackendConfig config_;
  std::shared_ptr<HttpTransport> transport_;
  RetryPolicy retry_;
};

// ---------------------------------------------------------------------------
// Classification pipeline

struct Trace {
  std::string query_text;
  std::vector<RetrievalHit> hits;
  std::string prompt;
  std::string raw_response;
  std::optional<VerdictValue> verdict;
  std::optional<Errc> error;
  double elapsed_ms = 0.0;

  [[nodiscard]] nlohmann::json to_json(bool with_timing = true) const {
    nlohmann::json hs = nlohmann::json::array();
    for (const auto& h : hits) hs.push_back({{"id", h.record_id}, {"score", h.score}, {"text", h.text}});
    nlohmann::json j = {{"query", query_text}, {"hits", hs}, {"prompt", prompt}, {"raw_response", raw_response}};
    j["verdict"] = verdict ? nlohmann::json(std::string(to_string(*verdict))) : nlohmann::json(nullptr);
    j["error"] = error ? nlohmann::json(std::string(to_string(*error))) : nlohmann::json(nullptr);
    if (with_timing) j["elapsed_ms"] = elapsed_ms;
    return j;
  }
};

/// A response that could not be read as a verdict. The trace keeps the raw text.
class ClassificationError : public Error {
 public:
  ClassificationError(Errc cause, const std::string& message, Trace trace)
      : Error(Errc::ClassificationError, std::string(raglog::to_string(cause)) + ": " + message),
        cause_(cause),
        trace_(std::move(trace)) {}

  [[nodiscard]] Errc cause() const noexcept { return cause_; }
  [[nodiscard]] const Trace& trace() const noexcept { return trace_; }

 private:
  Errc cause_;
  Trace trace_;
};

struct Classification {
  Verdict verdict;
  Trace trace;
};

/// y = f(x, z): embed the query, retrieve its nearest normals, prompt the
/// backend with both, and parse the answer.
inline Classification classify_entry(const VectorStore& store, Embedder& embedder, LlmBackend& backend,
                                     const PromptTemplate& tpl, std::string_view query_text, std::size_t top_k = 5) {
  const auto start = std::chrono::steady_clock::now();
  if (store.empty()) throw Error(Errc::EmptyStore, "reference store is empty");
  if (embedder.descriptor() != store.descriptor()) {
    throw Error(Errc::DescriptorMismatch,
                "embedder '" + embedder.descriptor().name + "' does not match store '" + store.header().embedder + "'");
  }
  RagContext context;
  context.query_text = std::string(query_text);
  context.hits = store.retrieve_top_k(embedder.embed(query_text), top_k);
  const RenderedPrompt prompt = render_prompt(tpl, context);

  Trace trace;
  trace.query_text = context.query_text;
  trace.hits = context.hits;
  trace.prompt = prompt.text;
  trace.raw_response = backend.complete(prompt.text, context.top_score());
  trace.elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  try {
    Verdict v = parse_verdict(trace.raw_response);
    trace.verdict = v.value;
    return {std::move(v), std::move(trace)};
  } catch (const Error& e) {
    trace.error = e.code();
    throw ClassificationError(e.code(), e.what(), std::move(trace));
  }
}

/// Per-entry outcome of a batch: a verdict, or the error code that made it unusable.
struct BatchOutcome {
  std::optional<VerdictValue> verdict;
  std::optional<Errc> error;
  Trace trace;
};

/// Classifies independent queries concurrently; results are indexed like
/// the input. Failures are recorded per entry rather than thrown.
inline std::vector<BatchOutcome> classify_batch(const VectorStore& store, Embedder& embedder, LlmBackend& backend,
                                                const PromptTemplate& tpl, const std::vector<std::string>& queries,
                                                std::size_t top_k = 5, std::size_t max_in_flight = 1) {
  std::vector<BatchOutcome> out(queries.size());
  bounded_for_each(queries.size(), max_in_flight, [&](std::size_t i) {
    try {
      auto c = classify_entry(store, embedder, backend, tpl, queries[i], top_k);
      out[i].verdict = c.verdict.value;
      out[i].trace = std::move(c.trace);
    } catch (const ClassificationError& e) {
      out[i].error = e.cause();
      out[i].trace = e.trace();
    } catch (const Error& e) {
      if (e.code() == Errc::DescriptorMismatch || e.code() == Errc::EmptyStore || e.code() == Errc::Unavailable) {
        throw;
      }
      out[i].error = e.code();
      out[i].trace.query_text = queries[i];
      out[i].trace.error = e.code();
    }
  });
  return out;
}

}  // namespace raglog
