#pragma once

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "raglog/error.hpp"
#include "raglog/http.hpp"
#include "raglog/parallel.hpp"
#include "raglog/text.hpp"

namespace raglog {

struct EmbeddingVector {
  std::vector<float> values;

  EmbeddingVector() = default;
  explicit EmbeddingVector(std::size_t dim) : values(dim, 0.0f) {}
  explicit EmbeddingVector(std::vector<float> v) : values(std::move(v)) {}

  [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
  [[nodiscard]] bool is_zero() const noexcept {
    for (float v : values) {
      if (v != 0.0f) return false;
    }
    return true;
  }
  friend bool operator==(const EmbeddingVector&, const EmbeddingVector&) = default;
};

/// Inner product with the documented accumulation order: float accumulator,
/// ascending index, one term at a time. Stores and oracles both rely on it.
inline float inner_product(std::span<const float> a, std::span<const float> b) noexcept {
  float acc = 0.0f;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline float inner_product(const EmbeddingVector& a, const EmbeddingVector& b) noexcept {
  return inner_product(std::span<const float>(a.values), std::span<const float>(b.values));
}

inline double l2_norm(const EmbeddingVector& v) noexcept {
  double acc = 0.0;
  for (float x : v.values) acc += static_cast<double>(x) * x;
  return std::sqrt(acc);
}

inline void normalize_in_place(EmbeddingVector& v) noexcept {
  const double n = l2_norm(v);
  if (n == 0.0) return;
  for (float& x : v.values) x = static_cast<float>(x / n);
}

struct EmbedderDescriptor {
  std::string name;
  std::size_t dim = 0;
  bool normalized = true;
  friend bool operator==(const EmbedderDescriptor&, const EmbedderDescriptor&) = default;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  [[nodiscard]] virtual const EmbedderDescriptor& descriptor() const noexcept = 0;
  virtual EmbeddingVector embed(std::string_view text) = 0;

  /// Output order always matches input order.
  virtual std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, std::size_t max_in_flight = 1) {
    if (max_in_flight == 0) throw Error(Errc::InvalidArgument, "max_in_flight must be >= 1");
    std::vector<EmbeddingVector> out(texts.size());
    bounded_for_each(texts.size(), max_in_flight, [&](std::size_t i) { out[i] = embed(texts[i]); });
    return out;
  }
};

/// 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
constexpr std::uint64_t fnv1a64(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Signed feature hashing of character 3-grams.
///
/// The text is ASCII-lowercased and split into code points. Each window of
/// three consecutive code points is hashed with fnv1a64 over its UTF-8 bytes;
/// the gram adds +1 at index (hash mod dim), or -1 when bit 63 of the hash is
/// set. Non-blank text shorter than three code points counts as one gram. The
/// result is L2-normalized; blank text gives the zero vector.
inline EmbeddingVector hash_embed(std::string_view input, std::size_t dim = 256) {
  if (dim < 16 || (dim & (dim - 1)) != 0) {
    throw Error(Errc::InvalidArgument, "hash_embed dim must be a power of two >= 16");
  }
  EmbeddingVector v(dim);
  if (text::is_blank(input)) return v;
  const std::string lowered = text::ascii_lower(input);
  const auto cps = text::code_points(lowered);

  const auto add = [&](std::string_view gram) {
    const std::uint64_t h = fnv1a64(gram);
    v.values[h & (dim - 1)] += (h >> 63) ? -1.0f : 1.0f;
  };
  if (cps.size() < 3) {
    add(lowered);
  } else {
    for (std::size_t i = 0; i + 3 <= cps.size(); ++i) {
      const char* begin = cps[i].data();
      const char* end = cps[i + 2].data() + cps[i + 2].size();
      add(std::string_view(begin, static_cast<std::size_t>(end - begin)));
    }
  }
  normalize_in_place(v);
  return v;
}

class HashingEmbedder final : public Embedder {
 public:
  explicit HashingEmbedder(std::size_t dim = 256)
      : descriptor_{"hash3-fnv1a64-d" + std::to_string(dim), dim, true} {
    hash_embed("", dim);  // validates dim
  }

  [[nodiscard]] const EmbedderDescriptor& descriptor() const noexcept override { return descriptor_; }
  EmbeddingVector embed(std::string_view text) override { return hash_embed(text, descriptor_.dim); }

 private:
  EmbedderDescriptor descriptor_;
};

inline std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return (v && *v) ? std::string(v) : fallback;
}

inline constexpr const char* kDefaultApiBase = "https://api.openai.com/v1";

struct RemoteEmbedderConfig {
  std::string base_url = kDefaultApiBase;
  std::string model;
  std::string api_key;  // never logged
  std::size_t dim = 0;
  bool normalize = true;

  /// Fills base_url and api_key from RAGLOG_API_BASE / RAGLOG_API_KEY.
  static RemoteEmbedderConfig from_env(std::string model, std::size_t dim) {
    RemoteEmbedderConfig c;
    c.base_url = env_or("RAGLOG_API_BASE", kDefaultApiBase);
    c.api_key = env_or("RAGLOG_API_KEY");
    c.model = std::move(model);
    c.dim = dim;
    return c;
  }
};

/// Client for the common embeddings wire shape:
///   POST {base}/embeddings {model, input: [texts]} -> {data: [{index, embedding}]}
/// One request per text so retries and failures are tracked per item.
class RemoteEmbedder final : public Embedder {
 public:
  RemoteEmbedder(RemoteEmbedderConfig config, std::shared_ptr<HttpTransport> transport, RetryPolicy retry = {})
      : config_(std::move(config)),
        descriptor_{"remote:" + config_.model, config_.dim, config_.normalize},
        transport_(std::move(transport)),
        retry_(std::move(retry)) {
    if (config_.dim == 0) throw Error(Errc::InvalidArgument, "remote embedder needs a declared dim");
  }

  explicit RemoteEmbedder(RemoteEmbedderConfig config)
      : RemoteEmbedder(config, std::make_shared<HttplibTransport>(config.base_url)) {}

  [[nodiscard]] const EmbedderDescriptor& descriptor() const noexcept override { return descriptor_; }

  EmbeddingVector embed(std::string_view text) override { return embed_one(text, nullptr); }

  std::vector<EmbeddingVector> embed_batch(std::span<const std::string> texts, std::size_t max_in_flight = 1) override {
    if (max_in_flight == 0) throw Error(Errc::InvalidArgument, "max_in_flight must be >= 1");
    std::vector<EmbeddingVector> out(texts.size());
    std::vector<int> attempts(texts.size(), 0);
    try {
      bounded_for_each(texts.size(), max_in_flight, [&](std::size_t i) {
        try {
          out[i] = embed_one(texts[i], &attempts[i]);
        } catch (const Error& e) {
          throw Error(e.code(), "item " + std::to_string(i) + ": " + e.what());
        }
      });
    } catch (...) {
      std::lock_guard lock(mu_);
      last_attempts_ = attempts;
      throw;
    }
    std::lock_guard lock(mu_);
    last_attempts_ = std::move(attempts);
    return out;
  }

  /// Attempts spent per item in the most recent embed_batch call.
  [[nodiscard]] std::vector<int> last_attempts() const {
    std::lock_guard lock(mu_);
    return last_attempts_;
  }

 private:
  EmbeddingVector embed_one(std::string_view text, int* attempts_out) {
    if (text::is_blank(text)) return EmbeddingVector(config_.dim);
    if (config_.api_key.empty()) throw Error(Errc::Unavailable, "credential missing (RAGLOG_API_KEY)");
    const nlohmann::json request = {{"model", config_.model}, {"input", {std::string(text)}}};
    auto [response, attempts] = post_with_retry(*transport_, retry_, "/embeddings", request.dump(), config_.api_key);
    if (attempts_out) *attempts_out = attempts;

    EmbeddingVector v;
    try {
      const auto body = nlohmann::json::parse(response.body);
      for (const auto& item : body.at("data")) {
        if (item.value("index", 0) == 0) {
          v.values = item.at("embedding").get<std::vector<float>>();
          break;
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::RemoteError, std::string("malformed embeddings response: ") + e.what());
    }
    if (v.dim() != config_.dim) {
      throw Error(Errc::RemoteError, "embedding dim " + std::to_string(v.dim()) + " does not match declared " +
                                         std::to_string(config_.dim));
    }
    for (float x : v.values) {
      if (!std::isfinite(x)) throw Error(Errc::RemoteError, "non-finite embedding value");
    }
    if (config_.normalize) normalize_in_place(v);
    return v;
  }

  RemoteEmbedderConfig config_;
  EmbedderDescriptor descriptor_;
  std::shared_ptr<HttpTransport> transport_;
  RetryPolicy retry_;
  mutable std::mutex mu_;
  std::vector<int> last_attempts_;
};

}  // namespace raglog
