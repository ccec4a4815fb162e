#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>
#include <zlib.h>

#include "raglog/embed.hpp"
#include "raglog/error.hpp"

namespace raglog {

struct VectorRecord {
  std::uint64_t id = 0;
  EmbeddingVector vector;
  std::string text;
  friend bool operator==(const VectorRecord&, const VectorRecord&) = default;
};

struct RetrievalHit {
  std::uint64_t record_id = 0;
  float score = 0.0f;
  std::string text;
  friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

/// Total order on hits: higher score first, ties by ascending id.
inline bool hit_before(const RetrievalHit& a, const RetrievalHit& b) noexcept {
  if (a.score != b.score) return a.score > b.score;
  return a.record_id < b.record_id;
}

struct StoreHeader {
  static constexpr int kFormatVersion = 1;
  int version = kFormatVersion;
  std::size_t dim = 0;
  bool normalized = true;
  std::string embedder;
  nlohmann::json meta = nlohmann::json::object();  // build provenance: seeds, digest, clusters
  friend bool operator==(const StoreHeader&, const StoreHeader&) = default;
};

inline constexpr std::string_view kStoreMagic = "RAGLOGVS";

/// Normal-only reference store with exact inner-product retrieval.
///
/// Build once (single writer), then share read-only. Retrieval is a full
/// scan; scores use inner_product() so they are bit-reproducible.
class VectorStore {
 public:
  VectorStore() = default;
  explicit VectorStore(const EmbedderDescriptor& d) {
    header_.dim = d.dim;
    header_.normalized = d.normalized;
    header_.embedder = d.name;
  }

  [[nodiscard]] const StoreHeader& header() const noexcept { return header_; }
  [[nodiscard]] nlohmann::json& meta() noexcept { return header_.meta; }
  [[nodiscard]] const std::vector<VectorRecord>& records() const noexcept { return records_; }
  [[nodiscard]] std::size_t size() const noexcept { return records_.size(); }
  [[nodiscard]] bool empty() const noexcept { return records_.empty(); }
  [[nodiscard]] EmbedderDescriptor descriptor() const { return {header_.embedder, header_.dim, header_.normalized}; }

  void insert(VectorRecord record) {
    if (record.vector.dim() != header_.dim) {
      throw Error(Errc::DimMismatch, "record dim " + std::to_string(record.vector.dim()) + " != store dim " +
                                         std::to_string(header_.dim));
    }
    if (!ids_.insert(record.id).second) {
      throw Error(Errc::DuplicateId, "id " + std::to_string(record.id) + " already stored");
    }
    records_.push_back(std::move(record));
  }

  [[nodiscard]] float score(const EmbeddingVector& query, const VectorRecord& r) const noexcept {
    return inner_product(query, r.vector);
  }

  [[nodiscard]] std::vector<RetrievalHit> retrieve_top_k(const EmbeddingVector& query, std::size_t k) const {
    check_query(query);
    if (k == 0) throw Error(Errc::InvalidArgument, "k must be >= 1");
    if (records_.empty()) throw Error(Errc::EmptyStore, "store holds no records");
    auto scored = scan(query, -std::numeric_limits<float>::infinity());
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(),
                      [this](const Scored& a, const Scored& b) { return ranks_before(a, b); });
    scored.resize(take);
    return to_hits(scored);
  }

  [[nodiscard]] std::vector<RetrievalHit> retrieve_threshold(const EmbeddingVector& query, float min_score) const {
    check_query(query);
    auto scored = scan(query, min_score);
    std::sort(scored.begin(), scored.end(), [this](const Scored& a, const Scored& b) { return ranks_before(a, b); });
    return to_hits(scored);
  }

  void save(const std::filesystem::path& path) const {
    const std::string bytes = serialize();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(Errc::IoError, "write failure on '" + path.string() + "'");
  }

  static VectorStore load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::IoError, "cannot read '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw Error(Errc::IoError, "read failure on '" + path.string() + "'");
    return deserialize(bytes);
  }

  /// Layout: magic "RAGLOGVS" | u32 header length | JSON header |
  /// records (u64 id, u32 text length, text, dim x f32) | u32 CRC32 of all
  /// preceding bytes. Integers and floats little-endian.
  [[nodiscard]] std::string serialize() const {
    std::string out(kStoreMagic);
    const std::string header = header_json().dump();
    put_u32(out, static_cast<std::uint32_t>(header.size()));
    out += header;
    for (const auto& r : records_) {
      put_u64(out, r.id);
      put_u32(out, static_cast<std::uint32_t>(r.text.size()));
      out += r.text;
      for (float v : r.vector.values) put_u32(out, std::bit_cast<std::uint32_t>(v));
    }
    put_u32(out, crc32_of(out));
    return out;
  }

  static VectorStore deserialize(std::string_view bytes) {
    Reader rd{bytes};
    if (bytes.size() < kStoreMagic.size() + 8 || bytes.substr(0, kStoreMagic.size()) != kStoreMagic) {
      throw Error(Errc::CorruptStore, "bad magic or short file");
    }
    rd.pos = kStoreMagic.size();
    const std::uint32_t header_len = rd.u32();
    const std::string_view header_text = rd.take(header_len);

    nlohmann::json h;
    try {
      h = nlohmann::json::parse(header_text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::CorruptStore, std::string("unreadable header: ") + e.what());
    }
    if (!h.is_object() || !h.contains("format_version")) throw Error(Errc::CorruptStore, "header lacks format_version");
    if (h["format_version"] != StoreHeader::kFormatVersion) {
      throw Error(Errc::VersionMismatch, "store format version " + h["format_version"].dump() + " is not supported");
    }

    const std::size_t body_end = bytes.size() - 4;
    std::uint32_t stored_crc = 0;
    for (int i = 3; i >= 0; --i) stored_crc = (stored_crc << 8) | static_cast<unsigned char>(bytes[body_end + i]);
    if (rd.pos > body_end || crc32_of(bytes.substr(0, body_end)) != stored_crc) {
      throw Error(Errc::CorruptStore, "checksum mismatch");
    }

    VectorStore store;
    std::size_t count = 0;
    try {
      store.header_.dim = h.at("dim").get<std::size_t>();
      store.header_.normalized = h.at("normalized").get<bool>();
      store.header_.embedder = h.at("embedder").get<std::string>();
      store.header_.meta = h.value("meta", nlohmann::json::object());
      count = h.at("count").get<std::size_t>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::CorruptStore, std::string("malformed header: ") + e.what());
    }
    rd.end = body_end;
    for (std::size_t i = 0; i < count; ++i) {
      VectorRecord r;
      r.id = rd.u64();
      const std::uint32_t len = rd.u32();
      r.text = std::string(rd.take(len));
      r.vector.values.resize(store.header_.dim);
      for (auto& v : r.vector.values) v = std::bit_cast<float>(rd.u32());
      try {
        store.insert(std::move(r));
      } catch (const Error& e) {
        throw Error(Errc::CorruptStore, e.what());
      }
    }
    if (rd.pos != body_end) throw Error(Errc::CorruptStore, "trailing bytes after records");
    return store;
  }

  /// One JSON object per record: {id, text, vector}. Inspection only.
  void export_jsonl(std::ostream& out) const {
    for (const auto& r : records_) {
      out << nlohmann::json{{"id", r.id}, {"text", r.text}, {"vector", r.vector.values}}.dump() << '\n';
    }
  }

  friend bool operator==(const VectorStore& a, const VectorStore& b) {
    return a.header_ == b.header_ && a.records_ == b.records_;
  }

 private:
  struct Reader {
    std::string_view bytes;
    std::size_t pos = 0;
    std::size_t end = std::string_view::npos;

    std::string_view take(std::size_t n) {
      const std::size_t limit = std::min(end, bytes.size());
      if (pos > limit || n > limit - pos) throw Error(Errc::CorruptStore, "unexpected end of data");
      auto s = bytes.substr(pos, n);
      pos += n;
      return s;
    }
    std::uint32_t u32() {
      auto s = take(4);
      std::uint32_t v = 0;
      for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(s[i]);
      return v;
    }
    std::uint64_t u64() {
      const std::uint64_t lo = u32();
      const std::uint64_t hi = u32();
      return lo | (hi << 32);
    }
  };

  static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  static void put_u64(std::string& out, std::uint64_t v) {
    put_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
    put_u32(out, static_cast<std::uint32_t>(v >> 32));
  }
  static std::uint32_t crc32_of(std::string_view data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    const auto* p = reinterpret_cast<const Bytef*>(data.data());
    std::size_t left = data.size();
    while (left > 0) {
      const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
      crc = ::crc32(crc, p, chunk);
      p += chunk;
      left -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
  }

  [[nodiscard]] nlohmann::json header_json() const {
    return {{"format_version", header_.version}, {"dim", header_.dim},
            {"normalized", header_.normalized}, {"embedder", header_.embedder},
            {"count", records_.size()}, {"meta", header_.meta}};
  }

  void check_query(const EmbeddingVector& q) const {
    if (q.dim() != header_.dim) {
      throw Error(Errc::DimMismatch, "query dim " + std::to_string(q.dim()) + " != store dim " +
                                         std::to_string(header_.dim));
    }
  }

  struct Scored {
    float score;
    std::size_t index;
  };

  [[nodiscard]] bool ranks_before(const Scored& a, const Scored& b) const noexcept {
    if (a.score != b.score) return a.score > b.score;
    return records_[a.index].id < records_[b.index].id;
  }

  [[nodiscard]] std::vector<Scored> scan(const EmbeddingVector& q, float min_score) const {
    std::vector<Scored> scored;
    scored.reserve(records_.size());
    for (std::size_t i = 0; i < records_.size(); ++i) {
      const float s = score(q, records_[i]);
      if (s >= min_score) scored.push_back({s, i});
    }
    return scored;
  }

  [[nodiscard]] std::vector<RetrievalHit> to_hits(const std::vector<Scored>& scored) const {
    std::vector<RetrievalHit> hits;
    hits.reserve(scored.size());
    for (const auto& s : scored) hits.push_back({records_[s.index].id, s.score, records_[s.index].text});
    return hits;
  }

  StoreHeader header_;
  std::vector<VectorRecord> records_;
  std::unordered_set<std::uint64_t> ids_;
};

}  // namespace raglog
