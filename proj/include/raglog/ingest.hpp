#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "raglog/error.hpp"
#include "raglog/rng.hpp"
#include "raglog/text.hpp"

namespace raglog {

enum class GroundTruth { Normal, Anomalous };

constexpr std::string_view to_string(GroundTruth g) noexcept {
  return g == GroundTruth::Normal ? "normal" : "anomalous";
}

inline GroundTruth ground_truth_from_string(std::string_view s) {
  if (s == "normal") return GroundTruth::Normal;
  if (s == "anomalous") return GroundTruth::Anomalous;
  throw Error(Errc::FormatError, "unknown label '" + std::string(s) + "'");
}

struct LogEntry {
  std::uint64_t id = 0;
  std::string source;
  GroundTruth label = GroundTruth::Normal;
  std::string message;  // raw line minus the label token
  std::string raw;      // empty when the entry was read back from a dataset file
};

enum class LogFormat { BglLike };

inline LogFormat log_format_from_string(std::string_view s) {
  // Thunderbird uses the same "-" / alert-tag convention as BGL.
  if (s == "bgl" || s == "bgl_like" || s == "thunderbird") return LogFormat::BglLike;
  throw Error(Errc::InvalidArgument, "unknown log format '" + std::string(s) + "'");
}

/// Separates the leading label token from a raw log line. Nothing else is
/// parsed: the message keeps its original spacing and content.
inline LogEntry parse_line(std::string_view line, LogFormat format = LogFormat::BglLike) {
  (void)format;
  const std::string clean = text::sanitize_utf8(line);
  std::string_view s = clean;
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  if (text::is_blank(s)) throw Error(Errc::EmptyLine, "blank line");

  std::size_t pos = 0;
  while (pos < s.size() && text::is_space(s[pos])) ++pos;
  const std::size_t token_begin = pos;
  while (pos < s.size() && !text::is_space(s[pos])) ++pos;
  const std::string_view token = s.substr(token_begin, pos - token_begin);
  while (pos < s.size() && text::is_space(s[pos])) ++pos;
  if (pos >= s.size()) throw Error(Errc::NoMessage, "line holds only the label token '" + std::string(token) + "'");

  LogEntry entry;
  entry.label = token == "-" ? GroundTruth::Normal : GroundTruth::Anomalous;
  entry.message = std::string(s.substr(pos));
  entry.raw = std::string(s.substr(token_begin));
  return entry;
}

struct LoadOptions {
  LogFormat format = LogFormat::BglLike;
  std::optional<std::size_t> limit;
  bool strict = true;  // false: skip and count unparseable lines
  bool dedup = false;  // drop entries whose message repeats an earlier one
  std::string source;  // defaults to the file stem
};

struct LoadedDataset {
  std::string source;
  std::vector<LogEntry> entries;
  std::size_t blank_lines = 0;
  std::size_t skipped_lines = 0;
  std::size_t duplicates = 0;
};

inline LoadedDataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read '" + path.string() + "'");

  LoadedDataset out;
  out.source = options.source.empty() ? path.stem().string() : options.source;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (options.limit && out.entries.size() >= *options.limit) break;
    if (text::is_blank(line)) {
      ++out.blank_lines;
      continue;
    }
    LogEntry entry;
    try {
      entry = parse_line(line, options.format);
    } catch (const Error& e) {
      if (options.strict) {
        throw Error(Errc::FormatError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
      }
      ++out.skipped_lines;
      continue;
    }
    if (options.dedup && !seen.insert(entry.message).second) {
      ++out.duplicates;
      continue;
    }
    entry.id = out.entries.size();
    entry.source = out.source;
    out.entries.push_back(std::move(entry));
  }
  if (in.bad()) throw Error(Errc::IoError, "read failure on '" + path.string() + "'");
  return out;
}

struct DatasetSplit {
  std::vector<LogEntry> train_normals;
  std::vector<LogEntry> test;
  std::vector<std::uint64_t> discarded_anomalous;  // ids of anomalies on the train side
  std::uint64_t seed = 0;
  double test_fraction = 0.2;
};

inline std::size_t test_count(std::size_t n, double fraction) {
  // The epsilon absorbs representation error in decimal fractions (0.29 * 100).
  return static_cast<std::size_t>(std::floor(static_cast<double>(n) * fraction + 1e-9));
}

/// Row-level uniform random split. Test keeps file order; anomalies that
/// land on the train side are never used for training.
inline DatasetSplit split_dataset(const std::vector<LogEntry>& entries, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::InvalidArgument, "test_fraction must lie in (0, 1)");
  }
  if (entries.empty()) throw Error(Errc::DegenerateSplit, "no entries to split");

  const std::size_t m = test_count(entries.size(), test_fraction);
  Rng rng(seed);
  auto picked = rng.sample_indices(entries.size(), m);
  std::sort(picked.begin(), picked.end());

  DatasetSplit split;
  split.seed = seed;
  split.test_fraction = test_fraction;
  std::vector<bool> in_test(entries.size(), false);
  for (auto i : picked) in_test[i] = true;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const LogEntry& e = entries[i];
    if (in_test[i]) {
      split.test.push_back(e);
    } else if (e.label == GroundTruth::Normal) {
      split.train_normals.push_back(e);
    } else {
      split.discarded_anomalous.push_back(e.id);
    }
  }
  if (split.test.empty()) throw Error(Errc::DegenerateSplit, "test side is empty");
  if (split.train_normals.empty()) throw Error(Errc::DegenerateSplit, "train side holds no normal entries");
  return split;
}

struct TestSample {
  std::vector<LogEntry> entries;
  bool shortfall = false;  // n exceeded the population
};

inline TestSample sample_test(const std::vector<LogEntry>& test, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error(Errc::InvalidArgument, "sample size must be >= 1");
  Rng rng(seed);
  TestSample out;
  out.shortfall = n > test.size();
  for (auto i : rng.sample_indices(test.size(), n)) out.entries.push_back(test[i]);
  return out;
}

// Dataset files: JSON-Lines, header object first, then one object per entry.

struct DatasetFile {
  std::string source;
  std::vector<LogEntry> entries;
  nlohmann::json header;
};

inline nlohmann::json dataset_header(const std::string& source, const std::vector<LogEntry>& entries,
                                     const nlohmann::json& meta = nullptr) {
  const auto anomalous = static_cast<std::size_t>(std::count_if(
      entries.begin(), entries.end(), [](const LogEntry& e) { return e.label == GroundTruth::Anomalous; }));
  nlohmann::json header = {
      {"format", "raglog-dataset"},
      {"version", 1},
      {"source", source},
      {"counts", {{"entries", entries.size()}, {"normal", entries.size() - anomalous}, {"anomalous", anomalous}}},
  };
  if (!meta.is_null()) header["meta"] = meta;
  return header;
}

inline void write_dataset(std::ostream& out, const std::string& source, const std::vector<LogEntry>& entries,
                          const nlohmann::json& meta = nullptr) {
  out << dataset_header(source, entries, meta).dump() << '\n';
  for (const auto& e : entries) {
    nlohmann::json row = {
        {"id", e.id}, {"source", e.source}, {"label", to_string(e.label)}, {"message", e.message}};
    out << row.dump() << '\n';
  }
}

inline void write_dataset(const std::filesystem::path& path, const std::string& source,
                          const std::vector<LogEntry>& entries, const nlohmann::json& meta = nullptr) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::IoError, "cannot write '" + path.string() + "'");
  write_dataset(out, source, entries, meta);
  if (!out) throw Error(Errc::IoError, "write failure on '" + path.string() + "'");
}

inline DatasetFile read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot read '" + path.string() + "'");
  DatasetFile out;
  std::string line;
  std::size_t line_no = 0;
  try {
    while (std::getline(in, line)) {
      ++line_no;
      if (text::is_blank(line)) continue;
      auto obj = nlohmann::json::parse(line);
      if (out.header.is_null()) {
        if (obj.value("format", "") != "raglog-dataset") {
          throw Error(Errc::FormatError, "missing raglog-dataset header");
        }
        if (obj.value("version", 0) != 1) throw Error(Errc::VersionMismatch, "unsupported dataset version");
        out.source = obj.value("source", "");
        out.header = std::move(obj);
        continue;
      }
      LogEntry e;
      e.id = obj.at("id").get<std::uint64_t>();
      e.source = obj.at("source").get<std::string>();
      e.label = ground_truth_from_string(obj.at("label").get<std::string>());
      e.message = obj.at("message").get<std::string>();
      out.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::FormatError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
  }
  if (out.header.is_null()) throw Error(Errc::FormatError, "'" + path.string() + "' has no header line");
  return out;
}

}  // namespace raglog
