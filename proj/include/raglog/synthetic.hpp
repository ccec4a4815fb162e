#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "raglog/ingest.hpp"
#include "raglog/rng.hpp"

// Deterministic BGL-style corpora for demos and tests. Normal messages come
// from 20 fixed templates (5 subsystems x 4 messages; each subsystem shares a
// prefix) with one small numeric field. Anomalies are Greek-letter word
// salad, so they share no character 3-gram with any normal message.
namespace raglog::synthetic {

inline constexpr std::array<std::string_view, 20> kNormalTemplates = {
    "RAS KERNEL INFO ppc440 compute kernel status report: icache parity corrected core {}",
    "RAS KERNEL INFO ppc440 compute kernel status report: dcache flush done partition {}",
    "RAS KERNEL INFO ppc440 compute kernel status report: core file written rank {}",
    "RAS KERNEL INFO ppc440 compute kernel status report: ddr errors corrected total {}",
    "RAS LINKCARD INFO midplane torus link card monitor: training succeeded port {}",
    "RAS LINKCARD INFO midplane torus link card monitor: receiver retransmits count {}",
    "RAS LINKCARD INFO midplane torus link card monitor: power module nominal slot {}",
    "RAS LINKCARD INFO midplane torus link card monitor: clock sync verified nodes {}",
    "RAS MMCS INFO control system idoproxy db service: channel established id {}",
    "RAS MMCS INFO control system idoproxy db service: block allocated for job {}",
    "RAS MMCS INFO control system idoproxy db service: boot sequence done secs {}",
    "RAS MMCS INFO control system idoproxy db service: operator session started {}",
    "RAS APP INFO ciod: application launcher daemon notice: image segment loaded {}",
    "RAS APP INFO ciod: application launcher daemon notice: queue drained pending {}",
    "RAS APP INFO ciod: application launcher daemon notice: stdout redirected rank {}",
    "RAS APP INFO ciod: application launcher daemon notice: handshake acknowledged code {}",
    "RAS DISCOVERY INFO hardware discovery bulk scan: vpd healthy modules {}",
    "RAS DISCOVERY INFO hardware discovery bulk scan: node card temperature celsius {}",
    "RAS DISCOVERY INFO hardware discovery bulk scan: fan speed nominal bank {}",
    "RAS DISCOVERY INFO hardware discovery bulk scan: ido chip clean board {}",
};

inline constexpr std::array<std::string_view, 6> kAlertTags = {"KERNDTLB", "KERNSTOR", "APPSEV",
                                                               "KERNMNTF", "MMCS",     "LINKPAP"};

inline std::string normal_message(std::size_t template_index, std::uint64_t field) {
  std::string t(kNormalTemplates[template_index % kNormalTemplates.size()]);
  const auto slot = t.find("{}");
  return t.replace(slot, 2, std::to_string(field));
}

inline std::string normal_message(Rng& rng) {
  const auto t = static_cast<std::size_t>(rng.below(kNormalTemplates.size()));
  return normal_message(t, rng.below(32));
}

inline std::string anomaly_message(Rng& rng) {
  static constexpr std::array<std::string_view, 24> kGreek = {
      "α", "β", "γ", "δ", "ε", "ζ", "η", "θ", "ι", "κ", "λ", "μ",
      "ν", "ξ", "ο", "π", "ρ", "σ", "τ", "υ", "φ", "χ", "ψ", "ω"};
  std::string out;
  const auto words = 5 + rng.below(4);
  for (std::uint64_t w = 0; w < words; ++w) {
    if (w > 0) out += ' ';
    const auto len = 3 + rng.below(6);
    for (std::uint64_t i = 0; i < len; ++i) out += kGreek[rng.below(kGreek.size())];
  }
  return out;
}

/// `normals` normal entries followed by `anomalies` anomalous ones, shuffled;
/// ids are assigned after shuffling.
inline std::vector<LogEntry> corpus(std::size_t normals, std::size_t anomalies, std::uint64_t seed,
                                    const std::string& source = "synthetic") {
  Rng rng(seed);
  std::vector<LogEntry> out;
  out.reserve(normals + anomalies);
  for (std::size_t i = 0; i < normals; ++i) {
    LogEntry e;
    e.label = GroundTruth::Normal;
    e.message = normal_message(rng);
    e.raw = "- " + e.message;
    out.push_back(std::move(e));
  }
  for (std::size_t i = 0; i < anomalies; ++i) {
    LogEntry e;
    e.label = GroundTruth::Anomalous;
    e.message = anomaly_message(rng);
    e.raw = std::string(kAlertTags[rng.below(kAlertTags.size())]) + " " + e.message;
    out.push_back(std::move(e));
  }
  rng.shuffle(out);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i].id = i;
    out[i].source = source;
  }
  return out;
}

}  // namespace raglog::synthetic
