#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "raglog/embed.hpp"
#include "raglog/error.hpp"
#include "raglog/format.hpp"
#include "raglog/ingest.hpp"
#include "raglog/rng.hpp"
#include "raglog/store.hpp"

namespace raglog {

// ---------------------------------------------------------------------------
// k-means

struct ClusterModel {
  std::size_t k = 0;
  std::vector<std::vector<double>> centroids;
  std::vector<std::size_t> assignments;
  std::vector<double> wcss_history;  // cost after each assignment step
  std::uint64_t seed = 0;
  std::size_t iterations_run = 0;
  bool converged = false;

  [[nodiscard]] double final_wcss() const { return wcss_history.empty() ? 0.0 : wcss_history.back(); }
};

struct KMeansOptions {
  std::size_t max_iter = 100;
  double rel_tol = 1e-4;
  std::size_t restarts = 1;  // independent seedings; the lowest final WCSS wins
};

namespace detail {

inline double squared_distance(std::span<const float> x, std::span<const double> c) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = static_cast<double>(x[i]) - c[i];
    acc += d * d;
  }
  return acc;
}

inline std::vector<double> to_double(const EmbeddingVector& v) {
  return {v.values.begin(), v.values.end()};
}

inline std::size_t check_dims(std::span<const EmbeddingVector> vectors) {
  const std::size_t dim = vectors.empty() ? 0 : vectors.front().dim();
  for (const auto& v : vectors) {
    if (v.dim() != dim) throw Error(Errc::DimMismatch, "input vectors differ in dimension");
  }
  return dim;
}

// Nearest centroid, ties to the lowest index.
inline std::pair<std::size_t, double> nearest(std::span<const float> x, const std::vector<std::vector<double>>& cs) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cs.size(); ++j) {
    const double d = squared_distance(x, cs[j]);
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  return {best, best_d};
}

/// Draws an index with probability proportional to weight. Zero-weight
/// points are never drawn while any weight is positive.
inline std::size_t weighted_pick(const std::vector<double>& weight, double total, Rng& rng) {
  const std::size_t n = weight.size();
  if (!(total > 0.0)) return static_cast<std::size_t>(rng.below(n));
  const double r = rng.unit() * total;
  double cum = 0.0;
  std::size_t last_positive = n;
  for (std::size_t i = 0; i < n; ++i) {
    if (weight[i] <= 0.0) continue;
    last_positive = i;
    cum += weight[i];
    if (cum > r) return i;
  }
  return last_positive;  // rounding left r just past the running sum
}

/// Greedy k-means++: each new center is the best of 2 + floor(ln k)
/// D^2-sampled candidates, judged by the potential it leaves behind.
inline std::vector<std::vector<double>> kmeans_plus_plus(std::span<const EmbeddingVector> vectors, std::size_t k,
                                                         Rng& rng) {
  const std::size_t n = vectors.size();
  const std::size_t trials = 2 + static_cast<std::size_t>(std::log(static_cast<double>(k)));
  std::vector<std::vector<double>> centroids;
  centroids.reserve(k);
  centroids.push_back(to_double(vectors[rng.below(n)]));
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(vectors[i].values, centroids[0]);

  std::vector<double> candidate_d2(n), best_d2(n);
  while (centroids.size() < k) {
    double total = 0.0;
    for (double d : d2) total += d;
    std::size_t best = n;
    double best_potential = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < trials; ++t) {
      const std::size_t c = weighted_pick(d2, total, rng);
      const auto center = to_double(vectors[c]);
      double potential = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        candidate_d2[i] = std::min(d2[i], squared_distance(vectors[i].values, center));
        potential += candidate_d2[i];
      }
      if (potential < best_potential) {
        best_potential = potential;
        best = c;
        best_d2.swap(candidate_d2);
      }
    }
    centroids.push_back(to_double(vectors[best]));
    d2.swap(best_d2);
  }
  return centroids;
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer: independent sub-streams from one user seed.
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline ClusterModel lloyd(std::span<const EmbeddingVector> vectors, std::size_t k, std::uint64_t seed,
                          std::size_t dim, const KMeansOptions& options) {
  const std::size_t n = vectors.size();

  Rng rng(seed);
  ClusterModel model;
  model.k = k;
  model.seed = seed;
  model.centroids = detail::kmeans_plus_plus(vectors, k, rng);
  model.assignments.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  const std::size_t max_iter = std::max<std::size_t>(options.max_iter, 1);

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    double cost = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto [j, d] = detail::nearest(vectors[i].values, model.centroids);
      model.assignments[i] = j;
      dist[i] = d;
      cost += d;
    }
    model.wcss_history.push_back(cost);
    model.iterations_run = iter + 1;

    if (cost == 0.0) {
      model.converged = true;
      break;
    }
    if (model.wcss_history.size() >= 2) {
      const double prev = model.wcss_history[model.wcss_history.size() - 2];
      if (prev - cost <= options.rel_tol * prev) {
        model.converged = true;
        break;
      }
    }
    if (iter + 1 == max_iter) break;

    // Update step; sums accumulate in point order.
    std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      auto& s = sums[model.assignments[i]];
      for (std::size_t t = 0; t < dim; ++t) s[t] += vectors[i].values[t];
      ++counts[model.assignments[i]];
    }
    std::vector<bool> taken(n, false);
    for (std::size_t j = 0; j < k; ++j) {
      if (counts[j] > 0) {
        for (std::size_t t = 0; t < dim; ++t) model.centroids[j][t] = sums[j][t] / static_cast<double>(counts[j]);
        continue;
      }
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      taken[far] = true;
      dist[far] = 0.0;
      model.centroids[j] = detail::to_double(vectors[far]);
    }
  }
  return model;
}

}  // namespace detail

/// Lloyd's algorithm with greedy k-means++ seeding.
///
/// Stops when the relative WCSS improvement drops below rel_tol or after
/// max_iter assignment steps. Always ends on an assignment step, so the
/// returned assignments are nearest-centroid for the returned centroids.
/// Clusters left empty by an update are moved onto the point farthest from
/// its own centroid.
/// With restarts > 1, restart r seeds from mix(seed, r) (restart 0 uses seed
/// itself) and the run with the lowest final WCSS is kept; ties keep the
/// earlier restart.
inline ClusterModel kmeans(std::span<const EmbeddingVector> vectors, std::size_t k, std::uint64_t seed,
                           const KMeansOptions& options = {}) {
  if (k == 0) throw Error(Errc::InvalidArgument, "k must be >= 1");
  if (vectors.size() < k) {
    throw Error(Errc::TooFewPoints, std::to_string(vectors.size()) + " points for k=" + std::to_string(k));
  }
  const std::size_t dim = detail::check_dims(vectors);
  ClusterModel best = detail::lloyd(vectors, k, seed, dim, options);
  for (std::size_t r = 1; r < options.restarts; ++r) {
    ClusterModel m = detail::lloyd(vectors, k, detail::mix_seed(seed, 1000 + r), dim, options);
    if (m.final_wcss() < best.final_wcss()) best = std::move(m);
  }
  best.seed = seed;
  return best;
}

/// Sum of squared distances from each point to its assigned centroid.
inline double wcss(std::span<const EmbeddingVector> vectors, const ClusterModel& model) {
  if (vectors.size() != model.assignments.size()) {
    throw Error(Errc::InvalidArgument, "model was fitted to a different number of points");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const auto& c = model.centroids.at(model.assignments[i]);
    if (c.size() != vectors[i].dim()) throw Error(Errc::DimMismatch, "centroid dim differs from point dim");
    total += detail::squared_distance(vectors[i].values, c);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Elbow selection

struct ElbowResult {
  std::size_t k = 0;
  std::vector<std::pair<std::size_t, double>> curve;  // (k, wcss) for k = 1..k_max
};

/// Picks the k in [k_min, k_max - 1] with the largest discrete second
/// difference WCSS(k-1) - 2 WCSS(k) + WCSS(k+1); ties go to the smaller k.
/// The curve must list consecutive k values starting at 1.
inline std::size_t select_elbow(const std::vector<std::pair<std::size_t, double>>& curve, std::size_t k_min,
                                std::size_t k_max) {
  if (k_min < 2 || k_max < k_min + 1) throw Error(Errc::InvalidArgument, "elbow range needs 2 <= k_min < k_max");
  if (curve.size() < k_max) throw Error(Errc::InvalidArgument, "curve is shorter than k_max");
  const auto w = [&](std::size_t k) { return curve[k - 1].second; };
  std::size_t best = k_min;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t k = k_min; k + 1 <= k_max; ++k) {
    const double score = w(k - 1) - 2.0 * w(k) + w(k + 1);
    if (score > best_score) {
      best_score = score;
      best = k;
    }
  }
  return best;
}

inline ElbowResult elbow_select_k(std::span<const EmbeddingVector> vectors, std::size_t k_min, std::size_t k_max,
                                  std::uint64_t seed, const KMeansOptions& options = {}) {
  if (k_min < 2 || k_max < k_min + 1) throw Error(Errc::InvalidArgument, "elbow range needs 2 <= k_min < k_max");
  if (vectors.size() < k_max) {
    throw Error(Errc::TooFewPoints, std::to_string(vectors.size()) + " points for k_max=" + std::to_string(k_max));
  }
  ElbowResult out;
  for (std::size_t k = 1; k <= k_max; ++k) out.curve.emplace_back(k, kmeans(vectors, k, seed, options).final_wcss());
  out.k = select_elbow(out.curve, k_min, k_max);
  return out;
}

// ---------------------------------------------------------------------------
// Reference-set construction

struct RandomPlan {
  std::size_t n = 0;
};

struct AutoK {
  std::size_t k_min = 2;
  std::size_t k_max = 10;
};

struct FixedK {
  std::size_t k = 0;
};

struct ClusteredPlan {
  std::variant<AutoK, FixedK> k = AutoK{};
  std::size_t per_cluster = 0;
};

struct ReferencePlan {
  std::variant<RandomPlan, ClusteredPlan> strategy;
  std::uint64_t seed = 0;

  void validate() const {
    if (const auto* r = std::get_if<RandomPlan>(&strategy)) {
      if (r->n == 0) throw Error(Errc::InvalidArgument, "random plan needs n >= 1");
      return;
    }
    const auto& c = std::get<ClusteredPlan>(strategy);
    if (c.per_cluster == 0) throw Error(Errc::InvalidArgument, "per_cluster must be >= 1");
    if (const auto* a = std::get_if<AutoK>(&c.k)) {
      if (a->k_min < 2 || a->k_max < a->k_min + 1) throw Error(Errc::InvalidArgument, "auto k needs 2 <= k_min < k_max");
    } else if (std::get<FixedK>(c.k).k == 0) {
      throw Error(Errc::InvalidArgument, "fixed k must be >= 1");
    }
  }

  [[nodiscard]] std::string name() const {
    return std::holds_alternative<RandomPlan>(strategy) ? "random" : "clustered";
  }
};

struct BuildOptions {
  std::size_t candidate_cap = 200000;  // larger normal pools are subsampled before clustering
  std::size_t max_in_flight = 1;
  KMeansOptions kmeans{.restarts = 4};
};

struct BuildReport {
  std::string strategy;
  std::uint64_t seed = 0;
  EmbedderDescriptor embedder;
  std::size_t population = 0;
  std::size_t candidates = 0;
  bool subsampled = false;
  std::size_t records = 0;
  bool shortfall = false;
  // random
  std::size_t requested_n = 0;
  // clustered
  std::string k_mode;
  std::size_t k = 0;
  std::size_t per_cluster = 0;
  std::vector<std::size_t> cluster_sizes;
  std::vector<std::size_t> cluster_taken;
  std::vector<std::pair<std::size_t, double>> elbow_curve;
  std::size_t kmeans_iterations = 0;
  std::size_t kmeans_restarts = 1;
  bool kmeans_converged = false;
  double kmeans_wcss = 0.0;

  [[nodiscard]] nlohmann::json to_json() const {
    nlohmann::json j = {
        {"strategy", strategy},
        {"seed", seed},
        {"embedder", {{"name", embedder.name}, {"dim", embedder.dim}, {"normalized", embedder.normalized}}},
        {"population", population},
        {"records", records},
        {"shortfall", shortfall},
    };
    if (strategy == "random") {
      j["n"] = requested_n;
      return j;
    }
    j["candidates"] = candidates;
    j["subsampled"] = subsampled;
    j["k_mode"] = k_mode;
    j["k"] = k;
    j["per_cluster"] = per_cluster;
    nlohmann::json clusters = nlohmann::json::array();
    for (std::size_t c = 0; c < cluster_sizes.size(); ++c) {
      clusters.push_back({{"cluster", c},
                          {"size", cluster_sizes[c]},
                          {"taken", cluster_taken[c]},
                          {"shortfall", cluster_taken[c] < per_cluster}});
    }
    j["clusters"] = clusters;
    nlohmann::json curve = nlohmann::json::array();
    for (auto [kk, w] : elbow_curve) curve.push_back({{"k", kk}, {"wcss", w}});
    j["elbow_curve"] = curve;
    j["kmeans"] = {{"iterations", kmeans_iterations},
                   {"converged", kmeans_converged},
                   {"wcss", kmeans_wcss},
                   {"restarts", kmeans_restarts}};
    return j;
  }
};

struct BuiltReference {
  VectorStore store;
  BuildReport report;
  std::vector<std::size_t> record_clusters;  // per store record; empty for random plans
};

namespace detail {


inline std::vector<std::string> messages_of(const std::vector<LogEntry>& entries, std::span<const std::size_t> idx) {
  std::vector<std::string> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(entries[i].message);
  return out;
}

}  // namespace detail

/// Populates a normal-only store by uniform sampling or by sampling each
/// k-means cluster of the embedded candidates. Records get ids 0..n-1.
inline BuiltReference build_reference_store(const std::vector<LogEntry>& train_normals, const ReferencePlan& plan,
                                            Embedder& embedder, const BuildOptions& options = {}) {
  plan.validate();
  if (train_normals.empty()) throw Error(Errc::EmptyInput, "no training entries");
  for (const auto& e : train_normals) {
    if (e.label != GroundTruth::Normal) {
      throw Error(Errc::InvalidArgument, "entry " + std::to_string(e.id) + " is anomalous; stores hold normals only");
    }
  }

  BuiltReference out{VectorStore(embedder.descriptor()), {}, {}};
  BuildReport& rep = out.report;
  rep.strategy = plan.name();
  rep.seed = plan.seed;
  rep.embedder = embedder.descriptor();
  rep.population = train_normals.size();

  if (const auto* random = std::get_if<RandomPlan>(&plan.strategy)) {
    Rng rng(detail::mix_seed(plan.seed, 0));
    const auto picked = rng.sample_indices(train_normals.size(), random->n);
    const auto texts = detail::messages_of(train_normals, picked);
    auto vectors = embedder.embed_batch(texts, options.max_in_flight);
    for (std::size_t i = 0; i < picked.size(); ++i) {
      out.store.insert({i, std::move(vectors[i]), texts[i]});
    }
    rep.requested_n = random->n;
    rep.shortfall = random->n > train_normals.size();
  } else {
    const auto& clustered = std::get<ClusteredPlan>(plan.strategy);
    std::vector<std::size_t> candidates;
    if (train_normals.size() > options.candidate_cap) {
      Rng sub(detail::mix_seed(plan.seed, 1));
      candidates = sub.sample_indices(train_normals.size(), options.candidate_cap);
      std::sort(candidates.begin(), candidates.end());
      rep.subsampled = true;
    } else {
      candidates.resize(train_normals.size());
      for (std::size_t i = 0; i < candidates.size(); ++i) candidates[i] = i;
    }
    rep.candidates = candidates.size();
    const auto texts = detail::messages_of(train_normals, candidates);
    auto vectors = embedder.embed_batch(texts, options.max_in_flight);

    const std::uint64_t cluster_seed = detail::mix_seed(plan.seed, 2);
    if (const auto* a = std::get_if<AutoK>(&clustered.k)) {
      auto elbow = elbow_select_k(vectors, a->k_min, a->k_max, cluster_seed, options.kmeans);
      rep.k_mode = "auto";
      rep.k = elbow.k;
      rep.elbow_curve = std::move(elbow.curve);
    } else {
      rep.k_mode = "fixed";
      rep.k = std::get<FixedK>(clustered.k).k;
    }
    const ClusterModel model = kmeans(vectors, rep.k, cluster_seed, options.kmeans);
    rep.kmeans_iterations = model.iterations_run;
    rep.kmeans_restarts = std::max<std::size_t>(options.kmeans.restarts, 1);
    rep.kmeans_converged = model.converged;
    rep.kmeans_wcss = model.final_wcss();
    rep.per_cluster = clustered.per_cluster;

    std::vector<std::vector<std::size_t>> members(rep.k);
    for (std::size_t i = 0; i < model.assignments.size(); ++i) members[model.assignments[i]].push_back(i);
    Rng rng(detail::mix_seed(plan.seed, 3));
    std::uint64_t next_id = 0;
    for (std::size_t c = 0; c < rep.k; ++c) {
      const auto picked = rng.sample_indices(members[c].size(), clustered.per_cluster);
      rep.cluster_sizes.push_back(members[c].size());
      rep.cluster_taken.push_back(picked.size());
      if (picked.size() < clustered.per_cluster) rep.shortfall = true;
      for (auto p : picked) {
        const std::size_t i = members[c][p];
        out.store.insert({next_id++, vectors[i], texts[i]});
        out.record_clusters.push_back(c);
      }
    }
  }
  rep.records = out.store.size();
  out.store.meta()["build"] = rep.to_json();
  if (!out.record_clusters.empty()) out.store.meta()["record_clusters"] = out.record_clusters;
  return out;
}

// ---------------------------------------------------------------------------
// 2D projection for cluster maps

struct ProjectedPoint {
  double x = 0.0;
  double y = 0.0;
  std::size_t cluster = 0;
};

struct Projection {
  std::vector<ProjectedPoint> points;
  bool degenerate = false;  // rank < 2: second (or both) components zeroed
};

namespace detail {

inline std::vector<double> power_iteration(const std::vector<double>& cov, std::size_t d,
                                           const std::vector<double>* orthogonal_to, Rng& rng, double& eigenvalue) {
  std::vector<double> v(d);
  for (auto& x : v) x = rng.unit() - 0.5;
  const auto orthogonalize = [&](std::vector<double>& u) {
    if (!orthogonal_to) return;
    double dot = 0.0;
    for (std::size_t i = 0; i < d; ++i) dot += u[i] * (*orthogonal_to)[i];
    for (std::size_t i = 0; i < d; ++i) u[i] -= dot * (*orthogonal_to)[i];
  };
  const auto normalize = [&](std::vector<double>& u) {
    double n = 0.0;
    for (double x : u) n += x * x;
    n = std::sqrt(n);
    if (n > 0.0) {
      for (double& x : u) x /= n;
    }
    return n;
  };
  orthogonalize(v);
  normalize(v);
  eigenvalue = 0.0;
  std::vector<double> w(d);
  for (int iter = 0; iter < 200; ++iter) {
    for (std::size_t r = 0; r < d; ++r) {
      double acc = 0.0;
      const double* row = &cov[r * d];
      for (std::size_t c = 0; c < d; ++c) acc += row[c] * v[c];
      w[r] = acc;
    }
    orthogonalize(w);
    eigenvalue = normalize(w);
    if (eigenvalue == 0.0) return std::vector<double>(d, 0.0);
    double delta = 0.0;
    for (std::size_t i = 0; i < d; ++i) delta += (w[i] - v[i]) * (w[i] - v[i]);
    v.swap(w);
    if (std::sqrt(delta) < 1e-7) break;
  }
  return v;
}

}  // namespace detail

/// Projects centered vectors onto their top two principal components,
/// found by seeded power iteration with deflation.
inline Projection project_2d(std::span<const EmbeddingVector> vectors, std::span<const std::size_t> clusters,
                             std::uint64_t seed = 0) {
  if (vectors.size() < 3) throw Error(Errc::TooFewPoints, "projection needs at least 3 points");
  if (clusters.size() != vectors.size()) throw Error(Errc::LengthMismatch, "one cluster label per vector required");
  const std::size_t d = detail::check_dims(vectors);
  const std::size_t n = vectors.size();

  std::vector<double> mean(d, 0.0);
  for (const auto& v : vectors) {
    for (std::size_t t = 0; t < d; ++t) mean[t] += v.values[t];
  }
  for (auto& m : mean) m /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  std::vector<double> centered(d);
  for (const auto& v : vectors) {
    for (std::size_t t = 0; t < d; ++t) centered[t] = v.values[t] - mean[t];
    for (std::size_t r = 0; r < d; ++r) {
      const double cr = centered[r];
      if (cr == 0.0) continue;
      double* row = &cov[r * d];
      for (std::size_t c = r; c < d; ++c) row[c] += cr * centered[c];
    }
  }
  double trace = 0.0;
  for (std::size_t r = 0; r < d; ++r) {
    for (std::size_t c = r; c < d; ++c) {
      cov[r * d + c] /= static_cast<double>(n);
      cov[c * d + r] = cov[r * d + c];
    }
    trace += cov[r * d + r];
  }

  Projection out;
  Rng rng(seed);
  double l1 = 0.0, l2 = 0.0;
  std::vector<double> pc1(d, 0.0), pc2(d, 0.0);
  const double floor = 1e-10 * trace;
  if (trace > 0.0) {
    pc1 = detail::power_iteration(cov, d, nullptr, rng, l1);
    if (l1 <= floor) {
      std::fill(pc1.begin(), pc1.end(), 0.0);
    } else {
      // Deflate, then keep the second component orthogonal to the first.
      for (std::size_t r = 0; r < d; ++r) {
        for (std::size_t c = 0; c < d; ++c) cov[r * d + c] -= l1 * pc1[r] * pc1[c];
      }
      pc2 = detail::power_iteration(cov, d, &pc1, rng, l2);
      if (l2 <= floor) std::fill(pc2.begin(), pc2.end(), 0.0);
    }
  }
  out.degenerate = trace <= 0.0 || l1 <= floor || l2 <= floor;

  out.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double x = 0.0, y = 0.0;
    for (std::size_t t = 0; t < d; ++t) {
      const double c = vectors[i].values[t] - mean[t];
      x += c * pc1[t];
      y += c * pc2[t];
    }
    out.points.push_back({x, y, clusters[i]});
  }
  return out;
}

inline Projection project_2d(std::span<const EmbeddingVector> vectors, const ClusterModel& model,
                             std::uint64_t seed = 0) {
  return project_2d(vectors, std::span<const std::size_t>(model.assignments), seed);
}

inline void write_projection_csv(std::ostream& out, const Projection& p) {
  out << "x,y,cluster\n";
  for (const auto& pt : p.points) out << format_double(pt.x) << ',' << format_double(pt.y) << ',' << pt.cluster << '\n';
}

inline void write_elbow_csv(std::ostream& out, const std::vector<std::pair<std::size_t, double>>& curve) {
  out << "k,wcss\n";
  for (auto [k, w] : curve) out << k << ',' << format_double(w) << '\n';
}

}  // namespace raglog
