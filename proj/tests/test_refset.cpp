#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "raglog/refset.hpp"
#include "raglog/synthetic.hpp"
#include "support/oracles.hpp"

using namespace raglog;

namespace {

std::vector<EmbeddingVector> pts(std::initializer_list<std::vector<float>> xs) {
  std::vector<EmbeddingVector> out;
  for (const auto& x : xs) out.emplace_back(x);
  return out;
}

std::vector<LogEntry> normals(std::size_t n, std::uint64_t seed) {
  std::vector<LogEntry> out;
  for (auto& e : synthetic::corpus(n, 0, seed)) out.push_back(std::move(e));
  return out;
}

}  // namespace

TEST(KMeans, TwoPointsTwoClusters) {
  const auto v = pts({{0.0f, 0.0f}, {1.0f, 1.0f}});
  const auto m = kmeans(v, 2, 1);
  EXPECT_EQ(m.final_wcss(), 0.0);
  EXPECT_NE(m.assignments[0], m.assignments[1]);
  EXPECT_GE(m.iterations_run, 1u);
  EXPECT_LE(m.iterations_run, 2u);
  EXPECT_TRUE(m.converged);
}

TEST(KMeans, SingleClusterIsTheMean) {
  const auto v = pts({{0.0f, 0.0f}, {2.0f, 0.0f}});
  const auto m = kmeans(v, 1, 3);
  EXPECT_DOUBLE_EQ(m.centroids[0][0], 1.0);
  EXPECT_DOUBLE_EQ(m.centroids[0][1], 0.0);
  EXPECT_DOUBLE_EQ(m.final_wcss(), 2.0);

  std::mt19937_64 gen(4);
  std::vector<EmbeddingVector> many;
  for (int i = 0; i < 200; ++i) many.emplace_back(oracle::random_unit(gen, 6));
  const auto m1 = kmeans(many, 1, 9);
  // WCSS for k=1 equals n times the total variance.
  std::vector<double> mean(6, 0.0);
  for (const auto& p : many) {
    for (int t = 0; t < 6; ++t) mean[t] += p.values[t];
  }
  for (auto& x : mean) x /= 200.0;
  const double expected = oracle::wcss_reverse(many, {mean}, std::vector<std::size_t>(200, 0));
  EXPECT_NEAR(m1.final_wcss(), expected, 1e-9 * expected);
}

TEST(KMeans, Errors) {
  const auto v = pts({{0.0f}, {1.0f}});
  try {
    (void)kmeans(v, 3, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewPoints);
  }
  EXPECT_THROW((void)kmeans(v, 0, 0), Error);
  const auto mixed = pts({{0.0f}, {1.0f, 2.0f}});
  try {
    (void)kmeans(mixed, 1, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::DimMismatch);
  }
}

TEST(KMeans, RecoversSeparatedBlobs) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto b = oracle::gaussian_blobs(seed);
    const auto m = kmeans(b.points, 3, seed + 100);
    EXPECT_GE(oracle::best_label_agreement(b.membership, m.assignments, 3), 0.99) << "seed " << seed;
  }
}

TEST(KMeans, Invariants) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto b = oracle::gaussian_blobs(seed, 4, 60, 5, 0.6, 1.0);
    const auto m = kmeans(b.points, 4, seed);
    ASSERT_FALSE(m.wcss_history.empty());
    for (std::size_t i = 1; i < m.wcss_history.size(); ++i) {
      EXPECT_LE(m.wcss_history[i], m.wcss_history[i - 1] * (1 + 1e-12)) << "seed " << seed;
    }
    // Final assignments are nearest-centroid and the reported cost matches
    // an independent recomputation.
    for (std::size_t i = 0; i < b.points.size(); ++i) {
      double own = 0.0;
      for (std::size_t t = 0; t < 5; ++t) {
        const double d = b.points[i].values[t] - m.centroids[m.assignments[i]][t];
        own += d * d;
      }
      for (std::size_t j = 0; j < m.k; ++j) {
        double other = 0.0;
        for (std::size_t t = 0; t < 5; ++t) {
          const double d = b.points[i].values[t] - m.centroids[j][t];
          other += d * d;
        }
        EXPECT_LE(own, other + 1e-12);
      }
    }
    const double ref = oracle::wcss_reverse(b.points, m.centroids, m.assignments);
    EXPECT_NEAR(m.final_wcss(), ref, 1e-9 * std::max(1.0, ref));
    EXPECT_NEAR(wcss(b.points, m), ref, 1e-9 * std::max(1.0, ref));
  }
}

TEST(KMeans, Deterministic) {
  const auto b = oracle::gaussian_blobs(5, 3, 80, 8, 0.5, 1.0);
  const auto a = kmeans(b.points, 3, 77);
  const auto c = kmeans(b.points, 3, 77);
  EXPECT_EQ(a.assignments, c.assignments);
  EXPECT_EQ(a.centroids, c.centroids);
  EXPECT_EQ(a.wcss_history, c.wcss_history);
}

TEST(KMeans, RestartsKeepTheLowestCost) {
  const auto b = oracle::gaussian_blobs(9, 6, 40, 4, 0.7, 1.0);
  KMeansOptions one, many;
  many.restarts = 6;
  const auto single = kmeans(b.points, 6, 5, one);
  const auto best = kmeans(b.points, 6, 5, many);
  EXPECT_LE(best.final_wcss(), single.final_wcss());
  EXPECT_EQ(best.seed, 5u);
  // Restart 0 is the plain run.
  KMeansOptions also_one;
  also_one.restarts = 0;
  EXPECT_EQ(kmeans(b.points, 6, 5, also_one).assignments, single.assignments);
  double lowest = single.final_wcss();
  for (std::uint64_t r = 1; r < 6; ++r) {
    lowest = std::min(lowest, kmeans(b.points, 6, detail::mix_seed(5, 1000 + r), one).final_wcss());
  }
  EXPECT_EQ(best.final_wcss(), lowest);
}

TEST(KMeans, DuplicatePointsDoNotBreakSeeding) {
  std::vector<EmbeddingVector> same(10, EmbeddingVector({1.0f, 1.0f}));
  const auto m = kmeans(same, 3, 2);
  EXPECT_EQ(m.final_wcss(), 0.0);
  EXPECT_EQ(m.assignments.size(), 10u);
}

TEST(Elbow, PicksLargestSecondDifference) {
  const std::vector<std::pair<std::size_t, double>> curve = {
      {1, 100.0}, {2, 60.0}, {3, 20.0}, {4, 18.0}, {5, 17.0}, {6, 16.5}};
  EXPECT_EQ(select_elbow(curve, 2, 6), 3u);
}

TEST(Elbow, FlatSecondDifferenceTiesToKMin) {
  const std::vector<std::pair<std::size_t, double>> curve = {{1, 10.0}, {2, 8.0}, {3, 6.0}, {4, 4.0}, {5, 2.0}};
  EXPECT_EQ(select_elbow(curve, 2, 5), 2u);
  EXPECT_THROW((void)select_elbow(curve, 1, 5), Error);
  EXPECT_THROW((void)select_elbow(curve, 3, 3), Error);
}

TEST(Elbow, FindsThreeBlobs) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto b = oracle::equidistant_blobs(seed);
    const auto r = elbow_select_k(b.points, 2, 8, seed);
    ASSERT_EQ(r.curve.size(), 8u);
    hits += r.k == 3;
  }
  EXPECT_GE(hits, 95);
}

TEST(Elbow, OneDistantBlobPullsTheBendToTwo) {
  // Two blobs 2 apart and a third 20 away: WCSS(1) > 3 WCSS(2), so the
  // sharpest bend is at k=2 even though three groups exist.
  std::mt19937_64 gen(1);
  std::normal_distribution<double> nd(0.0, 0.05);
  std::vector<EmbeddingVector> v;
  for (const double cx : {0.0, 2.0, 20.0}) {
    for (int p = 0; p < 100; ++p) v.emplace_back(std::vector<float>{float(cx + nd(gen)), float(nd(gen))});
  }
  const auto r = elbow_select_k(v, 2, 8, 4);
  EXPECT_EQ(r.k, 2u);
  EXPECT_NEAR(kmeans(v, 3, 4).final_wcss(), r.curve[2].second, 1e-9);
}

TEST(BuildReference, RandomPlanSizes) {
  HashingEmbedder emb(64);
  const auto train = normals(300, 1);
  const auto r = build_reference_store(train, ReferencePlan{RandomPlan{100}, 5}, emb);
  EXPECT_EQ(r.store.size(), 100u);
  EXPECT_FALSE(r.report.shortfall);
  const auto all = build_reference_store(train, ReferencePlan{RandomPlan{1000}, 5}, emb);
  EXPECT_EQ(all.store.size(), 300u);
  EXPECT_TRUE(all.report.shortfall);
  for (std::size_t i = 0; i < all.store.size(); ++i) EXPECT_EQ(all.store.records()[i].id, i);
  EXPECT_EQ(all.store.header().meta["build"]["strategy"], "random");
}

TEST(BuildReference, ClusteredPlanSizes) {
  HashingEmbedder emb(64);
  const auto train = normals(600, 2);
  const auto r = build_reference_store(train, ReferencePlan{ClusteredPlan{FixedK{4}, 20}, 3}, emb);
  EXPECT_EQ(r.report.k, 4u);
  std::size_t expected = 0;
  for (auto s : r.report.cluster_sizes) expected += std::min<std::size_t>(s, 20);
  EXPECT_EQ(r.store.size(), expected);
  ASSERT_EQ(r.record_clusters.size(), r.store.size());
  std::size_t total = 0;
  for (auto s : r.report.cluster_sizes) total += s;
  EXPECT_EQ(total, 600u);

  const auto big = build_reference_store(train, ReferencePlan{ClusteredPlan{FixedK{2}, 1000}, 3}, emb);
  EXPECT_EQ(big.store.size(), 600u);
  EXPECT_TRUE(big.report.shortfall);

  const auto autok = build_reference_store(train, ReferencePlan{ClusteredPlan{AutoK{2, 6}, 5}, 3}, emb);
  EXPECT_EQ(autok.report.k_mode, "auto");
  EXPECT_EQ(autok.report.elbow_curve.size(), 6u);
  EXPECT_GE(autok.report.k, 2u);
  EXPECT_LE(autok.report.k, 5u);
}

TEST(BuildReference, CandidateCapSubsamples) {
  HashingEmbedder emb(32);
  const auto train = normals(500, 4);
  BuildOptions opts;
  opts.candidate_cap = 100;
  const auto r = build_reference_store(train, ReferencePlan{ClusteredPlan{FixedK{3}, 1000}, 3}, emb, opts);
  EXPECT_TRUE(r.report.subsampled);
  EXPECT_EQ(r.report.candidates, 100u);
  EXPECT_EQ(r.store.size(), 100u);
}

TEST(BuildReference, RejectsAnomaliesAndEmptyInput) {
  HashingEmbedder emb(32);
  auto train = normals(10, 1);
  train[3].label = GroundTruth::Anomalous;
  try {
    (void)build_reference_store(train, ReferencePlan{RandomPlan{5}, 1}, emb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InvalidArgument);
  }
  try {
    (void)build_reference_store({}, ReferencePlan{RandomPlan{5}, 1}, emb);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::EmptyInput);
  }
  EXPECT_THROW((void)build_reference_store(normals(5, 1), ReferencePlan{RandomPlan{0}, 1}, emb), Error);
  EXPECT_THROW((void)build_reference_store(normals(5, 1), ReferencePlan{ClusteredPlan{FixedK{2}, 0}, 1}, emb), Error);
}

TEST(BuildReference, DeterministicForSeed) {
  HashingEmbedder emb(64);
  const auto train = normals(400, 6);
  const ReferencePlan plan{ClusteredPlan{FixedK{3}, 15}, 11};
  const auto a = build_reference_store(train, plan, emb);
  const auto b = build_reference_store(train, plan, emb);
  EXPECT_EQ(a.store.serialize(), b.store.serialize());
  const auto c = build_reference_store(train, ReferencePlan{ClusteredPlan{FixedK{3}, 15}, 12}, emb);
  EXPECT_NE(a.store.serialize(), c.store.serialize());
}

TEST(Projection, PreservesDistancesOfPlanarData) {
  // Points that lie exactly in a 2D subspace of R^5.
  std::mt19937_64 gen(3);
  const auto u = oracle::random_unit(gen, 5);
  auto w = oracle::random_unit(gen, 5);
  double dot = 0.0;
  for (int i = 0; i < 5; ++i) dot += u[i] * w[i];
  double n = 0.0;
  for (int i = 0; i < 5; ++i) {
    w[i] = static_cast<float>(w[i] - dot * u[i]);
    n += double(w[i]) * w[i];
  }
  for (auto& x : w) x = static_cast<float>(x / std::sqrt(n));
  std::uniform_real_distribution<double> ud(-3.0, 3.0);
  std::vector<EmbeddingVector> v;
  for (int p = 0; p < 30; ++p) {
    const double a = ud(gen), b = ud(gen);
    std::vector<float> x(5);
    for (int i = 0; i < 5; ++i) x[i] = static_cast<float>(a * u[i] + b * w[i]);
    v.emplace_back(x);
  }
  const std::vector<std::size_t> labels(v.size(), 0);
  const auto proj = project_2d(v, labels, 1);
  EXPECT_FALSE(proj.degenerate);
  for (std::size_t i = 0; i < v.size(); ++i) {
    for (std::size_t j = i + 1; j < v.size(); ++j) {
      double d = 0.0;
      for (int t = 0; t < 5; ++t) {
        const double diff = double(v[i].values[t]) - v[j].values[t];
        d += diff * diff;
      }
      const double dp = std::hypot(proj.points[i].x - proj.points[j].x, proj.points[i].y - proj.points[j].y);
      EXPECT_NEAR(std::sqrt(d), dp, 1e-6);
    }
  }
}

TEST(Projection, IdenticalPointsAreDegenerate) {
  std::vector<EmbeddingVector> same(5, EmbeddingVector({0.3f, 0.4f, 0.5f}));
  const auto proj = project_2d(same, std::vector<std::size_t>(5, 2));
  EXPECT_TRUE(proj.degenerate);
  for (const auto& p : proj.points) {
    EXPECT_EQ(p.x, 0.0);
    EXPECT_EQ(p.y, 0.0);
    EXPECT_EQ(p.cluster, 2u);
  }
  // Collinear data has rank one.
  const auto line = pts({{0.0f, 0.0f}, {1.0f, 1.0f}, {2.0f, 2.0f}, {5.0f, 5.0f}});
  EXPECT_TRUE(project_2d(line, std::vector<std::size_t>(4, 0)).degenerate);
}

TEST(Projection, SeparatesBlobs) {
  const auto b = oracle::gaussian_blobs(12, 3, 50, 16, 0.05, 2.0);
  const auto m = kmeans(b.points, 3, 1);
  const auto proj = project_2d(b.points, m);
  std::vector<std::vector<std::pair<double, double>>> by(3);
  for (const auto& p : proj.points) by[p.cluster].emplace_back(p.x, p.y);
  double intra = 0.0, inter = 0.0;
  for (int c = 0; c < 3; ++c) intra += oracle::mean_pairwise(by[c], by[c], true) / 3.0;
  inter = (oracle::mean_pairwise(by[0], by[1], false) + oracle::mean_pairwise(by[0], by[2], false) +
           oracle::mean_pairwise(by[1], by[2], false)) / 3.0;
  EXPECT_LT(intra, inter);
}

TEST(Projection, Errors) {
  const auto two = pts({{0.0f}, {1.0f}});
  try {
    (void)project_2d(two, std::vector<std::size_t>(2, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::TooFewPoints);
  }
  const auto three = pts({{0.0f}, {1.0f}, {2.0f}});
  try {
    (void)project_2d(three, std::vector<std::size_t>(2, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LengthMismatch);
  }
}

TEST(Csv, Headers) {
  std::ostringstream a, b;
  write_projection_csv(a, Projection{{{0.5, -1.0, 2}}, false});
  EXPECT_EQ(a.str(), "x,y,cluster\n0.5,-1,2\n");
  write_elbow_csv(b, {{1, 10.0}, {2, 2.5}});
  EXPECT_EQ(b.str(), "k,wcss\n1,10\n2,2.5\n");
}
