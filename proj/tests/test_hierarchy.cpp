#include "corex/hierarchy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "corex/common.hpp"
#include "corex/info_oracle.hpp"
#include "test_support.hpp"

namespace corex {
namespace {

using testing::empirical_joint;

DataMatrix independent_bits(std::size_t n, std::size_t N, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(0.5);
  std::vector<std::vector<int>> rows(N, std::vector<int>(n));
  for (auto& r : rows) {
    for (int& v : r) v = bit(rng);
  }
  return DataMatrix::from_discrete_rows(rows, 2);
}

SyntheticData blocks(BlockDependency dep, std::uint64_t seed) {
  SyntheticSpec spec;
  spec.generator = BlockGaussianSpec{4, 100, 0.1, dep};
  spec.seed = seed;
  spec.samples = 100;
  return generate(spec);
}

LayerConfig base(std::uint64_t seed) {
  LayerConfig c;
  c.seed = seed;
  return c;
}

TEST(LiftLabels, ArgmaxWithTiesToLowest) {
  FactorLabels a(3, 2), b(3, 3);
  a.probs = {0.5, 0.5, 0.2, 0.8, 1.0, 0.0};
  b.probs = {0.2, 0.4, 0.4, 0.1, 0.1, 0.8, 1.0, 0.0, 0.0};
  const DataMatrix d = lift_labels({a, b});
  ASSERT_EQ(d.cols(), 2u);
  EXPECT_EQ(d.column_schema(0).name, "y0");
  EXPECT_EQ(d.column_schema(1).cardinality, 3u);
  EXPECT_EQ(d.level(0, 0), 0u);
  EXPECT_EQ(d.level(1, 0), 1u);
  EXPECT_EQ(d.level(0, 1), 1u);
  EXPECT_EQ(d.level(1, 1), 2u);
  EXPECT_EQ(d.level(2, 1), 0u);
}

TEST(LiftLabels, IdempotentOnHardLabels) {
  FactorLabels a(4, 2);
  a.probs = {1, 0, 0, 1, 0, 1, 1, 0};
  const DataMatrix once = lift_labels({a});
  FactorLabels again(4, 2);
  for (std::size_t l = 0; l < 4; ++l) {
    again.row(l)[0] = once.level(l, 0) == 0 ? 1.0 : 0.0;
    again.row(l)[1] = 1.0 - again.row(l)[0];
  }
  EXPECT_EQ(again.probs, a.probs);
  const DataMatrix twice = lift_labels({again});
  for (std::size_t l = 0; l < 4; ++l) EXPECT_EQ(twice.level(l, 0), once.level(l, 0));
}

TEST(LiftLabels, BlockLayerMatchesDrivers) {
  const SyntheticData s = blocks(BlockDependency::independent, 7);
  LayerConfig c = base(1);
  c.m = 4;
  const LayerModel layer = fit_layer(s.data, c);
  const DataMatrix lifted = lift_labels(layer);
  for (std::size_t j = 0; j < 4; ++j) {
    std::size_t best = 0;
    for (std::size_t z = 0; z < 4; ++z) {
      std::size_t agree = 0;
      for (std::size_t l = 0; l < 100; ++l) agree += lifted.level(l, j) == s.truth.latent_values[z][l];
      best = std::max({best, agree, 100 - agree});
    }
    EXPECT_EQ(best, 100u) << "factor " << j;
  }
}

TEST(FitHierarchy, IndependentDataStopsAfterOneLayer) {
  const DataMatrix d = independent_bits(8, 5000, 3);
  // structureless layers approach zero from below; converge tightly so the residual is below 1e-9
  LayerConfig c = base(4);
  c.tol = 1e-9;
  c.max_iter = 5000;
  const HierarchyModel h = fit_hierarchy(d, HierarchyConfig::uniform({2, 1}, c));
  ASSERT_EQ(h.layers.size(), 1u);
  EXPECT_LT(h.layer_contributions[0], kDefaultStopThreshold);
  EXPECT_GE(h.layer_contributions[0], -1e-9);
}

TEST(FitHierarchy, IndependentDriversGiveEmptySecondLayer) {
  const SyntheticData s = blocks(BlockDependency::independent, 7);
  const HierarchyModel h = fit_hierarchy(s.data, HierarchyConfig::uniform({4, 1}, base(1)));
  ASSERT_EQ(h.layers.size(), 2u);
  EXPECT_NEAR(h.layer_contributions[1], 0.0, 0.05);
  EXPECT_NEAR(h.lower_bound, h.layers[0].objective(), 0.05);
  EXPECT_NEAR(h.lower_bound, h.layer_contributions[0] + h.layer_contributions[1], 1e-12);
}

TEST(FitHierarchy, OverlapFactorsStayIndependent) {
  // Z_3 = Z_0 + Z_1 is explained by the factors for Z_0 and Z_1, which remain
  // independent of each other and of Z_2
  const SyntheticData s = blocks(BlockDependency::summed_overlap, 3);
  LayerConfig c = base(1);
  c.alpha_policy = AlphaPolicy::unique;
  c.restarts = 10;
  HierarchyConfig cfg = HierarchyConfig::uniform({3, 1}, c);
  cfg.stop_threshold = -1.0;
  const HierarchyModel h = fit_hierarchy(s.data, cfg);
  ASSERT_EQ(h.layers.size(), 2u);
  EXPECT_GT(h.layer_contributions[0], 200.0);
  EXPECT_GE(h.layer_contributions[1], -1e-6);
  EXPECT_LT(h.layer_contributions[1], 0.05);
}

TEST(FitHierarchy, LayerSeedsAndThreshold) {
  const HierarchyConfig cfg = HierarchyConfig::uniform({3, 2, 1}, base(10));
  ASSERT_EQ(cfg.layers.size(), 3u);
  EXPECT_EQ(cfg.layers[2].seed, 12u);
  EXPECT_EQ(cfg.layers[1].m, 2u);
  HierarchyConfig bad = cfg;
  bad.stop_threshold = std::nan("");
  EXPECT_THROW(fit_hierarchy(independent_bits(3, 10, 1), bad), ArgumentError);
  EXPECT_THROW(fit_hierarchy(independent_bits(3, 10, 1), HierarchyConfig{}), ArgumentError);
}

TEST(FitHierarchy, AddingLayersNeverLowersTheBound) {
  std::mt19937_64 rng(5);
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = 4 + inst % 3;
    const DataMatrix d = testing::enumerated_binary_rows(n, testing::random_counts(n, rng));
    LayerConfig c = base(inst);
    c.tol = 1e-9;
    c.max_iter = 5000;
    HierarchyConfig cfg = HierarchyConfig::uniform({3, 2, 1}, c);
    cfg.stop_threshold = -1.0;
    const HierarchyModel h = fit_hierarchy(d, cfg);
    ASSERT_EQ(h.layers.size(), 3u);
    for (double c : h.layer_contributions) EXPECT_GE(c, -1e-9) << "instance " << inst;
  }
}

TEST(UpperBound, SandwichOnExhaustiveInstances) {
  std::mt19937_64 rng(8);
  for (int inst = 0; inst < 20; ++inst) {
    const std::size_t n = 3 + inst % 4;
    const DataMatrix d = testing::enumerated_binary_rows(n, testing::random_counts(n, rng));
    const std::vector<std::size_t> sizes = inst % 2 ? std::vector<std::size_t>{1} : std::vector<std::size_t>{2, 1};
    HierarchyConfig cfg = HierarchyConfig::uniform(sizes, base(inst));
    cfg.stop_threshold = -1.0;
    const HierarchyModel h = fit_hierarchy(d, cfg);
    const double tc = oracle::total_correlation(empirical_joint(d));
    const double up = upper_bound(h, d);
    EXPECT_LE(h.lower_bound, tc + 1e-6) << "instance " << inst;
    EXPECT_GE(up, tc - 1e-6) << "instance " << inst;

    double h_x = 0.0;
    for (std::size_t i = 0; i < n; ++i) h_x += column_entropy(d, i);
    const EntropyBounds eb = entropy_bounds(h, d);
    const double joint_h = oracle::entropy(empirical_joint(d), testing::range_set(0, n));
    EXPECT_NEAR(eb.h_upper, h_x - h.lower_bound, 1e-12);
    ASSERT_TRUE(eb.h_lower.has_value());
    EXPECT_LE(*eb.h_lower, joint_h + 1e-6);
    EXPECT_GE(eb.h_upper, joint_h - 1e-6);
  }
}

TEST(UpperBound, TightOnCopies) {
  std::mt19937_64 rng(1);
  std::bernoulli_distribution bit(0.5);
  std::vector<std::vector<int>> rows;
  for (int l = 0; l < 400; ++l) rows.push_back(std::vector<int>(5, bit(rng)));
  const DataMatrix d = DataMatrix::from_discrete_rows(rows, 2);
  const HierarchyModel h = fit_hierarchy(d, HierarchyConfig::uniform({1}, base(2)));
  const double up = upper_bound(h, d);
  EXPECT_NEAR(up, h.lower_bound, 0.01);
  EXPECT_NEAR(h.lower_bound, oracle::total_correlation(empirical_joint(d)), 0.01);
}

TEST(UpperBound, IndependentDataIsConditionalEntropies) {
  const DataMatrix d = independent_bits(4, 2000, 9);
  const HierarchyModel h = fit_hierarchy(d, HierarchyConfig::uniform({1}, base(3)));
  const double up = upper_bound(h, d);
  double sum = 0.0;
  const DataMatrix hard = lift_labels(h.layers[0]);
  FactorLabels one_hot(d.rows(), 2);
  for (std::size_t l = 0; l < d.rows(); ++l) {
    one_hot.row(l)[0] = hard.level(l, 0) == 0 ? 1.0 : 0.0;
    one_hot.row(l)[1] = 1.0 - one_hot.row(l)[0];
  }
  for (double v : conditional_entropies(d, {one_hot})) sum += v;
  EXPECT_NEAR(up, h.lower_bound + sum, 1e-12);
  EXPECT_NEAR(h.lower_bound, 0.0, 0.01);
  EXPECT_GE(up, 0.0);
}

TEST(UpperBound, UnsupportedConfigurations) {
  const SyntheticData s = blocks(BlockDependency::independent, 7);
  LayerConfig c = base(1);
  c.max_iter = 3;
  const HierarchyModel cont = fit_hierarchy(s.data, HierarchyConfig::uniform({1}, c));
  EXPECT_THROW(upper_bound(cont, s.data), UnsupportedConfiguration);

  const DataMatrix d = DataMatrix::from_discrete_rows({{0, 0}, {1, 1}, {0, 0}, {1, 1}}, 2);
  HierarchyConfig cfg = HierarchyConfig::uniform({2}, c);
  cfg.stop_threshold = -1.0;
  const HierarchyModel two = fit_hierarchy(d, cfg);
  EXPECT_THROW(upper_bound(two, d), UnsupportedConfiguration);
  EXPECT_FALSE(entropy_bounds(two, d).h_lower.has_value());
}

TEST(EntropyBounds, IndependentBitsAndCopies) {
  const DataMatrix ind = independent_bits(5, 4000, 4);
  const HierarchyModel h = fit_hierarchy(ind, HierarchyConfig::uniform({1}, base(1)));
  EXPECT_NEAR(entropy_bounds(h, ind).h_upper, 5 * std::log(2.0), 0.01);

  const DataMatrix copy = DataMatrix::from_discrete_rows({{0, 0}, {1, 1}, {0, 0}, {1, 1}}, 2);
  const HierarchyModel hc = fit_hierarchy(copy, HierarchyConfig::uniform({1}, base(1)));
  const EntropyBounds eb = entropy_bounds(hc, copy);
  EXPECT_NEAR(eb.h_upper, std::log(2.0), 0.01);
  ASSERT_TRUE(eb.h_lower.has_value());
  EXPECT_NEAR(*eb.h_lower, std::log(2.0), 0.01);
}

TEST(ConditionalEntropies, MatchOracleWithoutSmoothing) {
  std::mt19937_64 rng(13);
  const DataMatrix d = testing::enumerated_binary_rows(3, testing::random_counts(3, rng));
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::vector<FactorLabels> labels(2, FactorLabels(d.rows(), 2));
  // labels must be a function of x for the oracle joint
  std::vector<double> p0(8);
  for (auto& v : p0) v = u(rng);
  for (std::size_t j = 0; j < 2; ++j) {
    for (std::size_t l = 0; l < d.rows(); ++l) {
      const std::size_t s = d.level(l, 0) * 4 + d.level(l, 1) * 2 + d.level(l, 2);
      const double p = j == 0 ? p0[s] : 1.0 - p0[7 - s];
      labels[j].row(l)[0] = p;
      labels[j].row(l)[1] = 1.0 - p;
    }
  }
  const auto got = conditional_entropies(d, labels, 0.0);
  const oracle::JointTable joint = testing::joint_with_labels(d, labels);
  for (std::size_t i = 0; i < 3; ++i) {
    const double want = oracle::entropy(joint, {i, 3, 4}) - oracle::entropy(joint, {3, 4});
    EXPECT_NEAR(got[i], want, 1e-9);
  }
}

TEST(Transform, HierarchyChainsLayers) {
  const SyntheticData s = blocks(BlockDependency::independent, 7);
  const HierarchyModel h = fit_hierarchy(s.data, HierarchyConfig::uniform({4, 1}, base(1)));
  const auto out = transform_hierarchy(h, s.data);
  ASSERT_EQ(out.size(), 2u);
  for (std::size_t k = 0; k < 2; ++k) {
    for (std::size_t j = 0; j < h.layers[k].factors(); ++j) {
      EXPECT_EQ(out[k].labels[j].probs, h.layers[k].labels[j].probs);
    }
  }
}

}  // namespace
}  // namespace corex
