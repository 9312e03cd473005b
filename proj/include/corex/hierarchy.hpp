#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "corex/dataset.hpp"
#include "corex/layer_solver.hpp"

namespace corex {

inline constexpr double kDefaultStopThreshold = 0.01;

struct HierarchyConfig {
  /// One entry per layer, bottom first.
  std::vector<LayerConfig> layers;
  double stop_threshold = kDefaultStopThreshold;

  /// Layers of the given sizes sharing `base`; layer k is seeded with base.seed + k.
  static HierarchyConfig uniform(const std::vector<std::size_t>& sizes, const LayerConfig& base);
};

struct HierarchyModel {
  std::vector<LayerModel> layers;
  std::vector<double> layer_contributions;
  double lower_bound = 0.0;
  std::optional<double> upper_bound;
};

/// Hard maximum-likelihood labels as a discrete matrix with columns y0..y{m-1};
/// ties go to the lowest state.
DataMatrix lift_labels(const std::vector<FactorLabels>& labels);
DataMatrix lift_labels(const LayerModel& layer);

/// Label passes through every layer, each fed the hard labels of the one below.
std::vector<LabelUpdate> transform_hierarchy(const HierarchyModel& hier, const DataMatrix& data);

HierarchyModel fit_hierarchy(const DataMatrix& data, const HierarchyConfig& config);

/// Upper bound on TC(X): sum over layers of the layer contribution plus
/// sum_i H(Y_i^{k-1} | Y^k), plug-in over each input column and the layer's hard
/// labels. Needs discrete data and a single factor in the top layer; throws
/// UnsupportedConfiguration otherwise.
double upper_bound(const HierarchyModel& hier, const DataMatrix& data);

/// H(X_i | Y) for each column, from the joint of the column and the given labels
/// (soft or one-hot), with the marginal smoothing applied to p(x_i | y).
std::vector<double> conditional_entropies(const DataMatrix& inputs, const std::vector<FactorLabels>& labels,
                                          double smoothing = kDefaultSmoothing);

/// Plug-in H(X_i) over non-missing cells.
double column_entropy(const DataMatrix& data, std::size_t col);

struct EntropyBounds {
  double h_upper = 0.0;
  std::optional<double> h_lower;
};

/// H(X) <= sum_i H(X_i) - lower_bound, and >= sum_i H(X_i) - upper_bound when
/// an upper bound is stored or the top layer has a single factor.
EntropyBounds entropy_bounds(const HierarchyModel& hier, const DataMatrix& data);

}  // namespace corex
