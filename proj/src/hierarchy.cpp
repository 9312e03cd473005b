#include "corex/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_map>
#include <utility>

#include "corex/common.hpp"
#include "corex/parallel.hpp"

namespace corex {
namespace {

// joint label states below this weight are dropped when expanding a sample's
// product distribution over all factors
constexpr double kJointPrune = 1e-14;

struct SparseJoint {
  std::size_t slots = 0;
  // per sample, (slot, weight) pairs
  std::vector<std::vector<std::pair<std::size_t, double>>> rows;
};

SparseJoint expand_joint(const std::vector<FactorLabels>& labels) {
  SparseJoint joint;
  const std::size_t N = labels.front().samples();
  joint.rows.resize(N);
  std::unordered_map<std::string, std::size_t> slot_of;
  std::vector<std::pair<std::string, double>> frontier;
  std::vector<std::pair<std::string, double>> next;
  for (std::size_t l = 0; l < N; ++l) {
    frontier.assign(1, {std::string(), 1.0});
    for (const FactorLabels& lab : labels) {
      next.clear();
      const auto row = lab.row(l);
      for (const auto& [key, w] : frontier) {
        for (std::size_t y = 0; y < row.size(); ++y) {
          const double p = w * row[y];
          if (p < kJointPrune) continue;
          std::string k = key;
          k.push_back(static_cast<char>(y));
          next.emplace_back(std::move(k), p);
        }
      }
      frontier.swap(next);
    }
    auto& out = joint.rows[l];
    for (auto& [key, w] : frontier) {
      auto [it, inserted] = slot_of.try_emplace(std::move(key), slot_of.size());
      out.emplace_back(it->second, w);
    }
  }
  joint.slots = slot_of.size();
  return joint;
}

std::vector<FactorLabels> one_hot(const DataMatrix& hard) {
  std::vector<FactorLabels> out;
  for (std::size_t j = 0; j < hard.cols(); ++j) {
    FactorLabels lab(hard.rows(), hard.column_schema(j).cardinality);
    std::fill(lab.probs.begin(), lab.probs.end(), 0.0);
    for (std::size_t l = 0; l < hard.rows(); ++l) lab.row(l)[hard.level(l, j)] = 1.0;
    out.push_back(std::move(lab));
  }
  return out;
}

void require_discrete(const DataMatrix& data, const char* what) {
  if (!data.all_discrete()) {
    throw UnsupportedConfiguration(std::string(what) + " requires all columns to be discrete");
  }
}

}  // namespace

HierarchyConfig HierarchyConfig::uniform(const std::vector<std::size_t>& sizes, const LayerConfig& base) {
  HierarchyConfig config;
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    LayerConfig layer = base;
    layer.m = sizes[k];
    layer.seed = base.seed + k;
    config.layers.push_back(layer);
  }
  return config;
}

DataMatrix lift_labels(const std::vector<FactorLabels>& labels) {
  if (labels.empty()) throw ArgumentError("no labels to lift");
  const std::size_t N = labels.front().samples();
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<double>> columns;
  for (std::size_t j = 0; j < labels.size(); ++j) {
    const FactorLabels& lab = labels[j];
    schema.push_back(ColumnSchema::discrete("y" + std::to_string(j), lab.states));
    std::vector<double> col(N);
    for (std::size_t l = 0; l < N; ++l) col[l] = static_cast<double>(argmax(lab.row(l)));
    columns.push_back(std::move(col));
  }
  return DataMatrix(std::move(schema), std::move(columns));
}

DataMatrix lift_labels(const LayerModel& layer) { return lift_labels(layer.labels); }

std::vector<LabelUpdate> transform_hierarchy(const HierarchyModel& hier, const DataMatrix& data) {
  std::vector<LabelUpdate> out;
  std::optional<DataMatrix> lifted;
  for (const LayerModel& layer : hier.layers) {
    out.push_back(transform(layer, lifted ? *lifted : data));
    lifted = lift_labels(out.back().labels);
  }
  return out;
}

HierarchyModel fit_hierarchy(const DataMatrix& data, const HierarchyConfig& config) {
  if (config.layers.empty()) throw ArgumentError("a hierarchy needs at least one layer");
  if (std::isnan(config.stop_threshold)) throw ArgumentError("stop_threshold must be a number");
  HierarchyModel hier;
  std::optional<DataMatrix> lifted;
  for (const LayerConfig& layer_config : config.layers) {
    const DataMatrix& input = lifted ? *lifted : data;
    LayerModel layer = fit_layer(input, layer_config);
    const double contribution = layer.objective();
    hier.layer_contributions.push_back(contribution);
    lifted = lift_labels(layer);
    hier.layers.push_back(std::move(layer));
    if (contribution < config.stop_threshold) break;
  }
  hier.lower_bound = compensated_sum(hier.layer_contributions);
  return hier;
}

std::vector<double> conditional_entropies(const DataMatrix& inputs, const std::vector<FactorLabels>& labels,
                                          double smoothing) {
  require_discrete(inputs, "conditional entropy");
  if (labels.empty() || labels.front().samples() != inputs.rows()) {
    throw ArgumentError("labels do not match the input rows");
  }
  const SparseJoint joint = expand_joint(labels);
  std::vector<double> out(inputs.cols(), 0.0);
  parallel_for(inputs.cols(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t levels = inputs.column_schema(i).cardinality;
      std::vector<double> counts(joint.slots * levels, 0.0);
      std::vector<double> totals(joint.slots, 0.0);
      double present = 0.0;
      for (std::size_t l = 0; l < inputs.rows(); ++l) {
        if (inputs.is_missing(l, i)) continue;
        present += 1.0;
        const std::size_t v = inputs.level(l, i);
        for (const auto& [slot, w] : joint.rows[l]) {
          counts[slot * levels + v] += w;
          totals[slot] += w;
        }
      }
      if (present == 0.0) continue;
      CompensatedSum h;
      for (std::size_t s = 0; s < joint.slots; ++s) {
        if (totals[s] == 0.0) continue;
        const double denom = smoothing + totals[s];
        double hs = 0.0;
        for (std::size_t v = 0; v < levels; ++v) {
          hs -= xlogx((smoothing / static_cast<double>(levels) + counts[s * levels + v]) / denom);
        }
        h.add(totals[s] / present * hs);
      }
      out[i] = h.value();
    }
  });
  return out;
}

double upper_bound(const HierarchyModel& hier, const DataMatrix& data) {
  if (hier.layers.empty()) throw ArgumentError("empty hierarchy");
  require_discrete(data, "the upper bound");
  if (hier.layers.back().factors() != 1) {
    throw UnsupportedConfiguration("the upper bound requires a single factor in the top layer");
  }
  if (data.rows() != hier.layers.front().samples()) {
    throw ArgumentError("the upper bound needs the training data of the hierarchy");
  }
  CompensatedSum total;
  std::optional<DataMatrix> lifted;
  for (std::size_t k = 0; k < hier.layers.size(); ++k) {
    const LayerModel& layer = hier.layers[k];
    const DataMatrix& input = lifted ? *lifted : data;
    total.add(hier.layer_contributions[k]);
    DataMatrix hard = lift_labels(layer);
    for (double h : conditional_entropies(input, one_hot(hard))) total.add(h);
    lifted = std::move(hard);
  }
  return total.value();
}

double column_entropy(const DataMatrix& data, std::size_t col) {
  const ColumnSchema& s = data.column_schema(col);
  if (!s.is_discrete()) throw UnsupportedConfiguration("entropy of a continuous column is not supported");
  std::vector<double> counts(s.cardinality, 0.0);
  double present = 0.0;
  for (std::size_t l = 0; l < data.rows(); ++l) {
    if (data.is_missing(l, col)) continue;
    counts[data.level(l, col)] += 1.0;
    present += 1.0;
  }
  if (present == 0.0) return 0.0;
  for (double& c : counts) c /= present;
  return entropy_of(counts);
}

EntropyBounds entropy_bounds(const HierarchyModel& hier, const DataMatrix& data) {
  require_discrete(data, "entropy bounds");
  CompensatedSum marginal;
  for (std::size_t i = 0; i < data.cols(); ++i) marginal.add(column_entropy(data, i));
  EntropyBounds out;
  out.h_upper = marginal.value() - hier.lower_bound;
  if (hier.upper_bound) {
    out.h_lower = marginal.value() - *hier.upper_bound;
  } else if (hier.layers.back().factors() == 1) {
    out.h_lower = marginal.value() - upper_bound(hier, data);
  }
  return out;
}

}  // namespace corex
