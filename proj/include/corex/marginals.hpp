#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "corex/dataset.hpp"

namespace corex {

/// Laplace pseudo-count added to every discrete count.
inline constexpr double kDefaultSmoothing = 1e-3;

/// Per-sample distributions over one factor's states, N rows of `states` entries.
struct FactorLabels {
  std::size_t states = 2;
  std::vector<double> probs;

  FactorLabels() = default;
  FactorLabels(std::size_t samples, std::size_t k) : states(k), probs(samples * k, 1.0 / static_cast<double>(k)) {}

  std::size_t samples() const noexcept { return states ? probs.size() / states : 0; }
  std::span<const double> row(std::size_t l) const { return {probs.data() + l * states, states}; }
  std::span<double> row(std::size_t l) { return {probs.data() + l * states, states}; }
};

/// p(y_j).
struct FactorPrior {
  std::vector<double> probs;
};

/// p(y_j | x_i = v) for every level v, flat as [v * states + y].
struct DiscreteMarginal {
  std::size_t levels = 0;
  std::size_t states = 0;
  std::vector<double> table;
  std::vector<double> counts;  // non-missing samples observed at each level

  double at(std::size_t v, std::size_t y) const { return table[v * states + y]; }
  std::span<const double> row(std::size_t v) const { return {table.data() + v * states, states}; }
};

/// X_i | Y_j = k ~ N(mu[k], sigma[k]); pooled_* describe the column ignoring labels.
struct GaussianMarginal {
  std::vector<double> mu;
  std::vector<double> sigma;
  double pooled_mu = 0.0;
  double pooled_sigma = 1.0;
};

using ColumnMarginal = std::variant<DiscreteMarginal, GaussianMarginal>;

/// All marginals of one layer: priors[j] and columns[j][i].
struct MarginalSet {
  std::vector<FactorPrior> priors;
  std::vector<std::vector<ColumnMarginal>> columns;
};

/// Label mean over samples, smoothed like the discrete tables.
FactorPrior estimate_prior(const FactorLabels& labels, double smoothing = kDefaultSmoothing);

/// p(y|x_i=v) = (smoothing/K + sum_{l: x_i=v} p(y|x^l)) / (smoothing + count(v)).
/// Levels never observed fall back to the prior. Missing cells are skipped.
DiscreteMarginal estimate_discrete(const DataMatrix& data, std::size_t col, const FactorLabels& labels,
                                   const FactorPrior& prior, double smoothing = kDefaultSmoothing);

/// Label-weighted mean and standard deviation per state.
GaussianMarginal estimate_gaussian(const DataMatrix& data, std::size_t col, const FactorLabels& labels);

double sigma_floor(double pooled_sigma) noexcept;

/// log(p(y|x_i)/p(y)) for each state, written to `out`. Missing values give zeros.
/// Gaussian columns use log N(x; mu_k, sigma_k) - log sum_k' p(k') N(x; mu_k', sigma_k').
void log_ratio(const ColumnMarginal& marginal, const FactorPrior& prior, double x, bool missing,
               std::span<double> out);

std::vector<double> log_ratio(const ColumnMarginal& marginal, const FactorPrior& prior, double x,
                              bool missing = false);

/// log_ratio with per-(column, factor) constants hoisted out of the per-sample loop.
class RatioEvaluator {
 public:
  RatioEvaluator(const ColumnMarginal& marginal, const FactorPrior& prior);
  std::size_t states() const noexcept { return states_; }
  void operator()(double x, bool missing, std::span<double> out) const;

 private:
  std::size_t states_;
  bool discrete_;
  std::vector<double> table_;     // discrete: log ratio per [level * states + y]
  std::vector<double> mu_;        // gaussian parameters
  std::vector<double> inv_sigma_;
  std::vector<double> log_joint_norm_;  // log p(y) - log sigma_y - log sqrt(2 pi)
  std::vector<double> log_prior_;
};

/// Fits the marginal kind matching the column's schema.
ColumnMarginal estimate_column(const DataMatrix& data, std::size_t col, const FactorLabels& labels,
                               const FactorPrior& prior, double smoothing = kDefaultSmoothing);

}  // namespace corex
