#include "corex/marginals.hpp"

#include <cmath>
#include <numbers>

#include "corex/common.hpp"

namespace corex {
namespace {

constexpr double kTiny = 1e-300;
constexpr double kMinWeight = 1e-12;

void check_labels(const DataMatrix& data, const FactorLabels& labels) {
  if (labels.samples() != data.rows()) throw ArgumentError("labels and data disagree on sample count");
}

}  // namespace

FactorPrior estimate_prior(const FactorLabels& labels, double smoothing) {
  const std::size_t k = labels.states;
  std::vector<CompensatedSum> sums(k);
  for (std::size_t l = 0; l < labels.samples(); ++l) {
    const auto r = labels.row(l);
    for (std::size_t y = 0; y < k; ++y) sums[y].add(r[y]);
  }
  FactorPrior prior;
  prior.probs.resize(k);
  const double denom = smoothing + static_cast<double>(labels.samples());
  for (std::size_t y = 0; y < k; ++y) {
    prior.probs[y] = (smoothing / static_cast<double>(k) + sums[y].value()) / denom;
  }
  return prior;
}

DiscreteMarginal estimate_discrete(const DataMatrix& data, std::size_t col, const FactorLabels& labels,
                                   const FactorPrior& prior, double smoothing) {
  check_labels(data, labels);
  const ColumnSchema& schema = data.column_schema(col);
  if (!schema.is_discrete()) throw ArgumentError("estimate_discrete on a continuous column");
  const std::size_t k = labels.states;
  DiscreteMarginal m;
  m.levels = schema.cardinality;
  m.states = k;
  m.table.assign(m.levels * k, 0.0);
  m.counts.assign(m.levels, 0.0);
  for (std::size_t l = 0; l < data.rows(); ++l) {
    if (data.is_missing(l, col)) continue;
    const std::size_t v = data.level(l, col);
    m.counts[v] += 1.0;
    const auto r = labels.row(l);
    for (std::size_t y = 0; y < k; ++y) m.table[v * k + y] += r[y];
  }
  for (std::size_t v = 0; v < m.levels; ++v) {
    const double denom = smoothing + m.counts[v];
    for (std::size_t y = 0; y < k; ++y) {
      double& cell = m.table[v * k + y];
      cell = m.counts[v] > 0.0 ? (smoothing / static_cast<double>(k) + cell) / denom : prior.probs[y];
    }
  }
  return m;
}

double sigma_floor(double pooled_sigma) noexcept { return 1e-6 * std::max(1.0, pooled_sigma); }

GaussianMarginal estimate_gaussian(const DataMatrix& data, std::size_t col, const FactorLabels& labels) {
  check_labels(data, labels);
  if (data.column_schema(col).is_discrete()) throw ArgumentError("estimate_gaussian on a discrete column");
  const std::size_t k = labels.states;
  const auto x = data.column(col);

  CompensatedSum sx;
  double present = 0.0;
  for (std::size_t l = 0; l < data.rows(); ++l) {
    if (data.is_missing(l, col)) continue;
    sx.add(x[l]);
    present += 1.0;
  }
  GaussianMarginal g;
  g.pooled_mu = present > 0.0 ? sx.value() / present : 0.0;
  CompensatedSum sv;
  for (std::size_t l = 0; l < data.rows(); ++l) {
    if (data.is_missing(l, col)) continue;
    const double d = x[l] - g.pooled_mu;
    sv.add(d * d);
  }
  const double raw_pooled = present > 0.0 ? std::sqrt(sv.value() / present) : 0.0;
  const double floor = sigma_floor(raw_pooled);
  g.pooled_sigma = std::max(raw_pooled, floor);

  g.mu.assign(k, g.pooled_mu);
  g.sigma.assign(k, g.pooled_sigma);
  for (std::size_t y = 0; y < k; ++y) {
    CompensatedSum w, wx;
    for (std::size_t l = 0; l < data.rows(); ++l) {
      if (data.is_missing(l, col)) continue;
      const double p = labels.row(l)[y];
      w.add(p);
      wx.add(p * x[l]);
    }
    if (w.value() < kMinWeight) continue;
    const double mu = wx.value() / w.value();
    CompensatedSum wv;
    for (std::size_t l = 0; l < data.rows(); ++l) {
      if (data.is_missing(l, col)) continue;
      const double d = x[l] - mu;
      wv.add(labels.row(l)[y] * d * d);
    }
    g.mu[y] = mu;
    g.sigma[y] = std::max(std::sqrt(std::max(0.0, wv.value() / w.value())), floor);
  }
  return g;
}

RatioEvaluator::RatioEvaluator(const ColumnMarginal& marginal, const FactorPrior& prior)
    : states_(prior.probs.size()), discrete_(std::holds_alternative<DiscreteMarginal>(marginal)) {
  log_prior_.resize(states_);
  for (std::size_t y = 0; y < states_; ++y) log_prior_[y] = std::log(std::max(prior.probs[y], kTiny));
  if (discrete_) {
    const auto& d = std::get<DiscreteMarginal>(marginal);
    if (d.states != states_) throw ArgumentError("marginal and prior disagree on state count");
    table_.resize(d.levels * states_);
    for (std::size_t v = 0; v < d.levels; ++v) {
      for (std::size_t y = 0; y < states_; ++y) {
        table_[v * states_ + y] = std::log(std::max(d.at(v, y), kTiny)) - log_prior_[y];
      }
    }
    return;
  }
  const auto& g = std::get<GaussianMarginal>(marginal);
  if (g.mu.size() != states_ || g.sigma.size() != states_) {
    throw ArgumentError("marginal and prior disagree on state count");
  }
  mu_ = g.mu;
  inv_sigma_.resize(states_);
  log_joint_norm_.resize(states_);
  for (std::size_t y = 0; y < states_; ++y) {
    inv_sigma_[y] = 1.0 / g.sigma[y];
    log_joint_norm_[y] = log_prior_[y] - std::log(g.sigma[y]) - 0.5 * std::log(2.0 * std::numbers::pi);
  }
}

void RatioEvaluator::operator()(double x, bool missing, std::span<double> out) const {
  if (missing) {
    for (std::size_t y = 0; y < states_; ++y) out[y] = 0.0;
    return;
  }
  if (discrete_) {
    const double* row = table_.data() + static_cast<std::size_t>(x) * states_;
    for (std::size_t y = 0; y < states_; ++y) out[y] = row[y];
    return;
  }
  // out holds log p(y) + log p(x|y) until the mixture normalizer is known
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t y = 0; y < states_; ++y) {
    const double z = (x - mu_[y]) * inv_sigma_[y];
    out[y] = log_joint_norm_[y] - 0.5 * z * z;
    hi = std::max(hi, out[y]);
  }
  double s = 0.0;
  for (std::size_t y = 0; y < states_; ++y) s += std::exp(out[y] - hi);
  const double log_px = hi + std::log(s);
  for (std::size_t y = 0; y < states_; ++y) out[y] -= log_prior_[y] + log_px;
}

void log_ratio(const ColumnMarginal& marginal, const FactorPrior& prior, double x, bool missing,
               std::span<double> out) {
  RatioEvaluator(marginal, prior)(x, missing, out);
}

std::vector<double> log_ratio(const ColumnMarginal& marginal, const FactorPrior& prior, double x, bool missing) {
  std::vector<double> out(prior.probs.size());
  log_ratio(marginal, prior, x, missing, out);
  return out;
}

ColumnMarginal estimate_column(const DataMatrix& data, std::size_t col, const FactorLabels& labels,
                               const FactorPrior& prior, double smoothing) {
  if (data.column_schema(col).is_discrete()) return estimate_discrete(data, col, labels, prior, smoothing);
  return estimate_gaussian(data, col, labels);
}

}  // namespace corex
