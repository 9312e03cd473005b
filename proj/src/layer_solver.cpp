#include "corex/layer_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "corex/common.hpp"
#include "corex/parallel.hpp"

namespace corex {
namespace {

bool adaptive(AlphaPolicy p) { return p != AlphaPolicy::fixed; }

void check_schema(const std::vector<ColumnSchema>& trained, const DataMatrix& data) {
  if (trained.size() != data.cols()) {
    throw ArgumentError("data has " + std::to_string(data.cols()) + " columns, model expects " +
                        std::to_string(trained.size()));
  }
  for (std::size_t i = 0; i < trained.size(); ++i) {
    const ColumnSchema& a = trained[i];
    const ColumnSchema& b = data.column_schema(i);
    if (a.name != b.name || a.kind != b.kind || a.cardinality != b.cardinality) {
      throw ArgumentError("column " + std::to_string(i) + " ('" + b.name + "') does not match the model schema");
    }
  }
}

}  // namespace

void LayerConfig::validate(std::size_t n) const {
  if (m < 1) throw ArgumentError("a layer needs at least one factor");
  if (cardinality < 2) throw ArgumentError("factor cardinality must be at least 2");
  if (max_iter < 1) throw ArgumentError("max_iter must be at least 1");
  if (!(tol > 0.0)) throw ArgumentError("tol must be positive");
  if (restarts < 1) throw ArgumentError("restarts must be at least 1");
  if (alpha_warmup < 1) throw ArgumentError("alpha_warmup must be at least 1");
  if (!(smoothing >= 0.0)) throw ArgumentError("smoothing must be non-negative");
  if (alpha_policy == AlphaPolicy::fixed) {
    if (!fixed_alpha) throw ArgumentError("fixed alpha policy needs an alpha matrix");
    if (fixed_alpha->variables() != n || fixed_alpha->factors() != m) {
      throw ArgumentError("fixed alpha matrix has the wrong shape");
    }
    for (double a : fixed_alpha->values()) {
      if (!(a >= 0.0 && a <= 1.0)) throw ArgumentError("alpha entries must lie in [0, 1]");
    }
  }
}

const char* to_string(StopReason reason) noexcept {
  switch (reason) {
    case StopReason::converged:
      return "converged";
    case StopReason::max_iter:
      return "max_iter";
    case StopReason::alpha_window:
      return "alpha_window";
  }
  return "?";
}

double LayerModel::objective() const {
  CompensatedSum s;
  for (double c : factor_contribution) s.add(c);
  return s.value();
}

std::vector<std::size_t> LayerModel::factor_order() const {
  std::vector<std::size_t> order(factor_contribution.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return factor_contribution[a] > factor_contribution[b]; });
  return order;
}

std::vector<FactorLabels> init_labels(const LayerConfig& config, std::size_t samples, std::size_t restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(config.seed), static_cast<std::uint32_t>(config.seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  std::vector<FactorLabels> labels;
  labels.reserve(config.m);
  for (std::size_t j = 0; j < config.m; ++j) {
    FactorLabels lab(samples, config.cardinality);
    for (std::size_t l = 0; l < samples; ++l) {
      auto row = lab.row(l);
      double total = 0.0;
      for (double& p : row) {
        p = weight(rng);
        total += p;
      }
      for (double& p : row) p /= total;
    }
    labels.push_back(std::move(lab));
  }
  return labels;
}

MarginalSet estimate_marginals(const DataMatrix& data, const std::vector<FactorLabels>& labels, double smoothing) {
  MarginalSet set;
  const std::size_t m = labels.size();
  set.priors.reserve(m);
  for (const auto& lab : labels) set.priors.push_back(estimate_prior(lab, smoothing));
  set.columns.assign(m, std::vector<ColumnMarginal>(data.cols()));
  parallel_for(data.cols(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        set.columns[j][i] = estimate_column(data, i, labels[j], set.priors[j], smoothing);
      }
    }
  });
  return set;
}

LabelUpdate update_labels(const MarginalSet& marginals, const AlphaMatrix& alpha, const DataMatrix& data) {
  const std::size_t m = marginals.priors.size();
  const std::size_t n = data.cols();
  const std::size_t N = data.rows();
  if (alpha.variables() != n || alpha.factors() != m || marginals.columns.size() != m) {
    throw ArgumentError("alpha, marginals and data shapes disagree");
  }

  // evaluators only for the edges that carry weight
  struct Edge {
    std::size_t column;
    double weight;
    RatioEvaluator ratio;
  };
  std::vector<std::vector<Edge>> edges(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (marginals.columns[j].size() != n) throw ArgumentError("marginals and data disagree on column count");
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha(i, j) != 0.0) edges[j].push_back({i, alpha(i, j), RatioEvaluator(marginals.columns[j][i], marginals.priors[j])});
    }
  }

  LabelUpdate out;
  out.labels.reserve(m);
  for (std::size_t j = 0; j < m; ++j) out.labels.emplace_back(N, marginals.priors[j].probs.size());
  out.log_z.assign(m, std::vector<double>(N, 0.0));

  parallel_for(N, [&](std::size_t begin, std::size_t end) {
    std::vector<double> lr;
    std::vector<double> score;
    const std::size_t len = end - begin;
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t k = marginals.priors[j].probs.size();
      lr.resize(k);
      score.assign(len * k, 0.0);
      for (std::size_t l = 0; l < len; ++l) {
        for (std::size_t y = 0; y < k; ++y) score[l * k + y] = std::log(marginals.priors[j].probs[y]);
      }
      for (const Edge& e : edges[j]) {
        const auto x = data.column(e.column);
        for (std::size_t l = 0; l < len; ++l) {
          const std::size_t row = begin + l;
          if (data.is_missing(row, e.column)) continue;
          e.ratio(x[row], false, lr);
          double* s = score.data() + l * k;
          for (std::size_t y = 0; y < k; ++y) s[y] += e.weight * lr[y];
        }
      }
      for (std::size_t l = 0; l < len; ++l) {
        const std::span<const double> s(score.data() + l * k, k);
        const double lz = log_sum_exp(s);
        out.log_z[j][begin + l] = lz;
        auto row = out.labels[j].row(begin + l);
        for (std::size_t y = 0; y < k; ++y) row[y] = std::exp(s[y] - lz);
      }
    }
  });
  return out;
}

Objective objective(const std::vector<std::vector<double>>& log_z) {
  Objective obj;
  CompensatedSum total;
  for (const auto& lz : log_z) {
    const double mean = lz.empty() ? 0.0 : compensated_sum(lz) / static_cast<double>(lz.size());
    obj.per_factor.push_back(mean);
    total.add(mean);
  }
  obj.total = total.value();
  return obj;
}

LayerSolver::LayerSolver(const DataMatrix& data, const LayerConfig& config, std::size_t restart)
    : data_(data), config_(config), restart_(restart) {
  config_.validate(data.cols());
  state_.labels = init_labels(config_, data.rows(), restart);
  alpha_ = config_.alpha_policy == AlphaPolicy::fixed ? *config_.fixed_alpha
                                                      : alpha_initial(data, config_.m, config_.seed, restart);
}

const TraceEntry& LayerSolver::step() {
  marginals_ = estimate_marginals(data_, state_.labels, config_.smoothing);
  if (adaptive(config_.alpha_policy) && policy_start_) {
    if (config_.alpha_policy == AlphaPolicy::tree) {
      alpha_ = alpha_tree(mutual_information_estimates(data_, marginals_, state_.labels));
    } else {
      alpha_ = alpha_unique(data_, marginals_, state_.labels);
    }
  }
  state_ = update_labels(marginals_, alpha_, data_);
  Objective obj = objective(state_.log_z);
  trace_.push_back(TraceEntry{obj.total, std::move(obj.per_factor)});
  check_stop();
  return trace_.back();
}

void LayerSolver::check_stop() {
  const std::size_t t = trace_.size();
  const bool settled = t >= 2 && std::abs(trace_[t - 1].total - trace_[t - 2].total) < config_.tol;
  if (adaptive(config_.alpha_policy) && !policy_start_) {
    // warm-up with the initial structure; the policy takes over from the next iteration
    if (settled || t >= config_.alpha_warmup) policy_start_ = t;
  } else if (settled && (!policy_start_ || t > *policy_start_)) {
    stop_ = StopReason::converged;
  } else if (policy_start_ && t - *policy_start_ > config_.alpha_window) {
    const double before = trace_[t - 1 - config_.alpha_window].total;
    double recent = -std::numeric_limits<double>::infinity();
    for (std::size_t s = t - config_.alpha_window; s < t; ++s) recent = std::max(recent, trace_[s].total);
    if (recent <= before + config_.tol) stop_ = StopReason::alpha_window;
  }
  if (!stop_ && t >= config_.max_iter) stop_ = StopReason::max_iter;
}

void LayerSolver::run() {
  while (!done()) step();
}

LayerModel LayerSolver::finish() && {
  if (trace_.empty()) step();
  LayerModel model;
  model.input_schema = data_.schema();
  model.cardinality = config_.cardinality;
  model.alpha_policy = config_.alpha_policy;
  model.alpha = alpha_;
  model.factor_contribution = trace_.back().per_factor;
  model.mi = mutual_information_estimates(data_, estimate_marginals(data_, state_.labels, config_.smoothing),
                                          state_.labels);
  model.marginals = std::move(marginals_);
  model.labels = std::move(state_.labels);
  model.log_z = std::move(state_.log_z);
  model.trace = std::move(trace_);
  model.stop_reason = stop_.value_or(StopReason::max_iter);
  model.restart_index = restart_;
  return model;
}

LayerModel fit_layer(const DataMatrix& data, const LayerConfig& config) {
  config.validate(data.cols());
  std::optional<LayerModel> best;
  std::vector<double> finals;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    LayerSolver solver(data, config, r);
    solver.run();
    LayerModel model = std::move(solver).finish();
    finals.push_back(model.objective());
    if (!best || model.objective() > best->objective()) best = std::move(model);
  }
  best->restart_objectives = std::move(finals);
  return std::move(*best);
}

double pointwise_tc(const LayerModel& model, std::size_t sample) {
  if (sample >= model.samples()) throw ArgumentError("sample index out of range");
  double s = 0.0;
  for (const auto& lz : model.log_z) s += lz[sample];
  return s;
}

LabelUpdate transform(const LayerModel& model, const DataMatrix& data) {
  check_schema(model.input_schema, data);
  return update_labels(model.marginals, model.alpha, data);
}

}  // namespace corex
