#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "corex/dataset.hpp"
#include "corex/marginals.hpp"
#include "corex/structure.hpp"

namespace corex {

struct LayerConfig {
  std::size_t m = 1;
  std::size_t cardinality = 2;
  std::size_t max_iter = 100;
  double tol = 1e-6;
  AlphaPolicy alpha_policy = AlphaPolicy::tree;
  /// Required for AlphaPolicy::fixed; otherwise ignored.
  std::optional<AlphaMatrix> fixed_alpha;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  double smoothing = kDefaultSmoothing;
  /// Iterations without an objective increase after which adaptive alpha stops the fit.
  std::size_t alpha_window = 10;
  /// Adaptive policies keep the initial alpha for up to this many iterations,
  /// or until the objective settles, before updating it.
  std::size_t alpha_warmup = 50;

  void validate(std::size_t n) const;
};

struct TraceEntry {
  double total = 0.0;
  std::vector<double> per_factor;
};

enum class StopReason { converged, max_iter, alpha_window };
const char* to_string(StopReason reason) noexcept;

/// Soft labels and per-sample log partition values of one label pass; log_z is [j][l].
struct LabelUpdate {
  std::vector<FactorLabels> labels;
  std::vector<std::vector<double>> log_z;
};

struct Objective {
  double total = 0.0;
  std::vector<double> per_factor;
};

/// One fitted representation layer. `marginals` and `alpha` are exactly the
/// inputs that produced `labels` and `log_z`.
struct LayerModel {
  std::vector<ColumnSchema> input_schema;
  std::size_t cardinality = 2;
  AlphaPolicy alpha_policy = AlphaPolicy::tree;
  AlphaMatrix alpha;
  MarginalSet marginals;
  std::vector<FactorLabels> labels;
  std::vector<std::vector<double>> log_z;
  std::vector<TraceEntry> trace;
  std::vector<double> factor_contribution;  // E[log Z_j]
  MiTable mi;
  StopReason stop_reason = StopReason::max_iter;
  std::size_t restart_index = 0;
  std::vector<double> restart_objectives;  // final objective of every restart

  std::size_t factors() const noexcept { return factor_contribution.size(); }
  std::size_t samples() const noexcept { return log_z.empty() ? 0 : log_z.front().size(); }
  double objective() const;
  /// Factor indices by decreasing contribution.
  std::vector<std::size_t> factor_order() const;
};

/// Random soft labels: per state uniform(0.1, 1.0) weights, normalized. Seeded by (seed, restart).
std::vector<FactorLabels> init_labels(const LayerConfig& config, std::size_t samples, std::size_t restart = 0);

MarginalSet estimate_marginals(const DataMatrix& data, const std::vector<FactorLabels>& labels,
                               double smoothing = kDefaultSmoothing);

/// Label pass: score_y = log p(y_j) + sum_i alpha_{i,j} log(p(y_j|x_i)/p(y_j)),
/// labels = softmax(score), log_z = logsumexp(score).
LabelUpdate update_labels(const MarginalSet& marginals, const AlphaMatrix& alpha, const DataMatrix& data);

Objective objective(const std::vector<std::vector<double>>& log_z);

/// Iterates marginals -> structure -> labels for one initialization. Exposed so
/// callers can time or inspect individual iterations.
class LayerSolver {
 public:
  LayerSolver(const DataMatrix& data, const LayerConfig& config, std::size_t restart = 0);

  /// Runs one iteration and returns its objective.
  const TraceEntry& step();
  bool done() const noexcept { return stop_.has_value(); }
  std::size_t iterations() const noexcept { return trace_.size(); }
  const std::vector<TraceEntry>& trace() const noexcept { return trace_; }
  const AlphaMatrix& alpha() const noexcept { return alpha_; }

  /// Runs until a stopping rule fires.
  void run();
  LayerModel finish() &&;

 private:
  void check_stop();

  const DataMatrix& data_;
  LayerConfig config_;
  std::size_t restart_;
  AlphaMatrix alpha_;
  MarginalSet marginals_;
  LabelUpdate state_;
  std::vector<TraceEntry> trace_;
  std::optional<StopReason> stop_;
  std::optional<std::size_t> policy_start_;  // iterations completed before the policy took over
};

LayerModel fit_layer(const DataMatrix& data, const LayerConfig& config);

/// sum_j log Z_j for one training sample.
double pointwise_tc(const LayerModel& model, std::size_t sample);

/// One label pass over new data with the model's frozen marginals and alpha.
LabelUpdate transform(const LayerModel& model, const DataMatrix& data);

}  // namespace corex
