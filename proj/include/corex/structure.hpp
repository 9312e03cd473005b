#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "corex/dataset.hpp"
#include "corex/marginals.hpp"

namespace corex {

/// n x m table, row-major by variable.
template <typename Tag>
class VariableFactorTable {
 public:
  VariableFactorTable() = default;
  VariableFactorTable(std::size_t n, std::size_t m, double fill = 0.0) : n_(n), m_(m), values_(n * m, fill) {}
  VariableFactorTable(std::size_t n, std::size_t m, std::vector<double> values)
      : n_(n), m_(m), values_(std::move(values)) {
    if (values_.size() != n * m) throw std::invalid_argument("table values do not match n x m");
  }

  std::size_t variables() const noexcept { return n_; }
  std::size_t factors() const noexcept { return m_; }
  double operator()(std::size_t i, std::size_t j) const { return values_[i * m_ + j]; }
  double& operator()(std::size_t i, std::size_t j) { return values_[i * m_ + j]; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const VariableFactorTable&, const VariableFactorTable&) = default;

 private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> values_;
};

struct AlphaTag {};
struct MiTag {};

/// Structure weights alpha_{i,j} in [0, 1].
using AlphaMatrix = VariableFactorTable<AlphaTag>;
/// I(X_i : Y_j) estimates in nats.
using MiTable = VariableFactorTable<MiTag>;

enum class AlphaPolicy { tree, unique, fixed };

const char* to_string(AlphaPolicy policy) noexcept;
AlphaPolicy parse_alpha_policy(const std::string& name);

/// Discrete columns: plug-in MI of the (level, soft label) joint. Continuous
/// columns: H(Y_j) - E[H(Y_j | x_i)] using the single-variable posteriors.
MiTable mutual_information_estimates(const DataMatrix& data, const MarginalSet& marginals,
                                     const std::vector<FactorLabels>& labels);

/// Starting structure for adaptive policies. Picks m seed columns farthest-first
/// by absolute Pearson correlation (the first one at random) and assigns every
/// column one-hot to its most correlated seed. Missing cells count as the column mean.
AlphaMatrix alpha_initial(const DataMatrix& data, std::size_t m, std::uint64_t seed, std::size_t restart = 0);

/// One-hot rows at argmax_j I(X_i : Y_j); ties go to the lowest factor index.
AlphaMatrix alpha_tree(const MiTable& mi);

/// Prediction-counting estimate of the unique-information fraction.
///
/// d_{i,j}^l = 1 when the label argmax of Y_j on sample l equals the argmax of
/// X_i's own log ratio. For each variable the factors are visited in order of
/// decreasing prediction count, and alpha_{i,j} is the fraction of samples that
/// factor j predicts while no earlier factor in that order does. Samples where
/// x_i is missing are left out of the fractions.
AlphaMatrix alpha_unique(const DataMatrix& data, const MarginalSet& marginals,
                         const std::vector<FactorLabels>& labels);

}  // namespace corex
