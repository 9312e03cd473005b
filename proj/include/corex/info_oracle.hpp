#pragma once

// Exact information measures over small discrete joint distributions, computed
// by exhaustive enumeration. All results are in nats.

#include <cstddef>
#include <span>
#include <vector>

namespace corex::oracle {

using IndexSet = std::vector<std::size_t>;

/// Largest joint state space the oracle will enumerate.
inline constexpr std::size_t kMaxJointStates = std::size_t{1} << 20;

/// Probability table over the product of per-variable alphabets. The last
/// variable varies fastest in the flat layout.
class JointTable {
 public:
  JointTable(std::vector<std::size_t> cardinalities, std::vector<double> probabilities);

  /// Empirical distribution with weight 1/N per row; each row holds one level per variable.
  static JointTable from_samples(std::vector<std::size_t> cardinalities,
                                 std::span<const std::vector<std::size_t>> rows);

  std::size_t num_variables() const noexcept { return cardinalities_.size(); }
  std::size_t size() const noexcept { return probabilities_.size(); }
  const std::vector<std::size_t>& cardinalities() const noexcept { return cardinalities_; }
  const std::vector<double>& probabilities() const noexcept { return probabilities_; }

  std::size_t index_of(std::span<const std::size_t> levels) const;
  void decode(std::size_t index, std::span<std::size_t> levels) const;

  /// Marginal over `subset`, laid out in the order the indices are given.
  std::vector<double> marginal(const IndexSet& subset) const;

 private:
  std::vector<std::size_t> cardinalities_;
  std::vector<double> probabilities_;
};

double entropy(const JointTable& table, const IndexSet& subset);
double mutual_information(const JointTable& table, const IndexSet& a, const IndexSet& b);

/// TC over every variable of the table.
double total_correlation(const JointTable& table);
/// TC over a subset of the table's variables.
double total_correlation(const JointTable& table, const IndexSet& subset);

/// TC(X|Y) = sum_i H(X_i|Y) - H(X|Y).
double conditional_tc(const JointTable& table, const IndexSet& x_set, const IndexSet& y_set);

/// TC(X;Y) = TC(X) - TC(X|Y).
double tc_explained(const JointTable& table, const IndexSet& x_set, const IndexSet& y_set);

/// TC_L(X;Y) = sum_i I(Y:X_i) - sum_j I(Y_j:X), with each listed y index a separate factor.
double tc_lower_term(const JointTable& table, const IndexSet& x_set, const IndexSet& y_indices);

/// Joint of X and m conditionally independent factors, p(x, y) = p(x) prod_j p(y_j|x).
/// conditionals[j] holds p(y_j|x) flat as [x_state * factor_cardinalities[j] + y].
/// The factors are appended after the X variables.
JointTable attach_representation(const JointTable& x_table,
                                 std::span<const std::vector<double>> conditionals,
                                 std::span<const std::size_t> factor_cardinalities);

}  // namespace corex::oracle
