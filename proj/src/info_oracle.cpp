#include "corex/info_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corex/common.hpp"

namespace corex::oracle {
namespace {

constexpr double kNormTolerance = 1e-12;
constexpr double kClampTolerance = 1e-12;

std::size_t checked_product(std::span<const std::size_t> cards) {
  std::size_t total = 1;
  for (std::size_t c : cards) {
    if (c == 0) throw ArgumentError("cardinality must be positive");
    if (total > kMaxJointStates / c) {
      throw ArgumentError("joint state space exceeds the enumeration cap of 2^20 states");
    }
    total *= c;
  }
  return total;
}

void validate_set(const JointTable& table, const IndexSet& set, const char* what) {
  if (set.empty()) throw ArgumentError(std::string(what) + " index set is empty");
  std::vector<bool> seen(table.num_variables(), false);
  for (std::size_t v : set) {
    if (v >= table.num_variables()) {
      throw ArgumentError(std::string(what) + " index " + std::to_string(v) + " out of range");
    }
    if (seen[v]) throw ArgumentError(std::string(what) + " index set has duplicates");
    seen[v] = true;
  }
}

void validate_disjoint(const IndexSet& a, const IndexSet& b) {
  for (std::size_t v : a) {
    if (std::find(b.begin(), b.end(), v) != b.end()) {
      throw ArgumentError("x and y index sets overlap");
    }
  }
}

IndexSet join(const IndexSet& a, const IndexSet& b) {
  IndexSet out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double entropy_unchecked(const JointTable& table, const IndexSet& subset) {
  CompensatedSum h;
  for (double p : table.marginal(subset)) h.add(-xlogx(p));
  return h.value();
}

double clamp_small_negative(double v) { return (v < 0.0 && v > -kClampTolerance) ? 0.0 : v; }

}  // namespace

JointTable::JointTable(std::vector<std::size_t> cardinalities, std::vector<double> probabilities)
    : cardinalities_(std::move(cardinalities)), probabilities_(std::move(probabilities)) {
  if (cardinalities_.empty()) throw ArgumentError("joint table needs at least one variable");
  const std::size_t total = checked_product(cardinalities_);
  if (total != probabilities_.size()) {
    throw ArgumentError("probability array length does not match the product of cardinalities");
  }
  CompensatedSum s;
  for (double p : probabilities_) {
    if (!(p >= 0.0)) throw ArgumentError("joint probabilities must be non-negative");
    s.add(p);
  }
  if (std::abs(s.value() - 1.0) > kNormTolerance) {
    throw ArgumentError("joint probabilities must sum to 1");
  }
}

JointTable JointTable::from_samples(std::vector<std::size_t> cardinalities,
                                    std::span<const std::vector<std::size_t>> rows) {
  if (rows.empty()) throw ArgumentError("no samples");
  const std::size_t total = checked_product(cardinalities);
  std::vector<double> counts(total, 0.0);
  for (const auto& row : rows) {
    if (row.size() != cardinalities.size()) throw ArgumentError("sample width mismatch");
    std::size_t idx = 0;
    for (std::size_t v = 0; v < row.size(); ++v) {
      if (row[v] >= cardinalities[v]) throw ArgumentError("sample level out of alphabet");
      idx = idx * cardinalities[v] + row[v];
    }
    counts[idx] += 1.0;
  }
  const double n = static_cast<double>(rows.size());
  for (double& c : counts) c /= n;
  return JointTable(std::move(cardinalities), std::move(counts));
}

std::size_t JointTable::index_of(std::span<const std::size_t> levels) const {
  if (levels.size() != cardinalities_.size()) throw ArgumentError("level vector width mismatch");
  std::size_t idx = 0;
  for (std::size_t v = 0; v < levels.size(); ++v) {
    if (levels[v] >= cardinalities_[v]) throw ArgumentError("level out of alphabet");
    idx = idx * cardinalities_[v] + levels[v];
  }
  return idx;
}

void JointTable::decode(std::size_t index, std::span<std::size_t> levels) const {
  for (std::size_t v = cardinalities_.size(); v-- > 0;) {
    levels[v] = index % cardinalities_[v];
    index /= cardinalities_[v];
  }
}

std::vector<double> JointTable::marginal(const IndexSet& subset) const {
  // stride of each table variable inside the marginal's flat layout (0 if absent)
  std::vector<std::size_t> sub_stride(cardinalities_.size(), 0);
  std::size_t sub_size = 1;
  for (std::size_t k = subset.size(); k-- > 0;) {
    sub_stride[subset[k]] = sub_size;
    sub_size *= cardinalities_[subset[k]];
  }
  std::vector<double> out(sub_size, 0.0);
  std::vector<std::size_t> levels(cardinalities_.size(), 0);
  std::size_t sub_index = 0;
  for (double p : probabilities_) {
    out[sub_index] += p;
    // odometer increment, last variable fastest
    for (std::size_t v = cardinalities_.size(); v-- > 0;) {
      if (++levels[v] < cardinalities_[v]) {
        sub_index += sub_stride[v];
        break;
      }
      sub_index -= sub_stride[v] * (cardinalities_[v] - 1);
      levels[v] = 0;
    }
  }
  return out;
}

double entropy(const JointTable& table, const IndexSet& subset) {
  validate_set(table, subset, "entropy");
  return entropy_unchecked(table, subset);
}

double mutual_information(const JointTable& table, const IndexSet& a, const IndexSet& b) {
  validate_set(table, a, "first");
  validate_set(table, b, "second");
  validate_disjoint(a, b);
  return clamp_small_negative(entropy_unchecked(table, a) + entropy_unchecked(table, b) -
                              entropy_unchecked(table, join(a, b)));
}

double total_correlation(const JointTable& table) {
  IndexSet all(table.num_variables());
  for (std::size_t v = 0; v < all.size(); ++v) all[v] = v;
  return total_correlation(table, all);
}

double total_correlation(const JointTable& table, const IndexSet& subset) {
  validate_set(table, subset, "tc");
  CompensatedSum s;
  for (std::size_t v : subset) s.add(entropy_unchecked(table, {v}));
  s.add(-entropy_unchecked(table, subset));
  return clamp_small_negative(s.value());
}

double conditional_tc(const JointTable& table, const IndexSet& x_set, const IndexSet& y_set) {
  validate_set(table, x_set, "x");
  validate_set(table, y_set, "y");
  validate_disjoint(x_set, y_set);
  const double h_y = entropy_unchecked(table, y_set);
  CompensatedSum s;
  for (std::size_t v : x_set) s.add(entropy_unchecked(table, join({v}, y_set)) - h_y);
  s.add(-(entropy_unchecked(table, join(x_set, y_set)) - h_y));
  return clamp_small_negative(s.value());
}

double tc_explained(const JointTable& table, const IndexSet& x_set, const IndexSet& y_set) {
  const double conditional = conditional_tc(table, x_set, y_set);
  return total_correlation(table, x_set) - conditional;
}

double tc_lower_term(const JointTable& table, const IndexSet& x_set, const IndexSet& y_indices) {
  validate_set(table, x_set, "x");
  validate_set(table, y_indices, "y");
  validate_disjoint(x_set, y_indices);
  const double h_y = entropy_unchecked(table, y_indices);
  const double h_x = entropy_unchecked(table, x_set);
  CompensatedSum s;
  for (std::size_t v : x_set) {
    s.add(h_y + entropy_unchecked(table, {v}) - entropy_unchecked(table, join(y_indices, {v})));
  }
  for (std::size_t j : y_indices) {
    s.add(-(entropy_unchecked(table, {j}) + h_x - entropy_unchecked(table, join({j}, x_set))));
  }
  return s.value();
}

JointTable attach_representation(const JointTable& x_table,
                                 std::span<const std::vector<double>> conditionals,
                                 std::span<const std::size_t> factor_cardinalities) {
  if (conditionals.size() != factor_cardinalities.size()) {
    throw ArgumentError("one cardinality per attached factor required");
  }
  const std::size_t nx = x_table.size();
  std::vector<std::size_t> cards = x_table.cardinalities();
  std::size_t ny = 1;
  for (std::size_t j = 0; j < conditionals.size(); ++j) {
    if (conditionals[j].size() != nx * factor_cardinalities[j]) {
      throw ArgumentError("conditional table size mismatch for factor " + std::to_string(j));
    }
    for (std::size_t x = 0; x < nx; ++x) {
      const std::span<const double> row(conditionals[j].data() + x * factor_cardinalities[j],
                                        factor_cardinalities[j]);
      if (std::abs(compensated_sum(row) - 1.0) > 1e-9) {
        throw ArgumentError("conditional p(y|x) rows must sum to 1");
      }
    }
    cards.push_back(factor_cardinalities[j]);
    ny *= factor_cardinalities[j];
  }
  checked_product(cards);

  std::vector<double> probs(nx * ny, 0.0);
  std::vector<std::size_t> y_levels(conditionals.size(), 0);
  for (std::size_t x = 0; x < nx; ++x) {
    const double px = x_table.probabilities()[x];
    std::fill(y_levels.begin(), y_levels.end(), 0);
    for (std::size_t y = 0; y < ny; ++y) {
      double p = px;
      for (std::size_t j = 0; j < conditionals.size(); ++j) {
        p *= conditionals[j][x * factor_cardinalities[j] + y_levels[j]];
      }
      probs[x * ny + y] = p;
      for (std::size_t j = conditionals.size(); j-- > 0;) {
        if (++y_levels[j] < factor_cardinalities[j]) break;
        y_levels[j] = 0;
      }
    }
  }
  // renormalize away accumulated rounding so the table invariant holds exactly
  const double total = compensated_sum(probs);
  for (double& p : probs) p /= total;
  return JointTable(std::move(cards), std::move(probs));
}

}  // namespace corex::oracle
