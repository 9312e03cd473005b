#include "corex/structure.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "corex/common.hpp"
#include "corex/parallel.hpp"

namespace corex {
namespace {

void check_shapes(const DataMatrix& data, const MarginalSet& marginals, const std::vector<FactorLabels>& labels) {
  if (marginals.priors.size() != labels.size() || marginals.columns.size() != labels.size()) {
    throw ArgumentError("marginals and labels disagree on factor count");
  }
  for (const auto& cols : marginals.columns) {
    if (cols.size() != data.cols()) throw ArgumentError("marginals and data disagree on column count");
  }
  for (const auto& lab : labels) {
    if (lab.samples() != data.rows()) throw ArgumentError("labels and data disagree on sample count");
  }
}

double discrete_mi(const DiscreteMarginal& d) {
  const double total = std::accumulate(d.counts.begin(), d.counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  std::vector<double> py(d.states, 0.0);
  for (std::size_t v = 0; v < d.levels; ++v) {
    for (std::size_t y = 0; y < d.states; ++y) py[y] += d.counts[v] / total * d.at(v, y);
  }
  double mi = 0.0;
  for (std::size_t v = 0; v < d.levels; ++v) {
    if (d.counts[v] <= 0.0) continue;
    const double pv = d.counts[v] / total;
    for (std::size_t y = 0; y < d.states; ++y) {
      const double p = d.at(v, y);
      if (p > 0.0 && py[y] > 0.0) mi += pv * p * std::log(p / py[y]);
    }
  }
  return mi;
}

double continuous_mi(const DataMatrix& data, std::size_t col, const RatioEvaluator& ratio, const FactorPrior& prior) {
  const std::size_t k = prior.probs.size();
  std::vector<double> lr(k), mean_post(k, 0.0);
  CompensatedSum cond;
  double present = 0.0;
  for (std::size_t l = 0; l < data.rows(); ++l) {
    if (data.is_missing(l, col)) continue;
    ratio(data.value(l, col), false, lr);
    double h = 0.0;
    for (std::size_t y = 0; y < k; ++y) {
      const double p = prior.probs[y] * std::exp(lr[y]);
      mean_post[y] += p;
      h -= xlogx(p);
    }
    cond.add(h);
    present += 1.0;
  }
  if (present <= 0.0) return 0.0;
  for (double& p : mean_post) p /= present;
  return entropy_of(mean_post) - cond.value() / present;
}

}  // namespace

const char* to_string(AlphaPolicy policy) noexcept {
  switch (policy) {
    case AlphaPolicy::tree:
      return "tree";
    case AlphaPolicy::unique:
      return "unique";
    case AlphaPolicy::fixed:
      return "fixed";
  }
  return "?";
}

AlphaPolicy parse_alpha_policy(const std::string& name) {
  if (name == "tree") return AlphaPolicy::tree;
  if (name == "unique") return AlphaPolicy::unique;
  if (name == "fixed") return AlphaPolicy::fixed;
  throw ArgumentError("unknown alpha policy '" + name + "'");
}

MiTable mutual_information_estimates(const DataMatrix& data, const MarginalSet& marginals,
                                     const std::vector<FactorLabels>& labels) {
  check_shapes(data, marginals, labels);
  const std::size_t n = data.cols();
  const std::size_t m = labels.size();
  MiTable mi(n, m);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < m; ++j) {
        const ColumnMarginal& cm = marginals.columns[j][i];
        double v = 0.0;
        if (const auto* d = std::get_if<DiscreteMarginal>(&cm)) {
          v = discrete_mi(*d);
        } else {
          v = continuous_mi(data, i, RatioEvaluator(cm, marginals.priors[j]), marginals.priors[j]);
        }
        mi(i, j) = std::max(0.0, v);
      }
    }
  });
  return mi;
}

AlphaMatrix alpha_initial(const DataMatrix& data, std::size_t m, std::uint64_t seed, std::size_t restart) {
  if (m == 0) throw ArgumentError("a layer needs at least one factor");
  const std::size_t n = data.cols();
  const std::size_t N = data.rows();

  // unit-norm centred columns
  std::vector<std::vector<double>> z(n, std::vector<double>(N, 0.0));
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      CompensatedSum sum;
      double present = 0.0;
      for (std::size_t l = 0; l < N; ++l) {
        if (data.is_missing(l, i)) continue;
        sum.add(data.value(l, i));
        present += 1.0;
      }
      if (present == 0.0) continue;
      const double mean = sum.value() / present;
      double ss = 0.0;
      for (std::size_t l = 0; l < N; ++l) {
        if (data.is_missing(l, i)) continue;
        z[i][l] = data.value(l, i) - mean;
        ss += z[i][l] * z[i][l];
      }
      if (ss <= 0.0) {
        std::fill(z[i].begin(), z[i].end(), 0.0);
        continue;
      }
      const double norm = std::sqrt(ss);
      for (double& v : z[i]) v /= norm;
    }
  });

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 1u};
  std::mt19937_64 rng(seq);
  std::vector<std::size_t> seeds{std::uniform_int_distribution<std::size_t>(0, n - 1)(rng)};
  // corr[i * m + j] = |corr(column i, seed j)|
  std::vector<double> corr(n * m, 0.0);
  std::vector<double> nearest(n, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    if (j > 0) {
      seeds.push_back(static_cast<std::size_t>(std::min_element(nearest.begin(), nearest.end()) - nearest.begin()));
    }
    const std::vector<double>& s = z[seeds[j]];
    parallel_for(n, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double r = 0.0;
        for (std::size_t l = 0; l < N; ++l) r += z[i][l] * s[l];
        corr[i * m + j] = std::abs(r);
        nearest[i] = std::max(nearest[i], std::abs(r));
      }
    });
  }

  AlphaMatrix alpha(n, m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    alpha(i, argmax(std::span<const double>(corr.data() + i * m, m))) = 1.0;
  }
  return alpha;
}

AlphaMatrix alpha_tree(const MiTable& mi) {
  AlphaMatrix alpha(mi.variables(), mi.factors(), 0.0);
  for (std::size_t i = 0; i < mi.variables(); ++i) {
    std::size_t best = 0;
    for (std::size_t j = 1; j < mi.factors(); ++j) {
      if (mi(i, j) > mi(i, best)) best = j;
    }
    if (mi.factors() > 0) alpha(i, best) = 1.0;
  }
  return alpha;
}

AlphaMatrix alpha_unique(const DataMatrix& data, const MarginalSet& marginals,
                         const std::vector<FactorLabels>& labels) {
  check_shapes(data, marginals, labels);
  const std::size_t n = data.cols();
  const std::size_t m = labels.size();
  const std::size_t N = data.rows();

  // hardened labels, [j][l]
  std::vector<std::vector<std::size_t>> hard(m, std::vector<std::size_t>(N));
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t l = 0; l < N; ++l) hard[j][l] = argmax(labels[j].row(l));
  }

  AlphaMatrix alpha(n, m, 0.0);
  parallel_for(n, [&](std::size_t begin, std::size_t end) {
    std::vector<std::uint8_t> correct(m * N, 0);  // [j * N + l]
    std::vector<std::uint8_t> covered(N, 0);
    std::vector<double> lr;
    std::vector<std::size_t> order(m);
    std::vector<double> hits(m);
    for (std::size_t i = begin; i < end; ++i) {
      double present = 0.0;
      for (std::size_t l = 0; l < N; ++l) present += data.is_missing(l, i) ? 0.0 : 1.0;
      if (present == 0.0) continue;
      for (std::size_t j = 0; j < m; ++j) {
        const RatioEvaluator ratio(marginals.columns[j][i], marginals.priors[j]);
        lr.resize(ratio.states());
        hits[j] = 0.0;
        for (std::size_t l = 0; l < N; ++l) {
          std::uint8_t d = 0;
          if (!data.is_missing(l, i)) {
            ratio(data.value(l, i), false, lr);
            d = argmax(lr) == hard[j][l] ? 1 : 0;
          }
          correct[j * N + l] = d;
          hits[j] += d;
        }
      }
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return hits[a] > hits[b]; });
      std::fill(covered.begin(), covered.end(), 0);
      for (std::size_t j : order) {
        double fresh = 0.0;
        for (std::size_t l = 0; l < N; ++l) {
          if (correct[j * N + l] && !covered[l]) {
            fresh += 1.0;
            covered[l] = 1;
          }
        }
        alpha(i, j) = fresh / present;
      }
    }
  });
  return alpha;
}

}  // namespace corex
