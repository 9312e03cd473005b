#include <algorithm>
#include <numeric>
#include <random>

#include "corex/common.hpp"
#include "corex/dataset.hpp"

namespace corex {
namespace {

struct Columns {
  std::vector<std::vector<double>> values;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::size_t> cluster;
};

Columns block_gaussian(const BlockGaussianSpec& spec, std::size_t samples, std::mt19937_64& rng,
                       GroundTruth& truth) {
  if (spec.num_blocks == 0 || spec.block_size == 0) throw ArgumentError("block counts must be positive");
  if (!(spec.noise_sd > 0.0)) throw ArgumentError("noise_sd must be positive");
  const bool overlap = spec.dependency == BlockDependency::summed_overlap;
  if (overlap && spec.num_blocks < 3) throw ArgumentError("summed_overlap needs at least 3 blocks");

  const std::size_t b = spec.num_blocks;
  truth.latent_values.assign(b, std::vector<double>(samples, 0.0));
  for (std::size_t j = 0; j < b; ++j) truth.latent_names.push_back("Z" + std::to_string(j));

  Columns out;
  out.values.assign(b * spec.block_size, std::vector<double>(samples, 0.0));
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, spec.noise_sd);
  for (std::size_t l = 0; l < samples; ++l) {
    for (std::size_t j = 0; j < b; ++j) truth.latent_values[j][l] = coin(rng) ? 1.0 : 0.0;
    if (overlap) truth.latent_values[b - 1][l] = truth.latent_values[0][l] + truth.latent_values[1][l];
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t k = 0; k < spec.block_size; ++k) {
        out.values[j * spec.block_size + k][l] = truth.latent_values[j][l] + noise(rng);
      }
    }
  }
  for (std::size_t j = 0; j < b; ++j) {
    for (std::size_t k = 0; k < spec.block_size; ++k) {
      if (overlap && j == b - 1) {
        out.parents.push_back({0, 1});
      } else {
        out.parents.push_back({j});
      }
      out.cluster.push_back(j);
    }
  }
  return out;
}

Columns latent_tree(const LatentTreeSpec& spec, std::size_t samples, std::mt19937_64& rng, GroundTruth& truth) {
  if (spec.depth == 0 || spec.branching == 0 || spec.leaf_count == 0) {
    throw ArgumentError("tree counts must be positive");
  }
  if (!(spec.flip_prob >= 0.0 && spec.flip_prob < 0.5)) throw ArgumentError("flip_prob must lie in [0, 0.5)");

  // latents in breadth-first order; parent[k] is the parent of latent k
  std::vector<std::size_t> parent{0};
  std::size_t level_begin = 0;
  std::size_t level_size = 1;
  for (std::size_t d = 1; d < spec.depth; ++d) {
    for (std::size_t k = 0; k < level_size; ++k) {
      for (std::size_t c = 0; c < spec.branching; ++c) parent.push_back(level_begin + k);
    }
    level_begin += level_size;
    level_size *= spec.branching;
  }
  const std::size_t num_latents = parent.size();
  const std::size_t bottom_begin = level_begin;
  for (std::size_t k = 0; k < num_latents; ++k) truth.latent_names.push_back("Z" + std::to_string(k));
  truth.latent_values.assign(num_latents, std::vector<double>(samples, 0.0));

  Columns out;
  out.values.assign(level_size * spec.leaf_count, std::vector<double>(samples, 0.0));
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution flip(spec.flip_prob);
  for (std::size_t l = 0; l < samples; ++l) {
    truth.latent_values[0][l] = coin(rng) ? 1.0 : 0.0;
    for (std::size_t k = 1; k < num_latents; ++k) {
      const double p = truth.latent_values[parent[k]][l];
      truth.latent_values[k][l] = flip(rng) ? 1.0 - p : p;
    }
    for (std::size_t b = 0; b < level_size; ++b) {
      const double z = truth.latent_values[bottom_begin + b][l];
      for (std::size_t k = 0; k < spec.leaf_count; ++k) {
        out.values[b * spec.leaf_count + k][l] = flip(rng) ? 1.0 - z : z;
      }
    }
  }
  for (std::size_t b = 0; b < level_size; ++b) {
    for (std::size_t k = 0; k < spec.leaf_count; ++k) {
      out.parents.push_back({bottom_begin + b});
      out.cluster.push_back(b);
    }
  }
  return out;
}

}  // namespace

SyntheticData generate(const SyntheticSpec& spec) {
  if (spec.samples == 0) throw ArgumentError("sample count must be positive");
  std::mt19937_64 rng(spec.seed);
  GroundTruth truth;
  const bool discrete = std::holds_alternative<LatentTreeSpec>(spec.generator);
  Columns cols = std::visit(
      [&](const auto& g) -> Columns {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, BlockGaussianSpec>) {
          return block_gaussian(g, spec.samples, rng, truth);
        } else {
          return latent_tree(g, spec.samples, rng, truth);
        }
      },
      spec.generator);

  std::vector<std::size_t> order(cols.values.size());
  std::iota(order.begin(), order.end(), 0);
  if (spec.shuffle_columns) std::shuffle(order.begin(), order.end(), rng);

  std::vector<ColumnSchema> schema;
  std::vector<std::vector<double>> values;
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    const std::string name = "x" + std::to_string(pos);
    schema.push_back(discrete ? ColumnSchema::discrete(name, 2) : ColumnSchema::continuous(name));
    values.push_back(std::move(cols.values[order[pos]]));
    truth.parents.push_back(cols.parents[order[pos]]);
    truth.cluster.push_back(cols.cluster[order[pos]]);
  }
  return SyntheticData{DataMatrix(std::move(schema), std::move(values)), std::move(truth)};
}

}  // namespace corex
