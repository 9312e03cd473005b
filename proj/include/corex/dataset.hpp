#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace corex {

enum class ColumnKind { discrete, continuous };

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::continuous;
  std::size_t cardinality = 0;  // alphabet size, discrete columns only
  bool missing_allowed = false;

  static ColumnSchema discrete(std::string name, std::size_t cardinality, bool missing_allowed = false);
  static ColumnSchema continuous(std::string name, bool missing_allowed = false);

  bool is_discrete() const noexcept { return kind == ColumnKind::discrete; }
  friend bool operator==(const ColumnSchema&, const ColumnSchema&) = default;
};

/// N samples by n typed columns, stored column-major. Discrete levels are held
/// as exact small doubles. Immutable after construction.
class DataMatrix {
 public:
  /// `missing` may be empty (nothing missing) or hold one mask per column.
  DataMatrix(std::vector<ColumnSchema> schema, std::vector<std::vector<double>> columns,
             std::vector<std::vector<std::uint8_t>> missing = {});

  /// All-discrete matrix from row-major integer levels; columns named x0, x1, ...
  static DataMatrix from_discrete_rows(const std::vector<std::vector<int>>& rows,
                                       std::size_t cardinality);
  /// All-continuous matrix from row-major values.
  static DataMatrix from_continuous_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return schema_.size(); }
  const std::vector<ColumnSchema>& schema() const noexcept { return schema_; }
  const ColumnSchema& column_schema(std::size_t col) const { return schema_.at(col); }

  std::span<const double> column(std::size_t col) const { return columns_.at(col); }
  double value(std::size_t row, std::size_t col) const { return columns_[col][row]; }
  std::size_t level(std::size_t row, std::size_t col) const {
    return static_cast<std::size_t>(columns_[col][row]);
  }
  bool is_missing(std::size_t row, std::size_t col) const {
    return !missing_[col].empty() && missing_[col][row] != 0;
  }
  bool has_missing(std::size_t col) const { return !missing_[col].empty(); }
  bool all_discrete() const noexcept;

 private:
  std::vector<ColumnSchema> schema_;
  std::vector<std::vector<double>> columns_;
  std::vector<std::vector<std::uint8_t>> missing_;  // empty vector per column when nothing is missing
  std::size_t rows_ = 0;
};

struct CsvOptions {
  std::string missing_token = "NA";
  /// Explicit schema; std::nullopt infers one per column.
  std::optional<std::vector<ColumnSchema>> schema;
};

/// Reads a headered CSV. With no schema, a column is discrete when every present
/// value is a non-negative integer and there are at most 10 distinct levels.
DataMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options = {});
DataMatrix parse_csv(const std::string& text, const CsvOptions& options = {});

/// Reads the JSON schema sidecar: {"columns": [{"name", "kind", "cardinality", "missing_allowed"}]}.
std::vector<ColumnSchema> load_schema_json(const std::filesystem::path& path);

std::string to_csv(const DataMatrix& data, const std::string& missing_token = "NA");

// --- synthetic generators -------------------------------------------------

enum class BlockDependency { independent, summed_overlap };

/// Blocks of noisy copies of fair Bernoulli drivers, X_i ~ N(Z_b, noise_sd).
/// With summed_overlap the last block's driver is Z_0 + Z_1.
struct BlockGaussianSpec {
  std::size_t num_blocks = 4;
  std::size_t block_size = 100;
  double noise_sd = 0.1;
  BlockDependency dependency = BlockDependency::independent;
};

/// Binary latent tree: a fair root, `branching` children per latent over `depth`
/// latent levels, `leaf_count` observed leaves under each bottom latent. Every
/// edge flips its parent's value with probability flip_prob.
struct LatentTreeSpec {
  std::size_t depth = 1;
  std::size_t branching = 1;
  std::size_t leaf_count = 5;
  double flip_prob = 0.0;
};

struct SyntheticSpec {
  std::variant<BlockGaussianSpec, LatentTreeSpec> generator;
  std::uint64_t seed = 0;
  std::size_t samples = 100;
  bool shuffle_columns = false;
};

struct GroundTruth {
  std::vector<std::string> latent_names;
  std::vector<std::vector<double>> latent_values;   // [latent][sample]
  std::vector<std::vector<std::size_t>> parents;    // per column, the latents it is drawn from
  std::vector<std::size_t> cluster;                 // per column, its generating block / bottom latent
};

struct SyntheticData {
  DataMatrix data;
  GroundTruth truth;
};

SyntheticData generate(const SyntheticSpec& spec);

}  // namespace corex
