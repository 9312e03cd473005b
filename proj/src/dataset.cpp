#include "corex/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "corex/common.hpp"

namespace corex {
namespace {

constexpr std::size_t kMaxAutoLevels = 10;

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cur.push_back('"');
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(trim(cur));
  return cells;
}

std::optional<double> parse_number(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

bool is_level(double v) { return v >= 0.0 && v == std::floor(v) && v < 1e9; }

std::string coord(std::size_t row, std::size_t col, const std::string& name) {
  return "row " + std::to_string(row + 1) + ", column " + std::to_string(col + 1) + " ('" + name + "')";
}

}  // namespace

ColumnSchema ColumnSchema::discrete(std::string name, std::size_t cardinality, bool missing_allowed) {
  return ColumnSchema{std::move(name), ColumnKind::discrete, cardinality, missing_allowed};
}

ColumnSchema ColumnSchema::continuous(std::string name, bool missing_allowed) {
  return ColumnSchema{std::move(name), ColumnKind::continuous, 0, missing_allowed};
}

DataMatrix::DataMatrix(std::vector<ColumnSchema> schema, std::vector<std::vector<double>> columns,
                       std::vector<std::vector<std::uint8_t>> missing)
    : schema_(std::move(schema)), columns_(std::move(columns)), missing_(std::move(missing)) {
  if (schema_.empty()) throw ArgumentError("data matrix needs at least one column");
  if (columns_.size() != schema_.size()) throw ArgumentError("one value column per schema entry required");
  rows_ = columns_.front().size();
  if (rows_ == 0) throw ArgumentError("data matrix needs at least one row");
  if (missing_.empty()) missing_.resize(columns_.size());
  if (missing_.size() != columns_.size()) throw ArgumentError("missing mask column count mismatch");

  for (std::size_t c = 0; c < columns_.size(); ++c) {
    const ColumnSchema& s = schema_[c];
    if (columns_[c].size() != rows_) throw ArgumentError("ragged columns in data matrix");
    if (!missing_[c].empty() && missing_[c].size() != rows_) throw ArgumentError("missing mask length mismatch");
    bool any_missing = false;
    if (s.is_discrete() && s.cardinality < 2) {
      throw ArgumentError("discrete column '" + s.name + "' needs an alphabet of at least 2");
    }
    for (std::size_t r = 0; r < rows_; ++r) {
      if (!missing_[c].empty() && missing_[c][r]) {
        if (!s.missing_allowed) throw ArgumentError("missing value in " + coord(r, c, s.name));
        any_missing = true;
        columns_[c][r] = 0.0;
        continue;
      }
      const double v = columns_[c][r];
      if (!std::isfinite(v)) throw ArgumentError("non-finite value in " + coord(r, c, s.name));
      if (s.is_discrete() && (!is_level(v) || v >= static_cast<double>(s.cardinality))) {
        throw ArgumentError("discrete value out of alphabet in " + coord(r, c, s.name));
      }
    }
    if (!any_missing) missing_[c].clear();
  }
}

DataMatrix DataMatrix::from_discrete_rows(const std::vector<std::vector<int>>& rows, std::size_t cardinality) {
  if (rows.empty() || rows.front().empty()) throw ArgumentError("empty data");
  const std::size_t n = rows.front().size();
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<double>> cols(n, std::vector<double>(rows.size()));
  for (std::size_t c = 0; c < n; ++c) schema.push_back(ColumnSchema::discrete("x" + std::to_string(c), cardinality));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n) throw ArgumentError("ragged rows");
    for (std::size_t c = 0; c < n; ++c) cols[c][r] = rows[r][c];
  }
  return DataMatrix(std::move(schema), std::move(cols));
}

DataMatrix DataMatrix::from_continuous_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty() || rows.front().empty()) throw ArgumentError("empty data");
  const std::size_t n = rows.front().size();
  std::vector<ColumnSchema> schema;
  std::vector<std::vector<double>> cols(n, std::vector<double>(rows.size()));
  for (std::size_t c = 0; c < n; ++c) schema.push_back(ColumnSchema::continuous("x" + std::to_string(c)));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != n) throw ArgumentError("ragged rows");
    for (std::size_t c = 0; c < n; ++c) cols[c][r] = rows[r][c];
  }
  return DataMatrix(std::move(schema), std::move(cols));
}

bool DataMatrix::all_discrete() const noexcept {
  for (const auto& s : schema_) {
    if (!s.is_discrete()) return false;
  }
  return true;
}

DataMatrix parse_csv(const std::string& text, const CsvOptions& options) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw IngestionError("missing CSV header");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const std::vector<std::string> header = split_line(line);
  const std::size_t n = header.size();

  std::vector<std::vector<std::string>> cells(n);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto parts = split_line(line);
    if (parts.size() != n) {
      throw IngestionError("ragged row: expected " + std::to_string(n) + " cells, found " +
                               std::to_string(parts.size()) + " at row " + std::to_string(row + 1),
                           static_cast<long>(row), -1);
    }
    for (std::size_t c = 0; c < n; ++c) cells[c].push_back(std::move(parts[c]));
    ++row;
  }
  if (row == 0) throw IngestionError("CSV has no data rows");

  std::vector<ColumnSchema> schema;
  if (options.schema) {
    schema = *options.schema;
    if (schema.size() != n) {
      throw IngestionError("schema lists " + std::to_string(schema.size()) + " columns but CSV has " +
                           std::to_string(n));
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (schema[c].name.empty()) {
        schema[c].name = header[c];
      } else if (schema[c].name != header[c]) {
        throw IngestionError("schema column '" + schema[c].name + "' does not match header '" + header[c] + "'",
                             -1, static_cast<long>(c));
      }
    }
  }

  std::vector<std::vector<double>> values(n, std::vector<double>(row, 0.0));
  std::vector<std::vector<std::uint8_t>> missing(n, std::vector<std::uint8_t>(row, 0));
  for (std::size_t c = 0; c < n; ++c) {
    bool all_levels = true;
    bool any_present = false;
    std::set<double> levels;
    for (std::size_t r = 0; r < row; ++r) {
      const std::string& cell = cells[c][r];
      if (cell == options.missing_token || cell.empty()) {
        if (options.schema && !schema[c].missing_allowed) {
          throw IngestionError("missing value not allowed at " + coord(r, c, header[c]), static_cast<long>(r),
                               static_cast<long>(c));
        }
        missing[c][r] = 1;
        continue;
      }
      const auto v = parse_number(cell);
      if (!v) {
        throw IngestionError("unparseable cell '" + cell + "' at " + coord(r, c, header[c]), static_cast<long>(r),
                             static_cast<long>(c));
      }
      values[c][r] = *v;
      any_present = true;
      if (!is_level(*v)) {
        all_levels = false;
      } else if (all_levels) {
        levels.insert(*v);
      }
      if (options.schema && schema[c].is_discrete() &&
          (!is_level(*v) || *v >= static_cast<double>(schema[c].cardinality))) {
        throw IngestionError("discrete value '" + cell + "' out of alphabet at " + coord(r, c, header[c]),
                             static_cast<long>(r), static_cast<long>(c));
      }
    }
    if (!options.schema) {
      if (any_present && all_levels && levels.size() <= kMaxAutoLevels) {
        const auto k = static_cast<std::size_t>(*levels.rbegin()) + 1;
        schema.push_back(ColumnSchema::discrete(header[c], std::max<std::size_t>(2, k), true));
      } else {
        schema.push_back(ColumnSchema::continuous(header[c], true));
      }
    }
  }
  return DataMatrix(std::move(schema), std::move(values), std::move(missing));
}

DataMatrix load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), options);
}

std::vector<ColumnSchema> load_schema_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestionError("cannot open schema " + path.string());
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError(std::string("schema is not valid JSON: ") + e.what());
  }
  if (!doc.contains("columns") || !doc["columns"].is_array()) {
    throw IngestionError("schema must contain a 'columns' array");
  }
  std::vector<ColumnSchema> out;
  for (const auto& col : doc["columns"]) {
    const std::string kind = col.value("kind", "");
    const std::string name = col.value("name", "");
    const bool missing = col.value("missing_allowed", false);
    if (kind == "discrete") {
      const std::size_t k = col.value("cardinality", std::size_t{0});
      if (k < 2) throw IngestionError("discrete column '" + name + "' needs cardinality >= 2");
      out.push_back(ColumnSchema::discrete(name, k, missing));
    } else if (kind == "continuous") {
      out.push_back(ColumnSchema::continuous(name, missing));
    } else {
      throw IngestionError("unknown column kind '" + kind + "' for column '" + name + "'");
    }
  }
  return out;
}

std::string to_csv(const DataMatrix& data, const std::string& missing_token) {
  std::string out;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    if (c) out += ',';
    out += data.column_schema(c).name;
  }
  out += '\n';
  char buf[32];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      if (c) out += ',';
      if (data.is_missing(r, c)) {
        out += missing_token;
      } else if (data.column_schema(c).is_discrete()) {
        out += std::to_string(data.level(r, c));
      } else {
        std::snprintf(buf, sizeof buf, "%.17g", data.value(r, c));
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace corex
