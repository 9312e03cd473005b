#pragma once

#include <filesystem>
#include <string>

#include "corex/hierarchy.hpp"

namespace corex {

inline constexpr int kModelFormatVersion = 1;

/// A persisted hierarchy. Training labels and per-sample log Z are not stored;
/// everything transform needs is.
struct ModelFile {
  int format_version = kModelFormatVersion;
  HierarchyModel model;
  HierarchyConfig config;
};

std::string model_to_json(const ModelFile& file);
ModelFile model_from_json(const std::string& text);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

std::string truth_to_json(const GroundTruth& truth);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace corex
