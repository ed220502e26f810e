#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "scnn/api_builder.hpp"
#include "scnn/dataset.hpp"

namespace scnn::io {

struct ManifestRecord {
  /// Resolved against the manifest's directory when relative.
  std::filesystem::path path;
  std::string label;
  int class_index = -1;
};

struct Manifest {
  std::vector<std::string> classes;
  std::vector<ManifestRecord> records;
};

/// One "path<TAB>label" record per line; blank lines and lines starting with
/// '#' are skipped. Every label must be in `classes` and paths must be unique.
Manifest read_manifest(const std::filesystem::path& file, const std::vector<std::string>& classes);
/// Without a class list the classes are the labels in first-seen order.
Manifest read_manifest(const std::filesystem::path& file);

/// Writes paths relative to the manifest's directory when possible.
void write_manifest(const std::filesystem::path& file, const std::vector<ManifestRecord>& records);

/// Splits "a,b,c" and rejects empty or duplicate names.
std::vector<std::string> parse_class_list(const std::string& csv);

/// Loads every record: a directory becomes an action pattern image through
/// build_api, a file is read as a binary PGM.
std::vector<LabeledImage> load_dataset(const Manifest& manifest, const api::ApiOptions& options = {});

}  // namespace scnn::io
