#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "macchiato/grid.hpp"
#include "macchiato/stack.hpp"

namespace macchiato {

inline constexpr int kReportSchemaVersion = 1;

// A mask on disk is a pair of files: <stem>.json holds the header
// {dims, order: "row-major", dtype: "u8"|"f64", kind: "binary"|"soft"}
// and <stem>.raw the little-endian payload in declared order.
// Functions accept the stem, the .json path, or the .raw path.

void save_mask(const std::filesystem::path& stem, const BinaryMask& mask);
void save_mask(const std::filesystem::path& stem, const SoftMask& mask);

// The header stores no connectivity, so the caller supplies it.
BinaryMask load_binary_mask(const std::filesystem::path& stem,
                            Neighborhood neighborhood);
SoftMask load_soft_mask(const std::filesystem::path& stem,
                        Neighborhood neighborhood);

struct Manifest {
  std::string name;
  std::vector<std::int64_t> dims;
  Neighborhood neighborhood = Neighborhood::N4;
  std::vector<std::string> raters;  // paths relative to the manifest file
};

Manifest load_manifest(const std::filesystem::path& file);
void save_manifest(const std::filesystem::path& file, const Manifest& m);

RaterStack load_stack(const std::filesystem::path& manifest_file);
RaterStack load_stack(const Manifest& m, const std::filesystem::path& base_dir);

// Report/JSON helpers; writes go through a temp file and a rename.
nlohmann::json load_json(const std::filesystem::path& file);
void save_json_atomic(const std::filesystem::path& file,
                      const nlohmann::json& doc);
void save_bytes_atomic(const std::filesystem::path& file, const void* data,
                       std::size_t bytes);

}  // namespace macchiato
