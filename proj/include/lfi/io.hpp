#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "lfi/model.hpp"
#include "lfi/simulators.hpp"

namespace lfi::io {

using nlohmann::json;
namespace fs = std::filesystem;

inline constexpr const char* kDtype = "f64-le";

/// Flat little-endian IEEE-754 float64 file.
void write_f64_blob(const fs::path& path, std::span<const double> values);
std::vector<double> read_f64_blob(const fs::path& path, std::size_t expected_count);

void write_json(const fs::path& path, const json& doc);
json read_json(const fs::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const fs::path& path);
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_hex(const std::string& text);

json to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const json& j);

/// Writes `<json_path>` plus `<stem>.series.bin` ([item][channel][time]) and
/// `<stem>.params.bin` ([item][dim]) next to it.
void save_simbatch(const SimBatch& batch, const fs::path& json_path);
SimBatch load_simbatch(const fs::path& json_path);

/// Replaces the blob-file suffix of a sidecar path: "a/b.json" -> "a/b.<suffix>".
fs::path sibling(const fs::path& json_path, const std::string& suffix);

}  // namespace lfi::io
