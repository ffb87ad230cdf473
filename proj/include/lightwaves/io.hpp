#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "lightwaves/dataset.hpp"
#include "lightwaves/model.hpp"

namespace lightwaves {

/// Parses the sktime/UEA `.ts` text format (equal-length, numeric only).
/// Rejections throw ParseError carrying the 1-based line number.
TimeSeriesDataset parse_ts(std::istream& in, std::string name = {});
TimeSeriesDataset parse_ts_file(const std::filesystem::path& path);

// LWDS v1 layout, little-endian:
//   "LWDS" | u8 version=1 | u64 n | u64 C | u64 L | u64 K
//   | K x (u32 byte length, UTF-8 name) | n x u32 label | n*C*L x f64
// An unlabeled dataset has K = 0 and every label set to kUnlabeled.
inline constexpr std::uint8_t kBinaryVersion = 1;
inline constexpr std::uint32_t kUnlabeled = 0xFFFFFFFFu;

std::vector<std::uint8_t> write_binary_dataset(const TimeSeriesDataset& data);
TimeSeriesDataset read_binary_dataset(std::span<const std::uint8_t> bytes, std::string name = {});

void write_binary_dataset_file(const TimeSeriesDataset& data, const std::filesystem::path& path);

/// Loads `.ts` or LWDS, chosen by magic bytes.
TimeSeriesDataset load_dataset(const std::filesystem::path& path);

/// Loads only the given rows and channels [channel_begin, channel_end).
/// For LWDS files only the needed byte ranges are read.
TimeSeriesDataset load_dataset_slice(const std::filesystem::path& path,
                                     std::span<const std::size_t> rows, std::size_t channel_begin,
                                     std::size_t channel_end);

/// Model document: one UTF-8 JSON object. Reals are written in shortest
/// round-trip decimal form, so save/load/save is byte-identical.
std::string model_to_json(const ModelArtifact& model);
ModelArtifact model_from_json(std::string_view text);

void save_model(const ModelArtifact& model, const std::filesystem::path& path);
ModelArtifact load_model(const std::filesystem::path& path);

}  // namespace lightwaves
