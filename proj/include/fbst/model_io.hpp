#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "fbst/filter_bank.hpp"

namespace fbst {

/// Binary model layout (all integers and floats little-endian):
///
///   offset  size        field
///   0       4           magic "FBST"
///   4       4   u32     format version (currently 1)
///   8       4   u32     K  (filter size)
///   12      4   u32     N_c (channels)
///   16      4   u32     N_F (fft size)
///   20      8*N_c*K^2   W, float64, row-major (channel by channel)
///   end-4   4   u32     CRC-32 (zlib polynomial) of every preceding byte
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::string encode_model(const FilterBankTransform& transform);
FilterBankTransform decode_model(const std::string& bytes);

void save_model(const FilterBankTransform& transform, const std::filesystem::path& path);
FilterBankTransform load_model(const std::filesystem::path& path);

/// Ordered key=value pairs stored next to a model.
using ModelMetadata = std::vector<std::pair<std::string, std::string>>;

/// Sidecar path: the model path with ".meta" appended.
std::filesystem::path metadata_path(const std::filesystem::path& model_path);
void save_metadata(const ModelMetadata& metadata, const std::filesystem::path& path);
ModelMetadata load_metadata(const std::filesystem::path& path);

}  // namespace fbst
