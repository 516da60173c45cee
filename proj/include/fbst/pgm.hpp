#pragma once

#include <filesystem>
#include <string>

#include "fbst/image.hpp"

namespace fbst {

/// Reads a binary (P5) PGM. Samples are scaled to [0, 1] by dividing by maxval.
/// Both 8-bit and 16-bit (big-endian, maxval > 255) payloads are accepted.
Image load_pgm(const std::filesystem::path& path);

/// Parses an in-memory P5 image (same rules as load_pgm).
Image parse_pgm(const std::string& bytes);

/// Clamps to [0, 1], quantizes to 8 bits (round to nearest) and writes P5.
/// The file is written to a temporary sibling and renamed into place.
void save_pgm(const Image& image, const std::filesystem::path& path);

std::string encode_pgm(const Image& image);

/// Writes `contents` to `path` via a temporary file + rename so readers never
/// observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace fbst
