#include "fbst/model_io.hpp"

#include <zlib.h>

#include <bit>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fbst/errors.hpp"
#include "fbst/pgm.hpp"

namespace fbst {
namespace {

constexpr std::size_t kHeaderBytes = 20;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

std::uint32_t get_u32(const std::string& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::string& in, std::size_t at) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + i])) << (8 * i);
  return v;
}

std::uint32_t crc_of(const std::string& bytes, std::size_t length) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(length));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string encode_model(const FilterBankTransform& transform) {
  std::string out = "FBST";
  put_u32(out, kModelFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(transform.filter_size()));
  put_u32(out, static_cast<std::uint32_t>(transform.num_channels()));
  put_u32(out, static_cast<std::uint32_t>(transform.fft_size()));
  const Eigen::MatrixXd& w = transform.weights();
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) put_u64(out, std::bit_cast<std::uint64_t>(w(i, j)));
  }
  put_u32(out, crc_of(out, out.size()));
  return out;
}

FilterBankTransform decode_model(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "FBST") != 0) {
    throw ModelFormatError(ModelErrorKind::bad_magic, "not a filter bank model (bad magic)");
  }
  if (bytes.size() < kHeaderBytes + 4) {
    throw ModelFormatError(ModelErrorKind::truncated, "model file truncated in header");
  }
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kModelFormatVersion) {
    throw ModelFormatError(ModelErrorKind::unsupported_version,
                           "unsupported model format version " + std::to_string(version));
  }
  const std::uint32_t k = get_u32(bytes, 8);
  const std::uint32_t channels = get_u32(bytes, 12);
  const std::uint32_t fft_size = get_u32(bytes, 16);
  if (k == 0 || channels == 0 || k > 4096 || channels > (1u << 20)) {
    throw ModelFormatError(ModelErrorKind::invalid_header, "model header has invalid dimensions");
  }
  const std::size_t taps = static_cast<std::size_t>(k) * k;
  const std::size_t expected = kHeaderBytes + 8 * taps * channels + 4;
  if (bytes.size() != expected) {
    throw ModelFormatError(ModelErrorKind::truncated,
                           "model size " + std::to_string(bytes.size()) + " does not match header (expected " +
                               std::to_string(expected) + ")");
  }
  const std::uint32_t stored_crc = get_u32(bytes, expected - 4);
  if (stored_crc != crc_of(bytes, expected - 4)) {
    throw ModelFormatError(ModelErrorKind::crc_mismatch, "model checksum mismatch (file corrupt)");
  }
  Eigen::MatrixXd w(channels, static_cast<Eigen::Index>(taps));
  std::size_t at = kHeaderBytes;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j, at += 8) w(i, j) = std::bit_cast<double>(get_u64(bytes, at));
  }
  try {
    return FilterBankTransform(std::move(w), fft_size);
  } catch (const ShapeError& e) {
    throw ModelFormatError(ModelErrorKind::invalid_header, e.what());
  }
}

void save_model(const FilterBankTransform& transform, const std::filesystem::path& path) {
  write_file_atomic(path, encode_model(transform));
}

FilterBankTransform load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open model " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_model(bytes);
}

std::filesystem::path metadata_path(const std::filesystem::path& model_path) {
  std::filesystem::path p = model_path;
  p += ".meta";
  return p;
}

void save_metadata(const ModelMetadata& metadata, const std::filesystem::path& path) {
  std::string text;
  for (const auto& [key, value] : metadata) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos) {
      throw ShapeError("metadata keys may not contain '=' or newlines: " + key);
    }
    text += key + '=' + value + '\n';
  }
  write_file_atomic(path, text);
}

ModelMetadata load_metadata(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open metadata " + path.string());
  }
  ModelMetadata out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw IoError("malformed metadata line: " + line);
    }
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

}  // namespace fbst
