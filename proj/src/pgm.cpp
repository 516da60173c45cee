#include "fbst/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>
#include <system_error>

#include "fbst/errors.hpp"

namespace fbst {
namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::string& bytes) : bytes_(bytes) {}

  // Reads a decimal field, skipping whitespace and '#' comments before it.
  unsigned long next_field(const char* name) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) ++pos_;
    if (pos_ == start) {
      throw PgmParseError(PgmErrorKind::malformed_header,
                          std::string("PGM header: expected ") + name);
    }
    if (pos_ - start > 9) {
      throw PgmParseError(PgmErrorKind::malformed_header,
                          std::string("PGM header: ") + name + " out of range");
    }
    return std::stoul(bytes_.substr(start, pos_ - start));
  }

  // Exactly one whitespace byte separates maxval from the raster.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      throw PgmParseError(PgmErrorKind::malformed_header,
                          "PGM header: missing whitespace before raster");
    }
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(ch))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

Image parse_pgm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw PgmParseError(PgmErrorKind::unsupported_magic, "not a PGM file");
  }
  if (bytes[1] != '5') {
    throw PgmParseError(PgmErrorKind::unsupported_magic,
                        std::string("unsupported PGM magic P") + bytes[1] + " (only P5)");
  }
  HeaderReader header(bytes);
  const unsigned long width = header.next_field("width");
  const unsigned long height = header.next_field("height");
  const unsigned long maxval = header.next_field("maxval");
  if (width == 0 || height == 0) {
    throw PgmParseError(PgmErrorKind::malformed_header, "PGM header: zero dimension");
  }
  if (maxval == 0 || maxval > 65535) {
    throw PgmParseError(PgmErrorKind::malformed_header, "PGM header: maxval must be in [1, 65535]");
  }
  const std::size_t offset = header.payload_offset();
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  const std::size_t count = static_cast<std::size_t>(width) * height;
  const std::size_t needed = count * bytes_per_sample;
  if (bytes.size() < offset || bytes.size() - offset < needed) {
    throw PgmParseError(PgmErrorKind::truncated_payload,
                        "PGM payload truncated: expected " + std::to_string(needed) + " bytes, got " +
                            std::to_string(bytes.size() < offset ? 0 : bytes.size() - offset));
  }

  std::vector<double> samples(count);
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + offset);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    unsigned value = raw[i * bytes_per_sample];
    if (bytes_per_sample == 2) value = (value << 8) | raw[i * 2 + 1];
    samples[i] = static_cast<double>(value) * scale;
  }
  return Image(height, width, std::move(samples));
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

std::string encode_pgm(const Image& image) {
  std::ostringstream out;
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::string bytes = out.str();
  bytes.reserve(bytes.size() + image.size());
  for (double v : image.samples()) {
    const double clamped = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  return bytes;
}

void save_pgm(const Image& image, const std::filesystem::path& path) {
  write_file_atomic(path, encode_pgm(image));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      throw IoError("write failed: " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " to " + path.string());
  }
}

}  // namespace fbst
