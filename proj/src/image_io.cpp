#include "dprof/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

namespace dprof {

namespace {

using Kind = ImageIoError::Kind;

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageIoError(Kind::kNotFound, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

unsigned char quantize(double v) {
  return static_cast<unsigned char>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

// Netpbm header tokens, skipping whitespace and '#' comments.
class PnmCursor {
 public:
  explicit PnmCursor(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  std::size_t next_number(const std::string& path) {
    skip_space_and_comments();
    std::size_t value = 0;
    std::size_t digits = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      ++pos_;
      if (++digits > 9) break;
    }
    if (digits == 0 || digits > 9) {
      throw ImageIoError(Kind::kMalformed, "malformed PNM header in " + path);
    }
    return value;
  }

  // Exactly one whitespace byte separates the header from binary data.
  void end_header(const std::string& path) {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw ImageIoError(Kind::kMalformed, "malformed PNM header in " + path);
    }
    ++pos_;
  }

  std::size_t position() const { return pos_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 2;
};

ScalarField load_pnm(const std::vector<unsigned char>& bytes, const std::string& path) {
  if (bytes.size() < 2 || bytes[0] != 'P') {
    throw ImageIoError(Kind::kMalformed, "missing PNM magic in " + path);
  }
  const char magic = static_cast<char>(bytes[1]);
  if (magic != '5' && magic != '2' && magic != '6') {
    throw ImageIoError(Kind::kUnsupported, std::string("unsupported PNM type P") + magic);
  }
  PnmCursor cursor(bytes);
  const std::size_t width = cursor.next_number(path);
  const std::size_t height = cursor.next_number(path);
  const std::size_t maxval = cursor.next_number(path);
  if (width == 0 || height == 0 || maxval == 0) {
    throw ImageIoError(Kind::kMalformed, "malformed PNM header in " + path);
  }
  if (maxval != 255) {
    throw ImageIoError(Kind::kUnsupported,
                       "unsupported bit depth (maxval " + std::to_string(maxval) + ") in " + path);
  }

  std::vector<double> values(width * height);
  if (magic == '2') {
    for (double& v : values) v = static_cast<double>(cursor.next_number(path)) / 255.0;
    return ScalarField(height, width, std::move(values));
  }
  cursor.end_header(path);
  const std::size_t channels = magic == '6' ? 3 : 1;
  const std::size_t offset = cursor.position();
  if (bytes.size() - offset < values.size() * channels) {
    throw ImageIoError(Kind::kMalformed, "truncated pixel data in " + path);
  }
  for (std::size_t k = 0; k < values.size(); ++k) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += bytes[offset + k * channels + c];
    values[k] = sum / static_cast<double>(channels) / 255.0;
  }
  return ScalarField(height, width, std::move(values));
}

ScalarField load_png(const std::vector<unsigned char>& bytes, const std::string& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw ImageIoError(Kind::kMalformed, "malformed PNG in " + path + ": " + image.message);
  }
  if ((image.format & PNG_FORMAT_FLAG_LINEAR) != 0) {
    png_image_free(&image);
    throw ImageIoError(Kind::kUnsupported, "unsupported bit depth (16-bit PNG) in " + path);
  }
  const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
  image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  const std::size_t channels = color ? 3 : 1;
  std::vector<unsigned char> pixels(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, pixels.data(), 0, nullptr)) {
    throw ImageIoError(Kind::kMalformed, "malformed PNG in " + path + ": " + image.message);
  }
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) sum += pixels[k * channels + c];
    values[k] = sum / static_cast<double>(channels) / 255.0;
  }
  return ScalarField(image.height, image.width, std::move(values));
}

std::string lowercase_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

}  // namespace

const char* to_string(ImageIoError::Kind kind) {
  switch (kind) {
    case Kind::kNotFound:
      return "not_found";
    case Kind::kMalformed:
      return "malformed";
    case Kind::kUnsupported:
      return "unsupported";
    case Kind::kWriteFailed:
      return "write_failed";
  }
  return "unknown";
}

ScalarField load_image(const std::filesystem::path& path) {
  const auto bytes = read_bytes(path);
  static constexpr std::array<unsigned char, 8> kPngMagic{0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= kPngMagic.size() && std::equal(kPngMagic.begin(), kPngMagic.end(), bytes.begin())) {
    return load_png(bytes, path.string());
  }
  return load_pnm(bytes, path.string());
}

void save_image(const ScalarField& field, const std::filesystem::path& path, ImageFormat format) {
  if (field.empty() || !field.is_finite()) {
    throw std::invalid_argument("save_image: field must be nonempty and finite");
  }
  std::vector<unsigned char> pixels(field.size());
  for (std::size_t k = 0; k < field.size(); ++k) pixels[k] = quantize(field[k]);

  if (format == ImageFormat::kPgm) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageIoError(Kind::kWriteFailed, "cannot write " + path.string());
    out << "P5\n" << field.cols() << ' ' << field.rows() << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw ImageIoError(Kind::kWriteFailed, "cannot write " + path.string());
    return;
  }

  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(field.cols());
  image.height = static_cast<png_uint_32>(field.rows());
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, pixels.data(), 0, nullptr)) {
    throw ImageIoError(Kind::kWriteFailed, "cannot write " + path.string() + ": " + image.message);
  }
}

void save_csv_matrix(const ScalarField& field, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ImageIoError(Kind::kWriteFailed, "cannot write " + path.string());
  char buf[32];
  for (std::size_t i = 0; i < field.rows(); ++i) {
    for (std::size_t j = 0; j < field.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", field(i, j));
      if (j > 0) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ImageIoError(Kind::kWriteFailed, "cannot write " + path.string());
}

ScalarField load_csv_matrix(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ImageIoError(Kind::kNotFound, "cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t count = 0;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || !std::isfinite(v)) {
        throw ImageIoError(Kind::kMalformed, "bad CSV value '" + cell + "' in " + path.string());
      }
      values.push_back(v);
      ++count;
    }
    if (rows == 0) {
      cols = count;
    } else if (count != cols) {
      throw ImageIoError(Kind::kMalformed, "ragged CSV rows in " + path.string());
    }
    ++rows;
  }
  if (rows == 0) throw ImageIoError(Kind::kMalformed, "empty CSV file " + path.string());
  return ScalarField(rows, cols, std::move(values));
}

ScalarField load_field(const std::filesystem::path& path) {
  const std::string ext = lowercase_extension(path);
  if (ext == ".csv" || ext == ".txt") return load_csv_matrix(path);
  return load_image(path);
}

void save_field(const ScalarField& field, const std::filesystem::path& path) {
  const std::string ext = lowercase_extension(path);
  if (ext == ".csv" || ext == ".txt") {
    save_csv_matrix(field, path);
  } else if (ext == ".png") {
    save_image(field, path, ImageFormat::kPng);
  } else if (ext == ".pgm" || ext == ".pnm") {
    save_image(field, path, ImageFormat::kPgm);
  } else {
    throw ImageIoError(Kind::kUnsupported, "unknown output extension '" + ext + "'");
  }
}

SyntheticKind parse_synthetic_kind(const std::string& name) {
  if (name == "saw") return SyntheticKind::kSaw;
  if (name == "step") return SyntheticKind::kStep;
  if (name == "double_gradient" || name == "double-gradient") return SyntheticKind::kDoubleGradient;
  throw std::invalid_argument("unknown synthetic kind '" + name + "'");
}

ScalarField make_synthetic(SyntheticKind kind, std::size_t size, const SyntheticOptions& options) {
  if (size < 16) throw std::invalid_argument("synthetic size must be at least 16");

  switch (kind) {
    case SyntheticKind::kStep: {
      std::vector<double> v(size, 0.0);
      std::fill(v.begin() + static_cast<std::ptrdiff_t>(size / 2), v.end(), 1.0);
      return ScalarField::signal(std::move(v));
    }
    case SyntheticKind::kSaw: {
      if (options.jumps < 1) throw std::invalid_argument("saw needs at least one jump");
      const auto segments = static_cast<std::size_t>(options.jumps) + 1;
      if (size < 2 * segments) throw std::invalid_argument("saw: too many jumps for the size");
      if (!(options.ramp >= 0.0 && options.ramp <= 0.4)) {
        throw std::invalid_argument("saw: ramp must lie in [0, 0.4]");
      }
      // Ramps of alternating sign alternate with jumps cycling through 0.5, 0.3,
      // 0.2 with alternating sign. The levels repeat every six jumps and span
      // [start - 0.1, start + 0.5 + ramp], centred inside [0, 1].
      static constexpr std::array<double, 3> kHeights{0.5, 0.3, 0.2};
      const std::size_t base_len = size / segments;
      std::vector<double> v;
      v.reserve(size);
      double level = 0.1 + (0.4 - options.ramp) / 2.0;
      for (std::size_t s = 0; s < segments; ++s) {
        const std::size_t len = s + 1 == segments ? size - base_len * s : base_len;
        const double rise = s % 2 == 0 ? options.ramp : -options.ramp;
        for (std::size_t t = 0; t < len; ++t) {
          const double x = level + rise * static_cast<double>(t) / static_cast<double>(len - 1);
          v.push_back(std::clamp(x, 0.0, 1.0));
        }
        level += rise;
        if (s + 1 < segments) {
          const double jump = kHeights[s % kHeights.size()];
          level += s % 2 == 0 ? jump : -jump;
        }
      }
      return ScalarField::signal(std::move(v));
    }
    case SyntheticKind::kDoubleGradient: {
      // Outer square: ramp 0 -> 1 along columns. Inner square: the reversed
      // ramp, so the inner/outer contrast varies along the inner boundary and
      // vanishes at the middle column.
      ScalarField f(size, size, 0.0);
      const std::size_t lo = size / 4;
      const std::size_t hi = size - size / 4;
      const double denom = static_cast<double>(size - 1);
      for (std::size_t i = 0; i < size; ++i) {
        for (std::size_t j = 0; j < size; ++j) {
          const double ramp = static_cast<double>(j) / denom;
          const bool inner = i >= lo && i < hi && j >= lo && j < hi;
          f(i, j) = inner ? 1.0 - ramp : ramp;
        }
      }
      return f;
    }
  }
  throw std::invalid_argument("unknown synthetic kind");
}

}  // namespace dprof
