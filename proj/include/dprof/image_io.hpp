#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "dprof/grid.hpp"

namespace dprof {

class ImageIoError : public std::runtime_error {
 public:
  enum class Kind { kNotFound, kMalformed, kUnsupported, kWriteFailed };

  ImageIoError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

const char* to_string(ImageIoError::Kind kind);

enum class ImageFormat { kPgm, kPng };

/// 8-bit grayscale PGM (P5, P2) or PNG mapped to [0, 1] by v / 255.
/// Color inputs (P6, RGB PNG) are averaged over channels.
ScalarField load_image(const std::filesystem::path& path);

/// Clamps to [0, 1] and stores round(255 v). PGM output is
/// "P5\n<W> <H>\n255\n" followed by W*H bytes.
void save_image(const ScalarField& field, const std::filesystem::path& path, ImageFormat format);

/// Comma-separated rows, full precision, no normalization.
void save_csv_matrix(const ScalarField& field, const std::filesystem::path& path);
ScalarField load_csv_matrix(const std::filesystem::path& path);

/// Dispatches on the extension: .pgm/.pnm, .png, .csv/.txt.
ScalarField load_field(const std::filesystem::path& path);
void save_field(const ScalarField& field, const std::filesystem::path& path);

enum class SyntheticKind { kSaw, kStep, kDoubleGradient };

SyntheticKind parse_synthetic_kind(const std::string& name);

struct SyntheticOptions {
  /// Number of jumps of the saw signal.
  int jumps = 6;
  /// Rise (or fall) of each linear ramp of the saw signal, at most 0.4.
  double ramp = 0.15;
};

/// saw, step: size x 1 signals. double_gradient: size x size image.
/// Throws std::invalid_argument when size < 16.
ScalarField make_synthetic(SyntheticKind kind, std::size_t size, const SyntheticOptions& options = {});

}  // namespace dprof
