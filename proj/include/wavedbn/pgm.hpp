#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "wavedbn/image.hpp"

namespace wavedbn {

/// A decoded PGM file. Pixels hold the raw sample values in [0, maxval].
struct PgmImage {
    Image image;
    int maxval = 255;
};

/// Parses P2 (ASCII) or P5 (binary) PGM data with maxval <= 65535.
/// `source` names the data in error messages. Throws IoError.
PgmImage parse_pgm(std::string_view bytes, const std::string& source);

PgmImage read_pgm(const std::filesystem::path& path);

/// Reads a PGM and maps its samples from [0, maxval] to [0, 1].
Image read_pgm_normalized(const std::filesystem::path& path);

/// Writes a binary P5 file. Pixel values are rounded and clamped to
/// [0, maxval].
void write_pgm(const std::filesystem::path& path, const Image& img, int maxval = 255);

} // namespace wavedbn
