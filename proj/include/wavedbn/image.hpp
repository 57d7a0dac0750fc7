#pragma once

#include <cstddef>
#include <vector>

namespace wavedbn {

/// Dense grayscale raster, row-major.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int w, int h, double fill = 0.0);
    Image(int w, int h, std::vector<double> data);

    double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
    double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

    std::size_t size() const { return pixels.size(); }

    friend bool operator==(const Image&, const Image&) = default;
};

/// Closed real interval used as the source range of pixel values.
struct ValueRange {
    double min = 0.0;
    double max = 1.0;
};

/// Maps pixels affinely from `source` onto [0,1]; values outside `source`
/// are clamped first. Throws ValidationError when source.min >= source.max.
Image normalize(const Image& img, ValueRange source);

/// Halves both dimensions by averaging each 2x2 block.
Image downsample_2x(const Image& img);

/// Row-major copy of the pixels.
std::vector<double> flatten(const Image& img);

} // namespace wavedbn
