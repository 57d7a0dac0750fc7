#include "wavedbn/image.hpp"

#include <algorithm>
#include <string>

#include "wavedbn/error.hpp"

namespace wavedbn {

Image::Image(int w, int h, double fill)
    : width(w), height(h)
{
    detail::require(w > 0 && h > 0, "image dimensions must be positive");
    pixels.assign(static_cast<std::size_t>(w) * h, fill);
}

Image::Image(int w, int h, std::vector<double> data)
    : width(w), height(h), pixels(std::move(data))
{
    detail::require(w > 0 && h > 0, "image dimensions must be positive");
    detail::require(pixels.size() == static_cast<std::size_t>(w) * h,
                    "pixel count " + std::to_string(pixels.size()) + " does not match "
                        + std::to_string(w) + "x" + std::to_string(h));
}

Image normalize(const Image& img, ValueRange source)
{
    if(!(source.min < source.max))
        throw ValidationError("degenerate normalization range: image is unusable");

    const double scale = 1.0 / (source.max - source.min);
    Image out = img;
    for(double& p : out.pixels)
        p = (std::clamp(p, source.min, source.max) - source.min) * scale;
    return out;
}

Image downsample_2x(const Image& img)
{
    if(img.width % 2 != 0 || img.height % 2 != 0)
        throw ValidationError("downsample_2x needs even dimensions, got "
                              + std::to_string(img.width) + "x" + std::to_string(img.height));

    Image out(img.width / 2, img.height / 2);
    for(int y = 0; y < out.height; ++y) {
        for(int x = 0; x < out.width; ++x) {
            const double sum = img.at(2 * x, 2 * y) + img.at(2 * x + 1, 2 * y)
                               + img.at(2 * x, 2 * y + 1) + img.at(2 * x + 1, 2 * y + 1);
            out.at(x, y) = 0.25 * sum;
        }
    }
    return out;
}

std::vector<double> flatten(const Image& img)
{
    return img.pixels;
}

} // namespace wavedbn
