#include "wavedbn/wavelet.hpp"

#include <cmath>
#include <span>

#include "wavedbn/error.hpp"

namespace wavedbn {

namespace {

// Quadrature mirror: g[k] = (-1)^k h[L-1-k].
std::vector<double> mirror(const std::vector<double>& lowpass)
{
    const std::size_t n = lowpass.size();
    std::vector<double> highpass(n);
    for(std::size_t k = 0; k < n; ++k)
        highpass[k] = (k % 2 == 0 ? 1.0 : -1.0) * lowpass[n - 1 - k];
    return highpass;
}

void analyze(std::span<const double> signal, const WaveletFilter& f,
             std::span<double> approx, std::span<double> detail)
{
    const std::size_t n = signal.size();
    const std::size_t taps = f.lowpass.size();
    for(std::size_t i = 0; i < n / 2; ++i) {
        double a = 0.0;
        double d = 0.0;
        for(std::size_t k = 0; k < taps; ++k) {
            const double x = signal[(2 * i + k) % n];
            a += f.lowpass[k] * x;
            d += f.highpass[k] * x;
        }
        approx[i] = a;
        detail[i] = d;
    }
}

void synthesize(std::span<const double> approx, std::span<const double> detail,
                const WaveletFilter& f, std::span<double> signal)
{
    const std::size_t n = signal.size();
    const std::size_t taps = f.lowpass.size();
    std::fill(signal.begin(), signal.end(), 0.0);
    for(std::size_t i = 0; i < n / 2; ++i)
        for(std::size_t k = 0; k < taps; ++k)
            signal[(2 * i + k) % n] += f.lowpass[k] * approx[i] + f.highpass[k] * detail[i];
}

void require_even(const Image& img, const char* what)
{
    if(img.width % 2 != 0 || img.height % 2 != 0)
        throw ValidationError(std::string(what) + " needs even dimensions, got "
                              + std::to_string(img.width) + "x" + std::to_string(img.height));
}

} // namespace

WaveletFilter haar()
{
    const double s = 1.0 / std::sqrt(2.0);
    WaveletFilter f{"haar", {s, s}, {}};
    f.highpass = mirror(f.lowpass);
    return f;
}

WaveletFilter daubechies4()
{
    const double r3 = std::sqrt(3.0);
    const double norm = 4.0 * std::sqrt(2.0);
    WaveletFilter f{"db4", {(1 + r3) / norm, (3 + r3) / norm, (3 - r3) / norm, (1 - r3) / norm}, {}};
    f.highpass = mirror(f.lowpass);
    return f;
}

WaveletFilter filter_by_name(const std::string& name)
{
    if(name == "haar")
        return haar();
    if(name == "db4")
        return daubechies4();
    throw ValidationError("unknown wavelet filter '" + name + "' (expected haar or db4)");
}

void validate_filter(const WaveletFilter& filter)
{
    const auto n = filter.lowpass.size();
    if(n == 0 || n % 2 != 0 || filter.highpass.size() != n)
        throw ValidationError("wavelet filter '" + filter.name + "' must have equal even-length lowpass and highpass");

    double energy = 0.0;
    for(double c : filter.lowpass)
        energy += c * c;
    if(std::abs(energy - 1.0) > 1e-12)
        throw ValidationError("wavelet filter '" + filter.name + "' lowpass is not unit-norm");
}

WaveletBands dwt2(const Image& img, const WaveletFilter& filter)
{
    require_even(img, "dwt2");
    const int w = img.width;
    const int h = img.height;
    const int hw = w / 2;
    const int hh = h / 2;

    // Row pass: left half lowpass, right half highpass.
    Image rows(w, h);
    for(int y = 0; y < h; ++y) {
        std::span<const double> in(img.pixels.data() + static_cast<std::size_t>(y) * w, w);
        std::span<double> out(rows.pixels.data() + static_cast<std::size_t>(y) * w, w);
        analyze(in, filter, out.first(hw), out.subspan(hw));
    }

    WaveletBands bands{Image(hw, hh), Image(hw, hh), Image(hw, hh), Image(hw, hh)};
    std::vector<double> column(h);
    std::vector<double> lo(hh);
    std::vector<double> hi(hh);
    for(int x = 0; x < w; ++x) {
        for(int y = 0; y < h; ++y)
            column[y] = rows.at(x, y);
        analyze(column, filter, lo, hi);

        const bool row_low = x < hw;
        const int bx = row_low ? x : x - hw;
        Image& low_band = row_low ? bands.ll : bands.hl;
        Image& high_band = row_low ? bands.lh : bands.hh;
        for(int y = 0; y < hh; ++y) {
            low_band.at(bx, y) = lo[y];
            high_band.at(bx, y) = hi[y];
        }
    }
    return bands;
}

Image idwt2(const WaveletBands& bands, const WaveletFilter& filter)
{
    const int hw = bands.ll.width;
    const int hh = bands.ll.height;
    for(const Image* b : {&bands.lh, &bands.hl, &bands.hh}) {
        if(b->width != hw || b->height != hh)
            throw ValidationError("idwt2 bands have mismatched dimensions");
    }

    const int w = 2 * hw;
    const int h = 2 * hh;

    Image rows(w, h);
    std::vector<double> lo(hh);
    std::vector<double> hi(hh);
    std::vector<double> column(h);
    for(int x = 0; x < w; ++x) {
        const bool row_low = x < hw;
        const int bx = row_low ? x : x - hw;
        const Image& low_band = row_low ? bands.ll : bands.hl;
        const Image& high_band = row_low ? bands.lh : bands.hh;
        for(int y = 0; y < hh; ++y) {
            lo[y] = low_band.at(bx, y);
            hi[y] = high_band.at(bx, y);
        }
        synthesize(lo, hi, filter, column);
        for(int y = 0; y < h; ++y)
            rows.at(x, y) = column[y];
    }

    Image out(w, h);
    for(int y = 0; y < h; ++y) {
        std::span<const double> in(rows.pixels.data() + static_cast<std::size_t>(y) * w, w);
        std::span<double> row(out.pixels.data() + static_cast<std::size_t>(y) * w, w);
        synthesize(in.first(hw), in.subspan(hw), filter, row);
    }
    return out;
}

SubbandSet decompose_full_2level(const Image& img, const WaveletFilter& filter)
{
    if(img.width % 4 != 0 || img.height % 4 != 0)
        throw ValidationError("full 2-level decomposition needs dimensions divisible by 4, got "
                              + std::to_string(img.width) + "x" + std::to_string(img.height));

    const WaveletBands level1 = dwt2(img, filter);
    SubbandSet set;
    std::size_t j = 0;
    for(const Image* band : {&level1.ll, &level1.lh, &level1.hl, &level1.hh}) {
        WaveletBands level2 = dwt2(*band, filter);
        set.subbands[j++] = std::move(level2.ll);
        set.subbands[j++] = std::move(level2.lh);
        set.subbands[j++] = std::move(level2.hl);
        set.subbands[j++] = std::move(level2.hh);
    }
    return set;
}

std::string subband_name(std::size_t index)
{
    static const char* names[] = {"LL", "LH", "HL", "HH"};
    if(index >= kSubbandCount)
        throw ValidationError("sub-band index out of range");
    return std::string(names[index / 4]) + "." + names[index % 4];
}

} // namespace wavedbn
