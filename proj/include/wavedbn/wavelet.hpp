#pragma once

#include <array>
#include <string>
#include <vector>

#include "wavedbn/image.hpp"

namespace wavedbn {

/// Two-channel orthonormal analysis filter bank.
struct WaveletFilter {
    std::string name;
    std::vector<double> lowpass;
    std::vector<double> highpass;
};

/// Orthonormal Haar: lowpass [1/sqrt2, 1/sqrt2].
WaveletFilter haar();

/// Daubechies 4-tap (two vanishing moments).
WaveletFilter daubechies4();

/// Looks up a shipped filter by name ("haar" or "db4").
WaveletFilter filter_by_name(const std::string& name);

/// Checks even equal lengths and unit lowpass energy; throws ValidationError.
void validate_filter(const WaveletFilter& filter);

/// One level of the separable 2D DWT.
///
/// Band naming: the first letter is the filter applied along rows
/// (horizontal direction), the second the filter applied along columns.
/// So LH is lowpass across x and highpass across y. Rows are filtered first,
/// then columns, with periodic extension at the borders.
struct WaveletBands {
    Image ll;
    Image lh;
    Image hl;
    Image hh;
};

WaveletBands dwt2(const Image& img, const WaveletFilter& filter);

/// Inverse of dwt2. Exact (up to rounding) for orthonormal filters.
Image idwt2(const WaveletBands& bands, const WaveletFilter& filter);

inline constexpr std::size_t kSubbandCount = 16;

/// The 16 sub-bands of a full two-level decomposition.
///
/// Index j = 4 * a + b where a is the level-1 band and b the level-2 band of
/// that, each in the order LL, LH, HL, HH. Index 0 is LL.LL, index 5 is
/// LH.LH, index 15 is HH.HH.
struct SubbandSet {
    std::array<Image, kSubbandCount> subbands;
};

/// Applies dwt2, then dwt2 again to every one of the four level-1 bands
/// (not only LL). Requires both dimensions divisible by 4.
SubbandSet decompose_full_2level(const Image& img, const WaveletFilter& filter);

/// Human-readable name of sub-band j, e.g. "LH.HL".
std::string subband_name(std::size_t index);

} // namespace wavedbn
