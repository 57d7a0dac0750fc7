#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "support.hpp"
#include "wavedbn/error.hpp"
#include "wavedbn/wavelet.hpp"

using namespace wavedbn;
using testing_support::random_image;

namespace {

double energy_of(const Image& img)
{
    return std::inner_product(img.pixels.begin(), img.pixels.end(), img.pixels.begin(), 0.0);
}

// Hand-evaluated orthonormal Haar on each 2x2 block (a b; c d). The first
// band letter is the filter applied along rows.
WaveletBands haar_by_blocks(const Image& img)
{
    const int w = img.width / 2, h = img.height / 2;
    WaveletBands out{Image(w, h), Image(w, h), Image(w, h), Image(w, h)};
    for(int y = 0; y < h; ++y)
        for(int x = 0; x < w; ++x) {
            const double a = img.at(2 * x, 2 * y), b = img.at(2 * x + 1, 2 * y);
            const double c = img.at(2 * x, 2 * y + 1), d = img.at(2 * x + 1, 2 * y + 1);
            out.ll.at(x, y) = (a + b + c + d) / 2.0;
            out.lh.at(x, y) = (a + b - c - d) / 2.0;
            out.hl.at(x, y) = (a - b + c - d) / 2.0;
            out.hh.at(x, y) = (a - b - c + d) / 2.0;
        }
    return out;
}

void expect_near(const Image& a, const Image& b, double tol)
{
    ASSERT_EQ(a.width, b.width);
    ASSERT_EQ(a.height, b.height);
    for(std::size_t i = 0; i < a.size(); ++i)
        ASSERT_NEAR(a.pixels[i], b.pixels[i], tol) << "pixel " << i;
}

} // namespace

TEST(WaveletFilter, ShippedFiltersAreOrthonormal)
{
    for(const WaveletFilter& f : {haar(), daubechies4()}) {
        EXPECT_EQ(f.lowpass.size(), f.highpass.size());
        EXPECT_EQ(f.lowpass.size() % 2, 0u);
        EXPECT_NEAR(std::inner_product(f.lowpass.begin(), f.lowpass.end(), f.lowpass.begin(), 0.0), 1.0, 1e-12);
        EXPECT_NO_THROW(validate_filter(f));
    }
    EXPECT_DOUBLE_EQ(haar().lowpass[0], 1.0 / std::sqrt(2.0));
    EXPECT_EQ(filter_by_name("haar").name, "haar");
    EXPECT_EQ(filter_by_name("db4").lowpass.size(), 4u);
    EXPECT_THROW(filter_by_name("sym8"), ValidationError);
}

TEST(WaveletFilter, RejectsMalformedFilters)
{
    EXPECT_THROW(validate_filter({"odd", {1.0}, {1.0}}), ValidationError);
    EXPECT_THROW(validate_filter({"unequal", {0.5, 0.5}, {0.5, -0.5, 0.0, 0.0}}), ValidationError);
    EXPECT_THROW(validate_filter({"unnormalized", {1.0, 1.0}, {1.0, -1.0}}), ValidationError);
}

TEST(Dwt2, ConstantImage)
{
    const WaveletBands b = dwt2(Image(8, 6, 3.0), haar());
    for(double p : b.ll.pixels)
        EXPECT_NEAR(p, 6.0, 1e-12);
    for(const Image* band : {&b.lh, &b.hl, &b.hh})
        for(double p : band->pixels)
            EXPECT_NEAR(p, 0.0, 1e-12);
}

TEST(Dwt2, SingleBlocks)
{
    const WaveletBands ones = dwt2(Image(2, 2, 1.0), haar());
    EXPECT_NEAR(ones.ll.pixels[0], 2.0, 1e-15);
    EXPECT_NEAR(ones.lh.pixels[0], 0.0, 1e-15);
    EXPECT_NEAR(ones.hl.pixels[0], 0.0, 1e-15);
    EXPECT_NEAR(ones.hh.pixels[0], 0.0, 1e-15);

    const WaveletBands corner = dwt2(Image(2, 2, std::vector<double>{1, 0, 0, 0}), haar());
    for(const Image* band : {&corner.ll, &corner.lh, &corner.hl, &corner.hh})
        EXPECT_NEAR(band->pixels[0], 0.5, 1e-15);
}

TEST(Dwt2, HaarMatchesBlockFormulas)
{
    Rng rng(11);
    for(int trial = 0; trial < 20; ++trial) {
        const Image img = random_image(2 * (1 + trial % 5), 2 * (1 + trial % 3), rng, -2.0, 3.0);
        const WaveletBands got = dwt2(img, haar());
        const WaveletBands want = haar_by_blocks(img);
        expect_near(got.ll, want.ll, 1e-12);
        expect_near(got.lh, want.lh, 1e-12);
        expect_near(got.hl, want.hl, 1e-12);
        expect_near(got.hh, want.hh, 1e-12);
    }
}

TEST(Dwt2, OddDimensionThrows)
{
    EXPECT_THROW(dwt2(Image(3, 4), haar()), ValidationError);
    EXPECT_THROW(dwt2(Image(4, 1), haar()), ValidationError);
}

TEST(Idwt2, KnownInverses)
{
    const Image zero = idwt2({Image(3, 2), Image(3, 2), Image(3, 2), Image(3, 2)}, haar());
    EXPECT_EQ(zero.width, 6);
    EXPECT_EQ(zero.height, 4);
    for(double p : zero.pixels)
        EXPECT_EQ(p, 0.0);

    const Image block = idwt2({Image(1, 1, 2.0), Image(1, 1), Image(1, 1), Image(1, 1)}, haar());
    for(double p : block.pixels)
        EXPECT_NEAR(p, 1.0, 1e-15);
}

TEST(Idwt2, MismatchedBandsThrow)
{
    EXPECT_THROW(idwt2({Image(2, 2), Image(2, 2), Image(2, 1), Image(2, 2)}, haar()), ValidationError);
}

TEST(Dwt2Property, PerfectReconstructionAndEnergy)
{
    Rng rng(2024);
    for(const WaveletFilter& f : {haar(), daubechies4()})
        for(int trial = 0; trial < 100; ++trial) {
            const int w = 2 * (1 + static_cast<int>(rng.uniform_index(12)));
            const int h = 2 * (1 + static_cast<int>(rng.uniform_index(12)));
            const Image img = random_image(w, h, rng, -1.0, 1.0);
            const WaveletBands b = dwt2(img, f);
            expect_near(idwt2(b, f), img, 1e-10);
            const double coeff_energy = energy_of(b.ll) + energy_of(b.lh) + energy_of(b.hl) + energy_of(b.hh);
            EXPECT_NEAR(coeff_energy, energy_of(img), 1e-8 * energy_of(img)) << f.name << " " << w << "x" << h;
        }
}

TEST(Dwt2Property, Linearity)
{
    Rng rng(5);
    for(int trial = 0; trial < 50; ++trial) {
        const Image x = random_image(8, 12, rng, -1.0, 1.0);
        const Image y = random_image(8, 12, rng, -1.0, 1.0);
        const double a = 4.0 * rng.uniform() - 2.0, c = 4.0 * rng.uniform() - 2.0;
        Image mix(8, 12);
        for(std::size_t i = 0; i < mix.size(); ++i)
            mix.pixels[i] = a * x.pixels[i] + c * y.pixels[i];
        for(const WaveletFilter& f : {haar(), daubechies4()}) {
            const WaveletBands bx = dwt2(x, f), by = dwt2(y, f), bm = dwt2(mix, f);
            const Image* parts[3][4] = {{&bx.ll, &bx.lh, &bx.hl, &bx.hh},
                                        {&by.ll, &by.lh, &by.hl, &by.hh},
                                        {&bm.ll, &bm.lh, &bm.hl, &bm.hh}};
            for(int band = 0; band < 4; ++band)
                for(std::size_t i = 0; i < parts[2][band]->size(); ++i)
                    ASSERT_NEAR(parts[2][band]->pixels[i],
                                a * parts[0][band]->pixels[i] + c * parts[1][band]->pixels[i], 1e-10);
        }
    }
}

TEST(Dwt2Property, Deterministic)
{
    Rng rng(9);
    const Image img = random_image(16, 16, rng);
    const WaveletBands a = dwt2(img, daubechies4()), b = dwt2(img, daubechies4());
    EXPECT_EQ(a.ll, b.ll);
    EXPECT_EQ(a.lh, b.lh);
    EXPECT_EQ(a.hl, b.hl);
    EXPECT_EQ(a.hh, b.hh);
    EXPECT_EQ(decompose_full_2level(img, haar()).subbands, decompose_full_2level(img, haar()).subbands);
}

TEST(Decompose, SizeLaw)
{
    const SubbandSet coil = decompose_full_2level(Image(64, 64), haar());
    ASSERT_EQ(coil.subbands.size(), 16u);
    for(const Image& band : coil.subbands) {
        EXPECT_EQ(band.width, 16);
        EXPECT_EQ(band.height, 16);
    }
    for(const Image& band : decompose_full_2level(Image(16, 16), haar()).subbands) {
        EXPECT_EQ(band.width, 4);
        EXPECT_EQ(band.height, 4);
    }
    for(const Image& band : decompose_full_2level(Image(12, 20), daubechies4()).subbands) {
        EXPECT_EQ(band.width, 3);
        EXPECT_EQ(band.height, 5);
    }
}

TEST(Decompose, ConstantImage)
{
    const SubbandSet set = decompose_full_2level(Image(16, 8, 0.75), haar());
    for(double p : set.subbands[0].pixels)
        EXPECT_NEAR(p, 3.0, 1e-12);
    for(std::size_t j = 1; j < kSubbandCount; ++j)
        for(double p : set.subbands[j].pixels)
            EXPECT_NEAR(p, 0.0, 1e-12) << "band " << j;
}

TEST(Decompose, CanonicalOrderIsDepthFirst)
{
    Rng rng(3);
    const Image img = random_image(8, 8, rng);
    const WaveletBands level1 = dwt2(img, haar());
    const SubbandSet set = decompose_full_2level(img, haar());
    const Image* parents[4] = {&level1.ll, &level1.lh, &level1.hl, &level1.hh};
    for(int a = 0; a < 4; ++a) {
        const WaveletBands child = dwt2(*parents[a], haar());
        EXPECT_EQ(set.subbands[4 * a + 0], child.ll);
        EXPECT_EQ(set.subbands[4 * a + 1], child.lh);
        EXPECT_EQ(set.subbands[4 * a + 2], child.hl);
        EXPECT_EQ(set.subbands[4 * a + 3], child.hh);
    }
    EXPECT_EQ(subband_name(0), "LL.LL");
    EXPECT_EQ(subband_name(1), "LL.LH");
    EXPECT_EQ(subband_name(4), "LH.LL");
    EXPECT_EQ(subband_name(15), "HH.HH");
}

TEST(Decompose, DimensionsMustBeMultiplesOfFour)
{
    EXPECT_THROW(decompose_full_2level(Image(6, 8), haar()), ValidationError);
    EXPECT_THROW(decompose_full_2level(Image(8, 10), haar()), ValidationError);
}

TEST(Decompose, EnergyIsPreservedAcrossSixteenBands)
{
    Rng rng(77);
    const Image img = random_image(32, 32, rng, -1.0, 1.0);
    double total = 0.0;
    for(const Image& band : decompose_full_2level(img, daubechies4()).subbands)
        total += energy_of(band);
    EXPECT_NEAR(total, energy_of(img), 1e-8 * energy_of(img));
}
