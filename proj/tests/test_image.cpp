#include <gtest/gtest.h>

#include "support.hpp"
#include "wavedbn/error.hpp"
#include "wavedbn/image.hpp"

using namespace wavedbn;

TEST(Image, ConstructorChecksPixelCount)
{
    EXPECT_THROW(Image(2, 2, std::vector<double>{1, 2, 3}), ValidationError);
    EXPECT_THROW(Image(0, 3), ValidationError);
    EXPECT_THROW(Image(3, -1), ValidationError);
    const Image img(3, 2, 0.25);
    EXPECT_EQ(img.size(), 6u);
}

TEST(Normalize, EndpointsMapToEndpoints)
{
    const Image full = normalize(Image(3, 3, 255.0), {0.0, 255.0});
    for(double p : full.pixels)
        EXPECT_EQ(p, 1.0);
    const Image empty = normalize(Image(3, 3, 0.0), {0.0, 255.0});
    for(double p : empty.pixels)
        EXPECT_EQ(p, 0.0);

    const Image signed_range = normalize(Image(2, 1, std::vector<double>{-1.0, 1.0}), {-1.0, 1.0});
    EXPECT_EQ(signed_range.pixels[0], 0.0);
    EXPECT_EQ(signed_range.pixels[1], 1.0);
}

TEST(Normalize, ClampsOutOfRangeValues)
{
    const Image out = normalize(Image(3, 1, std::vector<double>{-5.0, 0.5, 7.0}), {0.0, 1.0});
    EXPECT_EQ(out.pixels, (std::vector<double>{0.0, 0.5, 1.0}));
}

TEST(Normalize, DegenerateRangeThrows)
{
    EXPECT_THROW(normalize(Image(2, 2, 3.0), {3.0, 3.0}), ValidationError);
    EXPECT_THROW(normalize(Image(2, 2, 3.0), {4.0, 3.0}), ValidationError);
}

TEST(Downsample, MeanOfTwoByTwoBlock)
{
    const Image out = downsample_2x(Image(2, 2, std::vector<double>{1, 3, 5, 7}));
    ASSERT_EQ(out.width, 1);
    ASSERT_EQ(out.height, 1);
    EXPECT_EQ(out.pixels[0], 4.0);
}

TEST(Downsample, ConstantImageStaysConstant)
{
    const Image out = downsample_2x(Image(128, 128, 0.3));
    EXPECT_EQ(out.width, 64);
    EXPECT_EQ(out.height, 64);
    for(double p : out.pixels)
        EXPECT_DOUBLE_EQ(p, 0.3);
}

TEST(Downsample, CheckerboardAveragesToHalf)
{
    Image board(4, 4);
    for(int y = 0; y < 4; ++y)
        for(int x = 0; x < 4; ++x)
            board.at(x, y) = (x + y) % 2;
    const Image out = downsample_2x(board);
    EXPECT_EQ(out.width, 2);
    for(double p : out.pixels)
        EXPECT_EQ(p, 0.5);
}

TEST(Downsample, OddDimensionThrows)
{
    EXPECT_THROW(downsample_2x(Image(3, 4)), ValidationError);
    EXPECT_THROW(downsample_2x(Image(4, 5)), ValidationError);
}

TEST(Flatten, RowMajorOrder)
{
    EXPECT_EQ(flatten(Image(2, 2, std::vector<double>{1, 2, 3, 4})), (std::vector<double>{1, 2, 3, 4}));
    EXPECT_EQ(flatten(Image(16, 16)).size(), 256u);
    EXPECT_EQ(flatten(Image(1, 1, 9.5)), std::vector<double>{9.5});

    Image img(3, 2);
    img.at(2, 1) = 7.0;
    EXPECT_EQ(flatten(img)[5], 7.0);
}
