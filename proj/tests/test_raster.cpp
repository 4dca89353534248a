#include <catch2/catch_amalgamated.hpp>

#include "iecc/raster.hpp"
#include "support/synthetic.hpp"

using namespace iecc;

TEST_CASE("to_pixel_points preserves order and values") {
    RasterImage gray{1, 1, 1, {7}};
    auto pts = to_pixel_points(gray);
    REQUIRE(pts.size() == 1);
    REQUIRE(pts[0].dim == 1);
    REQUIRE(pts[0][0] == 7.0);

    RasterImage rgb{2, 1, 3, {1, 2, 3, 4, 5, 6}};
    auto rgb_pts = to_pixel_points(rgb);
    REQUIRE(rgb_pts.size() == 2);
    REQUIRE(rgb_pts[0].dim == 3);
    REQUIRE(rgb_pts[0][0] == 1.0);
    REQUIRE(rgb_pts[0][1] == 2.0);
    REQUIRE(rgb_pts[0][2] == 3.0);
    REQUIRE(rgb_pts[1][0] == 4.0);

    RasterImage zeros{2, 2, 1, {0, 0, 0, 0}};
    auto zpts = to_pixel_points(zeros);
    REQUIRE(zpts.size() == 4);
    for (const auto& p : zpts) REQUIRE(p[0] == 0.0);
}

TEST_CASE("pixel point roundtrip is lossless for both channel counts") {
    auto eng = rng::make_engine(42);
    for (int trial = 0; trial < 20; ++trial) {
        const int channels = trial % 2 == 0 ? 1 : 3;
        const auto w = std::uint32_t(1 + rng::uniform_index(eng, 9));
        const auto h = std::uint32_t(1 + rng::uniform_index(eng, 9));
        const RasterImage img = testsupport::random_raster(eng, w, h, channels);
        REQUIRE(from_pixel_points(to_pixel_points(img), w, h) == img);
    }
}

TEST_CASE("to_grayscale uses BT.601 weights") {
    RasterImage white{1, 1, 3, {255, 255, 255}};
    REQUIRE(to_grayscale(white).samples[0] == 255);
    RasterImage black{1, 1, 3, {0, 0, 0}};
    REQUIRE(to_grayscale(black).samples[0] == 0);
    RasterImage red{1, 1, 3, {255, 0, 0}};
    REQUIRE(to_grayscale(red).samples[0] == 76); // round(0.299 * 255)
}

TEST_CASE("to_grayscale rejects grayscale input") {
    RasterImage gray{1, 1, 1, {7}};
    REQUIRE_THROWS_AS(to_grayscale(gray), degenerate_input_error);
}

TEST_CASE("to_grayscale stays within one of the real-valued luma") {
    auto eng = rng::make_engine(7);
    const RasterImage img = testsupport::random_raster(eng, 16, 16, 3);
    const RasterImage gray = to_grayscale(img);
    for (std::size_t p = 0; p < gray.samples.size(); ++p) {
        const double y = 0.299 * img.samples[p * 3] + 0.587 * img.samples[p * 3 + 1] +
                         0.114 * img.samples[p * 3 + 2];
        REQUIRE(std::fabs(double(gray.samples[p]) - y) <= 0.5 + 1e-9);
    }
}

TEST_CASE("histogram counts values per channel") {
    RasterImage tens{2, 2, 1, {10, 10, 10, 10}};
    const Histogram h = histogram(tens);
    REQUIRE(h.bins[0][10] == 4);
    for (int v = 0; v < 256; ++v)
        if (v != 10) REQUIRE(h.bins[0][std::size_t(v)] == 0);

    RasterImage ends{2, 1, 1, {0, 255}};
    const Histogram h2 = histogram(ends);
    REQUIRE(h2.bins[0][0] == 1);
    REQUIRE(h2.bins[0][255] == 1);
}

TEST_CASE("histogram bins sum to the pixel count") {
    auto eng = rng::make_engine(99);
    for (int trial = 0; trial < 10; ++trial) {
        const int channels = trial % 2 == 0 ? 1 : 3;
        const auto w = std::uint32_t(1 + rng::uniform_index(eng, 30));
        const auto h = std::uint32_t(1 + rng::uniform_index(eng, 30));
        const RasterImage img = testsupport::random_raster(eng, w, h, channels);
        const Histogram hist = histogram(img);
        for (int c = 0; c < channels; ++c) {
            std::uint64_t sum = 0;
            for (auto count : hist.bins[std::size_t(c)]) sum += count;
            REQUIRE(sum == img.pixel_count());
        }
    }
}
