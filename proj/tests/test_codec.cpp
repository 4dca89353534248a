#include <catch2/catch_amalgamated.hpp>

#include "iecc/codec.hpp"
#include "iecc/metrics.hpp"
#include "support/synthetic.hpp"

using namespace iecc;

namespace {

ClusterConfig config_for(int k, std::uint64_t seed = 1) {
    ClusterConfig c;
    c.algorithm = Algorithm::kmeanspp;
    c.k = k;
    c.seed = seed;
    return c;
}

// The hand-built 2x1 grayscale container: K=2, palette {10, 20}, external
// palette tag, seed 0, index bits "10" packed MSB-first.
const std::vector<std::uint8_t> golden_bytes = {
    'I',  'E',  'C',  'C',        // magic
    0x01,                         // version
    0x02, 0x00, 0x00, 0x00,       // width = 2
    0x01, 0x00, 0x00, 0x00,       // height = 1
    0x01,                         // channels
    0x02, 0x00,                   // K = 2
    0xFF,                         // external palette tag
    0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, // seed
    0x0A, 0x14,                   // palette {10, 20}
    0x80,                         // indices "10" -> 0b1000'0000
};

} // namespace

TEST_CASE("bits_per_index is ceil(log2 K) with a floor of one bit") {
    REQUIRE(bits_per_index(1) == 1);
    REQUIRE(bits_per_index(2) == 1);
    REQUIRE(bits_per_index(3) == 2);
    REQUIRE(bits_per_index(4) == 2);
    REQUIRE(bits_per_index(5) == 3);
    REQUIRE(bits_per_index(16) == 4);
    REQUIRE(bits_per_index(17) == 5);
    REQUIRE(bits_per_index(256) == 8);
}

TEST_CASE("compression ratio reproduces the reference table in the large-n limit") {
    REQUIRE(compression_ratio(4096, 4096, 1, 4) == Catch::Approx(4.0).margin(0.01));
    REQUIRE(compression_ratio(4096, 4096, 1, 8) == Catch::Approx(2.67).margin(0.01));
    REQUIRE(compression_ratio(4096, 4096, 1, 16) == Catch::Approx(2.0).margin(0.01));
    REQUIRE(compression_ratio(4096, 4096, 1, 32) == Catch::Approx(1.6).margin(0.01));
}

TEST_CASE("compression ratio evaluates the formula exactly") {
    REQUIRE(compression_ratio(10, 10, 1, 4) == 800.0 / 232.0);
    REQUIRE(compression_ratio(512, 512, 1, 16) == Catch::Approx(2.0).margin(0.01));
    REQUIRE_THROWS_AS(compression_ratio(8, 8, 1, 1), degenerate_input_error);
}

TEST_CASE("encode is lossless when the palette covers every color") {
    const RasterImage img = testsupport::two_tone_image(4, 4);
    const CompressedImage c = encode(img, config_for(2));
    REQUIRE(decode(c) == img);
    REQUIRE(mse(img, decode(c)) == 0.0);
}

TEST_CASE("encode of a single pixel with K=1") {
    RasterImage img{1, 1, 1, {133}};
    ClusterConfig cfg = config_for(2);
    cfg.k = 1;
    const CompressedImage c = encode(img, cfg);
    REQUIRE(c.k == 1);
    REQUIRE(c.indices.bits == 1);
    REQUIRE(c.palette.entries == std::vector<std::uint8_t>{133});
    REQUIRE(decode(c) == img);
}

TEST_CASE("encode rejects K above the distinct-color count, naming both") {
    const RasterImage img = testsupport::two_tone_image(4, 4);
    try {
        encode(img, config_for(3));
        FAIL("expected degenerate_input_error");
    } catch (const degenerate_input_error& e) {
        const std::string msg = e.what();
        REQUIRE(msg.find("K=3") != std::string::npos);
        REQUIRE(msg.find("distinct colors=2") != std::string::npos);
    }
    ClusterConfig big = config_for(2);
    big.k = 300;
    REQUIRE_THROWS_AS(encode(img, big), degenerate_input_error);
}

TEST_CASE("golden container decodes to the documented pixels") {
    const CompressedImage c = deserialize(golden_bytes);
    REQUIRE(c.width == 2);
    REQUIRE(c.height == 1);
    REQUIRE(c.k == 2);
    const RasterImage img = decode(c);
    REQUIRE(img.samples == std::vector<std::uint8_t>{20, 10});
    REQUIRE(serialize(c) == golden_bytes);

    CompressedImage built;
    built.width = 2;
    built.height = 1;
    built.channels = 1;
    built.k = 2;
    built.algorithm_tag = external_palette_tag;
    built.seed = 0;
    built.palette = Palette{1, {10, 20}};
    built.indices = IndexPlane{2, 1, 1, {0x80}};
    REQUIRE(serialize(built) == golden_bytes);
}

TEST_CASE("re-encoding a decoded image against the same palette is idempotent") {
    auto eng = rng::make_engine(8);
    const RasterImage img = testsupport::random_limited_raster(eng, 8, 8, 3, 20);
    const CompressedImage first = encode(img, config_for(4, 3));
    Centroids palette_centroids;
    for (int k = 0; k < first.k; ++k) {
        PixelPoint p;
        p.dim = 3;
        for (int d = 0; d < 3; ++d) p.coords[std::size_t(d)] = first.palette.value(k, d);
        palette_centroids.points.push_back(p);
    }
    const CompressedImage again = encode_with_palette(decode(first), palette_centroids);
    REQUIRE(again.indices.packed == first.indices.packed);
}

TEST_CASE("roundtrip keeps dimensions and maps every pixel into the palette") {
    auto eng = rng::make_engine(2718);
    for (int trial = 0; trial < 40; ++trial) {
        const auto w = std::uint32_t(1 + rng::uniform_index(eng, 24));
        const auto h = std::uint32_t(1 + rng::uniform_index(eng, 24));
        const int channels = trial % 2 == 0 ? 1 : 3;
        const int k = 2 + int(rng::uniform_index(eng, 7));
        const RasterImage img =
            testsupport::random_limited_raster(eng, w, h, channels, k + int(rng::uniform_index(eng, 6)));
        CompressedImage c;
        try {
            c = encode(img, config_for(k, 100 + std::uint64_t(trial)));
        } catch (const degenerate_input_error&) {
            REQUIRE(count_distinct_colors(img) < std::size_t(k));
            continue;
        }
        const RasterImage back = decode(c);
        REQUIRE(back.width == img.width);
        REQUIRE(back.height == img.height);
        REQUIRE(back.channels == img.channels);
        for (std::size_t p = 0; p < back.pixel_count(); ++p) {
            bool in_palette = false;
            for (int e = 0; e < c.k && !in_palette; ++e) {
                bool same = true;
                for (int d = 0; d < img.channels; ++d)
                    same = same && back.samples[p * img.channels + d] == c.palette.value(e, d);
                in_palette = same;
            }
            REQUIRE(in_palette);
        }
        if (count_distinct_colors(img) == std::size_t(k)) REQUIRE(back == img);
    }
}

TEST_CASE("serialize and deserialize are inverse") {
    auto eng = rng::make_engine(31415);
    for (int trial = 0; trial < 20; ++trial) {
        const int channels = trial % 2 == 0 ? 1 : 3;
        const RasterImage img = testsupport::random_limited_raster(eng, 6, 5, channels, 30);
        const int k = std::min<int>(5, int(count_distinct_colors(img)));
        const CompressedImage c = encode(img, config_for(k, std::uint64_t(trial)));
        const auto bytes = serialize(c);
        REQUIRE(deserialize(bytes) == c);
        REQUIRE(serialize(deserialize(bytes)) == bytes);
    }
}

TEST_CASE("deserialize rejects malformed containers with distinct categories") {
    using kind = malformed_container_error::kind;
    const auto check_kind = [](const std::vector<std::uint8_t>& bytes, kind expected) {
        try {
            deserialize(bytes);
            FAIL("expected malformed_container_error");
        } catch (const malformed_container_error& e) {
            REQUIRE(e.category() == expected);
        }
    };

    auto bad_magic = golden_bytes;
    bad_magic[0] = 'X';
    check_kind(bad_magic, kind::bad_magic);

    auto bad_version = golden_bytes;
    bad_version[4] = 9;
    check_kind(bad_version, kind::unsupported_version);

    auto truncated = golden_bytes;
    truncated.resize(golden_bytes.size() - 1);
    check_kind(truncated, kind::truncated);
    check_kind({'I', 'E'}, kind::truncated);

    auto trailing = golden_bytes;
    trailing.push_back(0);
    check_kind(trailing, kind::inconsistent_length);

    // K=5 needs 3 bits; craft an index value 7 in the first field.
    CompressedImage wide;
    wide.width = 2;
    wide.height = 1;
    wide.channels = 1;
    wide.k = 5;
    wide.algorithm_tag = external_palette_tag;
    wide.palette = Palette{1, {1, 2, 3, 4, 5}};
    wide.indices = IndexPlane{2, 1, 3, {0b11100000}};
    check_kind(serialize(wide), kind::index_out_of_range);
    REQUIRE_THROWS_AS(decode(wide), malformed_container_error);
}

TEST_CASE("container size matches the palette plus packed-index accounting") {
    auto eng = rng::make_engine(99);
    for (int trial = 0; trial < 10; ++trial) {
        const int channels = trial % 2 == 0 ? 1 : 3;
        const auto w = std::uint32_t(1 + rng::uniform_index(eng, 40));
        const auto h = std::uint32_t(1 + rng::uniform_index(eng, 40));
        const RasterImage img = testsupport::random_raster(eng, w, h, channels);
        const int k = int(std::min<std::size_t>(9, count_distinct_colors(img)));
        const CompressedImage c = encode(img, config_for(k, std::uint64_t(trial)));
        const std::size_t expected = container_header_size + std::size_t(k) * channels +
                                     packed_index_bytes(w, h, bits_per_index(k));
        REQUIRE(serialize(c).size() == expected);
    }
}

TEST_CASE("encode_with_palette matches encode when trained on the same image") {
    auto eng = rng::make_engine(5);
    const RasterImage img = testsupport::random_limited_raster(eng, 10, 10, 1, 15);
    const ClusterConfig cfg = config_for(4, 77);
    const CompressedImage direct = encode(img, cfg);
    const ClusterOutcome outcome = run_clustering(to_pixel_points(img), cfg);
    const CompressedImage shared = encode_with_palette(img, outcome.centroids);
    REQUIRE(shared.indices.packed == direct.indices.packed);
    REQUIRE(shared.palette.entries == direct.palette.entries);
}

TEST_CASE("encode_with_palette maps an all-zero image to index zero") {
    const RasterImage img = testsupport::constant_image(3, 3, 1, 0);
    Centroids c;
    c.points = {PixelPoint{{0, 0, 0}, 1}, PixelPoint{{255, 0, 0}, 1}};
    const CompressedImage out = encode_with_palette(img, c);
    const auto idx = unpack_indices(out.indices.packed, img.pixel_count(), out.indices.bits);
    for (auto v : idx) REQUIRE(v == 0);
}

TEST_CASE("encode_with_palette rejects mismatched centroid dimensions") {
    const RasterImage img = testsupport::constant_image(2, 2, 3, 9);
    Centroids c;
    c.points = {PixelPoint{{0, 0, 0}, 1}};
    REQUIRE_THROWS_AS(encode_with_palette(img, c), shape_mismatch_error);
}

TEST_CASE("assignments are distortion-optimal against the unrounded centroids") {
    auto eng = rng::make_engine(64);
    const RasterImage img = testsupport::random_raster(eng, 12, 12, 3);
    const ClusterConfig cfg = config_for(6, 13);
    const CompressedImage c = encode(img, cfg);
    const ClusterOutcome outcome = run_clustering(to_pixel_points(img), cfg);
    const auto idx = unpack_indices(c.indices.packed, img.pixel_count(), c.indices.bits);
    const auto pts = to_pixel_points(img);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double chosen = squared_distance(pts[i], outcome.centroids.points[idx[i]]);
        for (const auto& other : outcome.centroids.points)
            REQUIRE(chosen <= squared_distance(pts[i], other) + 1e-9);
    }
}
