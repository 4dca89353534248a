#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "iecc/clustering.hpp"
#include "iecc/errors.hpp"
#include "iecc/raster.hpp"

namespace iecc {

// Container layout, all multi-byte integers little-endian:
//
//   bytes 0-3    magic "IECC"
//   byte  4      version (1)
//   bytes 5-8    width  (u32)
//   bytes 9-12   height (u32)
//   byte  13     channels
//   bytes 14-15  K (u16)
//   byte  16     algorithm tag (0=kmeans, 1=kmeanspp, 2=fcm, 3=fcmpp,
//                255=external palette)
//   bytes 17-24  seed (u64)
//   K*channels   palette bytes
//   rest         packed index bits, row-major, MSB-first, zero-padded
//
constexpr std::size_t container_header_size = 25;
constexpr std::uint8_t container_version = 1;
constexpr std::uint8_t external_palette_tag = 255;

inline int bits_per_index(int k) {
    int bits = 1;
    while ((1 << bits) < k) ++bits;
    return bits;
}

inline std::size_t packed_index_bytes(std::uint32_t width, std::uint32_t height, int bits) {
    return (std::size_t(width) * height * std::size_t(bits) + 7) / 8;
}

// K palette entries of `channels` 8-bit values each, entry-major.
struct Palette {
    int channels = 1;
    std::vector<std::uint8_t> entries;

    int k() const { return static_cast<int>(entries.size()) / channels; }
    std::uint8_t value(int entry, int channel) const {
        return entries[std::size_t(entry) * channels + std::size_t(channel)];
    }

    friend bool operator==(const Palette&, const Palette&) = default;
};

struct IndexPlane {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int bits = 1;
    std::vector<std::uint8_t> packed;

    friend bool operator==(const IndexPlane&, const IndexPlane&) = default;
};

inline std::vector<std::uint8_t> pack_indices(const std::vector<std::uint32_t>& indices, int bits) {
    std::vector<std::uint8_t> out;
    out.reserve((indices.size() * std::size_t(bits) + 7) / 8);
    std::uint32_t acc = 0;
    int filled = 0;
    for (std::uint32_t idx : indices)
        for (int b = bits - 1; b >= 0; --b) {
            acc = (acc << 1) | ((idx >> b) & 1u);
            if (++filled == 8) {
                out.push_back(static_cast<std::uint8_t>(acc));
                acc = 0;
                filled = 0;
            }
        }
    if (filled > 0) out.push_back(static_cast<std::uint8_t>(acc << (8 - filled)));
    return out;
}

inline std::vector<std::uint32_t> unpack_indices(const std::vector<std::uint8_t>& packed,
                                                 std::size_t count, int bits) {
    if (packed.size() * 8 < count * std::size_t(bits))
        throw malformed_container_error(malformed_container_error::kind::truncated,
                                        "index plane: " + std::to_string(packed.size()) +
                                            " bytes cannot hold " + std::to_string(count) +
                                            " indices of " + std::to_string(bits) + " bits");
    std::vector<std::uint32_t> out(count);
    std::size_t bit = 0;
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t v = 0;
        for (int b = 0; b < bits; ++b, ++bit)
            v = (v << 1) | ((packed[bit >> 3] >> (7 - (bit & 7))) & 1u);
        out[i] = v;
    }
    return out;
}

struct CompressedImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int channels = 1;
    std::uint16_t k = 0;
    std::uint8_t algorithm_tag = 0;
    std::uint64_t seed = 0;
    Palette palette;
    IndexPlane indices;

    friend bool operator==(const CompressedImage&, const CompressedImage&) = default;
};

inline std::size_t serialized_size(const CompressedImage& c) {
    return container_header_size + c.palette.entries.size() + c.indices.packed.size();
}

inline std::uint8_t round_to_byte(double v) {
    const long r = std::lround(v);
    return static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
}

// Assign pixels to the nearest *unrounded* centroid and pack; the palette
// stores the rounded centroids. Rounding before assignment could change
// nearest-centroid winners.
inline CompressedImage make_container(const RasterImage& image, const Centroids& centroids,
                                      const std::vector<std::uint32_t>& assignments,
                                      std::uint8_t algorithm_tag, std::uint64_t seed) {
    CompressedImage out;
    out.width = image.width;
    out.height = image.height;
    out.channels = image.channels;
    out.k = static_cast<std::uint16_t>(centroids.k());
    out.algorithm_tag = algorithm_tag;
    out.seed = seed;
    out.palette.channels = image.channels;
    out.palette.entries.reserve(std::size_t(centroids.k()) * image.channels);
    for (const auto& c : centroids.points)
        for (int d = 0; d < image.channels; ++d)
            out.palette.entries.push_back(round_to_byte(c.coords[std::size_t(d)]));
    out.indices.width = image.width;
    out.indices.height = image.height;
    out.indices.bits = bits_per_index(centroids.k());
    out.indices.packed = pack_indices(assignments, out.indices.bits);
    return out;
}

inline std::size_t count_distinct_colors(const RasterImage& image) {
    return count_distinct(to_pixel_points(image));
}

// Learn a K-color palette from this image's own pixels and pack the index
// plane. K greater than the number of distinct colors is an error, not a
// silent K reduction: K is a contract with the bitstream reader.
inline CompressedImage encode(const RasterImage& image, const ClusterConfig& config) {
    require_valid(image, "encode");
    if (config.k < 1 || config.k > 256)
        throw degenerate_input_error("encode: K=" + std::to_string(config.k) +
                                     " outside [1,256]");
    const std::vector<PixelPoint> points = to_pixel_points(image);
    const std::size_t distinct = count_distinct(points);
    if (std::size_t(config.k) > distinct)
        throw degenerate_input_error("encode: K=" + std::to_string(config.k) +
                                     " exceeds distinct colors=" + std::to_string(distinct));
    const ClusterOutcome outcome = run_clustering(points, config);
    return make_container(image, outcome.centroids, outcome.assignments,
                          static_cast<std::uint8_t>(config.algorithm), config.seed);
}

// Encode against externally supplied centroids (the shared-centroid study).
inline CompressedImage encode_with_palette(const RasterImage& image, const Centroids& centroids) {
    require_valid(image, "encode_with_palette");
    if (centroids.k() < 1 || centroids.k() > 256)
        throw degenerate_input_error("encode_with_palette: K=" + std::to_string(centroids.k()) +
                                     " outside [1,256]");
    if (centroids.points.front().dim != image.channels)
        throw shape_mismatch_error("encode_with_palette: centroid dimension " +
                                   std::to_string(centroids.points.front().dim) +
                                   " does not match channels " + std::to_string(image.channels));
    const std::vector<PixelPoint> points = to_pixel_points(image);
    std::vector<std::uint32_t> assignments(points.size());
    for (std::size_t i = 0; i < points.size(); ++i)
        assignments[i] = detail::nearest_centroid(points[i], centroids.points);
    return make_container(image, centroids, assignments, external_palette_tag, 0);
}

inline RasterImage decode(const CompressedImage& c) {
    if (c.width == 0 || c.height == 0 || (c.channels != 1 && c.channels != 3) || c.k == 0)
        throw malformed_container_error(malformed_container_error::kind::inconsistent_length,
                                        "decode: invalid header fields");
    if (c.palette.entries.size() != std::size_t(c.k) * c.channels)
        throw malformed_container_error(malformed_container_error::kind::inconsistent_length,
                                        "decode: palette holds " +
                                            std::to_string(c.palette.entries.size()) +
                                            " bytes, expected " +
                                            std::to_string(std::size_t(c.k) * c.channels));
    const std::size_t n = std::size_t(c.width) * c.height;
    const std::vector<std::uint32_t> idx = unpack_indices(c.indices.packed, n, c.indices.bits);
    RasterImage out;
    out.width = c.width;
    out.height = c.height;
    out.channels = c.channels;
    out.samples.resize(out.sample_count());
    for (std::size_t i = 0; i < n; ++i) {
        if (idx[i] >= c.k)
            throw malformed_container_error(malformed_container_error::kind::index_out_of_range,
                                            "decode: index " + std::to_string(idx[i]) +
                                                " >= K=" + std::to_string(c.k));
        for (int d = 0; d < c.channels; ++d)
            out.samples[i * c.channels + d] = c.palette.value(int(idx[i]), d);
    }
    return out;
}

// Ratio of raw size to palette + index-plane size, headers excluded.
// For channels=1 and width=height=n this is 8n^2 / ((log2 K) n^2 + 8K).
inline double compression_ratio(std::uint32_t width, std::uint32_t height, int channels, int k) {
    if (k < 2)
        throw degenerate_input_error("compression_ratio: K=" + std::to_string(k) +
                                     " must be >= 2");
    const std::uint64_t pixels = std::uint64_t(width) * height;
    const std::uint64_t numerator = 8ULL * std::uint64_t(channels) * pixels;
    const std::uint64_t denominator =
        std::uint64_t(bits_per_index(k)) * pixels + 8ULL * std::uint64_t(channels) * k;
    return double(numerator) / double(denominator);
}

namespace detail {

inline void put_u32_le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32_le(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 |
           std::uint32_t(p[3]) << 24;
}

inline std::uint64_t get_u64_le(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

} // namespace detail

inline std::vector<std::uint8_t> serialize(const CompressedImage& c) {
    std::vector<std::uint8_t> out;
    out.reserve(serialized_size(c));
    out.insert(out.end(), {'I', 'E', 'C', 'C'});
    out.push_back(container_version);
    detail::put_u32_le(out, c.width);
    detail::put_u32_le(out, c.height);
    out.push_back(static_cast<std::uint8_t>(c.channels));
    out.push_back(static_cast<std::uint8_t>(c.k & 0xff));
    out.push_back(static_cast<std::uint8_t>(c.k >> 8));
    out.push_back(c.algorithm_tag);
    detail::put_u64_le(out, c.seed);
    out.insert(out.end(), c.palette.entries.begin(), c.palette.entries.end());
    out.insert(out.end(), c.indices.packed.begin(), c.indices.packed.end());
    return out;
}

inline CompressedImage deserialize(const std::vector<std::uint8_t>& bytes) {
    using kind = malformed_container_error::kind;
    if (bytes.size() < 4)
        throw malformed_container_error(kind::truncated, "container shorter than magic");
    if (bytes[0] != 'I' || bytes[1] != 'E' || bytes[2] != 'C' || bytes[3] != 'C')
        throw malformed_container_error(kind::bad_magic, "bad magic bytes");
    if (bytes.size() < 5)
        throw malformed_container_error(kind::truncated, "container shorter than header");
    if (bytes[4] != container_version)
        throw malformed_container_error(kind::unsupported_version,
                                        "unsupported version " + std::to_string(bytes[4]));
    if (bytes.size() < container_header_size)
        throw malformed_container_error(kind::truncated, "container shorter than header");
    CompressedImage c;
    c.width = detail::get_u32_le(&bytes[5]);
    c.height = detail::get_u32_le(&bytes[9]);
    c.channels = bytes[13];
    c.k = static_cast<std::uint16_t>(std::uint16_t(bytes[14]) | std::uint16_t(bytes[15]) << 8);
    c.algorithm_tag = bytes[16];
    c.seed = detail::get_u64_le(&bytes[17]);
    if (c.width == 0 || c.height == 0 || (c.channels != 1 && c.channels != 3) || c.k == 0 ||
        c.k > 256)
        throw malformed_container_error(kind::inconsistent_length, "invalid header fields");
    // Keeps the size arithmetic below free of u64 overflow on hostile headers.
    if (std::uint64_t(c.width) * c.height > (1ULL << 34))
        throw malformed_container_error(kind::inconsistent_length, "implausible dimensions");
    const std::size_t palette_bytes = std::size_t(c.k) * c.channels;
    const int bits = bits_per_index(c.k);
    const std::size_t index_bytes = packed_index_bytes(c.width, c.height, bits);
    const std::size_t expected = container_header_size + palette_bytes + index_bytes;
    if (bytes.size() < expected)
        throw malformed_container_error(kind::truncated,
                                        "container holds " + std::to_string(bytes.size()) +
                                            " bytes, expected " + std::to_string(expected));
    if (bytes.size() > expected)
        throw malformed_container_error(kind::inconsistent_length,
                                        "container holds " + std::to_string(bytes.size()) +
                                            " bytes, expected " + std::to_string(expected));
    c.palette.channels = c.channels;
    c.palette.entries.assign(bytes.begin() + long(container_header_size),
                             bytes.begin() + long(container_header_size + palette_bytes));
    c.indices.width = c.width;
    c.indices.height = c.height;
    c.indices.bits = bits;
    c.indices.packed.assign(bytes.begin() + long(container_header_size + palette_bytes),
                            bytes.end());
    // Validate eagerly so a malformed stream cannot survive until decode.
    const std::vector<std::uint32_t> idx =
        unpack_indices(c.indices.packed, std::size_t(c.width) * c.height, bits);
    for (std::uint32_t v : idx)
        if (v >= c.k)
            throw malformed_container_error(kind::index_out_of_range,
                                            "index " + std::to_string(v) +
                                                " >= K=" + std::to_string(c.k));
    return c;
}

} // namespace iecc
