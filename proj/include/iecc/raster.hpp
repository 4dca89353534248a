#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "iecc/errors.hpp"

namespace iecc {

// Row-major, channel-interleaved 8-bit raster. channels is 1 (gray) or 3 (RGB).
struct RasterImage {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    int channels = 1;
    std::vector<std::uint8_t> samples;

    std::size_t pixel_count() const { return std::size_t(width) * height; }
    std::size_t sample_count() const { return pixel_count() * std::size_t(channels); }

    std::uint8_t& at(std::uint32_t row, std::uint32_t col, int channel) {
        return samples[(std::size_t(row) * width + col) * channels + channel];
    }
    std::uint8_t at(std::uint32_t row, std::uint32_t col, int channel) const {
        return samples[(std::size_t(row) * width + col) * channels + channel];
    }

    bool valid() const {
        return width >= 1 && height >= 1 && (channels == 1 || channels == 3) &&
               samples.size() == sample_count();
    }

    bool same_shape(const RasterImage& other) const {
        return width == other.width && height == other.height && channels == other.channels;
    }

    friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

inline void require_valid(const RasterImage& img, const char* who) {
    if (!img.valid())
        throw degenerate_input_error(std::string(who) + ": invalid raster (" +
                                     std::to_string(img.width) + "x" + std::to_string(img.height) +
                                     "x" + std::to_string(img.channels) + ", " +
                                     std::to_string(img.samples.size()) + " samples)");
}

inline void require_same_shape(const RasterImage& a, const RasterImage& b, const char* who) {
    if (!a.same_shape(b))
        throw shape_mismatch_error(std::string(who) + ": shape mismatch, " +
                                   std::to_string(a.width) + "x" + std::to_string(a.height) + "x" +
                                   std::to_string(a.channels) + " vs " + std::to_string(b.width) +
                                   "x" + std::to_string(b.height) + "x" +
                                   std::to_string(b.channels));
}

// One pixel as a real-valued clustering feature. dim matches the source
// image's channel count; coordinates stay real until palette rounding.
struct PixelPoint {
    std::array<double, 3> coords{};
    int dim = 1;

    double& operator[](int i) { return coords[std::size_t(i)]; }
    double operator[](int i) const { return coords[std::size_t(i)]; }

    friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

inline double squared_distance(const PixelPoint& a, const PixelPoint& b) {
    double s = 0.0;
    for (int i = 0; i < a.dim; ++i) {
        const double d = a.coords[std::size_t(i)] - b.coords[std::size_t(i)];
        s += d * d;
    }
    return s;
}

inline std::vector<PixelPoint> to_pixel_points(const RasterImage& img) {
    require_valid(img, "to_pixel_points");
    std::vector<PixelPoint> points(img.pixel_count());
    for (std::size_t p = 0; p < points.size(); ++p) {
        points[p].dim = img.channels;
        for (int c = 0; c < img.channels; ++c)
            points[p].coords[std::size_t(c)] = img.samples[p * img.channels + c];
    }
    return points;
}

inline RasterImage from_pixel_points(const std::vector<PixelPoint>& points, std::uint32_t width,
                                     std::uint32_t height) {
    if (points.empty() || std::size_t(width) * height != points.size())
        throw degenerate_input_error("from_pixel_points: point count does not match dimensions");
    RasterImage img;
    img.width = width;
    img.height = height;
    img.channels = points.front().dim;
    img.samples.resize(img.sample_count());
    for (std::size_t p = 0; p < points.size(); ++p)
        for (int c = 0; c < img.channels; ++c) {
            const double v = std::lround(points[p].coords[std::size_t(c)]);
            img.samples[p * img.channels + c] =
                static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    return img;
}

// BT.601 luma. Rejects grayscale input: a silent no-op would mask caller bugs.
inline RasterImage to_grayscale(const RasterImage& img) {
    require_valid(img, "to_grayscale");
    if (img.channels != 3)
        throw degenerate_input_error("to_grayscale: input is already grayscale");
    RasterImage out;
    out.width = img.width;
    out.height = img.height;
    out.channels = 1;
    out.samples.resize(out.pixel_count());
    for (std::size_t p = 0; p < out.samples.size(); ++p) {
        const double y = 0.299 * img.samples[p * 3] + 0.587 * img.samples[p * 3 + 1] +
                         0.114 * img.samples[p * 3 + 2];
        const long r = std::lround(y);
        out.samples[p] = static_cast<std::uint8_t>(r < 0 ? 0 : (r > 255 ? 255 : r));
    }
    return out;
}

// 256 tonal bins per channel.
struct Histogram {
    std::vector<std::array<std::uint64_t, 256>> bins;

    int channels() const { return static_cast<int>(bins.size()); }
};

inline Histogram histogram(const RasterImage& img) {
    require_valid(img, "histogram");
    Histogram h;
    h.bins.assign(std::size_t(img.channels), {});
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
        for (int c = 0; c < img.channels; ++c)
            ++h.bins[std::size_t(c)][img.samples[p * img.channels + c]];
    return h;
}

} // namespace iecc
