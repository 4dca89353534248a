#pragma once

#include <png.h>

#include <cstring>
#include <string>
#include <vector>

#include "iecc/errors.hpp"
#include "iecc/raster.hpp"

namespace iecc {

// Reads an 8-bit raster from a PNG file via libpng's simplified API.
// Grayscale sources decode to 1 channel, everything else to RGB; 16-bit
// depth is reduced and alpha is stripped.
inline RasterImage read_png(const std::string& path) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.c_str()))
        throw io_error("read_png: " + path + ": " + image.message);
    const bool color = (image.format & PNG_FORMAT_FLAG_COLOR) != 0;
    image.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    RasterImage out;
    out.width = image.width;
    out.height = image.height;
    out.channels = color ? 3 : 1;
    out.samples.resize(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, out.samples.data(), 0, nullptr)) {
        png_image_free(&image);
        throw io_error("read_png: " + path + ": " + image.message);
    }
    return out;
}

inline void write_png(const std::string& path, const RasterImage& raster) {
    require_valid(raster, "write_png");
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = raster.width;
    image.height = raster.height;
    image.format = raster.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.c_str(), 0, raster.samples.data(), 0, nullptr))
        throw io_error("write_png: " + path + ": " + image.message);
}

} // namespace iecc
