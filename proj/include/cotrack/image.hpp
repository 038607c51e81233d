#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cotrack/geometry.hpp"

namespace cotrack {

// 8-bit raster, interleaved row-major, 1 (gray) or 3 (RGB) channels.
struct Image {
    int rows = 0;
    int cols = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels;

    Image() = default;
    Image(int r, int c, int ch, std::uint8_t fill = 0)
        : rows(r), cols(c), channels(ch),
          pixels(static_cast<std::size_t>(r) * c * ch, fill) {}

    std::uint8_t& at(int r, int c, int ch = 0) {
        return pixels[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
    }
    std::uint8_t at(int r, int c, int ch = 0) const {
        return pixels[(static_cast<std::size_t>(r) * cols + c) * channels + ch];
    }
    bool empty() const { return pixels.empty(); }
};

// Decodes an 8-bit PNG or JPEG file (extension-independent, sniffs the
// signature). Gray stays 1-channel, everything else lands as RGB.
Image load_image(const std::string& path);

// Writes an Image as PNG.
void save_png(const Image& img, const std::string& path);

// Crops the padded box (sides scaled by padding, same center), replicating
// border pixels outside the frame, then resamples bilinearly to
// out_rows x out_cols. Throws TrackingLost when the padded window degenerates
// below one pixel.
Image extract_patch(const Image& frame, const BBox& b, double padding, int out_rows,
                    int out_cols);

// Draws a 2px rectangle outline; used by the annotated-frame export.
void draw_box(Image& img, const BBox& b, std::uint8_t r, std::uint8_t g, std::uint8_t bl);

} // namespace cotrack
