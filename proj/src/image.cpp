#include "cotrack/image.hpp"

#include <jpeglib.h>
#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <memory>

#include "cotrack/errors.hpp"

namespace cotrack {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Image load_png_file(std::FILE* fp, const std::string& path) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw IoError("png: out of memory reading \"" + path + "\"");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: out of memory reading \"" + path + "\"");
    }
    std::vector<png_bytep> row_ptrs;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("png: corrupt file \"" + path + "\"");
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (depth == 16)
        png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw DataError("png: unsupported channel count in \"" + path + "\"");
    }
    Image img(static_cast<int>(h), static_cast<int>(w), channels);
    row_ptrs.resize(h);
    for (png_uint_32 r = 0; r < h; ++r)
        row_ptrs[r] = img.pixels.data() + static_cast<std::size_t>(r) * w * channels;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

struct JpegErrorMgr {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* mgr = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    std::longjmp(mgr->jump, 1);
}

Image load_jpeg_file(std::FILE* fp, const std::string& path) {
    jpeg_decompress_struct cinfo{};
    JpegErrorMgr jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw DataError("jpeg: corrupt file \"" + path + "\"");
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, fp);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = cinfo.num_components == 1 ? JCS_GRAYSCALE : JCS_RGB;
    jpeg_start_decompress(&cinfo);

    const int channels = cinfo.output_components;
    Image img(static_cast<int>(cinfo.output_height), static_cast<int>(cinfo.output_width),
              channels);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.pixels.data() + static_cast<std::size_t>(cinfo.output_scanline) *
                                               img.cols * channels;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

} // namespace

Image load_image(const std::string& path) {
    FilePtr fp(std::fopen(path.c_str(), "rb"));
    if (!fp)
        throw IoError("cannot open image \"" + path + "\"");
    unsigned char sig[8] = {0};
    const std::size_t got = std::fread(sig, 1, 8, fp.get());
    std::rewind(fp.get());
    if (got >= 8 && png_sig_cmp(sig, 0, 8) == 0)
        return load_png_file(fp.get(), path);
    if (got >= 2 && sig[0] == 0xFF && sig[1] == 0xD8)
        return load_jpeg_file(fp.get(), path);
    throw DataError("unsupported image format in \"" + path + "\" (need 8-bit PNG or JPEG)");
}

void save_png(const Image& img, const std::string& path) {
    if (img.empty() || (img.channels != 1 && img.channels != 3))
        throw InvalidArgument("save_png: empty image or unsupported channel count");
    FilePtr fp(std::fopen(path.c_str(), "wb"));
    if (!fp)
        throw IoError("cannot write image \"" + path + "\"");
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png)
        throw IoError("png: out of memory writing \"" + path + "\"");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: out of memory writing \"" + path + "\"");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("png: write failure for \"" + path + "\"");
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, img.cols, img.rows, 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int r = 0; r < img.rows; ++r)
        png_write_row(png, const_cast<png_bytep>(img.pixels.data() +
                                                 static_cast<std::size_t>(r) * img.cols *
                                                     img.channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

Image extract_patch(const Image& frame, const BBox& b, double padding, int out_rows,
                    int out_cols) {
    if (padding < 1.0)
        throw InvalidArgument("extract_patch: padding must be >= 1");
    if (out_rows < 1 || out_cols < 1)
        throw InvalidArgument("extract_patch: output dims must be positive");
    if (frame.empty())
        throw InvalidArgument("extract_patch: empty frame");
    const double win_w = b.w * padding;
    const double win_h = b.h * padding;
    if (!(win_w >= 1.0) || !(win_h >= 1.0) || !std::isfinite(b.cx()) || !std::isfinite(b.cy()))
        throw TrackingLost("extract_patch: degenerate search window");

    const double x0 = b.cx() - win_w / 2.0;
    const double y0 = b.cy() - win_h / 2.0;
    Image out(out_rows, out_cols, frame.channels);
    const double sx = win_w / out_cols;
    const double sy = win_h / out_rows;
    for (int r = 0; r < out_rows; ++r) {
        const double fy = y0 + (r + 0.5) * sy - 0.5;
        const int y1 = static_cast<int>(std::floor(fy));
        const double wy = fy - y1;
        const int ya = std::clamp(y1, 0, frame.rows - 1);
        const int yb = std::clamp(y1 + 1, 0, frame.rows - 1);
        for (int c = 0; c < out_cols; ++c) {
            const double fx = x0 + (c + 0.5) * sx - 0.5;
            const int x1 = static_cast<int>(std::floor(fx));
            const double wx = fx - x1;
            const int xa = std::clamp(x1, 0, frame.cols - 1);
            const int xb = std::clamp(x1 + 1, 0, frame.cols - 1);
            for (int ch = 0; ch < frame.channels; ++ch) {
                const double v = (1.0 - wy) * ((1.0 - wx) * frame.at(ya, xa, ch) +
                                               wx * frame.at(ya, xb, ch)) +
                                 wy * ((1.0 - wx) * frame.at(yb, xa, ch) +
                                       wx * frame.at(yb, xb, ch));
                out.at(r, c, ch) = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
            }
        }
    }
    return out;
}

void draw_box(Image& img, const BBox& b, std::uint8_t r, std::uint8_t g, std::uint8_t bl) {
    const int x0 = static_cast<int>(std::lround(b.x));
    const int y0 = static_cast<int>(std::lround(b.y));
    const int x1 = static_cast<int>(std::lround(b.x + b.w)) - 1;
    const int y1 = static_cast<int>(std::lround(b.y + b.h)) - 1;
    auto put = [&](int row, int col) {
        if (row < 0 || row >= img.rows || col < 0 || col >= img.cols)
            return;
        if (img.channels == 1) {
            img.at(row, col, 0) = r;
        } else {
            img.at(row, col, 0) = r;
            img.at(row, col, 1) = g;
            img.at(row, col, 2) = bl;
        }
    };
    for (int t = 0; t < 2; ++t) {
        for (int col = x0; col <= x1; ++col) {
            put(y0 + t, col);
            put(y1 - t, col);
        }
        for (int row = y0; row <= y1; ++row) {
            put(row, x0 + t);
            put(row, x1 - t);
        }
    }
}

} // namespace cotrack
