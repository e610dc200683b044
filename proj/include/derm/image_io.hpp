#pragma once

#include <cstdio>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <jpeglib.h>
#include <png.h>
#include <csetjmp>

#include "derm/common.hpp"
#include "derm/image.hpp"

namespace derm {

namespace io_detail {

struct FileCloser {
    void operator()(FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<FILE, FileCloser>;

inline FilePtr open_file(const std::string& path, const char* mode) {
    FilePtr f(std::fopen(path.c_str(), mode));
    if (!f) throw IoError("cannot open '" + path + "'");
    return f;
}

// ---- PNG ----

inline void png_error_fn(png_structp png, png_const_charp msg) {
    // Message is copied out by the catch site via the error_ptr slot.
    auto* err = static_cast<std::string*>(png_get_error_ptr(png));
    if (err) *err = msg ? msg : "png error";
    longjmp(png_jmpbuf(png), 1);
}

inline RgbImage decode_png(FILE* f, const std::string& path) {
    std::string errmsg;
    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, &errmsg, png_error_fn, nullptr);
    if (!png) throw IoError("png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png: allocation failed");
    }
    RgbImage img;
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("corrupt PNG '" + path + "': " + errmsg);
    }
    png_init_io(png, f);
    png_read_info(png, info);

    // Normalize everything to 8-bit RGB.
    png_set_expand(png);
    png_set_strip_16(png);
    png_set_strip_alpha(png);
    png_set_gray_to_rgb(png);
    png_set_palette_to_rgb(png);
    png_read_update_info(png, info);

    img.width = static_cast<int>(png_get_image_width(png, info));
    img.height = static_cast<int>(png_get_image_height(png, info));
    img.data.assign(static_cast<size_t>(img.width) * img.height * 3, 0);
    rows.resize(img.height);
    for (int y = 0; y < img.height; ++y)
        rows[y] = img.data.data() + static_cast<size_t>(y) * img.width * 3;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

inline void encode_png(const RgbImage& img, const std::string& path) {
    if (img.empty()) throw IoError("encode_png: empty image");
    auto f = open_file(path, "wb");
    std::string errmsg;
    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, &errmsg, png_error_fn, nullptr);
    if (!png) throw IoError("png: allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png: allocation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("cannot write PNG '" + path + "': " + errmsg);
    }
    png_init_io(png, f.get());
    png_set_IHDR(png, info, img.width, img.height, 8, PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < img.height; ++y)
        png_write_row(png, const_cast<png_bytep>(img.data.data() +
                                                 static_cast<size_t>(y) * img.width * 3));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// ---- JPEG ----

struct JpegErrorMgr {
    jpeg_error_mgr base;
    jmp_buf jump;
    char msg[JMSG_LENGTH_MAX] = {0};
};

inline void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorMgr*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->msg);
    longjmp(err->jump, 1);
}

inline RgbImage decode_jpeg(FILE* f, const std::string& path) {
    jpeg_decompress_struct cinfo;
    JpegErrorMgr jerr;
    cinfo.err = jpeg_std_error(&jerr.base);
    jerr.base.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_decompress(&cinfo);
        throw IoError("corrupt JPEG '" + path + "': " + jerr.msg);
    }
    jpeg_create_decompress(&cinfo);
    jpeg_stdio_src(&cinfo, f);
    jpeg_read_header(&cinfo, TRUE);
    cinfo.out_color_space = JCS_RGB;
    jpeg_start_decompress(&cinfo);

    RgbImage img(static_cast<int>(cinfo.output_width), static_cast<int>(cinfo.output_height));
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = img.data.data() +
                       static_cast<size_t>(cinfo.output_scanline) * img.width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return img;
}

// ---- BMP (uncompressed BI_RGB, 1/8/24/32 bpp; PH2 ships these) ----

inline uint32_t rd_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (p[1] << 8) | (p[2] << 16) |
           (static_cast<uint32_t>(p[3]) << 24);
}
inline int32_t rd_i32(const uint8_t* p) { return static_cast<int32_t>(rd_u32(p)); }
inline uint16_t rd_u16(const uint8_t* p) { return static_cast<uint16_t>(p[0] | (p[1] << 8)); }

inline RgbImage decode_bmp(FILE* f, const std::string& path) {
    auto fail = [&](const std::string& why) -> IoError {
        return IoError("corrupt BMP '" + path + "': " + why);
    };
    std::fseek(f, 0, SEEK_END);
    const long fsize = std::ftell(f);
    std::fseek(f, 0, SEEK_SET);
    if (fsize < 54) throw fail("truncated header");
    std::vector<uint8_t> buf(static_cast<size_t>(fsize));
    if (std::fread(buf.data(), 1, buf.size(), f) != buf.size()) throw fail("short read");

    if (buf[0] != 'B' || buf[1] != 'M') throw fail("bad magic");
    const uint32_t pixel_off = rd_u32(&buf[10]);
    const uint32_t hdr_size = rd_u32(&buf[14]);
    if (hdr_size < 40) throw fail("unsupported header");
    const int32_t w = rd_i32(&buf[18]);
    const int32_t h_raw = rd_i32(&buf[22]);
    const uint16_t bpp = rd_u16(&buf[28]);
    const uint32_t compression = rd_u32(&buf[30]);
    if (compression != 0) throw fail("compressed BMP unsupported");
    if (w <= 0 || h_raw == 0) throw fail("bad dimensions");
    const bool bottom_up = h_raw > 0;
    const int h = bottom_up ? h_raw : -h_raw;
    if (bpp != 1 && bpp != 8 && bpp != 24 && bpp != 32) throw fail("unsupported bit depth");

    // Palette sits between the info header and the pixel data.
    uint32_t palette_n = 0;
    const uint8_t* palette = nullptr;
    if (bpp <= 8) {
        palette_n = rd_u32(&buf[46]);
        if (palette_n == 0) palette_n = 1u << bpp;
        palette = buf.data() + 14 + hdr_size;
        if (14 + hdr_size + palette_n * 4 > static_cast<uint32_t>(fsize))
            throw fail("palette out of range");
    }
    const size_t stride = ((static_cast<size_t>(w) * bpp + 31) / 32) * 4;
    if (pixel_off + stride * h > static_cast<size_t>(fsize)) throw fail("pixel data out of range");

    RgbImage img(w, h);
    for (int y = 0; y < h; ++y) {
        const uint8_t* row = buf.data() + pixel_off + stride * (bottom_up ? (h - 1 - y) : y);
        uint8_t* dst = img.px(0, y);
        for (int x = 0; x < w; ++x, dst += 3) {
            if (bpp == 24 || bpp == 32) {
                const uint8_t* s = row + static_cast<size_t>(x) * (bpp / 8);
                dst[0] = s[2];
                dst[1] = s[1];
                dst[2] = s[0];
            } else {
                uint32_t index;
                if (bpp == 8) {
                    index = row[x];
                } else {  // 1 bpp, MSB first
                    index = (row[x >> 3] >> (7 - (x & 7))) & 1u;
                }
                if (index >= palette_n) throw fail("palette index out of range");
                const uint8_t* e = palette + index * 4;  // BGRA
                dst[0] = e[2];
                dst[1] = e[1];
                dst[2] = e[0];
            }
        }
    }
    return img;
}

inline void wr_u32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
    v.push_back((x >> 16) & 0xff);
    v.push_back((x >> 24) & 0xff);
}
inline void wr_u16(std::vector<uint8_t>& v, uint16_t x) {
    v.push_back(x & 0xff);
    v.push_back((x >> 8) & 0xff);
}

inline void encode_bmp(const RgbImage& img, const std::string& path) {
    if (img.empty()) throw IoError("encode_bmp: empty image");
    const size_t stride = ((static_cast<size_t>(img.width) * 24 + 31) / 32) * 4;
    std::vector<uint8_t> out;
    out.reserve(54 + stride * img.height);
    out.push_back('B');
    out.push_back('M');
    wr_u32(out, static_cast<uint32_t>(54 + stride * img.height));
    wr_u32(out, 0);
    wr_u32(out, 54);
    wr_u32(out, 40);
    wr_u32(out, static_cast<uint32_t>(img.width));
    wr_u32(out, static_cast<uint32_t>(img.height));
    wr_u16(out, 1);
    wr_u16(out, 24);
    wr_u32(out, 0);
    wr_u32(out, static_cast<uint32_t>(stride * img.height));
    wr_u32(out, 2835);
    wr_u32(out, 2835);
    wr_u32(out, 0);
    wr_u32(out, 0);
    for (int y = img.height - 1; y >= 0; --y) {
        const size_t row_start = out.size();
        for (int x = 0; x < img.width; ++x) {
            const uint8_t* s = img.px(x, y);
            out.push_back(s[2]);
            out.push_back(s[1]);
            out.push_back(s[0]);
        }
        while (out.size() - row_start < stride) out.push_back(0);
    }
    auto f = open_file(path, "wb");
    if (std::fwrite(out.data(), 1, out.size(), f.get()) != out.size())
        throw IoError("cannot write BMP '" + path + "'");
}

}  // namespace io_detail

inline void save_png(const RgbImage& img, const std::string& path) {
    io_detail::encode_png(img, path);
}

inline void save_bmp(const RgbImage& img, const std::string& path) {
    io_detail::encode_bmp(img, path);
}

// Dispatches on magic bytes, not extension. Rejects images smaller than 8x8:
// nothing downstream is meaningful on them.
inline RgbImage load_image(const std::string& path) {
    auto f = io_detail::open_file(path, "rb");
    uint8_t magic[4] = {0, 0, 0, 0};
    const size_t got = std::fread(magic, 1, sizeof magic, f.get());
    std::fseek(f.get(), 0, SEEK_SET);
    if (got < 4) throw IoError("'" + path + "' too short to be an image");

    RgbImage img;
    if (magic[0] == 0x89 && magic[1] == 'P' && magic[2] == 'N' && magic[3] == 'G')
        img = io_detail::decode_png(f.get(), path);
    else if (magic[0] == 0xff && magic[1] == 0xd8)
        img = io_detail::decode_jpeg(f.get(), path);
    else if (magic[0] == 'B' && magic[1] == 'M')
        img = io_detail::decode_bmp(f.get(), path);
    else
        throw IoError("'" + path + "': unrecognized image format");

    if (img.width < 8 || img.height < 8)
        throw IoError("'" + path + "' is too small (" + std::to_string(img.width) + "x" +
                      std::to_string(img.height) + ", need at least 8x8)");
    return img;
}

}  // namespace derm
