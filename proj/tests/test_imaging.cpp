#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>
#include <random>

#include "derm/gaussian.hpp"
#include "derm/image.hpp"
#include "derm/image_io.hpp"
#include "support/tmpdir.hpp"

using namespace derm;

TEST_CASE("yuv primaries match the transform matrix") {
    double y, u, v;
    rgb_to_yuv_px(255, 0, 0, y, u, v);
    CHECK_THAT(y, Catch::Matchers::WithinAbs(76.245, 1e-9));
    CHECK_THAT(u, Catch::Matchers::WithinAbs(-37.485, 1e-9));
    CHECK_THAT(v, Catch::Matchers::WithinAbs(156.825, 1e-9));

    rgb_to_yuv_px(0, 255, 0, y, u, v);
    CHECK_THAT(y, Catch::Matchers::WithinAbs(149.685, 1e-9));
    CHECK_THAT(u, Catch::Matchers::WithinAbs(-73.695, 1e-9));
    CHECK_THAT(v, Catch::Matchers::WithinAbs(-131.325, 1e-9));

    rgb_to_yuv_px(0, 0, 255, y, u, v);
    CHECK_THAT(y, Catch::Matchers::WithinAbs(29.07, 1e-9));
    CHECK_THAT(u, Catch::Matchers::WithinAbs(111.18, 1e-9));
    CHECK_THAT(v, Catch::Matchers::WithinAbs(-25.5, 1e-9));
}

TEST_CASE("yuv grays carry no chroma") {
    for (int g = 0; g <= 255; g += 5) {
        double y, u, v;
        rgb_to_yuv_px(static_cast<uint8_t>(g), static_cast<uint8_t>(g),
                      static_cast<uint8_t>(g), y, u, v);
        CHECK_THAT(y, Catch::Matchers::WithinAbs(g, 1e-9));
        CHECK_THAT(u, Catch::Matchers::WithinAbs(0.0, 1e-10));
        CHECK_THAT(v, Catch::Matchers::WithinAbs(0.0, 1e-10));
    }
}

TEST_CASE("rgb_to_yuv planes narrow the per-pixel transform") {
    RgbImage img(7, 5);
    std::mt19937 rng(7);
    for (auto& b : img.data) b = static_cast<uint8_t>(rng() & 0xff);
    const PlanarImage p = rgb_to_yuv(img);
    for (int yy = 0; yy < 5; ++yy)
        for (int xx = 0; xx < 7; ++xx) {
            const uint8_t* px = img.px(xx, yy);
            double y, u, v;
            rgb_to_yuv_px(px[0], px[1], px[2], y, u, v);
            const size_t i = static_cast<size_t>(yy) * 7 + xx;
            CHECK_THAT(p.plane[0][i], Catch::Matchers::WithinAbs(y, 1e-4));
            CHECK_THAT(p.plane[1][i], Catch::Matchers::WithinAbs(u, 1e-4));
            CHECK_THAT(p.plane[2][i], Catch::Matchers::WithinAbs(v, 1e-4));
        }
}

TEST_CASE("hsv conversion on primaries and grays") {
    Hsv c = rgb_to_hsv_px(255, 0, 0);
    CHECK_THAT(c.h, Catch::Matchers::WithinAbs(0.0, 1e-12));
    CHECK_THAT(c.s, Catch::Matchers::WithinAbs(1.0, 1e-12));
    CHECK_THAT(c.v, Catch::Matchers::WithinAbs(1.0, 1e-12));
    c = rgb_to_hsv_px(0, 255, 0);
    CHECK_THAT(c.h, Catch::Matchers::WithinAbs(120.0, 1e-9));
    c = rgb_to_hsv_px(0, 0, 255);
    CHECK_THAT(c.h, Catch::Matchers::WithinAbs(240.0, 1e-9));
    c = rgb_to_hsv_px(128, 0, 128);
    CHECK_THAT(c.h, Catch::Matchers::WithinAbs(300.0, 1e-9));
    c = rgb_to_hsv_px(77, 77, 77);
    CHECK(c.s == 0.0);
    CHECK_THAT(c.v, Catch::Matchers::WithinAbs(77.0 / 255.0, 1e-12));
    c = rgb_to_hsv_px(0, 0, 0);
    CHECK(c.v == 0.0);
    CHECK(c.s == 0.0);
}

TEST_CASE("hsv stays in range for random pixels") {
    std::mt19937 rng(11);
    for (int t = 0; t < 500; ++t) {
        const Hsv c = rgb_to_hsv_px(static_cast<uint8_t>(rng()), static_cast<uint8_t>(rng()),
                                    static_cast<uint8_t>(rng()));
        CHECK(c.h >= 0.0);
        CHECK(c.h < 360.0);
        CHECK(c.s >= 0.0);
        CHECK(c.s <= 1.0);
        CHECK(c.v >= 0.0);
        CHECK(c.v <= 1.0);
    }
}

TEST_CASE("gaussian kernel normalization and center weight") {
    const Kernel k = gaussian_kernel(5, 1.0);
    double sum = 0.0;
    for (double w : k.w) sum += w;
    CHECK_THAT(sum, Catch::Matchers::WithinAbs(1.0, 1e-9));
    CHECK_THAT(k.at(2, 2), Catch::Matchers::WithinAbs(0.16210282163712664, 1e-12));
    CHECK_THAT(k.at(0, 0), Catch::Matchers::WithinAbs(0.0029690167439504977, 1e-12));
}

TEST_CASE("gaussian kernel symmetry") {
    const Kernel k = gaussian_kernel(7, 1.7);
    for (int i = 0; i < 7; ++i)
        for (int j = 0; j < 7; ++j) {
            CHECK(k.at(i, j) == k.at(j, i));
            CHECK(k.at(i, j) == k.at(6 - i, 6 - j));
        }
}

TEST_CASE("gaussian kernel rejects bad parameters") {
    CHECK_THROWS_AS(gaussian_kernel(4, 1.0), Error);
    CHECK_THROWS_AS(gaussian_kernel(1, 1.0), Error);
    CHECK_THROWS_AS(gaussian_kernel(5, 0.0), Error);
    CHECK_THROWS_AS(gaussian_kernel(5, -2.0), Error);
}

namespace {

// Independent reference: direct double-precision convolution, clamped edges.
std::vector<double> reference_convolve(const std::vector<float>& in, int w, int h,
                                       const Kernel& ker) {
    const int r = ker.size / 2;
    std::vector<double> out(in.size());
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = 0; i < ker.size; ++i)
                for (int j = 0; j < ker.size; ++j) {
                    const int sy = std::clamp(y + i - r, 0, h - 1);
                    const int sx = std::clamp(x + j - r, 0, w - 1);
                    acc += ker.at(i, j) * in[static_cast<size_t>(sy) * w + sx];
                }
            out[static_cast<size_t>(y) * w + x] = acc;
        }
    return out;
}

}  // namespace

TEST_CASE("convolution matches a brute-force reference") {
    const Kernel ker = gaussian_kernel(5, 1.3);
    const int w = 17, h = 13;
    std::vector<float> in(static_cast<size_t>(w) * h);
    std::mt19937 rng(3);
    std::uniform_real_distribution<float> d(-120.0f, 250.0f);
    for (auto& v : in) v = d(rng);

    const std::vector<float> got = convolve(in, w, h, ker);
    const std::vector<double> want = reference_convolve(in, w, h, ker);
    for (size_t i = 0; i < got.size(); ++i)
        CHECK_THAT(got[i], Catch::Matchers::WithinAbs(want[i], 1e-3));
}

TEST_CASE("convolution preserves constants and unit impulses") {
    const Kernel ker = gaussian_kernel(5, 1.0);
    std::vector<float> flat(11 * 9, 42.5f);
    for (float v : convolve(flat, 11, 9, ker))
        CHECK_THAT(v, Catch::Matchers::WithinAbs(42.5, 1e-4));

    std::vector<float> spike(11 * 11, 0.0f);
    spike[5 * 11 + 5] = 1.0f;
    const std::vector<float> out = convolve(spike, 11, 11, ker);
    CHECK_THAT(out[5 * 11 + 5], Catch::Matchers::WithinAbs(ker.at(2, 2), 1e-7));
    CHECK_THAT(out[3 * 11 + 3], Catch::Matchers::WithinAbs(ker.at(0, 0), 1e-7));
}

TEST_CASE("convolution rejects undersized planes") {
    const Kernel ker = gaussian_kernel(5, 1.0);
    std::vector<float> tiny(4 * 4, 0.0f);
    CHECK_THROWS_AS(convolve(tiny, 4, 4, ker), Error);
}

TEST_CASE("bilinear resize interpolates a ramp exactly") {
    RgbImage img(2, 1);
    img.px(0, 0)[0] = 0;
    img.px(1, 0)[0] = 255;
    const RgbImage out = resize_bilinear(img, 4, 1);
    CHECK(out.px(0, 0)[0] == 0);
    CHECK(out.px(1, 0)[0] == 85);
    CHECK(out.px(2, 0)[0] == 170);
    CHECK(out.px(3, 0)[0] == 255);
}

TEST_CASE("bilinear resize identity and degenerate cases") {
    RgbImage img(5, 4);
    std::mt19937 rng(5);
    for (auto& b : img.data) b = static_cast<uint8_t>(rng() & 0xff);
    const RgbImage same = resize_bilinear(img, 5, 4);
    CHECK(same.data == img.data);

    RgbImage one(1, 1);
    one.px(0, 0)[1] = 99;
    const RgbImage up = resize_bilinear(one, 3, 3);
    for (int y = 0; y < 3; ++y)
        for (int x = 0; x < 3; ++x) CHECK(up.px(x, y)[1] == 99);

    CHECK_THROWS_AS(resize_bilinear(img, 0, 4), Error);
}

TEST_CASE("channel combination weights and validation") {
    PlanarImage p(3, 2);
    for (size_t i = 0; i < p.size(); ++i) {
        p.plane[0][i] = 10.0f;
        p.plane[1][i] = 20.0f;
        p.plane[2][i] = 40.0f;
    }
    const std::vector<float> avg = combine_channels(p, {1.0, 1.0, 1.0});
    for (float v : avg) CHECK_THAT(v, Catch::Matchers::WithinAbs(70.0 / 3.0, 1e-5));
    const std::vector<float> only0 = combine_channels(p, {2.0, 0.0, 0.0});
    for (float v : only0) CHECK_THAT(v, Catch::Matchers::WithinAbs(10.0, 1e-6));
    CHECK_THROWS_AS(combine_channels(p, {0.0, 0.0, 0.0}), Error);
}

TEST_CASE("png and bmp round-trips are lossless") {
    testutil::TmpDir tmp("imaging");
    RgbImage img(33, 21);
    std::mt19937 rng(17);
    for (auto& b : img.data) b = static_cast<uint8_t>(rng() & 0xff);

    save_png(img, tmp.file("a.png"));
    const RgbImage png = load_image(tmp.file("a.png"));
    REQUIRE(png.width == 33);
    REQUIRE(png.height == 21);
    CHECK(png.data == img.data);

    save_bmp(img, tmp.file("a.bmp"));
    const RgbImage bmp = load_image(tmp.file("a.bmp"));
    REQUIRE(bmp.width == 33);
    REQUIRE(bmp.height == 21);
    CHECK(bmp.data == img.data);
}

TEST_CASE("load_image rejects unknown bytes and tiny rasters") {
    testutil::TmpDir tmp("imaging_bad");
    {
        std::ofstream f(tmp.file("junk.png"), std::ios::binary);
        f << "this is not an image at all, definitely not";
    }
    CHECK_THROWS_AS(load_image(tmp.file("junk.png")), IoError);
    CHECK_THROWS_AS(load_image(tmp.file("missing.png")), IoError);

    RgbImage tiny(4, 4);
    save_png(tiny, tmp.file("tiny.png"));
    CHECK_THROWS_AS(load_image(tmp.file("tiny.png")), IoError);
}
