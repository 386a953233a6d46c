#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mvqa {

// Instance-id image: one 32-bit id per pixel, 0 = background. On disk the
// low 24 bits go into a binary P6 pixmap, little-endian (R holds the LSB).
struct IdImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint32_t> px;

    std::uint32_t& at(int x, int y) { return px[static_cast<std::size_t>(y) * width + x]; }
    std::uint32_t at(int x, int y) const { return px[static_cast<std::size_t>(y) * width + x]; }
};

struct DepthImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> px;  // millimeters, clamped to 65535
};

struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> px;  // 3 bytes per pixel
};

std::string encode_ppm(const IdImage& img);
void write_ppm(const std::string& path, const IdImage& img);
IdImage read_ppm_ids(const std::string& path);

void write_pgm16(const std::string& path, const DepthImage& img);

void write_ppm_rgb(const std::string& path, const RgbImage& img);
RgbImage read_ppm_rgb(const std::string& path);

}  // namespace mvqa
