#include "mvqa/image_io.hpp"

#include <fstream>
#include <stdexcept>

namespace mvqa {

namespace {

void write_binary(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error(path + ": write failed");
}

std::string read_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

std::string encode_ppm(const IdImage& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.reserve(out.size() + img.px.size() * 3);
    for (std::uint32_t id : img.px) {
        out += static_cast<char>(id & 0xff);
        out += static_cast<char>((id >> 8) & 0xff);
        out += static_cast<char>((id >> 16) & 0xff);
    }
    return out;
}

void write_ppm(const std::string& path, const IdImage& img) { write_binary(path, encode_ppm(img)); }

namespace {

// Reads one PNM header token, skipping whitespace and # comments.
std::string pnm_token(const std::string& s, std::size_t& pos) {
    while (pos < s.size()) {
        char c = s[pos];
        if (c == '#') {
            while (pos < s.size() && s[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++pos;
        } else {
            break;
        }
    }
    std::size_t start = pos;
    while (pos < s.size() && !std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    return s.substr(start, pos - start);
}

}  // namespace

IdImage read_ppm_ids(const std::string& path) {
    std::string s = read_binary(path);
    std::size_t pos = 0;
    if (pnm_token(s, pos) != "P6") throw std::runtime_error(path + ": not a P6 pixmap");
    IdImage img;
    img.width = std::stoi(pnm_token(s, pos));
    img.height = std::stoi(pnm_token(s, pos));
    int maxval = std::stoi(pnm_token(s, pos));
    if (maxval != 255) throw std::runtime_error(path + ": unsupported maxval");
    ++pos;  // single whitespace after maxval
    std::size_t need = static_cast<std::size_t>(img.width) * img.height * 3;
    if (s.size() - pos < need) throw std::runtime_error(path + ": truncated pixel data");
    img.px.resize(static_cast<std::size_t>(img.width) * img.height);
    for (std::size_t i = 0; i < img.px.size(); ++i) {
        auto r = static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 3 * i]));
        auto g = static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 3 * i + 1]));
        auto b = static_cast<std::uint32_t>(static_cast<unsigned char>(s[pos + 3 * i + 2]));
        img.px[i] = r | (g << 8) | (b << 16);
    }
    return img;
}

void write_pgm16(const std::string& path, const DepthImage& img) {
    std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n65535\n";
    out.reserve(out.size() + img.px.size() * 2);
    for (std::uint16_t v : img.px) {
        out += static_cast<char>((v >> 8) & 0xff);  // PNM 16-bit is MSB first
        out += static_cast<char>(v & 0xff);
    }
    write_binary(path, out);
}

void write_ppm_rgb(const std::string& path, const RgbImage& img) {
    std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
    out.append(reinterpret_cast<const char*>(img.px.data()), img.px.size());
    write_binary(path, out);
}

RgbImage read_ppm_rgb(const std::string& path) {
    IdImage ids = read_ppm_ids(path);
    RgbImage img;
    img.width = ids.width;
    img.height = ids.height;
    img.px.resize(ids.px.size() * 3);
    for (std::size_t i = 0; i < ids.px.size(); ++i) {
        img.px[3 * i] = static_cast<std::uint8_t>(ids.px[i] & 0xff);
        img.px[3 * i + 1] = static_cast<std::uint8_t>((ids.px[i] >> 8) & 0xff);
        img.px[3 * i + 2] = static_cast<std::uint8_t>((ids.px[i] >> 16) & 0xff);
    }
    return img;
}

}  // namespace mvqa
