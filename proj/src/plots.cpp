#include "polaring/plots.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace polaring {

namespace {

std::uint32_t crc32(const unsigned char* data, std::size_t n, std::uint32_t crc = 0xFFFFFFFFu) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ data[i]) & 0xFF] ^ (crc >> 8);
    return crc;
}

void put_u32(std::string& s, std::uint32_t v) {
    s.push_back(static_cast<char>(v >> 24));
    s.push_back(static_cast<char>(v >> 16));
    s.push_back(static_cast<char>(v >> 8));
    s.push_back(static_cast<char>(v));
}

void put_chunk(std::string& out, const char type[4], const std::string& payload) {
    put_u32(out, static_cast<std::uint32_t>(payload.size()));
    std::string body(type, 4);
    body += payload;
    out += body;
    put_u32(out, crc32(reinterpret_cast<const unsigned char*>(body.data()), body.size()) ^
                     0xFFFFFFFFu);
}

// zlib stream with stored (uncompressed) deflate blocks
std::string zlib_stored(const std::string& raw) {
    std::string z;
    z.push_back(0x78);
    z.push_back(0x01);
    std::size_t pos = 0;
    while (pos < raw.size() || raw.empty()) {
        const std::size_t len = std::min<std::size_t>(65535, raw.size() - pos);
        const bool final = pos + len == raw.size();
        z.push_back(final ? 1 : 0);
        z.push_back(static_cast<char>(len & 0xFF));
        z.push_back(static_cast<char>(len >> 8));
        z.push_back(static_cast<char>(~len & 0xFF));
        z.push_back(static_cast<char>((~len >> 8) & 0xFF));
        z.append(raw, pos, len);
        pos += len;
        if (final) break;
    }
    std::uint32_t a = 1, b = 0;
    for (const unsigned char c : raw) {
        a = (a + c) % 65521;
        b = (b + a) % 65521;
    }
    put_u32(z, (b << 16) | a);
    return z;
}

} // namespace

void write_png(const std::filesystem::path& path, int width, int height,
               const std::vector<unsigned char>& rgb) {
    if (static_cast<std::size_t>(width) * height * 3 != rgb.size())
        throw std::invalid_argument("write_png: buffer size mismatch");
    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    put_u32(ihdr, width);
    put_u32(ihdr, height);
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    put_chunk(out, "IHDR", ihdr);

    std::string raw;
    raw.reserve(static_cast<std::size_t>(height) * (1 + 3 * width));
    for (int y = 0; y < height; ++y) {
        raw.push_back(0); // no filter
        raw.append(reinterpret_cast<const char*>(rgb.data()) +
                       static_cast<std::size_t>(y) * width * 3,
                   static_cast<std::size_t>(width) * 3);
    }
    put_chunk(out, "IDAT", zlib_stored(raw));
    put_chunk(out, "IEND", "");

    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("write_png: cannot open " + path.string());
    f << out;
}

namespace {

std::array<unsigned char, 3> diverging_color(double t) {
    // blue (0) -> white (0.5) -> red (1)
    t = std::clamp(t, 0.0, 1.0);
    const double r = t < 0.5 ? 2.0 * t : 1.0;
    const double b = t < 0.5 ? 1.0 : 2.0 * (1.0 - t);
    const double g = t < 0.5 ? 2.0 * t : 2.0 * (1.0 - t);
    return {static_cast<unsigned char>(255 * r), static_cast<unsigned char>(255 * g),
            static_cast<unsigned char>(255 * b)};
}

} // namespace

std::filesystem::path plot_heatmap(const std::filesystem::path& path,
                                   const std::vector<double>& values, int nx, int ny, double lo,
                                   double hi) {
    if (static_cast<std::size_t>(nx) * ny != values.size())
        throw std::invalid_argument("plot_heatmap: size mismatch");
    const int scale = std::max(1, 512 / std::max(nx, ny));
    const int w = nx * scale, h = ny * scale;
    std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3, 255);
    for (int y = 0; y < h; ++y) {
        const int gy = y / scale;
        for (int x = 0; x < w; ++x) {
            const int gx = x / scale;
            const double v = values[static_cast<std::size_t>(gx) * ny + gy];
            // out-of-range values render white, matching the saturated
            // regions of the reference color scale
            std::array<unsigned char, 3> c{255, 255, 255};
            if (v >= lo && v <= hi) c = diverging_color((v - lo) / (hi - lo));
            const std::size_t at = (static_cast<std::size_t>(h - 1 - y) * w + x) * 3;
            rgb[at] = c[0];
            rgb[at + 1] = c[1];
            rgb[at + 2] = c[2];
        }
    }
    write_png(path, w, h, rgb);
    return path;
}

std::filesystem::path plot_line(const std::filesystem::path& path, const std::vector<double>& x,
                                const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("plot_line: need matching series with >= 2 points");
    const int w = 800, h = 500, margin = 20;
    std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3, 255);
    const double x_lo = *std::min_element(x.begin(), x.end());
    const double x_hi = *std::max_element(x.begin(), x.end());
    const double y_lo = *std::min_element(y.begin(), y.end());
    const double y_hi = *std::max_element(y.begin(), y.end());
    const double x_span = x_hi - x_lo > 0 ? x_hi - x_lo : 1.0;
    const double y_span = y_hi - y_lo > 0 ? y_hi - y_lo : 1.0;
    auto px = [&](double v) {
        return margin + static_cast<int>((w - 2 * margin - 1) * (v - x_lo) / x_span);
    };
    auto py = [&](double v) {
        return h - 1 - margin - static_cast<int>((h - 2 * margin - 1) * (v - y_lo) / y_span);
    };
    auto set = [&](int cx, int cy) {
        if (cx < 0 || cx >= w || cy < 0 || cy >= h) return;
        const std::size_t at = (static_cast<std::size_t>(cy) * w + cx) * 3;
        rgb[at] = 0;
        rgb[at + 1] = 60;
        rgb[at + 2] = 160;
    };
    for (std::size_t i = 1; i < x.size(); ++i) {
        int x0 = px(x[i - 1]), y0 = py(y[i - 1]);
        const int x1 = px(x[i]), y1 = py(y[i]);
        const int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
        const int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        for (;;) {
            set(x0, y0);
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
    }
    write_png(path, w, h, rgb);
    return path;
}

} // namespace polaring
