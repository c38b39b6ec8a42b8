#include "wmlab/percept.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "wmlab/errors.hpp"

namespace wmlab {

namespace {

const std::array<double, 64>& dct_basis() {
    static const std::array<double, 64> c = [] {
        std::array<double, 64> t{};
        for (int u = 0; u < 8; ++u) {
            double alpha = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x) t[u * 8 + x] = alpha * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
        }
        return t;
    }();
    return c;
}

void check_dims(std::size_t w, std::size_t h) {
    if (w == 0 || h == 0 || w % 8 != 0 || h % 8 != 0) {
        throw ArgumentError("image dimensions must be positive multiples of 8");
    }
}

// Skips whitespace and '#' comments in a PGM header.
std::size_t read_header_int(std::istream& is) {
    for (;;) {
        int ch = is.peek();
        if (ch == '#') {
            std::string line;
            std::getline(is, line);
        } else if (std::isspace(ch)) {
            is.get();
        } else {
            break;
        }
    }
    long long v = -1;
    if (!(is >> v) || v <= 0) throw ArgumentError("malformed PGM header");
    return static_cast<std::size_t>(v);
}

}  // namespace

GrayImage read_pgm(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ArgumentError("cannot open image '" + path + "'");
    std::string magic;
    is >> magic;
    if (magic != "P5") throw ArgumentError("only binary PGM (P5) is supported");
    GrayImage img;
    img.width = read_header_int(is);
    img.height = read_header_int(is);
    std::size_t maxval = read_header_int(is);
    if (maxval > 255) throw UnsupportedError("only 8-bit PGM is supported");
    is.get();
    std::vector<unsigned char> raw(img.width * img.height);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size()) throw ArgumentError("truncated PGM data");
    img.pixels.assign(raw.begin(), raw.end());
    return img;
}

GrayImage to_8bit(const GrayImage& img) {
    GrayImage out = img;
    for (double& p : out.pixels) p = std::clamp(std::round(p), 0.0, 255.0);
    return out;
}

void write_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ArgumentError("cannot write image '" + path + "'");
    os << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t k = 0; k < raw.size(); ++k) {
        raw[k] = static_cast<unsigned char>(std::clamp(std::round(img.pixels[k]), 0.0, 255.0));
    }
    os.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

double BlockDctImage::mean_dc() const {
    double s = 0.0;
    for (const Block& b : blocks) s += b[0];
    return s / static_cast<double>(blocks.size());
}

Block dct8x8(const Block& p) {
    const auto& c = dct_basis();
    Block tmp{}, out{};
    // rows then columns
    for (int x = 0; x < 8; ++x)
        for (int v = 0; v < 8; ++v) {
            double s = 0.0;
            for (int y = 0; y < 8; ++y) s += c[v * 8 + y] * p[x * 8 + y];
            tmp[x * 8 + v] = s;
        }
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double s = 0.0;
            for (int x = 0; x < 8; ++x) s += c[u * 8 + x] * tmp[x * 8 + v];
            out[u * 8 + v] = s;
        }
    return out;
}

Block idct8x8(const Block& q) {
    const auto& c = dct_basis();
    Block tmp{}, out{};
    for (int u = 0; u < 8; ++u)
        for (int y = 0; y < 8; ++y) {
            double s = 0.0;
            for (int v = 0; v < 8; ++v) s += c[v * 8 + y] * q[u * 8 + v];
            tmp[u * 8 + y] = s;
        }
    for (int x = 0; x < 8; ++x)
        for (int y = 0; y < 8; ++y) {
            double s = 0.0;
            for (int u = 0; u < 8; ++u) s += c[u * 8 + x] * tmp[u * 8 + y];
            out[x * 8 + y] = s;
        }
    return out;
}

BlockDctImage block_dct(const GrayImage& img) {
    check_dims(img.width, img.height);
    BlockDctImage d;
    d.width = img.width;
    d.height = img.height;
    const std::size_t bw = img.width / 8, bh = img.height / 8;
    d.blocks.resize(bw * bh);
    for (std::size_t by = 0; by < bh; ++by)
        for (std::size_t bx = 0; bx < bw; ++bx) {
            Block p{};
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y) p[x * 8 + y] = img.at(by * 8 + x, bx * 8 + y);
            d.blocks[by * bw + bx] = dct8x8(p);
        }
    return d;
}

GrayImage inverse_dct(const BlockDctImage& d) {
    check_dims(d.width, d.height);
    GrayImage img;
    img.width = d.width;
    img.height = d.height;
    img.pixels.assign(d.width * d.height, 0.0);
    const std::size_t bw = d.width / 8, bh = d.height / 8;
    if (d.blocks.size() != bw * bh) throw ArgumentError("block count does not match dimensions");
    for (std::size_t by = 0; by < bh; ++by)
        for (std::size_t bx = 0; bx < bw; ++bx) {
            Block p = idct8x8(d.blocks[by * bw + bx]);
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y) img.at(by * 8 + x, bx * 8 + y) = p[x * 8 + y];
        }
    return img;
}

std::pair<int, int> zigzag_position(int ac_index) {
    if (ac_index < 1 || ac_index > 63) throw ArgumentError("zigzag AC index must lie in [1, 63]");
    int k = 0;
    for (int s = 0; s < 15; ++s) {
        // Even diagonals run up-right (row decreasing), odd ones down-left.
        int lo = std::max(0, s - 7), hi = std::min(s, 7);
        for (int t = lo; t <= hi; ++t) {
            int row = s % 2 == 0 ? s - t : t;
            int col = s - row;
            if (k == ac_index) return {row, col};
            ++k;
        }
    }
    return {7, 7};
}

std::vector<double> zigzag_extract(const BlockDctImage& d, int ac_index) {
    auto [r, c] = zigzag_position(ac_index);
    std::vector<double> out(d.blocks.size());
    for (std::size_t k = 0; k < d.blocks.size(); ++k) out[k] = d.blocks[k][r * 8 + c];
    return out;
}

void zigzag_insert(BlockDctImage& d, int ac_index, const std::vector<double>& values) {
    auto [r, c] = zigzag_position(ac_index);
    if (values.size() != d.blocks.size()) throw ArgumentError("zigzag_insert: one value per block required");
    for (std::size_t k = 0; k < d.blocks.size(); ++k) d.blocks[k][r * 8 + c] = values[k];
}

std::string to_string(MaskStage s) {
    switch (s) {
        case MaskStage::frequency: return "frequency";
        case MaskStage::luminance: return "luminance";
        case MaskStage::contrast: return "contrast";
    }
    return "?";
}

MaskStage mask_stage_from_string(const std::string& s) {
    if (s == "frequency") return MaskStage::frequency;
    if (s == "luminance") return MaskStage::luminance;
    if (s == "contrast") return MaskStage::contrast;
    throw ConfigError("unknown mask stage '" + s + "'");
}

const std::array<double, 64>& frequency_table() {
    static const std::array<double, 64> t = {
        1.40, 1.01, 1.16, 1.66, 2.40,  3.43,  4.79,  6.56,   //
        1.01, 1.45, 1.32, 1.52, 2.00,  2.71,  3.67,  4.93,   //
        1.16, 1.32, 2.24, 2.59, 2.98,  3.64,  4.60,  5.88,   //
        1.66, 1.52, 2.59, 3.77, 4.55,  5.30,  6.28,  7.60,   //
        2.40, 2.00, 2.98, 4.55, 6.15,  7.46,  8.71,  10.17,  //
        3.43, 2.71, 3.64, 5.30, 7.46,  9.62,  11.58, 13.51,  //
        4.79, 3.67, 4.60, 6.28, 8.71,  11.58, 14.50, 17.29,  //
        6.56, 4.93, 5.88, 7.60, 10.17, 13.51, 17.29, 21.15,
    };
    return t;
}

std::vector<double> PerceptualMask::zigzag_extract(int ac_index) const {
    auto [r, c] = zigzag_position(ac_index);
    std::vector<double> out(m.size());
    for (std::size_t k = 0; k < m.size(); ++k) out[k] = m[k][r * 8 + c];
    return out;
}

PerceptualMask watson_mask(const BlockDctImage& d, MaskStage stage) {
    if (d.blocks.empty()) throw ArgumentError("watson_mask: empty image");
    PerceptualMask pm;
    pm.width = d.width;
    pm.height = d.height;
    pm.stage = stage;
    pm.mean_dc = d.mean_dc();
    pm.m.assign(d.blocks.size(), frequency_table());
    if (stage == MaskStage::frequency) return pm;

    if (!(pm.mean_dc > 0.0)) throw DomainError("luminance masking needs a positive mean DC");
    for (std::size_t k = 0; k < d.blocks.size(); ++k) {
        double dc = d.blocks[k][0];
        if (!(dc > 0.0)) throw DomainError("luminance masking needs positive DC coefficients (block " +
                                           std::to_string(k) + ")");
        double f = std::pow(dc / pm.mean_dc, kLuminanceExponent);
        for (double& v : pm.m[k]) v *= f;
    }
    if (stage == MaskStage::luminance) return pm;

    for (std::size_t k = 0; k < d.blocks.size(); ++k) {
        for (int t = 0; t < 64; ++t) {
            double m = pm.m[k][t];
            double x = std::abs(d.blocks[k][t]);
            pm.m[k][t] = std::max(m, std::pow(x, kContrastExponent) * std::pow(m, 1.0 - kContrastExponent));
        }
    }
    return pm;
}

void write_mask_csv(const PerceptualMask& mask, std::ostream& os) {
    os << "k,i,j,m\n";
    os.precision(17);
    for (std::size_t k = 0; k < mask.m.size(); ++k)
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j) os << k << "," << i << "," << j << "," << mask.m[k][i * 8 + j] << "\n";
}

double psnr(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height) throw ArgumentError("psnr: image sizes differ");
    double se = 0.0;
    for (std::size_t k = 0; k < a.pixels.size(); ++k) {
        double d = a.pixels[k] - b.pixels[k];
        se += d * d;
    }
    if (se == 0.0) return std::numeric_limits<double>::infinity();
    double mse = se / static_cast<double>(a.pixels.size());
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

}  // namespace wmlab
