#include "wmlab/channel.hpp"

#include <algorithm>
#include <cmath>

#include "wmlab/errors.hpp"
#include "wmlab/models.hpp"

namespace wmlab {

namespace {

constexpr std::array<int, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,   //
    12, 12, 14, 19, 26,  58,  60,  55,   //
    14, 13, 16, 24, 40,  57,  69,  56,   //
    14, 17, 22, 29, 51,  87,  80,  62,   //
    18, 22, 37, 56, 68,  109, 103, 77,   //
    24, 35, 55, 64, 81,  104, 113, 92,   //
    49, 64, 78, 87, 103, 121, 120, 101,  //
    72, 92, 95, 98, 112, 100, 103, 99,
};

}  // namespace

std::string to_string(AttackSpec::Kind k) {
    switch (k) {
        case AttackSpec::Kind::gaussian_noise: return "gaussian_noise";
        case AttackSpec::Kind::ggd_noise: return "ggd_noise";
        case AttackSpec::Kind::abs_gaussian_noise: return "abs_gaussian_noise";
        case AttackSpec::Kind::jpeg: return "jpeg";
    }
    return "?";
}

AttackSpec::Kind attack_kind_from_string(const std::string& s) {
    if (s == "gaussian_noise") return AttackSpec::Kind::gaussian_noise;
    if (s == "ggd_noise") return AttackSpec::Kind::ggd_noise;
    if (s == "abs_gaussian_noise") return AttackSpec::Kind::abs_gaussian_noise;
    if (s == "jpeg") return AttackSpec::Kind::jpeg;
    throw ConfigError("unknown attack kind '" + s + "'");
}

void AttackSpec::validate() const {
    if (is_noise()) {
        if (!(sigma_v > 0.0) || !std::isfinite(sigma_v)) throw ConfigError("noise sigmaV must be > 0");
        if (kind == Kind::ggd_noise && !(ac > 0.0)) throw ConfigError("GGD noise shape ac must be > 0");
    } else if (qf < 1 || qf > 100) {
        throw ConfigError("JPEG quality factor must lie in [1, 100]");
    }
}

std::optional<NoiseModel> AttackSpec::noise_model() const {
    if (!is_noise()) return std::nullopt;
    NoiseModel nm;
    nm.sigma_v = sigma_v;
    nm.ac = ac;
    switch (kind) {
        case Kind::gaussian_noise: nm.kind = NoiseModel::Kind::gaussian; break;
        case Kind::ggd_noise: nm.kind = NoiseModel::Kind::ggd; break;
        default: nm.kind = NoiseModel::Kind::abs_gaussian; break;
    }
    return nm;
}

void add_noise(std::span<double> y, const AttackSpec& spec, Rng& rng) {
    switch (spec.kind) {
        case AttackSpec::Kind::gaussian_noise:
            for (double& v : y) v += spec.sigma_v * rng.normal();
            break;
        case AttackSpec::Kind::abs_gaussian_noise:
            for (double& v : y) v += spec.sigma_v * std::abs(rng.normal());
            break;
        case AttackSpec::Kind::ggd_noise: {
            std::vector<double> v(y.size());
            draw(HostModel::ggd(spec.ac, spec.sigma_v), rng, v);
            for (std::size_t i = 0; i < y.size(); ++i) y[i] += v[i];
            break;
        }
        case AttackSpec::Kind::jpeg:
            throw ConfigError("apply_noise needs a noise attack");
    }
}

std::vector<double> apply_noise(std::span<const double> s, const AttackSpec& spec) {
    spec.validate();
    if (!spec.is_noise()) throw ConfigError("apply_noise needs a noise attack");
    std::vector<double> y(s.begin(), s.end());
    Rng rng(spec.seed);
    add_noise(y, spec, rng);
    return y;
}

std::array<int, 64> jpeg_quant_table(int qf) {
    if (qf < 1 || qf > 100) throw ArgumentError("JPEG quality factor must lie in [1, 100]");
    const int scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
    std::array<int, 64> t{};
    for (int k = 0; k < 64; ++k) t[k] = std::max(1, (kLuminanceTable[k] * scale + 50) / 100);
    return t;
}

Block jpeg_block(const Block& pixels, const std::array<int, 64>& table) {
    Block shifted;
    for (int k = 0; k < 64; ++k) shifted[k] = pixels[k] - 128.0;
    Block c = dct8x8(shifted);
    for (int k = 0; k < 64; ++k) c[k] = std::round(c[k] / table[k]) * table[k];
    Block out = idct8x8(c);
    for (double& p : out) p = std::clamp(std::round(p + 128.0), 0.0, 255.0);
    return out;
}

GrayImage jpeg_attack(const GrayImage& img, int qf) {
    if (img.width == 0 || img.height == 0 || img.width % 8 != 0 || img.height % 8 != 0) {
        throw ArgumentError("JPEG attack needs dimensions that are multiples of 8");
    }
    const auto table = jpeg_quant_table(qf);
    GrayImage out = img;
    for (std::size_t by = 0; by < img.height; by += 8)
        for (std::size_t bx = 0; bx < img.width; bx += 8) {
            Block p;
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y) p[x * 8 + y] = std::clamp(std::round(img.at(by + x, bx + y)), 0.0, 255.0);
            Block q = jpeg_block(p, table);
            for (int x = 0; x < 8; ++x)
                for (int y = 0; y < 8; ++y) out.at(by + x, bx + y) = q[x * 8 + y];
        }
    return out;
}

}  // namespace wmlab
