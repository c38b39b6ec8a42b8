#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmlab/percept.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/theory.hpp"

namespace wmlab {

struct AttackSpec {
    enum class Kind { gaussian_noise, ggd_noise, abs_gaussian_noise, jpeg };
    Kind kind = Kind::gaussian_noise;
    double sigma_v = 1.0;
    double ac = 2.0;
    int qf = 75;
    std::uint64_t seed = 0;

    bool is_noise() const { return kind != Kind::jpeg; }
    void validate() const;
    // Theory-side description of the noise; empty for JPEG.
    std::optional<NoiseModel> noise_model() const;
};

std::string to_string(AttackSpec::Kind k);
AttackSpec::Kind attack_kind_from_string(const std::string& s);

// y = s + v (or s + |v|), v drawn from the spec's seed.
std::vector<double> apply_noise(std::span<const double> s, const AttackSpec& spec);
// Same, drawing from a caller-owned stream.
void add_noise(std::span<double> y, const AttackSpec& spec, Rng& rng);

// Quantization table for a quality factor (standard luminance table, IJG scaling).
std::array<int, 64> jpeg_quant_table(int qf);

// 8x8 DCT quantize/dequantize round trip with level shift; output rounded
// and clamped to [0, 255].
GrayImage jpeg_attack(const GrayImage& img, int qf);
// The same pipeline for one block of pixels.
Block jpeg_block(const Block& pixels, const std::array<int, 64>& table);

}  // namespace wmlab
