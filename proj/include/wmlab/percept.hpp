#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace wmlab {

// Grayscale image with real-valued pixels; 8-bit images hold integers in [0, 255].
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<double> pixels;  // row-major

    double& at(std::size_t row, std::size_t col) { return pixels[row * width + col]; }
    double at(std::size_t row, std::size_t col) const { return pixels[row * width + col]; }
};

GrayImage read_pgm(const std::string& path);
// Rounds and clamps to [0, 255] on write.
void write_pgm(const GrayImage& img, const std::string& path);
GrayImage to_8bit(const GrayImage& img);

using Block = std::array<double, 64>;  // index i * 8 + j, i the row frequency

struct BlockDctImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<Block> blocks;  // row-major block order

    std::size_t block_count() const { return blocks.size(); }
    double mean_dc() const;
};

// Orthonormal 8x8 DCT-II of a block and its inverse.
Block dct8x8(const Block& pixels);
Block idct8x8(const Block& coeffs);

BlockDctImage block_dct(const GrayImage& img);
GrayImage inverse_dct(const BlockDctImage& d);

// (row, col) of the 1-based AC index along the JPEG zigzag scan.
std::pair<int, int> zigzag_position(int ac_index);
std::vector<double> zigzag_extract(const BlockDctImage& d, int ac_index);
void zigzag_insert(BlockDctImage& d, int ac_index, const std::vector<double>& values);

enum class MaskStage { frequency, luminance, contrast };
std::string to_string(MaskStage s);
MaskStage mask_stage_from_string(const std::string& s);

// DCT frequency sensitivity thresholds, row-major.
const std::array<double, 64>& frequency_table();

inline constexpr double kLuminanceExponent = 0.649;
inline constexpr double kContrastExponent = 0.7;

struct PerceptualMask {
    std::size_t width = 0;
    std::size_t height = 0;
    MaskStage stage = MaskStage::frequency;
    double mean_dc = 0.0;
    std::vector<Block> m;

    std::vector<double> zigzag_extract(int ac_index) const;
};

// Each stage includes the earlier ones.
PerceptualMask watson_mask(const BlockDctImage& d, MaskStage stage);

// CSV rows k,i,j,m.
void write_mask_csv(const PerceptualMask& mask, std::ostream& os);

// 10 log10(255^2 / MSE); +infinity for identical images.
double psnr(const GrayImage& a, const GrayImage& b);

}  // namespace wmlab
