#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wmlab {

// Bipolar watermark with exactly N/2 entries of each sign.
class WatermarkSequence {
public:
    // Validates: N even, N >= 2, entries in {+1, -1}, zero sum.
    explicit WatermarkSequence(std::vector<double> w);

    std::span<const double> values() const { return w_; }
    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }

private:
    std::vector<double> w_;
};

WatermarkSequence gen_watermark(std::uint64_t seed, std::size_t n);

// Independent +-1 entries without the zero-sum constraint; used only to
// reproduce the random-watermark comparison setup.
std::vector<double> gen_random_watermark(std::uint64_t seed, std::size_t n);

enum class Scheme {
    ass,
    mss,
    barni,
    gen_barni,
    emss,
    ds_ass,
    ds_mss,
    ds_bmss,
    ds_ass_hir,
    stdm,
    qim,
    dc_qim,
    ass_perceptual,
    ds_ass_perceptual,
    ds_cauchy,
};

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

bool is_double_sided(Scheme s);
bool is_multiplicative(Scheme s);

struct SchemeConfig {
    Scheme scheme = Scheme::ass;
    double a = 1.0;
    int b = 1;
    double lambda = 0.0;
    double gamma_order = 1.0;
    // Projection / detection / Barni exponent. Unset means the scheme's
    // default (0.7 for GEN_BARNI, 1.0 otherwise).
    std::optional<double> xi_order;
    double delta_step = 1.0;
    // Quantizer dither; STDM defaults to delta_step / 2.
    std::optional<double> dither;
    // When set, QIM/DC-QIM use a key-dependent dither pair instead of +-delta/4.
    std::optional<std::uint64_t> dither_seed;
    double target_l = 1.0;
    std::vector<double> mask;
    std::optional<double> cauchy_gamma;

    double xi() const;
    // Throws ConfigError on hard violations; returns advisory warnings.
    std::vector<std::string> validate() const;
};

// Base quantizer q_delta(x) = delta * floor(x / delta + 1/2).
double quantize(double x, double delta);

// Dither pair (d[0] for b = -1, d[1] for b = +1) used by QIM/DC-QIM.
std::pair<double, double> qim_dithers(const SchemeConfig& cfg);

// Lattice quantizer with centroids on delta Z + d.
double lattice_quantize(double x, double delta, double d);

// Projection (1/N) sum x_i w_i.
double projection(std::span<const double> x, std::span<const double> w);

// EMSS distribution factor sum |x|^gamma w / sum |x|^gamma.
double distribution_factor(std::span<const double> x, std::span<const double> w, double gamma_order);

std::vector<double> embed_ss(std::span<const double> x, std::span<const double> w, const SchemeConfig& cfg);
std::vector<double> embed_emss(std::span<const double> x, std::span<const double> w, const SchemeConfig& cfg);
std::vector<double> embed_double_sided(std::span<const double> x, std::span<const double> w,
                                       const SchemeConfig& cfg);
std::vector<double> embed_quantized(std::span<const double> x, std::span<const double> w,
                                    const SchemeConfig& cfg);

// Dispatches on cfg.scheme.
std::vector<double> embed(std::span<const double> x, std::span<const double> w, const SchemeConfig& cfg);

// Per-sample minimum-distance decoding of QIM / DC-QIM data.
std::vector<int> qim_decode(std::span<const double> y, const SchemeConfig& cfg);

struct Distortion {
    double dt = 0.0;
    std::optional<double> dwr_db;
    std::optional<double> wnr_db;
};

// dt = mean squared difference; dwr from a caller-supplied E X^2; wnr from a
// caller-supplied attack MSE.
Distortion distortion(std::span<const double> x, std::span<const double> s, std::optional<double> ex2 = {},
                      std::optional<double> attack_mse = {});

}  // namespace wmlab
