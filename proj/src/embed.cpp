#include "wmlab/embed.hpp"

#include <cmath>
#include <numeric>

#include "wmlab/errors.hpp"
#include "wmlab/rng.hpp"

namespace wmlab {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> w) {
    if (x.size() != w.size()) {
        throw ArgumentError("length mismatch: host has " + std::to_string(x.size()) + " entries, watermark " +
                            std::to_string(w.size()));
    }
    if (x.empty()) throw ArgumentError("empty host vector");
}

double mask_at(const SchemeConfig& cfg, std::size_t i) { return cfg.mask.empty() ? 1.0 : cfg.mask[i]; }

void require_mask_length(const SchemeConfig& cfg, std::size_t n) {
    if (!cfg.mask.empty() && cfg.mask.size() != n) throw ArgumentError("mask length differs from host length");
}

}  // namespace

WatermarkSequence::WatermarkSequence(std::vector<double> w) : w_(std::move(w)) {
    if (w_.size() < 2 || w_.size() % 2 != 0) throw ArgumentError("watermark length must be even and >= 2");
    double sum = 0.0;
    for (double v : w_) {
        if (v != 1.0 && v != -1.0) throw ArgumentError("watermark entries must be +1 or -1");
        sum += v;
    }
    if (sum != 0.0) throw ArgumentError("watermark must have zero sum");
}

WatermarkSequence gen_watermark(std::uint64_t seed, std::size_t n) {
    if (n < 2 || n % 2 != 0) throw ArgumentError("watermark length must be even and >= 2, got " + std::to_string(n));
    std::vector<double> w(n, 1.0);
    std::fill(w.begin() + static_cast<std::ptrdiff_t>(n / 2), w.end(), -1.0);
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(w[i], w[rng.below(i + 1)]);
    return WatermarkSequence(std::move(w));
}

std::vector<double> gen_random_watermark(std::uint64_t seed, std::size_t n) {
    std::vector<double> w(n);
    Rng rng(seed);
    for (double& v : w) v = rng.sign();
    return w;
}

std::string to_string(Scheme s) {
    switch (s) {
        case Scheme::ass: return "ASS";
        case Scheme::mss: return "MSS";
        case Scheme::barni: return "BARNI";
        case Scheme::gen_barni: return "GEN_BARNI";
        case Scheme::emss: return "EMSS";
        case Scheme::ds_ass: return "DS_ASS";
        case Scheme::ds_mss: return "DS_MSS";
        case Scheme::ds_bmss: return "DS_BMSS";
        case Scheme::ds_ass_hir: return "DS_ASS_HIR";
        case Scheme::stdm: return "STDM";
        case Scheme::qim: return "QIM";
        case Scheme::dc_qim: return "DC_QIM";
        case Scheme::ass_perceptual: return "ASS_PERCEPTUAL";
        case Scheme::ds_ass_perceptual: return "DS_ASS_PERCEPTUAL";
        case Scheme::ds_cauchy: return "DS_CAUCHY";
    }
    return "?";
}

Scheme scheme_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Scheme::ds_cauchy); ++i) {
        auto sc = static_cast<Scheme>(i);
        if (to_string(sc) == s) return sc;
    }
    throw ConfigError("unknown scheme '" + s + "'");
}

bool is_double_sided(Scheme s) {
    switch (s) {
        case Scheme::ds_ass:
        case Scheme::ds_mss:
        case Scheme::ds_bmss:
        case Scheme::ds_ass_hir:
        case Scheme::ds_ass_perceptual:
        case Scheme::ds_cauchy:
            return true;
        default:
            return false;
    }
}

bool is_multiplicative(Scheme s) {
    return s == Scheme::mss || s == Scheme::emss || s == Scheme::ds_mss || s == Scheme::barni;
}

double SchemeConfig::xi() const {
    if (xi_order) return *xi_order;
    return scheme == Scheme::gen_barni ? 0.7 : 1.0;
}

std::vector<std::string> SchemeConfig::validate() const {
    std::vector<std::string> warnings;
    if (!std::isfinite(a) || a < 0.0) throw ConfigError("embedding strength a must be finite and >= 0");
    if (b != 1 && b != -1) throw ConfigError("message bit b must be +1 or -1");
    if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("lambda must lie in [0, 1]");
    if (xi_order && !(*xi_order >= 0.0)) throw ConfigError("xi_order must be >= 0");
    for (double m : mask) {
        if (!(m > 0.0)) throw ConfigError("mask entries must be > 0");
    }
    if (is_multiplicative(scheme)) {
        if (a > 0.5) throw ConfigError("multiplicative schemes require a <= 0.5");
        if (a > 0.2) warnings.push_back("a = " + std::to_string(a) + " is outside the small-a regime (a <= 0.2)");
    }
    switch (scheme) {
        case Scheme::emss:
            if (!(gamma_order > 0.0)) throw ConfigError("EMSS requires gamma_order > 0");
            break;
        case Scheme::stdm:
        case Scheme::qim:
        case Scheme::dc_qim:
            if (!(delta_step > 0.0)) throw ConfigError("quantizer step delta_step must be > 0");
            break;
        case Scheme::ds_ass_hir:
            if (!(target_l > 0.0)) throw ConfigError("HIR target_l must be > 0");
            break;
        case Scheme::ds_cauchy:
            if (!cauchy_gamma) throw ConfigError("DS_CAUCHY requires cauchy_gamma");
            if (!(*cauchy_gamma > 0.0)) throw ConfigError("cauchy_gamma must be > 0");
            break;
        default:
            break;
    }
    return warnings;
}

double quantize(double x, double delta) { return delta * std::floor(x / delta + 0.5); }

double lattice_quantize(double x, double delta, double d) { return quantize(x - d, delta) + d; }

std::pair<double, double> qim_dithers(const SchemeConfig& cfg) {
    const double delta = cfg.delta_step;
    if (cfg.dither_seed) {
        Rng rng(*cfg.dither_seed);
        double d0 = (rng.uniform() - 0.5) * delta;
        double d1 = d0 < 0.0 ? d0 + delta / 2.0 : d0 - delta / 2.0;
        return {d0, d1};
    }
    return {-delta / 4.0, delta / 4.0};
}

double projection(std::span<const double> x, std::span<const double> w) {
    require_same_length(x, w);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * w[i];
    return s / static_cast<double>(x.size());
}

double distribution_factor(std::span<const double> x, std::span<const double> w, double gamma_order) {
    require_same_length(x, w);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double p = std::pow(std::abs(x[i]), gamma_order);
        num += p * w[i];
        den += p;
    }
    if (den == 0.0) throw DegenerateHostError("all-zero host: distribution factor undefined");
    return num / den;
}

std::vector<double> embed_ss(std::span<const double> x, std::span<const double> w, const SchemeConfig& cfg) {
    require_same_length(x, w);
    require_mask_length(cfg, x.size());
    const double ba = cfg.b * cfg.a;
    std::vector<double> s(x.size());
    switch (cfg.scheme) {
        case Scheme::ass:
        case Scheme::ass_perceptual:
            for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + ba * mask_at(cfg, i) * w[i];
            break;
        case Scheme::mss:
            for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] * (1.0 + ba * w[i]);
            break;
        case Scheme::barni:
            for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + ba * std::abs(x[i]) * w[i];
            break;
        case Scheme::gen_barni: {
            const double z = cfg.xi();
            for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] + ba * std::pow(std::abs(x[i]), z) * w[i];
            break;
        }
        default:
            throw ConfigError("embed_ss does not handle scheme " + to_string(cfg.scheme));
    }
    return s;
}

std::vector<double> embed_emss(std::span<const double> x, std::span<const double> w, const SchemeConfig& cfg) {
    if (cfg.scheme != Scheme::emss) throw ConfigError("embed_emss requires scheme EMSS");
    if (!(cfg.gamma_order > 0.0)) throw ConfigError("EMSS requires gamma_order > 0");
    const double eta = distribution_factor(x, w, cfg.gamma_order);
    const double ba = cfg.b * cfg.a;
    const double reject = cfg.lambda * eta / cfg.gamma_order;
    std::vector<double> s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = x[i] * (1.0 + ba * w[i] - reject * w[i]);
    return s;
}

std::vector<double> embed_double_sided(std::span<const double> x, std::span<const double> w,
                                       const SchemeConfig& cfg) {
    require_same_length(x, w);
    require_mask_length(cfg, x.size());
    const std::size_t n = x.size();
    const double a = cfg.a;
    double xbar = 0.0;
    switch (cfg.scheme) {
        case Scheme::ds_ass:
        case Scheme::ds_ass_perceptual:
        case Scheme::ds_bmss:
            xbar = projection(x, w);
            break;
        case Scheme::ds_mss: {
            const double xi = cfg.xi();
            for (std::size_t i = 0; i < n; ++i) xbar += std::pow(std::abs(x[i]), xi) * w[i];
            xbar /= static_cast<double>(n);
            break;
        }
        case Scheme::ds_cauchy: {
            if (!cfg.cauchy_gamma) throw ConfigError("DS_CAUCHY requires cauchy_gamma");
            const double g2 = *cfg.cauchy_gamma * *cfg.cauchy_gamma;
            for (std::size_t i = 0; i < n; ++i) xbar += x[i] * w[i] / (g2 + x[i] * x[i]);
            xbar /= static_cast<double>(n);
            break;
        }
        default:
            throw ConfigError("embed_double_sided does not handle scheme " + to_string(cfg.scheme));
    }
    const double sgn = xbar > 0.0 ? 1.0 : -1.0;
    std::vector<double> s(n);
    switch (cfg.scheme) {
        case Scheme::ds_mss:
            for (std::size_t i = 0; i < n; ++i) s[i] = x[i] * (1.0 + sgn * a * w[i]);
            break;
        case Scheme::ds_bmss: {
            const double z = cfg.xi();
            for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + sgn * a * std::pow(std::abs(x[i]), z) * w[i];
            break;
        }
        default:
            for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + sgn * a * mask_at(cfg, i) * w[i];
            break;
    }
    return s;
}

std::vector<double> embed_quantized(std::span<const double> x, std::span<const double> w,
                                    const SchemeConfig& cfg) {
    require_same_length(x, w);
    const std::size_t n = x.size();
    std::vector<double> s(n);
    switch (cfg.scheme) {
        case Scheme::qim:
        case Scheme::dc_qim: {
            if (!(cfg.delta_step > 0.0)) throw ConfigError("quantizer step delta_step must be > 0");
            auto [d0, d1] = qim_dithers(cfg);
            const double d = cfg.b > 0 ? d1 : d0;
            const double lam = cfg.scheme == Scheme::qim ? 1.0 : cfg.lambda;
            for (std::size_t i = 0; i < n; ++i) {
                double qv = lattice_quantize(x[i], cfg.delta_step, d);
                s[i] = x[i] + lam * (qv - x[i]);
            }
            break;
        }
        case Scheme::stdm: {
            if (!(cfg.delta_step > 0.0)) throw ConfigError("quantizer step delta_step must be > 0");
            const double d = cfg.dither.value_or(cfg.delta_step / 2.0);
            const double xbar = projection(x, w);
            const double offset = lattice_quantize(xbar, cfg.delta_step, d) - xbar;
            for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + offset * w[i];
            break;
        }
        case Scheme::ds_ass_hir: {
            if (!(cfg.target_l > 0.0)) throw ConfigError("HIR target_l must be > 0");
            const double xbar = projection(x, w);
            const double l = cfg.target_l;
            const double offset = xbar > 0.0 ? (l - xbar) : -(l + xbar);
            for (std::size_t i = 0; i < n; ++i) s[i] = x[i] + offset * w[i];
            break;
        }
        default:
            throw ConfigError("embed_quantized does not handle scheme " + to_string(cfg.scheme));
    }
    return s;
}

std::vector<double> embed(std::span<const double> x, std::span<const double> w, const SchemeConfig& cfg) {
    switch (cfg.scheme) {
        case Scheme::ass:
        case Scheme::ass_perceptual:
        case Scheme::mss:
        case Scheme::barni:
        case Scheme::gen_barni:
            return embed_ss(x, w, cfg);
        case Scheme::emss:
            return embed_emss(x, w, cfg);
        case Scheme::ds_ass:
        case Scheme::ds_mss:
        case Scheme::ds_bmss:
        case Scheme::ds_ass_perceptual:
        case Scheme::ds_cauchy:
            return embed_double_sided(x, w, cfg);
        case Scheme::ds_ass_hir:
        case Scheme::stdm:
        case Scheme::qim:
        case Scheme::dc_qim:
            return embed_quantized(x, w, cfg);
    }
    throw ConfigError("unknown scheme");
}

std::vector<int> qim_decode(std::span<const double> y, const SchemeConfig& cfg) {
    if (!(cfg.delta_step > 0.0)) throw ConfigError("quantizer step delta_step must be > 0");
    auto [d0, d1] = qim_dithers(cfg);
    std::vector<int> bits(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
        double e0 = std::abs(y[i] - lattice_quantize(y[i], cfg.delta_step, d0));
        double e1 = std::abs(y[i] - lattice_quantize(y[i], cfg.delta_step, d1));
        bits[i] = e1 < e0 ? 1 : -1;
    }
    return bits;
}

Distortion distortion(std::span<const double> x, std::span<const double> s, std::optional<double> ex2,
                      std::optional<double> attack_mse) {
    if (x.size() != s.size()) throw ArgumentError("distortion: length mismatch");
    if (x.empty()) throw ArgumentError("distortion: empty input");
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        double d = s[i] - x[i];
        acc += d * d;
    }
    Distortion out;
    out.dt = acc / static_cast<double>(x.size());
    if (ex2) out.dwr_db = 10.0 * std::log10(*ex2 / out.dt);
    if (attack_mse) out.wnr_db = 10.0 * std::log10(out.dt / *attack_mse);
    return out;
}

}  // namespace wmlab
