#include "wmlab/detect.hpp"

#include <cmath>

#include "wmlab/embed.hpp"
#include "wmlab/errors.hpp"

namespace wmlab {

namespace {

void check(std::span<const double> s, std::span<const double> w) {
    if (s.size() != w.size()) throw ArgumentError("statistic: length mismatch");
    if (s.empty()) throw ArgumentError("statistic: empty input");
}

}  // namespace

std::string to_string(Rule r) {
    switch (r) {
        case Rule::single: return "single";
        case Rule::double_sided: return "double";
        case Rule::sign: return "sign";
    }
    return "?";
}

Rule rule_from_string(const std::string& s) {
    if (s == "single") return Rule::single;
    if (s == "double") return Rule::double_sided;
    if (s == "sign") return Rule::sign;
    throw ConfigError("unknown decision rule '" + s + "'");
}

double correlate(std::span<const double> s, std::span<const double> w) {
    check(s, w);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += s[i] * w[i];
    return acc / static_cast<double>(s.size());
}

double generalized_correlate(std::span<const double> s, std::span<const double> w, double xi) {
    check(s, w);
    if (xi < 0.0) throw ConfigError("xi must be >= 0");
    double acc = 0.0;
    if (xi == 1.0) {
        for (std::size_t i = 0; i < s.size(); ++i) acc += std::abs(s[i]) * w[i];
    } else if (xi == 2.0) {
        for (std::size_t i = 0; i < s.size(); ++i) acc += s[i] * s[i] * w[i];
    } else {
        for (std::size_t i = 0; i < s.size(); ++i) acc += std::pow(std::abs(s[i]), xi) * w[i];
    }
    return acc / static_cast<double>(s.size());
}

double optimum_decode_ass(std::span<const double> s, std::span<const double> w, double a, double xi) {
    check(s, w);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double aw = a * w[i];
        acc += std::pow(std::abs(s[i] + aw), xi) - std::pow(std::abs(s[i] - aw), xi);
    }
    return acc / static_cast<double>(s.size());
}

double optimum_detect_ass(std::span<const double> s, std::span<const double> w, double a, double xi,
                          std::span<const double> masks) {
    check(s, w);
    if (!masks.empty() && masks.size() != s.size()) throw ArgumentError("mask length mismatch");
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        double m = masks.empty() ? 1.0 : masks[i];
        acc += std::pow(std::abs(s[i]), xi) - std::pow(std::abs(s[i] - a * m * w[i]), xi);
    }
    return acc / static_cast<double>(s.size());
}

double optimum_detect_mss(std::span<const double> s, std::span<const double> w, double a, double shape) {
    check(s, w);
    if (!(a > 0.0 && a < 1.0)) throw ConfigError("optimum MSS detector requires a in (0, 1)");
    const double kp = 1.0 - std::pow(1.0 + a, -shape);
    const double km = 1.0 - std::pow(1.0 - a, -shape);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += std::pow(std::abs(s[i]), shape) * (w[i] > 0 ? kp : km);
    return acc / static_cast<double>(s.size());
}

double optimum_detect_gaussian_attacked(std::span<const double> y, std::span<const double> w, double a,
                                        double sigma_x, double sigma_v) {
    check(y, w);
    if (!(sigma_x > 0.0 && sigma_v > 0.0)) throw ConfigError("sigma_x and sigma_v must be > 0");
    const double sx2 = sigma_x * sigma_x, sv2 = sigma_v * sigma_v;
    const double k0 = 1.0 / (sx2 + sv2);
    const double kp = k0 - 1.0 / (sx2 * (1.0 + a) * (1.0 + a) + sv2);
    const double km = k0 - 1.0 / (sx2 * (1.0 - a) * (1.0 - a) + sv2);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * y[i] * (w[i] > 0 ? kp : km);
    return acc / static_cast<double>(y.size());
}

double cauchy_statistic(std::span<const double> s, std::span<const double> w, double gamma_c) {
    check(s, w);
    if (!(gamma_c > 0.0)) throw ConfigError("Cauchy gamma must be > 0");
    const double g2 = gamma_c * gamma_c;
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) acc += s[i] * w[i] / (g2 + s[i] * s[i]);
    return acc / static_cast<double>(s.size());
}

double stdm_distance(std::span<const double> y, std::span<const double> w, double delta_step,
                     std::optional<double> dither) {
    if (!(delta_step > 0.0)) throw ConfigError("delta_step must be > 0");
    double ybar = correlate(y, w);
    return std::abs(ybar - lattice_quantize(ybar, delta_step, dither.value_or(delta_step / 2.0)));
}

DecisionOutcome stdm_detect(std::span<const double> y, std::span<const double> w, double delta_step, double psi,
                            std::optional<double> dither) {
    if (!(psi >= 0.0 && psi <= delta_step / 2.0)) throw ConfigError("STDM threshold must lie in [0, delta/2]");
    DecisionOutcome out;
    out.statistic = stdm_distance(y, w, delta_step, dither);
    out.psi = psi;
    out.rule = Rule::single;
    out.verdict = out.statistic < psi ? 1 : 0;
    return out;
}

DecisionOutcome decide(double statistic, double psi, Rule rule) {
    DecisionOutcome out{statistic, psi, rule, 0};
    switch (rule) {
        case Rule::single:
            out.verdict = statistic > psi ? 1 : 0;
            break;
        case Rule::double_sided:
            out.verdict = std::abs(statistic) > psi ? 1 : 0;
            break;
        case Rule::sign:
            out.psi = 0.0;
            out.verdict = statistic > 0.0 ? 1 : -1;
            break;
    }
    return out;
}

}  // namespace wmlab
