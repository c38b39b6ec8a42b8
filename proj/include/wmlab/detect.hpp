#pragma once

#include <optional>
#include <span>
#include <string>

namespace wmlab {

enum class Rule { single, double_sided, sign };

std::string to_string(Rule r);
Rule rule_from_string(const std::string& s);

struct DecisionOutcome {
    double statistic = 0.0;
    double psi = 0.0;
    Rule rule = Rule::single;
    // Verification: 1 for H1, 0 for H0. Decoding: +1 or -1.
    int verdict = 0;
};

// (1/N) sum s_i w_i
double correlate(std::span<const double> s, std::span<const double> w);

// (1/N) sum |s_i|^xi w_i
double generalized_correlate(std::span<const double> s, std::span<const double> w, double xi);

// (1/N) sum |s_i + a w_i|^xi - |s_i - a w_i|^xi
double optimum_decode_ass(std::span<const double> s, std::span<const double> w, double a, double xi);

// (1/N) sum |s_i|^xi - |s_i - a m_i w_i|^xi, with m_i = 1 when masks are empty.
double optimum_detect_ass(std::span<const double> s, std::span<const double> w, double a, double xi,
                          std::span<const double> masks = {});

// (1/N) sum |s_i|^shape [1 - (1 + a w_i)^-shape], a in (0, 1).
double optimum_detect_mss(std::span<const double> s, std::span<const double> w, double a, double shape);

// (1/N) sum y_i^2 / (sx^2 + sv^2) - y_i^2 / (sx^2 (1 + a w_i)^2 + sv^2)
double optimum_detect_gaussian_attacked(std::span<const double> y, std::span<const double> w, double a,
                                        double sigma_x, double sigma_v);

// (1/N) sum s_i w_i / (gamma^2 + s_i^2)
double cauchy_statistic(std::span<const double> s, std::span<const double> w, double gamma_c);

// Distance of the projection of y to the nearest centroid of delta Z + d,
// d defaulting to delta/2.
double stdm_distance(std::span<const double> y, std::span<const double> w, double delta_step,
                     std::optional<double> dither = {});

// H1 iff stdm_distance < psi, psi in [0, delta/2].
DecisionOutcome stdm_detect(std::span<const double> y, std::span<const double> w, double delta_step, double psi,
                            std::optional<double> dither = {});

DecisionOutcome decide(double statistic, double psi, Rule rule);

}  // namespace wmlab
