#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wmlab/rng.hpp"

namespace wmlab {

enum class ModelKind { ggd, weibull, cauchy };

std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

// Statistical description of host coefficients.
//   GGD:     f(x) = A exp(-(beta |x|)^c), unit variance scaled by sigma_x
//   Weibull: f(x) = (delta/theta) (x/theta)^(delta-1) exp(-(x/theta)^delta), x >= 0
//   Cauchy:  f(x) = gamma / (pi (gamma^2 + x^2)), location 0
struct HostModel {
    ModelKind kind = ModelKind::ggd;
    double c = 2.0;
    double sigma_x = 1.0;
    double theta = 1.0;
    double delta = 1.0;
    double gamma = 1.0;

    static HostModel ggd(double c, double sigma_x);
    static HostModel weibull(double theta, double delta);
    static HostModel cauchy(double gamma);

    // Throws DomainError if any parameter of the active kind is not > 0.
    void validate() const;

    double beta() const;       // GGD scale constant
    double amplitude() const;  // GGD normalizing constant A
};

struct SampleBatch {
    std::vector<double> values;
    std::uint64_t seed = 0;
    std::optional<HostModel> model;
};

// Gaussian tail probability Q(x) = P(N(0,1) > x) and its inverse.
double q(double x);
double q_inv(double p);

double pdf(const HostModel& m, double x);

// E|X|^xi. Cauchy only for xi < 1.
double abs_moment(const HostModel& m, double xi);

// Mean-variation ratio xi E|X|^xi / sqrt(Var |X|^xi).
double mvr(const HostModel& m, double xi);

// xi E|X|^xi / sqrt(E|X|^(2 xi)); the random-watermark counterpart of mvr.
double amr(const HostModel& m, double xi);

// Variance of |X|^xi.
double abs_moment_var(const HostModel& m, double xi);

// Fits a model of the given kind.
//   GGD:     moment-ratio inversion of E|X|^2 / E X^2, sigma_x = RMS
//   Weibull: maximum likelihood, bisection on the shape equation
//   Cauchy:  maximum likelihood for the scale
HostModel estimate(std::span<const double> samples, ModelKind kind);

// Supported GGD shape range of the sampler.
inline constexpr double kMinSamplerShape = 0.05;
inline constexpr double kMaxSamplerShape = 50.0;

SampleBatch sample(const HostModel& m, std::size_t n, std::uint64_t seed);

// Fills out with independent draws from m using the supplied stream.
void draw(const HostModel& m, Rng& rng, std::span<double> out);

// The textbook constructions for GGD c in {0.5, 1, 2} (sum of two
// exponentials, exponential, Box-Muller). Kept as an independent check of
// the general Gamma-based sampler. Other shapes throw UnsupportedError.
SampleBatch sample_special(const HostModel& m, std::size_t n, std::uint64_t seed);

}  // namespace wmlab
