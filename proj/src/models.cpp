#include "wmlab/models.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "wmlab/errors.hpp"

namespace wmlab {

namespace {

constexpr double kPi = std::numbers::pi;

// Bisection for a sign change of f on [lo, hi]; f(lo) and f(hi) must differ
// in sign. Stops when |f| <= ftol or the bracket collapses.
double bisect(const std::function<double(double)>& f, double lo, double hi, double ftol,
              const std::string& what) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0)) {
        throw NonConvergenceError(what + ": root not bracketed", std::min(std::abs(flo), std::abs(fhi)));
    }
    double mid = 0.5 * (lo + hi);
    double fmid = f(mid);
    for (int it = 0; it < 400; ++it) {
        mid = 0.5 * (lo + hi);
        fmid = f(mid);
        if (std::abs(fmid) <= ftol || hi - lo <= 1e-15 * std::max(1.0, std::abs(mid))) return mid;
        if ((fmid > 0) == (flo > 0)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    throw NonConvergenceError(what + ": iteration limit", std::abs(fmid));
}

double ggd_moment_ratio(double c) {
    // E|X|^2 / E X^2 for a GGD of shape c.
    return std::exp(2.0 * std::lgamma(2.0 / c) - std::lgamma(1.0 / c) - std::lgamma(3.0 / c));
}

void require_shape_supported(double c) {
    if (c < kMinSamplerShape || c > kMaxSamplerShape) {
        throw UnsupportedError("GGD shape c=" + std::to_string(c) + " outside sampler range [" +
                               std::to_string(kMinSamplerShape) + ", " + std::to_string(kMaxSamplerShape) + "]");
    }
}

}  // namespace

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::ggd: return "ggd";
        case ModelKind::weibull: return "weibull";
        case ModelKind::cauchy: return "cauchy";
    }
    return "?";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "ggd") return ModelKind::ggd;
    if (s == "weibull") return ModelKind::weibull;
    if (s == "cauchy") return ModelKind::cauchy;
    throw ConfigError("unknown model kind '" + s + "'");
}

HostModel HostModel::ggd(double c, double sigma_x) {
    HostModel m;
    m.kind = ModelKind::ggd;
    m.c = c;
    m.sigma_x = sigma_x;
    m.validate();
    return m;
}

HostModel HostModel::weibull(double theta, double delta) {
    HostModel m;
    m.kind = ModelKind::weibull;
    m.theta = theta;
    m.delta = delta;
    m.validate();
    return m;
}

HostModel HostModel::cauchy(double gamma) {
    HostModel m;
    m.kind = ModelKind::cauchy;
    m.gamma = gamma;
    m.validate();
    return m;
}

void HostModel::validate() const {
    auto pos = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("model parameter ") + name + " must be > 0");
    };
    switch (kind) {
        case ModelKind::ggd:
            pos(c, "c");
            pos(sigma_x, "sigma_x");
            break;
        case ModelKind::weibull:
            pos(theta, "theta");
            pos(delta, "delta");
            break;
        case ModelKind::cauchy:
            pos(gamma, "gamma");
            break;
    }
}

double HostModel::beta() const {
    return std::sqrt(std::exp(std::lgamma(3.0 / c) - std::lgamma(1.0 / c))) / sigma_x;
}

double HostModel::amplitude() const { return beta() * c / (2.0 * std::tgamma(1.0 / c)); }

double q(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("q_inv requires p in (0, 1)");
    if (p == 0.5) return 0.0;
    if (p > 0.5) return -q_inv(1.0 - p);
    // Rational starting point, then Newton on q(x) - p.
    double t = std::sqrt(-2.0 * std::log(p));
    double x = t - (2.515517 + 0.802853 * t + 0.010328 * t * t) /
                       (1.0 + 1.432788 * t + 0.189269 * t * t + 0.001308 * t * t * t);
    for (int it = 0; it < 60; ++it) {
        double phi = std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
        double step = (q(x) - p) / phi;
        x += step;
        if (std::abs(step) <= 1e-12 * std::max(1.0, std::abs(x))) break;
    }
    return x;
}

double pdf(const HostModel& m, double x) {
    switch (m.kind) {
        case ModelKind::ggd: {
            double b = m.beta();
            return m.amplitude() * std::exp(-std::pow(b * std::abs(x), m.c));
        }
        case ModelKind::weibull: {
            if (x < 0.0) throw DomainError("Weibull density undefined for x < 0");
            if (x == 0.0) {
                if (m.delta < 1.0) return std::numeric_limits<double>::infinity();
                return m.delta == 1.0 ? 1.0 / m.theta : 0.0;
            }
            double z = x / m.theta;
            return (m.delta / m.theta) * std::pow(z, m.delta - 1.0) * std::exp(-std::pow(z, m.delta));
        }
        case ModelKind::cauchy:
            return m.gamma / (kPi * (m.gamma * m.gamma + x * x));
    }
    return 0.0;
}

double abs_moment(const HostModel& m, double xi) {
    if (xi < 0.0) throw DomainError("moment order must be >= 0");
    if (xi == 0.0) return 1.0;
    switch (m.kind) {
        case ModelKind::ggd: {
            double c = m.c;
            double lg1 = std::lgamma(1.0 / c);
            double log_ratio = std::lgamma((xi + 1.0) / c) - lg1 + 0.5 * xi * (lg1 - std::lgamma(3.0 / c));
            return std::pow(m.sigma_x, xi) * std::exp(log_ratio);
        }
        case ModelKind::weibull:
            return std::pow(m.theta, xi) * std::tgamma(xi / m.delta + 1.0);
        case ModelKind::cauchy:
            if (xi >= 1.0) throw DomainError("Cauchy absolute moment of order >= 1 is infinite");
            return std::pow(m.gamma, xi) / std::cos(kPi * xi / 2.0);
    }
    return 0.0;
}

double abs_moment_var(const HostModel& m, double xi) {
    double e1 = abs_moment(m, xi);
    return abs_moment(m, 2.0 * xi) - e1 * e1;
}

double mvr(const HostModel& m, double xi) {
    if (!(xi > 0.0)) throw DomainError("mvr requires xi > 0");
    // Written as xi / sqrt(E|X|^2xi / (E|X|^xi)^2 - 1) with expm1 of the
    // log ratio, which keeps precision when xi is small.
    double log_ratio = 0.0;
    switch (m.kind) {
        case ModelKind::ggd: {
            double c = m.c;
            log_ratio = std::lgamma((2.0 * xi + 1.0) / c) + std::lgamma(1.0 / c) - 2.0 * std::lgamma((xi + 1.0) / c);
            break;
        }
        case ModelKind::weibull: {
            double d = m.delta;
            log_ratio = std::lgamma(2.0 * xi / d + 1.0) - 2.0 * std::lgamma(xi / d + 1.0);
            break;
        }
        case ModelKind::cauchy:
            throw UnsupportedError("mvr is undefined for the Cauchy model");
    }
    return xi / std::sqrt(std::expm1(log_ratio));
}

double amr(const HostModel& m, double xi) {
    if (!(xi > 0.0)) throw DomainError("amr requires xi > 0");
    if (m.kind != ModelKind::ggd) throw UnsupportedError("amr is defined for the GGD model only");
    double c = m.c;
    return xi * std::exp(std::lgamma((xi + 1.0) / c) - 0.5 * std::lgamma((2.0 * xi + 1.0) / c) -
                         0.5 * std::lgamma(1.0 / c));
}

HostModel estimate(std::span<const double> x, ModelKind kind) {
    if (x.size() < 100) throw ArgumentError("estimation needs at least 100 samples");
    const double n = static_cast<double>(x.size());
    switch (kind) {
        case ModelKind::ggd: {
            double s1 = 0.0, s2 = 0.0;
            for (double v : x) {
                s1 += std::abs(v);
                s2 += v * v;
            }
            s1 /= n;
            s2 /= n;
            if (s2 <= 0.0) throw DegenerateHostError("all-zero samples");
            double target = s1 * s1 / s2;
            double c = bisect([&](double cc) { return ggd_moment_ratio(cc) - target; }, 0.05, 20.0, 1e-13,
                              "GGD moment-ratio inversion");
            return HostModel::ggd(c, std::sqrt(s2));
        }
        case ModelKind::weibull: {
            double sum_log = 0.0;
            for (double v : x) {
                if (!(v > 0.0)) throw DomainError("Weibull estimation requires positive samples");
                sum_log += std::log(v);
            }
            // Scale-free form of the likelihood equation:
            //   1/delta + mean(ln x) - sum(x^delta ln x) / sum(x^delta) = 0.
            // Samples are normalized by their maximum to keep x^delta finite.
            double xmax = *std::max_element(x.begin(), x.end());
            double mean_log = sum_log / n;
            auto residual = [&](double d) {
                double a = 0.0, b = 0.0;
                for (double v : x) {
                    double r = v / xmax;
                    double p = std::pow(r, d);
                    a += p;
                    b += p * std::log(r);
                }
                return 1.0 / d + (mean_log - std::log(xmax)) - b / a;
            };
            double d = bisect(residual, 0.05, 20.0, 1e-10, "Weibull shape equation");
            double mp = 0.0;
            for (double v : x) mp += std::pow(v / xmax, d);
            mp /= n;
            return HostModel::weibull(xmax * std::pow(mp, 1.0 / d), d);
        }
        case ModelKind::cauchy: {
            // sum 2 g^2 / (g^2 + x^2) - N is increasing in g.
            double amax = 0.0;
            for (double v : x) amax = std::max(amax, std::abs(v));
            if (amax <= 0.0) throw DegenerateHostError("all-zero samples");
            auto residual = [&](double g) {
                double s = 0.0;
                for (double v : x) s += 2.0 * g * g / (g * g + v * v);
                return s / n - 1.0;
            };
            double g = bisect(residual, amax * 1e-12, amax * 1e3, 1e-13, "Cauchy scale equation");
            return HostModel::cauchy(g);
        }
    }
    throw UnsupportedError("unknown model kind");
}

void draw(const HostModel& m, Rng& rng, std::span<double> out) {
    switch (m.kind) {
        case ModelKind::ggd: {
            require_shape_supported(m.c);
            if (m.c == 2.0) {
                for (double& v : out) v = m.sigma_x * rng.normal();
                return;
            }
            // X = W E^(1/c), E ~ Gamma(1/c, scale beta^-c), W a fair sign.
            double shape = 1.0 / m.c;
            double inv_beta = 1.0 / m.beta();
            for (double& v : out) {
                double w = rng.sign();
                v = w * inv_beta * std::pow(rng.gamma(shape), shape);
            }
            return;
        }
        case ModelKind::weibull: {
            // X = Z^(1/delta), Z exponential with scale theta^delta.
            double inv = 1.0 / m.delta;
            for (double& v : out) {
                double z = rng.exponential();
                v = m.theta * std::pow(z, inv);
            }
            return;
        }
        case ModelKind::cauchy:
            for (double& v : out) v = m.gamma * std::tan(kPi * (rng.uniform() - 0.5));
            return;
    }
}

SampleBatch sample(const HostModel& m, std::size_t n, std::uint64_t seed) {
    if (n < 1) throw ArgumentError("sample count must be >= 1");
    m.validate();
    SampleBatch b;
    b.values.resize(n);
    b.seed = seed;
    b.model = m;
    Rng rng(seed);
    draw(m, rng, b.values);
    return b;
}

SampleBatch sample_special(const HostModel& m, std::size_t n, std::uint64_t seed) {
    m.validate();
    if (m.kind != ModelKind::ggd || !(m.c == 0.5 || m.c == 1.0 || m.c == 2.0)) {
        throw UnsupportedError("special-case constructions exist only for GGD c in {0.5, 1, 2}");
    }
    SampleBatch b;
    b.values.resize(n);
    b.seed = seed;
    b.model = m;
    Rng rng(seed);
    const double beta = m.beta();
    for (double& v : b.values) {
        if (m.c == 2.0) {
            // Box-Muller with an independent pair per draw.
            double u1 = rng.uniform(), u2 = rng.uniform();
            v = m.sigma_x * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
        } else if (m.c == 1.0) {
            v = rng.sign() * rng.exponential() / beta;
        } else {
            // Gamma(2) is the sum of two unit exponentials; X = W E^2 / beta.
            double e = rng.exponential() + rng.exponential();
            v = rng.sign() * e * e / beta;
        }
    }
    return b;
}

}  // namespace wmlab
