#include "wmlab/theory.hpp"

#include <algorithm>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>

#include "wmlab/errors.hpp"

namespace wmlab {

namespace {

constexpr double kSqrt2OverPi = 0.7978845608028654;

// P(lo < Z < hi) for standard normal Z, without cancellation in the tails.
double normal_interval(double lo, double hi) {
    if (hi <= lo) return 0.0;
    if (lo >= 0.0) return q(lo) - q(hi);
    if (hi <= 0.0) return q(-hi) - q(-lo);
    return 1.0 - q(-lo) - q(hi);
}

double model_mean(const HostModel& m) {
    return m.kind == ModelKind::weibull ? abs_moment(m, 1.0) : 0.0;
}

double model_var(const HostModel& m) {
    if (m.kind == ModelKind::cauchy) throw UnsupportedError("Cauchy hosts have infinite variance");
    double mu = model_mean(m);
    return abs_moment(m, 2.0) - mu * mu;
}

double noise_var(const std::optional<NoiseModel>& noise) { return noise ? noise->variance() : 0.0; }

double noise_pdf(const NoiseModel& nm, double v) {
    switch (nm.kind) {
        case NoiseModel::Kind::gaussian:
            return std::exp(-0.5 * v * v / (nm.sigma_v * nm.sigma_v)) / (nm.sigma_v * std::sqrt(2.0 * std::numbers::pi));
        case NoiseModel::Kind::ggd:
            return pdf(HostModel::ggd(nm.ac, nm.sigma_v), v);
        case NoiseModel::Kind::abs_gaussian:
            if (v < 0.0) return 0.0;
            return 2.0 * std::exp(-0.5 * v * v / (nm.sigma_v * nm.sigma_v)) /
                   (nm.sigma_v * std::sqrt(2.0 * std::numbers::pi));
    }
    return 0.0;
}

bool is_gaussian_host(const HostModel& m) { return m.kind == ModelKind::ggd && m.c == 2.0; }

void add_clt_warnings(const TheoryRequest& req, GaussianStatSummary& s) {
    if (req.n < 100) s.warnings.push_back("N < 100: Gaussian approximation of the statistic may be inaccurate");
    if (req.model.kind == ModelKind::ggd && req.model.c < 1.0 && req.xi > 2.0 * req.model.c) {
        s.warnings.push_back("xi > 2c with c < 1: theory tends to underestimate the real performance");
    }
}

struct TermMoments {
    double mean = 0.0;
    double var = 0.0;
};

// Per-sample term of a statistic for watermark sign w, as a function of the
// received coefficient y.
struct Term {
    std::function<double(double)> f;
    std::vector<double> kinks;  // in y
    // When set, the term is coef * |y|^power and closed forms apply.
    std::optional<double> power;
    double coef = 0.0;
};

Term make_term(const TheoryRequest& req, double w) {
    const double a = req.a;
    const double xi = req.xi;
    Term t;
    switch (req.statistic) {
        case Statistic::correlator:
            t.f = [w](double y) { return y * w; };
            break;
        case Statistic::generalized:
            t.f = [w, xi](double y) { return std::pow(std::abs(y), xi) * w; };
            t.kinks = {0.0};
            t.power = xi;
            t.coef = w;
            break;
        case Statistic::ass_optimum:
            if (req.task == Task::verification) {
                t.f = [=](double y) { return std::pow(std::abs(y), xi) - std::pow(std::abs(y - a * w), xi); };
                t.kinks = {0.0, a * w};
            } else {
                t.f = [=](double y) { return std::pow(std::abs(y + a * w), xi) - std::pow(std::abs(y - a * w), xi); };
                t.kinks = {-a * w, a * w};
            }
            break;
        case Statistic::mss_optimum: {
            if (!(a > 0.0 && a < 1.0)) throw ConfigError("optimum MSS detector requires a in (0, 1)");
            double k = 1.0 - std::pow(1.0 + a * w, -xi);
            t.f = [k, xi](double y) { return std::pow(std::abs(y), xi) * k; };
            t.kinks = {0.0};
            t.power = xi;
            t.coef = k;
            break;
        }
        case Statistic::gaussian_attacked: {
            if (!req.noise || req.noise->kind != NoiseModel::Kind::gaussian) {
                throw UnsupportedError("gaussian_attacked statistic needs a Gaussian noise model");
            }
            double sx2 = abs_moment(req.model, 2.0);
            double sv2 = req.noise->sigma_v * req.noise->sigma_v;
            double k = 1.0 / (sx2 + sv2) - 1.0 / (sx2 * (1.0 + a * w) * (1.0 + a * w) + sv2);
            t.f = [k](double y) { return y * y * k; };
            t.power = 2.0;
            t.coef = k;
            break;
        }
        case Statistic::cauchy: {
            double g2 = req.cauchy_gamma * req.cauchy_gamma;
            t.f = [w, g2](double y) { return y * w / (g2 + y * y); };
            break;
        }
        case Statistic::stdm:
            throw UnsupportedError("STDM uses stdm_roc, not a Gaussian summary");
    }
    return t;
}

// Moments of term(k X + shift + V).
TermMoments term_moments(const TheoryRequest& req, double k, double shift, const Term& term) {
    const HostModel& m = req.model;
    TermMoments out;
    const bool gaussian_y = is_gaussian_host(m) && (!req.noise || req.noise->kind == NoiseModel::Kind::gaussian);
    if (term.power && shift == 0.0 && (!req.noise || gaussian_y)) {
        // coef |Y|^p with Y = k X (no noise) or Y Gaussian.
        double p = *term.power;
        double e1, e2;
        if (!req.noise) {
            double kp = std::pow(std::abs(k), p);
            e1 = kp * abs_moment(m, p);
            e2 = kp * kp * abs_moment(m, 2.0 * p);
        } else {
            double sy = std::sqrt(k * k * m.sigma_x * m.sigma_x + req.noise->variance());
            HostModel y = HostModel::ggd(2.0, sy);
            e1 = abs_moment(y, p);
            e2 = abs_moment(y, 2.0 * p);
        }
        out.mean = term.coef * e1;
        out.var = term.coef * term.coef * std::max(0.0, e2 - e1 * e1);
        return out;
    }
    double e1, e2;
    if (!req.noise) {
        std::vector<double> breaks;
        for (double kk : term.kinks) breaks.push_back((kk - shift) / k);
        auto g1 = [&](double x) { return term.f(k * x + shift); };
        auto g2 = [&](double x) {
            double v = term.f(k * x + shift);
            return v * v;
        };
        e1 = expect(m, g1, breaks);
        e2 = expect(m, g2, breaks);
    } else {
        NumericPdf f = attacked_pdf(m, k, shift, req.noise, req.grid_points);
        e1 = f.expect(term.f);
        e2 = f.expect([&](double y) {
            double v = term.f(y);
            return v * v;
        });
    }
    out.mean = e1;
    out.var = std::max(0.0, e2 - e1 * e1);
    return out;
}

// Mean and standard deviation of the statistic when the embedder uses bit b
// (0 = unwatermarked).
std::pair<double, double> hypothesis_moments(const TheoryRequest& req, double b) {
    double mean = 0.0, var = 0.0;
    for (double w : {1.0, -1.0}) {
        double k = 1.0, shift = 0.0;
        switch (req.scheme) {
            case Scheme::ass:
            case Scheme::ass_perceptual:
                shift = b * req.a * w;
                break;
            case Scheme::mss:
            case Scheme::barni:
                k = 1.0 + b * req.a * w;
                break;
            default:
                throw UnsupportedError("no per-sample theory for scheme " + to_string(req.scheme));
        }
        TermMoments tm = term_moments(req, k, shift, make_term(req, w));
        mean += 0.5 * tm.mean;
        var += 0.5 * tm.var;
    }
    return {mean, std::sqrt(var / static_cast<double>(req.n))};
}

GaussianStatSummary emss_moments(const TheoryRequest& req) {
    const HostModel& m = req.model;
    const double xi = req.xi, g = req.gamma_order, lam = req.lambda, a = req.a;
    const double n = static_cast<double>(req.n);
    GaussianStatSummary s;
    if (req.statistic != Statistic::generalized) throw UnsupportedError("EMSS theory covers the generalized correlator");
    if (req.noise) {
        if (!(is_gaussian_host(m) && req.noise->kind == NoiseModel::Kind::gaussian && xi == 2.0 && g == 2.0)) {
            throw UnsupportedError("attacked EMSS theory needs Gaussian hosts, Gaussian noise and gamma = xi = 2");
        }
        double sx2 = m.sigma_x * m.sigma_x, sv2 = req.noise->sigma_v * req.noise->sigma_v;
        s.m1 = 2.0 * a * sx2;
        double v1 = (2.0 * ((1.0 - lam) * (1.0 - lam) + 4.0 * a * a) * sx2 * sx2 + 2.0 * sv2 * sv2 +
                     (4.0 + 4.0 * a * a) * sx2 * sv2) /
                    n;
        s.s1 = std::sqrt(v1);
        if (req.task == Task::verification) {
            s.m0 = 0.0;
            s.s0 = std::sqrt(2.0 * (sx2 + sv2) * (sx2 + sv2) / n);
        } else {
            s.m0 = -s.m1;
            s.s0 = s.s1;
        }
        s.approximate = true;
        return s;
    }
    const double ex = abs_moment(m, xi);
    const double vx = abs_moment_var(m, xi);
    const double eg = abs_moment(m, g);
    const double vg = abs_moment_var(m, g);
    const double exg = abs_moment(m, xi + g);
    s.m1 = xi * a * ex;
    double v1 = (1.0 + xi * xi * a * a) * vx / n + lam * lam * xi * xi * ex * ex * vg / (n * g * g * eg * eg) -
                2.0 * lam * xi * ex * (exg - ex * eg) / (n * g * eg);
    s.s1 = std::sqrt(std::max(v1, 0.0));
    if (req.task == Task::verification) {
        s.m0 = 0.0;
        s.s0 = std::sqrt(vx / n);
    } else {
        s.m0 = -s.m1;
        s.s0 = s.s1;
    }
    s.approximate = true;
    if (!(m.kind == ModelKind::ggd && std::abs(g - m.c) < 1e-12)) {
        s.warnings.push_back("gamma differs from the host shape: variance uses the large-N approximation");
    }
    return s;
}

GaussianStatSummary barni_correlator(const TheoryRequest& req) {
    const HostModel& m = req.model;
    const double n = static_cast<double>(req.n);
    const double zeta = req.scheme == Scheme::barni ? 1.0 : req.zeta;
    const double vx = model_var(m);
    const double vv = noise_var(req.noise);
    GaussianStatSummary s;
    s.m1 = req.a * abs_moment(m, zeta);
    s.s1 = std::sqrt((vx + req.a * req.a * abs_moment_var(m, zeta) + vv) / n);
    if (req.task == Task::verification) {
        s.m0 = 0.0;
        s.s0 = std::sqrt((vx + vv) / n);
    } else {
        s.m0 = -s.m1;
        s.s0 = s.s1;
    }
    return s;
}

}  // namespace

std::string to_string(Statistic s) {
    switch (s) {
        case Statistic::correlator: return "correlator";
        case Statistic::generalized: return "generalized";
        case Statistic::ass_optimum: return "ass_optimum";
        case Statistic::mss_optimum: return "mss_optimum";
        case Statistic::gaussian_attacked: return "gaussian_attacked";
        case Statistic::cauchy: return "cauchy";
        case Statistic::stdm: return "stdm";
    }
    return "?";
}

Statistic statistic_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(Statistic::stdm); ++i) {
        auto st = static_cast<Statistic>(i);
        if (to_string(st) == s) return st;
    }
    throw ConfigError("unknown statistic '" + s + "'");
}

double NoiseModel::variance() const {
    if (kind == Kind::abs_gaussian) return sigma_v * sigma_v * (1.0 - 2.0 / std::numbers::pi);
    return sigma_v * sigma_v;
}

double NoiseModel::mean() const { return kind == Kind::abs_gaussian ? sigma_v * kSqrt2OverPi : 0.0; }

NumericPdf attacked_pdf(const HostModel& m, double k, double shift, const std::optional<NoiseModel>& noise,
                        std::size_t grid_points) {
    if (!(k > 0.0)) throw DomainError("attacked_pdf: scale must be > 0");
    const double tail = m.kind == ModelKind::cauchy ? 1e-7 : 1e-13;
    const double tx = tail_bound(m, tail);
    const double xlo = (m.kind == ModelKind::weibull ? 0.0 : -tx) * k + shift;
    const double xhi = tx * k + shift;
    auto fx = [&](double y) {
        double x = (y - shift) / k;
        if (m.kind == ModelKind::weibull && x < 0.0) return 0.0;
        return pdf(m, x) / k;
    };
    if (!noise) return NumericPdf::tabulate(fx, xlo, xhi, grid_points);

    const NoiseModel& nm = *noise;
    if (!(nm.sigma_v > 0.0)) throw DomainError("noise sigma_v must be > 0");
    double tv = 8.5 * nm.sigma_v;
    if (nm.kind == NoiseModel::Kind::ggd) tv = tail_bound(HostModel::ggd(nm.ac, nm.sigma_v), 1e-13);
    const double vlo = nm.kind == NoiseModel::Kind::abs_gaussian ? 0.0 : -tv;
    const double vhi = tv;

    // Shared step: fine enough for both the host range and the noise width.
    double sd = std::sqrt(k * k * model_var(m) + nm.variance());
    double span = std::max(xhi - xlo, 24.0 * sd);
    double step = std::min(span / static_cast<double>(grid_points - 1), nm.sigma_v / 8.0);
    const std::size_t cap = std::size_t{1} << 22;
    if ((xhi - xlo) / step + (vhi - vlo) / step > static_cast<double>(cap)) {
        step = ((xhi - xlo) + (vhi - vlo)) / static_cast<double>(cap);
    }
    auto count = [&](double lo, double hi) { return static_cast<std::size_t>(std::ceil((hi - lo) / step)) + 1; };
    std::size_t nx = count(xlo, xhi), nv = count(vlo, vhi);
    NumericPdf f = NumericPdf::tabulate(fx, xlo, xlo + step * static_cast<double>(nx - 1), nx);
    NumericPdf g = NumericPdf::tabulate([&](double v) { return noise_pdf(nm, v); }, vlo,
                                        vlo + step * static_cast<double>(nv - 1), nv);
    return pdf_convolve(f, g);
}

GaussianStatSummary moments_for(const TheoryRequest& req) {
    req.model.validate();
    if (req.n < 1) throw ConfigError("N must be >= 1");
    GaussianStatSummary s;
    if (req.scheme == Scheme::emss) {
        s = emss_moments(req);
    } else if ((req.scheme == Scheme::barni || req.scheme == Scheme::gen_barni) &&
               req.statistic == Statistic::correlator) {
        s = barni_correlator(req);
    } else if (req.scheme == Scheme::barni && req.model.kind != ModelKind::weibull) {
        throw UnsupportedError("BARNI theory on signed hosts covers the linear correlator only");
    } else if ((req.scheme == Scheme::ass || req.scheme == Scheme::ass_perceptual) &&
               req.statistic == Statistic::correlator) {
        const double v = (model_var(req.model) + noise_var(req.noise)) / static_cast<double>(req.n);
        s.m1 = req.a;
        s.m0 = req.task == Task::verification ? 0.0 : -req.a;
        s.s0 = s.s1 = std::sqrt(v);
    } else {
        double b0 = req.task == Task::verification ? 0.0 : -1.0;
        auto [m1, s1] = hypothesis_moments(req, 1.0);
        auto [m0, s0] = hypothesis_moments(req, b0);
        s.m0 = m0;
        s.m1 = m1;
        s.s0 = s0;
        s.s1 = s1;
    }
    if (!(s.s0 > 0.0 && s.s1 > 0.0)) throw DomainError("degenerate statistic: zero standard deviation");
    add_clt_warnings(req, s);
    return s;
}

double pe_gaussian(const GaussianStatSummary& s) { return 0.5 * q(-s.m0 / s.s0) + 0.5 * q(s.m1 / s.s1); }

double roc_gaussian(const GaussianStatSummary& s, double p_fa) {
    return 1.0 - q((q_inv(p_fa) * s.s0 + s.m0 - s.m1) / s.s1);
}

ErrorRates gaussian_rates(const GaussianStatSummary& s, double psi, Rule rule) {
    ErrorRates r;
    if (rule == Rule::double_sided) {
        r.p_fa = 1.0 - normal_interval((-psi - s.m0) / s.s0, (psi - s.m0) / s.s0);
        r.p_m = normal_interval((-psi - s.m1) / s.s1, (psi - s.m1) / s.s1);
    } else {
        r.p_fa = q((psi - s.m0) / s.s0);
        r.p_m = 1.0 - q((psi - s.m1) / s.s1);
    }
    return r;
}

double ds_roc(double rho, double p_fa) {
    if (!(p_fa > 0.0 && p_fa < 1.0)) throw DomainError("p_fa must lie in (0, 1)");
    if (p_fa >= 2.0 * q(rho)) return 0.0;
    return 1.0 - 2.0 * q(q_inv(p_fa / 2.0) - rho);
}

ErrorRates ds_pm_attacked(double m1, double sigma0, double sigma1, double sigma_xbar, double psi) {
    ErrorRates r;
    r.p_fa = 2.0 * q(psi / sigma0);
    if (!(sigma1 > 0.0)) {
        r.p_m = psi > m1 ? 1.0 - 2.0 * q((psi - m1) / sigma_xbar) : 0.0;
        return r;
    }
    const double upper = 10.0 * sigma_xbar;
    auto integrand = [&](double x) {
        double dens = std::exp(-0.5 * x * x / (sigma_xbar * sigma_xbar)) / (sigma_xbar * std::sqrt(2.0 * std::numbers::pi));
        return dens * normal_interval((-psi - (x + m1)) / sigma1, (psi - (x + m1)) / sigma1);
    };
    std::vector<double> pts = {0.0, upper};
    for (double p : {psi - m1 - 6.0 * sigma1, psi - m1, psi - m1 + 6.0 * sigma1}) {
        if (p > 0.0 && p < upper) pts.push_back(p);
    }
    std::sort(pts.begin(), pts.end());
    boost::math::quadrature::tanh_sinh<double> ts;
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        if (pts[k + 1] > pts[k]) total += ts.integrate(integrand, pts[k], pts[k + 1], 1e-10);
    }
    // Beyond 10 sigma the integrand is below the host tail mass Q(10) ~ 8e-24.
    r.p_m = std::clamp(2.0 * total, 0.0, 1.0);
    return r;
}

ErrorRates hir_rates(double l, double sigma0, double sigma_vbar, double psi) {
    ErrorRates r;
    r.p_fa = 2.0 * q(psi / sigma0);
    if (!(sigma_vbar > 0.0)) {
        r.p_m = l <= psi ? 1.0 : 0.0;
        return r;
    }
    r.p_m = normal_interval((-psi - l) / sigma_vbar, (psi - l) / sigma_vbar);
    return r;
}

ErrorRates stdm_roc(double delta_step, double sigma_x, double sigma_v, std::size_t n, double psi) {
    if (!(psi >= 0.0 && psi <= delta_step / 2.0)) throw ConfigError("STDM threshold must lie in [0, delta/2]");
    const double nn = static_cast<double>(n);
    // Sum of P(|Z sigma - center_k| < psi) over lattice centers, both directions.
    auto lattice_mass = [&](double sigma, double offset) {
        double total = 0.0;
        for (int dir : {1, -1}) {
            for (long k = dir > 0 ? 0 : -1;; k += dir) {
                double c = static_cast<double>(k) * delta_step + offset;
                double term = normal_interval((c - psi) / sigma, (c + psi) / sigma);
                total += term;
                if (term < 1e-12 && std::abs(c) > psi + sigma) break;
                if (std::abs(k) > 100000000) break;
            }
        }
        return total;
    };
    ErrorRates r;
    const double s0 = std::sqrt((sigma_x * sigma_x + sigma_v * sigma_v) / nn);
    r.p_fa = psi == 0.0 ? 0.0 : std::clamp(lattice_mass(s0, delta_step / 2.0), 0.0, 1.0);
    if (psi == 0.0) {
        r.p_m = 1.0;
    } else if (!(sigma_v > 0.0)) {
        r.p_m = 0.0;
    } else {
        r.p_m = std::clamp(1.0 - lattice_mass(sigma_v / std::sqrt(nn), 0.0), 0.0, 1.0);
    }
    return r;
}

bool has_structured_theory(const TheoryRequest& req) {
    switch (req.scheme) {
        case Scheme::ds_ass:
        case Scheme::ds_ass_perceptual:
        case Scheme::ds_bmss:
        case Scheme::ds_ass_hir:
        case Scheme::stdm:
            return req.model.kind != ModelKind::cauchy;
        case Scheme::ds_mss:
            return !req.noise && req.model.kind != ModelKind::cauchy;
        default:
            return false;
    }
}

ErrorRates structured_rates(const TheoryRequest& req, double psi) {
    if (!has_structured_theory(req)) throw UnsupportedError("no double-sided theory for " + to_string(req.scheme));
    const double n = static_cast<double>(req.n);
    const double vx = model_var(req.model);
    const double vv = noise_var(req.noise);
    const double sxbar = std::sqrt(vx / n);
    const double s0 = std::sqrt((vx + vv) / n);
    const double s1 = std::sqrt(vv / n);
    switch (req.scheme) {
        case Scheme::ds_ass:
        case Scheme::ds_ass_perceptual:
            return ds_pm_attacked(req.a, s0, s1, sxbar, psi);
        case Scheme::ds_bmss:
            return ds_pm_attacked(req.a * abs_moment(req.model, req.zeta), s0, s1, sxbar, psi);
        case Scheme::ds_mss: {
            const double xi = req.xi;
            const double m1 = abs_moment(req.model, xi) * (std::pow(1.0 + req.a, xi) - std::pow(1.0 - req.a, xi)) / 2.0;
            const double sp = std::sqrt(abs_moment_var(req.model, xi) / n);
            return ds_pm_attacked(m1, sp, 0.0, sp, psi);
        }
        case Scheme::ds_ass_hir:
            return hir_rates(req.target_l, s0, s1, psi);
        case Scheme::stdm:
            return stdm_roc(req.delta_step, std::sqrt(vx), std::sqrt(vv), req.n, psi);
        default:
            break;
    }
    throw UnsupportedError("no double-sided theory for " + to_string(req.scheme));
}

double ds_rho(Scheme scheme, const HostModel& m, double xi, std::size_t n, double dwr_db) {
    const double base = std::pow(10.0, -dwr_db / 20.0) * std::sqrt(static_cast<double>(n));
    switch (scheme) {
        case Scheme::ds_ass:
        case Scheme::ds_ass_perceptual:
            return base;
        case Scheme::ds_bmss:
            return base * abs_moment(m, xi) / std::sqrt(abs_moment(m, 2.0 * xi));
        case Scheme::ds_mss:
            return base * mvr(m, xi);
        default:
            throw UnsupportedError("ds_rho is defined for DS_ASS, DS_BMSS and DS_MSS");
    }
}

double mmt(const HostModel& m, double xi, double gamma_order) {
    const double ex = abs_moment(m, xi), eg = abs_moment(m, gamma_order);
    return (abs_moment(m, xi + gamma_order) - ex * eg) / (xi * gamma_order * ex * eg);
}

EmssDiagnostics emss_diagnostics(const HostModel& m, double gamma_order, double xi, double lambda, double a,
                                 std::size_t n, double dwr_db) {
    if (m.kind != ModelKind::ggd) throw UnsupportedError("EMSS diagnostics are defined for GGD hosts");
    if (!(gamma_order > 0.0 && xi > 0.0)) throw DomainError("gamma and xi must be > 0");
    m.validate();
    EmssDiagnostics d;
    const double nn = static_cast<double>(n);
    const double g = gamma_order;
    const double eg = abs_moment(m, g);
    const double vg = abs_moment_var(m, g);
    const double sx2 = m.sigma_x * m.sigma_x;
    d.eta_var = vg / (nn * eg * eg);
    d.dw_approx = a * a * sx2 + lambda * lambda * sx2 * d.eta_var / (g * g);
    d.approximate = std::abs(g - m.c) > 1e-12;
    if (!d.approximate) {
        // |X|^c is Gamma distributed, so the normalized weights are Dirichlet.
        d.eta_var_exact = vg / (vg + nn * eg * eg);
        const double c = m.c;
        const double beta = m.beta();
        const double big_r = std::pow(beta, 2.0 * c) / ((nn / c + 2.0 / c) * (nn / c + 2.0 / c + 1.0));
        const double ex2 = abs_moment(m, 2.0);
        const double big_f = nn * abs_moment(m, 2.0 + 2.0 * g) - 2.0 * nn * abs_moment(m, 2.0 + g) * eg +
                             nn * (nn - 1.0) * ex2 * abs_moment(m, 2.0 * g) - nn * (nn - 2.0) * ex2 * eg * eg;
        d.dw_exact = a * a * sx2 + lambda * lambda / (nn * g * g) * big_r * big_f;
    } else {
        d.advisories.push_back("gamma != c: distortion uses the large-N approximation only");
    }
    const double scale = std::pow(10.0, -dwr_db / 10.0) * nn;
    const double mg = mvr(m, g);
    const double rad = scale - lambda * lambda / (mg * mg);
    if (rad < 0.0) {
        d.crit_pfa = 0.5;
        d.advisories.push_back("rejecting term exceeds the watermark energy: critical false alarm clamped to 0.5");
    } else {
        d.crit_pfa = q(mvr(m, xi) * std::sqrt(rad));
    }
    d.lambda_opt = scale * mg * mg;
    d.lambda_max = 2.0 - 2.0 / (1.0 + scale * mg * mg);
    if (d.lambda_opt >= d.lambda_max) d.advisories.push_back("lambda_opt >= lambda_max");
    if (d.lambda_opt > 1.0) d.advisories.push_back("lambda_opt exceeds 1; usable range is [0, 1]");
    d.mmt = mmt(m, xi, g);
    return d;
}

double hir_distortion(double l, double sigma_x, std::size_t n) {
    if (!(l > 0.0 && sigma_x > 0.0 && n > 0)) throw DomainError("hir_distortion needs positive arguments");
    const double nn = static_cast<double>(n);
    return l * l + sigma_x * sigma_x / nn - 2.0 * l * std::sqrt(2.0 * sigma_x * sigma_x / (std::numbers::pi * nn));
}

double random_w_roc(const HostModel& m, double xi, double a, std::size_t n, double p_fa) {
    return 1.0 - q(q_inv(p_fa) - a * std::sqrt(static_cast<double>(n)) * amr(m, xi));
}

std::string to_string(Provenance p) { return p == Provenance::theory ? "theory" : "empirical"; }

void RocTable::validate() const {
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const RocPoint& r = rows[k];
        if (!(r.p_fa >= 0.0 && r.p_fa <= 1.0 && r.p_m >= 0.0 && r.p_m <= 1.0)) {
            throw DomainError("RocTable probabilities must lie in [0, 1]");
        }
        if (k > 0 && !(r.p_fa > rows[k - 1].p_fa)) throw DomainError("RocTable p_fa must be strictly increasing");
    }
}

RocTable make_roc_table(std::vector<RocPoint> points, Provenance provenance, std::string scheme) {
    std::stable_sort(points.begin(), points.end(), [](const RocPoint& x, const RocPoint& y) { return x.p_fa < y.p_fa; });
    RocTable t;
    t.provenance = provenance;
    t.scheme = std::move(scheme);
    for (const RocPoint& p : points) {
        if (!t.rows.empty() && !(p.p_fa > t.rows.back().p_fa)) continue;
        t.rows.push_back(p);
    }
    t.validate();
    return t;
}

RocTable theory_roc(const GaussianStatSummary& s, const std::vector<double>& pfa_grid, std::string scheme) {
    std::vector<RocPoint> pts;
    for (double p : pfa_grid) pts.push_back({p, roc_gaussian(s, p)});
    return make_roc_table(std::move(pts), Provenance::theory, std::move(scheme));
}

void write_roc_csv(const std::vector<RocTable>& tables, std::ostream& os) {
    os << "p_fa,p_m,provenance\n";
    os.precision(12);
    for (const RocTable& t : tables)
        for (const RocPoint& r : t.rows) os << r.p_fa << "," << r.p_m << "," << to_string(t.provenance) << "\n";
}

}  // namespace wmlab
