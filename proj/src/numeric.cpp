#include "wmlab/numeric.hpp"

#include <fftw3.h>

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>

#include "wmlab/errors.hpp"

namespace wmlab {

NumericPdf::NumericPdf(double min, double step, std::vector<double> density)
    : min_(min), step_(step), values_(std::move(density)) {
    if (!(step_ > 0.0)) throw ArgumentError("NumericPdf step must be > 0");
    if (values_.size() < 2) throw ArgumentError("NumericPdf needs at least two grid points");
    for (double& v : values_) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw ArgumentError("NumericPdf values must be finite and >= 0");
    }
}

NumericPdf NumericPdf::tabulate(const std::function<double(double)>& f, double min, double max, std::size_t n) {
    if (n < 2 || !(max > min)) throw ArgumentError("tabulate: bad grid");
    const double step = (max - min) / static_cast<double>(n - 1);
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) {
        double x = min + step * static_cast<double>(k);
        double y = f(x);
        if (!std::isfinite(y)) {
            double inner = k + 1 < n ? x + 0.5 * step : x - 0.5 * step;
            y = f(inner);
        }
        v[k] = y;
    }
    return NumericPdf(min, step, std::move(v));
}

double NumericPdf::integral() const {
    double s = 0.0;
    for (double v : values_) s += v;
    s -= 0.5 * (values_.front() + values_.back());
    return s * step_;
}

double NumericPdf::expect(const std::function<double(double)>& g) const {
    double s = 0.0;
    const std::size_t n = values_.size();
    for (std::size_t k = 0; k < n; ++k) {
        double f = values_[k];
        if (f == 0.0) continue;
        double w = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
        s += w * f * g(min_ + step_ * static_cast<double>(k));
    }
    return s * step_;
}

double NumericPdf::at(double x) const {
    double pos = (x - min_) / step_;
    if (pos < 0.0 || pos > static_cast<double>(values_.size() - 1)) return 0.0;
    auto k = static_cast<std::size_t>(pos);
    if (k + 1 >= values_.size()) return values_.back();
    double t = pos - static_cast<double>(k);
    return (1.0 - t) * values_[k] + t * values_[k + 1];
}

namespace {

std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

NumericPdf pdf_convolve(const NumericPdf& f, const NumericPdf& g) {
    if (std::abs(f.step() - g.step()) > 1e-9 * f.step()) throw ArgumentError("pdf_convolve: grid steps differ");
    const std::size_t out_n = f.size() + g.size() - 1;
    std::size_t m = 1;
    while (m < out_n) m <<= 1;
    const std::size_t mc = m / 2 + 1;

    std::vector<double> a(m, 0.0), b(m, 0.0), c(m, 0.0);
    std::copy(f.values().begin(), f.values().end(), a.begin());
    std::copy(g.values().begin(), g.values().end(), b.begin());
    std::vector<std::complex<double>> fa(mc), fb(mc);

    fftw_plan pa, pb, pc;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        pa = fftw_plan_dft_r2c_1d(static_cast<int>(m), a.data(), reinterpret_cast<fftw_complex*>(fa.data()),
                                  FFTW_ESTIMATE);
        pb = fftw_plan_dft_r2c_1d(static_cast<int>(m), b.data(), reinterpret_cast<fftw_complex*>(fb.data()),
                                  FFTW_ESTIMATE);
        pc = fftw_plan_dft_c2r_1d(static_cast<int>(m), reinterpret_cast<fftw_complex*>(fa.data()), c.data(),
                                  FFTW_ESTIMATE);
    }
    fftw_execute(pa);
    fftw_execute(pb);
    for (std::size_t k = 0; k < mc; ++k) fa[k] *= fb[k];
    fftw_execute(pc);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(pa);
        fftw_destroy_plan(pb);
        fftw_destroy_plan(pc);
    }

    const double scale = f.step() / static_cast<double>(m);
    std::vector<double> out(out_n);
    for (std::size_t k = 0; k < out_n; ++k) out[k] = std::max(0.0, c[k] * scale);
    NumericPdf raw(f.min() + g.min(), f.step(), std::move(out));
    double mass = raw.integral();
    if (!(mass > 0.0)) throw ArgumentError("pdf_convolve: empty result");
    std::vector<double> norm = raw.values();
    for (double& v : norm) v /= mass;
    return NumericPdf(raw.min(), raw.step(), std::move(norm));
}

double tail_bound(const HostModel& m, double tail_prob) {
    switch (m.kind) {
        case ModelKind::ggd: {
            // P(|X| > t) = Q(1/c, (beta t)^c), the upper regularized Gamma.
            double z = boost::math::gamma_q_inv(1.0 / m.c, tail_prob);
            return std::pow(z, 1.0 / m.c) / m.beta();
        }
        case ModelKind::weibull:
            return m.theta * std::pow(-std::log(tail_prob), 1.0 / m.delta);
        case ModelKind::cauchy:
            return m.gamma / std::tan(0.5 * std::numbers::pi * tail_prob);
    }
    return 0.0;
}

double expect(const HostModel& m, const std::function<double(double)>& g, std::vector<double> breaks) {
    boost::math::quadrature::tanh_sinh<double> ts;
    boost::math::quadrature::exp_sinh<double> es;
    const double tol = 1e-12;
    auto integrand = [&](double x) {
        double f = pdf(m, x);
        if (f == 0.0) return 0.0;
        return g(x) * f;
    };

    double lo_limit = -std::numeric_limits<double>::infinity();
    if (m.kind == ModelKind::weibull) lo_limit = 0.0;
    breaks.push_back(0.0);
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
    std::erase_if(breaks, [&](double b) { return b < lo_limit; });

    double total = 0.0;
    // Left tail (-inf, first break], mirrored onto [0, inf) for exp_sinh.
    if (!std::isfinite(lo_limit)) {
        double b0 = breaks.front();
        total += es.integrate([&](double t) { return integrand(b0 - t); }, 0.0, std::numeric_limits<double>::infinity(),
                              tol);
    }
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        total += ts.integrate(integrand, breaks[k], breaks[k + 1], tol);
    }
    double bn = breaks.back();
    total += es.integrate([&](double t) { return integrand(bn + t); }, 0.0, std::numeric_limits<double>::infinity(), tol);
    return total;
}

}  // namespace wmlab
