#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "wmlab/errors.hpp"
#include "wmlab/models.hpp"

using namespace wmlab;

namespace {

double mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

double mean_abs(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s / static_cast<double>(v.size());
}

// Two-sample KS statistic.
double ks(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("pdf examples") {
    CHECK(pdf(HostModel::cauchy(1.0), 0.0) == doctest::Approx(1.0 / std::numbers::pi).epsilon(1e-12));
    CHECK(pdf(HostModel::ggd(2.0, 1.0), 0.0) == doctest::Approx(0.3989423).epsilon(1e-7));
    CHECK(pdf(HostModel::weibull(1.0, 1.0), 0.5) == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
    CHECK_THROWS_AS(pdf(HostModel::weibull(1.0, 1.0), -1.0), DomainError);
}

TEST_CASE("pdf integrates to one") {
    for (HostModel m : {HostModel::ggd(0.5, 1.0), HostModel::ggd(1.3, 2.0), HostModel::weibull(0.05, 1.5)}) {
        double lo = m.kind == ModelKind::weibull ? 0.0 : -200.0 * m.sigma_x;
        double hi = m.kind == ModelKind::weibull ? 1.0 : 200.0 * m.sigma_x;
        // Midpoint rule, fine near the origin where the c < 1 density peaks.
        const int n = 2000000;
        double h = (hi - lo) / n, s = 0.0;
        for (int k = 0; k < n; ++k) s += pdf(m, lo + (k + 0.5) * h) * h;
        CHECK(s == doctest::Approx(1.0).epsilon(m.c < 1 && m.kind == ModelKind::ggd ? 2e-3 : 1e-6));
    }
}

TEST_CASE("abs_moment examples") {
    CHECK(abs_moment(HostModel::ggd(2.0, 1.0), 1.0) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-10));
    CHECK(abs_moment(HostModel::weibull(2.0, 1.0), 1.0) == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(abs_moment(HostModel::ggd(1.0, 1.0), 2.0) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(abs_moment(HostModel::ggd(0.7, 3.0), 0.0) == doctest::Approx(1.0));
    CHECK_THROWS(abs_moment(HostModel::cauchy(1.0), 1.0));
}

TEST_CASE("mvr examples") {
    CHECK(mvr(HostModel::ggd(1.0, 1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-10));
    HostModel m = HostModel::ggd(0.69, 1.0);
    CHECK(std::abs(mvr(m, 0.5) - 0.823) < 1e-3);
    CHECK(std::abs(mvr(m, 0.69) - 0.831) < 1e-3);
    CHECK(std::abs(mvr(m, 1.0) - 0.814) < 1e-3);
    CHECK(std::abs(mvr(m, 1.5) - 0.734) < 1e-3);
    CHECK(mvr(HostModel::ggd(0.5, 1.0), 1.0) == doctest::Approx(6.0 / std::sqrt(84.0)).epsilon(1e-10));
    CHECK_THROWS_AS(mvr(HostModel::cauchy(1.0), 0.5), UnsupportedError);
}

TEST_CASE("amr examples") {
    CHECK(amr(HostModel::ggd(0.5, 1.0), 0.5) == doctest::Approx(1.0 / std::sqrt(6.0)).epsilon(1e-10));
    CHECK(amr(HostModel::ggd(0.5, 1.0), 1.0) == doctest::Approx(6.0 / std::sqrt(120.0)).epsilon(1e-10));
    CHECK(amr(HostModel::ggd(2.0, 1.0), 2.0) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-10));
    // Monte-Carlo oracle for the Gaussian case.
    auto x = sample(HostModel::ggd(2.0, 1.0), 1000000, 11).values;
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m2 /= x.size();
    m4 /= x.size();
    CHECK(2.0 * m2 / std::sqrt(m4) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(5e-3));
}

TEST_CASE("amr below mvr") {
    for (double c : {0.5, 1.0, 2.0})
        for (double xi : {0.3, 1.0, 2.0}) CHECK(amr(HostModel::ggd(c, 1.0), xi) < mvr(HostModel::ggd(c, 1.0), xi));
}

TEST_CASE("estimate examples") {
    std::vector<double> v(200);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = i % 2 ? 3.0 : -3.0;
    CHECK(estimate(v, ModelKind::cauchy).gamma == doctest::Approx(3.0).epsilon(1e-8));

    auto w = sample(HostModel::weibull(0.05, 1.5), 1000000, 3).values;
    HostModel fw = estimate(w, ModelKind::weibull);
    CHECK(fw.theta >= 0.049);
    CHECK(fw.theta <= 0.051);
    CHECK(fw.delta >= 1.48);
    CHECK(fw.delta <= 1.52);

    auto g = sample_special(HostModel::ggd(2.0, 1.0), 1000000, 5).values;
    HostModel fg = estimate(g, ModelKind::ggd);
    CHECK(fg.c >= 1.95);
    CHECK(fg.c <= 2.05);
    CHECK(fg.sigma_x >= 0.99);
    CHECK(fg.sigma_x <= 1.01);

    CHECK_THROWS(estimate(std::vector<double>(50, 1.0), ModelKind::ggd));
}

TEST_CASE("sampler examples") {
    auto w = sample(HostModel::weibull(1.0, 2.0), 1000000, 1);
    CHECK(w.values.size() == 1000000);
    CHECK(std::all_of(w.values.begin(), w.values.end(), [](double x) { return x > 0; }));
    CHECK(std::abs(mean(w.values) - std::tgamma(1.5)) < 0.003);

    auto l = sample(HostModel::ggd(1.0, 10.0), 1000000, 2).values;
    CHECK(variance(l) >= 99.0);
    CHECK(variance(l) <= 101.0);
    CHECK(std::abs(mean(l)) < 0.04);

    HostModel h = HostModel::ggd(0.5, 10.0);
    auto x = sample(h, 1000000, 3).values;
    CHECK(mean_abs(x) == doctest::Approx(abs_moment(h, 1.0)).epsilon(5e-3));
}

TEST_CASE("sampler determinism and range") {
    HostModel m = HostModel::ggd(0.8, 2.0);
    CHECK(sample(m, 100, 9).values == sample(m, 100, 9).values);
    CHECK(sample(m, 100, 9).values != sample(m, 100, 10).values);
    CHECK_THROWS_AS(sample(HostModel::ggd(0.01, 1.0), 10, 1), UnsupportedError);
    CHECK_THROWS_AS(sample_special(HostModel::ggd(0.7, 1.0), 10, 1), UnsupportedError);
}

TEST_CASE("q and q_inv") {
    CHECK(q(0.0) == 0.5);
    CHECK(q(1.0) == doctest::Approx(0.1586553).epsilon(1e-6));
    CHECK(q_inv(0.5) == 0.0);
    for (double x = -5.0; x <= 5.0; x += 0.25) CHECK(std::abs(q_inv(q(x)) - x) < 1e-9);
    // Below -5, q(x) sits within a few ulps of 1; only the round trip in p is meaningful.
    for (double x = -8.0; x < -5.0; x += 0.25) CHECK(std::abs(q(q_inv(q(x))) - q(x)) <= 4e-16);
    // Upper tail: q(x) is tiny and well resolved.
    for (double x = 5.0; x <= 8.0; x += 0.25) CHECK(std::abs(q_inv(q(x)) - x) < 1e-9);
    CHECK_THROWS_AS(q_inv(0.0), DomainError);
    CHECK_THROWS_AS(q_inv(1.0), DomainError);
    for (double x = -3; x < 3; x += 0.1) CHECK(q(x) > q(x + 0.1));
}

TEST_CASE("mvr is maximized at xi = c") {
    for (double c : {0.3, 0.5, 1.0, 1.7, 2.5}) {
        HostModel m = HostModel::ggd(c, 1.0);
        double best = 0.0, arg = 0.0;
        for (int k = 10; k <= 250; ++k) {
            double xi = k / 100.0, v = mvr(m, xi);
            if (v > best) best = v, arg = xi;
        }
        CHECK(std::abs(arg - c) <= 0.01 + 1e-12);
    }
    for (double d : {0.5, 1.5, 3.0}) {
        HostModel m = HostModel::weibull(1.0, d);
        double best = 0.0, arg = 0.0;
        for (int k = 10; k <= 400; ++k) {
            double xi = k / 100.0, v = mvr(m, xi);
            if (v > best) best = v, arg = xi;
        }
        CHECK(std::abs(arg - d) <= 0.01 + 1e-12);
    }
}

TEST_CASE("mvr(c) = sqrt(c) and weibull mvr(delta) = delta") {
    for (double c : {0.5, 0.69, 1.0, 1.3, 2.0}) CHECK(std::abs(mvr(HostModel::ggd(c, 3.0), c) - std::sqrt(c)) < 1e-9);
    for (double d : {1.0, 1.5, 1.8}) CHECK(std::abs(mvr(HostModel::weibull(0.2, d), d) - d) < 1e-9);
}

TEST_CASE("amr closed form") {
    // Gamma-function oracle: xi G((xi+1)/c) / sqrt(G((2xi+1)/c) G(1/c)).
    for (double c : {0.5, 1.0}) {
        HostModel m = HostModel::ggd(c, 1.0);
        for (int k = 10; k <= 250; ++k) {
            double xi = k / 100.0;
            double want = xi * std::exp(std::lgamma((xi + 1) / c) - 0.5 * std::lgamma((2 * xi + 1) / c) -
                                        0.5 * std::lgamma(1 / c));
            CHECK(amr(m, xi) == doctest::Approx(want).epsilon(1e-9));
        }
        // Increasing for small xi; it turns over before xi = 2.5 (c = 0.5 peaks near xi = 1).
        for (int k = 10; k < 50; ++k) CHECK(amr(m, (k + 1) / 100.0) > amr(m, k / 100.0));
    }
    CHECK(amr(HostModel::ggd(0.5, 1.0), 2.0) < amr(HostModel::ggd(0.5, 1.0), 1.0));
}

TEST_CASE("sampler matches inverse-cdf reference") {
    // 0.1% critical value of the two-sample KS test for n = m = 1e5 (six comparisons share it).
    const std::size_t n = 100000;
    const double crit = 1.949 * std::sqrt(2.0 / n);
    Rng rng(77);
    auto inv_ref = [&](const HostModel& m) {
        std::vector<double> r(n);
        for (double& v : r) {
            double u = rng.uniform();
            if (m.kind == ModelKind::weibull) {
                v = m.theta * std::pow(-std::log(u), 1.0 / m.delta);
            } else if (m.kind == ModelKind::cauchy) {
                v = m.gamma * std::tan(std::numbers::pi * (u - 0.5));
            } else {
                // GGD c = 1 (Laplacian) inverse cdf.
                double b = m.sigma_x / std::numbers::sqrt2;
                v = u < 0.5 ? b * std::log(2 * u) : -b * std::log(2 * (1 - u));
            }
        }
        return r;
    };
    for (HostModel m : {HostModel::ggd(1.0, 2.0), HostModel::weibull(0.05, 1.5), HostModel::cauchy(2.0)}) {
        CHECK(ks(sample(m, n, 5).values, inv_ref(m)) < crit);
    }
    // Gaussian: compare the general sampler with Box-Muller.
    CHECK(ks(sample(HostModel::ggd(2.0, 1.0), n, 6).values, sample_special(HostModel::ggd(2.0, 1.0), n, 7).values) < crit);
    CHECK(ks(sample(HostModel::ggd(0.5, 1.0), n, 6).values, sample_special(HostModel::ggd(0.5, 1.0), n, 7).values) < crit);
}

TEST_CASE("mvr/xi grows as xi -> 0") {
    for (double c : {0.5, 1.0, 2.0}) {
        HostModel m = HostModel::ggd(c, 1.0);
        CHECK(mvr(m, 0.05) / 0.05 > mvr(m, 0.2) / 0.2);
    }
}

TEST_CASE("validation") {
    CHECK_THROWS_AS(HostModel::ggd(-1.0, 1.0).validate(), DomainError);
    CHECK_THROWS_AS(HostModel::weibull(1.0, 0.0).validate(), DomainError);
    CHECK(model_kind_from_string("weibull") == ModelKind::weibull);
    CHECK_THROWS(model_kind_from_string("stable"));
}
