#include <doctest.h>

#include <cmath>
#include <vector>

#include "wmlab/detect.hpp"
#include "wmlab/embed.hpp"
#include "wmlab/errors.hpp"
#include "wmlab/models.hpp"
#include "wmlab/rng.hpp"
#include "wmlab/theory.hpp"

using namespace wmlab;

namespace {

const std::vector<double> kW{1.0, -1.0};

struct Stats {
    double mean = 0.0, var = 0.0, skew = 0.0;
};

Stats stats(const std::vector<double>& v) {
    Stats s;
    const double n = static_cast<double>(v.size());
    for (double x : v) s.mean += x;
    s.mean /= n;
    double m3 = 0.0;
    for (double x : v) {
        double d = x - s.mean;
        s.var += d * d;
        m3 += d * d * d;
    }
    s.var /= n;
    s.skew = m3 / n / std::pow(s.var, 1.5);
    return s;
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
    Stats sa = stats(a), sb = stats(b);
    double c = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) c += (a[i] - sa.mean) * (b[i] - sb.mean);
    return c / a.size() / std::sqrt(sa.var * sb.var);
}

}  // namespace

TEST_CASE("correlate examples") {
    CHECK(correlate(std::vector<double>{2.5, -1.5}, kW) == doctest::Approx(2.0));
    auto w = gen_watermark(3, 1000);
    CHECK(correlate(w.values(), w.values()) == doctest::Approx(1.0));
    CHECK_THROWS_AS(correlate(std::vector<double>{1.0}, kW), ArgumentError);

    const std::size_t n = 100;
    const int trials = 100000;
    std::vector<double> st(trials), x(n);
    Rng rng(5);
    for (int t = 0; t < trials; ++t) {
        draw(HostModel::ggd(0.8, 10.0), rng, x);
        st[t] = correlate(x, w.values().first(n));
    }
    // First 100 entries of w need not be zero-sum; the null mean is zero either way.
    Stats s = stats(st);
    CHECK(std::abs(s.mean) < 3.0 * std::sqrt(1.0 / trials));
    CHECK(s.var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("generalized_correlate examples") {
    CHECK(generalized_correlate(std::vector<double>{2.5, -1.5}, kW, 1.0) == doctest::Approx(0.5));
    CHECK(generalized_correlate(std::vector<double>{7.0, -0.3}, kW, 0.0) == 0.0);
    CHECK(generalized_correlate(std::vector<double>{2, 1}, kW, 2.0) == doctest::Approx(1.5));
    std::vector<double> pos{3.0, 1.0};
    CHECK(generalized_correlate(pos, kW, 1.0) == doctest::Approx(correlate(pos, kW)));
}

TEST_CASE("optimum_decode_ass examples") {
    Rng rng(3);
    auto w = gen_watermark(1, 50);
    for (int t = 0; t < 20; ++t) {
        std::vector<double> s(50);
        for (double& v : s) v = 5.0 * rng.normal();
        const double a = 0.7;
        CHECK(optimum_decode_ass(s, w.values(), a, 2.0) == doctest::Approx(4.0 * a * correlate(s, w.values())));
        std::vector<double> neg(w.values().begin(), w.values().end());
        for (double& v : neg) v = -v;
        CHECK(optimum_decode_ass(s, neg, a, 1.3) == doctest::Approx(-optimum_decode_ass(s, w.values(), a, 1.3)));
    }
    std::vector<double> x{0.1, -0.2};
    auto s = embed_ss(x, kW, SchemeConfig{Scheme::ass, 100.0});
    CHECK(optimum_decode_ass(s, kW, 100.0, 1.0) > 0.0);
}

TEST_CASE("optimum_decode_ass p_e matches theory") {
    HostModel m = HostModel::ggd(1.0, 10.0);
    const std::size_t n = 100;
    const double a = 0.5;
    const int trials = 40000;
    auto w = gen_watermark(2, n);
    Rng rng(9);
    std::vector<double> x(n);
    int errors = 0;
    for (int t = 0; t < trials; ++t) {
        draw(m, rng, x);
        SchemeConfig c{Scheme::ass, a};
        c.b = rng.sign() > 0 ? 1 : -1;
        auto s = embed(x, w.values(), c);
        int bit = optimum_decode_ass(s, w.values(), a, 1.0) > 0 ? 1 : -1;
        errors += bit != c.b;
    }
    TheoryRequest req;
    req.task = Task::decoding;
    req.scheme = Scheme::ass;
    req.statistic = Statistic::ass_optimum;
    req.model = m;
    req.a = a;
    req.xi = 1.0;
    req.n = n;
    double pe = pe_gaussian(moments_for(req));
    double pe_hat = double(errors) / trials;
    CHECK(std::abs(pe_hat - pe) < 3.0 * std::sqrt(pe * (1 - pe) / trials) + 0.005);
}

TEST_CASE("optimum_detect_ass examples") {
    HostModel m = HostModel::ggd(1.0, 10.0);
    auto w = gen_watermark(5, 100);
    Rng rng(1);
    std::vector<double> x(100);
    double acc = 0.0;
    const int trials = 20000;
    for (int t = 0; t < trials; ++t) {
        draw(m, rng, x);
        acc += optimum_detect_ass(x, w.values(), 1.0, 1.0);
    }
    CHECK(acc / trials < 0.0);
    std::vector<double> ones(100, 1.0);
    CHECK(optimum_detect_ass(x, w.values(), 1.0, 1.0, ones) == optimum_detect_ass(x, w.values(), 1.0, 1.0));
    CHECK(optimum_detect_ass(x, w.values(), 0.0, 1.0) == 0.0);
}

TEST_CASE("optimum_detect_mss examples") {
    // Direct arithmetic: 10(1 - 1/1.1) + 10(1 - 1/0.9), over N = 2.
    double want = (10.0 * (1.0 - 1.0 / 1.1) + 10.0 * (1.0 - 1.0 / 0.9)) / 2.0;
    CHECK(optimum_detect_mss(std::vector<double>{10, 10}, kW, 0.1, 1.0) == doctest::Approx(want));
    CHECK(want == doctest::Approx(-0.10101).epsilon(1e-4));
    CHECK(std::abs(optimum_detect_mss(std::vector<double>{10, 3}, kW, 1e-9, 1.0)) < 1e-7);
    CHECK_THROWS_AS(optimum_detect_mss(std::vector<double>{10, 3}, kW, 1.0, 1.0), ConfigError);

    auto w = gen_watermark(3, 100);
    Rng rng(4);
    std::vector<double> a, b, x(100);
    for (int t = 0; t < 10000; ++t) {
        draw(HostModel::ggd(1.0, 1.0), rng, x);
        a.push_back(optimum_detect_mss(x, w.values(), 0.05, 1.0));
        b.push_back(generalized_correlate(x, w.values(), 1.0));
    }
    // stat = k1 sum|x|w/N + k2 sum|x|/N; both sums have variance Var|x|/N, so corr = k1 / hypot(k1, k2).
    double ap = 0.05 / 1.05, am = 0.05 / 0.95;
    double k1 = (ap + am) / 2, k2 = (ap - am) / 2;
    double expect = 1.0 / std::sqrt(1.0 + k2 * k2 / (k1 * k1));
    CHECK(corr(a, b) == doctest::Approx(expect).epsilon(3e-4));
}

TEST_CASE("optimum_detect_gaussian_attacked examples") {
    std::vector<double> y{3.0, -1.0};
    CHECK(optimum_detect_gaussian_attacked(y, kW, 0.0, 10.0, 5.0) == 0.0);
    CHECK(std::abs(optimum_detect_gaussian_attacked(y, kW, 0.1, 10.0, 1e8)) < 1e-14);
    CHECK_THROWS_AS(optimum_detect_gaussian_attacked(y, kW, 0.1, 0.0, 1.0), ConfigError);
}

TEST_CASE("cauchy_statistic examples") {
    auto w = gen_watermark(1, 10);
    CHECK(cauchy_statistic(std::vector<double>(10, 2.0), w.values(), 2.0) == doctest::Approx(0.0));
    CHECK(cauchy_statistic(std::vector<double>{1, -1}, kW, 1.0) == doctest::Approx(0.5));
    std::vector<double> s{0.3, -2.0}, ns{-0.3, 2.0};
    CHECK(cauchy_statistic(ns, kW, 1.5) == doctest::Approx(-cauchy_statistic(s, kW, 1.5)));
    Rng rng(2);
    for (int t = 0; t < 100; ++t) {
        std::vector<double> one{rng.normal() * 5, 0.0};
        CHECK(std::abs(cauchy_statistic(one, kW, 0.5)) * 2 <= 1.0 / (2 * 0.5) + 1e-12);
    }
}

TEST_CASE("stdm_detect examples") {
    const double delta = 2.0;
    // Projection 1.0 = delta / 2, a centroid of delta Z + delta / 2.
    std::vector<double> on{1.0, -1.0};
    auto hit = stdm_detect(on, kW, delta, 0.1);
    CHECK(hit.statistic == doctest::Approx(0.0));
    CHECK(hit.verdict == 1);
    std::vector<double> mid{0.0, 0.0};
    auto miss = stdm_detect(mid, kW, delta, 0.99);
    CHECK(miss.statistic == doctest::Approx(1.0));
    CHECK(miss.verdict == 0);
    CHECK_THROWS_AS(stdm_detect(mid, kW, delta, 1.5), ConfigError);
}

TEST_CASE("decide examples") {
    CHECK(decide(0.3, 0.2, Rule::single).verdict == 1);
    CHECK(decide(-0.3, 0.2, Rule::single).verdict == 0);
    CHECK(decide(-0.3, 0.2, Rule::double_sided).verdict == 1);
    CHECK(decide(0.1, 0.0, Rule::sign).verdict == 1);
    CHECK(decide(-0.1, 0.0, Rule::sign).verdict == -1);
    CHECK(rule_from_string("double") == Rule::double_sided);
    CHECK_THROWS_AS(rule_from_string("triple"), ConfigError);
}

TEST_CASE("decoding antisymmetry") {
    HostModel m = HostModel::ggd(0.8, 10.0);
    auto w = gen_watermark(6, 100);
    Rng rng(6);
    std::vector<double> x(100);
    const int trials = 20000;
    std::vector<double> p, n;
    for (int t = 0; t < trials; ++t) {
        draw(m, rng, x);
        SchemeConfig c{Scheme::mss, 0.1};
        p.push_back(generalized_correlate(embed(x, w.values(), c), w.values(), 0.8));
        c.b = -1;
        n.push_back(generalized_correlate(embed(x, w.values(), c), w.values(), 0.8));
    }
    Stats sp = stats(p), sn = stats(n);
    CHECK(std::abs(sp.mean + sn.mean) < 3.0 * std::sqrt((sp.var + sn.var) / trials));
}

TEST_CASE("null statistic is symmetric") {
    auto w = gen_watermark(8, 100);
    Rng rng(8);
    std::vector<double> x(100), st;
    const int trials = 200000;
    for (int t = 0; t < trials; ++t) {
        draw(HostModel::ggd(0.5, 1.0), rng, x);
        st.push_back(generalized_correlate(x, w.values(), 0.5));
    }
    CHECK(std::abs(stats(st).skew) < 3.0 * std::sqrt(6.0 / trials));
}

TEST_CASE("magnitude sum is independent of the projection sign") {
    auto w = gen_watermark(9, 100);
    Rng rng(9);
    std::vector<double> x(100), mag, ind;
    const int trials = 100000;
    for (int t = 0; t < trials; ++t) {
        draw(HostModel::ggd(1.0, 1.0), rng, x);
        double s = 0.0;
        for (double v : x) s += std::abs(v);
        mag.push_back(s);
        ind.push_back(projection(x, w.values()) > 0 ? 1.0 : 0.0);
    }
    CHECK(std::abs(corr(mag, ind)) < 3.0 / std::sqrt(double(trials)));
}
