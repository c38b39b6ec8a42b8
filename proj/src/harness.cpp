#include "wmlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "wmlab/errors.hpp"

namespace wmlab {

namespace {

constexpr std::uint64_t kWatermarkStream = ~std::uint64_t{0};
constexpr std::uint64_t kPilotStream = ~std::uint64_t{0} - 1;

struct ImagePool {
    BlockDctImage dct;
    int pos = 0;  // row * 8 + col of the host coefficient
    std::vector<double> coeffs;
    std::vector<double> masks;        // empty unless a mask stage is active
    std::vector<double> jpeg_coeffs;  // pristine blocks after the JPEG attack
    std::array<int, 64> qtable{};
};

struct Prepared {
    ExperimentConfig cfg;
    HostModel model;
    double ex2 = 0.0;
    Statistic stat = Statistic::correlator;
    bool qim_vote = false;
    Rule rule = Rule::single;
    double xi = 1.0;
    double cauchy_gamma = 1.0;
    std::optional<ImagePool> pool;
    std::vector<double> w;  // fixed watermark
    std::vector<std::string> warnings;
};

bool is_perceptual(Scheme s) { return s == Scheme::ass_perceptual || s == Scheme::ds_ass_perceptual; }

Statistic default_statistic(Scheme s) {
    switch (s) {
        case Scheme::mss:
        case Scheme::emss:
        case Scheme::ds_mss:
            return Statistic::generalized;
        case Scheme::ds_cauchy:
            return Statistic::cauchy;
        case Scheme::stdm:
            return Statistic::stdm;
        default:
            return Statistic::correlator;
    }
}

double host_shape(const HostModel& m) {
    switch (m.kind) {
        case ModelKind::ggd: return m.c;
        case ModelKind::weibull: return m.delta;
        case ModelKind::cauchy: return 1.0;
    }
    return 1.0;
}

// Embedding distortion per unit a^2, plus a constant part.
std::pair<double, double> distortion_model(const Prepared& p) {
    const SchemeConfig& s = p.cfg.scheme;
    const HostModel& m = p.model;
    const std::size_t n = p.cfg.source.n;
    switch (s.scheme) {
        case Scheme::ass:
        case Scheme::ds_ass:
            return {1.0, 0.0};
        case Scheme::ass_perceptual:
        case Scheme::ds_ass_perceptual: {
            if (!p.pool || p.pool->masks.empty()) return {1.0, 0.0};
            double acc = 0.0;
            for (double v : p.pool->masks) acc += v * v;
            return {acc / static_cast<double>(p.pool->masks.size()), 0.0};
        }
        case Scheme::mss:
        case Scheme::ds_mss:
        case Scheme::barni:
            return {p.ex2, 0.0};
        case Scheme::gen_barni:
        case Scheme::ds_bmss:
            return {abs_moment(m, 2.0 * s.xi()), 0.0};
        case Scheme::emss: {
            const double g = s.gamma_order;
            const double eg = abs_moment(m, g);
            const double eta_var = abs_moment_var(m, g) / (static_cast<double>(n) * eg * eg);
            return {p.ex2, s.lambda * s.lambda * p.ex2 * eta_var / (g * g)};
        }
        case Scheme::ds_ass_hir:
            return {0.0, hir_distortion(s.target_l, std::sqrt(p.ex2), n)};
        case Scheme::stdm:
        case Scheme::qim:
            return {0.0, s.delta_step * s.delta_step / 12.0};
        case Scheme::dc_qim:
            return {0.0, s.lambda * s.lambda * s.delta_step * s.delta_step / 12.0};
        case Scheme::ds_cauchy:
            break;
    }
    throw ConfigError("no distortion model for scheme " + to_string(s.scheme));
}

ImagePool load_pool(const ExperimentConfig& cfg, bool want_masks) {
    ImagePool pool;
    GrayImage img = read_pgm(cfg.source.image_path);
    pool.dct = block_dct(img);
    auto [r, c] = zigzag_position(cfg.source.ac_index);
    pool.pos = r * 8 + c;
    pool.coeffs = zigzag_extract(pool.dct, cfg.source.ac_index);
    if (want_masks) {
        PerceptualMask pm = watson_mask(pool.dct, cfg.source.mask_stage.value_or(MaskStage::luminance));
        pool.masks = pm.zigzag_extract(cfg.source.ac_index);
    }
    if (cfg.attack && cfg.attack->kind == AttackSpec::Kind::jpeg) {
        pool.qtable = jpeg_quant_table(cfg.attack->qf);
        pool.jpeg_coeffs.resize(pool.coeffs.size());
        for (std::size_t k = 0; k < pool.dct.blocks.size(); ++k) {
            Block px = idct8x8(pool.dct.blocks[k]);
            for (double& v : px) v = std::clamp(std::round(v), 0.0, 255.0);
            pool.jpeg_coeffs[k] = dct8x8(jpeg_block(px, pool.qtable))[pool.pos];
        }
    }
    return pool;
}

Prepared prepare(const ExperimentConfig& in, std::size_t point) {
    Prepared p;
    p.cfg = in;
    ExperimentConfig& cfg = p.cfg;
    if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
    const std::size_t n = cfg.source.n;
    if (n < 2 || n % 2 != 0) throw ConfigError("N must be even and >= 2");
    // With dwr_db the strength is derived below and validated then.
    if (!cfg.dwr_db) {
        for (const std::string& w : cfg.scheme.validate()) p.warnings.push_back(w);
    }
    if (cfg.attack && cfg.attack->is_noise() && cfg.wnr_db) cfg.attack->sigma_v = 1.0;  // placeholder until resolved
    if (cfg.attack) cfg.attack->validate();

    if (cfg.source.kind == SourceConfig::Kind::image) {
        p.pool = load_pool(cfg, is_perceptual(cfg.scheme.scheme));
        if (n >= p.pool->coeffs.size()) {
            throw ProtocolError("permutation protocol needs N < M (N = " + std::to_string(n) +
                                ", M = " + std::to_string(p.pool->coeffs.size()) + ")");
        }
        p.model = estimate(p.pool->coeffs, cfg.source.fit_kind);
        double acc = 0.0;
        for (double v : p.pool->coeffs) acc += v * v;
        p.ex2 = acc / static_cast<double>(p.pool->coeffs.size());
    } else {
        cfg.source.model.validate();
        if (cfg.attack && cfg.attack->kind == AttackSpec::Kind::jpeg) {
            throw ConfigError("JPEG attacks need an image source");
        }
        p.model = cfg.source.model;
        p.ex2 = p.model.kind == ModelKind::cauchy ? std::numeric_limits<double>::infinity() : abs_moment(p.model, 2.0);
    }

    if (cfg.dwr_db) {
        auto [k, c0] = distortion_model(p);
        double target = p.ex2 * std::pow(10.0, -*cfg.dwr_db / 10.0);
        if (!(k > 0.0)) throw ConfigError("dwr_db cannot set the strength of scheme " + to_string(cfg.scheme.scheme));
        if (target <= c0) throw ConfigError("dwr_db too high for the rejecting term");
        cfg.scheme.a = std::sqrt((target - c0) / k);
        for (const std::string& w : cfg.scheme.validate()) p.warnings.push_back(w);
    }
    if (cfg.wnr_db) {
        if (!cfg.attack || !cfg.attack->is_noise()) throw ConfigError("wnr_db needs a noise attack");
        auto [k, c0] = distortion_model(p);
        double dw = k * cfg.scheme.a * cfg.scheme.a + c0;
        cfg.attack->sigma_v = std::sqrt(dw * std::pow(10.0, -*cfg.wnr_db / 10.0));
    }

    const Scheme sc = cfg.scheme.scheme;
    p.qim_vote = sc == Scheme::qim || sc == Scheme::dc_qim;
    if (p.qim_vote && cfg.task == Task::verification) throw ConfigError("QIM and DC_QIM support decoding only");
    p.stat = cfg.detector.statistic.value_or(default_statistic(sc));
    if (cfg.task == Task::decoding) {
        p.rule = Rule::sign;
        switch (sc) {
            case Scheme::ass:
            case Scheme::mss:
            case Scheme::barni:
            case Scheme::gen_barni:
            case Scheme::emss:
            case Scheme::ass_perceptual:
            case Scheme::qim:
            case Scheme::dc_qim:
                break;
            default:
                throw ConfigError("scheme " + to_string(sc) + " does not carry a message bit");
        }
        if (!p.qim_vote && p.stat != Statistic::correlator && p.stat != Statistic::generalized &&
            p.stat != Statistic::ass_optimum && p.stat != Statistic::cauchy) {
            throw ConfigError("statistic " + to_string(p.stat) + " is not a decoder");
        }
    } else if (p.stat == Statistic::stdm) {
        if (sc != Scheme::stdm) throw ConfigError("the STDM distance needs the STDM scheme");
        p.rule = Rule::single;
    } else {
        p.rule = cfg.detector.rule.value_or(is_double_sided(sc) ? Rule::double_sided : Rule::single);
        if (p.rule == Rule::sign) throw ConfigError("the sign rule is for decoding");
    }

    if (cfg.detector.xi) {
        p.xi = *cfg.detector.xi;
    } else if (p.stat == Statistic::ass_optimum || p.stat == Statistic::mss_optimum) {
        p.xi = host_shape(p.model);
    } else {
        p.xi = cfg.scheme.xi();
    }
    if (sc == Scheme::ds_mss && std::abs(p.xi - cfg.scheme.xi()) > 0.0) {
        throw ConfigError("DS_MSS needs the same xi at embedder and detector");
    }

    if (cfg.detector.cauchy_gamma) {
        p.cauchy_gamma = *cfg.detector.cauchy_gamma;
    } else if (cfg.scheme.cauchy_gamma) {
        p.cauchy_gamma = *cfg.scheme.cauchy_gamma;
    } else if (p.stat == Statistic::cauchy || sc == Scheme::ds_cauchy) {
        if (p.model.kind == ModelKind::cauchy) {
            p.cauchy_gamma = p.model.gamma;
        } else if (p.pool) {
            p.cauchy_gamma = estimate(p.pool->coeffs, ModelKind::cauchy).gamma;
        } else {
            SampleBatch pilot = sample(p.model, 100000, mix_seed(cfg.master_seed, point, kPilotStream));
            p.cauchy_gamma = estimate(pilot.values, ModelKind::cauchy).gamma;
        }
    }
    if (sc == Scheme::ds_cauchy && !cfg.scheme.cauchy_gamma) cfg.scheme.cauchy_gamma = p.cauchy_gamma;
    if (p.stat == Statistic::gaussian_attacked) {
        if (!cfg.attack || !cfg.attack->is_noise()) throw ConfigError("gaussian_attacked needs a noise attack");
        if (p.model.kind != ModelKind::ggd) throw ConfigError("gaussian_attacked needs a GGD host model");
    }

    WatermarkSequence ws = gen_watermark(mix_seed(cfg.master_seed, point, kWatermarkStream), n);
    p.w.assign(ws.values().begin(), ws.values().end());
    return p;
}

// Hosts (and masks) for one trial.
void draw_hosts(const Prepared& p, Rng& rng, std::vector<double>& x, std::vector<double>& masks,
                std::vector<std::size_t>& idx) {
    const std::size_t n = x.size();
    if (!p.pool) {
        draw(p.model, rng, x);
        return;
    }
    const std::size_t m = p.pool->coeffs.size();
    idx.resize(m);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) std::swap(idx[i], idx[i + rng.below(m - i)]);
    for (std::size_t i = 0; i < n; ++i) x[i] = p.pool->coeffs[idx[i]];
    if (!p.pool->masks.empty()) {
        masks.resize(n);
        for (std::size_t i = 0; i < n; ++i) masks[i] = p.pool->masks[idx[i]];
    }
}

// Applies the configured attack. `marked` is false when y is the pristine host.
void attack(const Prepared& p, std::vector<double>& y, const std::vector<std::size_t>& idx, bool marked, Rng& rng) {
    if (!p.cfg.attack) return;
    const AttackSpec& a = *p.cfg.attack;
    if (a.is_noise()) {
        add_noise(y, a, rng);
        return;
    }
    const ImagePool& pool = *p.pool;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!marked) {
            y[i] = pool.jpeg_coeffs[idx[i]];
            continue;
        }
        Block b = pool.dct.blocks[idx[i]];
        b[pool.pos] = y[i];
        Block px = idct8x8(b);
        for (double& v : px) v = std::clamp(std::round(v), 0.0, 255.0);
        y[i] = dct8x8(jpeg_block(px, pool.qtable))[pool.pos];
    }
}

double statistic(const Prepared& p, std::span<const double> y, std::span<const double> w,
                 std::span<const double> masks) {
    double xi = p.xi;
    double cg = p.cauchy_gamma;
    if (p.cfg.source.estimate_from_test) {
        if (!p.cfg.detector.xi && (p.stat == Statistic::ass_optimum || p.stat == Statistic::mss_optimum)) {
            xi = host_shape(estimate(y, p.cfg.source.fit_kind));
        }
        if (!p.cfg.detector.cauchy_gamma && !p.cfg.scheme.cauchy_gamma && p.stat == Statistic::cauchy) {
            cg = estimate(y, ModelKind::cauchy).gamma;
        }
    }
    const double a = p.cfg.scheme.a;
    switch (p.stat) {
        case Statistic::correlator: return correlate(y, w);
        case Statistic::generalized: return generalized_correlate(y, w, xi);
        case Statistic::ass_optimum:
            if (p.cfg.task == Task::decoding) return optimum_decode_ass(y, w, a, xi);
            return optimum_detect_ass(y, w, a, xi, masks);
        case Statistic::mss_optimum: return optimum_detect_mss(y, w, a, xi);
        case Statistic::gaussian_attacked:
            return optimum_detect_gaussian_attacked(y, w, a, p.model.sigma_x, p.cfg.attack->sigma_v);
        case Statistic::cauchy: return cauchy_statistic(y, w, cg);
        case Statistic::stdm: return stdm_distance(y, w, p.cfg.scheme.delta_step, p.cfg.scheme.dither);
    }
    return 0.0;
}

// Larger score means "watermark present".
double score(const Prepared& p, double stat) {
    if (p.stat == Statistic::stdm) return -stat;
    return p.rule == Rule::double_sided ? std::abs(stat) : stat;
}

double mean_sq_change(std::span<const double> x, std::span<const double> s) {
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (s[i] - x[i]) * (s[i] - x[i]);
    return acc / static_cast<double>(x.size());
}

void parallel_for(std::size_t count, unsigned workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count < 2) {
        for (std::size_t t = 0; t < count; ++t) fn(t);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto body = [&] {
        for (;;) {
            std::size_t t = next.fetch_add(1);
            if (t >= count) return;
            try {
                fn(t);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = count;
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < workers; ++k) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

TheoryRequest theory_request(const Prepared& p) {
    TheoryRequest req;
    const ExperimentConfig& cfg = p.cfg;
    req.task = cfg.task;
    req.scheme = cfg.scheme.scheme;
    req.statistic = p.stat;
    req.model = p.model;
    if (cfg.attack) req.noise = cfg.attack->noise_model();
    req.a = cfg.scheme.a;
    req.xi = p.xi;
    req.zeta = cfg.scheme.xi();
    req.lambda = cfg.scheme.lambda;
    req.gamma_order = cfg.scheme.gamma_order;
    req.cauchy_gamma = p.cauchy_gamma;
    req.target_l = cfg.scheme.target_l;
    req.delta_step = cfg.scheme.delta_step;
    req.n = cfg.source.n;
    return req;
}

// Why theory cannot be attached, or empty.
std::string theory_blocker(const Prepared& p) {
    const ExperimentConfig& cfg = p.cfg;
    if (cfg.attack && !cfg.attack->is_noise()) return "no theory under JPEG attacks";
    if (cfg.random_watermark) return "theory assumes the fixed zero-sum watermark";
    if (p.pool && !p.pool->masks.empty()) return "no theory for non-uniform perceptual masks";
    if (p.qim_vote) return "no theory for QIM majority decoding";
    if (cfg.source.estimate_from_test) return "theory uses fixed detector parameters";
    if (cfg.scheme.scheme == Scheme::stdm && cfg.scheme.dither &&
        std::abs(*cfg.scheme.dither - cfg.scheme.delta_step / 2.0) > 0.0) {
        return "STDM theory assumes the lattice delta Z + delta/2";
    }
    return {};
}

// psi with p_fa(psi) = target for a monotone p_fa on [lo, hi].
double invert_pfa(const std::function<double(double)>& pfa, double target, double lo, double hi) {
    double flo = pfa(lo), fhi = pfa(hi);
    const bool increasing = fhi > flo;
    if (increasing ? target <= flo : target >= flo) return lo;
    if (increasing ? target >= fhi : target <= fhi) return hi;
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        double f = pfa(mid);
        if ((f < target) == increasing) {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) break;
    }
    return 0.5 * (lo + hi);
}

std::vector<double> default_pfa_grid() {
    std::vector<double> g(25);
    const double l0 = std::log(1e-6), l1 = std::log(0.5);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] = std::exp(l0 + (l1 - l0) * static_cast<double>(k) / 24.0);
    return g;
}

ExperimentReport start_report(const Prepared& p, std::size_t point) {
    ExperimentReport r;
    r.config = p.cfg;
    r.point = point;
    r.model = p.model;
    r.warnings = p.warnings;
    r.workers = worker_count();
    r.theory = "none";
    return r;
}

}  // namespace

std::vector<double> permute_hosts(std::span<const double> pool, std::size_t n, std::uint64_t seed) {
    if (n >= pool.size()) {
        throw ProtocolError("permute_hosts needs n < pool size (n = " + std::to_string(n) +
                            ", M = " + std::to_string(pool.size()) + ")");
    }
    std::vector<double> v(pool.begin(), pool.end());
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) std::swap(v[i], v[i + rng.below(v.size() - i)]);
    v.resize(n);
    return v;
}

unsigned worker_count() {
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("WMLAB_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        // An explicit count wins even above the core count, so threaded runs can be checked anywhere.
        if (end != env && cap >= 1) hw = static_cast<unsigned>(std::min(cap, 256L));
    }
    return hw;
}

ExperimentConfig resolve_config(const ExperimentConfig& cfg) { return prepare(cfg, 0).cfg; }

ExperimentReport run_verification(const ExperimentConfig& in, std::size_t point) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig vcfg = in;
    vcfg.task = Task::verification;
    const Prepared p = prepare(vcfg, point);
    ExperimentReport r = start_report(p, point);
    const std::size_t trials = p.cfg.trials, n = p.cfg.source.n;
    const std::uint64_t seed = p.cfg.master_seed;

    std::vector<double> s0(trials), s1(trials), dw(trials);
    parallel_for(trials, r.workers, [&](std::size_t t) {
        std::vector<double> x(n), masks, w = p.w;
        std::vector<std::size_t> idx;
        Rng r0(mix_seed(seed, point, 2 * t));
        if (p.cfg.random_watermark) {
            for (double& v : w) v = r0.sign();
        }
        draw_hosts(p, r0, x, masks, idx);
        attack(p, x, idx, false, r0);
        s0[t] = score(p, statistic(p, x, w, masks));

        Rng r1(mix_seed(seed, point, 2 * t + 1));
        if (p.cfg.random_watermark) {
            for (double& v : w) v = r1.sign();
        }
        draw_hosts(p, r1, x, masks, idx);
        SchemeConfig sc = p.cfg.scheme;
        sc.b = 1;
        sc.mask = masks;
        std::vector<double> y = embed(x, w, sc);
        dw[t] = mean_sq_change(x, y);
        attack(p, y, idx, true, r1);
        s1[t] = score(p, statistic(p, y, w, masks));
    });
    r.mean_dw = std::accumulate(dw.begin(), dw.end(), 0.0) / static_cast<double>(trials);
    std::vector<double> sorted0 = s0, sorted1 = s1;
    std::sort(sorted0.begin(), sorted0.end());
    std::sort(sorted1.begin(), sorted1.end());

    // Theory
    std::function<ErrorRates(double)> rates;
    std::string blocked = theory_blocker(p);
    TheoryRequest req = theory_request(p);
    if (blocked.empty()) {
        try {
            if (has_structured_theory(req) && p.stat == default_statistic(req.scheme) &&
                (p.rule == Rule::double_sided || p.stat == Statistic::stdm)) {
                (void)structured_rates(req, 0.0);
                rates = [req](double psi) { return structured_rates(req, psi); };
                r.theory = "structured";
            } else if (p.stat != Statistic::stdm) {
                GaussianStatSummary sm = moments_for(req);
                for (const auto& w : sm.warnings) r.warnings.push_back(w);
                r.summary = sm;
                Rule rule = p.rule;
                rates = [sm, rule](double psi) { return gaussian_rates(sm, psi, rule); };
                r.theory = "gaussian";
            }
        } catch (const UnsupportedError& e) {
            r.warnings.push_back(std::string("theory unavailable: ") + e.what());
        } catch (const DomainError& e) {
            r.warnings.push_back(std::string("theory unavailable: ") + e.what());
        }
    } else {
        r.warnings.push_back("theory unavailable: " + blocked);
    }
    if (p.pool && rates) r.warnings.push_back("theory uses the model fitted to the pristine pool");

    // Thresholds, as score cut-offs.
    std::vector<double> thresholds;
    auto to_psi = [&](double thr) { return p.stat == Statistic::stdm ? -thr : thr; };
    if (!p.cfg.psi_grid.empty()) {
        for (double psi : p.cfg.psi_grid) thresholds.push_back(p.stat == Statistic::stdm ? -psi : psi);
    } else {
        std::vector<double> grid = p.cfg.pfa_grid.empty() ? default_pfa_grid() : p.cfg.pfa_grid;
        for (double pf : grid) {
            if (!(pf > 0.0 && pf < 1.0)) throw ConfigError("pfa grid entries must lie in (0, 1)");
            if (rates) {
                double psi;
                if (p.stat == Statistic::stdm) {
                    psi = invert_pfa([&](double v) { return rates(v).p_fa; }, pf, 0.0, p.cfg.scheme.delta_step / 2.0);
                } else if (r.theory == "gaussian" && p.rule == Rule::single) {
                    psi = r.summary->m0 + r.summary->s0 * q_inv(pf);
                } else {
                    double hi = 1.0;
                    while (rates(hi).p_fa > pf && hi < 1e300) hi *= 2.0;
                    psi = invert_pfa([&](double v) { return rates(v).p_fa; }, pf, 0.0, hi);
                }
                thresholds.push_back(p.stat == Statistic::stdm ? -psi : psi);
            } else {
                auto k = static_cast<std::size_t>(std::floor((1.0 - pf) * static_cast<double>(trials)));
                thresholds.push_back(sorted0[std::min(k, trials - 1)]);
            }
        }
    }

    const double tr = static_cast<double>(trials);
    for (double thr : thresholds) {
        RocRow row;
        row.psi = to_psi(thr);
        auto above = [](const std::vector<double>& v, double c) {
            return static_cast<std::size_t>(v.end() - std::upper_bound(v.begin(), v.end(), c));
        };
        row.false_alarms = above(sorted0, thr);
        row.misses = trials - above(sorted1, thr);
        row.pfa = static_cast<double>(row.false_alarms) / tr;
        row.pm = static_cast<double>(row.misses) / tr;
        row.pfa_se = std::sqrt(row.pfa * (1.0 - row.pfa) / tr);
        row.pm_se = std::sqrt(row.pm * (1.0 - row.pm) / tr);
        row.pfa_censored = row.pfa < 10.0 / tr;
        if (rates) {
            ErrorRates er = rates(row.psi);
            row.pfa_theory = er.p_fa;
            row.pm_theory = er.p_m;
        }
        r.rows.push_back(row);
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

ExperimentReport run_decoding(const ExperimentConfig& in, std::size_t point) {
    auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig dcfg = in;
    dcfg.task = Task::decoding;
    const Prepared p = prepare(dcfg, point);
    ExperimentReport r = start_report(p, point);
    const std::size_t trials = p.cfg.trials, n = p.cfg.source.n;
    const std::uint64_t seed = p.cfg.master_seed;

    std::vector<unsigned char> err(trials);
    std::vector<double> dw(trials);
    parallel_for(trials, r.workers, [&](std::size_t t) {
        std::vector<double> x(n), masks, w = p.w;
        std::vector<std::size_t> idx;
        Rng rng(mix_seed(seed, point, t));
        const int b = rng.sign() > 0.0 ? 1 : -1;
        if (p.cfg.random_watermark) {
            for (double& v : w) v = rng.sign();
        }
        draw_hosts(p, rng, x, masks, idx);
        SchemeConfig sc = p.cfg.scheme;
        sc.b = b;
        sc.mask = masks;
        std::vector<double> y = embed(x, w, sc);
        dw[t] = mean_sq_change(x, y);
        attack(p, y, idx, true, rng);
        int decoded;
        if (p.qim_vote) {
            std::vector<int> bits = qim_decode(y, sc);
            long vote = std::accumulate(bits.begin(), bits.end(), 0L);
            decoded = vote > 0 ? 1 : -1;
        } else {
            decoded = decide(statistic(p, y, w, masks), 0.0, Rule::sign).verdict;
        }
        err[t] = decoded != b ? 1 : 0;
    });
    r.mean_dw = std::accumulate(dw.begin(), dw.end(), 0.0) / static_cast<double>(trials);
    r.errors = std::accumulate(err.begin(), err.end(), std::size_t{0});
    const double tr = static_cast<double>(trials);
    r.pe = static_cast<double>(r.errors) / tr;
    r.pe_se = std::sqrt(*r.pe * (1.0 - *r.pe) / tr);

    std::string blocked = theory_blocker(p);
    if (blocked.empty()) {
        try {
            GaussianStatSummary sm = moments_for(theory_request(p));
            for (const auto& w : sm.warnings) r.warnings.push_back(w);
            r.pe_theory = pe_gaussian(sm);
            r.summary = sm;
            r.theory = "gaussian";
            if (p.pool) r.warnings.push_back("theory uses the model fitted to the pristine pool");
        } catch (const UnsupportedError& e) {
            r.warnings.push_back(std::string("theory unavailable: ") + e.what());
        } catch (const DomainError& e) {
            r.warnings.push_back(std::string("theory unavailable: ") + e.what());
        }
    } else {
        r.warnings.push_back("theory unavailable: " + blocked);
    }
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t point) {
    return cfg.task == Task::decoding ? run_decoding(cfg, point) : run_verification(cfg, point);
}

std::string to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::c: return "c";
        case SweepAxis::xi: return "xi";
        case SweepAxis::lambda: return "lambda";
        case SweepAxis::gamma_order: return "gamma_order";
        case SweepAxis::wnr: return "wnr";
        case SweepAxis::qf: return "qf";
        case SweepAxis::n: return "N";
    }
    return "?";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
    for (int i = 0; i <= static_cast<int>(SweepAxis::n); ++i) {
        auto a = static_cast<SweepAxis>(i);
        if (to_string(a) == s) return a;
    }
    throw ConfigError("unknown sweep axis '" + s + "'");
}

std::vector<ExperimentReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& grid) {
    if (grid.empty()) throw ConfigError("sweep grid is empty");
    const Scheme sc = cfg.scheme.scheme;
    std::vector<ExperimentReport> out;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        ExperimentConfig c = cfg;
        const double g = grid[k];
        switch (axis) {
            case SweepAxis::c:
                if (c.source.kind != SourceConfig::Kind::synthetic) throw ConfigError("c axis needs a synthetic source");
                if (c.source.model.kind == ModelKind::ggd) {
                    c.source.model.c = g;
                } else if (c.source.model.kind == ModelKind::weibull) {
                    c.source.model.delta = g;
                } else {
                    throw ConfigError("c axis does not apply to Cauchy hosts");
                }
                break;
            case SweepAxis::xi: {
                Statistic st = c.detector.statistic.value_or(default_statistic(sc));
                if (st != Statistic::generalized && st != Statistic::ass_optimum && st != Statistic::mss_optimum) {
                    throw ConfigError("xi axis needs a statistic with an order");
                }
                c.detector.xi = g;
                if (sc == Scheme::ds_mss || sc == Scheme::mss || sc == Scheme::emss) c.scheme.xi_order = g;
                break;
            }
            case SweepAxis::lambda:
                if (sc != Scheme::emss && sc != Scheme::dc_qim) throw ConfigError("lambda axis needs EMSS or DC_QIM");
                c.scheme.lambda = g;
                break;
            case SweepAxis::gamma_order:
                if (sc != Scheme::emss) throw ConfigError("gamma_order axis needs EMSS");
                c.scheme.gamma_order = g;
                break;
            case SweepAxis::wnr:
                if (!c.attack || !c.attack->is_noise()) throw ConfigError("wnr axis needs a noise attack");
                c.wnr_db = g;
                break;
            case SweepAxis::qf:
                if (!c.attack || c.attack->is_noise()) throw ConfigError("qf axis needs a JPEG attack");
                c.attack->qf = static_cast<int>(std::lround(g));
                break;
            case SweepAxis::n:
                if (!(g >= 2.0) || std::floor(g) != g) throw ConfigError("N axis needs integers >= 2");
                c.source.n = static_cast<std::size_t>(g);
                break;
        }
        out.push_back(run_experiment(c, k));
    }
    return out;
}

std::vector<RocTable> roc_tables(const ExperimentReport& r) {
    std::vector<RocPoint> emp, th;
    for (const RocRow& row : r.rows) {
        emp.push_back({row.pfa, row.pm});
        if (row.pfa_theory && row.pm_theory) th.push_back({*row.pfa_theory, *row.pm_theory});
    }
    const std::string name = to_string(r.config.scheme.scheme);
    std::vector<RocTable> out;
    out.push_back(make_roc_table(std::move(emp), Provenance::empirical, name));
    if (!th.empty()) out.push_back(make_roc_table(std::move(th), Provenance::theory, name));
    return out;
}

void write_roc_csv(const ExperimentReport& r, std::ostream& os, bool header) {
    os.precision(10);
    auto opt = [&](const std::optional<double>& v) {
        if (v) os << *v;
    };
    if (r.config.task == Task::decoding) {
        if (header) os << "point,trials,errors,pe,pe_se,pe_theory,mean_dw\n";
        os << r.point << "," << r.config.trials << "," << r.errors << ",";
        opt(r.pe);
        os << ",";
        opt(r.pe_se);
        os << ",";
        opt(r.pe_theory);
        os << "," << r.mean_dw << "\n";
        return;
    }
    if (header) os << "point,psi,false_alarms,misses,pfa,pfa_se,pfa_censored,pm,pm_se,pfa_theory,pm_theory\n";
    for (const RocRow& row : r.rows) {
        os << r.point << "," << row.psi << "," << row.false_alarms << "," << row.misses << "," << row.pfa << ","
           << row.pfa_se << "," << (row.pfa_censored ? 1 : 0) << "," << row.pm << "," << row.pm_se << ",";
        opt(row.pfa_theory);
        os << ",";
        opt(row.pm_theory);
        os << "\n";
    }
}

}  // namespace wmlab
