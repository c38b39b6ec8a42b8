#include "wmlab/io.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "wmlab/errors.hpp"

namespace wmlab {

namespace {

void only_fields(const Json& j, std::initializer_list<const char*> allowed, const std::string& what) {
    if (!j.is_object()) throw ConfigError(what + ": expected a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!ok.count(it.key())) throw ConfigError(what + ": unknown field '" + it.key() + "'");
    }
}

template <class T>
T get(const Json& j, const char* key, const std::string& what) {
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(what + ": bad field '" + key + "': " + e.what());
    }
}

template <class T>
void maybe(const Json& j, const char* key, T& out, const std::string& what) {
    if (j.contains(key)) out = get<T>(j, key, what);
}

template <class T>
void maybe(const Json& j, const char* key, std::optional<T>& out, const std::string& what) {
    if (j.contains(key) && !j.at(key).is_null()) out = get<T>(j, key, what);
}

template <class T>
void put(Json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
}

}  // namespace

Json number_or_sentinel(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

HostModel host_model_from_json(const Json& j) {
    const std::string w = "model";
    only_fields(j, {"kind", "c", "sigma_x", "theta", "delta", "gamma"}, w);
    HostModel m;
    m.kind = model_kind_from_string(get<std::string>(j, "kind", w));
    maybe(j, "c", m.c, w);
    maybe(j, "sigma_x", m.sigma_x, w);
    maybe(j, "theta", m.theta, w);
    maybe(j, "delta", m.delta, w);
    maybe(j, "gamma", m.gamma, w);
    m.validate();
    return m;
}

Json to_json(const HostModel& m) {
    Json j;
    j["kind"] = to_string(m.kind);
    switch (m.kind) {
        case ModelKind::ggd:
            j["c"] = m.c;
            j["sigma_x"] = m.sigma_x;
            break;
        case ModelKind::weibull:
            j["theta"] = m.theta;
            j["delta"] = m.delta;
            break;
        case ModelKind::cauchy:
            j["gamma"] = m.gamma;
            break;
    }
    return j;
}

#define WMLAB_SCHEME_FIELDS                                                                                    \
    "scheme", "a", "b", "lambda", "gamma_order", "xi_order", "delta_step", "dither", "dither_seed", "target_l", \
        "mask", "cauchy_gamma"

namespace {

SchemeConfig scheme_fields(const Json& j, const std::string& w) {
    SchemeConfig c;
    c.scheme = scheme_from_string(get<std::string>(j, "scheme", w));
    maybe(j, "a", c.a, w);
    maybe(j, "b", c.b, w);
    maybe(j, "lambda", c.lambda, w);
    maybe(j, "gamma_order", c.gamma_order, w);
    maybe(j, "xi_order", c.xi_order, w);
    maybe(j, "delta_step", c.delta_step, w);
    maybe(j, "dither", c.dither, w);
    maybe(j, "dither_seed", c.dither_seed, w);
    maybe(j, "target_l", c.target_l, w);
    maybe(j, "mask", c.mask, w);
    maybe(j, "cauchy_gamma", c.cauchy_gamma, w);
    return c;
}

}  // namespace

SchemeConfig scheme_config_from_json(const Json& j) {
    only_fields(j, {WMLAB_SCHEME_FIELDS}, "scheme config");
    SchemeConfig c = scheme_fields(j, "scheme config");
    c.validate();
    return c;
}

Json to_json(const SchemeConfig& c) {
    Json j;
    j["scheme"] = to_string(c.scheme);
    j["a"] = c.a;
    j["b"] = c.b;
    j["lambda"] = c.lambda;
    j["gamma_order"] = c.gamma_order;
    put(j, "xi_order", c.xi_order);
    j["delta_step"] = c.delta_step;
    put(j, "dither", c.dither);
    put(j, "dither_seed", c.dither_seed);
    j["target_l"] = c.target_l;
    if (!c.mask.empty()) j["mask"] = c.mask;
    put(j, "cauchy_gamma", c.cauchy_gamma);
    return j;
}

DetectConfig detect_config_from_json(const Json& j) {
    const std::string w = "detector config";
    only_fields(j, {WMLAB_SCHEME_FIELDS, "rule", "psi", "statistic", "shape", "sigma_x", "sigma_v"}, w);
    DetectConfig d;
    d.scheme = scheme_fields(j, w);
    d.scheme.validate();
    if (j.contains("statistic")) d.statistic = statistic_from_string(get<std::string>(j, "statistic", w));
    if (j.contains("rule")) d.rule = rule_from_string(get<std::string>(j, "rule", w));
    maybe(j, "psi", d.psi, w);
    maybe(j, "shape", d.shape, w);
    maybe(j, "sigma_x", d.sigma_x, w);
    maybe(j, "sigma_v", d.sigma_v, w);
    return d;
}

AttackSpec attack_spec_from_json(const Json& j) {
    const std::string w = "attack";
    only_fields(j, {"kind", "sigma_v", "sigmaV", "ac", "qf", "seed"}, w);
    AttackSpec a;
    a.kind = attack_kind_from_string(get<std::string>(j, "kind", w));
    maybe(j, "sigmaV", a.sigma_v, w);
    maybe(j, "sigma_v", a.sigma_v, w);
    maybe(j, "ac", a.ac, w);
    maybe(j, "qf", a.qf, w);
    maybe(j, "seed", a.seed, w);
    return a;
}

Json to_json(const AttackSpec& a) {
    Json j;
    j["kind"] = to_string(a.kind);
    if (a.is_noise()) {
        j["sigma_v"] = a.sigma_v;
        if (a.kind == AttackSpec::Kind::ggd_noise) j["ac"] = a.ac;
    } else {
        j["qf"] = a.qf;
    }
    j["seed"] = a.seed;
    return j;
}

ExperimentConfig experiment_config_from_json(const Json& j) {
    const std::string w = "experiment";
    only_fields(j,
                {"source", "scheme", "detector", "attack", "task", "trials", "psi_grid", "pfa_grid", "master_seed",
                 "random_watermark", "dwr_db", "wnr_db"},
                w);
    ExperimentConfig c;
    const Json& src = j.at("source");
    only_fields(src, {"kind", "model", "n", "image", "ac_index", "mask_stage", "fit", "estimate_from_test"}, "source");
    std::string kind = get<std::string>(src, "kind", "source");
    if (kind == "synthetic") {
        c.source.kind = SourceConfig::Kind::synthetic;
        c.source.model = host_model_from_json(src.at("model"));
    } else if (kind == "image") {
        c.source.kind = SourceConfig::Kind::image;
        c.source.image_path = get<std::string>(src, "image", "source");
    } else {
        throw ConfigError("source: kind must be 'synthetic' or 'image'");
    }
    maybe(src, "n", c.source.n, "source");
    maybe(src, "ac_index", c.source.ac_index, "source");
    if (src.contains("mask_stage")) c.source.mask_stage = mask_stage_from_string(get<std::string>(src, "mask_stage", "source"));
    if (src.contains("fit")) c.source.fit_kind = model_kind_from_string(get<std::string>(src, "fit", "source"));
    maybe(src, "estimate_from_test", c.source.estimate_from_test, "source");

    // Validated by the harness, after dwr_db has fixed the strength.
    only_fields(j.at("scheme"), {WMLAB_SCHEME_FIELDS}, "scheme config");
    c.scheme = scheme_fields(j.at("scheme"), "scheme config");
    if (j.contains("detector")) {
        const Json& d = j.at("detector");
        only_fields(d, {"statistic", "rule", "xi", "cauchy_gamma"}, "detector");
        if (d.contains("statistic")) c.detector.statistic = statistic_from_string(get<std::string>(d, "statistic", "detector"));
        if (d.contains("rule")) c.detector.rule = rule_from_string(get<std::string>(d, "rule", "detector"));
        maybe(d, "xi", c.detector.xi, "detector");
        maybe(d, "cauchy_gamma", c.detector.cauchy_gamma, "detector");
    }
    if (j.contains("attack") && !j.at("attack").is_null()) c.attack = attack_spec_from_json(j.at("attack"));
    if (j.contains("task")) {
        std::string t = get<std::string>(j, "task", w);
        if (t == "verification") {
            c.task = Task::verification;
        } else if (t == "decoding") {
            c.task = Task::decoding;
        } else {
            throw ConfigError("task must be 'verification' or 'decoding'");
        }
    }
    maybe(j, "trials", c.trials, w);
    maybe(j, "psi_grid", c.psi_grid, w);
    maybe(j, "pfa_grid", c.pfa_grid, w);
    maybe(j, "master_seed", c.master_seed, w);
    maybe(j, "random_watermark", c.random_watermark, w);
    maybe(j, "dwr_db", c.dwr_db, w);
    maybe(j, "wnr_db", c.wnr_db, w);
    return c;
}

Json to_json(const ExperimentConfig& c) {
    Json j;
    Json src;
    if (c.source.kind == SourceConfig::Kind::synthetic) {
        src["kind"] = "synthetic";
        src["model"] = to_json(c.source.model);
    } else {
        src["kind"] = "image";
        src["image"] = c.source.image_path;
        src["ac_index"] = c.source.ac_index;
        if (c.source.mask_stage) src["mask_stage"] = to_string(*c.source.mask_stage);
        src["fit"] = to_string(c.source.fit_kind);
        src["estimate_from_test"] = c.source.estimate_from_test;
    }
    src["n"] = c.source.n;
    j["source"] = src;
    j["scheme"] = to_json(c.scheme);
    Json d = Json::object();
    if (c.detector.statistic) d["statistic"] = to_string(*c.detector.statistic);
    if (c.detector.rule) d["rule"] = to_string(*c.detector.rule);
    put(d, "xi", c.detector.xi);
    put(d, "cauchy_gamma", c.detector.cauchy_gamma);
    j["detector"] = d;
    if (c.attack) j["attack"] = to_json(*c.attack);
    j["task"] = c.task == Task::verification ? "verification" : "decoding";
    j["trials"] = c.trials;
    if (!c.psi_grid.empty()) j["psi_grid"] = c.psi_grid;
    if (!c.pfa_grid.empty()) j["pfa_grid"] = c.pfa_grid;
    j["master_seed"] = c.master_seed;
    j["random_watermark"] = c.random_watermark;
    put(j, "dwr_db", c.dwr_db);
    put(j, "wnr_db", c.wnr_db);
    return j;
}

Json to_json(const GaussianStatSummary& s) {
    Json j;
    j["m0"] = s.m0;
    j["m1"] = s.m1;
    j["s0"] = s.s0;
    j["s1"] = s.s1;
    j["approximate"] = s.approximate;
    j["warnings"] = s.warnings;
    return j;
}

Json to_json(const EmssDiagnostics& d) {
    Json j;
    j["eta_var"] = d.eta_var;
    put(j, "eta_var_exact", d.eta_var_exact);
    j["dw_approx"] = d.dw_approx;
    put(j, "dw_exact", d.dw_exact);
    j["crit_pfa"] = d.crit_pfa;
    j["lambda_max"] = d.lambda_max;
    j["lambda_opt"] = d.lambda_opt;
    j["mmt"] = d.mmt;
    j["approximate"] = d.approximate;
    j["advisories"] = d.advisories;
    return j;
}

Json to_json(const ExperimentReport& r) {
    Json j;
    j["config"] = to_json(r.config);
    j["point"] = r.point;
    j["seed"] = r.config.master_seed;
    j["model"] = to_json(r.model);
    j["theory"] = r.theory;
    if (r.summary) j["summary"] = to_json(*r.summary);
    j["mean_dw"] = r.mean_dw;
    j["wall_seconds"] = r.wall_seconds;
    j["workers"] = r.workers;
    j["warnings"] = r.warnings;
    if (r.config.task == Task::decoding) {
        j["errors"] = r.errors;
        put(j, "pe", r.pe);
        put(j, "pe_se", r.pe_se);
        put(j, "pe_theory", r.pe_theory);
    } else {
        Json rows = Json::array();
        for (const RocRow& row : r.rows) {
            Json x;
            x["psi"] = row.psi;
            x["false_alarms"] = row.false_alarms;
            x["misses"] = row.misses;
            x["p_fa"] = row.pfa;
            x["p_fa_se"] = row.pfa_se;
            x["p_fa_censored"] = row.pfa_censored;
            x["p_m"] = row.pm;
            x["p_m_se"] = row.pm_se;
            put(x, "p_fa_theory", row.pfa_theory);
            put(x, "p_m_theory", row.pm_theory);
            rows.push_back(x);
        }
        j["rows"] = rows;
    }
    return j;
}

Json read_json_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open '" + path + "'");
    try {
        return Json::parse(is);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("invalid JSON in '" + path + "': " + e.what());
    }
}

std::vector<double> read_vector(std::istream& is) {
    std::vector<double> v;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::istringstream ss(line);
        double x;
        if (!(ss >> x)) throw ArgumentError("not a number on line " + std::to_string(lineno));
        v.push_back(x);
    }
    return v;
}

std::vector<double> read_vector_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ArgumentError("cannot open '" + path + "'");
    return read_vector(is);
}

void write_vector(const std::vector<double>& v, std::ostream& os) {
    os.precision(17);
    for (double x : v) os << x << "\n";
}

}  // namespace wmlab
