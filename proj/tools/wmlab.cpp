#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "wmlab/channel.hpp"
#include "wmlab/detect.hpp"
#include "wmlab/embed.hpp"
#include "wmlab/errors.hpp"
#include "wmlab/harness.hpp"
#include "wmlab/io.hpp"
#include "wmlab/models.hpp"
#include "wmlab/percept.hpp"

using namespace wmlab;

namespace {

bool is_pgm(const std::string& path) { return path.size() > 4 && path.substr(path.size() - 4) == ".pgm"; }

// Writes to the named file, or stdout when empty.
void emit(const std::string& path, const std::function<void(std::ostream&)>& fn) {
    if (path.empty()) {
        fn(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw ArgumentError("cannot write '" + path + "'");
    fn(os);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> g;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            g.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("bad grid value '" + item + "'");
        }
    }
    return g;
}

std::vector<double> watermark_for(std::uint64_t seed, std::size_t n) {
    WatermarkSequence w = gen_watermark(seed, n);
    return {w.values().begin(), w.values().end()};
}

double run_statistic(const DetectConfig& d, std::span<const double> y, std::span<const double> w) {
    const double a = d.scheme.a;
    const double xi = d.scheme.xi();
    switch (d.statistic) {
        case Statistic::correlator: return correlate(y, w);
        case Statistic::generalized: return generalized_correlate(y, w, xi);
        case Statistic::ass_optimum:
            if (d.rule == Rule::sign) return optimum_decode_ass(y, w, a, d.shape.value_or(xi));
            return optimum_detect_ass(y, w, a, d.shape.value_or(xi), d.scheme.mask);
        case Statistic::mss_optimum: return optimum_detect_mss(y, w, a, d.shape.value_or(xi));
        case Statistic::gaussian_attacked:
            if (!d.sigma_x || !d.sigma_v) throw ConfigError("gaussian_attacked needs sigma_x and sigma_v");
            return optimum_detect_gaussian_attacked(y, w, a, *d.sigma_x, *d.sigma_v);
        case Statistic::cauchy:
            if (!d.scheme.cauchy_gamma) throw ConfigError("cauchy statistic needs cauchy_gamma");
            return cauchy_statistic(y, w, *d.scheme.cauchy_gamma);
        case Statistic::stdm: return stdm_distance(y, w, d.scheme.delta_step, d.scheme.dither);
    }
    return 0.0;
}

int run(int argc, char** argv) {
    CLI::App app{"wmlab: spread-spectrum watermarking laboratory"};
    app.require_subcommand(1);

    std::string input, output, kind = "ggd", cfg_path, stage = "luminance", axis, grid, csv_path, image_out;
    std::size_t n = 1000;
    std::uint64_t seed = 1, wseed = 1;
    int ac_index = 5;
    bool special = false, all = false;
    std::string img_a, img_b;

    auto* est = app.add_subcommand("estimate", "Fit a host model to samples or an image coefficient");
    est->add_option("input", input, "Sample file (one value per line) or PGM image")->required();
    est->add_option("--kind", kind, "ggd, weibull or cauchy");
    est->add_option("--ac-index", ac_index, "Zigzag AC index for images");

    auto* smp = app.add_subcommand("sample", "Draw samples from a model");
    smp->add_option("model", cfg_path, "Model JSON")->required();
    smp->add_option("-n,--count", n, "Number of draws");
    smp->add_option("--seed", seed, "Seed");
    smp->add_flag("--special", special, "Use the textbook construction (c in {0.5, 1, 2})");
    smp->add_option("-o,--output", output, "Output file");

    auto* emb = app.add_subcommand("embed", "Embed a watermark into a host vector or image");
    emb->add_option("config", cfg_path, "SchemeConfig JSON")->required();
    emb->add_option("--input", input, "Host vector file or PGM image")->required();
    emb->add_option("--watermark-seed", wseed, "Watermark key");
    emb->add_option("--ac-index", ac_index, "Zigzag AC index for images");
    emb->add_option("--mask-stage", stage, "Watson stage for perceptual schemes on images");
    emb->add_option("-o,--output", output, "Output vector file or PGM");

    auto* att = app.add_subcommand("attack", "Apply an attack to a vector or image");
    att->add_option("spec", cfg_path, "AttackSpec JSON")->required();
    att->add_option("--input", input, "Vector file or PGM image")->required();
    att->add_option("-o,--output", output, "Output vector file or PGM");

    auto* det = app.add_subcommand("detect", "Compute a decision statistic and verdict");
    det->add_option("config", cfg_path, "Detector JSON")->required();
    det->add_option("--input", input, "Received vector file")->required();
    det->add_option("--watermark-seed", wseed, "Watermark key");

    auto* sim = app.add_subcommand("simulate", "Run a Monte-Carlo experiment");
    sim->add_option("experiment", cfg_path, "Experiment JSON")->required();
    sim->add_option("--csv", csv_path, "Write the RocTable CSV here");
    sim->add_option("-o,--output", output, "Write the JSON report here");

    auto* swp = app.add_subcommand("sweep", "Run an experiment over a parameter grid");
    swp->add_option("experiment", cfg_path, "Experiment JSON")->required();
    swp->add_option("--axis", axis, "c, xi, lambda, gamma_order, wnr, qf or N")->required();
    swp->add_option("--grid", grid, "Comma-separated values")->required();
    swp->add_option("--csv", csv_path, "Write per-point rows as CSV here");
    swp->add_option("-o,--output", output, "Write the JSON reports here");

    auto* msk = app.add_subcommand("mask", "Watson perceptual mask of an image (CSV k,i,j,m)");
    msk->add_option("image", input, "PGM image")->required();
    msk->add_option("--stage", stage, "frequency, luminance or contrast");
    msk->add_option("-o,--output", output, "Output CSV");

    auto* ps = app.add_subcommand("psnr", "PSNR between two images");
    ps->add_option("a", img_a, "First PGM")->required();
    ps->add_option("b", img_b, "Second PGM")->required();

    auto* dct = app.add_subcommand("dct", "Block DCT coefficients of an image");
    dct->add_option("image", input, "PGM image")->required();
    dct->add_option("--ac-index", ac_index, "Zigzag AC index to extract");
    dct->add_flag("--all", all, "Write every coefficient as CSV k,i,j,x");
    dct->add_option("-o,--output", output, "Output file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (est->parsed()) {
        std::vector<double> v;
        if (is_pgm(input)) {
            v = zigzag_extract(block_dct(read_pgm(input)), ac_index);
        } else {
            v = read_vector_file(input);
        }
        Json j = to_json(estimate(v, model_kind_from_string(kind)));
        j["n"] = v.size();
        std::cout << j.dump(2) << "\n";
    } else if (smp->parsed()) {
        HostModel m = host_model_from_json(read_json_file(cfg_path));
        SampleBatch b = special ? sample_special(m, n, seed) : sample(m, n, seed);
        emit(output, [&](std::ostream& os) { write_vector(b.values, os); });
    } else if (emb->parsed()) {
        SchemeConfig sc = scheme_config_from_json(read_json_file(cfg_path));
        for (const auto& w : sc.validate()) std::cerr << "warning: " << w << "\n";
        if (is_pgm(input)) {
            GrayImage img = read_pgm(input);
            BlockDctImage d = block_dct(img);
            std::vector<double> x = zigzag_extract(d, ac_index);
            if (x.size() % 2 != 0) x.pop_back();
            if ((sc.scheme == Scheme::ass_perceptual || sc.scheme == Scheme::ds_ass_perceptual) && sc.mask.empty()) {
                sc.mask = watson_mask(d, mask_stage_from_string(stage)).zigzag_extract(ac_index);
                sc.mask.resize(x.size());
            }
            std::vector<double> s = embed(x, watermark_for(wseed, x.size()), sc);
            std::vector<double> full = zigzag_extract(d, ac_index);
            std::copy(s.begin(), s.end(), full.begin());
            zigzag_insert(d, ac_index, full);
            GrayImage out = to_8bit(inverse_dct(d));
            if (output.empty()) throw ArgumentError("image embedding needs --output");
            write_pgm(out, output);
            Json j;
            j["psnr"] = number_or_sentinel(psnr(img, out));
            j["mean_dw"] = distortion(x, s).dt;
            std::cout << j.dump(2) << "\n";
        } else {
            std::vector<double> x = read_vector_file(input);
            std::vector<double> s = embed(x, watermark_for(wseed, x.size()), sc);
            emit(output, [&](std::ostream& os) { write_vector(s, os); });
        }
    } else if (att->parsed()) {
        AttackSpec spec = attack_spec_from_json(read_json_file(cfg_path));
        spec.validate();
        if (spec.kind == AttackSpec::Kind::jpeg) {
            if (output.empty()) throw ArgumentError("JPEG attack needs --output");
            write_pgm(jpeg_attack(read_pgm(input), spec.qf), output);
        } else if (is_pgm(input)) {
            GrayImage img = read_pgm(input);
            img.pixels = apply_noise(img.pixels, spec);
            if (output.empty()) throw ArgumentError("image attack needs --output");
            write_pgm(img, output);
        } else {
            std::vector<double> y = apply_noise(read_vector_file(input), spec);
            emit(output, [&](std::ostream& os) { write_vector(y, os); });
        }
    } else if (det->parsed()) {
        DetectConfig d = detect_config_from_json(read_json_file(cfg_path));
        std::vector<double> y = read_vector_file(input);
        std::vector<double> w = watermark_for(wseed, y.size());
        DecisionOutcome out;
        if (d.statistic == Statistic::stdm) {
            out = stdm_detect(y, w, d.scheme.delta_step, d.psi, d.scheme.dither);
        } else {
            out = decide(run_statistic(d, y, w), d.psi, d.rule);
        }
        Json j;
        j["statistic"] = out.statistic;
        j["psi"] = out.psi;
        j["rule"] = to_string(out.rule);
        j["verdict"] = out.verdict;
        std::cout << j.dump(2) << "\n";
    } else if (sim->parsed()) {
        ExperimentReport r = run_experiment(experiment_config_from_json(read_json_file(cfg_path)));
        if (!csv_path.empty()) {
            emit(csv_path, [&](std::ostream& os) {
                if (r.config.task == Task::decoding) {
                    write_roc_csv(r, os);
                } else {
                    write_roc_csv(roc_tables(r), os);
                }
            });
        }
        emit(output, [&](std::ostream& os) { os << to_json(r).dump(2) << "\n"; });
    } else if (swp->parsed()) {
        ExperimentConfig cfg = experiment_config_from_json(read_json_file(cfg_path));
        SweepAxis ax = sweep_axis_from_string(axis);
        std::vector<double> g = parse_grid(grid);
        std::vector<ExperimentReport> reports = sweep(cfg, ax, g);
        Json arr = Json::array();
        for (std::size_t k = 0; k < reports.size(); ++k) {
            Json j = to_json(reports[k]);
            j["axis"] = to_string(ax);
            j["value"] = g[k];
            arr.push_back(j);
        }
        if (!csv_path.empty()) {
            emit(csv_path, [&](std::ostream& os) {
                for (std::size_t k = 0; k < reports.size(); ++k) write_roc_csv(reports[k], os, k == 0);
            });
        }
        emit(output, [&](std::ostream& os) { os << arr.dump(2) << "\n"; });
    } else if (msk->parsed()) {
        PerceptualMask pm = watson_mask(block_dct(read_pgm(input)), mask_stage_from_string(stage));
        emit(output, [&](std::ostream& os) { write_mask_csv(pm, os); });
    } else if (ps->parsed()) {
        Json j;
        j["psnr"] = number_or_sentinel(psnr(read_pgm(img_a), read_pgm(img_b)));
        std::cout << j.dump(2) << "\n";
    } else if (dct->parsed()) {
        BlockDctImage d = block_dct(read_pgm(input));
        emit(output, [&](std::ostream& os) {
            if (all) {
                os << "k,i,j,x\n";
                os.precision(17);
                for (std::size_t k = 0; k < d.blocks.size(); ++k)
                    for (int i = 0; i < 8; ++i)
                        for (int jj = 0; jj < 8; ++jj) os << k << "," << i << "," << jj << "," << d.blocks[k][i * 8 + jj] << "\n";
            } else {
                write_vector(zigzag_extract(d, ac_index), os);
            }
        });
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
