#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "wmlab/channel.hpp"
#include "wmlab/detect.hpp"
#include "wmlab/embed.hpp"
#include "wmlab/models.hpp"
#include "wmlab/percept.hpp"
#include "wmlab/theory.hpp"

namespace wmlab {

struct SourceConfig {
    enum class Kind { synthetic, image };
    Kind kind = Kind::synthetic;
    HostModel model;  // synthetic hosts
    std::size_t n = 100;
    std::string image_path;  // image hosts: one zigzag coefficient per block
    int ac_index = 5;
    // Perceptual schemes take their masks from this stage of the Watson model.
    std::optional<MaskStage> mask_stage;
    // Image hosts: the fitted family used for detector and theory parameters.
    ModelKind fit_kind = ModelKind::ggd;
    // Re-estimate detector parameters from each test vector instead of the pristine pool.
    bool estimate_from_test = false;
};

struct DetectorConfig {
    std::optional<Statistic> statistic;  // default per scheme
    std::optional<Rule> rule;
    std::optional<double> xi;  // detector order; host shape for the optimum detectors
    std::optional<double> cauchy_gamma;
};

struct ExperimentConfig {
    SourceConfig source;
    SchemeConfig scheme;
    DetectorConfig detector;
    std::optional<AttackSpec> attack;
    Task task = Task::verification;
    std::size_t trials = 10000;
    std::vector<double> psi_grid;
    std::vector<double> pfa_grid;  // default: 25 log-uniform points in [1e-6, 0.5]
    std::uint64_t master_seed = 1;
    bool random_watermark = false;
    // When set, a (resp. the noise sigmaV) is derived from these ratios.
    std::optional<double> dwr_db;
    std::optional<double> wnr_db;
};

struct RocRow {
    double psi = 0.0;
    std::size_t false_alarms = 0;
    std::size_t misses = 0;
    double pfa = 0.0;
    double pfa_se = 0.0;
    bool pfa_censored = false;
    double pm = 0.0;
    double pm_se = 0.0;
    std::optional<double> pfa_theory;
    std::optional<double> pm_theory;
};

struct ExperimentReport {
    ExperimentConfig config;  // resolved (a, sigmaV filled in)
    std::size_t point = 0;
    std::vector<RocRow> rows;  // verification
    // decoding
    std::size_t errors = 0;
    std::optional<double> pe;
    std::optional<double> pe_se;
    std::optional<double> pe_theory;
    std::optional<GaussianStatSummary> summary;
    std::string theory;  // "gaussian", "structured", or "none"
    std::vector<std::string> warnings;
    HostModel model;      // model used for detector parameters and theory
    double mean_dw = 0.0; // empirical embedding distortion (mean squared change)
    double wall_seconds = 0.0;
    unsigned workers = 1;
};

// Fisher-Yates shuffle of the pool by seed; the first n entries.
std::vector<double> permute_hosts(std::span<const double> pool, std::size_t n, std::uint64_t seed);

// Worker count: WMLAB_THREADS when set, else hardware concurrency.
unsigned worker_count();

// Fills in a from dwr_db and the noise strength from wnr_db.
ExperimentConfig resolve_config(const ExperimentConfig& cfg);

ExperimentReport run_verification(const ExperimentConfig& cfg, std::size_t point = 0);
ExperimentReport run_decoding(const ExperimentConfig& cfg, std::size_t point = 0);
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::size_t point = 0);

enum class SweepAxis { c, xi, lambda, gamma_order, wnr, qf, n };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);

std::vector<ExperimentReport> sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<double>& grid);

// Empirical and (when attached) theory ROC tables of a verification report.
std::vector<RocTable> roc_tables(const ExperimentReport& r);

// One line per ROC row (verification) or a single p_e line (decoding).
void write_roc_csv(const ExperimentReport& r, std::ostream& os, bool header = true);

}  // namespace wmlab
