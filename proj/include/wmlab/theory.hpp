#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "wmlab/detect.hpp"
#include "wmlab/embed.hpp"
#include "wmlab/models.hpp"
#include "wmlab/numeric.hpp"

namespace wmlab {

// Gaussian approximation of a decision statistic under H0 and H1.
struct GaussianStatSummary {
    double m0 = 0.0;
    double m1 = 0.0;
    double s0 = 1.0;
    double s1 = 1.0;
    // Set when the result rests on a first-order or CLT-style approximation
    // beyond the Gaussian assumption itself.
    bool approximate = false;
    std::vector<std::string> warnings;
};

enum class Statistic {
    correlator,         // (1/N) sum y w
    generalized,        // (1/N) sum |y|^xi w
    ass_optimum,        // |y|^xi - |y - a w|^xi (verification) or |y + a w|^xi - |y - a w|^xi (decoding)
    mss_optimum,        // |y|^xi [1 - (1 + a w)^-xi], xi the host shape
    gaussian_attacked,  // Gaussian hosts under Gaussian noise
    cauchy,             // y w / (gamma^2 + y^2)
    stdm,               // distance to the STDM lattice
};

std::string to_string(Statistic s);
Statistic statistic_from_string(const std::string& s);

enum class Task { verification, decoding };

struct NoiseModel {
    enum class Kind { gaussian, ggd, abs_gaussian };
    Kind kind = Kind::gaussian;
    double sigma_v = 1.0;
    double ac = 2.0;

    // Variance of the added term (for abs_gaussian: of |V|).
    double variance() const;
    double mean() const;
};

struct TheoryRequest {
    Task task = Task::verification;
    Scheme scheme = Scheme::ass;
    Statistic statistic = Statistic::correlator;
    HostModel model;
    std::optional<NoiseModel> noise;
    double a = 1.0;
    double xi = 1.0;      // detector order, or host shape for mss_optimum
    double zeta = 1.0;    // Barni exponent / DS projection order at the embedder
    double lambda = 0.0;  // EMSS rejecting strength
    double gamma_order = 1.0;
    double cauchy_gamma = 1.0;
    double target_l = 1.0;
    double delta_step = 1.0;
    std::size_t n = 100;
    std::size_t grid_points = std::size_t{1} << 16;
};

// Supported single-sided combinations:
//   ASS / ASS_PERCEPTUAL (unit mask) with correlator, generalized, ass_optimum,
//     mss_optimum, gaussian_attacked, cauchy; any host, any noise
//   MSS with the same statistics; any host, any noise
//   BARNI / GEN_BARNI with correlator; any host, any noise. BARNI on a
//     Weibull host also takes every per-sample statistic (it equals MSS there)
//   EMSS with generalized: no noise (any gamma, xi) or Gaussian host under
//     Gaussian noise with gamma = xi = 2
// Noise-free expectations use adaptive quadrature; attacked ones use the
// density of the attacked coefficient from pdf_convolve.
GaussianStatSummary moments_for(const TheoryRequest& req);

double pe_gaussian(const GaussianStatSummary& s);
double roc_gaussian(const GaussianStatSummary& s, double p_fa);

struct ErrorRates {
    double p_fa = 0.0;
    double p_m = 0.0;
};

// Error rates of a Gaussian statistic at threshold psi under the single or
// double-sided rule.
ErrorRates gaussian_rates(const GaussianStatSummary& s, double psi, Rule rule);

// Double-sided ROC: 1 - 2Q(q_inv(p_fa/2) - rho) if p_fa < 2Q(rho), else 0.
double ds_roc(double rho, double p_fa);

// Double-sided rates given the shift m1, the H0 spread sigma0, the H1 noise
// spread sigma1 (0 for no attack) and the host projection spread.
ErrorRates ds_pm_attacked(double m1, double sigma0, double sigma1, double sigma_xbar, double psi);

// DS-ASS-HIR rates: projection forced to +-l, perturbed by noise of spread
// sigma_vbar; sigma0 is the H0 projection spread.
ErrorRates hir_rates(double l, double sigma0, double sigma_vbar, double psi);

// STDM rates for Gaussian hosts under Gaussian noise, lattice delta Z + delta/2.
ErrorRates stdm_roc(double delta_step, double sigma_x, double sigma_v, std::size_t n, double psi);

// Rates at threshold psi for the double-sided schemes and STDM (which use
// their own formulas rather than a Gaussian summary).
ErrorRates structured_rates(const TheoryRequest& req, double psi);
bool has_structured_theory(const TheoryRequest& req);

// rho of the double-sided ROC at a given DWR for DS_ASS, DS_BMSS, DS_MSS.
double ds_rho(Scheme scheme, const HostModel& m, double xi, std::size_t n, double dwr_db);

struct EmssDiagnostics {
    double eta_var = 0.0;
    std::optional<double> eta_var_exact;
    double dw_approx = 0.0;
    std::optional<double> dw_exact;
    double crit_pfa = 0.0;
    double lambda_max = 0.0;
    double lambda_opt = 0.0;
    double mmt = 0.0;
    bool approximate = false;
    std::vector<std::string> advisories;
};

EmssDiagnostics emss_diagnostics(const HostModel& m, double gamma_order, double xi, double lambda, double a,
                                 std::size_t n, double dwr_db);

double hir_distortion(double l, double sigma_x, std::size_t n);

// p_m with a fresh random (not zero-sum) watermark per trial.
double random_w_roc(const HostModel& m, double xi, double a, std::size_t n, double p_fa);

// MMT(xi, gamma) cross-moment ratio.
double mmt(const HostModel& m, double xi, double gamma_order);

enum class Provenance { theory, empirical };
std::string to_string(Provenance p);

struct RocPoint {
    double p_fa = 0.0;
    double p_m = 0.0;
};

struct RocTable {
    Provenance provenance = Provenance::theory;
    std::string scheme;
    std::string config_echo;  // JSON text, may be empty
    std::vector<RocPoint> rows;

    // p_fa strictly increasing, all probabilities in [0, 1].
    void validate() const;
};

// Sorts by p_fa and keeps the first row of each p_fa value.
RocTable make_roc_table(std::vector<RocPoint> points, Provenance provenance, std::string scheme = {});
RocTable theory_roc(const GaussianStatSummary& s, const std::vector<double>& pfa_grid, std::string scheme = {});
// Header p_fa,p_m,provenance.
void write_roc_csv(const std::vector<RocTable>& tables, std::ostream& os);

// Density of k X + shift + V on a grid fine enough for the noise.
NumericPdf attacked_pdf(const HostModel& m, double k, double shift, const std::optional<NoiseModel>& noise,
                        std::size_t grid_points = std::size_t{1} << 16);

}  // namespace wmlab
