#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "zsym/grid.hpp"
#include "zsym/psf.hpp"

namespace zsym {

// Parameter bundle for the Monte Carlo drivers. Parsed from JSON with
// unknown-key rejection; fields irrelevant to a given experiment keep their
// defaults.
struct ExperimentConfig {
    std::string experiment;  // beta_distribution | ci_coverage | psf_benchmark
    std::string target = "f1";
    int m = 101;
    double snr = 5.0;
    double sigma = 1.0;
    int n_max = 7;
    int replicates = 500;
    double alpha = 0.05;
    std::uint64_t base_seed = 1;
    double interval_a = 0.0;
    double interval_b = 3.14159265358979323846;
    int grid_points = 4096;
    int rl_iterations = 500;
    int psf_n_max = 4;
    int kernel_m = 33;
    double phantom_peak = 360.0;
    double true_psf_exponent = 1.19;
    bool noiseless = false;
    BeadSpec bead;
    std::vector<std::string> metrics = {"L1", "L2"};
    std::string output_prefix;
};

// Parse a JSON config text / file. Unknown keys and invalid values raise
// io_error with an explanatory message.
ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

// Distribution study: replicated axis estimation on freshly noised targets,
// with the theoretical normal-limit overlay computed from dense-quadrature
// moments. Samples are unwrapped to the period-pi interval centered at
// beta_ref (the true axis for f1/f2, the fixed-order contrast minimizer for
// f3).
struct BetaDistributionResult {
    double beta_ref = 0.0;
    std::vector<double> samples;
    double empirical_mean = 0.0;
    double empirical_sd = 0.0;
    double asymptotic_sd = 0.0;
    std::vector<double> curve_beta;   // contrast curve of the first replicate
    std::vector<double> curve_value;
};
BetaDistributionResult run_beta_distribution(const ExperimentConfig& cfg);

// Fraction of replicates whose confidence interval covers the true axis
// (modulo pi). Requires a symmetric target (f1 or f2).
struct CoverageResult {
    int covered = 0;
    int replicates = 0;
    double coverage = 0.0;
    double mean_halfwidth = 0.0;
    double mean_sigma2 = 0.0;
};
CoverageResult run_ci_coverage(const ExperimentConfig& cfg);

inline constexpr std::array<const char*, 4> kPsfMethodNames = {
    "gaussian_mle", "power_gaussian_mle", "raw_nonparametric",
    "symmetrized_nonparametric"};

// One Richardson-Lucy outcome: method index follows kPsfMethodNames.
struct PsfReplicateRecord {
    int replicate = 0;
    int method = 0;
    double l1 = 0.0;
    int best_k_l1 = 0;
    double l2 = 0.0;
    int best_k_l2 = 0;
    bool loglik_monotone = true;  // within 1e-9 relative slack
    double mass_drift = 0.0;      // max relative deviation from the data mass
    double min_iterate = 0.0;     // smallest pixel value over all iterates
    double beta_hat = 0.0;        // axis used by the symmetrized model
};

struct PsfBenchmarkReport {
    std::array<double, 4> mean_l1{};
    std::array<double, 4> mean_l2{};
    std::vector<PsfReplicateRecord> records;
    // One-sided paired sign tests (p-values): gaussian < symmetrized,
    // symmetrized < power, symmetrized < raw, per metric.
    double p_l1_gauss_lt_symm = 1.0;
    double p_l1_symm_lt_power = 1.0;
    double p_l1_symm_lt_raw = 1.0;
    double p_l2_gauss_lt_symm = 1.0;
    double p_l2_symm_lt_power = 1.0;
    double p_l2_symm_lt_raw = 1.0;
    bool ordering_l1 = false;  // gaussian < symmetrized < min(power, raw)
    bool ordering_l2 = false;
};
PsfBenchmarkReport run_psf_benchmark(const ExperimentConfig& cfg);

// P[Binomial(trials, 1/2) >= wins]; the one-sided paired sign test.
double sign_test_p(int wins, int trials);

// Report writers: <prefix>.json plus plot-ready CSV companions. All numbers
// at full round-trip precision.
void write_beta_distribution_report(const BetaDistributionResult& result,
                                    const ExperimentConfig& cfg,
                                    const std::string& prefix);
void write_coverage_report(const CoverageResult& result, const ExperimentConfig& cfg,
                           const std::string& prefix);
void write_psf_benchmark_report(const PsfBenchmarkReport& report,
                                const ExperimentConfig& cfg, const std::string& prefix);

}  // namespace zsym
