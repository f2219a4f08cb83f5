#include "zsym/experiments.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zsym/image_model.hpp"
#include "zsym/rng.hpp"
#include "zsym/symmetry.hpp"
#include "zsym/zernike.hpp"

namespace zsym {

namespace {

using nlohmann::json;
using std::numbers::pi;

constexpr double kLoglikSlack = 1e-9;

TargetId target_from_name(const std::string& name) {
    if (name == "f1") return TargetId::f1;
    if (name == "f2") return TargetId::f2;
    if (name == "f3") return TargetId::f3;
    throw io_error("unknown target '" + name + "' (expected f1, f2 or f3)");
}

void require_keys(const json& j, const std::set<std::string>& known,
                  const std::string& where) {
    for (const auto& item : j.items())
        if (!known.count(item.key()))
            throw io_error("unknown config key '" + item.key() + "' in " + where);
}

std::string format_full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    return out;
}

json config_echo(const ExperimentConfig& cfg) {
    json j;
    j["experiment"] = cfg.experiment;
    j["target"] = cfg.target;
    j["m"] = cfg.m;
    j["snr"] = cfg.snr;
    j["sigma"] = cfg.sigma;
    j["n_max"] = cfg.n_max;
    j["replicates"] = cfg.replicates;
    j["alpha"] = cfg.alpha;
    j["base_seed"] = cfg.base_seed;
    j["interval"] = {cfg.interval_a, cfg.interval_b};
    j["grid_points"] = cfg.grid_points;
    if (cfg.experiment == "psf_benchmark") {
        j["rl_iterations"] = cfg.rl_iterations;
        j["psf_n_max"] = cfg.psf_n_max;
        j["kernel_m"] = cfg.kernel_m;
        j["phantom_peak"] = cfg.phantom_peak;
        j["true_psf_exponent"] = cfg.true_psf_exponent;
        j["noiseless"] = cfg.noiseless;
        j["bead"] = {{"fwhm_x", cfg.bead.fwhm_x},
                     {"fwhm_y", cfg.bead.fwhm_y},
                     {"bead_diameter", cfg.bead.bead_diameter},
                     {"peak_intensity", cfg.bead.peak_intensity},
                     {"pixel_size", cfg.bead.pixel_size}};
    }
    return j;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw io_error("config must be a JSON object");
    static const std::set<std::string> known = {
        "experiment", "target", "m", "snr", "sigma", "n_max", "replicates",
        "alpha", "base_seed", "interval", "grid_points", "rl_iterations",
        "psf_n_max", "kernel_m", "phantom_peak", "true_psf_exponent",
        "noiseless", "bead", "metrics", "output_prefix"};
    require_keys(j, known, "config");
    if (!j.count("experiment"))
        throw io_error("config must name an 'experiment'");
    ExperimentConfig cfg;
    try {
        cfg.experiment = j.at("experiment").get<std::string>();
        cfg.target = j.value("target", cfg.target);
        cfg.m = j.value("m", cfg.m);
        cfg.snr = j.value("snr", cfg.snr);
        cfg.sigma = j.value("sigma", cfg.sigma);
        cfg.n_max = j.value("n_max", cfg.n_max);
        cfg.replicates = j.value("replicates", cfg.replicates);
        cfg.alpha = j.value("alpha", cfg.alpha);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        if (j.count("interval")) {
            const json& iv = j.at("interval");
            if (!iv.is_array() || iv.size() != 2)
                throw io_error("'interval' must be a two-element array [a, b)");
            cfg.interval_a = iv.at(0).get<double>();
            cfg.interval_b = iv.at(1).get<double>();
        }
        cfg.grid_points = j.value("grid_points", cfg.grid_points);
        cfg.rl_iterations = j.value("rl_iterations", cfg.rl_iterations);
        cfg.psf_n_max = j.value("psf_n_max", cfg.psf_n_max);
        cfg.kernel_m = j.value("kernel_m", cfg.kernel_m);
        cfg.phantom_peak = j.value("phantom_peak", cfg.phantom_peak);
        cfg.true_psf_exponent = j.value("true_psf_exponent", cfg.true_psf_exponent);
        cfg.noiseless = j.value("noiseless", cfg.noiseless);
        if (j.count("bead")) {
            const json& b = j.at("bead");
            if (!b.is_object()) throw io_error("'bead' must be a JSON object");
            require_keys(b,
                         {"fwhm_x", "fwhm_y", "bead_diameter", "peak_intensity",
                          "pixel_size"},
                         "bead");
            cfg.bead.fwhm_x = b.value("fwhm_x", cfg.bead.fwhm_x);
            cfg.bead.fwhm_y = b.value("fwhm_y", cfg.bead.fwhm_y);
            cfg.bead.bead_diameter = b.value("bead_diameter", cfg.bead.bead_diameter);
            cfg.bead.peak_intensity = b.value("peak_intensity", cfg.bead.peak_intensity);
            cfg.bead.pixel_size = b.value("pixel_size", cfg.bead.pixel_size);
        }
        if (j.count("metrics")) {
            cfg.metrics.clear();
            for (const json& mj : j.at("metrics"))
                cfg.metrics.push_back(mj.get<std::string>());
        }
        cfg.output_prefix = j.value("output_prefix", cfg.output_prefix);
    } catch (const json::exception& e) {
        throw io_error(std::string("config field has the wrong type: ") + e.what());
    }

    if (cfg.experiment != "beta_distribution" && cfg.experiment != "ci_coverage" &&
        cfg.experiment != "psf_benchmark")
        throw io_error("unknown experiment '" + cfg.experiment + "'");
    (void)target_from_name(cfg.target);
    if (cfg.m < 2) throw io_error("'m' must be at least 2");
    if (!(cfg.snr > 0.0)) throw io_error("'snr' must be positive");
    if (!(cfg.sigma > 0.0)) throw io_error("'sigma' must be positive");
    if (cfg.n_max < 0) throw io_error("'n_max' must be nonnegative");
    if (cfg.replicates < 1) throw io_error("'replicates' must be at least 1");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw io_error("'alpha' must lie in (0,1)");
    if (!(cfg.interval_a >= 0.0 && cfg.interval_a < cfg.interval_b &&
          cfg.interval_b <= pi + 1e-12))
        throw io_error("'interval' must satisfy 0 <= a < b <= pi");
    if (cfg.grid_points < 2) throw io_error("'grid_points' must be at least 2");
    if (cfg.rl_iterations < 1) throw io_error("'rl_iterations' must be at least 1");
    if (cfg.psf_n_max < 0) throw io_error("'psf_n_max' must be nonnegative");
    if (cfg.kernel_m < 3) throw io_error("'kernel_m' must be at least 3");
    if (!(cfg.phantom_peak > 0.0)) throw io_error("'phantom_peak' must be positive");
    if (!(cfg.true_psf_exponent > 0.0))
        throw io_error("'true_psf_exponent' must be positive");
    for (const std::string& metric : cfg.metrics)
        if (metric != "L1" && metric != "L2")
            throw io_error("unknown metric '" + metric + "' (expected L1 or L2)");
    return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_experiment_config(buf.str());
}

namespace {

// Period-pi unwrap of an axis estimate around a reference angle.
double unwrap_axis(double beta_hat, double beta_ref) {
    return beta_ref + std::remainder(beta_hat - beta_ref, pi);
}

ContrastSpec contrast_spec_of(const ExperimentConfig& cfg, int n_max) {
    ContrastSpec spec;
    spec.n_max = n_max;
    spec.interval_a = cfg.interval_a;
    spec.interval_b = cfg.interval_b;
    spec.grid_points = cfg.grid_points;
    return spec;
}

}  // namespace

BetaDistributionResult run_beta_distribution(const ExperimentConfig& cfg) {
    const TargetId id = target_from_name(cfg.target);
    const ContrastSpec spec = contrast_spec_of(cfg, cfg.n_max);

    BetaDistributionResult result;

    // Reference axis and theoretical overlay from dense-quadrature moments.
    const MomentSet ms_ref =
        estimate_moments(eval_target(id, 1001), cfg.n_max, WeightScheme::midpoint);
    if (id == TargetId::f1)
        result.beta_ref = 0.0;
    else if (id == TargetId::f2)
        result.beta_ref = pi - 0.3;
    else
        result.beta_ref = minimize_contrast(ms_ref, spec);

    const ImageGrid base = eval_target(id, cfg.m);
    const ImageGrid scaled = snr_scale(base, cfg.snr, cfg.sigma);
    const double scale = cfg.snr * cfg.sigma / base.masked_max();
    const double curvature_unit = contrast_curvature(ms_ref, result.beta_ref);
    const double delta = 2.0 / cfg.m;
    result.asymptotic_sd = std::sqrt(8.0 * cfg.sigma * cfg.sigma * delta * delta /
                                     (scale * scale * curvature_unit));

    NoiseSpec noise;
    noise.kind = NoiseKind::gaussian;
    noise.sigma = cfg.sigma;
    result.samples.reserve(static_cast<std::size_t>(cfg.replicates));
    long double sum = 0.0L, sumsq = 0.0L;
    for (int r = 0; r < cfg.replicates; ++r) {
        noise.seed = CounterRng::mix(cfg.base_seed, static_cast<std::uint64_t>(r));
        const ImageGrid noisy = add_noise(scaled, noise);
        const MomentSet ms = estimate_moments(noisy, cfg.n_max, WeightScheme::midpoint);
        const double beta = unwrap_axis(minimize_contrast(ms, spec), result.beta_ref);
        result.samples.push_back(beta);
        sum += beta;
        sumsq += beta * beta;
        if (r == 0) {
            const int points = 1024;
            result.curve_beta.resize(points);
            result.curve_value.resize(points);
            for (int t = 0; t < points; ++t) {
                const double b =
                    cfg.interval_a + (cfg.interval_b - cfg.interval_a) * t / points;
                result.curve_beta[t] = b;
                result.curve_value[t] = contrast(ms, b);
            }
        }
    }
    const double n = static_cast<double>(cfg.replicates);
    result.empirical_mean = static_cast<double>(sum / n);
    if (cfg.replicates > 1) {
        const long double var =
            (sumsq - sum * sum / n) / (n - 1.0);
        result.empirical_sd = std::sqrt(std::max(0.0, static_cast<double>(var)));
    }
    return result;
}

CoverageResult run_ci_coverage(const ExperimentConfig& cfg) {
    const TargetId id = target_from_name(cfg.target);
    if (id == TargetId::f3)
        throw std::invalid_argument("coverage study requires a symmetric target");
    const double beta_star = (id == TargetId::f1) ? 0.0 : pi - 0.3;
    const ContrastSpec spec = contrast_spec_of(cfg, cfg.n_max);

    const ImageGrid scaled = snr_scale(eval_target(id, cfg.m), cfg.snr, cfg.sigma);
    NoiseSpec noise;
    noise.kind = NoiseKind::gaussian;
    noise.sigma = cfg.sigma;

    CoverageResult result;
    result.replicates = cfg.replicates;
    long double hw_sum = 0.0L, s2_sum = 0.0L;
    for (int r = 0; r < cfg.replicates; ++r) {
        noise.seed = CounterRng::mix(cfg.base_seed, static_cast<std::uint64_t>(r));
        const ImageGrid noisy = add_noise(scaled, noise);
        const SymmetryEstimate est = estimate_axis(noisy, spec, cfg.alpha,
                                                   WeightScheme::midpoint);
        bool covered = false;
        for (int k = -3; k <= 3 && !covered; ++k)
            covered = est.ci_low <= beta_star + k * pi && beta_star + k * pi <= est.ci_high;
        result.covered += covered;
        hw_sum += 0.5 * (est.ci_high - est.ci_low);
        s2_sum += est.sigma2_hat;
    }
    result.coverage = static_cast<double>(result.covered) / cfg.replicates;
    result.mean_halfwidth = static_cast<double>(hw_sum) / cfg.replicates;
    result.mean_sigma2 = static_cast<double>(s2_sum) / cfg.replicates;
    return result;
}

double sign_test_p(int wins, int trials) {
    if (trials <= 0) return 1.0;
    if (wins <= 0) return 1.0;
    if (wins > trials) return 0.0;
    long double acc = 0.0L;
    const long double log_half = std::log(0.5L);
    for (int k = wins; k <= trials; ++k) {
        const long double lc = std::lgamma(trials + 1.0L) - std::lgamma(k + 1.0L) -
                               std::lgamma(trials - k + 1.0L);
        acc += std::exp(lc + trials * log_half);
    }
    return std::min(1.0, static_cast<double>(acc));
}

PsfBenchmarkReport run_psf_benchmark(const ExperimentConfig& cfg) {
    const double fwhm_x_px = cfg.bead.fwhm_x / cfg.bead.pixel_size;
    const double fwhm_y_px = cfg.bead.fwhm_y / cfg.bead.pixel_size;
    const ImageGrid kernel_true =
        cfg.true_psf_exponent == 1.0
            ? gaussian_psf(cfg.kernel_m, fwhm_x_px, fwhm_y_px)
            : generalized_gaussian_psf(cfg.kernel_m, fwhm_x_px, fwhm_y_px,
                                       cfg.true_psf_exponent);

    // Fixed truth scene scaled so the convolved intensity peaks at
    // phantom_peak counts.
    const ImageGrid shape = make_phantom();
    ImageGrid lambda = convolve(shape, kernel_true);
    double peak = 0.0;
    for (double& v : lambda.values()) {
        if (v < 0.0) v = 0.0;
        peak = std::max(peak, v);
    }
    if (!(peak > 0.0)) throw numerical_error("phantom intensity vanished");
    const double scene_scale = cfg.phantom_peak / peak;
    for (double& v : lambda.values()) v *= scene_scale;
    ImageGrid truth = shape;
    for (double& v : truth.values()) v *= scene_scale;

    ContrastSpec axis_spec;
    axis_spec.n_max = cfg.psf_n_max;
    axis_spec.interval_a = 0.25 * pi;
    axis_spec.interval_b = 0.75 * pi;
    axis_spec.grid_points = cfg.grid_points;

    PsfBenchmarkReport report;
    report.records.reserve(static_cast<std::size_t>(cfg.replicates) * 4);
    std::array<long double, 4> l1_sum{}, l2_sum{};
    std::vector<std::array<double, 4>> rep_l1(cfg.replicates), rep_l2(cfg.replicates);

    for (int r = 0; r < cfg.replicates; ++r) {
        const std::uint64_t bead_seed = cfg.base_seed + 2 * static_cast<std::uint64_t>(r);
        const std::uint64_t scene_seed = cfg.base_seed + 2 * static_cast<std::uint64_t>(r) + 1;

        const ImageGrid bead_counts =
            cfg.noiseless ? bead_intensity(cfg.bead, kernel_true)
                          : simulate_bead_image(cfg.bead, kernel_true, bead_seed);

        const SymmetryEstimate axis = estimate_axis(
            anscombe(bead_counts), axis_spec, cfg.alpha, WeightScheme::midpoint);

        std::array<PsfModel, 4> models;
        models[0] = fit_parametric_psf(bead_counts, PsfKind::gaussian_mle);
        models[1] = fit_parametric_psf(bead_counts, PsfKind::power_gaussian_mle);
        models[2] = make_psf_model(PsfKind::raw_nonparametric, bead_counts);
        models[3] = make_psf_model(PsfKind::symmetrized_nonparametric,
                                   symmetrize(bead_counts, axis.beta_hat));

        ImageGrid observed;
        if (cfg.noiseless) {
            observed = lambda;
        } else {
            NoiseSpec noise;
            noise.kind = NoiseKind::poisson;
            noise.seed = scene_seed;
            observed = add_noise(lambda, noise);
        }
        const double data_mass = [&] {
            long double acc = 0.0L;
            for (double v : observed.values()) acc += v;
            return static_cast<double>(acc);
        }();

        for (int method = 0; method < 4; ++method) {
            const RlRun run =
                run_richardson_lucy(observed, models[method], cfg.rl_iterations, truth);
            PsfReplicateRecord rec;
            rec.replicate = r;
            rec.method = method;
            rec.l1 = run.l1;
            rec.best_k_l1 = run.best_k_l1;
            rec.l2 = run.l2;
            rec.best_k_l2 = run.best_k_l2;
            rec.beta_hat = axis.beta_hat;
            rec.min_iterate = run.stats.front().min_value;
            rec.mass_drift = 0.0;
            rec.loglik_monotone = true;
            for (std::size_t k = 0; k < run.stats.size(); ++k) {
                rec.min_iterate = std::min(rec.min_iterate, run.stats[k].min_value);
                rec.mass_drift = std::max(
                    rec.mass_drift, std::abs(run.stats[k].mass - data_mass) /
                                        std::max(data_mass, 1.0));
                if (k > 0 && run.stats[k].loglik <
                                 run.stats[k - 1].loglik -
                                     kLoglikSlack * std::abs(run.stats[k - 1].loglik))
                    rec.loglik_monotone = false;
            }
            report.records.push_back(rec);
            l1_sum[method] += run.l1;
            l2_sum[method] += run.l2;
            rep_l1[r][method] = run.l1;
            rep_l2[r][method] = run.l2;
        }
    }

    for (int method = 0; method < 4; ++method) {
        report.mean_l1[method] = static_cast<double>(l1_sum[method]) / cfg.replicates;
        report.mean_l2[method] = static_cast<double>(l2_sum[method]) / cfg.replicates;
    }

    const auto paired_p = [&](const std::vector<std::array<double, 4>>& rep, int a,
                              int b) {
        int wins = 0, trials = 0;
        for (int r = 0; r < cfg.replicates; ++r) {
            if (rep[r][a] == rep[r][b]) continue;
            ++trials;
            wins += rep[r][a] < rep[r][b];
        }
        return sign_test_p(wins, trials);
    };
    report.p_l1_gauss_lt_symm = paired_p(rep_l1, 0, 3);
    report.p_l1_symm_lt_power = paired_p(rep_l1, 3, 1);
    report.p_l1_symm_lt_raw = paired_p(rep_l1, 3, 2);
    report.p_l2_gauss_lt_symm = paired_p(rep_l2, 0, 3);
    report.p_l2_symm_lt_power = paired_p(rep_l2, 3, 1);
    report.p_l2_symm_lt_raw = paired_p(rep_l2, 3, 2);
    report.ordering_l1 = report.mean_l1[0] < report.mean_l1[3] &&
                         report.mean_l1[3] < std::min(report.mean_l1[1], report.mean_l1[2]);
    report.ordering_l2 = report.mean_l2[0] < report.mean_l2[3] &&
                         report.mean_l2[3] < std::min(report.mean_l2[1], report.mean_l2[2]);
    return report;
}

void write_beta_distribution_report(const BetaDistributionResult& result,
                                    const ExperimentConfig& cfg,
                                    const std::string& prefix) {
    json j;
    j["config"] = config_echo(cfg);
    j["beta_ref"] = result.beta_ref;
    j["empirical_mean"] = result.empirical_mean;
    j["empirical_sd"] = result.empirical_sd;
    j["asymptotic_sd"] = result.asymptotic_sd;
    j["samples"] = result.samples.size();
    {
        auto out = open_out(prefix + ".json");
        out << j.dump(2) << "\n";
    }
    {
        auto out = open_out(prefix + "_samples.csv");
        out << "beta_hat\n";
        for (double v : result.samples) out << format_full(v) << "\n";
    }
    {
        auto out = open_out(prefix + "_curve.csv");
        out << "beta,contrast\n";
        for (std::size_t t = 0; t < result.curve_beta.size(); ++t)
            out << format_full(result.curve_beta[t]) << ","
                << format_full(result.curve_value[t]) << "\n";
    }
    {
        // Gaussian kernel density over the sample range (Silverman rule).
        auto out = open_out(prefix + "_density.csv");
        out << "beta,density\n";
        const std::size_t n = result.samples.size();
        if (n > 1 && result.empirical_sd > 0.0) {
            const double h =
                1.06 * result.empirical_sd * std::pow(static_cast<double>(n), -0.2);
            const double lo = result.beta_ref - 4.0 * std::max(result.empirical_sd,
                                                               result.asymptotic_sd);
            const double hi = result.beta_ref + 4.0 * std::max(result.empirical_sd,
                                                               result.asymptotic_sd);
            const int points = 256;
            for (int t = 0; t < points; ++t) {
                const double x = lo + (hi - lo) * t / (points - 1);
                double acc = 0.0;
                for (double s : result.samples) {
                    const double z = (x - s) / h;
                    acc += std::exp(-0.5 * z * z);
                }
                acc /= n * h * std::sqrt(2.0 * pi);
                out << format_full(x) << "," << format_full(acc) << "\n";
            }
        }
    }
}

void write_coverage_report(const CoverageResult& result, const ExperimentConfig& cfg,
                           const std::string& prefix) {
    json j;
    j["config"] = config_echo(cfg);
    j["covered"] = result.covered;
    j["replicates"] = result.replicates;
    j["coverage"] = result.coverage;
    j["mean_halfwidth"] = result.mean_halfwidth;
    j["mean_sigma2"] = result.mean_sigma2;
    auto out = open_out(prefix + ".json");
    out << j.dump(2) << "\n";
}

void write_psf_benchmark_report(const PsfBenchmarkReport& report,
                                const ExperimentConfig& cfg,
                                const std::string& prefix) {
    json j;
    j["config"] = config_echo(cfg);
    for (int method = 0; method < 4; ++method) {
        j["mean_l1"][kPsfMethodNames[method]] = report.mean_l1[method];
        j["mean_l2"][kPsfMethodNames[method]] = report.mean_l2[method];
    }
    j["sign_tests"] = {{"l1_gaussian_lt_symmetrized", report.p_l1_gauss_lt_symm},
                       {"l1_symmetrized_lt_power", report.p_l1_symm_lt_power},
                       {"l1_symmetrized_lt_raw", report.p_l1_symm_lt_raw},
                       {"l2_gaussian_lt_symmetrized", report.p_l2_gauss_lt_symm},
                       {"l2_symmetrized_lt_power", report.p_l2_symm_lt_power},
                       {"l2_symmetrized_lt_raw", report.p_l2_symm_lt_raw}};
    j["ordering_l1"] = report.ordering_l1;
    j["ordering_l2"] = report.ordering_l2;
    j["replicates"] = cfg.replicates;
    {
        auto out = open_out(prefix + ".json");
        out << j.dump(2) << "\n";
    }
    {
        auto out = open_out(prefix + "_records.csv");
        out << "replicate,method,l1,best_k_l1,l2,best_k_l2,loglik_monotone,"
               "mass_drift,min_iterate,beta_hat\n";
        for (const PsfReplicateRecord& rec : report.records) {
            out << rec.replicate << "," << kPsfMethodNames[rec.method] << ","
                << format_full(rec.l1) << "," << rec.best_k_l1 << ","
                << format_full(rec.l2) << "," << rec.best_k_l2 << ","
                << (rec.loglik_monotone ? 1 : 0) << "," << format_full(rec.mass_drift)
                << "," << format_full(rec.min_iterate) << ","
                << format_full(rec.beta_hat) << "\n";
        }
    }
}

}  // namespace zsym
