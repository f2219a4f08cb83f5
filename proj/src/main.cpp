#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "zsym/experiments.hpp"
#include "zsym/grid.hpp"
#include "zsym/image_model.hpp"
#include "zsym/io.hpp"
#include "zsym/psf.hpp"
#include "zsym/symmetry.hpp"
#include "zsym/zernike.hpp"

namespace {

using nlohmann::json;
using std::numbers::pi;
using namespace zsym;

constexpr double kDegPerRad = 180.0 / pi;

struct AxisFlags {
    std::string input;
    int n_max = 7;
    std::string interval;  // "a:b" in radians
    double alpha = 0.05;
    std::string scheme = "midpoint";
    bool use_anscombe = false;
};

std::pair<double, double> parse_interval(const std::string& text) {
    if (text.empty()) return {0.0, pi};
    double a = 0.0, b = 0.0;
    char tail = '\0';
    if (std::sscanf(text.c_str(), "%lf:%lf%c", &a, &b, &tail) != 2)
        throw std::invalid_argument("--interval expects 'a:b' in radians, got '" +
                                    text + "'");
    if (!(a >= 0.0 && a < b && b <= pi + 1e-12))
        throw std::invalid_argument("--interval must satisfy 0 <= a < b <= pi");
    return {a, std::min(b, pi)};
}

WeightScheme parse_scheme(const std::string& name) {
    if (name == "midpoint") return WeightScheme::midpoint;
    if (name == "pixel_integrated") return WeightScheme::pixel_integrated;
    throw std::invalid_argument("--scheme must be midpoint or pixel_integrated");
}

void add_axis_flags(CLI::App* cmd, AxisFlags& flags) {
    cmd->add_option("--n-max", flags.n_max, "Zernike truncation order")
        ->check(CLI::NonNegativeNumber);
    cmd->add_option("--interval", flags.interval,
                    "search interval a:b in radians (default 0:pi)");
    cmd->add_option("--scheme", flags.scheme,
                    "quadrature weights: midpoint | pixel_integrated")
        ->check(CLI::IsMember({"midpoint", "pixel_integrated"}));
    cmd->add_flag("--anscombe", flags.use_anscombe,
                  "stabilize Poisson counts before estimating the axis");
}

SymmetryEstimate estimate_from_flags(const ImageGrid& image, const AxisFlags& flags) {
    const auto [a, b] = parse_interval(flags.interval);
    ContrastSpec spec;
    spec.n_max = flags.n_max;
    spec.interval_a = a;
    spec.interval_b = b;
    const ImageGrid* working = &image;
    ImageGrid transformed;
    if (flags.use_anscombe) {
        transformed = anscombe(image);
        working = &transformed;
    }
    return estimate_axis(*working, spec, flags.alpha, parse_scheme(flags.scheme));
}

double pixel_variance(const ImageGrid& image) {
    long double sum = 0.0L, sumsq = 0.0L;
    for (double v : image.values()) {
        sum += v;
        sumsq += v * v;
    }
    const double n = static_cast<double>(image.size());
    if (n < 2) return 0.0;
    return static_cast<double>((sumsq - sum * sum / n) / (n - 1.0));
}

int cmd_estimate_axis(const AxisFlags& flags, const std::string& curve_path,
                      const std::string& output_path) {
    const ImageGrid image = read_image(flags.input);
    const SymmetryEstimate est = estimate_from_flags(image, flags);

    json report;
    report["beta_hat"] = est.beta_hat;
    report["beta_hat_degrees"] = est.beta_hat * kDegPerRad;
    report["ci"] = {est.ci_low, est.ci_high};
    report["ci_degrees"] = {est.ci_low * kDegPerRad, est.ci_high * kDegPerRad};
    report["alpha"] = est.alpha;
    report["sigma2_hat"] = est.sigma2_hat;
    report["curvature"] = est.curvature;
    report["contrast_min"] = est.contrast_min;
    report["gcd_diagnostic"] = est.gcd_diagnostic;
    report["n_max"] = flags.n_max;
    report["anscombe"] = flags.use_anscombe;
    report["scheme"] = flags.scheme;
    const std::string text = report.dump(2);
    std::cout << text << "\n";
    if (!output_path.empty()) {
        std::ofstream out(output_path);
        if (!out) throw io_error("cannot open '" + output_path + "' for writing");
        out << text << "\n";
    }

    if (!curve_path.empty()) {
        const auto [a, b] = parse_interval(flags.interval);
        const ImageGrid* working = &image;
        ImageGrid transformed;
        if (flags.use_anscombe) {
            transformed = anscombe(image);
            working = &transformed;
        }
        const MomentSet ms =
            estimate_moments(*working, flags.n_max, parse_scheme(flags.scheme));
        std::ofstream out(curve_path);
        if (!out) throw io_error("cannot open '" + curve_path + "' for writing");
        out << "beta,contrast\n";
        const int points = 1024;
        char buf[80];
        for (int t = 0; t < points; ++t) {
            const double beta = a + (b - a) * t / points;
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", beta,
                          contrast(ms, beta));
            out << buf;
        }
    }
    return 0;
}

int cmd_symmetrize(const AxisFlags& flags, bool auto_axis, bool beta_given,
                   double beta, const std::string& output_path) {
    if (auto_axis == beta_given)
        throw std::invalid_argument("pass exactly one of --beta or --auto");
    const ImageGrid image = read_image(flags.input);
    if (auto_axis) beta = estimate_from_flags(image, flags).beta_hat;
    const ImageGrid averaged = symmetrize(image, beta);
    write_image(output_path, averaged);
    std::cerr << "axis beta = " << beta << " rad (" << beta * kDegPerRad
              << " deg)\n"
              << "input pixel variance  = " << pixel_variance(image) << "\n"
              << "output pixel variance = " << pixel_variance(averaged) << "\n";
    return 0;
}

int cmd_deconvolve(const std::string& data_path, const std::string& psf_path,
                   const std::string& output_path, int iters,
                   const std::string& truth_path) {
    const ImageGrid data = read_image(data_path);
    const ImageGrid kernel = read_image(psf_path);
    const PsfModel model = make_psf_model(PsfKind::raw_nonparametric, kernel);

    const bool have_truth = !truth_path.empty();
    ImageGrid truth;
    if (have_truth) {
        truth = read_image(truth_path);
        if (truth.m() != data.m())
            throw io_error("truth image is " + std::to_string(truth.m()) + "x" +
                           std::to_string(truth.m()) + " but the data is " +
                           std::to_string(data.m()) + "x" + std::to_string(data.m()));
    }

    ImageGrid best, last;
    double best_l1 = 0.0, best_l2 = 0.0;
    int best_k_l1 = 0, best_k_l2 = 0;
    richardson_lucy(data, model, iters, [&](int k, const ImageGrid& iterate) {
        if (have_truth) {
            long double acc1 = 0.0L, acc2 = 0.0L;
            for (std::size_t t = 0; t < iterate.size(); ++t) {
                const double d = iterate.values()[t] - truth.values()[t];
                acc1 += std::abs(d);
                acc2 += d * d;
            }
            const double d1 = static_cast<double>(acc1);
            const double d2 = static_cast<double>(acc2);
            if (k == 1 || d1 < best_l1) {
                best_l1 = d1;
                best_k_l1 = k;
            }
            if (k == 1 || d2 < best_l2) {
                best_l2 = d2;
                best_k_l2 = k;
                best = iterate;
            }
        }
        if (k == iters) last = iterate;
    });

    const ImageGrid& written = have_truth ? best : last;
    write_image(output_path, written);

    json report;
    report["iterations"] = iters;
    report["data_mass"] = data.sum();
    report["output_mass"] = written.sum();
    if (have_truth) {
        report["best_k_l1"] = best_k_l1;
        report["l1"] = best_l1;
        report["best_k_l2"] = best_k_l2;
        report["l2"] = best_l2;
        report["written_iterate"] = best_k_l2;
    } else {
        report["written_iterate"] = iters;
    }
    std::cout << report.dump(2) << "\n";
    return 0;
}

int cmd_experiment(const std::string& config_path, bool reps_given, int reps,
                   bool seed_given, std::uint64_t seed, const std::string& prefix_flag) {
    ExperimentConfig cfg = load_experiment_config(config_path);

    if (const char* env = std::getenv("SEED"); env && *env) {
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (errno != 0 || end == env || *end != '\0')
            throw std::invalid_argument(
                "SEED environment variable must be a nonnegative integer");
        cfg.base_seed = v;
    }
    if (seed_given) cfg.base_seed = seed;
    if (reps_given) {
        if (reps < 1) throw std::invalid_argument("--replicates must be at least 1");
        cfg.replicates = reps;
    }
    if (!prefix_flag.empty()) cfg.output_prefix = prefix_flag;
    const std::string prefix =
        cfg.output_prefix.empty() ? cfg.experiment : cfg.output_prefix;

    json summary;
    summary["experiment"] = cfg.experiment;
    summary["replicates"] = cfg.replicates;
    summary["base_seed"] = cfg.base_seed;
    if (cfg.experiment == "beta_distribution") {
        const BetaDistributionResult res = run_beta_distribution(cfg);
        write_beta_distribution_report(res, cfg, prefix);
        summary["beta_ref"] = res.beta_ref;
        summary["empirical_mean"] = res.empirical_mean;
        summary["empirical_sd"] = res.empirical_sd;
        summary["asymptotic_sd"] = res.asymptotic_sd;
        summary["outputs"] = {prefix + ".json", prefix + "_samples.csv",
                              prefix + "_curve.csv", prefix + "_density.csv"};
    } else if (cfg.experiment == "ci_coverage") {
        const CoverageResult res = run_ci_coverage(cfg);
        write_coverage_report(res, cfg, prefix);
        summary["coverage"] = res.coverage;
        summary["mean_halfwidth"] = res.mean_halfwidth;
        summary["outputs"] = {prefix + ".json"};
    } else {
        const PsfBenchmarkReport res = run_psf_benchmark(cfg);
        write_psf_benchmark_report(res, cfg, prefix);
        for (int method = 0; method < 4; ++method) {
            summary["mean_l1"][kPsfMethodNames[method]] = res.mean_l1[method];
            summary["mean_l2"][kPsfMethodNames[method]] = res.mean_l2[method];
        }
        summary["ordering_l1"] = res.ordering_l1;
        summary["ordering_l2"] = res.ordering_l2;
        summary["outputs"] = {prefix + ".json", prefix + "_records.csv"};
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Reflection-symmetry axis estimation on the unit disc and "
        "symmetry-aided PSF calibration for deconvolution"};
    app.require_subcommand(1);

    AxisFlags axis_flags;
    std::string curve_path, axis_output;
    CLI::App* est = app.add_subcommand(
        "estimate-axis", "estimate the reflection-symmetry axis of an image");
    est->add_option("input", axis_flags.input, "square image (.csv or .pgm)")
        ->required();
    add_axis_flags(est, axis_flags);
    est->add_option("--alpha", axis_flags.alpha, "confidence level parameter")
        ->check(CLI::Range(1e-9, 1.0 - 1e-9));
    est->add_option("--curve", curve_path, "write the contrast curve to this CSV");
    est->add_option("--output", axis_output, "also write the JSON report here");

    AxisFlags sym_flags;
    std::string sym_output;
    double sym_beta = 0.0;
    bool sym_auto = false;
    CLI::App* sym = app.add_subcommand(
        "symmetrize", "average an image over its reflection group");
    sym->add_option("input", sym_flags.input, "square image (.csv or .pgm)")
        ->required();
    sym->add_option("output", sym_output, "destination image (.csv or .pgm)")
        ->required();
    CLI::Option* beta_opt =
        sym->add_option("--beta", sym_beta, "axis angle in radians, in [0, pi)");
    CLI::Option* auto_opt =
        sym->add_flag("--auto", sym_auto, "estimate the axis first, then average");
    beta_opt->excludes(auto_opt);
    add_axis_flags(sym, sym_flags);

    std::string dec_data, dec_psf, dec_output, dec_truth;
    int dec_iters = 500;
    CLI::App* dec = app.add_subcommand(
        "deconvolve", "Richardson-Lucy deconvolution with a PSF image");
    dec->add_option("data", dec_data, "observed image (.csv or .pgm)")->required();
    dec->add_option("psf", dec_psf, "PSF kernel image (.csv or .pgm)")->required();
    dec->add_option("output", dec_output, "destination image (.csv or .pgm)")
        ->required();
    dec->add_option("--iters", dec_iters, "iteration count")
        ->check(CLI::PositiveNumber);
    dec->add_option("--truth", dec_truth,
                    "reference image; reports optimal L1/L2 iterates and writes "
                    "the best-L2 iterate instead of the final one");

    std::string exp_config, exp_prefix;
    int exp_reps = 0;
    std::uint64_t exp_seed = 0;
    CLI::App* exp = app.add_subcommand(
        "experiment", "run a Monte Carlo study described by a JSON config");
    exp->add_option("config", exp_config, "experiment config (.json)")->required();
    CLI::Option* reps_opt = exp->add_option(
        "--replicates", exp_reps, "override the configured replicate count");
    CLI::Option* seed_opt = exp->add_option(
        "--base-seed", exp_seed,
        "override the configured base seed (also overrides the SEED env var)");
    exp->add_option("--output-prefix", exp_prefix,
                    "override the configured report prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (est->parsed()) return cmd_estimate_axis(axis_flags, curve_path, axis_output);
        if (sym->parsed())
            return cmd_symmetrize(sym_flags, sym_auto, beta_opt->count() > 0,
                                  sym_beta, sym_output);
        if (dec->parsed())
            return cmd_deconvolve(dec_data, dec_psf, dec_output, dec_iters, dec_truth);
        return cmd_experiment(exp_config, reps_opt->count() > 0, exp_reps,
                              seed_opt->count() > 0, exp_seed, exp_prefix);
    } catch (const io_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
