#include "zsym/symmetry.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "zsym/rng.hpp"

namespace zsym {

namespace {

constexpr double kPi = std::numbers::pi;

void validate_spec(const ContrastSpec& spec) {
    if (spec.n_max < 0) throw std::invalid_argument("contrast spec: n_max must be >= 0");
    if (spec.grid_points < 2) throw std::invalid_argument("contrast spec: grid_points must be >= 2");
    if (!(spec.interval_a >= 0.0 && spec.interval_a < spec.interval_b &&
          spec.interval_b <= kPi + 1e-12))
        throw std::invalid_argument("contrast spec: interval must satisfy 0 <= a < b <= pi");
}

double total_power(const MomentSet& ms) {
    double tot = 0.0;
    for (const auto& c : ms.coefficients()) tot += std::norm(c);
    return tot;
}

}  // namespace

MomentSet reflect_moments(const MomentSet& ms, double beta) {
    MomentSet out(ms.n_max(), ms.delta(), ms.scheme());
    for (const auto& ix : ms.indices()) {
        const auto phase = std::polar(1.0, -2.0 * ix.q * beta);
        out.set(ix.p, ix.q, phase * ms.at(ix.p, -ix.q));
    }
    return out;
}

double contrast(const MomentSet& ms, double beta) {
    double tot = 0.0;
    for (const auto& ix : ms.indices()) {
        if (ix.q <= 0) continue;
        const auto a = ms.at(ix.p, ix.q);
        const double r2 = std::norm(a);
        if (r2 == 0.0) continue;
        // 4|A|^2 (1 - cos(2r + 2q beta)) written without the explicit phase.
        const auto rot = a * a * std::polar(1.0, 2.0 * ix.q * beta);
        tot += 4.0 * (r2 - rot.real()) / norm_np(ix.p);
    }
    return std::max(tot, 0.0);
}

double contrast_direct(const MomentSet& ms, double beta) {
    double tot = 0.0;
    for (const auto& ix : ms.indices()) {
        const auto diff =
            ms.at(ix.p, ix.q) - std::polar(1.0, -2.0 * ix.q * beta) * ms.at(ix.p, -ix.q);
        tot += std::norm(diff) / norm_np(ix.p);
    }
    return tot;
}

double contrast_derivative(const MomentSet& ms, double beta) {
    double tot = 0.0;
    for (const auto& ix : ms.indices()) {
        if (ix.q <= 0) continue;
        const auto a = ms.at(ix.p, ix.q);
        const auto rot = a * a * std::polar(1.0, 2.0 * ix.q * beta);
        tot += 8.0 * ix.q * rot.imag() / norm_np(ix.p);
    }
    return tot;
}

double contrast_curvature(const MomentSet& ms, double beta) {
    double tot = 0.0;
    for (const auto& ix : ms.indices()) {
        if (ix.q <= 0) continue;
        const auto a = ms.at(ix.p, ix.q);
        const auto rot = a * a * std::polar(1.0, 2.0 * ix.q * beta);
        tot += 16.0 * ix.q * ix.q * rot.real() / norm_np(ix.p);
    }
    return tot;
}

double contrast_curvature_plugin(const MomentSet& ms) {
    double tot = 0.0;
    for (const auto& ix : ms.indices()) {
        if (ix.q <= 0) continue;
        tot += 16.0 * ix.q * ix.q * std::norm(ms.at(ix.p, ix.q)) / norm_np(ix.p);
    }
    return tot;
}

double minimize_contrast(const MomentSet& ms, const ContrastSpec& spec) {
    validate_spec(spec);
    if (total_power(ms) == 0.0) throw numerical_error("degenerate contrast: all moments are zero");

    const double a = spec.interval_a;
    const double b = spec.interval_b;
    const int t_count = spec.grid_points;
    const double h = (b - a) / t_count;

    // Coarse scan; strict comparison keeps the smallest angle on ties.
    double best_beta = a;
    double best_val = contrast(ms, a);
    for (int t = 1; t < t_count; ++t) {
        const double beta = a + t * h;
        const double val = contrast(ms, beta);
        if (val < best_val) {
            best_val = val;
            best_beta = beta;
        }
    }

    // Safeguarded Newton refinement inside the bracketing cell.
    double x = best_beta;
    for (int it = 0; it < 50; ++it) {
        const double d2 = contrast_curvature(ms, x);
        if (d2 <= 0.0) break;
        double step = contrast_derivative(ms, x) / d2;
        step = std::clamp(step, -h, h);
        x -= step;
        if (std::abs(step) < 1e-12) break;
    }
    if (contrast(ms, x) > best_val) x = best_beta;

    const bool full_period = std::abs((b - a) - kPi) < 1e-12;
    if (full_period) {
        while (x < a) x += kPi;
        while (x >= b) x -= kPi;
    } else {
        x = std::clamp(x, a, std::nextafter(b, a));
    }
    return x;
}

double default_gcd_threshold(const MomentSet& ms) {
    std::vector<double> mags;
    for (const auto& ix : ms.indices())
        if (ix.q > 0) mags.push_back(std::abs(ms.at(ix.p, ix.q)));
    if (mags.empty()) throw numerical_error("no angular information: no q > 0 moments stored");
    std::sort(mags.begin(), mags.end());
    const std::size_t n = mags.size();
    const double median = (n % 2 == 1) ? mags[n / 2] : 0.5 * (mags[n / 2 - 1] + mags[n / 2]);
    return 0.5 * median;
}

int gcd_identifiability(const MomentSet& ms, double threshold) {
    if (threshold < 0.0) throw std::invalid_argument("gcd threshold must be >= 0");
    int g = 0;
    for (const auto& ix : ms.indices()) {
        if (ix.q <= 0) continue;
        if (std::abs(ms.at(ix.p, ix.q)) > threshold) g = std::gcd(g, ix.q);
    }
    if (g == 0) throw numerical_error("no angular information: no q > 0 moment above threshold");
    return g;
}

double estimate_noise_variance(const ImageGrid& grid) {
    const int m = grid.m();
    double acc = 0.0;
    std::size_t count = 0;
    for (int j = 0; j + 1 < m; ++j) {
        for (int i = 0; i + 1 < m; ++i) {
            if (!grid.inside(i, j) || !grid.inside(i + 1, j) || !grid.inside(i, j + 1)) continue;
            const double dr = grid.at(i, j) - grid.at(i + 1, j);
            const double du = grid.at(i, j) - grid.at(i, j + 1);
            acc += 0.25 * (dr * dr + du * du);
            ++count;
        }
    }
    if (count == 0)
        throw numerical_error("noise variance: no pixel with right and upper neighbors inside");
    return acc / static_cast<double>(count);
}

std::pair<double, double> confidence_interval(double beta_hat, double sigma_hat, double delta,
                                              double curvature, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("confidence_interval: alpha must lie in (0,1)");
    if (sigma_hat < 0.0)
        throw std::invalid_argument("confidence_interval: sigma_hat must be >= 0");
    if (curvature <= 0.0)
        throw numerical_error("flat contrast: curvature must be positive for an interval");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double halfwidth =
        z * 2.0 * std::numbers::sqrt2 * sigma_hat * delta / std::sqrt(curvature);
    return {beta_hat - halfwidth, beta_hat + halfwidth};
}

SymmetryEstimate estimate_axis(const ImageGrid& grid, const ContrastSpec& spec, double alpha,
                               WeightScheme scheme) {
    validate_spec(spec);
    const MomentSet ms = estimate_moments(grid, spec.n_max, scheme);

    const int g = gcd_identifiability(ms, default_gcd_threshold(ms));
    ContrastSpec search = spec;
    const bool full_period = std::abs((spec.interval_b - spec.interval_a) - kPi) < 1e-12;
    if (g > 1 && full_period)
        search.interval_b = search.interval_a + (spec.interval_b - spec.interval_a) / g;

    SymmetryEstimate est;
    est.gcd_diagnostic = g;
    est.alpha = alpha;
    est.beta_hat = minimize_contrast(ms, search);
    est.contrast_min = contrast(ms, est.beta_hat);
    est.sigma2_hat = estimate_noise_variance(grid);
    est.curvature = contrast_curvature(ms, est.beta_hat);
    const auto ci = confidence_interval(est.beta_hat, std::sqrt(est.sigma2_hat), grid.delta(),
                                        est.curvature, alpha);
    est.ci_low = ci.first;
    est.ci_high = ci.second;
    return est;
}

}  // namespace zsym
