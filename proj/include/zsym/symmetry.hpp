#pragma once

#include <utility>

#include "zsym/grid.hpp"
#include "zsym/zernike.hpp"

namespace zsym {

// Search configuration for the axis estimate. The interval is half-open
// [a, b) and must satisfy 0 <= a < b <= pi.
struct ContrastSpec {
    int n_max = 7;
    double interval_a = 0.0;
    double interval_b = 3.14159265358979323846;
    int grid_points = 4096;
};

struct SymmetryEstimate {
    double beta_hat = 0.0;      // minimizer of the empirical contrast, radians
    double sigma2_hat = 0.0;    // difference-based noise variance estimate
    double curvature = 0.0;     // second derivative of the contrast at beta_hat
    double ci_low = 0.0;
    double ci_high = 0.0;
    double alpha = 0.0;         // nominal level parameter of the interval
    double contrast_min = 0.0;  // contrast value at beta_hat
    int gcd_diagnostic = 1;     // gcd of angular frequencies carrying signal
};

// Moment set of the image reflected about the line at angle beta:
// B_pq = e^{-2iq beta} A_{p,-q}. Applying twice with the same beta is the
// identity.
MomentSet reflect_moments(const MomentSet& ms, double beta);

// Empirical contrast: squared L2 distance between the image and its
// reflection, expressed through the moments. `contrast` uses the closed
// cosine form over q > 0; `contrast_direct` accumulates the defining sum
// over all stored indices. The two agree to roundoff.
double contrast(const MomentSet& ms, double beta);
double contrast_direct(const MomentSet& ms, double beta);

// Analytic derivatives of the cosine form in beta.
double contrast_derivative(const MomentSet& ms, double beta);
double contrast_curvature(const MomentSet& ms, double beta);

// Curvature surrogate that drops the cosine factor (its value at an exact
// symmetry axis): sum over q>0 of 16 q^2 |A_pq|^2 / n_p.
double contrast_curvature_plugin(const MomentSet& ms);

// Global minimizer of the contrast over spec's interval: coarse scan on
// grid_points equispaced angles (ties -> smallest), then safeguarded Newton
// refinement to 1e-12. Throws numerical_error("degenerate contrast") when
// every stored moment is zero.
double minimize_contrast(const MomentSet& ms, const ContrastSpec& spec);

// gcd of all angular frequencies q > 0 whose moment magnitude exceeds the
// threshold; 1 means the axis is uniquely identified on [0, pi). Throws
// numerical_error("no angular information") if nothing exceeds it.
int gcd_identifiability(const MomentSet& ms, double threshold);

// Default threshold: half the median of |A_pq| over admissible q > 0.
double default_gcd_threshold(const MomentSet& ms);

// Difference-based noise variance: mean over pixels whose right and upper
// neighbors are inside the disc of (1/4)[(Z-Z_right)^2 + (Z-Z_up)^2].
double estimate_noise_variance(const ImageGrid& grid);

// Two-sided asymptotic interval: halfwidth z * 2*sqrt(2)*sigma_hat*delta /
// sqrt(curvature) with z the standard-normal 1-alpha/2 quantile. Throws
// numerical_error("flat contrast") when curvature <= 0.
std::pair<double, double> confidence_interval(double beta_hat, double sigma_hat, double delta,
                                              double curvature, double alpha);

// Full pipeline: moments -> identifiability diagnostic (shrinking a
// full-period interval to [a, a + pi/gcd) when gcd > 1) -> minimizer ->
// noise variance -> curvature at the minimizer -> confidence interval.
SymmetryEstimate estimate_axis(const ImageGrid& grid, const ContrastSpec& spec, double alpha,
                               WeightScheme scheme);

}  // namespace zsym
