#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "zsym/grid.hpp"

namespace zsym {

// PSF estimation models. Parametric kinds fit a centered elliptical intensity
// by Poisson maximum likelihood; nonparametric kinds wrap (possibly
// symmetry-averaged) raw count data.
enum class PsfKind {
    gaussian_mle,
    power_gaussian_mle,
    raw_nonparametric,
    symmetrized_nonparametric,
};

enum class DistanceMetric { L1, L2 };

// A point-spread-function model: a nonnegative kernel normalized to unit sum.
// For parametric kinds, params = {Sxx, Sxy, Syy, amplitude, loglik} where S
// is the fitted covariance (pixel^2 units) and loglik the maximized Poisson
// log-likelihood (without the factorial term). Empty for nonparametric kinds.
struct PsfModel {
    PsfKind kind = PsfKind::raw_nonparametric;
    ImageGrid kernel;
    std::vector<double> params;
};

// Physical description of a bead-imaging experiment. Lengths in nm,
// intensity in expected photon counts at the brightest pixel.
struct BeadSpec {
    double fwhm_x = 250.0 / 1.4142135623730951;
    double fwhm_y = 250.0;
    double bead_diameter = 50.0;
    double peak_intensity = 22.0;
    double pixel_size = 8200.0 / 128.0;
};

// Per-iterate diagnostics of a Richardson-Lucy run.
struct RlStats {
    double loglik = 0.0;     // Poisson log-likelihood of the iterate
    double mass = 0.0;       // total of the iterate
    double min_value = 0.0;  // smallest pixel value
};

// Streaming Richardson-Lucy result: oracle-best distances to a known truth
// plus per-iterate diagnostics (stats[k-1] describes iterate k).
struct RlRun {
    int best_k_l1 = 0;
    double l1 = 0.0;
    int best_k_l2 = 0;
    double l2 = 0.0;
    std::vector<RlStats> stats;
};

// FWHM -> standard deviation for a Gaussian profile.
double fwhm_to_sigma(double fwhm);

// Smallest integer >= n whose prime factors are all in {2, 3, 5}.
int next_smooth_size(int n);

// FFT-backed linear convolution with zero-extended boundaries. The kernel is
// fixed at construction (its spectrum is cached); forward applies k * x,
// adjoint applies the flipped kernel. Input and output are image_m x image_m;
// the kernel is treated as centered on its middle pixel. Not thread-safe
// (shared transform buffers).
class FftConvolver {
  public:
    FftConvolver(int image_m, const ImageGrid& kernel);
    ~FftConvolver();
    FftConvolver(const FftConvolver&) = delete;
    FftConvolver& operator=(const FftConvolver&) = delete;

    int image_m() const;
    int pad() const;

    ImageGrid forward(const ImageGrid& x) const;
    ImageGrid adjoint(const ImageGrid& x) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// One-shot convenience wrapper around FftConvolver.
ImageGrid convolve(const ImageGrid& image, const ImageGrid& kernel);

// Discretized centered bivariate Gaussian kernel, unit sum. Widths are FWHMs
// in pixel units; angle rotates the principal axes (radians, 0 = axis
// aligned). Axis-aligned kernels use exact per-pixel integrals.
ImageGrid gaussian_psf(int m, double fwhm_x, double fwhm_y, double angle = 0.0);

// Discretized centered generalized-Gaussian kernel exp(-0.5 * q^exponent)
// with q the axis-aligned Mahalanobis quadratic form, unit sum. Widths are
// FWHMs in pixel units (exact for any exponent); exponent = 1 recovers the
// Gaussian shape, exponent > 1 gives lighter tails and a flatter core.
ImageGrid generalized_gaussian_psf(int m, double fwhm_x, double fwhm_y,
                                   double exponent);

// Validate and normalize a raw kernel into a PsfModel (unit sum).
PsfModel make_psf_model(PsfKind kind, const ImageGrid& raw_kernel);

// Noise-free expected bead image: the bead disc (rasterized with 16x16
// subpixel supersampling) convolved with the kernel and scaled so the
// brightest pixel equals peak_intensity.
ImageGrid bead_intensity(const BeadSpec& spec, const ImageGrid& kernel);

// Poisson observation of bead_intensity, seeded and reproducible.
ImageGrid simulate_bead_image(const BeadSpec& spec, const ImageGrid& kernel,
                              std::uint64_t seed);

// Poisson maximum-likelihood fit of a centered elliptical intensity
// A*exp(-q/2) (gaussian_mle) or A*exp(-q^0.95/2) (power_gaussian_mle),
// q = u' P u with P parametrized by its Cholesky factor; amplitude profiled
// out. Derivative-free simplex search from a moment-matched start.
PsfModel fit_parametric_psf(const ImageGrid& data, PsfKind kind);

// Average the image over the reflection group {id, reflect(beta1),
// reflect(beta1 + pi/2), rotate(pi)} about the grid center. Samples are
// bilinearly interpolated; group members whose pre-image leaves the pixel
// hull are dropped from that pixel's average. beta1 in [0, pi).
ImageGrid symmetrize(const ImageGrid& image, double beta1);

// Richardson-Lucy deconvolution. Starts from a constant image with the
// data's total mass; iterate k is passed to on_iterate for k = 1..max_iter.
void richardson_lucy(const ImageGrid& data, const PsfModel& psf, int max_iter,
                     const std::function<void(int, const ImageGrid&)>& on_iterate);

// Convenience overload collecting all iterates.
std::vector<ImageGrid> richardson_lucy(const ImageGrid& data, const PsfModel& psf,
                                       int max_iter);

// Streaming run that tracks the best L1/L2 distances to a known truth and
// per-iterate diagnostics without retaining iterates.
RlRun run_richardson_lucy(const ImageGrid& data, const PsfModel& psf, int max_iter,
                          const ImageGrid& truth);

// Minimum distance between any iterate and the truth; returns (k, distance)
// with k the 1-based iterate index. L1 = sum |d|, L2 = sum d^2 (pixel sums).
std::pair<int, double> optimal_iterate_distance(const std::vector<ImageGrid>& iterates,
                                                const ImageGrid& truth,
                                                DistanceMetric metric);

// Deterministic 128x128 cell-like test image (elliptical body, bright
// annulus, three interior blobs; asymmetric), peak value 1, zero outside
// [20, 107]^2 so convolved versions stay interior-supported.
ImageGrid make_phantom();

}  // namespace zsym
