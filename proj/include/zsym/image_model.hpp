#pragma once

#include <cstdint>
#include <functional>

#include "zsym/grid.hpp"

namespace zsym {

// Built-in test targets on the unit disc, each normalized so the squared
// function integrates to one over the disc. f1 and f2 are reflection
// symmetric (axes 0 and pi - 0.3); f3 is not.
enum class TargetId { f1, f2, f3 };

enum class NoiseKind { gaussian, poisson };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::gaussian;
    double sigma = 1.0;          // gaussian only
    std::uint64_t seed = 0;
};

// Normalization constant c_id (cached; dense midpoint quadrature at m=1001,
// rounded to six significant digits).
double target_normalization(TargetId id);

// Normalized target value at a point of the closed disc; defined by the same
// formula slightly outside it (callers mask).
double target_value(TargetId id, double x, double y);

// Sample a target (or an arbitrary function) at the masked pixel centers of
// an m-by-m grid; off-disc pixels are zero.
ImageGrid eval_target(TargetId id, int m);
ImageGrid eval_custom(const std::function<double(double, double)>& f, int m);

// Multiply so that the masked peak equals snr * sigma. Throws
// numerical_error when the image has no positive peak.
ImageGrid snr_scale(const ImageGrid& image, double snr, double sigma);

// Gaussian: Z = f + sigma * eps. Poisson: Z ~ Poisson(f) (throws
// numerical_error on negative intensities). Each pixel draws from its own
// counter-based stream keyed by (seed, flat index), so results are identical
// across runs and thread counts.
ImageGrid add_noise(const ImageGrid& image, const NoiseSpec& spec);

// Variance-stabilizing transform 2*sqrt(x + 3/8), applied pixelwise.
// Throws numerical_error on negative input.
ImageGrid anscombe(const ImageGrid& image);

}  // namespace zsym
