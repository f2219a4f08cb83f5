#include "zsym/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace zsym {

namespace {

inline std::uint64_t splitmix_fin(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

}  // namespace

std::uint64_t CounterRng::mix(std::uint64_t a, std::uint64_t b) {
    return splitmix_fin(splitmix_fin(a) ^ (b * 0xD1342543DE82EF95ULL + 1));
}

std::uint64_t CounterRng::next_u64() {
    std::uint64_t z = splitmix_fin(seed_);
    z = splitmix_fin(z ^ (stream_ * 0xD1342543DE82EF95ULL + 1));
    z = splitmix_fin(z ^ (counter_ * 0x2545F4914F6CDD1DULL + 1));
    ++counter_;
    return z;
}

double CounterRng::next_unit() {
    // 53-bit mantissa, offset by half an ulp so the value is never 0 or 1.
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    return normal_quantile(next_unit());
}

long long CounterRng::next_poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("CounterRng: Poisson mean must be finite and nonnegative");
    long long total = 0;
    // Split the mean into chunks small enough that exp(-chunk) is well away
    // from underflow; the chunk sums are again Poisson by additivity.
    double remaining = mean;
    while (remaining > 0.0) {
        const double chunk = remaining > 16.0 ? 16.0 : remaining;
        remaining -= chunk;
        if (remaining < 1e-14) remaining = 0.0;
        const double threshold = std::exp(-chunk);
        double prod = 1.0;
        long long k = -1;
        do {
            prod *= next_unit();
            ++k;
        } while (prod > threshold);
        total += k;
    }
    return total;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must lie in (0,1)");

    // Acklam's rational approximation.
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log1p(-p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Newton step: Phi(x) via erfc, density in closed form.
    const double inv_sqrt2 = 0.7071067811865475244;
    const double inv_sqrt2pi = 0.3989422804014326779;
    const double cdf = 0.5 * std::erfc(-x * inv_sqrt2);
    const double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
    if (pdf > 0.0) x -= (cdf - p) / pdf;
    return x;
}

}  // namespace zsym
