#pragma once

#include <cstdint>

namespace zsym {

/// Quantile of the standard normal distribution, Phi^{-1}(p) for p in (0,1).
/// Acklam's rational approximation polished with one Newton step on erfc;
/// absolute error is at the last-few-ulp level over the full open interval.
double normal_quantile(double p);

/// Counter-based random stream: every draw is a pure function of
/// (seed, stream, counter), so replicates and pixels can own disjoint
/// streams and results do not depend on evaluation order or thread count.
/// The mixing function is the SplitMix64 finalizer applied to the chained
/// words; uniforms take 53 bits, normals use the inverse CDF, and Poisson
/// draws use Knuth's multiplicative method on mean-chunks of at most 16
/// (exact by Poisson additivity).
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64();

    /// Uniform in the open interval (0,1).
    double next_unit();

    /// Standard normal draw.
    double next_normal();

    /// Poisson draw with the given nonnegative mean.
    long long next_poisson(double mean);

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

}  // namespace zsym
