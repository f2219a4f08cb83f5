#include "zsym/image_model.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "zsym/rng.hpp"

namespace zsym {

namespace {

double f1_raw(double x, double y) {
    const double rho = std::hypot(x, y);
    const double s = std::sqrt(x * x + y * y * y * y);
    return x * (1.0 - rho) * (std::sin(y + s) + std::sin(-y + s));
}

double f2_raw(double x, double y) {
    const double rho = std::hypot(x, y);
    const double th = (rho == 0.0) ? 0.0 : std::atan2(y, x);
    const double inv = 1.0 / 0.02;
    return rho * (1.0 - rho) *
           (std::exp(std::cos(th) * inv) + std::exp(std::cos(th + 0.6) * inv) +
            std::exp(std::cos(th - 0.3 + std::acos(-1.0)) * inv) +
            std::exp(std::cos(th + 0.9 + std::acos(-1.0)) * inv));
}

double f3_raw(double x, double y) {
    const double rho = std::hypot(x, y);
    const double th = (rho == 0.0) ? 0.0 : std::atan2(y, x);
    const double inv = 1.0 / 0.2;
    return rho * (1.0 - rho) *
           (std::exp(std::cos(th) * inv) + std::exp(std::cos(th + 0.9) * inv) +
            0.6 * std::exp(std::cos(th - 1.7) * inv));
}

double raw_value(TargetId id, double x, double y) {
    switch (id) {
        case TargetId::f1: return f1_raw(x, y);
        case TargetId::f2: return f2_raw(x, y);
        case TargetId::f3: return f3_raw(x, y);
    }
    throw std::invalid_argument("unknown target id");
}

double round_six_significant(double v) {
    if (v == 0.0) return 0.0;
    const double k = std::floor(std::log10(std::abs(v)));
    const double scale = std::pow(10.0, 5.0 - k);
    return std::round(v * scale) / scale;
}

double compute_normalization(TargetId id) {
    const int m = 1001;
    const ImageGrid geom(m);
    const double d2 = geom.delta() * geom.delta();
    double acc = 0.0;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (!geom.inside(i, j)) continue;
            const double v = raw_value(id, geom.x(i), geom.y(j));
            acc += v * v;
        }
    }
    return round_six_significant(1.0 / std::sqrt(acc * d2));
}

}  // namespace

double target_normalization(TargetId id) {
    static const std::array<double, 3> cache = {
        compute_normalization(TargetId::f1),
        compute_normalization(TargetId::f2),
        compute_normalization(TargetId::f3),
    };
    return cache[static_cast<std::size_t>(id)];
}

double target_value(TargetId id, double x, double y) {
    return target_normalization(id) * raw_value(id, x, y);
}

ImageGrid eval_custom(const std::function<double(double, double)>& f, int m) {
    ImageGrid g(m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < m; ++i)
            if (g.inside(i, j)) g.at(i, j) = f(g.x(i), g.y(j));
    return g;
}

ImageGrid eval_target(TargetId id, int m) {
    const double c = target_normalization(id);
    return eval_custom([&](double x, double y) { return c * raw_value(id, x, y); }, m);
}

ImageGrid snr_scale(const ImageGrid& image, double snr, double sigma) {
    if (!(snr > 0.0) || !(sigma > 0.0))
        throw std::invalid_argument("snr_scale: snr and sigma must be positive");
    const double peak = image.masked_max();
    if (!(peak > 0.0)) throw numerical_error("snr_scale: image has no positive peak");
    const double factor = snr * sigma / peak;
    ImageGrid out = image;
    for (double& v : out.values()) v *= factor;
    return out;
}

ImageGrid add_noise(const ImageGrid& image, const NoiseSpec& spec) {
    const int m = image.m();
    ImageGrid out = image;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            CounterRng rng(spec.seed, static_cast<std::uint64_t>(j) * m + i);
            if (spec.kind == NoiseKind::gaussian) {
                out.at(i, j) = image.at(i, j) + spec.sigma * rng.next_normal();
            } else {
                const double mean = image.at(i, j);
                if (mean < 0.0)
                    throw numerical_error("add_noise: poisson requires nonnegative intensities");
                out.at(i, j) = static_cast<double>(rng.next_poisson(mean));
            }
        }
    }
    return out;
}

ImageGrid anscombe(const ImageGrid& image) {
    ImageGrid out = image;
    for (double& v : out.values()) {
        if (v < 0.0) throw numerical_error("anscombe: input must be nonnegative");
        v = 2.0 * std::sqrt(v + 0.375);
    }
    return out;
}

}  // namespace zsym
