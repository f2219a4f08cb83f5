#include "zsym/psf.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>

#include "zsym/image_model.hpp"

namespace zsym {

namespace {

constexpr double kGaussNode[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
constexpr double kGaussWeight[4] = {0.3478548451374538, 0.6521451548625461,
                                    0.6521451548625461, 0.3478548451374538};

constexpr double kRlFloor = 1e-12;

double grid_sum(const ImageGrid& g) {
    long double acc = 0.0L;
    for (double v : g.values()) acc += v;
    return static_cast<double>(acc);
}

void require_nonnegative(const ImageGrid& g, const char* what) {
    for (double v : g.values())
        if (v < 0.0) throw numerical_error(std::string(what) + " must be nonnegative");
}

}  // namespace

double fwhm_to_sigma(double fwhm) {
    return fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

int next_smooth_size(int n) {
    if (n < 1) throw std::invalid_argument("size must be positive");
    for (int s = n;; ++s) {
        int t = s;
        while (t % 2 == 0) t /= 2;
        while (t % 3 == 0) t /= 3;
        while (t % 5 == 0) t /= 5;
        if (t == 1) return s;
    }
}

struct FftConvolver::Impl {
    int m = 0;
    int pad = 0;
    int nfreq = 0;
    double* real = nullptr;
    fftw_complex* freq = nullptr;
    fftw_complex* kernel_hat = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    ~Impl() {
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        if (real) fftw_free(real);
        if (freq) fftw_free(freq);
        if (kernel_hat) fftw_free(kernel_hat);
    }

    ImageGrid apply(const ImageGrid& x, bool adjoint) {
        if (x.m() != m) throw std::invalid_argument("image size does not match convolver");
        std::fill(real, real + static_cast<std::size_t>(pad) * pad, 0.0);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                real[static_cast<std::size_t>(j) * pad + i] = x.at(i, j);
        fftw_execute(fwd);
        for (int n = 0; n < nfreq; ++n) {
            const double a = freq[n][0];
            const double b = freq[n][1];
            const double c = kernel_hat[n][0];
            const double d = adjoint ? -kernel_hat[n][1] : kernel_hat[n][1];
            freq[n][0] = a * c - b * d;
            freq[n][1] = a * d + b * c;
        }
        fftw_execute(bwd);
        ImageGrid out(m);
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i)
                out.at(i, j) = real[static_cast<std::size_t>(j) * pad + i];
        return out;
    }
};

FftConvolver::FftConvolver(int image_m, const ImageGrid& kernel) : impl_(new Impl) {
    if (image_m < 1) throw std::invalid_argument("image size must be positive");
    const int k = kernel.m();
    impl_->m = image_m;
    impl_->pad = next_smooth_size(image_m + k - 1);
    const int pad = impl_->pad;
    impl_->nfreq = pad * (pad / 2 + 1);
    impl_->real = fftw_alloc_real(static_cast<std::size_t>(pad) * pad);
    impl_->freq = fftw_alloc_complex(impl_->nfreq);
    impl_->kernel_hat = fftw_alloc_complex(impl_->nfreq);
    impl_->fwd = fftw_plan_dft_r2c_2d(pad, pad, impl_->real, impl_->freq, FFTW_ESTIMATE);
    impl_->bwd = fftw_plan_dft_c2r_2d(pad, pad, impl_->freq, impl_->real, FFTW_ESTIMATE);

    // Load the kernel with its middle pixel at the origin of the padded
    // torus, so that "same size" outputs stay aligned with the input.
    std::fill(impl_->real, impl_->real + static_cast<std::size_t>(pad) * pad, 0.0);
    const int c = (k - 1) / 2;
    for (int j = 0; j < k; ++j) {
        const int row = (j - c + pad) % pad;
        for (int i = 0; i < k; ++i) {
            const int col = (i - c + pad) % pad;
            impl_->real[static_cast<std::size_t>(row) * pad + col] = kernel.at(i, j);
        }
    }
    fftw_execute(impl_->fwd);
    const double scale = 1.0 / (static_cast<double>(pad) * pad);
    for (int n = 0; n < impl_->nfreq; ++n) {
        impl_->kernel_hat[n][0] = impl_->freq[n][0] * scale;
        impl_->kernel_hat[n][1] = impl_->freq[n][1] * scale;
    }
}

FftConvolver::~FftConvolver() = default;

int FftConvolver::image_m() const { return impl_->m; }
int FftConvolver::pad() const { return impl_->pad; }

ImageGrid FftConvolver::forward(const ImageGrid& x) const { return impl_->apply(x, false); }
ImageGrid FftConvolver::adjoint(const ImageGrid& x) const { return impl_->apply(x, true); }

ImageGrid convolve(const ImageGrid& image, const ImageGrid& kernel) {
    FftConvolver conv(image.m(), kernel);
    return conv.forward(image);
}

ImageGrid gaussian_psf(int m, double fwhm_x, double fwhm_y, double angle) {
    if (m < 1) throw std::invalid_argument("kernel size must be positive");
    if (!(fwhm_x > 0.0) || !(fwhm_y > 0.0))
        throw std::invalid_argument("widths must be positive");
    const double sx = fwhm_to_sigma(fwhm_x);
    const double sy = fwhm_to_sigma(fwhm_y);
    const double c = 0.5 * (m - 1);
    ImageGrid out(m);
    if (angle == 0.0) {
        // Exact per-pixel integrals of the separable density.
        std::vector<double> mx(m), my(m);
        const double ax = 1.0 / (sx * std::numbers::sqrt2);
        const double ay = 1.0 / (sy * std::numbers::sqrt2);
        for (int i = 0; i < m; ++i) {
            const double u = i - c;
            mx[i] = 0.5 * (std::erf((u + 0.5) * ax) - std::erf((u - 0.5) * ax));
            my[i] = 0.5 * (std::erf((u + 0.5) * ay) - std::erf((u - 0.5) * ay));
        }
        for (int j = 0; j < m; ++j)
            for (int i = 0; i < m; ++i) out.at(i, j) = mx[i] * my[j];
    } else {
        const double co = std::cos(angle);
        const double si = std::sin(angle);
        const double ix = 1.0 / (sx * sx);
        const double iy = 1.0 / (sy * sy);
        const double pxx = co * co * ix + si * si * iy;
        const double pyy = si * si * ix + co * co * iy;
        const double pxy = co * si * (ix - iy);
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                double acc = 0.0;
                for (int a = 0; a < 4; ++a) {
                    const double u = i - c + 0.5 * kGaussNode[a];
                    for (int b = 0; b < 4; ++b) {
                        const double v = j - c + 0.5 * kGaussNode[b];
                        const double q = pxx * u * u + 2.0 * pxy * u * v + pyy * v * v;
                        acc += kGaussWeight[a] * kGaussWeight[b] * std::exp(-0.5 * q);
                    }
                }
                out.at(i, j) = 0.25 * acc;
            }
        }
    }
    const double total = grid_sum(out);
    if (!(total > 0.0)) throw numerical_error("kernel mass vanished");
    for (double& v : out.values()) v /= total;
    return out;
}

ImageGrid generalized_gaussian_psf(int m, double fwhm_x, double fwhm_y,
                                   double exponent) {
    if (m < 1) throw std::invalid_argument("kernel size must be positive");
    if (!(fwhm_x > 0.0) || !(fwhm_y > 0.0))
        throw std::invalid_argument("widths must be positive");
    if (!(exponent > 0.0)) throw std::invalid_argument("exponent must be positive");
    // Half-width at half-maximum of exp(-0.5 * (u/a)^(2e)) is a * (2 ln 2)^(1/2e),
    // so the scale below keeps the requested FWHM exact for every exponent.
    const double hw = std::pow(2.0 * std::numbers::ln2, 0.5 / exponent);
    const double ax = 0.5 * fwhm_x / hw;
    const double ay = 0.5 * fwhm_y / hw;
    const double c = 0.5 * (m - 1);
    ImageGrid out(m);
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            double acc = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double u = (i - c + 0.5 * kGaussNode[a]) / ax;
                for (int b = 0; b < 4; ++b) {
                    const double v = (j - c + 0.5 * kGaussNode[b]) / ay;
                    const double q = u * u + v * v;
                    acc += kGaussWeight[a] * kGaussWeight[b] *
                           std::exp(-0.5 * std::pow(q, exponent));
                }
            }
            out.at(i, j) = 0.25 * acc;
        }
    }
    const double total = grid_sum(out);
    if (!(total > 0.0)) throw numerical_error("kernel mass vanished");
    for (double& v : out.values()) v /= total;
    return out;
}

PsfModel make_psf_model(PsfKind kind, const ImageGrid& raw_kernel) {
    require_nonnegative(raw_kernel, "kernel");
    const double total = grid_sum(raw_kernel);
    if (!(total > 0.0)) throw numerical_error("kernel sum must be positive");
    PsfModel model;
    model.kind = kind;
    model.kernel = raw_kernel;
    for (double& v : model.kernel.values()) v /= total;
    return model;
}

ImageGrid bead_intensity(const BeadSpec& spec, const ImageGrid& kernel) {
    if (!(spec.fwhm_x > 0.0) || !(spec.fwhm_y > 0.0) || !(spec.bead_diameter > 0.0) ||
        !(spec.peak_intensity > 0.0) || !(spec.pixel_size > 0.0))
        throw std::invalid_argument("bead parameters must be positive");
    const int m = kernel.m();
    const double c = 0.5 * (m - 1);
    const double r = 0.5 * spec.bead_diameter / spec.pixel_size;
    const double r2 = r * r;
    ImageGrid bead(m);
    const int lo = std::max(0, static_cast<int>(std::floor(c - r - 1.0)));
    const int hi = std::min(m - 1, static_cast<int>(std::ceil(c + r + 1.0)));
    long hits = 0;
    for (int j = lo; j <= hi; ++j) {
        for (int i = lo; i <= hi; ++i) {
            int cnt = 0;
            for (int a = 0; a < 16; ++a) {
                const double dx = i - c + (a + 0.5) / 16.0 - 0.5;
                for (int b = 0; b < 16; ++b) {
                    const double dy = j - c + (b + 0.5) / 16.0 - 0.5;
                    if (dx * dx + dy * dy <= r2) ++cnt;
                }
            }
            bead.at(i, j) = cnt / 256.0;
            hits += cnt;
        }
    }
    if (hits == 0) bead.at((m - 1) / 2, (m - 1) / 2) = 1.0;  // sub-subpixel bead
    ImageGrid out = convolve(bead, kernel);
    double peak = 0.0;
    for (double& v : out.values()) {
        if (v < 0.0) v = 0.0;  // FFT round-off in exactly-zero regions
        if (v > peak) peak = v;
    }
    if (!(peak > 0.0)) throw numerical_error("bead image has no positive peak");
    const double scale = spec.peak_intensity / peak;
    for (double& v : out.values()) v *= scale;
    return out;
}

ImageGrid simulate_bead_image(const BeadSpec& spec, const ImageGrid& kernel,
                              std::uint64_t seed) {
    NoiseSpec noise;
    noise.kind = NoiseKind::poisson;
    noise.seed = seed;
    return add_noise(bead_intensity(spec, kernel), noise);
}

namespace {

struct SimplexResult {
    std::vector<double> x;
    double f = 0.0;
    int iterations = 0;
    bool converged = false;
};

SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& x0, const std::vector<double>& step,
                          double rel_tol, int max_iter) {
    const std::size_t n = x0.size();
    std::vector<std::pair<double, std::vector<double>>> s;
    s.reserve(n + 1);
    s.emplace_back(f(x0), x0);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> x = x0;
        x[i] += step[i];
        s.emplace_back(f(x), x);
    }
    SimplexResult result;
    for (; result.iterations < max_iter; ++result.iterations) {
        std::sort(s.begin(), s.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (s.back().first - s.front().first <=
            rel_tol * (std::abs(s.front().first) + rel_tol)) {
            result.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t d = 0; d < n; ++d) centroid[d] += s[i].second[d] / n;
        const std::vector<double>& worst = s.back().second;
        std::vector<double> xr(n), xe(n), xc(n);
        for (std::size_t d = 0; d < n; ++d) xr[d] = 2.0 * centroid[d] - worst[d];
        const double fr = f(xr);
        if (fr < s.front().first) {
            for (std::size_t d = 0; d < n; ++d) xe[d] = 3.0 * centroid[d] - 2.0 * worst[d];
            const double fe = f(xe);
            if (fe < fr)
                s.back() = {fe, xe};
            else
                s.back() = {fr, xr};
        } else if (fr < s[n - 1].first) {
            s.back() = {fr, xr};
        } else {
            for (std::size_t d = 0; d < n; ++d) xc[d] = 0.5 * (centroid[d] + worst[d]);
            const double fc = f(xc);
            if (fc < std::min(fr, s.back().first)) {
                s.back() = {fc, xc};
            } else {
                for (std::size_t i = 1; i <= n; ++i) {
                    for (std::size_t d = 0; d < n; ++d)
                        s[i].second[d] = 0.5 * (s.front().second[d] + s[i].second[d]);
                    s[i].first = f(s[i].second);
                }
            }
        }
    }
    std::sort(s.begin(), s.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    result.x = s.front().second;
    result.f = s.front().first;
    return result;
}

}  // namespace

PsfModel fit_parametric_psf(const ImageGrid& data, PsfKind kind) {
    if (kind != PsfKind::gaussian_mle && kind != PsfKind::power_gaussian_mle)
        throw std::invalid_argument("parametric fit requires a parametric kind");
    const int m = data.m();
    if (m < 3) throw std::invalid_argument("image too small to fit");
    require_nonnegative(data, "intensity data");
    const double mass = grid_sum(data);
    if (!(mass > 0.0)) throw numerical_error("no signal to fit");
    const double c = 0.5 * (m - 1);
    const double expo = (kind == PsfKind::power_gaussian_mle) ? 0.95 : 1.0;

    // Moment-matched starting covariance (pixel units).
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int j = 0; j < m; ++j) {
        const double v = j - c;
        for (int i = 0; i < m; ++i) {
            const double u = i - c;
            const double z = data.at(i, j);
            sxx += z * u * u;
            sxy += z * u * v;
            syy += z * v * v;
        }
    }
    sxx = std::max(sxx / mass, 0.25);
    syy = std::max(syy / mass, 0.25);
    sxy /= mass;
    const double limit = 0.99 * std::sqrt(sxx * syy);
    sxy = std::clamp(sxy, -limit, limit);

    // Parametrize the precision matrix by its Cholesky factor
    // L = [[l11, 0], [l21, l22]] with log-space diagonals.
    const double det = sxx * syy - sxy * sxy;
    const double pxx0 = syy / det;
    const double pxy0 = -sxy / det;
    const double pyy0 = sxx / det;
    const double l11 = std::sqrt(pxx0);
    const double l21 = pxy0 / l11;
    const double l22 = std::sqrt(pyy0 - l21 * l21);
    const std::vector<double> theta0 = {std::log(l11), l21, std::log(l22)};

    double sum_g_best = 0.0;
    const auto objective = [&](const std::vector<double>& th) {
        const double a11 = std::exp(th[0]);
        const double a21 = th[1];
        const double a22 = std::exp(th[2]);
        const double pxx = a11 * a11;
        const double pxy = a11 * a21;
        const double pyy = a21 * a21 + a22 * a22;
        long double sum_g = 0.0L;
        long double zq = 0.0L;
        for (int j = 0; j < m; ++j) {
            const double v = j - c;
            for (int i = 0; i < m; ++i) {
                const double u = i - c;
                const double q = pxx * u * u + 2.0 * pxy * u * v + pyy * v * v;
                const double qe = (expo == 1.0) ? q : std::pow(q, expo);
                sum_g += std::exp(-0.5 * qe);
                const double z = data.at(i, j);
                if (z != 0.0) zq += z * qe;
            }
        }
        sum_g_best = static_cast<double>(sum_g);
        // Profiled negative log-likelihood: amplitude A = mass / sum_g.
        return 0.5 * static_cast<double>(zq) - mass * std::log(mass / sum_g_best) + mass;
    };

    const SimplexResult fit =
        nelder_mead(objective, theta0, {0.1, 0.1, 0.1}, 1e-8, 2000);
    if (!fit.converged)
        throw numerical_error("psf fit did not converge after " +
                              std::to_string(fit.iterations) +
                              " iterations (objective " + std::to_string(fit.f) + ")");

    const double a11 = std::exp(fit.x[0]);
    const double a21 = fit.x[1];
    const double a22 = std::exp(fit.x[2]);
    const double pxx = a11 * a11;
    const double pxy = a11 * a21;
    const double pyy = a21 * a21 + a22 * a22;
    ImageGrid g(m);
    for (int j = 0; j < m; ++j) {
        const double v = j - c;
        for (int i = 0; i < m; ++i) {
            const double u = i - c;
            const double q = pxx * u * u + 2.0 * pxy * u * v + pyy * v * v;
            const double qe = (expo == 1.0) ? q : std::pow(q, expo);
            g.at(i, j) = std::exp(-0.5 * qe);
        }
    }
    (void)objective(fit.x);  // refresh sum_g_best at the optimum
    const double amplitude = mass / sum_g_best;
    const double pdet = pxx * pyy - pxy * pxy;
    PsfModel model = make_psf_model(kind, g);
    model.params = {pyy / pdet, -pxy / pdet, pxx / pdet, amplitude, -fit.f};
    return model;
}

namespace {

// Bilinear sample of pixel-center values; false if the point leaves the hull.
bool bilinear_sample(const ImageGrid& img, double gx, double gy, double& out) {
    const int m1 = img.m() - 1;
    if (gx < -1e-9 || gx > m1 + 1e-9 || gy < -1e-9 || gy > m1 + 1e-9) return false;
    gx = std::clamp(gx, 0.0, static_cast<double>(m1));
    gy = std::clamp(gy, 0.0, static_cast<double>(m1));
    int ix = static_cast<int>(gx);
    int iy = static_cast<int>(gy);
    if (ix >= m1) ix = m1 - 1;
    if (iy >= m1) iy = m1 - 1;
    const double fx = gx - ix;
    const double fy = gy - iy;
    out = (1.0 - fx) * (1.0 - fy) * img.at(ix, iy) + fx * (1.0 - fy) * img.at(ix + 1, iy) +
          (1.0 - fx) * fy * img.at(ix, iy + 1) + fx * fy * img.at(ix + 1, iy + 1);
    return true;
}

}  // namespace

ImageGrid symmetrize(const ImageGrid& image, double beta1) {
    if (!(beta1 >= 0.0 && beta1 < std::numbers::pi))
        throw std::invalid_argument("beta1 must lie in [0, pi)");
    const int m = image.m();
    const int m1 = m - 1;
    ImageGrid out(m);
    const double tol = 1e-9;
    const bool near_zero = beta1 < tol || beta1 > std::numbers::pi - tol;
    const bool near_half = std::abs(beta1 - 0.5 * std::numbers::pi) < tol;
    if (near_zero || near_half) {
        // Grid-aligned axes: exact pixel permutations, no interpolation.
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                const double a = image.at(i, j);
                const double b = near_zero ? image.at(i, m1 - j) : image.at(m1 - i, j);
                const double d = near_zero ? image.at(m1 - i, j) : image.at(i, m1 - j);
                const double e = image.at(m1 - i, m1 - j);
                out.at(i, j) = ((a + b) + (d + e)) * 0.25;
            }
        }
        return out;
    }
    const double cc = std::cos(2.0 * beta1);
    const double ss = std::sin(2.0 * beta1);
    const double c = 0.5 * m1;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            const double ux = i - c;
            const double uy = j - c;
            const double rx = cc * ux + ss * uy;
            const double ry = ss * ux - cc * uy;
            // Group order: identity, reflect(beta1), reflect(beta1 + pi/2)
            // (= the negated reflection), rotate(pi). Fixed pairwise
            // summation keeps the average exactly rot-pi equivariant.
            double s1 = 0.0, s2 = 0.0, s3 = 0.0;
            int count = 1;
            const bool h1 = bilinear_sample(image, rx + c, ry + c, s1);
            const bool h2 = bilinear_sample(image, -rx + c, -ry + c, s2);
            const bool h3 = bilinear_sample(image, -ux + c, -uy + c, s3);
            count += h1 + h2 + h3;
            out.at(i, j) = ((image.at(i, j) + s1) + (s2 + s3)) / count;
        }
    }
    return out;
}

namespace {

void validate_rl_inputs(const ImageGrid& data, const PsfModel& psf, int max_iter) {
    if (max_iter < 1) throw std::invalid_argument("max_iter must be at least 1");
    require_nonnegative(data, "data");
    if (!(grid_sum(psf.kernel) > 0.0)) throw numerical_error("kernel sum must be positive");
}

double poisson_loglik(const ImageGrid& data, const ImageGrid& blur) {
    long double acc = 0.0L;
    const std::vector<double>& z = data.values();
    const std::vector<double>& b = blur.values();
    for (std::size_t n = 0; n < z.size(); ++n) {
        const double lam = std::max(b[n], kRlFloor);
        if (z[n] != 0.0) acc += z[n] * std::log(lam);
        acc -= lam;
    }
    return static_cast<double>(acc);
}

}  // namespace

void richardson_lucy(const ImageGrid& data, const PsfModel& psf, int max_iter,
                     const std::function<void(int, const ImageGrid&)>& on_iterate) {
    validate_rl_inputs(data, psf, max_iter);
    const int m = data.m();
    FftConvolver conv(m, psf.kernel);
    const double mass = grid_sum(data);
    ImageGrid gamma(m);
    const double init = mass / (static_cast<double>(m) * m);
    for (double& v : gamma.values()) v = init;
    ImageGrid ratio(m);
    for (int k = 1; k <= max_iter; ++k) {
        const ImageGrid blur = conv.forward(gamma);
        for (std::size_t n = 0; n < ratio.values().size(); ++n)
            ratio.values()[n] = data.values()[n] / std::max(blur.values()[n], kRlFloor);
        const ImageGrid corr = conv.adjoint(ratio);
        for (std::size_t n = 0; n < gamma.values().size(); ++n)
            gamma.values()[n] *= std::max(corr.values()[n], 0.0);
        on_iterate(k, gamma);
    }
}

std::vector<ImageGrid> richardson_lucy(const ImageGrid& data, const PsfModel& psf,
                                       int max_iter) {
    std::vector<ImageGrid> iterates;
    iterates.reserve(static_cast<std::size_t>(max_iter));
    richardson_lucy(data, psf, max_iter,
                    [&](int, const ImageGrid& g) { iterates.push_back(g); });
    return iterates;
}

RlRun run_richardson_lucy(const ImageGrid& data, const PsfModel& psf, int max_iter,
                          const ImageGrid& truth) {
    validate_rl_inputs(data, psf, max_iter);
    if (truth.m() != data.m()) throw std::invalid_argument("truth size must match data");
    const int m = data.m();
    FftConvolver conv(m, psf.kernel);
    const double mass = grid_sum(data);
    ImageGrid gamma(m);
    const double init = mass / (static_cast<double>(m) * m);
    for (double& v : gamma.values()) v = init;
    ImageGrid ratio(m);
    RlRun run;
    run.stats.resize(static_cast<std::size_t>(max_iter));
    for (int k = 1; k <= max_iter; ++k) {
        const ImageGrid blur = conv.forward(gamma);
        if (k >= 2) run.stats[k - 2].loglik = poisson_loglik(data, blur);
        for (std::size_t n = 0; n < ratio.values().size(); ++n)
            ratio.values()[n] = data.values()[n] / std::max(blur.values()[n], kRlFloor);
        const ImageGrid corr = conv.adjoint(ratio);
        long double l1 = 0.0L, l2 = 0.0L, total = 0.0L;
        double mn = 0.0;
        bool first = true;
        for (std::size_t n = 0; n < gamma.values().size(); ++n) {
            double& g = gamma.values()[n];
            g *= std::max(corr.values()[n], 0.0);
            const double d = g - truth.values()[n];
            l1 += std::abs(d);
            l2 += d * d;
            total += g;
            if (first || g < mn) mn = g;
            first = false;
        }
        run.stats[k - 1].mass = static_cast<double>(total);
        run.stats[k - 1].min_value = mn;
        const double d1 = static_cast<double>(l1);
        const double d2 = static_cast<double>(l2);
        if (k == 1 || d1 < run.l1) {
            run.l1 = d1;
            run.best_k_l1 = k;
        }
        if (k == 1 || d2 < run.l2) {
            run.l2 = d2;
            run.best_k_l2 = k;
        }
    }
    const ImageGrid blur = conv.forward(gamma);
    run.stats[static_cast<std::size_t>(max_iter) - 1].loglik = poisson_loglik(data, blur);
    return run;
}

std::pair<int, double> optimal_iterate_distance(const std::vector<ImageGrid>& iterates,
                                                const ImageGrid& truth,
                                                DistanceMetric metric) {
    if (iterates.empty()) throw std::invalid_argument("at least one iterate required");
    int best_k = 1;
    double best = 0.0;
    for (std::size_t k = 0; k < iterates.size(); ++k) {
        if (iterates[k].m() != truth.m())
            throw std::invalid_argument("iterate size must match truth");
        long double acc = 0.0L;
        for (std::size_t n = 0; n < truth.values().size(); ++n) {
            const double d = iterates[k].values()[n] - truth.values()[n];
            acc += (metric == DistanceMetric::L1) ? std::abs(d) : d * d;
        }
        const double dist = static_cast<double>(acc);
        if (k == 0 || dist < best) {
            best = dist;
            best_k = static_cast<int>(k) + 1;
        }
    }
    return {best_k, best};
}

ImageGrid make_phantom() {
    const int m = 128;
    ImageGrid out(m);
    const double phi = 0.5;
    const double cph = std::cos(phi);
    const double sph = std::sin(phi);
    double peak = 0.0;
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (i < 20 || i > 107 || j < 20 || j > 107) continue;
            const double bx = i - 62.0;
            const double by = j - 66.0;
            const double xr = cph * bx + sph * by;
            const double yr = -sph * bx + cph * by;
            const double t = std::sqrt((xr / 36.0) * (xr / 36.0) + (yr / 27.0) * (yr / 27.0));
            const double w = std::clamp((1.0 - t) / 0.10, 0.0, 1.0);
            const double body = 0.35 * w * w * (3.0 - 2.0 * w);
            const double ra = std::hypot(i - 65.0, j - 61.0);
            const double ring = 0.85 * std::exp(-((ra - 21.0) / 2.0) * ((ra - 21.0) / 2.0));
            const double g1 =
                1.00 * std::exp(-((i - 47.0) * (i - 47.0) + (j - 58.0) * (j - 58.0)) /
                                (2.0 * 0.99 * 0.99));
            const double g2 =
                0.80 * std::exp(-((i - 76.0) * (i - 76.0) + (j - 79.0) * (j - 79.0)) /
                                (2.0 * 1.35 * 1.35));
            const double g3 =
                1.05 * std::exp(-((i - 69.0) * (i - 69.0) + (j - 44.0) * (j - 44.0)) /
                                (2.0 * 0.81 * 0.81));
            const double v = body + ring + g1 + g2 + g3;
            out.at(i, j) = v;
            if (v > peak) peak = v;
        }
    }
    for (double& v : out.values()) v /= peak;
    return out;
}

}  // namespace zsym
