#include "zsym/zernike.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace zsym {

namespace {

// 4-point Gauss-Legendre rule on [-1,1].
constexpr double kGaussNode[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
constexpr double kGaussWeight[4] = {0.3478548451374538, 0.6521451548625461,
                                    0.6521451548625461, 0.3478548451374538};

void require_admissible(int p, int q) {
    if (!is_admissible(p, q))
        throw numerical_error("zernike: index (" + std::to_string(p) + "," +
                                    std::to_string(q) + ") is not admissible");
}

// Binomial coefficient, exact in 128-bit intermediates.
std::int64_t binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    __int128 r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return static_cast<std::int64_t>(r);
}

}  // namespace

bool is_admissible(int p, int q) {
    return p >= 0 && std::abs(q) <= p && (p - std::abs(q)) % 2 == 0;
}

std::vector<ZernikeIndex> admissible_indices(int n_max) {
    if (n_max < 0) throw std::invalid_argument("admissible_indices: n_max must be >= 0");
    std::vector<ZernikeIndex> out;
    out.reserve(static_cast<std::size_t>(n_max + 1) * (n_max + 2) / 2);
    for (int p = 0; p <= n_max; ++p)
        for (int q = -p; q <= p; q += 2) out.push_back({p, q});
    return out;
}

std::vector<std::int64_t> radial_coefficients(int p, int q) {
    require_admissible(p, q);
    const int aq = std::abs(q);
    const int half_sum = (p + aq) / 2;
    const int half_diff = (p - aq) / 2;
    std::vector<std::int64_t> coeff(half_diff + 1);
    for (int l = 0; l <= half_diff; ++l) {
        // (p-l)! / (l! (half_sum-l)! (half_diff-l)!) as a product of binomials.
        const std::int64_t c = binom(p - l, l) * binom(p - 2 * l, half_sum - l);
        coeff[l] = (l % 2 == 0) ? c : -c;
    }
    return coeff;
}

double radial_poly(int p, int q, double rho) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw numerical_error("radial_poly: rho must lie in [0,1]");
    const auto coeff = radial_coefficients(p, q);
    const double u = rho * rho;
    double acc = static_cast<double>(coeff[0]);
    for (std::size_t l = 1; l < coeff.size(); ++l) acc = acc * u + static_cast<double>(coeff[l]);
    return acc * std::pow(rho, std::abs(q));
}

std::complex<double> zernike_value(ZernikeIndex idx, double x, double y) {
    const double r2 = x * x + y * y;
    if (r2 > 1.0 + 1e-15)
        throw numerical_error("zernike_value: point lies outside the closed unit disc");
    const double rho = std::sqrt(std::min(r2, 1.0));
    const double theta = (rho == 0.0) ? 0.0 : std::atan2(y, x);
    const double r = radial_poly(idx.p, idx.q, rho);
    return std::polar(r, idx.q * theta);
}

ZernikeBasis::ZernikeBasis(int n_max) : n_max_(n_max), indices_(admissible_indices(n_max)) {
    for (const auto& ix : indices_)
        if (ix.q >= 0) nonneg_.push_back(ix);
    radial_.reserve(nonneg_.size());
    for (const auto& ix : nonneg_) {
        const auto exact = radial_coefficients(ix.p, ix.q);
        radial_.emplace_back(exact.begin(), exact.end());
    }
}

void ZernikeBasis::eval_nonneg(double x, double y,
                               std::span<std::complex<double>> out) const {
    const double u = x * x + y * y;
    const double rho = std::sqrt(u);

    // Powers of rho up to n_max and the angular phase chain e^{iq theta}.
    // Building the phase from the unit vector avoids any trig beyond the
    // initial normalization.
    double rpow_buf[64];
    std::complex<double> phase_buf[64];
    rpow_buf[0] = 1.0;
    for (int k = 1; k <= n_max_; ++k) rpow_buf[k] = rpow_buf[k - 1] * rho;
    phase_buf[0] = {1.0, 0.0};
    if (n_max_ >= 1) {
        std::complex<double> e = (rho == 0.0) ? std::complex<double>(1.0, 0.0)
                                              : std::complex<double>(x / rho, y / rho);
        for (int k = 1; k <= n_max_; ++k) phase_buf[k] = phase_buf[k - 1] * e;
    }

    for (std::size_t k = 0; k < nonneg_.size(); ++k) {
        const auto& ix = nonneg_[k];
        const auto& c = radial_[k];
        double acc = c[0];
        for (std::size_t l = 1; l < c.size(); ++l) acc = acc * u + c[l];
        out[k] = (acc * rpow_buf[ix.q]) * phase_buf[ix.q];
    }
}

MomentSet::MomentSet(int n_max, double delta, WeightScheme scheme)
    : n_max_(n_max), delta_(delta), scheme_(scheme), indices_(admissible_indices(n_max)) {
    coef_.assign(indices_.size(), {0.0, 0.0});
}

std::size_t MomentSet::pos(int p, int q) {
    require_admissible(p, q);
    return static_cast<std::size_t>(p) * (p + 1) / 2 + static_cast<std::size_t>(p + q) / 2;
}

std::vector<std::complex<double>> quadrature_weights(const ImageGrid& grid, ZernikeIndex idx,
                                                     WeightScheme scheme) {
    require_admissible(idx.p, idx.q);
    const int m = grid.m();
    const double d = grid.delta();
    std::vector<std::complex<double>> w;
    w.reserve(grid.masked_count());
    ZernikeBasis basis(idx.p);
    std::vector<std::complex<double>> vals(basis.nonneg_indices().size());
    std::size_t k = 0;
    while (basis.nonneg_indices()[k].p != idx.p || basis.nonneg_indices()[k].q != std::abs(idx.q))
        ++k;

    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (!grid.inside(i, j)) continue;
            std::complex<double> acc{0.0, 0.0};
            if (scheme == WeightScheme::midpoint) {
                basis.eval_nonneg(grid.x(i), grid.y(j), vals);
                acc = d * d * std::conj(vals[k]);
            } else {
                // 4x4 tensor Gauss-Legendre over the pixel square.
                for (int a = 0; a < 4; ++a) {
                    const double gx = grid.x(i) + 0.5 * d * kGaussNode[a];
                    for (int b = 0; b < 4; ++b) {
                        const double gy = grid.y(j) + 0.5 * d * kGaussNode[b];
                        basis.eval_nonneg(gx, gy, vals);
                        acc += (kGaussWeight[a] * kGaussWeight[b]) * std::conj(vals[k]);
                    }
                }
                acc *= 0.25 * d * d;
            }
            w.push_back((idx.q >= 0) ? acc : std::conj(acc));
        }
    }
    return w;
}

MomentSet estimate_moments(const ImageGrid& grid, int n_max, WeightScheme scheme) {
    if (n_max < 0) throw std::invalid_argument("estimate_moments: n_max must be >= 0");
    ZernikeBasis basis(n_max);
    const auto& nn = basis.nonneg_indices();
    std::vector<std::complex<double>> acc(nn.size(), {0.0, 0.0});
    std::vector<std::complex<double>> vals(nn.size());

    const int m = grid.m();
    const double d = grid.delta();
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (!grid.inside(i, j)) continue;
            const double z = grid.at(i, j);
            if (scheme == WeightScheme::midpoint) {
                basis.eval_nonneg(grid.x(i), grid.y(j), vals);
                const double f = d * d * z;
                for (std::size_t k = 0; k < acc.size(); ++k)
                    acc[k] += f * std::conj(vals[k]);
            } else {
                for (int a = 0; a < 4; ++a) {
                    const double gx = grid.x(i) + 0.5 * d * kGaussNode[a];
                    for (int b = 0; b < 4; ++b) {
                        const double gy = grid.y(j) + 0.5 * d * kGaussNode[b];
                        basis.eval_nonneg(gx, gy, vals);
                        const double f = 0.25 * d * d * kGaussWeight[a] * kGaussWeight[b] * z;
                        for (std::size_t k = 0; k < acc.size(); ++k)
                            acc[k] += f * std::conj(vals[k]);
                    }
                }
            }
        }
    }

    MomentSet ms(n_max, d, scheme);
    std::size_t k = 0;
    for (const auto& ix : nn) {
        ms.set(ix.p, ix.q, acc[k]);
        if (ix.q > 0) ms.set(ix.p, -ix.q, std::conj(acc[k]));
        ++k;
    }
    return ms;
}

ImageGrid reconstruct(const MomentSet& ms, const ImageGrid& grid) {
    ZernikeBasis basis(ms.n_max());
    const auto& nn = basis.nonneg_indices();
    std::vector<std::complex<double>> vals(nn.size());
    ImageGrid out(grid.m());

    const int m = grid.m();
    for (int j = 0; j < m; ++j) {
        for (int i = 0; i < m; ++i) {
            if (!grid.inside(i, j)) continue;
            basis.eval_nonneg(grid.x(i), grid.y(j), vals);
            std::complex<double> s{0.0, 0.0};
            for (std::size_t k = 0; k < nn.size(); ++k) {
                const auto& ix = nn[k];
                const double inv_np = 1.0 / norm_np(ix.p);
                s += inv_np * ms.at(ix.p, ix.q) * vals[k];
                if (ix.q > 0) s += inv_np * ms.at(ix.p, -ix.q) * std::conj(vals[k]);
            }
            out.at(i, j) = s.real();
        }
    }
    return out;
}

double parseval_norm(const MomentSet& ms) {
    double s = 0.0;
    for (const auto& ix : ms.indices()) s += std::norm(ms.at(ix.p, ix.q)) / norm_np(ix.p);
    return s;
}

}  // namespace zsym
