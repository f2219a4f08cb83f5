#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "zsym/grid.hpp"

namespace zsym {

/// Index (p,q) of a disc basis function: p >= 0, |q| <= p, p-|q| even.
struct ZernikeIndex {
    int p = 0;
    int q = 0;

    friend bool operator==(const ZernikeIndex&, const ZernikeIndex&) = default;
};

bool is_admissible(int p, int q);

/// All admissible (p,q) with p <= n_max, ordered by p ascending then q
/// ascending. Length is (n_max+1)(n_max+2)/2.
std::vector<ZernikeIndex> admissible_indices(int n_max);

/// Squared L2(D) norm of V_pq: n_p = pi/(p+1).
inline double norm_np(int p) { return 3.14159265358979323846 / (p + 1); }

/// Exact integer coefficients of the radial polynomial: R_pq(rho) =
/// sum_l coeff[l] * rho^(p-2l), l = 0..(p-|q|)/2. Exact for p <= 62.
std::vector<std::int64_t> radial_coefficients(int p, int q);

/// Radial polynomial R_pq(rho) for an admissible index and rho in [0,1].
double radial_poly(int p, int q, double rho);

/// V_pq(x,y) = R_pq(rho) e^{iq theta} for x^2+y^2 <= 1; the angle at the
/// origin is taken as 0 (harmless: R_pq(0) = 0 whenever q != 0).
std::complex<double> zernike_value(ZernikeIndex idx, double x, double y);

enum class WeightScheme { pixel_integrated, midpoint };

/// Evaluates every basis function of degree <= n_max at arbitrary points in
/// one pass, sharing the angular phase chain and the radial powers between
/// indices. Values are produced for the q >= 0 representatives only;
/// V_{p,-q} = conj(V_pq).
class ZernikeBasis {
public:
    explicit ZernikeBasis(int n_max);

    int n_max() const { return n_max_; }
    const std::vector<ZernikeIndex>& indices() const { return indices_; }
    const std::vector<ZernikeIndex>& nonneg_indices() const { return nonneg_; }

    /// Fill `out` (size nonneg_indices().size()) with V_pq(x,y) for every
    /// q >= 0 index. No disc-membership check: valid slightly outside the rim
    /// (needed when integrating over boundary pixels).
    void eval_nonneg(double x, double y, std::span<std::complex<double>> out) const;

private:
    int n_max_;
    std::vector<ZernikeIndex> indices_;
    std::vector<ZernikeIndex> nonneg_;
    std::vector<std::vector<double>> radial_;  // coefficients in u = rho^2, Horner order
};

/// Estimated or exact complex moments A_pq for all admissible p <= n_max,
/// stored densely in admissible_indices order, with the grid metadata they
/// came from.
class MomentSet {
public:
    MomentSet() = default;
    MomentSet(int n_max, double delta, WeightScheme scheme);

    int n_max() const { return n_max_; }
    double delta() const { return delta_; }
    WeightScheme scheme() const { return scheme_; }

    const std::vector<ZernikeIndex>& indices() const { return indices_; }

    std::complex<double> at(int p, int q) const { return coef_[pos(p, q)]; }
    void set(int p, int q, std::complex<double> v) { coef_[pos(p, q)] = v; }

    std::size_t size() const { return coef_.size(); }
    const std::vector<std::complex<double>>& coefficients() const { return coef_; }

    /// Flat position of (p,q) in the admissible ordering.
    static std::size_t pos(int p, int q);

private:
    int n_max_ = 0;
    double delta_ = 0.0;
    WeightScheme scheme_ = WeightScheme::midpoint;
    std::vector<ZernikeIndex> indices_;
    std::vector<std::complex<double>> coef_;
};

/// Quadrature weights w_pq over the grid: midpoint gives delta^2 conj(V_pq)
/// at pixel centers inside the disc, pixel_integrated integrates conj(V_pq)
/// over each pixel square with a fixed 4x4 tensor Gauss-Legendre rule.
/// Pixels whose center lies outside the disc get weight 0.
std::vector<std::complex<double>> quadrature_weights(const ImageGrid& grid, ZernikeIndex idx,
                                                     WeightScheme scheme);

/// Moment estimates A_pq = sum over masked pixels of w_pq(x_i,y_j) Z_ij for
/// all admissible p <= n_max. Negative-q entries are the conjugates of their
/// q >= 0 partners (exact for the real-valued grids this operates on).
MomentSet estimate_moments(const ImageGrid& grid, int n_max, WeightScheme scheme);

/// Truncated expansion sum_{p<=N} sum_q n_p^{-1} A_pq V_pq evaluated at the
/// masked pixel centers of `grid`; the imaginary part is dropped after
/// summation. Unmasked pixels are 0.
ImageGrid reconstruct(const MomentSet& ms, const ImageGrid& grid);

/// sum n_p^{-1} |A_pq|^2 over the stored moments.
double parseval_norm(const MomentSet& ms);

}  // namespace zsym
