#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace zsym {

// Thrown on unreadable/malformed files.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Thrown when an algorithm cannot proceed numerically (degenerate contrast,
// flat curvature, non-convergent fit, ...).
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Square pixel grid over [-1,1]^2 with the unit-disc mask.
///
/// m pixels per side, edge width delta = 2/m, pixel centers
/// x_i = -1 + (i + 1/2) * delta for i = 0..m-1 (likewise y_j), so the
/// center set is symmetric: x_{m-1-i} = -x_i for every m. A pixel belongs
/// to the disc iff its center satisfies x^2 + y^2 <= 1; no partial-pixel
/// clipping is attempted. Values are stored for the whole square so the
/// same container serves disc-based estimation and plain image processing
/// (convolution, deconvolution), which ignore the mask.
class ImageGrid {
public:
    ImageGrid() = default;

    explicit ImageGrid(int m, double fill = 0.0) : m_(m) {
        if (m <= 0) throw std::invalid_argument("ImageGrid: m must be positive");
        delta_ = 2.0 / m;
        values_.assign(static_cast<std::size_t>(m) * m, fill);
        mask_.resize(static_cast<std::size_t>(m) * m);
        for (int j = 0; j < m; ++j) {
            const double yj = y(j);
            for (int i = 0; i < m; ++i) {
                const double xi = x(i);
                mask_[idx(i, j)] = (xi * xi + yj * yj <= 1.0) ? 1 : 0;
            }
        }
    }

    int m() const { return m_; }
    double delta() const { return delta_; }

    // i indexes x (column), j indexes y (row); both 0-based.
    // (2i+1-m)/m: mirror centers are exactly opposite, x(m-1-i) == -x(i).
    double x(int i) const { return (2.0 * i + 1.0 - m_) / m_; }
    double y(int j) const { return (2.0 * j + 1.0 - m_) / m_; }

    double& at(int i, int j) { return values_[idx(i, j)]; }
    double at(int i, int j) const { return values_[idx(i, j)]; }

    bool inside(int i, int j) const { return mask_[idx(i, j)] != 0; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    std::size_t size() const { return values_.size(); }

    /// Number of pixels whose center lies in the closed unit disc.
    int masked_count() const {
        int n = 0;
        for (auto b : mask_) n += b;
        return n;
    }

    /// Maximum value over masked pixels.
    double masked_max() const {
        bool any = false;
        double best = 0.0;
        for (std::size_t k = 0; k < values_.size(); ++k) {
            if (!mask_[k]) continue;
            if (!any || values_[k] > best) best = values_[k];
            any = true;
        }
        if (!any) throw std::invalid_argument("ImageGrid: empty mask");
        return best;
    }

    double max_value() const {
        double best = values_.empty() ? 0.0 : values_[0];
        for (double v : values_) best = v > best ? v : best;
        return best;
    }

    double sum() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(j) * m_ + i; }

private:
    int m_ = 0;
    double delta_ = 0.0;
    std::vector<double> values_;
    std::vector<std::uint8_t> mask_;
};

}  // namespace zsym
