#pragma once
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace perpdual::detail {

/// Fritsch-Carlson monotone cubic interpolant. Shape preserving: never
/// overshoots the data range, so interpolated values stay inside
/// [min(y), max(y)]. Extrapolation is constant-flat by default.
class Pchip {
public:
    Pchip() = default;

    Pchip(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        if (n < 2 || y_.size() != n)
            throw std::invalid_argument("Pchip: need >= 2 nodes and matching sizes");
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1]))
                throw std::invalid_argument("Pchip: abscissae must be strictly increasing");
        m_.resize(n);
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i)
            d[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) {
            if (d[i - 1] * d[i] <= 0.0) {
                m_[i] = 0.0;
            } else {
                double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
                double w1 = 2.0 * h1 + h0, w2 = h1 + 2.0 * h0;
                m_[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
            }
        }
        // clamp endpoint slopes (Fritsch-Carlson endpoint rule)
        auto fix_end = [](double& m, double d0, double d1) {
            if (m * d0 <= 0.0) m = 0.0;
            else if (d0 * d1 <= 0.0 && std::abs(m) > 3.0 * std::abs(d0)) m = 3.0 * d0;
        };
        if (n > 2) {
            m_[0] = ((2.0 * (x_[1] - x_[0]) + (x_[2] - x_[1])) * d[0] - (x_[1] - x_[0]) * d[1]) /
                    (x_[2] - x_[0]);
            fix_end(m_[0], d[0], d[1]);
            m_[n - 1] = ((2.0 * (x_[n - 1] - x_[n - 2]) + (x_[n - 2] - x_[n - 3])) * d[n - 2] -
                         (x_[n - 1] - x_[n - 2]) * d[n - 3]) / (x_[n - 1] - x_[n - 3]);
            fix_end(m_[n - 1], d[n - 2], d[n - 3]);
        }
    }

    double operator()(double x) const {
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        std::size_t i = seg(x);
        double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
        double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
        double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
        return h00 * y_[i] + h * h10 * m_[i] + h01 * y_[i + 1] + h * h11 * m_[i + 1];
    }

    double deriv(double x) const {
        if (x <= x_.front() || x >= x_.back()) return 0.0;
        std::size_t i = seg(x);
        double h = x_[i + 1] - x_[i], t = (x - x_[i]) / h;
        double g00 = 6 * t * (t - 1) / h, g10 = (3 * t - 1) * (t - 1);
        double g01 = -g00, g11 = t * (3 * t - 2);
        return g00 * y_[i] + g10 * m_[i] + g01 * y_[i + 1] + g11 * m_[i + 1];
    }

    const std::vector<double>& xs() const { return x_; }
    const std::vector<double>& ys() const { return y_; }
    double slope_front() const { return m_.front(); }
    double slope_back() const { return m_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::size_t seg(double x) const {
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        return static_cast<std::size_t>(std::distance(x_.begin(), it)) - 1;
    }
    std::vector<double> x_, y_, m_;
};

} // namespace perpdual::detail
