#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace nlp::detail {

// Fritsch-Carlson monotone cubic Hermite interpolation on strictly increasing x.
class MonotoneCubic {
public:
    MonotoneCubic(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        m_.assign(n, 0.0);
        if (n < 2) return;
        std::vector<double> delta(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
        m_[0] = delta[0];
        m_[n - 1] = delta[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i)
            m_[i] = (delta[i - 1] * delta[i] <= 0) ? 0.0 : 0.5 * (delta[i - 1] + delta[i]);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (delta[i] == 0) {
                m_[i] = m_[i + 1] = 0;
                continue;
            }
            double a = m_[i] / delta[i], b = m_[i + 1] / delta[i];
            double s = a * a + b * b;
            if (s > 9) {
                double t = 3 / std::sqrt(s);
                m_[i] = t * a * delta[i];
                m_[i + 1] = t * b * delta[i];
            }
        }
    }

    double front() const { return x_.front(); }
    double back() const { return x_.back(); }

    double operator()(double x) const {
        if (x <= x_.front()) return y_.front();
        if (x >= x_.back()) return y_.back();
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = static_cast<std::size_t>(it - x_.begin()) - 1;
        double hh = x_[i + 1] - x_[i];
        double t = (x - x_[i]) / hh;
        double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * y_[i] + (t3 - 2 * t2 + t) * hh * m_[i] + (-2 * t3 + 3 * t2) * y_[i + 1] +
               (t3 - t2) * hh * m_[i + 1];
    }

private:
    std::vector<double> x_, y_, m_;
};

}  // namespace nlp::detail
