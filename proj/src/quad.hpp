#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>

namespace nlp::detail {

// Adaptive Gauss-Kronrod on a finite interval for smooth integrands.
inline double integrate_smooth(const std::function<double(double)>& f, double a, double b, double rel = 1e-10) {
    if (!(b > a)) return 0.0;
    double err = 0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 15, rel, &err);
}

// Double-exponential quadrature, robust to integrable endpoint singularities.
inline double integrate_singular(const std::function<double(double)>& f, double a, double b, double rel = 1e-10) {
    if (!(b > a)) return 0.0;
    boost::math::quadrature::tanh_sinh<double> ts(12);
    auto g = [&](double x) {
        double v = f(x);
        return std::isfinite(v) ? v : 0.0;
    };
    return ts.integrate(g, a, b, rel);
}

// Semi-infinite integral over [a, inf) via the substitution t = a / u.
inline double integrate_tail(const std::function<double(double)>& f, double a, double rel = 1e-10) {
    if (!(a > 0)) return 0.0;
    auto g = [&](double u) { return u > 0 ? f(a / u) * a / (u * u) : 0.0; };
    return integrate_singular(g, 0.0, 1.0, rel);
}

}  // namespace nlp::detail
