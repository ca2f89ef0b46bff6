#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "remi/errors.hpp"

namespace remi {

// Continued fraction for the regularized incomplete beta function,
// evaluated with the modified Lentz algorithm.
inline double incbeta_cf(double a, double b, double x) {
    constexpr int max_iter = 500;
    constexpr double eps = 3.0e-15;
    constexpr double fpmin = 1.0e-300;

    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    int m = 1;
    for (; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) <= eps) break;
    }
    if (m > max_iter) throw NumericError("incomplete beta: continued fraction did not converge");
    return h;
}

// Regularized incomplete beta I_x(a, b), a,b > 0, x in [0, 1].
inline double incbeta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw NumericError("incomplete beta: a and b must be positive");
    if (!(x >= 0.0 && x <= 1.0)) throw NumericError("incomplete beta: x outside [0, 1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b)
        + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(lnfront);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * incbeta_cf(a, b, x) / a;
    return 1.0 - front * incbeta_cf(b, a, 1.0 - x) / b;
}

// Two-sided p-value of a Student t statistic with nu degrees of freedom:
// P(|T| >= |t|) = I_{nu/(nu+t^2)}(nu/2, 1/2).
inline double student_t_two_sided_p(double t, double nu) {
    if (!(nu > 0.0)) throw NumericError("t p-value: degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    if (!std::isfinite(t)) throw NumericError("t p-value: non-finite statistic");
    return incbeta(0.5 * nu, 0.5, nu / (nu + t * t));
}

// Percentile with linear interpolation between order statistics
// (the h = (n-1)*p/100 convention). Input need not be sorted.
inline double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw DataError("percentile of empty set");
    if (!(p >= 0.0 && p <= 100.0)) throw ConfigError("percentile outside [0, 100]");
    std::sort(values.begin(), values.end());
    const double h = (static_cast<double>(values.size()) - 1.0) * p / 100.0;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = static_cast<std::size_t>(std::ceil(h));
    if (lo == hi) return values[lo];
    const double w = h - static_cast<double>(lo);
    return values[lo] * (1.0 - w) + values[hi] * w;
}

inline double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

} // namespace remi
