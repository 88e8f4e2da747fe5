#pragma once

// Scalar numerics shared across the library: log-sum-exp, digamma, and a
// bracketed Brent root finder.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>

namespace tmix {

inline double log_sum_exp(std::span<const double> xs) {
    double m = -std::numeric_limits<double>::infinity();
    for (double x : xs) m = std::max(m, x);
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

// Digamma via downward recurrence into the asymptotic region.
inline double digamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("digamma: nonpositive argument");
    double acc = 0.0;
    while (x < 8.0) {
        acc -= 1.0 / x;
        x += 1.0;
    }
    const double inv = 1.0 / x, inv2 = inv * inv;
    // Stirling series: log x - 1/(2x) - 1/(12x^2) + 1/(120x^4) - 1/(252x^6)
    return acc + std::log(x) - 0.5 * inv
         - inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
}

struct BrentResult {
    double x = 0.0;
    double fx = 0.0;
    bool bracketed = false;  // false when f(a) and f(b) share a sign
    int iterations = 0;
};

// Brent's method on [a, b]. When the endpoints do not bracket a root, the
// endpoint with the smaller |f| is returned with bracketed = false.
inline BrentResult brent_root(const std::function<double(double)>& f,
                              double a, double b,
                              double tol = 1e-8, int max_iter = 200) {
    if (!(a < b)) throw std::invalid_argument("brent_root: invalid bracket");
    double fa = f(a), fb = f(b);
    BrentResult res;
    if (fa == 0.0) { res = {a, 0.0, true, 0}; return res; }
    if (fb == 0.0) { res = {b, 0.0, true, 0}; return res; }
    if ((fa > 0.0) == (fb > 0.0)) {
        if (std::abs(fa) <= std::abs(fb)) return {a, fa, false, 0};
        return {b, fb, false, 0};
    }
    double c = a, fc = fa, d = b - a, e = d;
    int iter = 0;
    for (; iter < max_iter; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) { c = a; fc = fa; d = b - a; e = d; }
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double eps = std::numeric_limits<double>::epsilon();
        const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) break;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc, r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    return {b, fb, true, iter};
}

}  // namespace tmix
