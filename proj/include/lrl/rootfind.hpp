#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "lrl/errors.hpp"

namespace lrl {

// Brent's method on a bracketing interval [a, b] with f(a) * f(b) <= 0.
// Converges to |interval| <= tol_abs + tol_rel * |root|.
template <class F>
double brent(F&& f, double a, double b, double fa, double fb,
             double tol_abs = 0.0, double tol_rel = 4.0 * std::numeric_limits<double>::epsilon(),
             int max_iter = 200) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) fail(Err::EvaluationFailure, "brent: interval does not bracket a root");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < max_iter; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b)
                         + 0.5 * (tol_abs + tol_rel * std::abs(b));
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol || fb == 0.0) return b;
        if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic interpolation, falling back to secant
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol) ? d : (xm > 0.0 ? tol : -tol);
        fb = f(b);
        if (fb == 0.0) return b;
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
    }
    return b;
}

template <class F>
double brent(F&& f, double a, double b,
             double tol_abs = 0.0, double tol_rel = 4.0 * std::numeric_limits<double>::epsilon(),
             int max_iter = 200) {
    return brent(f, a, b, f(a), f(b), tol_abs, tol_rel, max_iter);
}

// Expands [a, b] geometrically until f changes sign. Returns false when no
// sign change is found within max_expand doublings.
template <class F>
bool expand_bracket(F&& f, double& a, double& b, double& fa, double& fb, int max_expand = 60) {
    fa = f(a);
    fb = f(b);
    for (int i = 0; i < max_expand; ++i) {
        if (fa * fb <= 0.0) return true;
        const double w = b - a;
        if (std::abs(fa) < std::abs(fb)) {
            a -= 0.5 * w;
            fa = f(a);
        } else {
            b += 0.5 * w;
            fb = f(b);
        }
    }
    return fa * fb <= 0.0;
}

// Golden-section minimization of f on [a, b], refined to width tol.
template <class F>
double minimize_golden(F&& f, double a, double b, double tol, int max_iter = 200) {
    constexpr double invphi = 0.6180339887498949;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (f1 < f2) {
            b = x2; x2 = x1; f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1; x1 = x2; f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace lrl
