#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mumarket/errors.hpp"

namespace mumarket {

struct Bracket {
    double lo = 0.0;
    double hi = 0.0;
    double f_lo = 0.0;
    double f_hi = 0.0;
};

namespace detail {
inline bool sign_change(const Bracket& b) {
    return b.f_lo == 0.0 || b.f_hi == 0.0 || ((b.f_lo < 0.0) != (b.f_hi < 0.0));
}
} // namespace detail

// Grow [lo, hi] geometrically until f changes sign. Hard bounds mark open
// interval ends (domain edges where f may blow up); expansion approaches
// them by halving the remaining gap instead of stepping past. Throws
// NumericalError when no sign change appears.
template <class F>
Bracket expand_bracket(F&& f, double lo, double hi, const char* what,
                       double hard_lo = -std::numeric_limits<double>::infinity(),
                       double hard_hi = std::numeric_limits<double>::infinity(),
                       int max_steps = 200) {
    if (!(lo < hi)) throw NumericalError(std::string(what) + ": empty initial bracket");
    Bracket b{lo, hi, f(lo), f(hi)};
    for (int step = 0; step < max_steps; ++step) {
        if (detail::sign_change(b)) return b;
        double width = b.hi - b.lo;
        bool moved = false;
        double new_lo = b.lo - width;
        if (std::isfinite(hard_lo) && new_lo <= hard_lo) new_lo = 0.5 * (hard_lo + b.lo);
        if (new_lo < b.lo) {
            b.lo = new_lo;
            b.f_lo = f(b.lo);
            moved = true;
            if (detail::sign_change(b)) return b;
        }
        double new_hi = b.hi + width;
        if (std::isfinite(hard_hi) && new_hi >= hard_hi) new_hi = 0.5 * (b.hi + hard_hi);
        if (new_hi > b.hi) {
            b.hi = new_hi;
            b.f_hi = f(b.hi);
            moved = true;
        }
        if (!moved) break;
    }
    if (detail::sign_change(b)) return b;
    throw NumericalError(std::string(what) + ": no sign change in [" + std::to_string(b.lo) +
                         ", " + std::to_string(b.hi) + "], f = [" + std::to_string(b.f_lo) +
                         ", " + std::to_string(b.f_hi) + "]");
}

// Brent-style bracketed root solve: bisection safeguard with secant /
// inverse-quadratic steps. Stops when |f| <= f_tol or the bracket collapses
// to floating-point width. The bracket must have opposite signs.
template <class F>
double brent_root(F&& f, Bracket br, double f_tol, const char* what, int max_iter = 200) {
    double a = br.lo, b = br.hi, fa = br.f_lo, fb = br.f_hi;
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0.0) == (fb < 0.0)) {
        throw NumericalError(std::string(what) + ": bracket endpoints have the same sign");
    }
    if (std::abs(fa) < std::abs(fb)) {
        std::swap(a, b);
        std::swap(fa, fb);
    }
    double c = a, fc = fa, d = b - a;
    bool used_bisection = true;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fb) <= f_tol) return b;
        double s;
        if (fa != fc && fb != fc) {
            // inverse quadratic interpolation
            s = a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) +
                c * fa * fb / ((fc - fa) * (fc - fb));
        } else {
            s = b - fb * (b - a) / (fb - fa);
        }
        double mid = 0.5 * (a + b);
        bool reject = !std::isfinite(s) || (s - mid) * (s - b) >= 0.0 ||
                      (used_bisection && std::abs(s - b) >= 0.5 * std::abs(b - c)) ||
                      (!used_bisection && std::abs(s - b) >= 0.5 * std::abs(d));
        if (reject) {
            s = mid;
            used_bisection = true;
        } else {
            used_bisection = false;
        }
        double fs = f(s);
        if (std::isnan(fs)) {
            throw NumericalError(std::string(what) + ": residual is NaN at " + std::to_string(s));
        }
        d = c - b;
        c = b;
        fc = fb;
        if ((fa < 0.0) != (fs < 0.0)) {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if (std::abs(fa) < std::abs(fb)) {
            std::swap(a, b);
            std::swap(fa, fb);
        }
        double scale = std::max(1.0, std::max(std::abs(a), std::abs(b)));
        if (std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
            return b;
        }
    }
    return b;
}

// Convenience: expand from an initial guess interval, then solve.
template <class F>
double solve_monotone_root(F&& f, double lo, double hi, double f_tol, const char* what,
                           double hard_lo = -std::numeric_limits<double>::infinity(),
                           double hard_hi = std::numeric_limits<double>::infinity()) {
    Bracket br = expand_bracket(f, lo, hi, what, hard_lo, hard_hi);
    return brent_root(f, br, f_tol, what);
}

// Safeguarded Newton for smooth strictly monotone scalar equations: Newton
// steps clipped to a maintained sign-changing bracket, bisection fallback.
// fdf returns {f(x), f'(x)}.
template <class FDF>
double newton_root(FDF&& fdf, Bracket br, double f_tol, const char* what, int max_iter = 100) {
    double lo = br.lo, hi = br.hi, f_lo = br.f_lo, f_hi = br.f_hi;
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo < 0.0) == (f_hi < 0.0)) {
        throw NumericalError(std::string(what) + ": bracket endpoints have the same sign");
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < max_iter; ++it) {
        auto [fx, dfx] = fdf(x);
        if (std::abs(fx) <= f_tol) return x;
        if ((fx < 0.0) == (f_lo < 0.0)) {
            lo = x;
            f_lo = fx;
        } else {
            hi = x;
            f_hi = fx;
        }
        double next_x = x - fx / dfx;
        if (!(dfx != 0.0) || !std::isfinite(next_x) || next_x <= std::min(lo, hi) ||
            next_x >= std::max(lo, hi)) {
            next_x = 0.5 * (lo + hi);
        }
        x = next_x;
        double scale = std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
        if (std::abs(hi - lo) <= 4.0 * std::numeric_limits<double>::epsilon() * scale) {
            return x;
        }
    }
    return x;
}

} // namespace mumarket
