#pragma once

// Adaptive Gauss-Kronrod quadrature, semi-infinite integrals of log-space
// integrands, and a bracketing root finder.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "blowup/error.hpp"

namespace blowup {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    int evals = 0;
    bool converged = true;
};

namespace detail {

// 15-point Kronrod extension of the 7-point Gauss rule
inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

} // namespace detail

template <class F>
QuadResult gk15(F&& f, double a, double b)
{
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    const double fc = f(c);
    double kron = fc * detail::kWgk[7];
    double gauss = fc * detail::kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = hw * detail::kXgk[j];
        const double s = f(c - dx) + f(c + dx);
        kron += detail::kWgk[j] * s;
        if (j % 2 == 1) gauss += detail::kWg[j / 2] * s;
    }
    QuadResult r;
    r.value = kron * hw;
    r.error = std::abs((kron - gauss) * hw);
    r.evals = 15;
    return r;
}

// Global adaptive bisection: always split the interval with the largest error.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-13, double abs_tol = 0.0,
                     int max_intervals = 4000)
{
    struct Piece {
        double a, b, value, error;
        bool operator<(const Piece& o) const { return error < o.error; }
    };
    std::priority_queue<Piece> heap;
    QuadResult first = gk15(f, a, b);
    heap.push({a, b, first.value, first.error});
    double total = first.value, err = first.error;
    int evals = first.evals;
    while (err > std::max(abs_tol, rel_tol * std::abs(total)) &&
           static_cast<int>(heap.size()) < max_intervals) {
        Piece p = heap.top();
        if (p.error <= 0.0) break;
        const double m = 0.5 * (p.a + p.b);
        if (!(m > p.a && m < p.b)) break;
        heap.pop();
        QuadResult l = gk15(f, p.a, m), r = gk15(f, m, p.b);
        evals += 30;
        total += l.value + r.value - p.value;
        err += l.error + r.error - p.error;
        heap.push({p.a, m, l.value, l.error});
        heap.push({m, p.b, r.value, r.error});
    }
    // re-sum to shed accumulated cancellation in the running totals
    total = 0.0;
    err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    QuadResult out;
    out.value = total;
    out.error = err;
    out.evals = evals;
    out.converged = err <= std::max(abs_tol, rel_tol * std::abs(total)) * 10.0;
    return out;
}

// Integral over [a, inf) of exp(log_g(s)).  For a > 0 we integrate in
// y = log(s/a) in chunks and close with an exponential-tail estimate, which
// keeps slow algebraic tails (s^-1.5) accurate.  For a <= 0 the piece [a, 1]
// is done directly first.
template <class LogG>
QuadResult tail_integral(LogG&& log_g, double a, double rel_tol = 1e-13)
{
    QuadResult out;
    double start = a;
    if (a <= 0.0) {
        auto g = [&](double s) { return std::exp(log_g(s)); };
        QuadResult head = integrate(g, a, 1.0, rel_tol);
        out.value += head.value;
        out.error += head.error;
        out.evals += head.evals;
        out.converged = head.converged;
        start = 1.0;
    }
    const double la = std::log(start);
    auto log_h = [&](double y) { return log_g(start * std::exp(y)) + la + y; };
    auto h = [&](double y) { return std::exp(log_h(y)); };
    const double y_max = std::log(1e300) - la;
    const double chunk = 4.0;
    double y = 0.0;
    for (;;) {
        const double y1 = std::min(y + chunk, y_max);
        QuadResult piece = integrate(h, y, y1, rel_tol * 0.1);
        out.value += piece.value;
        out.error += piece.error;
        out.evals += piece.evals;
        out.converged = out.converged && piece.converged;
        y = y1;
        const double l1 = log_h(y - 0.5), l2 = log_h(y);
        out.evals += 2;
        if (!std::isfinite(l2) && l2 < 0) break;  // integrand underflowed to zero
        const double rate = (l1 - l2) / 0.5;
        if (rate > 0.0) {
            const double tail = std::exp(l2) / rate;
            if (tail <= rel_tol * std::abs(out.value)) {
                out.value += tail;
                out.error += 0.5 * tail;
                break;
            }
        }
        if (y >= y_max) {
            out.converged = false;
            break;
        }
    }
    return out;
}

// Root of a monotone function on a sign-changing bracket: bisection until the
// bracket is tight, then Illinois false position.  Brackets are never lost.
template <class F>
double solve_bracketed(F&& fn, double lo, double hi, double rel_tol = 1e-12, double abs_tol = 1e-300)
{
    double flo = fn(lo), fhi = fn(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0) == (fhi > 0))
        fail(ErrorCode::RootBracketFailed, "no sign change on the bracket");
    auto tight = [&](double width, double scale) {
        return width <= std::max(abs_tol, rel_tol * scale);
    };
    for (int it = 0; it < 200; ++it) {
        const double scale = std::max(std::abs(lo), std::abs(hi));
        if (std::abs(hi - lo) <= 1e-4 * scale || tight(std::abs(hi - lo), scale)) break;
        const double mid = 0.5 * (lo + hi);
        const double fm = fn(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    int side = 0;
    for (int it = 0; it < 200; ++it) {
        const double scale = std::max(std::abs(lo), std::abs(hi));
        if (tight(std::abs(hi - lo), scale)) break;
        double x = (lo * fhi - hi * flo) / (fhi - flo);
        if (!(x > std::min(lo, hi) && x < std::max(lo, hi))) x = 0.5 * (lo + hi);
        const double fx = fn(x);
        if (fx == 0.0) return x;
        if ((fx > 0) == (flo > 0)) {
            lo = x;
            flo = fx;
            if (side == -1) fhi *= 0.5;
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if (side == 1) flo *= 0.5;
            side = 1;
        }
    }
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
}

} // namespace blowup
