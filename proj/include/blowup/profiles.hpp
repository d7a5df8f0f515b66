#pragma once

// phi_bar (maximal solution of phi' + f(phi) = 0 blowing up at t = 0) by
// inversion of int_phi^inf ds/f = t, and Keller-type barriers.

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "blowup/nonlinearity.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

namespace detail {

// lowest value where f turns positive for good; -inf when f > 0 everywhere
inline double positivity_floor(const Nonlinearity& nl)
{
    if (nl.kind() == NlKind::Exponential && !nl.shifted()) return -kInf;
    return k_zero(nl);
}

inline double log_add(double a, double b)
{
    if (a < b) std::swap(a, b);
    if (!std::isfinite(a)) return a;
    return a + std::log1p(std::exp(b - a));
}

// Find x with G(x) = target for a decreasing G that is +inf at or below floor.
template <class G>
double invert_decreasing(G&& g, double target, double floor, double start, double rel_tol)
{
    double hi = start;
    for (int i = 0; g(hi) >= target; ++i) {
        if (i > 2000) fail(ErrorCode::RootBracketFailed, "value too small to reach");
        hi = std::isfinite(floor) ? floor + 2.0 * (hi - floor) : hi + std::max(1.0, std::abs(hi));
    }
    double lo = hi;
    for (int i = 0; g(lo) <= target; ++i) {
        if (i > 200) fail(ErrorCode::RootBracketFailed, "value too large to reach");
        lo = std::isfinite(floor) ? floor + 0.5 * (lo - floor) : lo - std::max(1.0, std::abs(lo));
    }
    return solve_bracketed([&](double x) { return g(x) - target; }, lo, hi, rel_tol, 1e-15);
}

// Interpolation on increasing x in X = log x.  The ordinate is mapped to
// Y = log(y - shift) on intervals where both ends allow it, else Y = y.  With
// derivatives dy/dx the pieces are cubic Hermite, otherwise linear.
struct MonotoneTable {
    std::vector<double> x, y, dy;
    double shift = 0.0;

    size_t locate(double xv) const
    {
        auto it = std::upper_bound(x.begin(), x.end(), xv);
        return it == x.begin() ? 0 : std::min<size_t>(it - x.begin() - 1, x.size() - 2);
    }

    bool log_piece(size_t i) const { return y[i] - shift > 0 && y[i + 1] - shift > 0; }

    // value on piece i at X
    double piece(size_t i, double X) const
    {
        const double X0 = std::log(x[i]), X1 = std::log(x[i + 1]);
        const double H = X1 - X0, s = (X - X0) / H;
        const bool lg = log_piece(i);
        const double Y0 = lg ? std::log(y[i] - shift) : y[i];
        const double Y1 = lg ? std::log(y[i + 1] - shift) : y[i + 1];
        double Y;
        if (dy.empty()) {
            Y = Y0 + s * (Y1 - Y0);
        } else {
            // dY/dX = x y' / (y - shift) or x y'
            const double m0 = lg ? x[i] * dy[i] / (y[i] - shift) : x[i] * dy[i];
            const double m1 = lg ? x[i + 1] * dy[i + 1] / (y[i + 1] - shift) : x[i + 1] * dy[i + 1];
            const double s2 = s * s, s3 = s2 * s;
            Y = (2 * s3 - 3 * s2 + 1) * Y0 + (s3 - 2 * s2 + s) * H * m0 + (-2 * s3 + 3 * s2) * Y1 +
                (s3 - s2) * H * m1;
        }
        return lg ? shift + std::exp(Y) : Y;
    }

    double eval(double xv) const { return piece(locate(xv), std::log(xv)); }

    // inverse for monotone y, by bisection on the same piece so that
    // eval(inverse(v)) == v to rounding
    double inverse(double yv) const
    {
        const bool decreasing = y.front() > y.back();
        size_t i = 0;
        if (decreasing) {
            auto it = std::upper_bound(y.begin(), y.end(), yv, std::greater<double>());
            i = it == y.begin() ? 0 : std::min<size_t>(it - y.begin() - 1, y.size() - 2);
        } else {
            auto it = std::upper_bound(y.begin(), y.end(), yv);
            i = it == y.begin() ? 0 : std::min<size_t>(it - y.begin() - 1, y.size() - 2);
        }
        double lo = std::log(x[i]), hi = std::log(x[i + 1]);
        for (int it = 0; it < 100 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            const bool above = piece(i, mid) > yv;
            ((above == decreasing) ? lo : hi) = mid;
        }
        return std::exp(0.5 * (lo + hi));
    }
};

} // namespace detail

// int_x^inf ds / f(s); +inf where f(x) <= 0
inline double ode_time_to_infinity(const Nonlinearity& nl, double x)
{
    if (!(nl.f(x) > 0)) return kInf;
    return tail_integral([&](double s) { return -nl.log_f(s); }, x, 1e-14).value;
}

// int_w^inf ds / sqrt(2 F(s)); +inf where F(w) <= 0
inline double keller_distance(const Nonlinearity& nl, double w)
{
    if (!(w >= 0) || !(nl.F(w) > 0)) return kInf;
    return tail_integral([&](double s) { return -0.5 * (std::log(2.0) + nl.log_F(s)); }, w, 1e-14).value;
}

// phi_bar(t) by direct inversion
inline double solve_phi_bar(const Nonlinearity& nl, double t)
{
    const double floor = detail::positivity_floor(nl);
    const double start = std::isfinite(floor) ? std::max(floor, 0.0) + 1.0 : 1.0;
    return detail::invert_decreasing([&](double x) { return ode_time_to_infinity(nl, x); }, t, floor, start,
                                     1e-13);
}

// half-line barrier g(rho) by direct inversion; k0 beyond the barrier's reach
inline double solve_keller(const Nonlinearity& nl, double rho)
{
    const double k0 = k_zero(nl);
    if (rho >= keller_distance(nl, k0 + 1e-300)) return k0;
    return detail::invert_decreasing([&](double w) { return keller_distance(nl, w); }, rho, k0, k0 + 1.0, 1e-13);
}

class BlowupProfile {
public:
    BlowupProfile() = default;
    BlowupProfile(Nonlinearity nl, std::vector<double> t, std::vector<double> phi, double k0, double tol)
        : nl_(std::move(nl)), k0_(k0), tol_(tol)
    {
        table_.x = std::move(t);
        table_.y = std::move(phi);
        table_.shift = std::isfinite(detail::positivity_floor(nl_)) ? k0_ : 0.0;
        table_.dy.resize(table_.y.size());
        for (size_t i = 0; i < table_.y.size(); ++i) table_.dy[i] = -nl_.f(table_.y[i]);
    }

    const Nonlinearity& nl() const { return nl_; }
    const std::vector<double>& t() const { return table_.x; }
    const std::vector<double>& phi() const { return table_.y; }
    double t_min() const { return table_.x.front(); }
    double t_max() const { return table_.x.back(); }
    double k0() const { return k0_; }
    double tolerance() const { return tol_; }

    // phi_bar(t); outside the knot range falls back to a direct inversion
    double operator()(double t) const
    {
        if (!(t > 0)) return kInf;
        if (t < t_min() || t > t_max()) return solve_phi_bar(nl_, t);
        return table_.eval(t);
    }

    // t with phi_bar(t) = k
    double t_k(double k) const
    {
        if (!(k <= table_.y.front() && k >= table_.y.back()))
            fail(ErrorCode::OutOfRange, "k=" + std::to_string(k) + " outside the profile's value range");
        return table_.inverse(k);
    }

    double inversion_residual() const
    {
        double worst = 0;
        for (size_t i = 0; i < table_.x.size(); ++i)
            worst = std::max(worst, std::abs(ode_time_to_infinity(nl_, table_.y[i]) - table_.x[i]));
        return worst;
    }

    json header() const
    {
        return {{"object", "phi_bar"}, {"nl", nl_.to_json()}, {"t_min", t_min()}, {"t_max", t_max()},
                {"knots", table_.x.size()}, {"k0", k0_}, {"root_tolerance", tol_}};
    }

    void write_csv(std::ostream& os) const
    {
        os << "# " << header().dump() << "\n" << "t,phi\n";
        os.precision(17);
        for (size_t i = 0; i < table_.x.size(); ++i) os << table_.x[i] << "," << table_.y[i] << "\n";
    }

private:
    Nonlinearity nl_;
    detail::MonotoneTable table_;
    double k0_ = 0.0;
    double tol_ = 1e-10;
};

// knots == 0 picks 32 per decade
inline BlowupProfile build_phi_bar(const Nonlinearity& nl, double t_min, double t_max, int knots = 0)
{
    if (!(t_min > 0 && t_max > t_min)) fail(ErrorCode::InvalidArgument, "need 0 < t_min < t_max");
    const double k0 = k_zero(nl);
    const double floor = detail::positivity_floor(nl);
    const double a = std::isfinite(floor) ? std::max(floor, 0.0) + 1.0 : 1.0;
    if (!ode_blowup_condition(nl, a).holds)
        fail(ErrorCode::ConditionFailed, nl.label() + ": int ds/f diverges, no blow-up profile");
    if (knots <= 0) knots = std::max(8, static_cast<int>(std::ceil(32 * std::log10(t_max / t_min))) + 1);
    std::vector<double> t(knots), phi(knots);
    for (int j = 0; j < knots; ++j) {
        t[j] = j == knots - 1 ? t_max : t_min * std::pow(t_max / t_min, static_cast<double>(j) / (knots - 1));
        phi[j] = solve_phi_bar(nl, t[j]);
    }
    return BlowupProfile(nl, std::move(t), std::move(phi), k0, 1e-10);
}

// Half-line barrier: int_g^inf ds/sqrt(2F) = rho.  Also serves as the
// transform v = G(w) used by the ladder extrapolation.
class KellerBarrier {
public:
    KellerBarrier() = default;
    KellerBarrier(Nonlinearity nl, std::vector<double> rho, std::vector<double> g, double k0)
        : nl_(std::move(nl)), k0_(k0)
    {
        table_.x = std::move(rho);
        table_.y = std::move(g);
        table_.shift = k0_;
        table_.dy.resize(table_.y.size());
        for (size_t i = 0; i < table_.y.size(); ++i) table_.dy[i] = -std::sqrt(2.0 * std::max(0.0, nl_.F(table_.y[i])));
    }

    const Nonlinearity& nl() const { return nl_; }
    const std::vector<double>& rho() const { return table_.x; }
    const std::vector<double>& g_values() const { return table_.y; }
    double k0() const { return k0_; }

    double g(double rho) const
    {
        if (!(rho > 0)) return kInf;
        if (rho < table_.x.front() || rho > table_.x.back()) return solve_keller(nl_, rho);
        return table_.eval(rho);
    }
    double operator()(double rho) const { return g(rho); }

    // G(w) = rho with g(rho) = w; +inf at or below k0
    double distance(double w) const
    {
        if (!(w > k0_)) return kInf;
        if (w > table_.y.front() || w < table_.y.back()) return keller_distance(nl_, w);
        return table_.inverse(w);
    }

    double identity_residual() const
    {
        double worst = 0;
        for (size_t i = 0; i < table_.x.size(); ++i)
            if (table_.y[i] > k0_) worst = std::max(worst, std::abs(keller_distance(nl_, table_.y[i]) - table_.x[i]));
        return worst;
    }

    json header() const
    {
        return {{"object", "keller_barrier"}, {"nl", nl_.to_json()}, {"rho_min", table_.x.front()},
                {"rho_max", table_.x.back()}, {"knots", table_.x.size()}, {"k0", k0_}};
    }

    void write_csv(std::ostream& os) const
    {
        os << "# " << header().dump() << "\n" << "rho,g\n";
        os.precision(17);
        for (size_t i = 0; i < table_.x.size(); ++i) os << table_.x[i] << "," << table_.y[i] << "\n";
    }

private:
    Nonlinearity nl_;
    detail::MonotoneTable table_;
    double k0_ = 0.0;
};

inline KellerBarrier build_keller_barrier(const Nonlinearity& nl, double rho_min, double rho_max,
                                          int per_decade = 32)
{
    if (!(rho_min > 0 && rho_max > rho_min)) fail(ErrorCode::InvalidArgument, "need 0 < rho_min < rho_max");
    const double k0 = k_zero(nl);
    if (!keller_osserman(nl, std::max(k0, 0.0) + 1.0).holds)
        fail(ErrorCode::ConditionFailed, nl.label() + ": Keller-Osserman integral diverges");
    const double w_hi = solve_keller(nl, rho_min);
    const double w_lo = solve_keller(nl, rho_max);
    // knots are placed in w (geometric in w - k0) and mapped by G directly
    const double span_hi = w_hi - k0;
    const double span_lo = w_lo > k0 ? w_lo - k0 : 1e-12 * span_hi;
    const int n = std::max(8, static_cast<int>(std::ceil(per_decade * std::log10(span_hi / span_lo))) + 1);
    std::vector<double> rho(n), g(n);
    for (int j = 0; j < n; ++j) {
        const double w = k0 + span_hi * std::pow(span_lo / span_hi, static_cast<double>(j) / (n - 1));
        g[j] = w;
        rho[j] = j == 0 ? rho_min : keller_distance(nl, w);
    }
    if (w_lo > k0) rho.back() = rho_max;
    for (int j = 1; j < n; ++j)
        if (!(rho[j] > rho[j - 1])) fail(ErrorCode::RootBracketFailed, "barrier knots are not monotone");
    return KellerBarrier(nl, std::move(rho), std::move(g), k0);
}

// ------------------------------------------------------------ ball barrier

// Half length of the interval on which the symmetric large solution has
// centre value c: int_c^inf ds / sqrt(2(F(s) - F(c))).  s = c + sigma^2
// removes the endpoint singularity.
inline double interval_blowup_half_length(const Nonlinearity& nl, double c)
{
    if (!(nl.f(c) > 0)) return kInf;
    const double Fc = nl.F(c), fc = nl.f(c), dfc = nl.df(c);
    const double lFc = Fc != 0 ? std::log(std::abs(Fc)) : -kInf;
    // log(F(s) - F(c)) without overflow far out and without cancellation near c
    auto log_diff = [&](double d) {
        const double s = c + d;
        if (d < 1e-4 * std::max(1.0, std::abs(c))) return std::log(fc * d + 0.5 * dfc * d * d);
        const double lF = nl.log_F(s);
        if (lF - lFc > 1.0) return lF + std::log1p(-std::copysign(std::exp(lFc - lF), Fc));
        return std::log(nl.F(s) - Fc);
    };
    auto log_g = [&](double sigma) {
        return std::log(2.0 * sigma) - 0.5 * (std::log(2.0) + log_diff(sigma * sigma));
    };
    auto g = [&](double sigma) { return std::exp(log_g(sigma)); };
    QuadResult head = integrate(g, 0.0, 1.0, 1e-13);
    QuadResult tail = tail_integral(log_g, 1.0, 1e-13);
    return head.value + tail.value;
}

// Blow-up radius of w'' + (N-1)/r w' = f(w), w(0) = c, w'(0) = 0, by shooting
// with adaptive Dormand-Prince steps, closed by the energy estimate of the
// remaining distance once w is large.
inline double shoot_blowup_radius(const Nonlinearity& nl, int dims, double c)
{
    if (!(nl.f(c) > 0)) return kInf;
    const double fc = nl.f(c);
    const double len = 1.0 / std::sqrt(std::max({nl.df(c), fc / std::max(std::abs(c), 1e-300), 1e-300}));
    double r = 1e-4 * len;
    const double N = dims;
    double w = c + fc * r * r / (2 * N), p = fc * r / N;
    auto rhs = [&](double rr, double ww, double pp, double& dw, double& dp) {
        dw = pp;
        dp = nl.f(ww) - (N - 1) / rr * pp;
    };
    auto remaining = [&](double ww, double pp) {
        const double lFw = nl.log_F(ww);
        const double lp2 = 2.0 * std::log(pp);
        auto log_g = [&](double s) {
            const double lFs = nl.log_F(s);
            const double ld = lFs + std::log1p(-std::exp(lFw - lFs));
            return -0.5 * detail::log_add(lp2, std::log(2.0) + ld);
        };
        return tail_integral(log_g, ww, 1e-10).value;
    };
    static constexpr double a21 = 1. / 5, a31 = 3. / 40, a32 = 9. / 40, a41 = 44. / 45, a42 = -56. / 15,
                            a43 = 32. / 9, a51 = 19372. / 6561, a52 = -25360. / 2187, a53 = 64448. / 6561,
                            a54 = -212. / 729, a61 = 9017. / 3168, a62 = -355. / 33, a63 = 46732. / 5247,
                            a64 = 49. / 176, a65 = -5103. / 18656, b1 = 35. / 384, b3 = 500. / 1113,
                            b4 = 125. / 192, b5 = -2187. / 6784, b6 = 11. / 84, e1 = 71. / 57600,
                            e3 = -71. / 16695, e4 = 71. / 1920, e5 = -17253. / 339200, e6 = 22. / 525,
                            e7 = -1. / 40;
    double dt = 0.1 * len;
    double next_check = std::max(4.0 * std::abs(c), c + 1.0);
    for (int step = 0; step < 200000; ++step) {
        if (w >= next_check) {
            const double rem = remaining(w, p);
            if (rem <= 1e-9 * r) return r + rem;
            next_check = 2.0 * w;
        }
        double k1w, k1p, k2w, k2p, k3w, k3p, k4w, k4p, k5w, k5p, k6w, k6p, k7w, k7p;
        rhs(r, w, p, k1w, k1p);
        rhs(r + dt / 5, w + dt * a21 * k1w, p + dt * a21 * k1p, k2w, k2p);
        rhs(r + 3 * dt / 10, w + dt * (a31 * k1w + a32 * k2w), p + dt * (a31 * k1p + a32 * k2p), k3w, k3p);
        rhs(r + 4 * dt / 5, w + dt * (a41 * k1w + a42 * k2w + a43 * k3w),
            p + dt * (a41 * k1p + a42 * k2p + a43 * k3p), k4w, k4p);
        rhs(r + 8 * dt / 9, w + dt * (a51 * k1w + a52 * k2w + a53 * k3w + a54 * k4w),
            p + dt * (a51 * k1p + a52 * k2p + a53 * k3p + a54 * k4p), k5w, k5p);
        rhs(r + dt, w + dt * (a61 * k1w + a62 * k2w + a63 * k3w + a64 * k4w + a65 * k5w),
            p + dt * (a61 * k1p + a62 * k2p + a63 * k3p + a64 * k4p + a65 * k5p), k6w, k6p);
        const double wn = w + dt * (b1 * k1w + b3 * k3w + b4 * k4w + b5 * k5w + b6 * k6w);
        const double pn = p + dt * (b1 * k1p + b3 * k3p + b4 * k4p + b5 * k5p + b6 * k6p);
        bool ok = std::isfinite(wn) && std::isfinite(pn);
        double err = kInf;
        if (ok) {
            rhs(r + dt, wn, pn, k7w, k7p);
            const double ew = dt * (e1 * k1w + e3 * k3w + e4 * k4w + e5 * k5w + e6 * k6w + e7 * k7w);
            const double ep = dt * (e1 * k1p + e3 * k3p + e4 * k4p + e5 * k5p + e6 * k6p + e7 * k7p);
            err = std::max(std::abs(ew) / (1e-11 * (1 + std::abs(wn))), std::abs(ep) / (1e-11 * (1 + std::abs(pn))));
        }
        if (ok && err <= 1.0) {
            r += dt;
            w = wn;
            p = pn;
        }
        const double fac = ok ? std::clamp(0.9 * std::pow(std::max(err, 1e-10), -0.2), 0.2, 5.0) : 0.2;
        dt *= fac;
    }
    fail(ErrorCode::RootBracketFailed, "radial shooting did not reach blow-up");
}

// quadrature in 1D, shooting otherwise
inline double ball_blowup_radius(const Nonlinearity& nl, int dims, double c)
{
    return dims == 1 ? interval_blowup_half_length(nl, c) : shoot_blowup_radius(nl, dims, c);
}

inline double solve_ball(const Nonlinearity& nl, int dims, double rho)
{
    const double k0 = k_zero(nl);
    return detail::invert_decreasing([&](double c) { return ball_blowup_radius(nl, dims, c); }, rho, k0, k0 + 1.0,
                                     1e-12);
}

// Centre value of the large solution in the ball of radius rho in R^dims.
// An upper barrier for every solution at points whose distance to the
// boundary is rho.
class BallBarrier {
public:
    BallBarrier() = default;
    BallBarrier(Nonlinearity nl, int dims, std::vector<double> rho, std::vector<double> c, double k0)
        : nl_(std::move(nl)), dims_(dims), k0_(k0)
    {
        table_.x = std::move(rho);
        table_.y = std::move(c);
        table_.shift = k0_;
    }
    int dims() const { return dims_; }
    const std::vector<double>& rho() const { return table_.x; }
    const std::vector<double>& g_values() const { return table_.y; }

    double g(double rho) const
    {
        if (!(rho > 0)) return kInf;
        if (rho < table_.x.front() || rho > table_.x.back()) return solve_ball(nl_, dims_, rho);
        return table_.eval(rho);
    }
    double operator()(double rho) const { return g(rho); }

private:
    Nonlinearity nl_;
    int dims_ = 1;
    detail::MonotoneTable table_;
    double k0_ = 0.0;
};

inline BallBarrier build_ball_barrier(const Nonlinearity& nl, int dims, double rho_min, double rho_max,
                                      int per_decade = 24)
{
    if (dims < 1 || dims > 2) fail(ErrorCode::InvalidArgument, "ball barrier supports N = 1, 2");
    const double k0 = k_zero(nl);
    if (!keller_osserman(nl, std::max(k0, 0.0) + 1.0).holds)
        fail(ErrorCode::ConditionFailed, nl.label() + ": Keller-Osserman integral diverges");
    const double c_hi = solve_ball(nl, dims, rho_min), c_lo = solve_ball(nl, dims, rho_max);
    const double span_hi = c_hi - k0, span_lo = c_lo - k0;
    const int n = std::max(8, static_cast<int>(std::ceil(per_decade * std::log10(span_hi / span_lo))) + 1);
    std::vector<double> rho(n), c(n);
    for (int j = 0; j < n; ++j) {
        c[j] = k0 + span_hi * std::pow(span_lo / span_hi, static_cast<double>(j) / (n - 1));
        rho[j] = j == 0 ? rho_min : (j == n - 1 ? rho_max : ball_blowup_radius(nl, dims, c[j]));
    }
    return BallBarrier(nl, dims, std::move(rho), std::move(c), k0);
}

} // namespace blowup
