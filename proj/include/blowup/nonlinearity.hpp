#pragma once

// The absorption term f, its antiderivative F(s) = int_0^s f, and the scalar
// conditions imposed on it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "blowup/error.hpp"
#include "blowup/quadrature.hpp"

namespace blowup {

using json = nlohmann::json;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class NlKind { Power, Exponential, Linear, Tabulated };

class Nonlinearity {
public:
    static Nonlinearity power(double q)
    {
        if (!(q > 1.0)) fail(ErrorCode::InvalidArgument, "power exponent must exceed 1");
        Nonlinearity n;
        n.kind_ = NlKind::Power;
        n.p_ = q;
        return n;
    }
    static Nonlinearity exponential(double a, bool shifted = true)
    {
        if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "exponential rate must be positive");
        Nonlinearity n;
        n.kind_ = NlKind::Exponential;
        n.p_ = a;
        n.shifted_ = shifted;
        return n;
    }
    static Nonlinearity linear(double slope)
    {
        if (!(slope >= 0.0)) fail(ErrorCode::InvalidArgument, "linear slope must be nonnegative");
        Nonlinearity n;
        n.kind_ = NlKind::Linear;
        n.p_ = slope;
        return n;
    }
    static Nonlinearity tabulated(std::vector<std::pair<double, double>> samples)
    {
        if (samples.size() < 2) fail(ErrorCode::InvalidArgument, "table needs at least two samples");
        for (size_t i = 1; i < samples.size(); ++i) {
            if (!(samples[i].first > samples[i - 1].first))
                fail(ErrorCode::InvalidArgument, "table abscissae must increase strictly");
            if (samples[i].second < samples[i - 1].second)
                fail(ErrorCode::InvalidArgument, "tabulated f must be nondecreasing");
        }
        Nonlinearity n;
        n.kind_ = NlKind::Tabulated;
        n.table_ = std::move(samples);
        n.cumulative_.assign(n.table_.size(), 0.0);
        for (size_t i = 1; i < n.table_.size(); ++i) {
            const auto& [s0, f0] = n.table_[i - 1];
            const auto& [s1, f1] = n.table_[i];
            n.cumulative_[i] = n.cumulative_[i - 1] + 0.5 * (f0 + f1) * (s1 - s0);
        }
        n.anchor_ = std::clamp(0.0, n.table_.front().first, n.table_.back().first);
        n.anchor_value_ = n.integral_from_start(n.anchor_);
        return n;
    }

    static Nonlinearity from_json(const json& j)
    {
        try {
            const std::string kind = j.at("kind").get<std::string>();
            if (kind == "power") return power(j.at("q").get<double>());
            if (kind == "exponential")
                return exponential(j.at("a").get<double>(), j.value("shifted", true));
            if (kind == "linear") return linear(j.at("slope").get<double>());
            if (kind == "tabulated") {
                std::vector<std::pair<double, double>> s;
                for (const auto& row : j.at("samples")) s.emplace_back(row.at(0).get<double>(), row.at(1).get<double>());
                return tabulated(std::move(s));
            }
            fail(ErrorCode::InvalidArgument, "unknown nonlinearity kind '" + kind + "'");
        } catch (const json::exception& e) {
            fail(ErrorCode::InvalidArgument, std::string("bad nonlinearity descriptor: ") + e.what());
        }
    }

    // "power:3", "linear:1", "exp:1", "exp:1:unshifted", or an inline JSON object
    static Nonlinearity parse(std::string_view text)
    {
        if (!text.empty() && text.front() == '{') {
            json j;
            try {
                j = json::parse(text);
            } catch (const json::exception& e) {
                fail(ErrorCode::InvalidArgument, e.what());
            }
            return from_json(j);
        }
        std::vector<std::string> parts;
        std::stringstream ss{std::string(text)};
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() < 2) fail(ErrorCode::InvalidArgument, "expected kind:parameter");
        double v = 0.0;
        try {
            v = std::stod(parts[1]);
        } catch (const std::exception&) {
            fail(ErrorCode::InvalidArgument, "bad number in '" + std::string(text) + "'");
        }
        const std::string& k = parts[0];
        if (k == "power") return power(v);
        if (k == "linear") return linear(v);
        if (k == "exp" || k == "exponential") {
            bool shifted = true;
            if (parts.size() > 2) {
                if (parts[2] == "unshifted") shifted = false;
                else if (parts[2] != "shifted") fail(ErrorCode::InvalidArgument, "expected shifted|unshifted");
            }
            return exponential(v, shifted);
        }
        fail(ErrorCode::InvalidArgument, "unknown nonlinearity kind '" + k + "'");
    }

    json to_json() const
    {
        switch (kind_) {
        case NlKind::Power: return {{"kind", "power"}, {"q", p_}};
        case NlKind::Exponential: return {{"kind", "exponential"}, {"a", p_}, {"shifted", shifted_}};
        case NlKind::Linear: return {{"kind", "linear"}, {"slope", p_}};
        case NlKind::Tabulated: {
            json s = json::array();
            for (const auto& [x, y] : table_) s.push_back({x, y});
            return {{"kind", "tabulated"}, {"samples", s}};
        }
        }
        return {};
    }

    std::string label() const
    {
        std::ostringstream os;
        switch (kind_) {
        case NlKind::Power: os << "power(q=" << p_ << ")"; break;
        case NlKind::Exponential: os << "exponential(a=" << p_ << (shifted_ ? ",shifted)" : ")"); break;
        case NlKind::Linear: os << "linear(slope=" << p_ << ")"; break;
        case NlKind::Tabulated: os << "tabulated(" << table_.size() << " samples)"; break;
        }
        return os.str();
    }

    NlKind kind() const { return kind_; }
    double parameter() const { return p_; }
    bool shifted() const { return shifted_; }

    double domain_floor() const { return kind_ == NlKind::Tabulated ? table_.front().first : -kInf; }
    double domain_ceiling() const { return kind_ == NlKind::Tabulated ? table_.back().first : kInf; }

    double f(double s) const
    {
        switch (kind_) {
        case NlKind::Power: return std::copysign(std::pow(std::abs(s), p_), s);
        case NlKind::Exponential: return shifted_ ? std::expm1(p_ * s) : std::exp(p_ * s);
        case NlKind::Linear: return p_ * s;
        case NlKind::Tabulated: {
            const size_t i = segment(s);
            const auto& [s0, f0] = table_[i];
            const auto& [s1, f1] = table_[i + 1];
            return f0 + (f1 - f0) * (s - s0) / (s1 - s0);
        }
        }
        return kNaN;
    }

    // derivative; for the table this is the slope of the segment containing s
    double df(double s) const
    {
        switch (kind_) {
        case NlKind::Power: return p_ * std::pow(std::abs(s), p_ - 1.0);
        case NlKind::Exponential: return p_ * std::exp(p_ * s);
        case NlKind::Linear: return p_;
        case NlKind::Tabulated: {
            const size_t i = segment(s);
            return (table_[i + 1].second - table_[i].second) / (table_[i + 1].first - table_[i].first);
        }
        }
        return kNaN;
    }

    double F(double s) const
    {
        switch (kind_) {
        case NlKind::Power: return std::pow(std::abs(s), p_ + 1.0) / (p_ + 1.0);
        case NlKind::Exponential: {
            const double x = p_ * s;
            if (!shifted_) return std::expm1(x) / p_;
            return expm1_minus_x(x) / p_;
        }
        case NlKind::Linear: return 0.5 * p_ * s * s;
        case NlKind::Tabulated: return integral_from_start(s) - anchor_value_;
        }
        return kNaN;
    }

    // log f(s) where f(s) > 0, -inf elsewhere; no overflow for large s
    double log_f(double s) const
    {
        switch (kind_) {
        case NlKind::Power: return s > 0 ? p_ * std::log(s) : -kInf;
        case NlKind::Exponential: {
            const double x = p_ * s;
            if (!shifted_) return x;
            if (x <= 0) return -kInf;
            return x + std::log1p(-std::exp(-x));
        }
        case NlKind::Linear: return (s > 0 && p_ > 0) ? std::log(p_) + std::log(s) : -kInf;
        case NlKind::Tabulated: {
            const double v = f(s);
            return v > 0 ? std::log(v) : -kInf;
        }
        }
        return kNaN;
    }

    double log_F(double s) const
    {
        switch (kind_) {
        case NlKind::Power: return s != 0 ? (p_ + 1.0) * std::log(std::abs(s)) - std::log(p_ + 1.0) : -kInf;
        case NlKind::Exponential: {
            const double x = p_ * s;
            if (x > 30.0) {
                const double rest = shifted_ ? (1.0 + x) * std::exp(-x) : std::exp(-x);
                return x - std::log(p_) + std::log1p(-rest);
            }
            const double v = F(s);
            return v > 0 ? std::log(v) : -kInf;
        }
        case NlKind::Linear: return (s != 0 && p_ > 0) ? std::log(0.5 * p_) + 2.0 * std::log(std::abs(s)) : -kInf;
        case NlKind::Tabulated: {
            const double v = F(s);
            return v > 0 ? std::log(v) : -kInf;
        }
        }
        return kNaN;
    }

    const std::vector<std::pair<double, double>>& table() const { return table_; }

private:
    static double expm1_minus_x(double x)
    {
        if (std::abs(x) < 0.1) {
            double term = x * x / 2.0, sum = 0.0;
            for (int n = 3; n < 20; ++n) {
                sum += term;
                term *= x / n;
            }
            return sum;
        }
        return std::expm1(x) - x;
    }

    size_t segment(double s) const
    {
        if (!(s >= table_.front().first) || !(s <= table_.back().first))
            fail(ErrorCode::OutOfDomain, "argument " + std::to_string(s) + " outside the tabulated range");
        auto it = std::upper_bound(table_.begin(), table_.end(), s,
                                   [](double v, const auto& p) { return v < p.first; });
        size_t i = static_cast<size_t>(it - table_.begin());
        return i == 0 ? 0 : std::min(i - 1, table_.size() - 2);
    }

    double integral_from_start(double s) const
    {
        const size_t i = segment(s);
        const auto& [s0, f0] = table_[i];
        const double fs = f(s);
        return cumulative_[i] + 0.5 * (f0 + fs) * (s - s0);
    }

    NlKind kind_ = NlKind::Power;
    double p_ = 2.0;
    bool shifted_ = true;
    std::vector<std::pair<double, double>> table_;
    std::vector<double> cumulative_;
    double anchor_ = 0.0;
    double anchor_value_ = 0.0;
};

// ---------------------------------------------------------------- verdicts

enum class Condition { KellerOsserman, OdeBlowup, WeakSingularity, ExpOrderFinite, SuperadditiveDefect, ThetaScaling };

inline std::string_view to_string(Condition c)
{
    switch (c) {
    case Condition::KellerOsserman: return "KellerOsserman";
    case Condition::OdeBlowup: return "OdeBlowup";
    case Condition::WeakSingularity: return "WeakSingularity";
    case Condition::ExpOrderFinite: return "ExpOrderFinite";
    case Condition::SuperadditiveDefect: return "SuperadditiveDefect";
    case Condition::ThetaScaling: return "ThetaScaling";
    }
    return "Unknown";
}

struct ConditionVerdict {
    Condition condition = Condition::KellerOsserman;
    bool holds = false;
    double value = kNaN;
    double error_bound = 0.0;
    std::vector<std::string> flags;

    bool has_flag(std::string_view f) const { return std::find(flags.begin(), flags.end(), f) != flags.end(); }

    json to_json() const
    {
        json j;
        j["condition"] = std::string(to_string(condition));
        j["holds"] = holds;
        j["value"] = std::isfinite(value) ? json(value) : json(nullptr);
        j["error_bound"] = std::isfinite(error_bound) ? json(error_bound) : json(nullptr);
        j["flags"] = flags;
        if (!std::isfinite(value)) j["flags"].push_back(value > 0 ? "value_infinite" : "value_undefined");
        return j;
    }
};

// Tail behaviour of a positive integrand g, given as log g, on [10 b, 1e4 b].
struct TailAnalysis {
    enum Verdict { Converges, Diverges, Inconclusive };
    double slope = kNaN;      // d log g / d log s
    double log_slope = kNaN;  // d log(s g) / d log log s, used inside the critical band
    Verdict verdict = Inconclusive;
};

namespace detail {

inline double ls_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    double mx = 0, my = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

} // namespace detail

template <class LogG>
TailAnalysis analyze_tail(LogG&& log_g, double a)
{
    constexpr double band = 0.05;
    const double base = std::max(a, 1.0);
    const int n = 25;
    std::vector<double> ls, lg, lls, lsg;
    bool underflow = false;
    for (int j = 0; j < n; ++j) {
        const double s = base * std::pow(10.0, 1.0 + 3.0 * j / (n - 1));
        const double v = log_g(s);
        if (!std::isfinite(v)) {
            if (v < 0) underflow = true;
            continue;
        }
        ls.push_back(std::log(s));
        lg.push_back(v);
        lls.push_back(std::log(std::log(s)));
        lsg.push_back(v + std::log(s));
    }
    TailAnalysis t;
    if (ls.size() < 3) {
        t.verdict = underflow ? TailAnalysis::Converges : TailAnalysis::Inconclusive;
        return t;
    }
    t.slope = detail::ls_slope(ls, lg);
    t.log_slope = detail::ls_slope(lls, lsg);
    if (t.slope < -1.0 - band) t.verdict = TailAnalysis::Converges;
    else if (t.slope > -1.0 + band) t.verdict = TailAnalysis::Diverges;
    else if (std::abs(t.slope + 1.0) < 0.01 && t.log_slope < 0.5) t.verdict = TailAnalysis::Diverges;
    else if (t.log_slope > 1.5) t.verdict = TailAnalysis::Converges;
    else t.verdict = TailAnalysis::Inconclusive;
    return t;
}

namespace detail {

template <class LogG>
ConditionVerdict integral_condition(Condition c, LogG&& log_g, double a)
{
    ConditionVerdict v;
    v.condition = c;
    TailAnalysis t = analyze_tail(log_g, a);
    if (t.verdict == TailAnalysis::Inconclusive)
        fail(ErrorCode::InconclusiveTail,
             std::string(to_string(c)) + ": tail slope " + std::to_string(t.slope) + " is near the critical -1");
    if (t.verdict == TailAnalysis::Diverges) {
        v.holds = false;
        v.value = kInf;
        v.flags.push_back("diverges");
        return v;
    }
    QuadResult q = tail_integral(log_g, a);
    v.holds = q.converged && std::isfinite(q.value);
    v.value = q.value;
    v.error_bound = q.error + 1e-14 * std::abs(q.value);
    if (!q.converged) v.flags.push_back("quadrature_not_converged");
    return v;
}

inline void require_positive_start(const Nonlinearity& nl, double a)
{
    if (!(nl.f(a) > 0.0))
        fail(ErrorCode::InvalidArgument, "lower limit must satisfy f(a) > 0");
}

} // namespace detail

// int_a^inf ds / sqrt(F(s))
inline ConditionVerdict keller_osserman(const Nonlinearity& nl, double a)
{
    detail::require_positive_start(nl, a);
    return detail::integral_condition(
        Condition::KellerOsserman, [&](double s) { return -0.5 * nl.log_F(s); }, a);
}

// int_a^inf ds / f(s)
inline ConditionVerdict ode_blowup_condition(const Nonlinearity& nl, double a)
{
    detail::require_positive_start(nl, a);
    return detail::integral_condition(Condition::OdeBlowup, [&](double s) { return -nl.log_f(s); }, a);
}

// int_a^inf s^{-2(N-1)/(N-2)} f(s) ds; a > 0 keeps the weight finite
inline ConditionVerdict weak_singularity(const Nonlinearity& nl, int N, double a)
{
    if (N < 3) fail(ErrorCode::InvalidArgument, "weak singularity needs N >= 3");
    if (!(a > 0.0)) fail(ErrorCode::InvalidArgument, "weak singularity needs a > 0");
    const double c = 2.0 * (N - 1) / (N - 2.0);
    ConditionVerdict v = detail::integral_condition(
        Condition::WeakSingularity, [&](double s) { return -c * std::log(s) + nl.log_f(s); }, a);
    if (nl.kind() == NlKind::Power) {
        const bool exponent_test = nl.parameter() < N / (N - 2.0);
        v.flags.push_back(exponent_test ? "exponent_test_holds" : "exponent_test_fails");
        if (exponent_test != v.holds) v.flags.push_back("exponent_test_disagrees");
    }
    return v;
}

// a_f^+ = inf{a >= 0 : int_0^inf f e^{-as} < inf}, by bisection on a.  The
// integral converges at a when log(f(s)) - a s decreases on [1e10, 1e13].
inline ConditionVerdict exp_order_of_growth(const Nonlinearity& nl)
{
    if (nl.kind() == NlKind::Tabulated)
        fail(ErrorCode::OutOfDomain, "a table cannot be followed to infinity");
    ConditionVerdict v;
    v.condition = Condition::ExpOrderFinite;
    const double s0 = 1e10, s1 = 1e13;
    const double l0 = nl.log_f(s0), l1 = nl.log_f(s1);
    auto converges = [&](double a) { return (l1 - a * s1) - (l0 - a * s0) < 0.0; };
    if (converges(0.0)) {
        v.holds = true;
        v.value = 0.0;
        return v;
    }
    double hi = 1.0;
    while (!converges(hi)) {
        hi *= 2.0;
        if (hi > 1e6) {
            v.holds = false;
            v.value = kInf;
            v.flags.push_back("Unbounded");
            return v;
        }
    }
    double lo = 0.0;
    while (hi - lo > 1e-12 * std::max(1.0, hi)) {
        const double mid = 0.5 * (lo + hi);
        (converges(mid) ? hi : lo) = mid;
    }
    const double resolution = 1e-9;
    v.holds = true;
    v.value = hi < resolution ? 0.0 : 0.5 * (lo + hi);
    v.error_bound = std::max(hi - lo, v.value == 0.0 ? 0.0 : 1e-12 * v.value);
    return v;
}

// L(m) = max(0, sup{f(x)+f(y)-f(x+y) : x,y in [m, m+box]}) on refining grids.
inline ConditionVerdict superadditivity_defect(const Nonlinearity& nl, double m, double box)
{
    if (!(box > 0.0)) fail(ErrorCode::InvalidArgument, "box must be positive");
    ConditionVerdict v;
    v.condition = Condition::SuperadditiveDefect;
    double prev = kNaN, sup = -kInf;
    bool far_edge = false, on_boundary = false;
    for (int n = 32; n <= 2048; n *= 2) {
        std::vector<double> x(n + 1), fx(n + 1);
        for (int i = 0; i <= n; ++i) {
            x[i] = m + box * i / n;
            fx[i] = nl.f(x[i]);
        }
        sup = -kInf;
        int bi = 0, bj = 0;
        for (int i = 0; i <= n; ++i)
            for (int j = i; j <= n; ++j) {
                const double d = fx[i] + fx[j] - nl.f(x[i] + x[j]);
                // ties (up to rounding) keep the earliest, nearest-corner point
                if (!std::isfinite(sup) || d > sup + 1e-12 * std::max(1.0, std::abs(sup))) {
                    sup = d;
                    bi = i;
                    bj = j;
                }
            }
        far_edge = bj == n;
        on_boundary = bi == 0 || bi == n || bj == 0 || bj == n;
        if (std::isfinite(prev) && std::abs(sup - prev) <= 1e-10 * std::max(1.0, std::abs(sup))) break;
        prev = sup;
    }
    v.value = std::max(0.0, sup);
    v.error_bound = std::isfinite(prev) ? std::abs(sup - prev) : 0.0;
    if (sup > 0 && on_boundary) v.flags.push_back("attained_on_boundary");
    if (sup > 0 && far_edge) {
        v.flags.push_back("PossiblyUnboundedBox");
        v.holds = false;
    } else {
        v.holds = true;
    }
    return v;
}

// Sampled convexity on [lo, hi]: every point lies below its neighbours' chord.
inline bool is_convex(const Nonlinearity& nl, double lo, double hi, int samples = 400)
{
    std::vector<double> x;
    x.push_back(lo);
    const double span = hi - lo;
    for (int j = 0; j < samples; ++j) x.push_back(lo + span * std::pow(10.0, -6.0 + 6.0 * j / (samples - 1)));
    std::vector<double> fx(x.size());
    double fmax = 0;
    for (size_t i = 0; i < x.size(); ++i) {
        fx[i] = nl.f(x[i]);
        fmax = std::max(fmax, std::abs(fx[i]));
    }
    const double tol = 1e-9 * fmax;
    for (size_t i = 1; i + 1 < x.size(); ++i) {
        const double chord = fx[i - 1] + (fx[i + 1] - fx[i - 1]) * (x[i] - x[i - 1]) / (x[i + 1] - x[i - 1]);
        if (fx[i] - chord > tol) return false;
    }
    return true;
}

// r_theta = smallest sampled r with f(theta s) <= theta f(s) for all sampled s in [r, r_max]
inline ConditionVerdict theta_scaling_threshold(const Nonlinearity& nl, double theta, double r_max)
{
    if (!(theta > 0 && theta < 1)) fail(ErrorCode::InvalidArgument, "theta must lie in (0,1)");
    if (!(r_max > 0)) fail(ErrorCode::InvalidArgument, "r_max must be positive");
    if (!is_convex(nl, 0.0, r_max)) fail(ErrorCode::NotConvex, nl.label() + " fails the sampled convexity check");
    ConditionVerdict v;
    v.condition = Condition::ThetaScaling;
    const int n = 4000;
    std::vector<double> r;
    r.push_back(0.0);
    for (int j = 0; j < n; ++j) r.push_back(r_max * std::pow(10.0, -8.0 + 8.0 * j / (n - 1)));
    int last_bad = -1;
    for (int j = 0; j < static_cast<int>(r.size()); ++j) {
        const double rhs = theta * nl.f(r[j]);
        if (nl.f(theta * r[j]) > rhs + 1e-12 * std::max(1.0, std::abs(rhs))) last_bad = j;
    }
    if (last_bad == static_cast<int>(r.size()) - 1) {
        v.holds = false;
        v.value = kInf;
        v.flags.push_back("no_threshold_below_r_max");
        return v;
    }
    v.holds = true;
    v.value = r[last_bad + 1];
    v.error_bound = last_bad < 0 ? 0.0 : r[last_bad + 1] - r[last_bad];
    return v;
}

// k0 = inf{l >= 0 : f(l) > 0}
inline double k_zero(const Nonlinearity& nl)
{
    const double start = std::max(0.0, nl.domain_floor());
    const double ceiling = std::min(1e12, nl.domain_ceiling());
    if (nl.f(start) > 0) return start;
    double lo = start;
    double hi = std::max(start, 1e-12);
    double step = std::max(1e-12, 1e-12 * std::abs(start));
    while (!(nl.f(hi) > 0)) {
        lo = hi;
        if (hi >= ceiling) fail(ErrorCode::NeverPositive, nl.label() + " is never positive on the search range");
        step *= 2.0;
        hi = std::min(ceiling, start + step);
    }
    if (lo == start && hi <= 1e-12) return start;
    for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (nl.f(mid) > 0 ? hi : lo) = mid;
    }
    return hi;
}

} // namespace blowup
