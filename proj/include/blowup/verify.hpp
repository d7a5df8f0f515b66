#pragma once

// Pointwise checks of the comparison bounds on computed fields, fault
// injection for the checks themselves, and the uniqueness experiment.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "blowup/parabolic.hpp"

namespace blowup {

enum class BoundId { B4, B6, B8, B9, B10, B12, B14, B15, B18, C1, C1p, C8, C13, C14, Asym, Thm1 };

inline std::string_view to_string(BoundId b)
{
    switch (b) {
    case BoundId::B4: return "B4";
    case BoundId::B6: return "B6";
    case BoundId::B8: return "B8";
    case BoundId::B9: return "B9";
    case BoundId::B10: return "B10";
    case BoundId::B12: return "B12";
    case BoundId::B14: return "B14";
    case BoundId::B15: return "B15";
    case BoundId::B18: return "B18";
    case BoundId::C1: return "C1";
    case BoundId::C1p: return "C1'";
    case BoundId::C8: return "C8";
    case BoundId::C13: return "C13";
    case BoundId::C14: return "C14";
    case BoundId::Asym: return "Asym";
    case BoundId::Thm1: return "Thm1";
    }
    return "?";
}

inline BoundId parse_bound_id(std::string_view s)
{
    for (int b = 0; b <= static_cast<int>(BoundId::Thm1); ++b)
        if (to_string(static_cast<BoundId>(b)) == s) return static_cast<BoundId>(b);
    if (s == "C1p") return BoundId::C1p;
    fail(ErrorCode::InvalidArgument, "unknown bound id '" + std::string(s) + "'");
}

// Trust region for comparing grid fields with continuum bounds: cells within
// 2h of the boundary layer are skipped, the core (rho >= core_fraction max rho)
// gets a relative tolerance, the rest an h-proportional one.
struct Tolerance {
    double exclude_cells = 2.0;
    double layer_factor = 5.0;
    double core_relative = 0.02;
    double core_fraction = 0.5;

    json to_json() const
    {
        return {{"exclude_cells", exclude_cells}, {"layer", "5h(1+|value|)"}, {"layer_factor", layer_factor},
                {"core_relative", core_relative}, {"core_fraction", core_fraction}};
    }
};

struct BoundReport {
    BoundId id = BoundId::B4;
    std::string variant;
    bool holds = true;
    double worst_violation = 0;  // lhs - rhs at the worst cell (<= 0 when the bound is strict there)
    double tolerance_used = 0;   // tolerance at that cell
    int cell = -1, slice = -1;
    double x = kNaN, y = kNaN, t = kNaN;
    std::string zone;
    long checked = 0;
    json inputs = json::object();
    json extra = json::object();

    json to_json() const
    {
        auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
        json j = {{"bound_id", to_string(id)}, {"variant", variant}, {"holds", holds},
                  {"worst_violation", num(worst_violation)}, {"tolerance_used", num(tolerance_used)},
                  {"checked", checked}, {"inputs", inputs}};
        json loc = {{"cell", cell}, {"zone", zone}};
        if (std::isfinite(x)) loc["x"] = x;
        if (std::isfinite(y)) loc["y"] = y;
        if (slice >= 0) {
            loc["slice"] = slice;
            loc["t"] = t;
        }
        j["location"] = loc;
        if (!extra.empty()) j["extra"] = extra;
        return j;
    }
};

inline void print_table(std::ostream& os, const std::vector<BoundReport>& reports)
{
    char line[256];
    std::snprintf(line, sizeof line, "%-6s %-14s %-5s %14s %14s  %s\n", "bound", "variant", "holds", "worst", "tol",
                  "where");
    os << line;
    for (const auto& r : reports) {
        std::string where = r.zone;
        if (std::isfinite(r.x)) where += " x=" + std::to_string(r.x);
        if (r.slice >= 0) where += " t=" + std::to_string(r.t);
        std::snprintf(line, sizeof line, "%-6s %-14s %-5s %14.6g %14.6g  %s\n", std::string(to_string(r.id)).c_str(),
                      r.variant.c_str(), r.holds ? "yes" : "NO", r.worst_violation, r.tolerance_used, where.c_str());
        os << line;
    }
}

namespace detail {

// running worst cell for a family of "lhs <= rhs + tol" comparisons
class Accumulator {
public:
    Accumulator(const GridDomain& d, const Tolerance& tol) : dom_(d), df_(distance_field(d)), tol_(tol) {}

    const DistanceField& distance() const { return df_; }
    bool trusted(int idx) const { return dom_.inside(idx) && df_.values[idx] > tol_.exclude_cells * dom_.h * (1 + 1e-9); }
    bool core(int idx) const { return df_.values[idx] >= tol_.core_fraction * df_.max(); }

    double tolerance(int idx, double lhs, double rhs) const
    {
        const double mag = std::max(std::abs(lhs), std::abs(rhs));
        return core(idx) ? tol_.core_relative * mag : tol_.layer_factor * dom_.h * (1 + mag);
    }

    void add(int idx, int slice, double t, double lhs, double rhs)
    {
        if (!trusted(idx)) return;
        ++report_.checked;
        const double e = lhs - rhs;
        if (std::isnan(e)) {
            record(idx, slice, t, kInf, 0);
            return;
        }
        if (std::isinf(lhs) && std::isinf(rhs) && lhs == rhs) return;
        const double tol = tolerance(idx, lhs, rhs);
        if (first_ || e - tol > worst_margin_) record(idx, slice, t, e, tol);
    }

    BoundReport finish(BoundId id, std::string variant)
    {
        report_.id = id;
        report_.variant = std::move(variant);
        report_.holds = !(report_.worst_violation > report_.tolerance_used);
        report_.extra["tolerance_rule"] = tol_.to_json();
        return report_;
    }

private:
    void record(int idx, int slice, double t, double e, double tol)
    {
        first_ = false;
        worst_margin_ = e - tol;
        report_.worst_violation = e;
        report_.tolerance_used = tol;
        report_.cell = idx;
        report_.x = dom_.cx(idx);
        report_.y = dom_.dims == 2 ? dom_.cy(idx) : kNaN;
        report_.slice = slice;
        report_.t = t;
        report_.zone = core(idx) ? "core" : "layer";
    }

    const GridDomain& dom_;
    DistanceField df_;
    Tolerance tol_;
    BoundReport report_;
    bool first_ = true;
    double worst_margin_ = -kInf;
};

inline json provenance(const TimeSeriesField& u)
{
    return {{"tag", to_string(u.tag)},
            {"boundary_value", std::isfinite(u.boundary_value) ? json(u.boundary_value) : json("limit")},
            {"T", u.T}, {"dt", u.dt}, {"pair_change", u.meta.value("pair_change", json(nullptr))}};
}

inline json provenance(const ScalarField& w)
{
    return {{"tag", to_string(w.tag)},
            {"boundary_value", std::isfinite(w.boundary_value) ? json(w.boundary_value) : json("limit")},
            {"level", w.level}, {"residual_inf", w.residual_inf},
            {"pair_change", w.meta.value("pair_change", json(nullptr))}};
}

// t_k of the data for a single rung, 0 for limits
inline double data_time(const TimeSeriesField& u, const Nonlinearity& nl)
{
    if (!std::isfinite(u.boundary_value)) return 0.0;
    return nl.f(u.boundary_value) > 0 ? ode_time_to_infinity(nl, u.boundary_value) : kInf;
}

inline double phi_at(const BlowupProfile& phi, double t) { return std::isfinite(t) ? phi(t) : phi.k0(); }

} // namespace detail

// ------------------------------------------------------------------ bounds

// w(x) <= G_ball(rho(x)) (large solution of the inscribed ball at its centre)
inline BoundReport check_ball_barrier(const ScalarField& w, const BallBarrier& ball, const Tolerance& tol = {})
{
    detail::Accumulator acc(*w.dom, tol);
    const auto& df = acc.distance();
    for (int idx = 0; idx < w.dom->size(); ++idx)
        if (acc.trusted(idx)) acc.add(idx, -1, kNaN, w.values[idx], ball.g(df.values[idx]));
    auto r = acc.finish(w.is_limit() ? BoundId::B6 : BoundId::B4, "ball");
    r.inputs["w"] = detail::provenance(w);
    return r;
}

enum class LowerVariant { B8, B9, B10_with_tk, B14, C1, C13 };

inline std::string_view to_string(LowerVariant v)
{
    switch (v) {
    case LowerVariant::B8: return "B8";
    case LowerVariant::B9: return "B9";
    case LowerVariant::B10_with_tk: return "B10_with_tk";
    case LowerVariant::B14: return "B14";
    case LowerVariant::C1: return "C1";
    case LowerVariant::C13: return "C13";
    }
    return "?";
}

// max{w(x), phi_bar(t [+ t_k])} <= u(x, t); B8 and B9 keep one of the two terms
inline BoundReport check_lower_sandwich(const TimeSeriesField& u, const ScalarField& w, const BlowupProfile& phi,
                                        LowerVariant variant, const Tolerance& tol = {})
{
    require_same_grid(*u.dom, *w.dom);
    const bool with_tk = variant == LowerVariant::B8 || variant == LowerVariant::B9 ||
                         variant == LowerVariant::B10_with_tk;
    const double tk = with_tk ? detail::data_time(u, phi.nl()) : 0.0;
    detail::Accumulator acc(*u.dom, tol);
    for (int m = 1; m < u.size(); ++m) {
        const double t = u.times[m];
        const double p = detail::phi_at(phi, t + tk);
        for (int idx = 0; idx < u.dom->size(); ++idx) {
            if (!acc.trusted(idx)) continue;
            double lhs = std::max(w.values[idx], p);
            if (variant == LowerVariant::B8) lhs = p;
            if (variant == LowerVariant::B9) lhs = w.values[idx];
            acc.add(idx, m, t, lhs, u.slices[m].values[idx]);
        }
    }
    BoundId id = BoundId::B10;
    switch (variant) {
    case LowerVariant::B8: id = BoundId::B8; break;
    case LowerVariant::B9: id = BoundId::B9; break;
    case LowerVariant::B10_with_tk: id = BoundId::B10; break;
    case LowerVariant::B14: id = BoundId::B14; break;
    case LowerVariant::C1: id = BoundId::C1; break;
    case LowerVariant::C13: id = BoundId::C13; break;
    }
    auto r = acc.finish(id, std::string(to_string(variant)));
    r.inputs = {{"u", detail::provenance(u)}, {"w", detail::provenance(w)}, {"phi", phi.header()}};
    if (with_tk) r.inputs["t_k"] = tk;
    return r;
}

enum class UpperVariant { B12_with_tk, B15, C1p, C14, C14_printed };

inline std::string_view to_string(UpperVariant v)
{
    switch (v) {
    case UpperVariant::B12_with_tk: return "B12_with_tk";
    case UpperVariant::B15: return "B15";
    case UpperVariant::C1p: return "C1'";
    case UpperVariant::C14: return "C14+Lt";
    case UpperVariant::C14_printed: return "C14_printed";
    }
    return "?";
}

// floor m = min(min w, phi_bar(T)) for the superadditivity defect
inline double defect_floor(const ScalarField& w, const BlowupProfile& phi, double T)
{
    double m = phi(T);
    for (int idx = 0; idx < w.dom->size(); ++idx)
        if (w.dom->inside(idx) && std::isfinite(w.values[idx])) m = std::min(m, w.values[idx]);
    return m;
}

inline double defect_constant(const Nonlinearity& nl, double m)
{
    if (m < nl.domain_floor())
        fail(ErrorCode::FloorUndefined, "defect floor " + std::to_string(m) + " lies below the domain of f");
    return superadditivity_defect(nl, m, 10 * std::max(1.0, std::abs(m))).value;
}

// u(x, t) <= w(x) + phi_bar(t [+ t_k]) + L t on (0, T]
inline BoundReport check_upper_sandwich(const TimeSeriesField& u, const ScalarField& w, const BlowupProfile& phi,
                                        double L, double T, UpperVariant variant, const Tolerance& tol = {})
{
    require_same_grid(*u.dom, *w.dom);
    double wmin = kInf;
    for (int idx = 0; idx < w.dom->size(); ++idx)
        if (w.dom->inside(idx)) wmin = std::min(wmin, w.values[idx]);
    if (wmin < phi.nl().domain_floor())
        fail(ErrorCode::FloorUndefined, "min w lies below the domain of f");
    const double tk = variant == UpperVariant::B12_with_tk ? detail::data_time(u, phi.nl()) : 0.0;
    const double slope = variant == UpperVariant::C14_printed ? 0.0 : L;
    detail::Accumulator acc(*u.dom, tol);
    for (int m = 1; m < u.size(); ++m) {
        const double t = u.times[m];
        if (t > T * (1 + 1e-12)) break;
        const double p = detail::phi_at(phi, t + tk);
        for (int idx = 0; idx < u.dom->size(); ++idx)
            if (acc.trusted(idx)) acc.add(idx, m, t, u.slices[m].values[idx], w.values[idx] + p + slope * t);
    }
    BoundId id = BoundId::B15;
    switch (variant) {
    case UpperVariant::B12_with_tk: id = BoundId::B12; break;
    case UpperVariant::B15: id = BoundId::B15; break;
    case UpperVariant::C1p: id = BoundId::C1p; break;
    case UpperVariant::C14:
    case UpperVariant::C14_printed: id = BoundId::C14; break;
    }
    auto r = acc.finish(id, std::string(to_string(variant)));
    r.inputs = {{"u", detail::provenance(u)}, {"w", detail::provenance(w)}, {"phi", phi.header()}, {"L", slope},
                {"T", T}};
    if (tk > 0) r.inputs["t_k"] = tk;
    return r;
}

// u(., t + s) <= u(., t): only asserted for the maximal series
inline BoundReport check_time_monotone(const TimeSeriesField& u, const Tolerance& tol = {})
{
    if (u.tag != LadderTag::MaxLimit)
        fail(ErrorCode::WrongLadder, std::string("time monotonicity is asserted for the maximal series only, got ") +
                                         std::string(to_string(u.tag)));
    detail::Accumulator acc(*u.dom, tol);
    std::vector<double> running(u.dom->size(), kInf);
    for (int m = 1; m < u.size(); ++m)
        for (int idx = 0; idx < u.dom->size(); ++idx) {
            if (!acc.trusted(idx)) continue;
            const double v = u.slices[m].values[idx];
            // against the smallest earlier value, which is the worst pair
            if (m > 1) acc.add(idx, m, u.times[m], v, running[idx]);
            running[idx] = std::min(running[idx], v);
        }
    auto r = acc.finish(BoundId::B18, "all_pairs");
    r.inputs["u"] = detail::provenance(u);
    return r;
}

// relative sup gap over the core
inline double core_gap(const ScalarField& a, const ScalarField& b, double core_fraction, int* where = nullptr)
{
    require_same_grid(*a.dom, *b.dom);
    const auto df = distance_field(*a.dom);
    double gap = 0;
    for (int idx = 0; idx < a.dom->size(); ++idx) {
        if (!a.dom->inside(idx) || df.values[idx] < core_fraction * df.max()) continue;
        const double g = std::abs(a.values[idx] - b.values[idx]) / std::max(std::abs(b.values[idx]), 1e-300);
        if (!(g <= gap)) {
            gap = g;
            if (where) *where = idx;
        }
    }
    return gap;
}

// sup over the core of |u(T) - w| <= core tolerance, with the gap nonincreasing
// over the last three slices
inline BoundReport check_long_time(const TimeSeriesField& u, const ScalarField& w, double core_fraction = 0.5,
                                   const Tolerance& tol = {})
{
    require_same_grid(*u.dom, *w.dom);
    if (w.tag != LadderTag::MaxLimit) fail(ErrorCode::WrongLadder, "long-time limit is compared with the maximal w");
    if (u.size() - 1 < 3)
        fail(ErrorCode::HorizonTooShort, "need at least three slices after t=0, have " + std::to_string(u.size() - 1));
    std::vector<double> gaps;
    for (int m = u.size() - 3; m < u.size(); ++m) gaps.push_back(core_gap(u.slices[m], w, core_fraction));
    for (int i = 1; i < 3; ++i)
        if (gaps[i] > gaps[i - 1] + 1e-9 * std::max(1.0, gaps[i - 1]))
            fail(ErrorCode::HorizonTooShort, "core gap still growing over the last three slices");
    int where = -1;
    const double gap = core_gap(u.back(), w, core_fraction, &where);
    BoundReport r;
    r.id = BoundId::Asym;
    r.variant = "core_sup";
    r.worst_violation = gap;
    r.tolerance_used = tol.core_relative;
    r.holds = gap <= tol.core_relative;
    r.cell = where;
    if (where >= 0) {
        r.x = u.dom->cx(where);
        r.y = u.dom->dims == 2 ? u.dom->cy(where) : kNaN;
    }
    r.slice = u.size() - 1;
    r.t = u.times.back();
    r.zone = "core";
    r.inputs = {{"u", detail::provenance(u)}, {"w", detail::provenance(w)}, {"core_fraction", core_fraction}};
    r.extra["last_three_gaps"] = gaps;
    return r;
}

// ------------------------------------------------------------ fault injection

enum class FaultKind { LowerMinus10Percent, UpperPlus10Tol, LateSliceUp };

struct Fault {
    FaultKind kind;
    int slice = -1, cell = -1;
    double before = 0, after = 0;
};

// Injection sites are the trusted cells where the bound is tightest relative
// to the local tolerance, on the last slices, so that the corruption is a
// genuine violation.  Returns the corrupted copy.
inline TimeSeriesField inject_fault(const TimeSeriesField& u, const ScalarField& w, const BlowupProfile& phi, double L,
                                    FaultKind kind, int rank, Fault* info = nullptr, const Tolerance& tol = {})
{
    detail::Accumulator acc(*u.dom, tol);
    struct Site {
        double score;
        int slice, cell;
    };
    std::vector<Site> sites;
    const int first = std::max(1, u.size() - 4);
    for (int m = first; m < u.size(); ++m) {
        const double t = u.times[m];
        const double p = phi(t);
        for (int idx = 0; idx < u.dom->size(); ++idx) {
            if (!acc.trusted(idx)) continue;
            const double v = u.slices[m].values[idx];
            double slack = 0, scale = 1;
            if (kind == FaultKind::LowerMinus10Percent) {
                const double lhs = std::max(w.values[idx], p);
                slack = v - lhs;
                scale = 0.1 * std::abs(v) - acc.tolerance(idx, lhs, 0.9 * v);
            } else if (kind == FaultKind::UpperPlus10Tol) {
                const double rhs = w.values[idx] + p + L * t;
                slack = rhs - v;
                scale = 9 * acc.tolerance(idx, v, rhs);
            } else {
                if (m < 2) continue;
                slack = 0;
                scale = acc.tolerance(idx, v, v);
            }
            if (scale > 0) sites.push_back({slack / scale, m, idx});
        }
    }
    if (sites.empty()) fail(ErrorCode::InvalidArgument, "no trusted cell to corrupt");
    std::stable_sort(sites.begin(), sites.end(), [](const Site& a, const Site& b) { return a.score < b.score; });
    const Site s = sites[rank % sites.size()];
    TimeSeriesField bad = u;
    double& v = bad.slices[s.slice].values[s.cell];
    Fault f{kind, s.slice, s.cell, v, v};
    const double lhs = std::max(w.values[s.cell], phi(u.times[s.slice]));
    const double rhs = w.values[s.cell] + phi(u.times[s.slice]) + L * u.times[s.slice];
    switch (kind) {
    case FaultKind::LowerMinus10Percent: v *= 0.9; break;
    case FaultKind::UpperPlus10Tol: v += 10 * acc.tolerance(s.cell, v, rhs); break;
    case FaultKind::LateSliceUp:
        // above the previous slice by ten tolerances
        v = bad.slices[s.slice - 1].values[s.cell] + 10 * acc.tolerance(s.cell, v, v);
        break;
    }
    (void)lhs;
    f.after = v;
    if (info) *info = f;
    return bad;
}

// ------------------------------------------------------------ uniqueness

struct UniquenessOptions {
    ParabolicLadderOptions ladder;
    double T = 1.0;
    double dt = 0;               // 0: h
    double eps_eq = 0.02;        // elliptic gap counted as equality
    double eps_gap = 0.02;       // parabolic gap counted as a counterexample
    double c8_constant = 6.0;
    Tolerance tol;
};

struct UniquenessResult {
    double elliptic_gap = kNaN;
    double parabolic_gap = kNaN;
    bool implication_consistent = true;
    bool used_exterior = true;
    double T_c8 = 0;
    double c8_best_constant = kNaN;
    BoundReport c8;
    BoundReport thm1;
    json hypotheses = json::object();

    json to_json() const
    {
        return {{"elliptic_gap", elliptic_gap},
                {"parabolic_gap", parabolic_gap},
                {"implication_consistent", implication_consistent},
                {"lower_objects", used_exterior ? "exterior" : "minimal"},
                {"T_c8", T_c8},
                {"c8_best_constant", std::isfinite(c8_best_constant) ? json(c8_best_constant) : json(nullptr)},
                {"c8", c8.to_json()},
                {"thm1", thm1.to_json()},
                {"hypotheses", hypotheses}};
    }
};

// convexity, Keller-Osserman, ODE blow-up, finite defect, theta scaling
inline json uniqueness_hypotheses(const Nonlinearity& nl)
{
    json out = json::object();
    std::vector<std::string> failed;
    auto note = [&](const std::string& name, bool ok, json detail) {
        out[name] = {{"holds", ok}, {"detail", detail}};
        if (!ok) failed.push_back(name);
    };
    const double k0 = k_zero(nl);
    const double a = std::max(k0, 0.0) + 1.0;
    try {
        note("convex", is_convex(nl, std::max(0.0, nl.domain_floor()), 100.0), nullptr);
    } catch (const Error& e) {
        note("convex", false, e.what());
    }
    for (auto [name, fn] : {std::pair<std::string, ConditionVerdict (*)(const Nonlinearity&, double)>{
                                "keller_osserman", keller_osserman},
                            {"ode_blowup", ode_blowup_condition}}) {
        try {
            const auto v = fn(nl, a);
            note(name, v.holds, v.to_json());
        } catch (const Error& e) {
            note(name, false, e.what());
        }
    }
    try {
        const auto v = superadditivity_defect(nl, 0.0, 100.0);
        note("superadditive_defect", std::isfinite(v.value), v.to_json());
    } catch (const Error& e) {
        note("superadditive_defect", false, e.what());
    }
    try {
        const auto v = theta_scaling_threshold(nl, 0.5, 100.0);
        note("theta_scaling", v.holds, v.to_json());
    } catch (const Error& e) {
        note("theta_scaling", false, e.what());
    }
    out["failed"] = failed;
    return out;
}

// Largest slice time in (0, min(1, T)] up to which s L(phi(1)) <= phi(s) and
// 2 min w + phi(s) >= 0 hold on the time grid.
inline double c8_horizon(const ScalarField& w_low, const BlowupProfile& phi, double T, double dt)
{
    const double L = defect_constant(phi.nl(), phi(1.0));
    double wmin = kInf;
    for (int idx = 0; idx < w_low.dom->size(); ++idx)
        if (w_low.dom->inside(idx)) wmin = std::min(wmin, w_low.values[idx]);
    const double top = std::min(1.0, T);
    double horizon = 0;
    for (int m = 1; m * dt <= top * (1 + 1e-12); ++m) {
        const double s = m * dt, p = phi(s);
        if (s * L > p || 2 * wmin + p < 0) break;
        horizon = s;
    }
    return horizon;
}

inline UniquenessResult uniqueness_experiment(std::shared_ptr<const GridDomain> dom, const Nonlinearity& nl,
                                              const UniquenessOptions& opt = {})
{
    UniquenessResult res;
    res.hypotheses = uniqueness_hypotheses(nl);
    if (!res.hypotheses["failed"].empty())
        fail(ErrorCode::HypothesisFailed, "hypotheses not met: " + res.hypotheses["failed"].dump());
    const double dt = opt.dt > 0 ? opt.dt : dom->h;
    const auto& lopt = opt.ladder.ladder;

    res.used_exterior = topo_check(*dom).regular();
    const ScalarField w_max = maximal_solution(dom, nl, lopt);
    const ScalarField w_low = minimal_large_solution(dom, nl, lopt);
    const ScalarField w_star = res.used_exterior ? exterior_maximal_solution(dom, nl, lopt) : w_low;
    res.elliptic_gap = core_gap(w_star, w_max, opt.tol.core_fraction);

    const TimeSeriesField u_max = maximal_parabolic(dom, opt.T, dt, nl, opt.ladder);
    const TimeSeriesField u_low = minimal_large_parabolic(dom, opt.T, dt, nl, opt.ladder);
    const TimeSeriesField u_star =
        res.used_exterior ? exterior_maximal_parabolic(dom, opt.T, dt, nl, opt.ladder) : u_low;
    double pgap = 0;
    for (int m = 1; m < u_max.size(); ++m)
        pgap = std::max(pgap, core_gap(u_star.slices[m], u_max.slices[m], opt.tol.core_fraction));
    res.parabolic_gap = pgap;
    res.implication_consistent = !(res.elliptic_gap <= opt.eps_eq && res.parabolic_gap > opt.eps_gap);

    res.thm1.id = BoundId::Thm1;
    res.thm1.variant = "implication";
    res.thm1.holds = res.implication_consistent;
    res.thm1.worst_violation = res.parabolic_gap;
    res.thm1.tolerance_used = opt.eps_gap;
    res.thm1.zone = "core";
    res.thm1.inputs = {{"elliptic_gap", res.elliptic_gap}, {"eps_eq", opt.eps_eq}, {"eps_gap", opt.eps_gap}};

    // u_low <= u_max <= 6 u_low on (0, T_c8]
    const BlowupProfile phi = build_phi_bar(nl, 1e-3 * dt, 10 * std::max(1.0, opt.T));
    res.T_c8 = c8_horizon(w_low, phi, opt.T, dt);
    detail::Accumulator acc(*dom, opt.tol);
    double best = 0;
    for (int m = 1; m < u_max.size() && u_max.times[m] <= res.T_c8 * (1 + 1e-12); ++m)
        for (int idx = 0; idx < dom->size(); ++idx) {
            if (!acc.trusted(idx)) continue;
            const double lo = u_low.slices[m].values[idx], hi = u_max.slices[m].values[idx];
            acc.add(idx, m, u_max.times[m], lo, hi);
            acc.add(idx, m, u_max.times[m], hi, opt.c8_constant * lo);
            if (lo > 0) best = std::max(best, hi / lo);
        }
    res.c8 = acc.finish(BoundId::C8, "two_sided");
    res.c8.inputs = {{"T_c8", res.T_c8}, {"constant", opt.c8_constant}};
    res.c8.extra["best_constant"] = best;
    res.c8_best_constant = best;
    if (res.T_c8 <= 0) {
        res.c8.holds = false;
        res.c8.extra["note"] = "empty horizon";
    }
    return res;
}

} // namespace blowup
