#pragma once

// -Delta w + f(w) = 0 with constant Dirichlet data, and the three limit
// objects built from k-ladders: maximal (interior exhaustion), minimal large
// (on the domain itself) and exterior maximal (outer dilations).

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "blowup/error.hpp"
#include "blowup/geometry.hpp"
#include "blowup/linalg.hpp"
#include "blowup/nonlinearity.hpp"
#include "blowup/parallel.hpp"
#include "blowup/profiles.hpp"

namespace blowup {

enum class LadderTag { Single, MaxLimit, MinLargeLimit, ExteriorMaxLimit };

inline std::string_view to_string(LadderTag t)
{
    switch (t) {
    case LadderTag::Single: return "Single";
    case LadderTag::MaxLimit: return "MaxLimit";
    case LadderTag::MinLargeLimit: return "MinLargeLimit";
    case LadderTag::ExteriorMaxLimit: return "ExteriorMaxLimit";
    }
    return "?";
}

struct SolveOptions {
    LinearSolverKind linear = LinearSolverKind::Cholesky;
    int max_newton = 100;
};

struct ScalarField {
    std::shared_ptr<const GridDomain> dom;
    std::vector<double> values;  // full grid: NaN outside, data (or +inf for limits) on the boundary layer
    double boundary_value = kNaN;  // k, NaN for "limit"
    double residual_inf = kNaN;
    double tolerance = kNaN;
    LadderTag tag = LadderTag::Single;
    int level = 0;  // exhaustion / dilation level, 0 = the domain itself
    json meta = json::object();

    bool is_limit() const { return tag != LadderTag::Single; }
    double operator[](int idx) const { return values[idx]; }
    const GridDomain& domain() const { return *dom; }

    double max_interior() const
    {
        double m = -kInf;
        for (int idx = 0; idx < dom->size(); ++idx)
            if (dom->inside(idx) && !dom->is_boundary(idx)) m = std::max(m, values[idx]);
        return m;
    }
    double min_interior() const
    {
        double m = kInf;
        for (int idx = 0; idx < dom->size(); ++idx)
            if (dom->inside(idx) && !dom->is_boundary(idx)) m = std::min(m, values[idx]);
        return m;
    }
};

// max over interior cells of |-Delta_h w + f(w)|, evaluated on the grid
// values directly (independent of the solver's data structures)
inline double residual_inf(const ScalarField& w, const Nonlinearity& nl)
{
    const GridDomain& d = *w.dom;
    const double ih2 = 1.0 / (d.h * d.h);
    double worst = 0;
    for (int idx = 0; idx < d.size(); ++idx) {
        if (!d.inside(idx) || d.is_boundary(idx)) continue;
        const auto nb = d.neighbors(idx);
        double lap = 0;
        for (int k = 0; k < d.neighbor_count(); ++k) lap += w.values[idx] - w.values[nb[k]];
        worst = std::max(worst, std::abs(lap * ih2 + nl.f(w.values[idx])));
    }
    return worst;
}

inline double certificate_tolerance(const Nonlinearity& nl, double k) { return 1e-8 * std::max(1.0, std::abs(nl.f(k))); }

namespace detail {

inline double max_abs(const std::vector<double>& v)
{
    double m = 0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

struct NewtonOutcome {
    bool converged = false;
    int iterations = 0;
    double residual = kInf;
};

// c (w - prev) - Delta_h w + f(w) = 0 on the interior unknowns, data k on
// the boundary layer.  c = 0 is the stationary problem.
class NonlinearProblem {
public:
    NonlinearProblem(std::shared_ptr<const Stencil> st, Nonlinearity nl, LinearSolverKind kind)
        : st_(std::move(st)), nl_(std::move(nl)), jac_(*st_, kind)
    {
    }

    const Stencil& stencil() const { return *st_; }
    const Nonlinearity& nl() const { return nl_; }

    bool residual(const std::vector<double>& w, double k, double c, const std::vector<double>* prev,
                  std::vector<double>& R) const
    {
        const Stencil& st = *st_;
        R.resize(st.n);
        try {
            for (int u = 0; u < st.n; ++u) {
                double s = st.deg * w[u];
                for (int j = 0; j < st.deg; ++j) s -= st.nb[u][j] >= 0 ? w[st.nb[u][j]] : k;
                double r = s * st.inv_h2 + nl_.f(w[u]);
                if (c != 0) r += c * (w[u] - (*prev)[u]);
                if (!std::isfinite(r)) return false;
                R[u] = r;
            }
        } catch (const Error&) {
            return false;  // iterate left the domain of a tabulated f
        }
        return true;
    }

    NewtonOutcome newton(std::vector<double>& w, double k, double c, const std::vector<double>* prev, int max_it)
    {
        NewtonOutcome out;
        std::vector<double> R, Rt, delta, wt, diag(st_->n);
        if (!residual(w, k, c, prev, R)) return out;
        double rn = max_abs(R);
        for (int it = 1; it <= max_it; ++it) {
            out.iterations = it;
            for (int u = 0; u < st_->n; ++u) diag[u] = nl_.df(w[u]) + c;
            try {
                jac_.solve(diag, R, delta);
            } catch (const Error&) {
                return out;
            }
            const double step = max_abs(delta);
            const double scale = std::max(1.0, max_abs(w));
            if (!std::isfinite(step)) return out;
            double lambda = 1.0;
            bool accepted = false;
            for (int ls = 0; ls < 40; ++ls, lambda *= 0.5) {
                wt.resize(w.size());
                for (size_t u = 0; u < w.size(); ++u) wt[u] = w[u] - lambda * delta[u];
                if (!residual(wt, k, c, prev, Rt)) continue;
                const double rt = max_abs(Rt);
                if (rt <= rn * (1 - 1e-4 * lambda) || lambda * step <= 1e-10 * scale) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) return out;
            w.swap(wt);
            R.swap(Rt);
            rn = max_abs(R);
            out.residual = rn;
            if (lambda * step <= 1e-14 * scale || rn == 0) {
                out.converged = true;
                return out;
            }
            if (it == max_it && lambda * step <= 1e-10 * scale) out.converged = true;
        }
        return out;
    }

    // Newton, then pseudo-time relaxation if Newton fails
    NewtonOutcome solve(std::vector<double>& w, double k, double c, const std::vector<double>* prev, int max_it,
                        double tol)
    {
        std::vector<double> start = w;
        NewtonOutcome out = newton(w, k, c, prev, max_it);
        if (out.converged && out.residual <= tol) return out;
        w = start;
        const double h2 = 1.0 / st_->inv_h2;
        double tau = h2;
        std::vector<double> R;
        for (int step = 0; step < 400; ++step) {
            // implicit relaxation step from w with pseudo step tau (added to c)
            std::vector<double> anchor = w, trial = w;
            const double cc = c + 1.0 / tau;
            // anchor enters as prev with weight 1/tau; the physical c term keeps its own prev
            std::vector<double> blended(w.size());
            for (size_t u = 0; u < w.size(); ++u)
                blended[u] = ((c != 0 ? c * (*prev)[u] : 0.0) + anchor[u] / tau) / cc;
            NewtonOutcome s = newton(trial, k, cc, &blended, max_it);
            if (!s.converged) {
                tau *= 0.25;
                if (tau < 1e-12 * h2) break;
                continue;
            }
            w.swap(trial);
            tau *= 2;
            if (!residual(w, k, c, prev, R)) break;
            if (max_abs(R) <= 1e-3 * tol) {
                std::vector<double> polish = w;
                NewtonOutcome p = newton(polish, k, c, prev, max_it);
                if (p.converged) w.swap(polish);
                residual(w, k, c, prev, R);
                out.converged = true;
                out.residual = max_abs(R);
                out.iterations += step;
                return out;
            }
        }
        out.converged = false;
        return out;
    }

private:
    std::shared_ptr<const Stencil> st_;
    Nonlinearity nl_;
    JacobianSolver jac_;
};

inline ScalarField make_field(std::shared_ptr<const GridDomain> dom, const Stencil& st, const std::vector<double>& w,
                              double boundary)
{
    ScalarField f;
    f.dom = std::move(dom);
    f.values.assign(f.dom->size(), kNaN);
    for (int idx = 0; idx < f.dom->size(); ++idx)
        if (f.dom->inside(idx)) f.values[idx] = boundary;
    for (int u = 0; u < st.n; ++u) f.values[st.cell[u]] = w[u];
    return f;
}

} // namespace detail

inline std::shared_ptr<const GridDomain> share(const GridDomain& d) { return std::make_shared<const GridDomain>(d); }

// discrete solution with w = k on the boundary layer; Newton starts from the
// constant k (a supersolution when f(k) >= 0) or from `init` when given
inline ScalarField solve_dirichlet(std::shared_ptr<const GridDomain> dom, const Nonlinearity& nl, double k,
                                   const SolveOptions& opt = {}, const ScalarField* init = nullptr)
{
    if (!std::isfinite(k)) fail(ErrorCode::InvalidArgument, "boundary value must be finite");
    if (k < nl.domain_floor() || k > nl.domain_ceiling())
        fail(ErrorCode::OutOfDomain, "boundary value outside the domain of f");
    auto st = std::make_shared<const Stencil>(dom);
    detail::NonlinearProblem prob(st, nl, opt.linear);
    std::vector<double> w(st->n, k);
    if (init) {
        require_same_grid(*init->dom, *dom);
        for (int u = 0; u < st->n; ++u) {
            const double v = init->values[st->cell[u]];
            if (std::isfinite(v)) w[u] = v;
        }
    }
    const double tol = certificate_tolerance(nl, k);
    auto out = prob.solve(w, k, 0.0, nullptr, opt.max_newton, tol);
    ScalarField f = detail::make_field(dom, *st, w, k);
    f.boundary_value = k;
    f.tolerance = tol;
    f.residual_inf = out.converged ? residual_inf(f, nl) : kInf;
    f.meta = {{"k", k}, {"newton_iterations", out.iterations}};
    if (!out.converged || !(f.residual_inf <= tol))
        fail(ErrorCode::NewtonDiverged, "Dirichlet solve with k=" + std::to_string(k) + " did not converge");
    return f;
}

inline ScalarField solve_dirichlet(const GridDomain& dom, const Nonlinearity& nl, double k, const SolveOptions& opt = {})
{
    return solve_dirichlet(share(dom), nl, k, opt);
}

// ------------------------------------------------------------------ ladders

struct LadderOptions {
    int levels = 3;                 // exhaustion or dilation levels
    std::vector<double> k_ladder;   // empty: k0' 2^j up to the resolution guard
    double guard = 4.0;             // a rung is resolved when G(k) >= guard h
    double tolerance = 0.1;         // allowed change between consecutive rung pairs
    SolveOptions solve;
};

namespace detail {

// least squares v = V + a d + c x, returns V.  With a single distinct d or x
// that coefficient is held at its prior.
inline double shift_fit(const std::vector<double>& d, const std::vector<double>& x, const std::vector<double>& v,
                        double prior_a, double prior_c)
{
    const size_t n = v.size();
    if (n == 0) return kNaN;
    for (double y : v)
        if (!std::isfinite(y)) return kNaN;
    auto distinct = [](std::vector<double> xs) {
        std::sort(xs.begin(), xs.end());
        int m = 1;
        for (size_t i = 1; i < xs.size(); ++i)
            if (xs[i] - xs[i - 1] > 1e-12 * std::max(1.0, std::abs(xs[i]))) ++m;
        return m;
    };
    const int nd = distinct(d), nx = distinct(x);
    if (nd >= 2 && nx >= 2 && n >= 3) {
        Eigen::MatrixXd A(n, 3);
        Eigen::VectorXd b(n);
        for (size_t i = 0; i < n; ++i) {
            A(i, 0) = 1;
            A(i, 1) = d[i];
            A(i, 2) = x[i];
            b(i) = v[i];
        }
        return A.colPivHouseholderQr().solve(b)(0);
    }
    if (nd >= 2 || nx >= 2) {
        const bool by_d = nd >= 2;
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < n; ++i) {
            const double t = by_d ? d[i] : x[i];
            const double y = by_d ? v[i] - prior_c * x[i] : v[i] - prior_a * d[i];
            sx += t;
            sy += y;
            sxx += t * t;
            sxy += t * y;
        }
        const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        return (sy - slope * sx) / n;
    }
    double V = 0;
    for (size_t i = 0; i < n; ++i) V += v[i] - prior_a * d[i] - prior_c * x[i];
    return V / n;
}

} // namespace detail

// shift model in the variable v = G(w): Dirichlet data k on a boundary moved
// inward by d gives v ~ vbar + a d + c G(k), with a = -1, c = 1 for a flat
// boundary.  The coefficients are fitted per cell.
class ShiftExtrapolator {
public:
    ShiftExtrapolator(const Nonlinearity& nl, double length)
        : barrier_(build_keller_barrier(nl, 1e-7 * length, 10 * length))
    {
    }

    double G(double w) const { return barrier_.distance(w); }
    double g(double v) const { return v > 0 ? barrier_.g(v) : kInf; }
    const KellerBarrier& barrier() const { return barrier_; }

    struct Point {
        double d, delta, w;
    };

    // extrapolated value at d = 0, G(k) = 0; NaN when the model cannot be used
    double extrapolate(const std::vector<Point>& pts) const
    {
        std::vector<double> d(pts.size()), x(pts.size()), v(pts.size());
        for (size_t i = 0; i < pts.size(); ++i) {
            d[i] = pts[i].d;
            x[i] = pts[i].delta;
            v[i] = G(pts[i].w);
        }
        return g(detail::shift_fit(d, x, v, -1.0, 1.0));
    }

private:
    KellerBarrier barrier_;
};

// rungs k0' 2^j, k0' = max(1, k0 + 1); the three largest with G(k) >= guard h
inline std::vector<double> choose_rungs(const Nonlinearity& nl, double h, const LadderOptions& opt, json* diag = nullptr)
{
    std::vector<double> ks = opt.k_ladder;
    const double k0 = k_zero(nl);
    bool resolved = true;
    if (ks.empty()) {
        const double base = std::max(1.0, k0 + 1.0);
        int J = -1;
        for (int j = 0; j <= 60; ++j) {
            if (keller_distance(nl, base * std::ldexp(1.0, j)) >= opt.guard * h) J = j;
            else break;
        }
        if (J < 2) {
            resolved = J >= 1;
            J = 2;
        }
        ks = {base * std::ldexp(1.0, J - 2), base * std::ldexp(1.0, J - 1), base * std::ldexp(1.0, J)};
    } else {
        std::sort(ks.begin(), ks.end());
        std::vector<double> ok;
        for (double k : ks)
            if (keller_distance(nl, k) >= opt.guard * h) ok.push_back(k);
        if (ok.size() < 2) {
            resolved = false;
            ok.assign(ks.begin(), ks.begin() + std::min<size_t>(ks.size(), 3));
        }
        if (ok.size() > 3) ok.erase(ok.begin(), ok.end() - 3);
        ks = ok;
    }
    if (diag) (*diag)["rungs_resolved"] = resolved;
    return ks;
}

struct Rung {
    int level = 0;
    double d = 0;      // inward offset of the Dirichlet layer (negative for dilations)
    double k = 0;
    double delta = 0;  // G(k)
    ScalarField field;
};

namespace detail {

inline double domain_length(const GridDomain& d)
{
    return std::hypot(d.nx * d.h, d.dims == 2 ? d.ny * d.h : 0.0);
}

// per-cell fit over the rungs whose k is in `use`; cells not solved by any
// rung take the flat-boundary value g(rho)
inline std::vector<double> extrapolate_cells(const GridDomain& dom, const DistanceField& df,
                                             const std::vector<const Rung*>& rungs, const ShiftExtrapolator& ex)
{
    std::vector<double> out(dom.size(), kNaN);
    std::vector<ShiftExtrapolator::Point> pts;
    for (int idx = 0; idx < dom.size(); ++idx) {
        if (!dom.inside(idx)) continue;
        if (dom.is_boundary(idx)) {
            out[idx] = kInf;
            continue;
        }
        pts.clear();
        double raw = -kInf;
        for (const Rung* r : rungs) {
            const GridDomain& rd = *r->field.dom;
            if (!rd.inside(idx) || rd.is_boundary(idx)) continue;
            pts.push_back({r->d, r->delta, r->field.values[idx]});
            raw = std::max(raw, r->field.values[idx]);
        }
        if (pts.empty()) {
            out[idx] = ex.g(df.values[idx]);
            continue;
        }
        const double e = ex.extrapolate(pts);
        out[idx] = std::isfinite(e) ? e : raw;
    }
    return out;
}

inline std::vector<const Rung*> select(const std::vector<Rung>& rungs, const std::vector<double>& ks)
{
    std::vector<const Rung*> out;
    for (const auto& r : rungs)
        if (std::find(ks.begin(), ks.end(), r.k) != ks.end()) out.push_back(&r);
    return out;
}

// relative sup change between the fits from the lower and the upper rung pair
inline double pair_change(const GridDomain& dom, const DistanceField& df, const std::vector<double>& a,
                          const std::vector<double>& b, double min_rho)
{
    double worst = 0;
    for (int idx = 0; idx < dom.size(); ++idx) {
        if (!dom.inside(idx) || df.values[idx] < min_rho) continue;
        if (!std::isfinite(a[idx]) || !std::isfinite(b[idx])) continue;
        worst = std::max(worst, std::abs(a[idx] - b[idx]) / std::max(std::abs(b[idx]), 1e-300));
    }
    return worst;
}

inline void ko_or_raw_ladder(std::shared_ptr<const GridDomain> dom, const Nonlinearity& nl, const LadderOptions& opt)
{
    const double k0 = k_zero(nl);
    bool ko = false;
    try {
        ko = keller_osserman(nl, std::max(k0, 0.0) + 1.0).holds;
    } catch (const Error&) {
        ko = false;
    }
    if (ko) return;
    // no transform without Keller-Osserman: plain sup rule on raw rungs
    const double base = std::max(1.0, k0 + 1.0);
    double prev = kNaN, change = kNaN;
    for (int j = 0; j <= 8; ++j) {
        const double sup = solve_dirichlet(dom, nl, base * std::ldexp(1.0, j), opt.solve).max_interior();
        if (std::isfinite(prev)) change = std::abs(sup - prev) / std::abs(sup);
        prev = sup;
    }
    if (!(change < 1e-4))
        fail(ErrorCode::LadderNotConverged, nl.label() + ": Keller-Osserman fails and the interior sup keeps growing (" +
                                                std::to_string(change) + " relative change at the last doubling)");
}

inline ScalarField limit_field(std::shared_ptr<const GridDomain> dom, std::vector<double> values, LadderTag tag,
                               const std::vector<Rung>& rungs, json meta)
{
    ScalarField f;
    f.dom = std::move(dom);
    f.values = std::move(values);
    f.tag = tag;
    double res = 0, tol = 0;
    json rj = json::array();
    for (const auto& r : rungs) {
        res = std::max(res, r.field.residual_inf);
        tol = std::max(tol, r.field.tolerance);
        rj.push_back({{"level", r.level}, {"d", r.d}, {"k", r.k}, {"delta", r.delta},
                      {"residual_inf", r.field.residual_inf}});
    }
    f.residual_inf = res;
    f.tolerance = tol;
    meta["rungs"] = rj;
    meta["tag"] = to_string(tag);
    f.meta = std::move(meta);
    return f;
}

inline std::vector<Rung> solve_rungs(const std::vector<std::shared_ptr<const GridDomain>>& doms,
                                     const std::vector<double>& offsets, const Nonlinearity& nl,
                                     const std::vector<double>& ks, const SolveOptions& opt)
{
    const int nd = static_cast<int>(doms.size()), nk = static_cast<int>(ks.size());
    std::vector<Rung> rungs(nd * nk);
    parallel_for(nd * nk, [&](int i) {
        const int l = i / nk, j = i % nk;
        Rung& r = rungs[i];
        r.level = l + 1;
        r.d = offsets[l];
        r.k = ks[j];
        r.delta = keller_distance(nl, ks[j]);
        r.field = solve_dirichlet(doms[l], nl, ks[j], opt);
        r.field.level = l + 1;
    });
    return rungs;
}

inline json monotonicity_diagnostics(const std::vector<Rung>& rungs)
{
    // increasing in k at fixed level, decreasing under domain growth at fixed k
    double k_viol = 0, n_viol = 0;
    for (const auto& a : rungs)
        for (const auto& b : rungs) {
            const GridDomain& da = *a.field.dom;
            const GridDomain& db = *b.field.dom;
            const bool same_level = a.level == b.level && a.k < b.k;
            const bool nested = a.k == b.k && a.d > b.d;  // a lives on the smaller domain
            if (!same_level && !nested) continue;
            for (int idx = 0; idx < da.size(); ++idx) {
                if (!da.inside(idx) || !db.inside(idx)) continue;
                if (same_level) k_viol = std::max(k_viol, a.field.values[idx] - b.field.values[idx]);
                else n_viol = std::max(n_viol, b.field.values[idx] - a.field.values[idx]);
            }
        }
    return {{"k_monotone_violation", k_viol}, {"domain_monotone_violation", n_viol}};
}

} // namespace detail

// measured inward offset of a subdomain's Dirichlet layer: mean distance to
// the outer boundary over its boundary cells
inline double boundary_offset(const GridDomain& sub, const DistanceField& outer)
{
    const auto b = sub.boundary_cells();
    double s = 0;
    for (int idx : b) s += outer.values[idx];
    return b.empty() ? 0.0 : s / b.size();
}

inline ScalarField maximal_solution(std::shared_ptr<const GridDomain> dom, const Nonlinearity& nl,
                                    const LadderOptions& opt = {})
{
    detail::ko_or_raw_ladder(dom, nl, opt);
    json meta;
    const auto ks = choose_rungs(nl, dom->h, opt, &meta);
    const DistanceField df = distance_field(*dom);
    std::vector<std::shared_ptr<const GridDomain>> doms;
    std::vector<double> offsets;
    for (int n = 1; n <= opt.levels; ++n) {
        doms.push_back(share(exhaustion_domain(*dom, opt.levels, n)));
        offsets.push_back(boundary_offset(*doms.back(), df));
    }
    auto rungs = detail::solve_rungs(doms, offsets, nl, ks, opt.solve);
    ShiftExtrapolator ex(nl, detail::domain_length(*dom));
    auto top = detail::extrapolate_cells(*dom, df, detail::select(rungs, {ks.end() - 2, ks.end()}), ex);
    if (ks.size() >= 3) {
        auto low = detail::extrapolate_cells(*dom, df, detail::select(rungs, {ks.begin(), ks.begin() + 2}), ex);
        const double change = detail::pair_change(*dom, df, low, top, opt.guard * dom->h);
        meta["pair_change"] = change;
        if (!(change <= opt.tolerance))
            fail(ErrorCode::LadderNotConverged,
                 "maximal ladder: rung pairs disagree by " + std::to_string(change) + " (relative)");
    }
    meta["offsets"] = offsets;
    meta["k_ladder"] = ks;
    meta["monotonicity"] = detail::monotonicity_diagnostics(rungs);
    return detail::limit_field(dom, std::move(top), LadderTag::MaxLimit, rungs, std::move(meta));
}

inline ScalarField minimal_large_solution(std::shared_ptr<const GridDomain> dom, const Nonlinearity& nl,
                                          const LadderOptions& opt = {})
{
    detail::ko_or_raw_ladder(dom, nl, opt);
    json meta;
    const auto ks = choose_rungs(nl, dom->h, opt, &meta);
    const DistanceField df = distance_field(*dom);
    auto rungs = detail::solve_rungs({dom}, {0.0}, nl, ks, opt.solve);
    for (auto& r : rungs) r.level = 0;
    ShiftExtrapolator ex(nl, detail::domain_length(*dom));
    auto top = detail::extrapolate_cells(*dom, df, detail::select(rungs, {ks.end() - 2, ks.end()}), ex);
    if (ks.size() >= 3) {
        auto low = detail::extrapolate_cells(*dom, df, detail::select(rungs, {ks.begin(), ks.begin() + 2}), ex);
        const double change = detail::pair_change(*dom, df, low, top, opt.guard * dom->h);
        meta["pair_change"] = change;
        if (!(change <= opt.tolerance))
            fail(ErrorCode::LadderNotConverged,
                 "minimal ladder: rung pairs disagree by " + std::to_string(change) + " (relative)");
    }
    meta["k_ladder"] = ks;
    meta["monotonicity"] = detail::monotonicity_diagnostics(rungs);
    return detail::limit_field(dom, std::move(top), LadderTag::MinLargeLimit, rungs, std::move(meta));
}

inline void require_regular(const GridDomain& dom)
{
    const auto topo = topo_check(dom);
    if (!topo.regular())
        fail(ErrorCode::TopologyFailed, dom.label + ": boundary is not the boundary of the exterior of the closure (" +
                                            topo.to_json().dump() + ")");
}

// dilations eps_n = levels h / n of the closure, n = 1..levels
inline std::vector<std::shared_ptr<const GridDomain>> exterior_dilations(const GridDomain& dom, int levels)
{
    const GridDomain cl = closure(dom);
    std::vector<std::shared_ptr<const GridDomain>> out;
    for (int n = 1; n <= levels; ++n) out.push_back(share(dilate(cl, levels * dom.h / n)));
    return out;
}

// Increasing limit over shrinking dilations of the minimal large solutions,
// restricted to the domain.  On a grid the dilation at eps = h is the
// closure itself, so the last level is the domain.
inline ScalarField exterior_maximal_solution(std::shared_ptr<const GridDomain> dom, const Nonlinearity& nl,
                                             const LadderOptions& opt = {})
{
    require_regular(*dom);
    const auto dil = exterior_dilations(*dom, opt.levels);
    std::vector<ScalarField> levels(dil.size());
    for (size_t n = 0; n < dil.size(); ++n) levels[n] = minimal_large_solution(dil[n], nl, opt);
    std::vector<double> vals(dom->size(), kNaN);
    double viol = 0;
    for (int idx = 0; idx < dom->size(); ++idx) {
        if (!dom->inside(idx)) continue;
        double m = -kInf;
        for (size_t n = 0; n < levels.size(); ++n) {
            const double v = levels[n].values[idx];
            if (n > 0 && std::isfinite(v)) viol = std::max(viol, m - v);
            m = std::max(m, v);
        }
        vals[idx] = dom->is_boundary(idx) ? kInf : m;
    }
    json meta;
    json lv = json::array();
    for (size_t n = 0; n < dil.size(); ++n)
        lv.push_back({{"eps", opt.levels * dom->h / (n + 1)}, {"cells", dil[n]->count()},
                      {"pair_change", levels[n].meta.value("pair_change", 0.0)}});
    meta["dilations"] = lv;
    meta["increasing_violation"] = viol;
    ScalarField f;
    f.dom = dom;
    f.values = std::move(vals);
    f.tag = LadderTag::ExteriorMaxLimit;
    f.residual_inf = levels.back().residual_inf;
    f.tolerance = levels.back().tolerance;
    f.meta = std::move(meta);
    return f;
}

} // namespace blowup
