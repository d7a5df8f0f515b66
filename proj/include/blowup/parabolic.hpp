#pragma once

// u_t - Delta u + f(u) = 0 with u = k on the parabolic boundary (backward
// Euler), and the three limit series built like the elliptic ones.

#include <algorithm>
#include <functional>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "blowup/elliptic.hpp"

namespace blowup {

struct TimeSeriesField {
    std::shared_ptr<const GridDomain> dom;
    double T = 0, dt = 0;
    std::vector<double> times;        // m dt, m = 0..M
    std::vector<ScalarField> slices;  // slice 0 is the initial datum
    double boundary_value = kNaN;     // NaN for "limit"
    LadderTag tag = LadderTag::Single;
    int level = 0;
    double residual_inf = kNaN;  // worst implicit-step residual
    double tolerance = kNaN;
    json meta = json::object();

    bool is_limit() const { return tag != LadderTag::Single; }
    int size() const { return static_cast<int>(slices.size()); }
    const ScalarField& operator[](int m) const { return slices[m]; }
    const ScalarField& back() const { return slices.back(); }

    // linear in t between slices, clamped to the horizon
    double at(int idx, double t) const
    {
        if (t <= 0) return slices.front().values[idx];
        const double s = t / dt;
        const int m = std::min(static_cast<int>(std::floor(s + 1e-9)), size() - 1);
        if (m >= size() - 1) return slices.back().values[idx];
        const double a = slices[m].values[idx], b = slices[m + 1].values[idx];
        const double lam = std::clamp(s - m, 0.0, 1.0);
        if (lam <= 1e-9) return a;
        if (lam >= 1 - 1e-9) return b;
        return (1 - lam) * a + lam * b;
    }
};

struct ParabolicOptions {
    SolveOptions solve;
    double first_step = 0.25;  // first substep as a fraction of t_k
    double growth = 1.08;      // substep growth ratio until dt is reached
    int max_halvings = 30;
};

namespace detail {

// max over interior cells of |(u - prev)/s - Delta_h u + f(u)|, on grid values
inline double step_residual_inf(const std::vector<double>& u, const std::vector<double>& prev, double s,
                                const GridDomain& d, const Nonlinearity& nl)
{
    const double ih2 = 1.0 / (d.h * d.h);
    double worst = 0;
    for (int idx = 0; idx < d.size(); ++idx) {
        if (!d.inside(idx) || d.is_boundary(idx)) continue;
        const auto nb = d.neighbors(idx);
        double lap = 0;
        for (int k = 0; k < d.neighbor_count(); ++k) lap += u[idx] - u[nb[k]];
        worst = std::max(worst, std::abs((u[idx] - prev[idx]) / s + lap * ih2 + nl.f(u[idx])));
    }
    return worst;
}

} // namespace detail

inline TimeSeriesField solve_parabolic(std::shared_ptr<const GridDomain> dom, double T, double dt,
                                       const Nonlinearity& nl, double k, const ParabolicOptions& opt = {})
{
    if (!std::isfinite(k)) fail(ErrorCode::InvalidArgument, "boundary value must be finite");
    if (k < nl.domain_floor() || k > nl.domain_ceiling())
        fail(ErrorCode::OutOfDomain, "boundary value outside the domain of f");
    if (!(dt > 0) || !(T >= dt)) fail(ErrorCode::InvalidArgument, "need 0 < dt <= T");
    if (dt > dom->h * (1 + 1e-12)) fail(ErrorCode::InvalidArgument, "dt must not exceed h");
    auto st = std::make_shared<const Stencil>(dom);
    detail::NonlinearProblem prob(st, nl, opt.solve.linear);
    const double tol = certificate_tolerance(nl, k);

    TimeSeriesField out;
    out.dom = dom;
    out.T = T;
    out.dt = dt;
    out.boundary_value = k;
    out.tolerance = tol;
    const int M = static_cast<int>(std::floor(T / dt + 1e-9));

    std::vector<double> u(st->n, k);
    std::vector<double> grid_prev, grid_cur;
    ScalarField first = detail::make_field(dom, *st, u, k);
    first.boundary_value = k;
    grid_cur = first.values;
    out.times.push_back(0);
    out.slices.push_back(first);

    double worst = 0;
    int substeps = 0;
    // one implicit step of size s; halves recursively on failure
    std::function<void(double, int)> step = [&](double s, int depth) {
        const std::vector<double> prev = u;
        std::vector<double> trial = u;
        auto r = prob.solve(trial, k, 1.0 / s, &prev, opt.solve.max_newton, tol);
        if (!r.converged || !(r.residual <= tol)) {
            if (depth >= opt.max_halvings)
                fail(ErrorCode::StepDiverged, "implicit step did not converge at k=" + std::to_string(k));
            step(0.5 * s, depth + 1);
            step(0.5 * s, depth + 1);
            return;
        }
        u.swap(trial);
        grid_prev.swap(grid_cur);
        grid_cur = grid_prev;
        for (int q = 0; q < st->n; ++q) grid_cur[st->cell[q]] = u[q];
        const double res = detail::step_residual_inf(grid_cur, grid_prev, s, *dom, nl);
        if (!(res <= tol)) fail(ErrorCode::StepDiverged, "implicit step residual above tolerance");
        worst = std::max(worst, res);
        ++substeps;
    };

    // graded substeps from a fraction of t_k up to dt
    double tk = kInf;
    try {
        if (nl.f(k) > 0) tk = ode_time_to_infinity(nl, k);
    } catch (const Error&) {
        tk = kInf;
    }
    double ds = std::isfinite(tk) ? std::min(dt, opt.first_step * tk) : dt;
    double t = 0;
    for (int m = 1; m <= M; ++m) {
        const double target = m * dt;
        while (target - t > 1e-12 * dt) {
            double s = std::min(ds, target - t);
            if (target - t - s < 0.25 * s) s = target - t;
            step(s, 0);
            t += s;
            ds = std::min(dt, ds * opt.growth);
        }
        t = target;
        ScalarField f = detail::make_field(dom, *st, u, k);
        f.boundary_value = k;
        f.tolerance = tol;
        f.residual_inf = worst;
        out.times.push_back(target);
        out.slices.push_back(std::move(f));
    }
    out.residual_inf = worst;
    out.meta = {{"k", k}, {"substeps", substeps}, {"t_k", std::isfinite(tk) ? json(tk) : json(nullptr)}};
    return out;
}

inline TimeSeriesField solve_parabolic(const SpaceTimeDomain& st, const Nonlinearity& nl, double k,
                                       const ParabolicOptions& opt = {})
{
    return solve_parabolic(share(st.space), st.T, st.dt, nl, k, opt);
}

// ---------------------------------------------------------------- ladders

struct ParabolicLadderOptions {
    LadderOptions ladder;
    ParabolicOptions step;
    // transient rungs at K = k_top * transient_first * 4^j, j < transient_rungs
    double transient_first = 64;
    int transient_rungs = 2;
};

namespace detail {

// The limit is split as w + r: w is the elliptic limit of the same kind and
// r = lim (u_K - w_K) is what the initial data leaves behind.  The boundary
// singularity cancels in the difference, so raw rungs at large K settle in
// the core without the G shift model.  For the maximal object r is solved on
// every exhaustion level and extrapolated linearly to offset 0, like w.
struct TransientRung {
    int level = 0;
    double d = 0, k = 0;
    TimeSeriesField u;
    ScalarField w;

    double r(int m, int idx) const { return u.slices[m].values[idx] - w.values[idx]; }
};

inline std::vector<TransientRung> solve_transient_rungs(const std::vector<std::shared_ptr<const GridDomain>>& doms,
                                                        const std::vector<double>& offsets, double T, double dt,
                                                        const Nonlinearity& nl, const std::vector<double>& ks,
                                                        const ParabolicLadderOptions& opt)
{
    const int nd = static_cast<int>(doms.size()), nk = static_cast<int>(ks.size());
    std::vector<TransientRung> rungs(nd * nk);
    parallel_for(nd * nk, [&](int i) {
        const int l = i / nk, j = i % nk;
        auto& r = rungs[i];
        r.level = l + 1;
        r.d = offsets[l];
        r.k = ks[j];
        r.u = solve_parabolic(doms[l], T, dt, nl, ks[j], opt.step);
        r.w = solve_dirichlet(doms[l], nl, ks[j], opt.ladder.solve);
    });
    return rungs;
}

// k-, domain- and (for f(K) >= 0) time-monotonicity of the raw rungs, and u_K >= w_K
inline json transient_monotonicity(const std::vector<TransientRung>& rungs, const Nonlinearity& nl)
{
    double k_viol = 0, n_viol = 0, t_viol = 0, below = 0;
    for (const auto& a : rungs) {
        const auto& s = a.u;
        const GridDomain& d = *s.dom;
        const bool timed = nl.f(a.k) >= 0;
        for (int m = 1; m < s.size(); ++m)
            for (int idx = 0; idx < d.size(); ++idx) {
                if (!d.inside(idx)) continue;
                if (timed) t_viol = std::max(t_viol, s.slices[m].values[idx] - s.slices[m - 1].values[idx]);
                below = std::max(below, -a.r(m, idx));
            }
        for (const auto& b : rungs) {
            const bool same_level = a.level == b.level && a.k < b.k;
            const bool nested = a.k == b.k && a.d > b.d;
            if (!same_level && !nested) continue;
            for (int m = 0; m < s.size(); ++m)
                for (int idx = 0; idx < d.size(); ++idx) {
                    if (!d.inside(idx) || !b.u.dom->inside(idx)) continue;
                    const double x = s.slices[m].values[idx], y = b.u.slices[m].values[idx];
                    if (same_level) k_viol = std::max(k_viol, x - y);
                    else n_viol = std::max(n_viol, y - x);
                }
        }
    }
    return {{"k_monotone_violation", k_viol}, {"domain_monotone_violation", n_viol},
            {"time_monotone_violation", t_viol}, {"below_stationary_violation", below}};
}

// r at offset 0 from the rungs with data k (NaN where no level reaches the cell)
inline double transient_fit(const std::vector<TransientRung>& rungs, double k, int m, int idx)
{
    std::vector<double> dd, xx, vv;
    for (const auto& r : rungs) {
        if (r.k != k) continue;
        const GridDomain& rd = *r.u.dom;
        if (!rd.inside(idx) || rd.is_boundary(idx)) continue;
        dd.push_back(r.d);
        xx.push_back(0.0);
        vv.push_back(r.r(m, idx));
    }
    return shift_fit(dd, xx, vv, 0.0, 0.0);
}

inline TimeSeriesField series_ladder(std::shared_ptr<const GridDomain> dom, double T, double dt,
                                     const Nonlinearity& nl, const ParabolicLadderOptions& opt, bool exhaust,
                                     LadderTag tag)
{
    if (opt.transient_rungs < 1 || !(opt.transient_first >= 1))
        fail(ErrorCode::InvalidArgument, "transient ladder needs at least one rung above the elliptic ones");
    const ScalarField w = exhaust ? maximal_solution(dom, nl, opt.ladder) : minimal_large_solution(dom, nl, opt.ladder);
    const double k_top = w.meta["k_ladder"].back().get<double>();
    std::vector<double> ks;
    for (int j = 0; j < opt.transient_rungs; ++j) ks.push_back(k_top * opt.transient_first * std::pow(4.0, j));
    const DistanceField df = distance_field(*dom);
    std::vector<std::shared_ptr<const GridDomain>> doms;
    std::vector<double> offsets;
    if (exhaust) {
        for (int n = 1; n <= opt.ladder.levels; ++n) {
            doms.push_back(share(exhaustion_domain(*dom, opt.ladder.levels, n)));
            offsets.push_back(boundary_offset(*doms.back(), df));
        }
    } else {
        doms.push_back(dom);
        offsets.push_back(0.0);
    }
    const auto rungs = solve_transient_rungs(doms, offsets, T, dt, nl, ks, opt);
    const double min_rho = opt.ladder.guard * dom->h;

    TimeSeriesField out;
    out.dom = dom;
    out.T = T;
    out.dt = dt;
    out.tag = tag;
    double change = 0;
    int worst_cell = -1, worst_slice = -1;
    const int M = rungs.front().u.size() - 1;
    out.slices.resize(M + 1);
    for (int m = 0; m <= M; ++m) {
        out.times.push_back(m * dt);
        ScalarField& f = out.slices[m];
        f.dom = dom;
        f.tag = tag;
        f.values.assign(dom->size(), kNaN);
        for (int idx = 0; idx < dom->size(); ++idx) {
            if (!dom->inside(idx)) continue;
            if (m == 0 || dom->is_boundary(idx)) {
                f.values[idx] = kInf;
                continue;
            }
            const double r = transient_fit(rungs, ks.back(), m, idx);
            // no level reaches the cell: it sits on a Dirichlet layer, where u_K = w_K
            f.values[idx] = w.values[idx] + (std::isfinite(r) ? r : 0.0);
            if (ks.size() < 2 || !std::isfinite(r) || df.values[idx] < min_rho) continue;
            const double c = std::abs(r - transient_fit(rungs, ks[ks.size() - 2], m, idx)) / std::abs(f.values[idx]);
            if (!(c <= change)) {
                change = c;
                worst_cell = idx;
                worst_slice = m;
            }
        }
    }
    if (!(change <= opt.ladder.tolerance))
        fail(ErrorCode::LadderNotConverged,
             std::string(to_string(tag)) + " series: transient rungs disagree by " + std::to_string(change) +
                 " (relative) at x=" + std::to_string(dom->cx(worst_cell)) + " y=" +
                 std::to_string(dom->cy(worst_cell)) + " t=" + std::to_string(worst_slice * dt));

    double res = w.residual_inf, tol = w.tolerance;
    json rj = json::array();
    for (const auto& r : rungs) {
        res = std::max({res, r.u.residual_inf, r.w.residual_inf});
        tol = std::max({tol, r.u.tolerance, r.w.tolerance});
        rj.push_back({{"level", exhaust ? r.level : 0}, {"d", r.d}, {"k", r.k}, {"residual_inf", r.u.residual_inf},
                      {"substeps", r.u.meta["substeps"]}});
    }
    for (auto& f : out.slices) {
        f.residual_inf = res;
        f.tolerance = tol;
    }
    out.residual_inf = res;
    out.tolerance = tol;
    json meta;
    meta["tag"] = to_string(tag);
    meta["elliptic"] = w.meta;
    meta["transient_k"] = ks;
    if (exhaust) meta["offsets"] = offsets;
    meta["rungs"] = rj;
    meta["transient_change"] = change;
    meta["pair_change"] = std::max(change, w.meta.value("pair_change", 0.0));
    if (worst_cell >= 0)
        meta["pair_change_at"] = {{"x", dom->cx(worst_cell)}, {"y", dom->cy(worst_cell)}, {"t", worst_slice * dt}};
    meta["monotonicity"] = transient_monotonicity(rungs, nl);
    out.meta = std::move(meta);
    return out;
}

} // namespace detail

inline TimeSeriesField maximal_parabolic(std::shared_ptr<const GridDomain> dom, double T, double dt,
                                         const Nonlinearity& nl, const ParabolicLadderOptions& opt = {})
{
    return detail::series_ladder(dom, T, dt, nl, opt, true, LadderTag::MaxLimit);
}

inline TimeSeriesField minimal_large_parabolic(std::shared_ptr<const GridDomain> dom, double T, double dt,
                                               const Nonlinearity& nl, const ParabolicLadderOptions& opt = {})
{
    return detail::series_ladder(dom, T, dt, nl, opt, false, LadderTag::MinLargeLimit);
}

// Minimal large series on the dilations eps_n = levels h / n, started at
// time -(eps_n - h), read back at the domain's slice times and maximised.
// The grid dilation by h is the domain itself, hence the offset by h.
inline TimeSeriesField exterior_maximal_parabolic(std::shared_ptr<const GridDomain> dom, double T, double dt,
                                                  const Nonlinearity& nl, const ParabolicLadderOptions& opt = {})
{
    require_regular(*dom);
    const int levels = opt.ladder.levels;
    const auto dil = exterior_dilations(*dom, levels);
    const int M = static_cast<int>(std::floor(T / dt + 1e-9));
    TimeSeriesField out;
    out.dom = dom;
    out.T = T;
    out.dt = dt;
    out.tag = LadderTag::ExteriorMaxLimit;
    out.slices.resize(M + 1);
    for (int m = 0; m <= M; ++m) {
        out.times.push_back(m * dt);
        out.slices[m].dom = dom;
        out.slices[m].tag = out.tag;
        out.slices[m].values.assign(dom->size(), kNaN);
        for (int idx = 0; idx < dom->size(); ++idx)
            if (dom->inside(idx)) out.slices[m].values[idx] = (m == 0 || dom->is_boundary(idx)) ? kInf : -kInf;
    }
    json lv = json::array();
    double res = 0, tol = 0;
    for (int n = 1; n <= levels; ++n) {
        const double eps = levels * dom->h / n;
        const double shift = eps - dom->h;
        const double horizon = std::ceil((T + shift) / dt - 1e-9) * dt;
        auto s = minimal_large_parabolic(dil[n - 1], horizon, dt, nl, opt);
        res = std::max(res, s.residual_inf);
        tol = std::max(tol, s.tolerance);
        for (int m = 1; m <= M; ++m)
            for (int idx = 0; idx < dom->size(); ++idx) {
                if (!dom->inside(idx) || dom->is_boundary(idx)) continue;
                double& v = out.slices[m].values[idx];
                v = std::max(v, s.at(idx, m * dt + shift));
            }
        lv.push_back({{"eps", eps}, {"time_shift", shift}, {"cells", dil[n - 1]->count()},
                      {"pair_change", s.meta["pair_change"]}});
    }
    for (auto& f : out.slices) {
        f.residual_inf = res;
        f.tolerance = tol;
    }
    out.residual_inf = res;
    out.tolerance = tol;
    out.meta = {{"dilations", lv}, {"tag", to_string(out.tag)}};
    return out;
}

} // namespace blowup
