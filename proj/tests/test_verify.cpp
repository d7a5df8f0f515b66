#include <cmath>

#include <gtest/gtest.h>

#include "blowup/verify.hpp"

using namespace blowup;

namespace {

std::shared_ptr<const GridDomain> interval(double h)
{
    return share(make_domain({{"type", "interval"}, {"a", 0.0}, {"b", 1.0}, {"h", h}}));
}

std::shared_ptr<const GridDomain> named(const std::string& name, double h)
{
    return share(make_domain(named_domain_descriptor(name, h)));
}

// one maximal pair shared by the tests below
struct Fixture {
    Nonlinearity nl = Nonlinearity::power(3);
    double h = 1.0 / 64, T = 1.0;
    std::shared_ptr<const GridDomain> dom = interval(h);
    ScalarField w = maximal_solution(dom, nl);
    TimeSeriesField u = maximal_parabolic(dom, T, h, nl);
    BlowupProfile phi = build_phi_bar(nl, 1e-4, 10.0);
};

const Fixture& fx()
{
    static const Fixture f;
    return f;
}

ErrorCode code_of(const std::function<void()>& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::InvalidArgument;
}

} // namespace

TEST(Verify, BoundIdRoundTrip)
{
    for (int b = 0; b <= static_cast<int>(BoundId::Thm1); ++b)
        EXPECT_EQ(parse_bound_id(to_string(static_cast<BoundId>(b))), static_cast<BoundId>(b));
    EXPECT_EQ(parse_bound_id("C1p"), BoundId::C1p);
    EXPECT_THROW(parse_bound_id("B99"), Error);
}

TEST(Verify, BallBarrierAboveLargeSolution)
{
    auto nl = Nonlinearity::power(3);
    auto d = named("disk", 1.0 / 32);
    auto ball = build_ball_barrier(nl, 2, 1e-3, 2.0);
    auto r = check_ball_barrier(maximal_solution(d, nl), ball);
    EXPECT_EQ(r.id, BoundId::B6);
    EXPECT_TRUE(r.holds) << r.to_json().dump();
    auto r4 = check_ball_barrier(solve_dirichlet(d, nl, 10.0), ball);
    EXPECT_EQ(r4.id, BoundId::B4);
    EXPECT_TRUE(r4.holds);
    EXPECT_GT(r4.checked, 0);
}

TEST(Verify, SandwichOnMaximalPair)
{
    const auto& f = fx();
    for (auto v : {LowerVariant::B14, LowerVariant::C1, LowerVariant::C13}) {
        auto r = check_lower_sandwich(f.u, f.w, f.phi, v);
        EXPECT_TRUE(r.holds) << r.to_json().dump();
    }
    const double L = defect_constant(f.nl, defect_floor(f.w, f.phi, f.T));
    EXPECT_EQ(L, 0.0);
    for (auto v : {UpperVariant::B15, UpperVariant::C1p, UpperVariant::C14, UpperVariant::C14_printed}) {
        auto r = check_upper_sandwich(f.u, f.w, f.phi, L, f.T, v);
        EXPECT_TRUE(r.holds) << r.to_json().dump();
    }
}

TEST(Verify, SandwichWithDataTime)
{
    // finite data: phi_bar(t + t_k) <= u_k <= w_k + phi_bar(t + t_k)
    const auto& f = fx();
    const double k = 8;
    auto u = solve_parabolic(f.dom, f.T, f.h, f.nl, k);
    auto w = solve_dirichlet(f.dom, f.nl, k);
    for (auto v : {LowerVariant::B8, LowerVariant::B9, LowerVariant::B10_with_tk}) {
        auto r = check_lower_sandwich(u, w, f.phi, v);
        EXPECT_TRUE(r.holds) << r.to_json().dump();
        EXPECT_LE(r.worst_violation, 1e-9);
    }
    auto r = check_upper_sandwich(u, w, f.phi, 0.0, f.T, UpperVariant::B12_with_tk);
    EXPECT_TRUE(r.holds) << r.to_json().dump();
    EXPECT_NEAR(r.inputs["t_k"].get<double>(), 1.0 / (2 * k * k), 1e-9);
}

TEST(Verify, ExactBoundaryCaseAndTolerance)
{
    // u built to sit on the upper bound, then pushed past the tolerance
    const auto& f = fx();
    TimeSeriesField u = f.u;
    for (int m = 1; m < u.size(); ++m)
        for (int idx = 0; idx < u.dom->size(); ++idx)
            if (u.dom->inside(idx)) u.slices[m].values[idx] = f.w.values[idx] + f.phi(u.times[m]);
    auto r = check_upper_sandwich(u, f.w, f.phi, 0.0, f.T, UpperVariant::B15);
    EXPECT_TRUE(r.holds);
    EXPECT_NEAR(r.worst_violation, 0.0, 1e-12 * 100);
    const int c = f.dom->interior_cells()[f.dom->interior_cells().size() / 2];
    u.slices.back().values[c] *= 1.05;
    r = check_upper_sandwich(u, f.w, f.phi, 0.0, f.T, UpperVariant::B15);
    EXPECT_FALSE(r.holds);
    EXPECT_EQ(r.cell, c);
    EXPECT_EQ(r.zone, "core");
    EXPECT_EQ(r.slice, u.size() - 1);
}

TEST(Verify, FaultInjectionDetected)
{
    const auto& f = fx();
    for (int rank = 0; rank < 5; ++rank) {
        Fault info;
        auto lo = inject_fault(f.u, f.w, f.phi, 0.0, FaultKind::LowerMinus10Percent, rank, &info);
        EXPECT_FALSE(check_lower_sandwich(lo, f.w, f.phi, LowerVariant::B14).holds) << info.cell;
        auto up = inject_fault(f.u, f.w, f.phi, 0.0, FaultKind::UpperPlus10Tol, rank);
        EXPECT_FALSE(check_upper_sandwich(up, f.w, f.phi, 0.0, f.T, UpperVariant::B15).holds);
        auto tm = inject_fault(f.u, f.w, f.phi, 0.0, FaultKind::LateSliceUp, rank);
        EXPECT_FALSE(check_time_monotone(tm).holds);
    }
}

TEST(Verify, TimeMonotone)
{
    const auto& f = fx();
    auto r = check_time_monotone(f.u);
    EXPECT_TRUE(r.holds) << r.to_json().dump();
    // exact on the raw rungs, up to the extrapolation tolerance on the limit
    EXPECT_LE(f.u.meta["monotonicity"]["time_monotone_violation"].get<double>(), 1e-10);
    auto single = solve_parabolic(f.dom, f.T, f.h, f.nl, 8.0);
    EXPECT_EQ(code_of([&] { check_time_monotone(single); }), ErrorCode::WrongLadder);
}

TEST(Verify, LongTimeAndHorizon)
{
    const auto& f = fx();
    auto r = check_long_time(f.u, f.w);
    EXPECT_TRUE(r.holds) << r.to_json().dump();
    auto short_u = maximal_parabolic(f.dom, 2 * f.h, f.h, f.nl);
    EXPECT_EQ(code_of([&] { check_long_time(short_u, f.w); }), ErrorCode::HorizonTooShort);
}

TEST(Verify, Errors)
{
    const auto& f = fx();
    auto other = named("disk", 1.0 / 16);
    auto w2 = solve_dirichlet(other, f.nl, 5.0);
    EXPECT_EQ(code_of([&] { check_lower_sandwich(f.u, w2, f.phi, LowerVariant::B14); }), ErrorCode::GridMismatch);
    auto tab = Nonlinearity::tabulated({{0, 0}, {1, 1}, {2, 8}, {4, 64}});
    EXPECT_EQ(code_of([&] { defect_constant(tab, -1.0); }), ErrorCode::FloorUndefined);
}

TEST(Verify, DefectFloorUsesMinimum)
{
    const auto& f = fx();
    double wmin = kInf;
    for (int idx = 0; idx < f.dom->size(); ++idx)
        if (f.dom->inside(idx)) wmin = std::min(wmin, f.w.values[idx]);
    EXPECT_DOUBLE_EQ(defect_floor(f.w, f.phi, f.T), std::min(wmin, f.phi(f.T)));
    // e^x - 1: f(x)+f(y)-f(x+y) = -(e^x-1)(e^y-1) <= 0 for x, y >= 0
    EXPECT_EQ(defect_constant(Nonlinearity::exponential(1.0), 0.0), 0.0);
}

TEST(Uniqueness, HypothesesRejectLinear)
{
    EXPECT_EQ(code_of([&] { uniqueness_experiment(interval(1.0 / 16), Nonlinearity::linear(1.0)); }),
              ErrorCode::HypothesisFailed);
    auto hyp = uniqueness_hypotheses(Nonlinearity::power(3));
    EXPECT_TRUE(hyp["failed"].empty()) << hyp.dump();
}

TEST(Uniqueness, IntervalConsistent)
{
    UniquenessOptions opt;
    opt.T = 0.5;
    auto res = uniqueness_experiment(interval(1.0 / 128), Nonlinearity::power(3), opt);
    EXPECT_TRUE(res.used_exterior);
    EXPECT_LE(res.elliptic_gap, 0.02);
    EXPECT_LE(res.parabolic_gap, 0.02);
    EXPECT_TRUE(res.implication_consistent);
    EXPECT_GT(res.T_c8, 0);
    EXPECT_TRUE(res.c8.holds) << res.c8.to_json().dump();
    EXPECT_LE(res.c8_best_constant, 6.0);
}
