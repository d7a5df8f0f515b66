#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "blowup/profiles.hpp"

using namespace blowup;

namespace {

// lemniscate constant K(1/sqrt 2) * sqrt 2: half length of the q=3 interval
// large solution with centre value 1
constexpr double kIntervalQ3 = 1.8540746773013719;

} // namespace

TEST(PhiBar, PowerClosedForms)
{
    auto p2 = build_phi_bar(Nonlinearity::power(2), 1e-4, 10);
    auto p3 = build_phi_bar(Nonlinearity::power(3), 1e-4, 10);
    for (double t : {1e-4, 3e-3, 0.25, 0.5, 1.0, 7.0}) {
        EXPECT_NEAR(p2(t), 1.0 / t, 1e-9 / t);
        EXPECT_NEAR(p3(t), 1.0 / std::sqrt(2 * t), 1e-9 / std::sqrt(t));
    }
    EXPECT_NEAR(p2(0.5), 2.0, 1e-12);
    EXPECT_NEAR(p3(1.0), 1 / std::sqrt(2.0), 1e-12);
}

TEST(PhiBar, UnshiftedExponential)
{
    auto p = build_phi_bar(Nonlinearity::exponential(1, false), 1e-3, 10);
    EXPECT_NEAR(p(1.0), 0.0, 1e-10);
    EXPECT_NEAR(p(0.01), -std::log(0.01), 1e-9);
    EXPECT_NEAR(p(5.0), -std::log(5.0), 1e-9);
}

TEST(PhiBar, ShiftedExponentialAgainstDirectQuadrature)
{
    // int_x^inf ds/(e^s - 1) = -log(1 - e^-x)
    auto p = build_phi_bar(Nonlinearity::exponential(1), 1e-3, 10);
    for (double t : {1e-3, 0.1, 2.0, 9.0}) EXPECT_NEAR(-std::log(-std::expm1(-p(t))), t, 1e-6 * t);
    for (size_t i = 0; i < p.t().size(); i += 9) EXPECT_NEAR(-std::log(-std::expm1(-p.phi()[i])), p.t()[i], 1e-9 * p.t()[i]);
}

TEST(PhiBar, LinearHasNoProfile)
{
    EXPECT_THROW(build_phi_bar(Nonlinearity::linear(1), 1e-3, 1), Error);
}

TEST(PhiBar, TkOracles)
{
    auto p2 = build_phi_bar(Nonlinearity::power(2), 1e-4, 10);
    auto p3 = build_phi_bar(Nonlinearity::power(3), 1e-4, 10);
    EXPECT_NEAR(p2.t_k(4), 0.25, 1e-9);
    EXPECT_NEAR(p2.t_k(1), 1.0, 1e-9);
    EXPECT_NEAR(p3.t_k(1 / std::sqrt(2.0)), 1.0, 1e-9);
    EXPECT_THROW(p2.t_k(1e6), Error);
}

TEST(PhiBar, Invariants)
{
    for (auto nl : {Nonlinearity::power(1.5), Nonlinearity::power(3), Nonlinearity::exponential(2)}) {
        auto p = build_phi_bar(nl, 1e-6, 5);
        const auto& t = p.t();
        const auto& phi = p.phi();
        for (size_t i = 1; i < t.size(); ++i) EXPECT_LT(phi[i], phi[i - 1]) << nl.label();
        EXPECT_LE(p.inversion_residual(), 1e-9);
        // round trip at interior knots and between them
        for (size_t i = 1; i + 1 < t.size(); i += 7) {
            EXPECT_NEAR(p.t_k(phi[i]), t[i], 1e-6 * t[i]);
            const double tm = std::sqrt(t[i] * t[i + 1]);
            EXPECT_NEAR(p.t_k(p(tm)), tm, 1e-6 * tm);
        }
        // phi' + f(phi) = 0 by centred differences, error of order h phi''
        for (size_t i = 1; i + 1 < t.size(); i += 5) {
            const double h = 0.5 * (t[i + 1] - t[i - 1]);
            const double d = (phi[i + 1] - phi[i - 1]) / (2 * h);
            const double f = nl.f(phi[i]);
            EXPECT_LE(std::abs(d + f), 0.5 * h * nl.df(phi[i]) * f) << nl.label() << " t=" << t[i];
        }
    }
}

TEST(PhiBar, ResolvesBlowup)
{
    auto p = build_phi_bar(Nonlinearity::power(2), 1e-7, 1);
    EXPECT_GE(p(p.t_min()), 1e6);
}

TEST(PhiBar, CsvHeader)
{
    auto p = build_phi_bar(Nonlinearity::power(2), 0.1, 1, 5);
    std::ostringstream os;
    p.write_csv(os);
    std::istringstream is(os.str());
    std::string first, second;
    std::getline(is, first);
    std::getline(is, second);
    EXPECT_EQ(first.substr(0, 2), "# ");
    auto h = json::parse(first.substr(2));
    EXPECT_EQ(h["nl"]["kind"], "power");
    EXPECT_EQ(second, "t,phi");
}

TEST(KellerBarrier, PowerClosedForm)
{
    auto g = build_keller_barrier(Nonlinearity::power(3), 1e-4, 100);
    EXPECT_NEAR(g(1.0), std::sqrt(2.0), 1e-6);
    EXPECT_NEAR(g(std::sqrt(2.0)), 1.0, 1e-6);
    EXPECT_NEAR(g.distance(std::sqrt(2.0)), 1.0, 1e-6);
    EXPECT_LE(g.identity_residual(), 1e-9);
    for (size_t i = 1; i < g.rho().size(); ++i) EXPECT_LT(g.g_values()[i], g.g_values()[i - 1]);
    EXPECT_GE(g(1e-4), 1e4);
    EXPECT_THROW(build_keller_barrier(Nonlinearity::linear(1), 0.1, 1), Error);
}

TEST(KellerBarrier, ApproachesFloor)
{
    // unshifted e^s: the barrier reaches k0 = 0 at rho = int_0^inf ds/sqrt(2(e^s-1)) = pi/sqrt 2
    auto nl = Nonlinearity::exponential(1, false);
    EXPECT_NEAR(keller_distance(nl, 1e-300), M_PI / std::sqrt(2.0), 1e-7);
    auto g = build_keller_barrier(nl, 1e-3, 10);
    EXPECT_EQ(g(5.0), 0.0);
    // shifted: F ~ s^2/2 near 0, so g decays like e^-rho without reaching 0
    auto gs = build_keller_barrier(Nonlinearity::exponential(1), 1e-3, 30);
    EXPECT_LT(gs(30), 1e-6);
    EXPECT_GT(gs(30), 0.0);
}

TEST(BallBarrier, IntervalClosedForm)
{
    auto nl = Nonlinearity::power(3);
    for (double c : {0.5, 1.0, 3.0}) {
        EXPECT_NEAR(interval_blowup_half_length(nl, c), kIntervalQ3 / c, 1e-9);
        // shooting agrees with the quadrature route
        EXPECT_NEAR(shoot_blowup_radius(nl, 1, c), kIntervalQ3 / c, 1e-6 / c);
    }
    auto b = build_ball_barrier(nl, 1, 1e-3, 10);
    EXPECT_NEAR(b(0.5), 2 * kIntervalQ3, 1e-5);
}

TEST(BallBarrier, DiskScalingAndOrdering)
{
    auto nl = Nonlinearity::power(3);
    const double r1 = shoot_blowup_radius(nl, 2, 1.0);
    // w -> s w(s r) maps solutions to solutions for q = 3
    for (double c : {0.25, 4.0}) EXPECT_NEAR(shoot_blowup_radius(nl, 2, c) * c, r1, 1e-6 * r1);
    EXPECT_GT(r1, kIntervalQ3);  // the disk needs more room than the slab
    auto ball = build_ball_barrier(nl, 2, 1e-2, 2);
    auto half = build_keller_barrier(nl, 1e-2, 2);
    for (double rho : {0.02, 0.3, 1.5}) EXPECT_GT(ball(rho), half(rho));
}

TEST(KellerBarrier, InverseAcrossWideRange)
{
    // sixteen decades of w between rho_min and rho_max
    auto nl = Nonlinearity::power(2);
    auto kb = build_keller_barrier(nl, 3.5e-7, 35.0);
    for (double w = 1e-2; w < 1e12; w *= 1.7) EXPECT_NEAR(kb.distance(w), keller_distance(nl, w), 1e-8 * keller_distance(nl, w));
    EXPECT_NEAR(kb.g(35.0), 6.0 / (35.0 * 35.0), 1e-9);
}
