#include <cmath>

#include <gtest/gtest.h>

#include "blowup/nonlinearity.hpp"

using namespace blowup;

namespace {

std::vector<Nonlinearity> zoo()
{
    return {Nonlinearity::power(1.5), Nonlinearity::power(2), Nonlinearity::power(3),
            Nonlinearity::exponential(1), Nonlinearity::exponential(2), Nonlinearity::exponential(1, false),
            Nonlinearity::linear(1),
            Nonlinearity::tabulated({{0, 0}, {1, 0}, {2, 1}, {5, 4}, {10, 9}})};
}

} // namespace

TEST(Nonlinearity, Evaluation)
{
    EXPECT_DOUBLE_EQ(Nonlinearity::power(2).f(3), 9);
    EXPECT_DOUBLE_EQ(Nonlinearity::exponential(1).f(0), 0);
    EXPECT_DOUBLE_EQ(Nonlinearity::linear(1).f(5), 5);
    EXPECT_DOUBLE_EQ(Nonlinearity::power(2).f(-2), -4);
}

TEST(Nonlinearity, TableRefusesExtrapolation)
{
    auto t = Nonlinearity::tabulated({{0, 0}, {1, 1}});
    EXPECT_THROW(t.f(-0.5), Error);
    EXPECT_THROW(t.f(1.5), Error);
    EXPECT_THROW(Nonlinearity::tabulated({{0, 1}, {1, 0}}), Error);
}

TEST(Nonlinearity, MonotoneOnSamples)
{
    for (const auto& nl : zoo()) {
        double prev = -kInf;
        for (int i = 0; i <= 200; ++i) {
            const double s = i * 0.05;
            const double v = nl.f(s);
            EXPECT_LE(prev, v) << nl.label() << " at " << s;
            prev = v;
        }
    }
}

TEST(Nonlinearity, AntiderivativeMatchesF)
{
    for (const auto& nl : zoo()) {
        for (double s : {0.3, 1.7, 4.2}) {
            double last = kInf;
            for (double h : {1e-2, 5e-3, 2.5e-3}) {
                const double err = std::abs((nl.F(s + h) - nl.F(s)) / h - nl.f(s));
                EXPECT_LE(err, 20 * h * std::max(1.0, std::abs(nl.df(s + h)))) << nl.label() << " s=" << s;
                last = err;
            }
            (void)last;
        }
    }
}

TEST(Nonlinearity, LogFormsAgreeWithDirect)
{
    for (const auto& nl : zoo()) {
        for (double s : {0.5, 2.0, 7.0}) {
            if (nl.f(s) > 0) {
                EXPECT_NEAR(nl.log_f(s), std::log(nl.f(s)), 1e-12) << nl.label();
            }
            if (nl.F(s) > 0) {
                EXPECT_NEAR(nl.log_F(s), std::log(nl.F(s)), 1e-11) << nl.label();
            }
        }
    }
    // no overflow far out
    EXPECT_NEAR(Nonlinearity::exponential(1).log_F(1e6), 1e6, 1e-6);
}

TEST(Nonlinearity, JsonRoundTripAndShorthand)
{
    for (const auto& nl : zoo()) {
        auto back = Nonlinearity::from_json(nl.to_json());
        EXPECT_EQ(back.to_json(), nl.to_json());
    }
    EXPECT_EQ(Nonlinearity::parse("power:3").to_json(), Nonlinearity::power(3).to_json());
    EXPECT_FALSE(Nonlinearity::parse("exp:1:unshifted").shifted());
    EXPECT_THROW(Nonlinearity::parse("cubic:3"), Error);
    EXPECT_THROW(Nonlinearity::from_json(json{{"kind", "power"}}), Error);
}

TEST(KellerOsserman, Oracles)
{
    // int_1^inf 2 s^-2 = 2
    auto v = keller_osserman(Nonlinearity::power(3), 1.0);
    EXPECT_TRUE(v.holds);
    EXPECT_NEAR(v.value, 2.0, 2e-6);
    EXPECT_LT(v.error_bound, 0.1 * v.value);
    EXPECT_FALSE(keller_osserman(Nonlinearity::linear(1), 1.0).holds);
    auto e = keller_osserman(Nonlinearity::exponential(1), 1.0);
    EXPECT_TRUE(e.holds);
    EXPECT_GT(e.value, 0);
}

TEST(OdeBlowup, Oracles)
{
    auto v = ode_blowup_condition(Nonlinearity::power(2), 1.0);
    EXPECT_TRUE(v.holds);
    EXPECT_NEAR(v.value, 1.0, 1e-6);
    EXPECT_FALSE(ode_blowup_condition(Nonlinearity::linear(1), 1.0).holds);
    auto w = ode_blowup_condition(Nonlinearity::power(1.5), 4.0);
    EXPECT_NEAR(w.value, 1.0, 1e-6);
    EXPECT_THROW(ode_blowup_condition(Nonlinearity::power(2), 0.0), Error);
}

TEST(WeakSingularity, ExponentBoundary)
{
    EXPECT_TRUE(weak_singularity(Nonlinearity::power(2), 3, 1.0).holds);
    auto v = weak_singularity(Nonlinearity::power(3), 3, 1.0);
    EXPECT_FALSE(v.holds);
    EXPECT_TRUE(v.has_flag("exponent_test_fails"));
    EXPECT_FALSE(weak_singularity(Nonlinearity::power(2), 4, 1.0).holds);
    // int_1^inf s^-4 s^2 = 1
    EXPECT_NEAR(weak_singularity(Nonlinearity::power(2), 3, 1.0).value, 1.0, 1e-6);
    EXPECT_THROW(weak_singularity(Nonlinearity::power(2), 2, 1.0), Error);
}

TEST(WeakSingularity, NearCriticalTailIsInconclusive)
{
    // s^-4 s^(3-0.02): slope -1.02 sits inside the band but away from -1
    EXPECT_THROW(weak_singularity(Nonlinearity::power(2.98), 3, 1.0), Error);
}

TEST(ExpOrder, Oracles)
{
    auto e = exp_order_of_growth(Nonlinearity::exponential(2));
    EXPECT_TRUE(e.holds);
    EXPECT_NEAR(e.value, 2.0, 1e-8);
    EXPECT_EQ(exp_order_of_growth(Nonlinearity::power(3)).value, 0.0);
    EXPECT_EQ(exp_order_of_growth(Nonlinearity::linear(1)).value, 0.0);
    EXPECT_THROW(exp_order_of_growth(Nonlinearity::tabulated({{0, 0}, {1, 1}})), Error);
}

TEST(SuperadditivityDefect, Oracles)
{
    EXPECT_DOUBLE_EQ(superadditivity_defect(Nonlinearity::power(2), 0, 10).value, 0.0);
    // on [-1,0]^2 the odd square gives 2xy, largest at the corner (-1,-1)
    auto v = superadditivity_defect(Nonlinearity::power(2), -1, 1);
    EXPECT_NEAR(v.value, 2.0, 1e-12);
    EXPECT_TRUE(v.holds);
    // with x = -1 and y > 1 the defect is -2x(x+y), growing toward the far edge
    auto wide = superadditivity_defect(Nonlinearity::power(2), -1, 10);
    EXPECT_NEAR(wide.value, 16.0, 1e-12);
    EXPECT_TRUE(wide.has_flag("PossiblyUnboundedBox"));
    EXPECT_DOUBLE_EQ(superadditivity_defect(Nonlinearity::linear(1), -5, 10).value, 0.0);
    // e^x + e^y - e^{x+y} peaks at the near corner: L(0) = 1
    EXPECT_NEAR(superadditivity_defect(Nonlinearity::exponential(1, false), 0, 5).value, 1.0, 1e-12);
    // shifted exponential below zero: -(e^x - 1)(e^y - 1) grows toward the far edge
    auto u = superadditivity_defect(Nonlinearity::exponential(1), -1, 5);
    EXPECT_FALSE(u.holds);
    EXPECT_TRUE(u.has_flag("PossiblyUnboundedBox"));
}

TEST(SuperadditivityDefect, NeverNegative)
{
    for (const auto& nl : zoo()) {
        if (nl.kind() == NlKind::Tabulated) continue;
        for (double m : {-2.0, 0.0, 1.0}) EXPECT_GE(superadditivity_defect(nl, m, 3).value, 0.0) << nl.label();
    }
}

TEST(ThetaScaling, Oracles)
{
    EXPECT_EQ(theta_scaling_threshold(Nonlinearity::power(2), 0.5, 100).value, 0.0);
    EXPECT_EQ(theta_scaling_threshold(Nonlinearity::exponential(1), 0.5, 100).value, 0.0);
    EXPECT_EQ(theta_scaling_threshold(Nonlinearity::linear(1), 0.5, 100).value, 0.0);
    // e^{r/2} <= e^r / 2 iff r >= 2 ln 2
    auto v = theta_scaling_threshold(Nonlinearity::exponential(1, false), 0.5, 100);
    EXPECT_TRUE(v.holds);
    EXPECT_NEAR(v.value, 2 * std::log(2.0), v.error_bound + 1e-12);
    auto concave = Nonlinearity::tabulated({{0, 0}, {1, 2}, {2, 3}, {100, 4}});
    EXPECT_THROW(theta_scaling_threshold(concave, 0.5, 50), Error);
}

TEST(ThetaScaling, ThresholdNonincreasingInTheta)
{
    auto nl = Nonlinearity::exponential(1, false);
    double prev = kInf;
    for (double th : {0.1, 0.3, 0.5, 0.7, 0.9}) {
        const double r = theta_scaling_threshold(nl, th, 100).value;
        EXPECT_LE(r, prev + 1e-9);
        prev = r;
    }
}

TEST(KZero, Oracles)
{
    EXPECT_EQ(k_zero(Nonlinearity::power(2)), 0.0);
    EXPECT_EQ(k_zero(Nonlinearity::linear(1)), 0.0);
    EXPECT_NEAR(k_zero(Nonlinearity::tabulated({{0, 0}, {1, 0}, {3, 2}})), 1.0, 1e-10);
    EXPECT_THROW(k_zero(Nonlinearity::linear(0)), Error);
}

TEST(Verdict, JsonShape)
{
    auto j = keller_osserman(Nonlinearity::linear(1), 1.0).to_json();
    EXPECT_EQ(j["condition"], "KellerOsserman");
    EXPECT_EQ(j["holds"], false);
    EXPECT_TRUE(j["value"].is_null());
    for (const char* key : {"condition", "holds", "value", "error_bound", "flags"}) EXPECT_TRUE(j.contains(key));
}
