#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "aniso/errors.hpp"
#include "aniso/problem.hpp"

using namespace aniso;
using std::numbers::pi;

namespace {

ProblemSpec constant_data(double c)
{
    ProblemSpec p;
    p.name = "constant";
    p.f = [](double, double) { return 0.0; };
    p.phi0 = [c](double) { return c; };
    p.phi1 = [c](double) { return c; };
    p.eps = 0.5;
    return p;
}

} // namespace

TEST(Decompose, ConstantDataHasNoFluctuation)
{
    const DecomposedProblem d = decompose(constant_data(3.0));
    EXPECT_NEAR(d.phibar0(), 3.0, 1e-14);
    EXPECT_NEAR(d.phibar1(), 3.0, 1e-14);
    EXPECT_NEAR(d.fbar(0.4), 0.0, 0.0);
    for (double x : {0.0, 0.3, 1.0}) {
        EXPECT_NEAR(d.phitilde0(x), 0.0, 1e-14);
        EXPECT_NEAR(d.phitilde1(x), 0.0, 1e-14);
    }
}

TEST(Decompose, CosineBoundaryDataHasZeroMean)
{
    const DecomposedProblem d = decompose(builtin_problem("paper"));
    EXPECT_NEAR(d.phibar0(), 0.0, 1e-15);
    for (double x : {0.1, 0.5, 0.77}) {
        EXPECT_NEAR(d.phitilde0(x), std::cos(pi * x), 1e-15);
    }
}

TEST(Decompose, QuarticBoundaryMeanIsEightFifteenths)
{
    // int_0^1 16 x^2 (x - 1)^2 dx = 16 (1/5 - 1/2 + 1/3) = 8/15
    const DecomposedProblem d = decompose(builtin_problem("paper"), 1024);
    EXPECT_NEAR(d.phibar1(), 8.0 / 15.0, 1e-11);
}

TEST(Decompose, FbarMatchesHighPrecisionOracle)
{
    // int_0^1 sin(pi (x^2 + 0.09)) dx, 30-digit adaptive quadrature
    const DecomposedProblem d = decompose(builtin_problem("paper"), 1024);
    EXPECT_NEAR(d.fbar(0.3), 0.5891465632467091571, 1e-11);
}

TEST(Decompose, ReassemblyIsPointwiseExact)
{
    const ProblemSpec p = builtin_problem("paper");
    const DecomposedProblem d = decompose(p);
    for (double x : {0.0, 0.123, 0.5, 0.987, 1.0}) {
        EXPECT_NEAR(d.phibar0() + d.phitilde0(x), p.phi0(x), 1e-12);
        EXPECT_NEAR(d.phibar1() + d.phitilde1(x), p.phi1(x), 1e-12);
        for (double y : {0.0, 0.31, 1.0}) {
            EXPECT_NEAR(d.fbar(y) + d.ftilde(x, y), p.f(x, y), 1e-12);
        }
    }
}

TEST(Decompose, TildePartsIntegrateToZero)
{
    const DecomposedProblem d = decompose(builtin_problem("paper"), 256);
    for (int order = 0; order <= 4; ++order) {
        const auto row = d.tilde_row(order, 0.7);
        double s = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            s += d.weights()[i] * row[i];
        }
        EXPECT_NEAR(s, 0.0, 1e-12) << order;
    }
}

TEST(Decompose, RejectsNonFiniteData)
{
    ProblemSpec p = constant_data(1.0);
    p.phi1 = [](double x) { return x > 0.5 ? std::numeric_limits<double>::quiet_NaN() : 0.0; };
    EXPECT_THROW(decompose(p), NonFiniteValue);
    ProblemSpec q = constant_data(1.0);
    q.f = [](double, double y) { return 1.0 / (y - 0.5); };
    EXPECT_THROW(decompose(q), NonFiniteValue);
}

TEST(Decompose, RequiresEightQuadratureIntervals)
{
    EXPECT_THROW(decompose(constant_data(1.0), 4), InvalidArgument);
}

TEST(Compatibility, CosineAndQuarticPass)
{
    const CompatibilityReport r = check_compatibility(builtin_problem("paper"));
    EXPECT_TRUE(r.pass);
    for (double s : r.slopes) {
        EXPECT_LT(s, 1e-8);
    }
}

TEST(Compatibility, LinearDataFails)
{
    ProblemSpec p = constant_data(0.0);
    p.phi0 = [](double x) { return x; };
    const CompatibilityReport r = check_compatibility(p);
    EXPECT_FALSE(r.pass);
    EXPECT_NEAR(r.slopes[0], 1.0, 1e-8);
    EXPECT_NEAR(r.slopes[1], 1.0, 1e-8);
    EXPECT_NEAR(r.slopes[2], 0.0, 1e-12);
}

TEST(Compatibility, RejectsLargeStep)
{
    EXPECT_THROW(check_compatibility(constant_data(0.0), 0.05), InvalidArgument);
}

TEST(Derivatives, BuiltinsAreConsistent)
{
    for (const auto& name : builtin_problem_names()) {
        const ProblemSpec p = builtin_problem(name);
        EXPECT_EQ(p.f_y_derivs.size(), 4U) << name;
        EXPECT_TRUE(check_derivatives(p).pass) << name;
    }
}

TEST(Derivatives, WrongDerivativeIsCaught)
{
    ProblemSpec p = builtin_problem("paper");
    p.f_y_derivs[1] = [](double, double) { return 0.0; };
    EXPECT_FALSE(check_derivatives(p).pass);
}

TEST(Derivatives, MissingOrderThrows)
{
    ProblemSpec p = builtin_problem("paper");
    p.f_y_derivs.resize(1);
    EXPECT_NO_THROW((void)p.y_derivative(1));
    EXPECT_THROW((void)p.y_derivative(2), MissingDerivatives);
}

TEST(Registry, NamesAndInstances)
{
    const ProblemSpec zero = builtin_problem("zero");
    EXPECT_EQ(zero.f(0.3, 0.4), 0.0);
    EXPECT_EQ(zero.phi0(0.2), 0.0);
    EXPECT_EQ(zero.phi1(0.9), 0.0);

    const DecomposedProblem nl = decompose(builtin_problem("no-layer"));
    for (double x : {0.1, 0.6}) {
        EXPECT_NEAR(nl.phitilde0(x), 0.0, 1e-14);
        EXPECT_NEAR(nl.phitilde1(x), 0.0, 1e-14);
        EXPECT_NEAR(nl.ftilde(x, 0.37), 0.0, 1e-12);
    }
    EXPECT_THROW(builtin_problem("nope"), UnknownProblem);
    EXPECT_THROW(builtin_problem("nope"), InvalidArgument);
}

TEST(Registry, EpsHelpers)
{
    const ProblemSpec p = builtin_problem("paper").with_eps2(0.01);
    EXPECT_NEAR(p.eps, 0.1, 1e-16);
    EXPECT_THROW(validate(builtin_problem("paper", -1.0)), InvalidArgument);
}
