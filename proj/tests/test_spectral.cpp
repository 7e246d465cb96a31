#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aniso/errors.hpp"
#include "aniso/problem.hpp"
#include "aniso/spectral.hpp"

using namespace aniso;
using std::numbers::pi;

TEST(CosineCoeffs, OrthogonalityOfSingleModes)
{
    for (int m = 1; m <= 6; ++m) {
        const CosineSeries s = cosine_coeffs([m](double x) { return std::cos(m * pi * x); }, 8, 1024);
        for (int k = 1; k <= 8; ++k) {
            EXPECT_NEAR(s.coeff(k), k == m ? 1.0 : 0.0, 1e-10) << "m=" << m << " k=" << k;
        }
    }
}

TEST(CosineCoeffs, QuarticMatchesClosedForm)
{
    // 16 x^2 (x-1)^2 - 8/15 has c_k = -768 / (k pi)^4 for even k, 0 for odd k.
    const CosineSeries s = cosine_coeffs(
        [](double x) { return 16.0 * x * x * (x - 1.0) * (x - 1.0) - 8.0 / 15.0; }, 16, 1024);
    for (int k = 1; k <= 16; ++k) {
        const double expected = k % 2 == 0 ? -768.0 / std::pow(k * pi, 4) : 0.0;
        EXPECT_NEAR(s.coeff(k), expected, 2e-11) << k;
    }
    EXPECT_NEAR(s.coeff(2), -0.49276714822484808908, 1e-11);
    EXPECT_NEAR(s.tail(), 768.0 / std::pow(16 * pi, 4), 1e-11);
}

TEST(CosineCoeffs, SynthesisReproducesSmoothFunction)
{
    auto g = [](double x) { return std::cos(pi * x) + 0.25 * std::cos(2 * pi * x); };
    const CosineSeries s = cosine_coeffs(g, 16);
    for (double x : {0.0, 0.2, 0.5, 0.93, 1.0}) {
        EXPECT_NEAR(eval_series(s, x), g(x), 1e-10);
    }
}

TEST(CosineCoeffs, RejectsNonzeroMean)
{
    EXPECT_THROW(cosine_coeffs([](double) { return 1.0; }, 4), NotZeroMean);
}

TEST(CosineTransform, RejectsZeroModes)
{
    EXPECT_THROW(CosineTransform(0, 64), InvalidArgument);
}

TEST(Decay, FlushesToZero)
{
    EXPECT_EQ(decay(0.0), 1.0);
    EXPECT_NEAR(decay(2.0), std::exp(-2.0), 1e-16);
    EXPECT_EQ(decay(800.0), 0.0);
}

namespace {

ProblemSpec cosine_force()
{
    ProblemSpec p;
    p.name = "cosine-force";
    p.f = [](double x, double y) { return std::cos(pi * x) * (1.0 + y * y); };
    p.phi0 = [](double) { return 0.0; };
    p.phi1 = [](double) { return 0.0; };
    p.eps = 0.2;
    return p;
}

} // namespace

TEST(Antiderivatives, ClosedFormForCosineForce)
{
    const DecomposedProblem d = decompose(cosine_force(), 512);
    const AntiderivativeStack stack = build_antiderivatives(d, 512);
    for (double y : {0.0, 0.4, 1.0}) {
        const double g = 1.0 + y * y;
        for (double x : {0.0, 0.17, 0.5, 0.803, 1.0}) {
            EXPECT_NEAR(stack.eval(0, x, y), std::cos(pi * x) * g, 1e-9);
            EXPECT_NEAR(stack.eval(1, x, y), std::sin(pi * x) / pi * g, 1e-10);
            EXPECT_NEAR(stack.eval(2, x, y), (1.0 - std::cos(pi * x)) / (pi * pi) * g, 1e-10);
            EXPECT_NEAR(stack.eval(3, x, y), (x - std::sin(pi * x) / pi) / (pi * pi) * g, 1e-10);
        }
    }
}

TEST(Antiderivatives, FirstLevelVanishesAtOne)
{
    const DecomposedProblem d = decompose(builtin_problem("paper"), 1024);
    const AntiderivativeStack stack = build_antiderivatives(d, 1024);
    for (double y : {0.0, 0.33, 0.9}) {
        EXPECT_NEAR(stack.eval(1, 1.0, y), 0.0, 1e-13);
        EXPECT_NEAR(stack.eval(1, 0.0, y), 0.0, 0.0);
    }
}

TEST(Antiderivatives, TablesAreMemoized)
{
    const DecomposedProblem d = decompose(builtin_problem("paper"), 64);
    const AntiderivativeStack stack = build_antiderivatives(d, 64);
    EXPECT_EQ(stack.table(0.25).get(), stack.table(0.25).get());
    EXPECT_THROW((void)stack.eval(4, 0.5, 0.5), InvalidArgument);
}
