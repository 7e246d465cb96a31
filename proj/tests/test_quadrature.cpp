#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/quadrature.hpp"

namespace q = aniso::quad;

TEST(Simpson, ExactForCubics)
{
    auto f = [](double x) { return 4.0 * x * x * x - 3.0 * x * x + 2.0 * x - 1.0; };
    // int_0^1 = 1 - 1 + 1 - 1
    EXPECT_NEAR(q::simpson(f, 0.0, 1.0, 2), 0.0, 1e-15);
    EXPECT_NEAR(q::simpson(f, 0.0, 2.0, 8), 16.0 - 8.0 + 4.0 - 2.0, 1e-13);
}

TEST(Simpson, WeightsMatchTemplateRule)
{
    const auto nodes = q::uniform_nodes(0.0, 1.0, 64);
    const auto w = q::simpson_weights(0.0, 1.0, 64);
    std::vector<double> g(nodes.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = std::exp(nodes[i]);
    }
    const double viaTemplate = q::simpson([](double x) { return std::exp(x); }, 0.0, 1.0, 64);
    EXPECT_NEAR(q::dot(w, g), viaTemplate, 1e-15);
    EXPECT_NEAR(viaTemplate, std::numbers::e - 1.0, 1e-9);
}

TEST(Simpson, FourthOrderConvergence)
{
    auto f = [](double x) { return std::sin(3.0 * x); };
    const double exact = (1.0 - std::cos(3.0)) / 3.0;
    const double e1 = std::abs(q::simpson(f, 0.0, 1.0, 16) - exact);
    const double e2 = std::abs(q::simpson(f, 0.0, 1.0, 32) - exact);
    EXPECT_NEAR(e1 / e2, 16.0, 0.5);
}

TEST(Simpson, RejectsOddIntervalCount)
{
    EXPECT_THROW(q::simpson_weights(0.0, 1.0, 7), aniso::InvalidArgument);
    EXPECT_THROW(q::require_even_intervals(4, 8), aniso::InvalidArgument);
}

TEST(CumulativeSimpson, ExactForQuadraticsAtEveryNode)
{
    const int n = 11; // odd node count leaves a trailing odd node
    const double h = 0.1;
    std::vector<double> g(n);
    for (int i = 0; i < n; ++i) {
        const double x = i * h;
        g[static_cast<std::size_t>(i)] = 3.0 * x * x - x + 2.0;
    }
    const auto c = q::cumulative_simpson(g, h);
    for (int i = 0; i < n; ++i) {
        const double x = i * h;
        EXPECT_NEAR(c[static_cast<std::size_t>(i)], x * x * x - 0.5 * x * x + 2.0 * x, 1e-14) << i;
    }
}

TEST(CumulativeSimpson, EvenLengthTableEndsWithMirroredRule)
{
    const double h = 0.125;
    std::vector<double> g(8);
    for (std::size_t i = 0; i < g.size(); ++i) {
        g[i] = static_cast<double>(i) * h;
    }
    const auto c = q::cumulative_simpson(g, h);
    const double xl = 7 * h;
    EXPECT_NEAR(c.back(), 0.5 * xl * xl, 1e-15);
}

TEST(InterpolateCubic, ReturnsNodeValuesAndCubicsExactly)
{
    const double h = 0.25;
    std::vector<double> t(5);
    auto p = [](double x) { return x * x * x - 2.0 * x + 0.5; };
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = p(static_cast<double>(i) * h);
    }
    EXPECT_EQ(q::interpolate_cubic(t, 0.0, h, 0.5), t[2]);
    for (double x : {0.05, 0.3, 0.61, 0.99}) {
        EXPECT_NEAR(q::interpolate_cubic(t, 0.0, h, x), p(x), 1e-14) << x;
    }
}
