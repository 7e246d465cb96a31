#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "aniso/errors.hpp"
#include "aniso/fdsolver.hpp"
#include "aniso/grid.hpp"
#include "aniso/problem.hpp"

using namespace aniso;
using std::numbers::pi;

namespace {

ProblemSpec make(ScalarFn2 f, ScalarFn1 phi0, ScalarFn1 phi1, double eps)
{
    ProblemSpec p;
    p.name = "test";
    p.f = std::move(f);
    p.phi0 = std::move(phi0);
    p.phi1 = std::move(phi1);
    p.eps = eps;
    return p;
}

ScalarFn1 constant(double c)
{
    return [c](double) { return c; };
}

} // namespace

TEST(FdSolver, ZeroProblemGivesZero)
{
    const FdSolution s = solve_fd(builtin_problem("zero"), Grid2D(8, 8));
    EXPECT_EQ(s.field.max_abs(), 0.0);
    EXPECT_EQ(s.stats.iterations, 0);
}

TEST(FdSolver, QuadraticInYIsReproducedExactly)
{
    // -u_yy = 1 with zero data: u = y (1 - y) / 2, exact for the 3-point stencil.
    for (double eps : {1.0, 0.1, 0.01}) {
        const ProblemSpec p = make([](double, double) { return 1.0; }, constant(0.0), constant(0.0), eps);
        const FdSolution s = solve_fd(p, Grid2D(16, 32));
        EXPECT_LT(linf_distance(s.field, [](double, double y) { return 0.5 * y * (1.0 - y); }), 1e-12)
            << eps;
    }
}

TEST(FdSolver, LinearProfileFromTopData)
{
    const ProblemSpec p = make([](double, double) { return 0.0; }, constant(0.0), constant(1.0), 0.3);
    const FdSolution s = solve_fd(p, Grid2D(8, 10));
    EXPECT_LT(linf_distance(s.field, [](double, double y) { return y; }), 1e-13);
}

TEST(FdSolver, DirichletRowsHoldTheData)
{
    const ProblemSpec p = builtin_problem("paper");
    const Grid2D g(16, 8);
    const FdSolution s = solve_fd(p, g);
    for (int i = 0; i < g.nx; ++i) {
        EXPECT_EQ(s.field(i, 0), p.phi0(g.x(i)));
        EXPECT_EQ(s.field(i, g.ny), p.phi1(g.x(i)));
    }
}

TEST(FdSolver, SecondOrderOnSeparableSolution)
{
    // u = cos(pi x) sinh(pi (1 - y) / eps) / sinh(pi / eps) solves the
    // homogeneous equation with phi0 = cos(pi x), phi1 = 0.
    const double eps = 0.5;
    const ProblemSpec p = make([](double, double) { return 0.0; },
                               [](double x) { return std::cos(pi * x); }, constant(0.0), eps);
    auto exact = [eps](double x, double y) {
        return std::cos(pi * x) * std::sinh(pi * (1.0 - y) / eps) / std::sinh(pi / eps);
    };
    const double e1 = linf_distance(solve_fd(p, Grid2D(16, 16)).field, exact);
    const double e2 = linf_distance(solve_fd(p, Grid2D(32, 32)).field, exact);
    const double e3 = linf_distance(solve_fd(p, Grid2D(64, 64)).field, exact);
    EXPECT_NEAR(e1 / e2, 4.0, 0.2);
    EXPECT_NEAR(e2 / e3, 4.0, 0.1);
}

TEST(FdSolver, PreconditionersAgree)
{
    const ProblemSpec p = builtin_problem("paper").with_eps2(0.05);
    const Grid2D g(16, 16);
    FdOptions fast;
    FdOptions sgs;
    sgs.preconditioner = Preconditioner::SymmetricGaussSeidel;
    FdOptions plain;
    plain.preconditioner = Preconditioner::None;
    plain.max_iter = 5000;
    const FdSolution a = solve_fd(p, g, fast);
    const FdSolution b = solve_fd(p, g, sgs);
    const FdSolution c = solve_fd(p, g, plain);
    EXPECT_LE(a.stats.iterations, 3);
    EXPECT_GT(b.stats.iterations, a.stats.iterations);
    EXPECT_LT(linf_distance(a.field, b.field), 1e-9);
    EXPECT_LT(linf_distance(a.field, c.field), 1e-9);
    EXPECT_LE(a.stats.relative_residual, fast.tol);
}

TEST(FdSolver, FastPreconditionerStaysExactAtSmallEps)
{
    const ProblemSpec p = builtin_problem("paper").with_eps2(0.001);
    const FdSolution s = solve_fd(p, Grid2D(256, 64));
    EXPECT_LE(s.stats.iterations, 3);
    EXPECT_TRUE(s.field.all_finite());
}

// Wide grid, small eps: a double iterate alone stalls near 1.5e-11 here.
TEST(FdSolver, ReachesTightToleranceOnWideGrid)
{
    const ProblemSpec p = builtin_problem("paper").with_eps2(0.001);
    const FdSolution s = solve_fd(p, Grid2D(2048, 256));
    EXPECT_LE(s.stats.relative_residual, 1e-11);
    EXPECT_LE(s.stats.iterations, 10);
}

TEST(FdSolver, ReportsNoConvergence)
{
    FdOptions opt;
    opt.preconditioner = Preconditioner::SymmetricGaussSeidel;
    opt.max_iter = 1;
    EXPECT_THROW(solve_fd(builtin_problem("paper"), Grid2D(32, 32), opt), NoConvergence);
}

TEST(FdSolver, ArgumentChecks)
{
    EXPECT_THROW(solve_fd(builtin_problem("paper"), Grid2D(8, 8), 1e-16, 10), InvalidArgument);
    EXPECT_THROW(solve_fd(builtin_problem("paper"), Grid2D(8, 8), 1e-10, 0), InvalidArgument);
    EXPECT_THROW(Grid2D(1, 8), InvalidArgument);
    ProblemSpec bad = builtin_problem("paper");
    bad.f = [](double x, double) { return x > 0.5 ? NAN : 0.0; };
    EXPECT_THROW(solve_fd(bad, Grid2D(8, 8)), NonFiniteValue);
}

TEST(Grid, NodesAndCsv)
{
    const Grid2D g(4, 2);
    EXPECT_DOUBLE_EQ(g.x(0), 0.125);
    EXPECT_DOUBLE_EQ(g.x(3), 0.875);
    EXPECT_DOUBLE_EQ(g.y(2), 1.0);
    EXPECT_EQ(g.size(), 12U);
    const Field2D f = Field2D::sample(g, [](double x, double y) { return x + 10 * y; });
    std::ostringstream os;
    write_field_csv(os, f);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, text.find('\n')), "x,y,value");
    EXPECT_NE(text.find("0.125,0,0.125\n"), std::string::npos);
    EXPECT_THROW((void)linf_distance(f, Field2D(Grid2D(4, 4))), GridMismatch);
    EXPECT_EQ(linf_distance(f, f), 0.0);
}
