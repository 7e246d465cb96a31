#pragma once

/// \file problem.hpp
/// Problem instances of the strongly anisotropic equation
///
///     -eps^-2 u_xx - u_yy = f   on (0,1)^2,
///     u_x = 0 at x = 0, 1,      u = phi0 at y = 0,  u = phi1 at y = 1,
///
/// and the split of the data into x-means and zero-mean fluctuations.

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/quadrature.hpp"

namespace aniso {

using ScalarFn1 = std::function<double(double)>;
using ScalarFn2 = std::function<double(double, double)>;

inline constexpr int kDefaultQuadPoints = 1024;
inline constexpr double kDefaultCompatTol = 1e-8;
inline constexpr double kDefaultCompatStep = 1e-6;
inline constexpr double kDefaultDerivTol = 1e-4;

struct ProblemSpec {
    std::string name = "custom";
    ScalarFn2 f;
    /// Entry j-1 is the analytic derivative d^j f / dy^j.
    std::vector<ScalarFn2> f_y_derivs;
    ScalarFn1 phi0;
    ScalarFn1 phi1;
    double eps = 0.1;

    [[nodiscard]] ProblemSpec with_eps(double e) const
    {
        ProblemSpec p = *this;
        p.eps = e;
        return p;
    }
    [[nodiscard]] ProblemSpec with_eps2(double eps2) const { return with_eps(std::sqrt(eps2)); }

    /// d^order f / dy^order, order 0 being f itself.
    [[nodiscard]] const ScalarFn2& y_derivative(int order) const
    {
        if (order == 0) {
            return f;
        }
        if (order < 0 || static_cast<std::size_t>(order) > f_y_derivs.size()) {
            throw MissingDerivatives("problem '" + name + "' has no analytic d^" +
                                     std::to_string(order) + "f/dy^" + std::to_string(order));
        }
        return f_y_derivs[static_cast<std::size_t>(order - 1)];
    }
};

inline void validate(const ProblemSpec& p)
{
    if (!(p.eps > 0.0) || !std::isfinite(p.eps)) {
        throw InvalidArgument("eps must be positive and finite");
    }
    if (!p.f || !p.phi0 || !p.phi1) {
        throw InvalidArgument("problem '" + p.name + "' is missing f, phi0 or phi1");
    }
}

namespace detail {

inline double checked(double v, const char* what, double x, double y = 0.0)
{
    if (!std::isfinite(v)) {
        throw NonFiniteValue(std::string(what) + " is not finite at (" + std::to_string(x) +
                             ", " + std::to_string(y) + ")");
    }
    return v;
}

} // namespace detail

/// Mean/fluctuation split of the data. Means over x use composite Simpson on
/// quad_points + 1 uniform nodes; all quantities are evaluated on demand.
class DecomposedProblem {
public:
    DecomposedProblem(ProblemSpec p, int quad_points)
        : problem_(std::move(p)),
          quad_points_(quad_points),
          x_nodes_(quad::uniform_nodes(0.0, 1.0, quad_points)),
          weights_(quad::simpson_weights(0.0, 1.0, quad_points))
    {
        double s0 = 0.0;
        double s1 = 0.0;
        for (std::size_t i = 0; i < x_nodes_.size(); ++i) {
            const double x = x_nodes_[i];
            s0 += weights_[i] * detail::checked(problem_.phi0(x), "phi0", x);
            s1 += weights_[i] * detail::checked(problem_.phi1(x), "phi1", x);
        }
        phibar0_ = s0;
        phibar1_ = s1;
        // f is checked on every x node for a coarse set of rows; every other
        // row is checked when it is first integrated.
        constexpr int kRows = 64;
        for (int r = 0; r <= kRows; ++r) {
            (void)fbar(static_cast<double>(r) / kRows);
        }
    }

    [[nodiscard]] const ProblemSpec& problem() const { return problem_; }
    [[nodiscard]] int quad_points() const { return quad_points_; }
    [[nodiscard]] const std::vector<double>& x_nodes() const { return x_nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

    [[nodiscard]] double phibar0() const { return phibar0_; }
    [[nodiscard]] double phibar1() const { return phibar1_; }
    [[nodiscard]] double phitilde0(double x) const { return problem_.phi0(x) - phibar0_; }
    [[nodiscard]] double phitilde1(double x) const { return problem_.phi1(x) - phibar1_; }

    /// x-mean of f at height y.
    [[nodiscard]] double fbar(double y) const
    {
        double s = 0.0;
        for (std::size_t i = 0; i < x_nodes_.size(); ++i) {
            s += weights_[i] * detail::checked(problem_.f(x_nodes_[i], y), "f", x_nodes_[i], y);
        }
        return s;
    }

    [[nodiscard]] double ftilde(double x, double y) const { return problem_.f(x, y) - fbar(y); }

    /// Zero-mean fluctuation of d^order f/dy^order sampled on the x nodes.
    [[nodiscard]] std::vector<double> tilde_row(int order, double y) const
    {
        const ScalarFn2& g = problem_.y_derivative(order);
        std::vector<double> row(x_nodes_.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < row.size(); ++i) {
            row[i] = detail::checked(g(x_nodes_[i], y), "f derivative", x_nodes_[i], y);
            mean += weights_[i] * row[i];
        }
        for (double& v : row) {
            v -= mean;
        }
        return row;
    }

private:
    ProblemSpec problem_;
    int quad_points_;
    std::vector<double> x_nodes_;
    std::vector<double> weights_;
    double phibar0_ = 0.0;
    double phibar1_ = 0.0;
};

inline DecomposedProblem decompose(const ProblemSpec& p, int quad_points = kDefaultQuadPoints)
{
    validate(p);
    if (quad_points < 8) {
        throw InvalidArgument("quad_points must be >= 8");
    }
    return DecomposedProblem(p, quad_points);
}

struct CompatibilityReport {
    /// |phi0'(0)|, |phi0'(1)|, |phi1'(0)|, |phi1'(1)|
    std::array<double, 4> slopes{};
    double tol = kDefaultCompatTol;
    bool pass = false;
};

/// Corner compatibility phi0' = phi1' = 0 at x = 0, 1, checked with one-sided
/// second-order difference quotients.
inline CompatibilityReport check_compatibility(const ProblemSpec& p,
                                               double h = kDefaultCompatStep,
                                               double tol_compat = kDefaultCompatTol)
{
    if (!(h > 0.0 && h < 1e-2)) {
        throw InvalidArgument("compatibility step must lie in (0, 1e-2)");
    }
    auto left = [h](const ScalarFn1& g) {
        return std::abs((-3.0 * g(0.0) + 4.0 * g(h) - g(2.0 * h)) / (2.0 * h));
    };
    auto right = [h](const ScalarFn1& g) {
        return std::abs((3.0 * g(1.0) - 4.0 * g(1.0 - h) + g(1.0 - 2.0 * h)) / (2.0 * h));
    };
    CompatibilityReport r;
    r.tol = tol_compat;
    r.slopes = {left(p.phi0), right(p.phi0), left(p.phi1), right(p.phi1)};
    r.pass = true;
    for (double s : r.slopes) {
        r.pass = r.pass && std::isfinite(s) && s <= tol_compat;
    }
    return r;
}

struct DerivativeCheck {
    double max_deviation = 0.0;
    int worst_order = 0;
    bool pass = true;
};

/// Central-difference sanity check of the supplied y-derivatives of f. The
/// deviation is relative to max(1, |d^j f|).
inline DerivativeCheck check_derivatives(const ProblemSpec& p, double h = 1e-4,
                                         double tol_deriv = kDefaultDerivTol)
{
    DerivativeCheck out;
    constexpr int kSamples = 7;
    for (std::size_t j = 1; j <= p.f_y_derivs.size(); ++j) {
        const ScalarFn2& lower = p.y_derivative(static_cast<int>(j) - 1);
        const ScalarFn2& upper = p.y_derivative(static_cast<int>(j));
        for (int a = 0; a <= kSamples; ++a) {
            for (int b = 1; b < kSamples; ++b) {
                const double x = static_cast<double>(a) / kSamples;
                const double y = static_cast<double>(b) / kSamples;
                const double fd = (lower(x, y + h) - lower(x, y - h)) / (2.0 * h);
                const double exact = upper(x, y);
                const double dev = std::abs(fd - exact) / std::max(1.0, std::abs(exact));
                if (dev > out.max_deviation) {
                    out.max_deviation = dev;
                    out.worst_order = static_cast<int>(j);
                }
            }
        }
    }
    out.pass = out.max_deviation <= tol_deriv;
    return out;
}

inline const std::vector<std::string>& builtin_problem_names()
{
    static const std::vector<std::string> names = {"paper", "constant-force", "no-layer", "zero"};
    return names;
}

namespace detail {

inline ProblemSpec paper_problem()
{
    using std::numbers::pi;
    ProblemSpec p;
    p.name = "paper";
    // f = sin(s), s = pi (x^2 + y^2), ds/dy = 2 pi y.
    p.f = [](double x, double y) { return std::sin(pi * (x * x + y * y)); };
    p.f_y_derivs = {
        [](double x, double y) { return 2.0 * pi * y * std::cos(pi * (x * x + y * y)); },
        [](double x, double y) {
            const double s = pi * (x * x + y * y);
            return 2.0 * pi * std::cos(s) - 4.0 * pi * pi * y * y * std::sin(s);
        },
        [](double x, double y) {
            const double s = pi * (x * x + y * y);
            return -12.0 * pi * pi * y * std::sin(s) - 8.0 * pi * pi * pi * y * y * y * std::cos(s);
        },
        [](double x, double y) {
            const double s = pi * (x * x + y * y);
            const double y2 = y * y;
            return -12.0 * pi * pi * std::sin(s) - 48.0 * pi * pi * pi * y2 * std::cos(s) +
                   16.0 * pi * pi * pi * pi * y2 * y2 * std::sin(s);
        },
    };
    p.phi0 = [](double x) { return std::cos(pi * x); };
    p.phi1 = [](double x) { return 16.0 * x * x * (x - 1.0) * (x - 1.0); };
    return p;
}

inline ScalarFn2 zero2() { return [](double, double) { return 0.0; }; }

} // namespace detail

/// Named problem instances; the CLI accepts exactly these names.
///
///   paper           f = sin(pi (x^2 + y^2)), phi0 = cos(pi x), phi1 = 16 x^2 (x-1)^2
///   constant-force  f = 1, phi0 = cos(pi x), phi1 = 0
///   no-layer        f = pi^2 sin(pi y), phi0 = 1, phi1 = 2
///   zero            f = 0, phi0 = 0, phi1 = 0
///
/// All carry analytic y-derivatives of f up to order 4.
inline ProblemSpec builtin_problem(const std::string& name, double eps = std::sqrt(0.05))
{
    using std::numbers::pi;
    ProblemSpec p;
    if (name == "paper") {
        p = detail::paper_problem();
    } else if (name == "constant-force") {
        p.name = name;
        p.f = [](double, double) { return 1.0; };
        p.f_y_derivs.assign(4, detail::zero2());
        p.phi0 = [](double x) { return std::cos(pi * x); };
        p.phi1 = [](double) { return 0.0; };
    } else if (name == "no-layer") {
        p.name = name;
        p.f = [](double, double y) { return pi * pi * std::sin(pi * y); };
        p.f_y_derivs = {
            [](double, double y) { return std::pow(pi, 3) * std::cos(pi * y); },
            [](double, double y) { return -std::pow(pi, 4) * std::sin(pi * y); },
            [](double, double y) { return -std::pow(pi, 5) * std::cos(pi * y); },
            [](double, double y) { return std::pow(pi, 6) * std::sin(pi * y); },
        };
        p.phi0 = [](double) { return 1.0; };
        p.phi1 = [](double) { return 2.0; };
    } else if (name == "zero") {
        p.name = name;
        p.f = detail::zero2();
        p.f_y_derivs.assign(4, detail::zero2());
        p.phi0 = [](double) { return 0.0; };
        p.phi1 = [](double) { return 0.0; };
    } else {
        throw UnknownProblem(name);
    }
    p.eps = eps;
    return p;
}

} // namespace aniso
