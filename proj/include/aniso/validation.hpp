#pragma once

/// \file validation.hpp
/// Remainder norms ||u - u^[2n]||_inf against a finite-difference reference,
/// log-log order fits, and the analytic checks (maximum-principle bound,
/// matching identity, mean-solution oracle).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

#include "aniso/errors.hpp"
#include "aniso/expansion.hpp"
#include "aniso/fdsolver.hpp"
#include "aniso/grid.hpp"
#include "aniso/problem.hpp"
#include "aniso/spectral.hpp"

namespace aniso {

// ---------------------------------------------------------------------------
// Order fits

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0; ///< RMS deviation in log10 units
};

struct FitPoint {
    double eps2 = 0.0;
    double norm = 0.0;
};

/// Least squares of log10(norm) against log10(eps2).
inline FitResult fit_order(const std::vector<FitPoint>& points)
{
    if (points.size() < 3) {
        throw InsufficientPoints("order fit needs at least 3 points, got " +
                                 std::to_string(points.size()));
    }
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& p : points) {
        if (!(p.norm > 0.0) || !(p.eps2 > 0.0)) {
            throw NonPositiveNorm("cannot take the logarithm of norm " + format_double(p.norm) +
                                  " at eps2 = " + format_double(p.eps2));
        }
        sx += std::log10(p.eps2);
        sy += std::log10(p.norm);
    }
    const auto n = static_cast<double>(points.size());
    const double mx = sx / n;
    const double my = sy / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log10(p.eps2) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log10(p.norm) - my);
    }
    if (!(sxx > 0.0)) {
        throw InsufficientPoints("order fit needs at least two distinct eps2 values");
    }
    FitResult r;
    r.slope = sxy / sxx;
    r.intercept = my - r.slope * mx;
    double ss = 0.0;
    for (const auto& p : points) {
        const double e = std::log10(p.norm) - (r.intercept + r.slope * std::log10(p.eps2));
        ss += e * e;
    }
    r.residual = std::sqrt(ss / n);
    return r;
}

// ---------------------------------------------------------------------------
// Maximum-principle bound ||u||_inf <= Phi + G/2 with G = eps^2 sup|f|

struct MaxPrincipleResult {
    double bound = 0.0;
    double max_abs = 0.0;
    bool pass = false;
};

inline constexpr double kMaxPrincipleSlack = 1e-8;

/// Suprema are taken over the grid nodes together with a closed 257 x 257
/// lattice, so corner and lattice extrema of the data are seen exactly.
inline MaxPrincipleResult max_principle_check(const Field2D& u, const ProblemSpec& p)
{
    constexpr int lattice = 256;
    const Grid2D& g = u.grid();
    double phi = 0.0;
    double fsup = 0.0;
    auto see_boundary = [&](double x) {
        phi = std::max({phi, std::abs(p.phi0(x)), std::abs(p.phi1(x))});
    };
    for (int i = 0; i < g.nx; ++i) {
        see_boundary(g.x(i));
    }
    for (int i = 0; i <= lattice; ++i) {
        see_boundary(static_cast<double>(i) / lattice);
    }
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            fsup = std::max(fsup, std::abs(p.f(g.x(i), g.y(j))));
        }
    }
    for (int j = 0; j <= lattice; ++j) {
        for (int i = 0; i <= lattice; ++i) {
            fsup = std::max(fsup, std::abs(p.f(static_cast<double>(i) / lattice,
                                               static_cast<double>(j) / lattice)));
        }
    }
    MaxPrincipleResult r;
    r.bound = phi + 0.5 * p.eps * p.eps * fsup;
    r.max_abs = u.max_abs();
    r.pass = r.max_abs <= r.bound + kMaxPrincipleSlack;
    return r;
}

// ---------------------------------------------------------------------------
// Matching identity 2 int_0^1 (-F~2 + F~3(1, y)) cos(k pi x) dx = f~_k(y) / (k pi)^2

struct IdentityReport {
    double max_deviation = 0.0;
    double worst_y = 0.0;
    int worst_k = 0;
    int modes = 0;
    std::vector<double> y_samples;
};

inline IdentityReport matching_identity_check(const DecomposedProblem& d,
                                              const AntiderivativeStack& stack, int modes,
                                              const std::vector<double>& y_samples)
{
    if (modes < 1) {
        throw InvalidArgument("number of cosine modes must be >= 1");
    }
    const CosineTransform outer_transform(modes, stack.quad_points());
    const CosineTransform force_transform(modes, d.quad_points());
    IdentityReport rep;
    rep.modes = modes;
    rep.y_samples = y_samples;
    for (double y : y_samples) {
        const auto t = stack.table(y);
        const auto& f2 = t->levels[2];
        const double f3_at_one = t->levels[3].back();
        std::vector<double> outer(f2.size());
        for (std::size_t i = 0; i < f2.size(); ++i) {
            outer[i] = -f2[i] + f3_at_one;
        }
        const CosineSeries lhs = outer_transform.analyse(outer);
        const CosineSeries force = force_transform.analyse(d.tilde_row(0, y));
        for (int k = 1; k <= modes; ++k) {
            const double kpi = k * std::numbers::pi;
            const double dev = std::abs(lhs.coeff(k) - force.coeff(k) / (kpi * kpi));
            if (dev > rep.max_deviation || rep.worst_k == 0) {
                rep.max_deviation = std::max(rep.max_deviation, dev);
                rep.worst_y = y;
                rep.worst_k = k;
            }
        }
    }
    return rep;
}

inline std::vector<double> uniform_samples(int count)
{
    if (count < 2) {
        throw InvalidArgument("need at least 2 samples");
    }
    std::vector<double> ys(static_cast<std::size_t>(count));
    for (int j = 0; j < count; ++j) {
        ys[static_cast<std::size_t>(j)] = static_cast<double>(j) / (count - 1);
    }
    return ys;
}

// ---------------------------------------------------------------------------
// Closed-form mean solution against the three-point BVP

struct MeanOracleResult {
    int m = 0;
    double error_m = 0.0;  ///< max |ubar - bvp| on M + 1 nodes
    double error_2m = 0.0; ///< same on 2M + 1 nodes
    double ratio = 0.0;    ///< error_m / error_2m, 4 for a second-order scheme
};

inline double mean_oracle_error(const MeanSolution& ubar, const DecomposedProblem& d, int m)
{
    const std::vector<double> bvp = mean_solution_bvp(d, m);
    double e = 0.0;
    for (int j = 0; j <= m; ++j) {
        e = std::max(e, std::abs(bvp[static_cast<std::size_t>(j)] - ubar(static_cast<double>(j) / m)));
    }
    return e;
}

inline MeanOracleResult mean_oracle(const DecomposedProblem& d, int m,
                                    int quad_points = kDefaultQuadPoints)
{
    const MeanSolution ubar = mean_solution(d, quad_points);
    MeanOracleResult r;
    r.m = m;
    r.error_m = mean_oracle_error(ubar, d, m);
    r.error_2m = mean_oracle_error(ubar, d, 2 * m);
    r.ratio = r.error_2m > 0.0 ? r.error_m / r.error_2m : 0.0;
    return r;
}

// ---------------------------------------------------------------------------
// Finite-difference reference with a self-convergence error estimate

/// The reference is solved on N x (M * y_refine) and read off at the output
/// nodes. With `richardson`, the fine and half-resolution solutions are
/// combined as (4 u_h - u_2h) / 3 to cancel the leading dy^2 error.
struct ReferenceOptions {
    int y_refine = 1;
    bool richardson = false;
    FdOptions fd;
};

struct ReferenceSolution {
    Field2D field;           ///< on the output grid
    double error_estimate;   ///< interior max-norm estimate of |field - u|
    int fine_ny = 0;
    std::vector<MaxPrincipleResult> bound_checks; ///< one per FD solve
    std::vector<SolveStats> solves;
};

namespace detail {

/// Values of `fine` at the nodes of `out` (same N, fine.ny a multiple of out.ny).
inline Field2D restrict_rows(const Field2D& fine, const Grid2D& out)
{
    const Grid2D& fg = fine.grid();
    if (fg.nx != out.nx || fg.ny % out.ny != 0) {
        throw GridMismatch("cannot restrict a " + std::to_string(fg.nx) + "x" +
                           std::to_string(fg.ny) + " field to " + std::to_string(out.nx) + "x" +
                           std::to_string(out.ny));
    }
    const int r = fg.ny / out.ny;
    Field2D f(out);
    for (int j = 0; j <= out.ny; ++j) {
        for (int i = 0; i < out.nx; ++i) {
            f(i, j) = fine(i, j * r);
        }
    }
    return f;
}

/// Interior max |a - b| over output rows j whose height is a node of a grid
/// with `coarse_ny` cells.
inline double common_row_distance(const Field2D& a, const Field2D& b, int coarse_ny)
{
    const Grid2D& g = a.grid();
    double m = 0.0;
    for (int j = 1; j < g.ny; ++j) {
        if ((static_cast<long long>(j) * coarse_ny) % g.ny != 0) {
            continue;
        }
        for (int i = 0; i < g.nx; ++i) {
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
        }
    }
    return m;
}

/// Field on a grid with `ny` cells evaluated at the output rows it shares with
/// `out`; rows it lacks are left at zero and skipped by common_row_distance.
inline Field2D on_output_rows(const Field2D& src, const Grid2D& out)
{
    const Grid2D& sg = src.grid();
    Field2D f(out);
    for (int j = 0; j <= out.ny; ++j) {
        const long long num = static_cast<long long>(j) * sg.ny;
        if (num % out.ny != 0) {
            continue;
        }
        const auto js = static_cast<int>(num / out.ny);
        for (int i = 0; i < out.nx; ++i) {
            f(i, j) = src(i, js);
        }
    }
    return f;
}

} // namespace detail

inline ReferenceSolution reference_solution(const ProblemSpec& p, const Grid2D& g,
                                            const ReferenceOptions& opt = {})
{
    if (opt.y_refine < 1) {
        throw InvalidArgument("y_refine must be >= 1");
    }
    const int fine_ny = g.ny * opt.y_refine;
    if (fine_ny % 4 != 0) {
        throw InvalidArgument("M * y_refine must be divisible by 4 for the error estimate");
    }
    if (opt.richardson && opt.y_refine % 2 != 0) {
        throw InvalidArgument("Richardson extrapolation needs an even y_refine");
    }
    ReferenceSolution ref{Field2D(g), 0.0, fine_ny, {}, {}};
    auto solve_on = [&](int ny) {
        FdSolution s = solve_fd(p, Grid2D(g.nx, ny), opt.fd);
        ref.bound_checks.push_back(max_principle_check(s.field, p));
        ref.solves.push_back(s.stats);
        return detail::on_output_rows(s.field, g);
    };

    const Field2D u1 = solve_on(fine_ny);
    const Field2D u2 = solve_on(fine_ny / 2);
    if (!opt.richardson) {
        ref.field = u1;
        ref.error_estimate = detail::common_row_distance(u1, u2, fine_ny / 2) / 3.0;
        return ref;
    }
    const Field2D u4 = solve_on(fine_ny / 4);
    Field2D rich(g);
    Field2D rich_coarse(g);
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            rich(i, j) = (4.0 * u1(i, j) - u2(i, j)) / 3.0;
            rich_coarse(i, j) = (4.0 * u2(i, j) - u4(i, j)) / 3.0;
        }
    }
    ref.field = rich;
    ref.error_estimate = detail::common_row_distance(rich, rich_coarse, fine_ny / 4) / 15.0;
    return ref;
}

// ---------------------------------------------------------------------------
// Remainder table

inline constexpr double kReferenceMargin = 10.0;

struct ErrorRow {
    double eps2 = 0.0;
    std::vector<double> norms; ///< one per requested order
    double reference_error = 0.0;
    /// Reference error is not kReferenceMargin times below the smallest norm.
    bool flagged = false;
    std::vector<MaxPrincipleResult> bound_checks;
};

struct OrderFit {
    int order = 0;
    FitResult fit;
};

struct ErrorReport {
    std::string problem;
    Grid2D grid;
    int modes = 0;
    int quad_points = 0;
    std::vector<int> orders;
    ReferenceOptions reference;
    NormScope scope = NormScope::Interior;
    std::vector<ErrorRow> rows;
    std::vector<OrderFit> fits;

    [[nodiscard]] std::vector<FitPoint> points(std::size_t order_index, double min_eps2 = 0.0) const
    {
        std::vector<FitPoint> pts;
        for (const auto& r : rows) {
            if (r.eps2 >= min_eps2) {
                pts.push_back({r.eps2, r.norms.at(order_index)});
            }
        }
        return pts;
    }
};

struct RemainderOptions {
    int modes = kDefaultModes;
    int quad_points = kDefaultQuadPoints;
    ReferenceOptions reference;
    /// Dirichlet rows carry only the truncation error of the data series.
    NormScope scope = NormScope::Interior;
    /// Fit slopes over all rows; requires at least 3 eps2 values.
    bool fit = true;
};

inline ErrorReport remainder_norms(const ProblemSpec& p, std::vector<double> eps2_list,
                                   const std::vector<int>& orders, const Grid2D& g,
                                   const RemainderOptions& opt = {})
{
    if (eps2_list.empty()) {
        throw InvalidArgument("no eps2 values given");
    }
    for (double e : eps2_list) {
        if (!(e > 0.0)) {
            throw InvalidArgument("eps2 values must be positive, got " + format_double(e));
        }
    }
    if (orders.empty() || !std::is_sorted(orders.begin(), orders.end()) ||
        std::adjacent_find(orders.begin(), orders.end()) != orders.end() || orders.front() < 0) {
        throw InvalidArgument("orders must be distinct, nonnegative and increasing");
    }
    std::sort(eps2_list.begin(), eps2_list.end());
    if (std::adjacent_find(eps2_list.begin(), eps2_list.end()) != eps2_list.end()) {
        throw InvalidArgument("eps2 values must be distinct");
    }
    if (opt.fit && eps2_list.size() < 3) {
        throw InsufficientPoints("order fit needs at least 3 eps2 values, got " +
                                 std::to_string(eps2_list.size()));
    }

    ErrorReport rep;
    rep.problem = p.name;
    rep.grid = g;
    rep.modes = opt.modes;
    rep.quad_points = opt.quad_points;
    rep.orders = orders;
    rep.reference = opt.reference;
    rep.scope = opt.scope;
    for (double eps2 : eps2_list) {
        const ProblemSpec pe = p.with_eps2(eps2);
        // Expansions are built first so missing data fails before the solves.
        std::vector<ExpansionResult> expansions;
        for (int n : orders) {
            expansions.push_back(composite(pe, n, opt.modes, opt.quad_points));
        }
        ReferenceSolution ref = reference_solution(pe, g, opt.reference);
        ErrorRow row;
        row.eps2 = eps2;
        row.reference_error = ref.error_estimate;
        row.bound_checks = std::move(ref.bound_checks);
        for (const auto& u : expansions) {
            row.norms.push_back(linf_distance(ref.field, u.sample(g), opt.scope));
        }
        const double smallest = *std::min_element(row.norms.begin(), row.norms.end());
        row.flagged = kReferenceMargin * row.reference_error > smallest;
        rep.rows.push_back(std::move(row));
    }
    if (opt.fit) {
        for (std::size_t q = 0; q < orders.size(); ++q) {
            rep.fits.push_back({orders[q], fit_order(rep.points(q))});
        }
    }
    return rep;
}

/// CSV body: header eps2,r0,r2,... then one row per eps2.
inline void write_report_csv(std::ostream& os, const ErrorReport& rep)
{
    os << "eps2";
    for (int n : rep.orders) {
        os << ",r" << 2 * n;
    }
    os << '\n';
    for (const auto& row : rep.rows) {
        os << format_double(row.eps2);
        for (double v : row.norms) {
            os << ',' << format_double(v);
        }
        os << '\n';
    }
}

inline nlohmann::ordered_json to_json(const FitResult& f)
{
    return {{"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}};
}

inline nlohmann::ordered_json to_json(const MaxPrincipleResult& m)
{
    return {{"bound", m.bound}, {"max_abs", m.max_abs}, {"pass", m.pass}};
}

inline nlohmann::ordered_json to_json(const ErrorReport& rep)
{
    nlohmann::ordered_json j;
    j["problem"] = rep.problem;
    j["grid"] = {{"nx", rep.grid.nx}, {"ny", rep.grid.ny}};
    j["modes"] = rep.modes;
    j["quad_points"] = rep.quad_points;
    j["orders"] = rep.orders;
    j["norm_scope"] = rep.scope == NormScope::Interior ? "interior" : "all";
    j["reference"] = {{"y_refine", rep.reference.y_refine},
                      {"richardson", rep.reference.richardson},
                      {"solver_tol", rep.reference.fd.tol},
                      {"margin", kReferenceMargin}};
    auto rows = nlohmann::ordered_json::array();
    for (const auto& r : rep.rows) {
        nlohmann::ordered_json jr;
        jr["eps2"] = r.eps2;
        auto norms = nlohmann::ordered_json::object();
        for (std::size_t q = 0; q < r.norms.size(); ++q) {
            norms["r" + std::to_string(2 * rep.orders[q])] = r.norms[q];
        }
        jr["norms"] = norms;
        jr["reference_error"] = r.reference_error;
        jr["flagged"] = r.flagged;
        auto checks = nlohmann::ordered_json::array();
        for (const auto& c : r.bound_checks) {
            checks.push_back(to_json(c));
        }
        jr["max_principle"] = checks;
        rows.push_back(jr);
    }
    j["rows"] = rows;
    auto fits = nlohmann::ordered_json::array();
    for (const auto& f : rep.fits) {
        auto jf = to_json(f.fit);
        jf["order"] = f.order;
        fits.push_back(jf);
    }
    j["fits"] = fits;
    return j;
}

} // namespace aniso
