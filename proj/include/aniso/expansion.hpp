#pragma once

/// \file expansion.hpp
/// Matched-asymptotic approximations u^[2n] of the anisotropic problem.
///
/// The approximation is assembled directly from its final composite form
///
///   u^[2n](x,y) = ubar(y)
///     + sum_k (phi0~_k e^{-k pi y/eps} + phi1~_k e^{-k pi (1-y)/eps}) cos(k pi x)
///     + sum_{m=1..n} eps^{2m} sum_k [ f~_k^{(2m-2)}(y)
///                                    - f~_k^{(2m-2)}(0) e^{-k pi y/eps}
///                                    - f~_k^{(2m-2)}(1) e^{-k pi (1-y)/eps} ] cos(k pi x) / (k pi)^{2m}
///
/// where f~_k^{(j)}(y) is the k-th cosine coefficient of d^j f/dy^j (x-mean
/// removed) and every sum over k is truncated at K modes.

#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/problem.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/spectral.hpp"

namespace aniso {

/// Closed-form mean part
///   ubar(y) = y (I(1) - phibar0 + phibar1) - I(y) + phibar0,
///   I(y) = int_0^y int_0^z fbar(t) dt dz = int_0^y (y - t) fbar(t) dt,
/// with fbar tabulated on quad_points + 1 nodes and cumulative Simpson sums.
class MeanSolution {
public:
    MeanSolution(const DecomposedProblem& d, int quad_points)
        : problem_(std::make_shared<DecomposedProblem>(d)),
          h_(1.0 / quad_points),
          nodes_(quad::uniform_nodes(0.0, 1.0, quad_points))
    {
        quad::require_even_intervals(quad_points, 8);
        std::vector<double> fbar(nodes_.size());
        std::vector<double> tfbar(nodes_.size());
        for (std::size_t j = 0; j < nodes_.size(); ++j) {
            fbar[j] = problem_->fbar(nodes_[j]);
            tfbar[j] = nodes_[j] * fbar[j];
        }
        fbar_ = std::move(fbar);
        c0_ = quad::cumulative_simpson(fbar_, h_);
        c1_ = quad::cumulative_simpson(tfbar, h_);
        total_ = c0_.back() - c1_.back();
    }

    [[nodiscard]] double phibar0() const { return problem_->phibar0(); }
    [[nodiscard]] double phibar1() const { return problem_->phibar1(); }
    /// I(1) = int_0^1 int_0^z fbar dt dz
    [[nodiscard]] double total_double_integral() const { return total_; }

    [[nodiscard]] double double_integral(double y) const
    {
        const double s = y / h_;
        const auto k = static_cast<std::ptrdiff_t>(std::floor(s));
        const auto last = static_cast<std::ptrdiff_t>(nodes_.size()) - 1;
        const auto nearest = static_cast<std::ptrdiff_t>(std::llround(s));
        if (std::abs(s - static_cast<double>(nearest)) < 1e-12 && nearest >= 0 && nearest <= last) {
            const auto n = static_cast<std::size_t>(nearest);
            return y * c0_[n] - c1_[n];
        }
        const auto base = static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(k, 0, last));
        // Partial panel [y_k, y] by three-point Simpson.
        const double yk = nodes_[base];
        const double mid = 0.5 * (yk + y);
        const double f_mid = problem_->fbar(mid);
        const double f_end = problem_->fbar(y);
        const double w = (y - yk) / 6.0;
        const double c0 = c0_[base] + w * (fbar_[base] + 4.0 * f_mid + f_end);
        const double c1 = c1_[base] + w * (yk * fbar_[base] + 4.0 * mid * f_mid + y * f_end);
        return y * c0 - c1;
    }

    [[nodiscard]] double operator()(double y) const
    {
        const double a = phibar0();
        const double b = phibar1();
        return y * (total_ - a + b) - double_integral(y) + a;
    }

private:
    std::shared_ptr<const DecomposedProblem> problem_;
    double h_;
    std::vector<double> nodes_;
    std::vector<double> fbar_;
    std::vector<double> c0_;
    std::vector<double> c1_;
    double total_ = 0.0;
};

inline MeanSolution mean_solution(const DecomposedProblem& d, int quad_points = kDefaultQuadPoints)
{
    if (quad_points < 8) {
        throw InvalidArgument("quad_points must be >= 8");
    }
    return MeanSolution(d, quad_points);
}

/// -ubar'' = fbar with ubar(0) = phibar0, ubar(1) = phibar1 by the three-point
/// scheme on M + 1 nodes and a Thomas solve. Independent of mean_solution.
inline std::vector<double> mean_solution_bvp(const DecomposedProblem& d, int m)
{
    if (m < 4) {
        throw InvalidArgument("mean_solution_bvp needs M >= 4");
    }
    const double h = 1.0 / m;
    std::vector<double> u(static_cast<std::size_t>(m) + 1);
    u.front() = d.phibar0();
    u.back() = d.phibar1();
    const std::size_t n = static_cast<std::size_t>(m) - 1;
    std::vector<double> rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
        rhs[j] = h * h * d.fbar(static_cast<double>(j + 1) * h);
    }
    rhs.front() += u.front();
    rhs.back() += u.back();
    // Tridiagonal (-1, 2, -1).
    std::vector<double> cp(n);
    double pivot = 2.0;
    cp[0] = -1.0 / pivot;
    rhs[0] /= pivot;
    for (std::size_t j = 1; j < n; ++j) {
        pivot = 2.0 + cp[j - 1];
        cp[j] = -1.0 / pivot;
        rhs[j] = (rhs[j] + rhs[j - 1]) / pivot;
    }
    for (std::size_t j = n - 1; j-- > 0;) {
        rhs[j] -= cp[j] * rhs[j + 1];
    }
    for (std::size_t j = 0; j < n; ++j) {
        u[j + 1] = rhs[j];
    }
    return u;
}

/// Second outer fluctuation term: -F~2(x, y) + F~3(1, y).
inline ScalarFn2 outer_term2(const AntiderivativeStack& stack)
{
    return [stack](double x, double y) { return -stack.eval(2, x, y) + stack.eval(3, 1.0, y); };
}

enum class Side { Bottom, Top };

inline const char* to_string(Side s) { return s == Side::Bottom ? "bottom" : "top"; }

/// Boundary-layer term sum_k c_k e^{-k pi s / eps} cos(k pi x) in the stretched
/// distance s/eps to its wall: s = y at the bottom, s = 1 - y at the top.
struct LayerTerm {
    Side side = Side::Bottom;
    CosineSeries series;
    double eps = 1.0;

    [[nodiscard]] double stretched(double y) const
    {
        return (side == Side::Bottom ? y : 1.0 - y) / eps;
    }

    /// Mode amplitudes c_k e^{-k pi s/eps} at height y.
    [[nodiscard]] double amplitude(int k, double y) const
    {
        return series.coeff(k) * decay(k * std::numbers::pi * stretched(y));
    }

    [[nodiscard]] double operator()(double x, double y) const
    {
        double sum = 0.0;
        for (int k = 1; k <= series.modes(); ++k) {
            const double a = amplitude(k, y);
            if (a != 0.0) {
                sum += a * std::cos(k * std::numbers::pi * x);
            }
        }
        return sum;
    }
};

inline LayerTerm layer_term(CosineSeries series, Side side, double eps)
{
    if (!(eps > 0.0)) {
        throw InvalidArgument("eps must be positive");
    }
    return LayerTerm{side, std::move(series), eps};
}

/// The approximation u^[2n] together with its pieces.
class ExpansionResult {
public:
    struct Parts {
        double mean = 0.0;
        double outer = 0.0;
        double bottom = 0.0;
        double top = 0.0;
        [[nodiscard]] double total() const { return mean + (outer + bottom + top); }
    };

    ExpansionResult(const ProblemSpec& p, int order, int modes, int quad_points)
        : order_(order), modes_(modes), eps_(p.eps),
          decomposed_(std::make_shared<DecomposedProblem>(decompose(p, quad_points))),
          mean_(std::make_shared<MeanSolution>(*decomposed_, quad_points)),
          transform_(std::make_shared<CosineTransform>(modes, quad_points)),
          cache_(std::make_shared<Cache>())
    {
        const auto& dp = *decomposed_;
        bottom_ = layer_term(cosine_coeffs([&](double x) { return dp.phitilde0(x); }, modes, quad_points),
                             Side::Bottom, eps_);
        top_ = layer_term(cosine_coeffs([&](double x) { return dp.phitilde1(x); }, modes, quad_points),
                          Side::Top, eps_);
        for (int m = 1; m <= order; ++m) {
            bottom_force_.push_back(coefficients(2 * m - 2, 0.0));
            top_force_.push_back(coefficients(2 * m - 2, 1.0));
        }
        if (eps_ > 0.5) {
            warnings_.push_back("eps = " + format_double(eps_) +
                                " > 0.5: the boundary layers overlap and the expansion loses "
                                "its asymptotic meaning");
        }
    }

    [[nodiscard]] int order() const { return order_; }
    [[nodiscard]] int modes() const { return modes_; }
    [[nodiscard]] double eps() const { return eps_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const { return warnings_; }
    [[nodiscard]] const DecomposedProblem& decomposed() const { return *decomposed_; }
    [[nodiscard]] const MeanSolution& mean_solution() const { return *mean_; }
    /// Leading-order layers, i.e. the data series phi0~ and phi1~.
    [[nodiscard]] const LayerTerm& bottom_layer_term() const { return bottom_; }
    [[nodiscard]] const LayerTerm& top_layer_term() const { return top_; }
    /// Cosine coefficients of d^{2m-2} f~/dy^{2m-2} at y = 0 and y = 1, m = 1..n.
    [[nodiscard]] const CosineSeries& force_series_bottom(int m) const
    {
        return bottom_force_.at(static_cast<std::size_t>(m - 1));
    }
    [[nodiscard]] const CosineSeries& force_series_top(int m) const
    {
        return top_force_.at(static_cast<std::size_t>(m - 1));
    }

    /// f~_k^{(j)}(y) for k = 1..K, memoized per y.
    [[nodiscard]] std::shared_ptr<const CosineSeries> force_series(int j, double y) const
    {
        const std::pair<int, double> key{j, y};
        {
            std::lock_guard lock(cache_->mutex);
            if (auto it = cache_->series.find(key); it != cache_->series.end()) {
                return it->second;
            }
        }
        auto s = std::make_shared<const CosineSeries>(coefficients(j, y));
        std::lock_guard lock(cache_->mutex);
        return cache_->series.emplace(key, std::move(s)).first->second;
    }

    /// Per-mode amplitudes of each fluctuation component at height y.
    struct RowAmplitudes {
        std::vector<double> outer;
        std::vector<double> bottom;
        std::vector<double> top;
    };

    [[nodiscard]] RowAmplitudes row_amplitudes(double y) const
    {
        const auto K = static_cast<std::size_t>(modes_);
        RowAmplitudes a{std::vector<double>(K, 0.0), std::vector<double>(K, 0.0),
                        std::vector<double>(K, 0.0)};
        for (int k = 1; k <= modes_; ++k) {
            const auto q = static_cast<std::size_t>(k - 1);
            const double kpi = k * std::numbers::pi;
            double bottom = bottom_.series.coeff(k);
            double top = top_.series.coeff(k);
            double eps_pow = 1.0;
            double kpi_pow = 1.0;
            for (int m = 1; m <= order_; ++m) {
                eps_pow *= eps_ * eps_;
                kpi_pow *= kpi * kpi;
                const double scale = eps_pow / kpi_pow;
                a.outer[q] += scale * force_series(2 * m - 2, y)->coeff(k);
                bottom -= scale * bottom_force_[static_cast<std::size_t>(m - 1)].coeff(k);
                top -= scale * top_force_[static_cast<std::size_t>(m - 1)].coeff(k);
            }
            a.bottom[q] = bottom * decay(kpi * y / eps_);
            a.top[q] = top * decay(kpi * (1.0 - y) / eps_);
        }
        return a;
    }

    [[nodiscard]] Parts parts(double x, double y) const
    {
        Parts p;
        p.mean = (*mean_)(y);
        const RowAmplitudes a = row_amplitudes(y);
        for (int k = 1; k <= modes_; ++k) {
            const auto q = static_cast<std::size_t>(k - 1);
            const double c = std::cos(k * std::numbers::pi * x);
            p.outer += a.outer[q] * c;
            p.bottom += a.bottom[q] * c;
            p.top += a.top[q] * c;
        }
        return p;
    }

    [[nodiscard]] double mean(double y) const { return (*mean_)(y); }
    [[nodiscard]] double outer(double x, double y) const { return parts(x, y).outer; }
    [[nodiscard]] double bottom_layer(double x, double y) const { return parts(x, y).bottom; }
    [[nodiscard]] double top_layer(double x, double y) const { return parts(x, y).top; }
    [[nodiscard]] double operator()(double x, double y) const { return parts(x, y).total(); }

    /// u^[2n] at every node of g; rows share one coefficient evaluation.
    [[nodiscard]] Field2D sample(const Grid2D& g) const
    {
        const auto K = static_cast<std::size_t>(modes_);
        std::vector<double> cosines(static_cast<std::size_t>(g.nx) * K);
        for (int i = 0; i < g.nx; ++i) {
            for (int k = 1; k <= modes_; ++k) {
                cosines[static_cast<std::size_t>(i) * K + static_cast<std::size_t>(k - 1)] =
                    std::cos(k * std::numbers::pi * g.x(i));
            }
        }
        Field2D out(g);
        std::vector<double> amp(K);
        for (int j = 0; j <= g.ny; ++j) {
            const double y = g.y(j);
            const RowAmplitudes a = row_amplitudes(y);
            for (std::size_t q = 0; q < K; ++q) {
                amp[q] = a.outer[q] + (a.bottom[q] + a.top[q]);
            }
            const double ubar = (*mean_)(y);
            for (int i = 0; i < g.nx; ++i) {
                const double* c = cosines.data() + static_cast<std::size_t>(i) * K;
                double s = 0.0;
                for (std::size_t q = 0; q < K; ++q) {
                    s += amp[q] * c[q];
                }
                out(i, j) = ubar + s;
            }
        }
        return out;
    }

private:
    [[nodiscard]] CosineSeries coefficients(int j, double y) const
    {
        return transform_->analyse(decomposed_->tilde_row(j, y));
    }

    struct Cache {
        std::mutex mutex;
        std::map<std::pair<int, double>, std::shared_ptr<const CosineSeries>> series;
    };

    int order_;
    int modes_;
    double eps_;
    std::shared_ptr<const DecomposedProblem> decomposed_;
    std::shared_ptr<const MeanSolution> mean_;
    std::shared_ptr<const CosineTransform> transform_;
    LayerTerm bottom_;
    LayerTerm top_;
    std::vector<CosineSeries> bottom_force_;
    std::vector<CosineSeries> top_force_;
    std::vector<std::string> warnings_;
    std::shared_ptr<Cache> cache_;
};

inline ExpansionResult composite(const ProblemSpec& p, int order, int modes = kDefaultModes,
                                 int quad_points = kDefaultQuadPoints)
{
    validate(p);
    if (order < 0) {
        throw InvalidArgument("expansion order must be >= 0");
    }
    if (modes < 1) {
        throw InvalidArgument("number of cosine modes must be >= 1");
    }
    if (p.eps > 1.0) {
        throw InvalidArgument("eps must not exceed 1 for the asymptotic expansion");
    }
    const int needed = 2 * order - 2;
    if (order >= 2 && static_cast<int>(p.f_y_derivs.size()) < needed) {
        throw MissingDerivatives("order " + std::to_string(order) + " needs d^j f/dy^j up to j = " +
                                 std::to_string(needed) + "; problem '" + p.name + "' supplies " +
                                 std::to_string(p.f_y_derivs.size()));
    }
    return ExpansionResult(p, order, modes, quad_points);
}

} // namespace aniso
