#pragma once

// Fourier-cosine analysis/synthesis on [0,1] and the repeated x-antiderivatives
// of the force fluctuation used by the outer expansion.

#include <array>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/problem.hpp"
#include "aniso/quadrature.hpp"

namespace aniso {

inline constexpr int kDefaultModes = 64;
inline constexpr double kZeroMeanTol = 1e-8;
inline constexpr double kIntegralConditionTol = 1e-7;

/// exp(-arg) for arg >= 0, flushed to zero once it would underflow.
inline double decay(double arg)
{
    return arg > 745.0 ? 0.0 : std::exp(-arg);
}

/// g(x) = sum_{k=1..K} c_k cos(k pi x); the k = 0 term is absent because every
/// series here represents a zero-mean function.
struct CosineSeries {
    std::vector<double> coeffs; // coeffs[k-1] = c_k

    [[nodiscard]] int modes() const { return static_cast<int>(coeffs.size()); }
    [[nodiscard]] double coeff(int k) const { return coeffs[static_cast<std::size_t>(k - 1)]; }
    /// |c_K|, a cheap indicator of truncation error.
    [[nodiscard]] double tail() const { return coeffs.empty() ? 0.0 : std::abs(coeffs.back()); }
};

inline double eval_series(const CosineSeries& s, double x)
{
    double sum = 0.0;
    for (int k = 1; k <= s.modes(); ++k) {
        sum += s.coeff(k) * std::cos(k * std::numbers::pi * x);
    }
    return sum;
}

/// Precomputed Simpson-weighted cosine table: coefficients of sampled rows
/// with a single matrix-vector product.
class CosineTransform {
public:
    CosineTransform(int modes, int quad_points)
        : modes_(modes), nodes_(quad::uniform_nodes(0.0, 1.0, quad_points))
    {
        if (modes < 1) {
            throw InvalidArgument("number of cosine modes must be >= 1");
        }
        weights_ = quad::simpson_weights(0.0, 1.0, quad_points);
        table_.resize(static_cast<std::size_t>(modes) * nodes_.size());
        for (int k = 1; k <= modes; ++k) {
            for (std::size_t i = 0; i < nodes_.size(); ++i) {
                table_[row_offset(k) + i] =
                    2.0 * weights_[i] * std::cos(k * std::numbers::pi * nodes_[i]);
            }
        }
    }

    [[nodiscard]] int modes() const { return modes_; }
    [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

    /// c_k = 2 int_0^1 g cos(k pi x) dx for samples of g on nodes().
    [[nodiscard]] CosineSeries analyse(std::span<const double> samples) const
    {
        CosineSeries s;
        s.coeffs.resize(static_cast<std::size_t>(modes_));
        for (int k = 1; k <= modes_; ++k) {
            s.coeffs[static_cast<std::size_t>(k - 1)] = quad::dot(
                std::span<const double>(table_).subspan(row_offset(k), nodes_.size()), samples);
        }
        return s;
    }

private:
    [[nodiscard]] std::size_t row_offset(int k) const
    {
        return static_cast<std::size_t>(k - 1) * nodes_.size();
    }

    int modes_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::vector<double> table_;
};

template <class G>
CosineSeries cosine_coeffs(G&& g, int modes = kDefaultModes, int quad_points = kDefaultQuadPoints)
{
    const CosineTransform transform(modes, quad_points);
    std::vector<double> samples(transform.nodes().size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
        samples[i] = detail::checked(g(transform.nodes()[i]), "g", transform.nodes()[i]);
    }
    const double mean = quad::dot(transform.weights(), samples);
    if (std::abs(mean) > kZeroMeanTol) {
        throw NotZeroMean("function has mean " + std::to_string(mean) +
                          " over [0,1]; cosine series here exclude k = 0");
    }
    return transform.analyse(samples);
}

/// F_0 = f~, F_n(x, y) = int_0^x F_{n-1}(z, y) dz for n = 1..3, tabulated on a
/// uniform x grid per queried y and memoized.
class AntiderivativeStack {
public:
    static constexpr int kLevels = 4;

    struct Table {
        double y = 0.0;
        std::array<std::vector<double>, kLevels> levels;
    };

    AntiderivativeStack(const DecomposedProblem& d, int quad_points)
        : problem_(std::make_shared<ProblemSpec>(d.problem())),
          quad_points_(quad_points),
          nodes_(quad::uniform_nodes(0.0, 1.0, quad_points)),
          weights_(quad::simpson_weights(0.0, 1.0, quad_points)),
          cache_(std::make_shared<Cache>())
    {
    }

    [[nodiscard]] int quad_points() const { return quad_points_; }
    [[nodiscard]] const std::vector<double>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }

    /// F_level on the x nodes at height y. Throws IntegralConditionViolated
    /// when |F_1(1, y)| exceeds 1e-7.
    [[nodiscard]] std::shared_ptr<const Table> table(double y) const
    {
        {
            std::lock_guard lock(cache_->mutex);
            if (auto it = cache_->tables.find(y); it != cache_->tables.end()) {
                return it->second;
            }
        }
        auto t = std::make_shared<Table>();
        t->y = y;
        auto& f0 = t->levels[0];
        f0.resize(nodes_.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            f0[i] = detail::checked(problem_->f(nodes_[i], y), "f", nodes_[i], y);
            mean += weights_[i] * f0[i];
        }
        for (double& v : f0) {
            v -= mean;
        }
        const double h = 1.0 / quad_points_;
        for (int n = 1; n < kLevels; ++n) {
            t->levels[static_cast<std::size_t>(n)] =
                quad::cumulative_simpson(t->levels[static_cast<std::size_t>(n - 1)], h);
        }
        const double at_one = t->levels[1].back();
        if (std::abs(at_one) > kIntegralConditionTol) {
            throw IntegralConditionViolated("F~1(1, " + std::to_string(y) + ") = " +
                                            std::to_string(at_one));
        }
        std::lock_guard lock(cache_->mutex);
        return cache_->tables.emplace(y, std::move(t)).first->second;
    }

    [[nodiscard]] double eval(int level, double x, double y) const
    {
        if (level < 0 || level >= kLevels) {
            throw InvalidArgument("antiderivative level must be in 0..3");
        }
        const auto t = table(y);
        return quad::interpolate_cubic(t->levels[static_cast<std::size_t>(level)], 0.0,
                                       1.0 / quad_points_, x);
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<double, std::shared_ptr<const Table>> tables;
    };

    std::shared_ptr<const ProblemSpec> problem_;
    int quad_points_;
    std::vector<double> nodes_;
    std::vector<double> weights_;
    std::shared_ptr<Cache> cache_;
};

inline AntiderivativeStack build_antiderivatives(const DecomposedProblem& d,
                                                 int quad_points = kDefaultQuadPoints)
{
    if (quad_points < 8) {
        throw InvalidArgument("quad_points must be >= 8");
    }
    quad::require_even_intervals(quad_points);
    return AntiderivativeStack(d, quad_points);
}

} // namespace aniso
