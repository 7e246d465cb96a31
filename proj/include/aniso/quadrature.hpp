#pragma once

// Uniform-grid quadrature helpers shared by the decomposition, the spectral
// transforms and the mean solution.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "aniso/errors.hpp"

namespace aniso::quad {

inline void require_even_intervals(int intervals, int minimum = 2)
{
    if (intervals < minimum || intervals % 2 != 0) {
        throw InvalidArgument("quadrature needs an even number of intervals >= " +
                              std::to_string(minimum) + ", got " +
                              std::to_string(intervals));
    }
}

/// Nodes a + i h, i = 0..intervals, with h = (b - a) / intervals.
inline std::vector<double> uniform_nodes(double a, double b, int intervals)
{
    std::vector<double> nodes(static_cast<std::size_t>(intervals) + 1);
    const double h = (b - a) / intervals;
    for (int i = 0; i <= intervals; ++i) {
        nodes[static_cast<std::size_t>(i)] = a + i * h;
    }
    nodes.back() = b;
    return nodes;
}

/// Composite Simpson weights on [a, b] (1, 4, 2, ..., 4, 1) * h / 3.
inline std::vector<double> simpson_weights(double a, double b, int intervals)
{
    require_even_intervals(intervals);
    const double h = (b - a) / intervals;
    std::vector<double> w(static_cast<std::size_t>(intervals) + 1);
    for (int i = 0; i <= intervals; ++i) {
        double c = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        w[static_cast<std::size_t>(i)] = c * h / 3.0;
    }
    return w;
}

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

template <class F>
double simpson(F&& f, double a, double b, int intervals)
{
    require_even_intervals(intervals);
    const double h = (b - a) / intervals;
    double odd = 0.0;
    double even = 0.0;
    for (int i = 1; i < intervals; ++i) {
        (i % 2 == 1 ? odd : even) += f(a + i * h);
    }
    return h / 3.0 * (f(a) + 4.0 * odd + 2.0 * even + f(b));
}

/// Running integral of tabulated samples: out[i] = int_{x0}^{x_i}.
///
/// Even nodes carry composite Simpson sums. Odd nodes add the single-interval
/// three-point rule h/12 (5 g0 + 8 g1 - g2) to the preceding even node, which
/// keeps the whole table fourth-order accurate.
inline std::vector<double> cumulative_simpson(std::span<const double> g, double h)
{
    const std::size_t n = g.size();
    std::vector<double> out(n, 0.0);
    if (n < 3) {
        if (n == 2) {
            out[1] = 0.5 * h * (g[0] + g[1]);
        }
        return out;
    }
    for (std::size_t i = 2; i < n; i += 2) {
        out[i] = out[i - 2] + h / 3.0 * (g[i - 2] + 4.0 * g[i - 1] + g[i]);
    }
    for (std::size_t i = 1; i < n; i += 2) {
        if (i + 1 < n) {
            out[i] = out[i - 1] + h / 12.0 * (5.0 * g[i - 1] + 8.0 * g[i] - g[i + 1]);
        } else {
            // Trailing odd node: mirror the rule from the right end.
            out[i] = out[i - 1] + h / 12.0 * (-g[i - 2] + 8.0 * g[i - 1] + 5.0 * g[i]);
        }
    }
    return out;
}

/// Four-point Lagrange interpolation in a table sampled at a + i h.
inline double interpolate_cubic(std::span<const double> table, double a, double h, double x)
{
    const auto n = static_cast<std::ptrdiff_t>(table.size());
    const double s = (x - a) / h;
    const auto nearest = static_cast<std::ptrdiff_t>(std::llround(s));
    if (std::abs(s - static_cast<double>(nearest)) < 1e-12 && nearest >= 0 && nearest < n) {
        return table[static_cast<std::size_t>(nearest)];
    }
    auto base = static_cast<std::ptrdiff_t>(std::floor(s)) - 1;
    base = std::clamp<std::ptrdiff_t>(base, 0, std::max<std::ptrdiff_t>(n - 4, 0));
    double result = 0.0;
    for (std::ptrdiff_t a_i = 0; a_i < 4 && base + a_i < n; ++a_i) {
        double li = 1.0;
        for (std::ptrdiff_t b_i = 0; b_i < 4 && base + b_i < n; ++b_i) {
            if (b_i != a_i) {
                li *= (s - static_cast<double>(base + b_i)) / static_cast<double>(a_i - b_i);
            }
        }
        result += li * table[static_cast<std::size_t>(base + a_i)];
    }
    return result;
}

} // namespace aniso::quad
