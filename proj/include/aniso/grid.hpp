#pragma once

// Staggered tensor grid: cell-centred in x (Neumann sides), vertex-centred in
// y (Dirichlet top and bottom).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <ostream>
#include <string>
#include <type_traits>
#include <vector>

#include "aniso/errors.hpp"

namespace aniso {

struct Grid2D {
    int nx = 2; ///< number of x cells N
    int ny = 2; ///< number of y cells M

    Grid2D() = default;
    Grid2D(int n, int m) : nx(n), ny(m)
    {
        if (n < 2 || m < 2) {
            throw InvalidArgument("grid needs N >= 2 and M >= 2");
        }
    }

    [[nodiscard]] double dx() const { return 1.0 / nx; }
    [[nodiscard]] double dy() const { return 1.0 / ny; }
    /// x_i = (i + 1/2) dx for i = 0..N-1.
    [[nodiscard]] double x(int i) const { return (i + 0.5) / nx; }
    /// y_j = j dy for j = 0..M.
    [[nodiscard]] double y(int j) const { return static_cast<double>(j) / ny; }
    [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(ny) + 1; }
    [[nodiscard]] std::size_t size() const { return rows() * static_cast<std::size_t>(nx); }

    friend bool operator==(const Grid2D&, const Grid2D&) = default;
};

/// Nodal values, row-major over j (y) then i (x).
class Field2D {
public:
    Field2D() = default;
    explicit Field2D(Grid2D g) : grid_(g), values_(g.size(), 0.0) {}

    template <class F>
    static Field2D sample(const Grid2D& g, F&& fn)
    {
        Field2D out(g);
        for (int j = 0; j <= g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                out(i, j) = fn(g.x(i), g.y(j));
            }
        }
        return out;
    }

    [[nodiscard]] const Grid2D& grid() const { return grid_; }
    [[nodiscard]] double& operator()(int i, int j) { return values_[index(i, j)]; }
    [[nodiscard]] double operator()(int i, int j) const { return values_[index(i, j)]; }
    [[nodiscard]] std::vector<double>& values() { return values_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }

    [[nodiscard]] double max_abs() const
    {
        double m = 0.0;
        for (double v : values_) {
            m = std::max(m, std::abs(v));
        }
        return m;
    }

    [[nodiscard]] bool all_finite() const
    {
        for (double v : values_) {
            if (!std::isfinite(v)) {
                return false;
            }
        }
        return true;
    }

private:
    [[nodiscard]] std::size_t index(int i, int j) const
    {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(grid_.nx) +
               static_cast<std::size_t>(i);
    }

    Grid2D grid_;
    std::vector<double> values_;
};

/// Which nodes enter a max-norm.
enum class NormScope {
    AllNodes,
    Interior, ///< excludes the Dirichlet rows y = 0 and y = 1
};

/// max |a_ij - b(x_i, y_j)| over the selected nodes.
template <class F>
    requires(!std::is_same_v<std::remove_cvref_t<F>, Field2D>)
double linf_distance(const Field2D& a, F&& b, NormScope scope = NormScope::AllNodes)
{
    const Grid2D& g = a.grid();
    const int j0 = scope == NormScope::Interior ? 1 : 0;
    const int j1 = scope == NormScope::Interior ? g.ny - 1 : g.ny;
    double m = 0.0;
    for (int j = j0; j <= j1; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            m = std::max(m, std::abs(a(i, j) - b(g.x(i), g.y(j))));
        }
    }
    return m;
}

inline double linf_distance(const Field2D& a, const Field2D& b,
                            NormScope scope = NormScope::AllNodes)
{
    if (!(a.grid() == b.grid())) {
        throw GridMismatch("fields live on different grids");
    }
    const Grid2D& g = a.grid();
    const int j0 = scope == NormScope::Interior ? 1 : 0;
    const int j1 = scope == NormScope::Interior ? g.ny - 1 : g.ny;
    double m = 0.0;
    for (int j = j0; j <= j1; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
        }
    }
    return m;
}

/// "%.17g" formatting used by every text artifact.
inline std::string format_double(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with header "x,y,value", row-major over j then i.
inline void write_field_csv(std::ostream& os, const Field2D& field)
{
    const Grid2D& g = field.grid();
    os << "x,y,value\n";
    for (int j = 0; j <= g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            os << format_double(g.x(i)) << ',' << format_double(g.y(j)) << ','
               << format_double(field(i, j)) << '\n';
        }
    }
}

} // namespace aniso
