#pragma once

/// \file fdsolver.hpp
/// Five-point finite-difference reference solver on the staggered grid.
///
/// The system is assembled for the rescaled operator -d_xx - eps^2 d_yy with
/// right-hand side eps^2 f, which has the same solution as the original
/// equation but stays well conditioned as eps -> 0. Neumann sides use the
/// ghost reflection u_{-1} = u_0, u_N = u_{N-1} that is natural to cell-centred
/// nodes; Dirichlet rows are moved to the right-hand side, leaving an SPD
/// system on the (M-1) x N interior unknowns that is solved by preconditioned
/// conjugate gradients.
///
/// The default preconditioner diagonalises the x-part exactly with a DCT-II
/// and solves one tridiagonal system in y per cosine mode. It is the exact
/// inverse of the discrete operator, so CG normally stops after one or two
/// iterations. Symmetric Gauss-Seidel is kept as an independent route for
/// cross-checking on small grids.

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <memory>
#include <mutex>
#include <new>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/problem.hpp"

namespace aniso {

enum class Preconditioner {
    FastDiagonalization,
    SymmetricGaussSeidel,
    None,
};

struct FdOptions {
    double tol = 1e-11;
    int max_iter = 1000;
    Preconditioner preconditioner = Preconditioner::FastDiagonalization;
};

struct SolveStats {
    int iterations = 0;
    double relative_residual = 0.0;
    double wall_seconds = 0.0;
};

struct FdSolution {
    Field2D field;
    SolveStats stats;
};

namespace detail {

inline std::mutex& fftw_planner_mutex()
{
    static std::mutex m;
    return m;
}

struct FftwFree {
    void operator()(double* p) const { fftw_free(p); }
};

/// In-place DCT-II / DCT-III over `rows` contiguous rows of length n.
class RowDct {
public:
    RowDct(int n, int rows)
        : n_(n), rows_(rows),
          buffer_(static_cast<double*>(
              fftw_malloc(sizeof(double) * static_cast<std::size_t>(n) * static_cast<std::size_t>(rows))))
    {
        if (!buffer_) {
            throw std::bad_alloc();
        }
        std::lock_guard lock(fftw_planner_mutex());
        const fftw_r2r_kind fwd = FFTW_REDFT10;
        const fftw_r2r_kind inv = FFTW_REDFT01;
        forward_ = fftw_plan_many_r2r(1, &n_, rows_, buffer_.get(), nullptr, 1, n_, buffer_.get(),
                                      nullptr, 1, n_, &fwd, FFTW_ESTIMATE);
        inverse_ = fftw_plan_many_r2r(1, &n_, rows_, buffer_.get(), nullptr, 1, n_, buffer_.get(),
                                      nullptr, 1, n_, &inv, FFTW_ESTIMATE);
    }
    RowDct(const RowDct&) = delete;
    RowDct& operator=(const RowDct&) = delete;
    ~RowDct()
    {
        std::lock_guard lock(fftw_planner_mutex());
        fftw_destroy_plan(forward_);
        fftw_destroy_plan(inverse_);
    }

    [[nodiscard]] std::span<double> data()
    {
        return {buffer_.get(), static_cast<std::size_t>(n_) * static_cast<std::size_t>(rows_)};
    }
    /// Y_k = 2 sum_i x_i cos(pi k (i + 1/2) / n)
    void forward() { fftw_execute(forward_); }
    /// Unnormalised inverse: inverse(forward(x)) = 2 n x.
    void inverse() { fftw_execute(inverse_); }

private:
    int n_;
    int rows_;
    std::unique_ptr<double, FftwFree> buffer_;
    fftw_plan forward_ = nullptr;
    fftw_plan inverse_ = nullptr;
};

/// Rescaled five-point operator on interior rows j = 1..M-1.
class AnisotropicOperator {
public:
    AnisotropicOperator(const Grid2D& g, double eps)
        : nx_(g.nx), rows_(g.ny - 1), cx_(1.0 / (g.dx() * g.dx())),
          cy_(eps * eps / (g.dy() * g.dy()))
    {
    }

    [[nodiscard]] int nx() const { return nx_; }
    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] double cx() const { return cx_; }
    [[nodiscard]] double cy() const { return cy_; }
    [[nodiscard]] std::size_t size() const
    {
        return static_cast<std::size_t>(nx_) * static_cast<std::size_t>(rows_);
    }
    [[nodiscard]] double diagonal(int i) const
    {
        const double xdiag = (i == 0 || i == nx_ - 1) ? cx_ : 2.0 * cx_;
        return xdiag + 2.0 * cy_;
    }

    void apply(std::span<const double> u, std::span<double> out) const
    {
        const auto n = static_cast<std::size_t>(nx_);
        for (int r = 0; r < rows_; ++r) {
            const std::size_t base = static_cast<std::size_t>(r) * n;
            const double* row = u.data() + base;
            const double* below = r > 0 ? row - n : nullptr;
            const double* above = r + 1 < rows_ ? row + n : nullptr;
            for (int i = 0; i < nx_; ++i) {
                const double left = i > 0 ? row[i - 1] : row[i];
                const double right = i + 1 < nx_ ? row[i + 1] : row[i];
                double v = cx_ * (2.0 * row[i] - left - right) + 2.0 * cy_ * row[i];
                if (below) {
                    v -= cy_ * below[i];
                }
                if (above) {
                    v -= cy_ * above[i];
                }
                out[base + static_cast<std::size_t>(i)] = v;
            }
        }
    }

    /// r = b - A x with x and the accumulation in extended precision; returns |r|.
    double residual(std::span<const long double> x, std::span<const double> b,
                    std::span<double> r) const
    {
        const auto n = static_cast<std::size_t>(nx_);
        const long double cx = cx_;
        const long double cy = cy_;
        long double rr = 0.0L;
        for (int j = 0; j < rows_; ++j) {
            const std::size_t base = static_cast<std::size_t>(j) * n;
            const long double* row = x.data() + base;
            for (int i = 0; i < nx_; ++i) {
                const long double left = i > 0 ? row[i - 1] : row[i];
                const long double right = i + 1 < nx_ ? row[i + 1] : row[i];
                long double v = cx * (2.0L * row[i] - left - right) + 2.0L * cy * row[i];
                if (j > 0) {
                    v -= cy * row[static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n)];
                }
                if (j + 1 < rows_) {
                    v -= cy * row[static_cast<std::size_t>(i) + n];
                }
                const long double d = static_cast<long double>(b[base + static_cast<std::size_t>(i)]) - v;
                r[base + static_cast<std::size_t>(i)] = static_cast<double>(d);
                rr += d * d;
            }
        }
        return static_cast<double>(std::sqrt(rr));
    }

private:
    int nx_;
    int rows_;
    double cx_;
    double cy_;
};

/// Exact inverse of AnisotropicOperator: DCT in x, Thomas in y per mode.
class FastDiagonalization {
public:
    explicit FastDiagonalization(const AnisotropicOperator& op)
        : op_(op), dct_(op.nx(), op.rows()), inv_pivot_(op.size())
    {
        const int n = op.nx();
        std::vector<double> diag(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            const double lambda = 2.0 - 2.0 * std::cos(std::numbers::pi * k / n);
            diag[static_cast<std::size_t>(k)] = op.cx() * lambda + 2.0 * op.cy();
        }
        const double off = -op.cy();
        const auto nn = static_cast<std::size_t>(n);
        for (std::size_t k = 0; k < nn; ++k) {
            inv_pivot_[k] = 1.0 / diag[k];
        }
        for (int r = 1; r < op.rows(); ++r) {
            const std::size_t base = static_cast<std::size_t>(r) * nn;
            for (std::size_t k = 0; k < nn; ++k) {
                // pivot_r = d - off * c'_{r-1}, with c'_{r-1} = off / pivot_{r-1}
                const double prev_c = off * inv_pivot_[base - nn + k];
                inv_pivot_[base + k] = 1.0 / (diag[k] - off * prev_c);
            }
        }
    }

    void apply(std::span<const double> r, std::span<double> z)
    {
        auto buf = dct_.data();
        std::copy(r.begin(), r.end(), buf.begin());
        dct_.forward();
        const auto nn = static_cast<std::size_t>(op_.nx());
        const int rows = op_.rows();
        const double off = -op_.cy();
        for (std::size_t k = 0; k < nn; ++k) {
            buf[k] *= inv_pivot_[k];
        }
        for (int j = 1; j < rows; ++j) {
            const std::size_t base = static_cast<std::size_t>(j) * nn;
            for (std::size_t k = 0; k < nn; ++k) {
                buf[base + k] = (buf[base + k] - off * buf[base - nn + k]) * inv_pivot_[base + k];
            }
        }
        for (int j = rows - 2; j >= 0; --j) {
            const std::size_t base = static_cast<std::size_t>(j) * nn;
            for (std::size_t k = 0; k < nn; ++k) {
                const double c = off * inv_pivot_[base + k];
                buf[base + k] -= c * buf[base + nn + k];
            }
        }
        dct_.inverse();
        const double scale = 1.0 / (2.0 * static_cast<double>(nn));
        for (std::size_t p = 0; p < z.size(); ++p) {
            z[p] = buf[p] * scale;
        }
    }

private:
    const AnisotropicOperator& op_;
    RowDct dct_;
    std::vector<double> inv_pivot_;
};

/// One forward and one backward Gauss-Seidel sweep from a zero guess.
class SymmetricGaussSeidel {
public:
    explicit SymmetricGaussSeidel(const AnisotropicOperator& op) : op_(op) {}

    void apply(std::span<const double> r, std::span<double> z) const
    {
        std::fill(z.begin(), z.end(), 0.0);
        const int n = op_.nx();
        const int rows = op_.rows();
        auto relax = [&](int row, int i) {
            const std::size_t p = static_cast<std::size_t>(row) * static_cast<std::size_t>(n) +
                                  static_cast<std::size_t>(i);
            double s = r[p];
            if (i > 0) {
                s += op_.cx() * z[p - 1];
            }
            if (i + 1 < n) {
                s += op_.cx() * z[p + 1];
            }
            if (row > 0) {
                s += op_.cy() * z[p - static_cast<std::size_t>(n)];
            }
            if (row + 1 < rows) {
                s += op_.cy() * z[p + static_cast<std::size_t>(n)];
            }
            z[p] = s / op_.diagonal(i);
        };
        for (int row = 0; row < rows; ++row) {
            for (int i = 0; i < n; ++i) {
                relax(row, i);
            }
        }
        for (int row = rows - 1; row >= 0; --row) {
            for (int i = n - 1; i >= 0; --i) {
                relax(row, i);
            }
        }
    }

private:
    const AnisotropicOperator& op_;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        s += a[i] * b[i];
    }
    return s;
}

} // namespace detail

inline FdSolution solve_fd(const ProblemSpec& p, const Grid2D& g, const FdOptions& opt = {})
{
    validate(p);
    if (!(opt.tol >= 1e-14)) {
        throw InvalidArgument("solver tolerance must be >= 1e-14");
    }
    if (opt.max_iter < 1) {
        throw InvalidArgument("max_iter must be >= 1");
    }
    const auto start = std::chrono::steady_clock::now();

    FdSolution out{Field2D(g), {}};
    Field2D& u = out.field;
    for (int i = 0; i < g.nx; ++i) {
        u(i, 0) = detail::checked(p.phi0(g.x(i)), "phi0", g.x(i), 0.0);
        u(i, g.ny) = detail::checked(p.phi1(g.x(i)), "phi1", g.x(i), 1.0);
    }

    const detail::AnisotropicOperator op(g, p.eps);
    const std::size_t n = op.size();
    const auto nx = static_cast<std::size_t>(g.nx);
    const double eps2 = p.eps * p.eps;

    std::vector<double> b(n);
    for (int j = 1; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t q = static_cast<std::size_t>(j - 1) * nx + static_cast<std::size_t>(i);
            b[q] = eps2 * detail::checked(p.f(g.x(i), g.y(j)), "f", g.x(i), g.y(j));
            if (j == 1) {
                b[q] += op.cy() * u(i, 0);
            }
            if (j == g.ny - 1) {
                b[q] += op.cy() * u(i, g.ny);
            }
        }
    }

    const double bnorm = std::sqrt(detail::dot(b, b));
    if (bnorm > 0.0) {
        std::unique_ptr<detail::FastDiagonalization> fast;
        std::unique_ptr<detail::SymmetricGaussSeidel> sgs;
        if (opt.preconditioner == Preconditioner::FastDiagonalization) {
            fast = std::make_unique<detail::FastDiagonalization>(op);
        } else if (opt.preconditioner == Preconditioner::SymmetricGaussSeidel) {
            sgs = std::make_unique<detail::SymmetricGaussSeidel>(op);
        }
        auto precondition = [&](std::span<const double> r, std::span<double> z) {
            if (fast) {
                fast->apply(r, z);
            } else if (sgs) {
                sgs->apply(r, z);
            } else {
                std::copy(r.begin(), r.end(), z.begin());
            }
        };

        // Iterative refinement: the iterate and b - Ax are kept in extended precision,
        // since a double iterate cannot reach 1e-11 once N^2 ulp(u) is comparable to |b|.
        std::vector<long double> x(n, 0.0L);
        std::vector<double> r(n);
        std::vector<double> d(n);
        std::vector<double> z(n);
        std::vector<double> dir(n);
        std::vector<double> adir(n);
        double rel = 1.0;
        int it = 0;
        const double target = opt.tol * bnorm;
        for (int sweep = 0; sweep < 8; ++sweep) {
            const double prev = rel;
            rel = op.residual(x, b, r) / bnorm;
            if (!std::isfinite(rel)) {
                throw NonFiniteValue("conjugate gradient produced a non-finite residual");
            }
            if (rel <= opt.tol || it >= opt.max_iter || (sweep > 0 && rel > 0.5 * prev)) {
                break;
            }
            std::fill(d.begin(), d.end(), 0.0);
            precondition(r, z);
            dir = z;
            double rz = detail::dot(r, z);
            while (it < opt.max_iter) {
                ++it;
                op.apply(dir, adir);
                const double alpha = rz / detail::dot(dir, adir);
                for (std::size_t q = 0; q < n; ++q) {
                    d[q] += alpha * dir[q];
                    r[q] -= alpha * adir[q];
                }
                const double rnorm = std::sqrt(detail::dot(r, r));
                if (!std::isfinite(rnorm)) {
                    throw NonFiniteValue("conjugate gradient produced a non-finite residual");
                }
                if (rnorm <= target) {
                    break;
                }
                precondition(r, z);
                const double rz_next = detail::dot(r, z);
                const double beta = rz_next / rz;
                rz = rz_next;
                for (std::size_t q = 0; q < n; ++q) {
                    dir[q] = z[q] + beta * dir[q];
                }
            }
            for (std::size_t q = 0; q < n; ++q) {
                x[q] += d[q];
            }
        }
        out.stats.iterations = it;
        out.stats.relative_residual = rel;
        if (rel > opt.tol) {
            throw NoConvergence("CG stopped after " + std::to_string(it) +
                                " iterations with relative residual " + format_double(rel));
        }
        for (int j = 1; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                u(i, j) = static_cast<double>(
                    x[static_cast<std::size_t>(j - 1) * nx + static_cast<std::size_t>(i)]);
            }
        }
    }
    out.stats.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

inline FdSolution solve_fd(const ProblemSpec& p, const Grid2D& g, double tol, int max_iter)
{
    FdOptions opt;
    opt.tol = tol;
    opt.max_iter = max_iter;
    return solve_fd(p, g, opt);
}

} // namespace aniso
