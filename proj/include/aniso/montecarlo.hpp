#pragma once

/// \file montecarlo.hpp
/// Feynman-Kac point estimates of the solution by simulating the fast-slow
/// diffusion dX = eps^{-1} dW, dY = dB with reflection of X at x = 0, 1 and
/// absorption of Y at y = 0, 1:
///
///   u(x, y) = E[ phi_exit(X_tau) + 1/2 int_0^tau f(X_t, Y_t) dt ].

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <random>
#include <thread>
#include <vector>

#include <boost/random/normal_distribution.hpp>

#include "json.hpp"

#include "aniso/errors.hpp"
#include "aniso/grid.hpp"
#include "aniso/problem.hpp"

namespace aniso {

struct McConfig {
    double dt = 1e-5;
    long n_paths = 10000;
    std::uint64_t seed = 0;
    bool bridge_correction = false;
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    unsigned threads = 1;
    /// Paths still alive after this many steps are reported as NoConvergence.
    long max_steps = 100'000'000;
};

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long n_paths = 0;
    double mean_tau = 0.0;
};

struct PathResult {
    double payoff = 0.0;
    double tau = 0.0;
    bool exited_top = false;
};

inline void validate(const McConfig& cfg)
{
    if (!(cfg.dt > 0.0) || cfg.dt > 1e-3) {
        throw InvalidArgument("Monte Carlo dt must lie in (0, 1e-3], got " + format_double(cfg.dt));
    }
    if (cfg.n_paths < 100) {
        throw InvalidArgument("Monte Carlo needs at least 100 paths");
    }
    if (cfg.max_steps < 1) {
        throw InvalidArgument("max_steps must be >= 1");
    }
}

/// Folding map of the real line onto [0, 1]: reflection at both walls.
inline double reflect_unit(double x)
{
    if (x >= 0.0 && x <= 1.0) {
        return x;
    }
    if (x > -1.0 && x < 0.0) {
        return -x;
    }
    if (x > 1.0 && x < 2.0) {
        return 2.0 - x;
    }
    double m = std::fmod(std::abs(x), 2.0);
    if (m > 1.0) {
        m = 2.0 - m;
    }
    return m;
}

inline std::uint64_t splitmix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30U)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27U)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31U);
}

/// Independent stream for path `index`, reproducible regardless of how paths
/// are spread over threads.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t index)
{
    return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ULL)));
}

/// One Euler-Maruyama path, normals drawn by the ziggurat method. `observe(x, y)` sees every state after the
/// reflection step, including the exit state.
template <class Rng, class Observer>
PathResult simulate_path(const ProblemSpec& p, double x0, double y0, const McConfig& cfg, Rng& rng,
                         Observer&& observe)
{
    boost::random::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    const double sdt = std::sqrt(cfg.dt);
    const double sx = sdt / p.eps;
    double x = x0;
    double y = y0;
    double integral = 0.0;
    for (long step = 1; step <= cfg.max_steps; ++step) {
        integral += detail::checked(p.f(x, y), "f", x, y);
        const double xn = reflect_unit(x + sx * normal(rng));
        const double yn = y + sdt * normal(rng);
        observe(xn, yn);
        bool exit_bottom = yn <= 0.0;
        bool exit_top = yn >= 1.0;
        if (!exit_bottom && !exit_top && cfg.bridge_correction) {
            const double p0 = std::exp(-2.0 * y * yn / cfg.dt);
            const double p1 = std::exp(-2.0 * (1.0 - y) * (1.0 - yn) / cfg.dt);
            if (p0 + p1 > 1e-300) {
                const double u = uniform(rng);
                exit_bottom = u < p0;
                exit_top = !exit_bottom && u < p0 + p1;
            }
        }
        x = xn;
        y = yn;
        if (exit_bottom || exit_top) {
            const double phi = exit_top ? p.phi1(x) : p.phi0(x);
            PathResult r;
            r.tau = static_cast<double>(step) * cfg.dt;
            r.payoff = detail::checked(phi, exit_top ? "phi1" : "phi0", x, exit_top ? 1.0 : 0.0) +
                       0.5 * cfg.dt * integral;
            r.exited_top = exit_top;
            return r;
        }
    }
    throw NoConvergence("Monte Carlo path not absorbed within " + std::to_string(cfg.max_steps) +
                        " steps");
}

inline McEstimate estimate_point(const ProblemSpec& p, double x0, double y0, const McConfig& cfg)
{
    validate(p);
    validate(cfg);
    if (!(x0 >= 0.0 && x0 <= 1.0)) {
        throw InvalidArgument("x0 must lie in [0, 1]");
    }
    if (y0 == 0.0 || y0 == 1.0) {
        throw DegenerateStart("y0 = " + format_double(y0) + " lies on a Dirichlet wall");
    }
    if (!(y0 > 0.0 && y0 < 1.0)) {
        throw InvalidArgument("y0 must lie in (0, 1)");
    }

    const auto n = static_cast<std::size_t>(cfg.n_paths);
    std::vector<double> payoff(n);
    std::vector<double> tau(n);
    unsigned workers = cfg.threads == 0 ? std::max(1U, std::thread::hardware_concurrency()) : cfg.threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));

    auto run_range = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto rng = path_engine(cfg.seed, i);
            const PathResult r = simulate_path(p, x0, y0, cfg, rng, [](double, double) {});
            payoff[i] = r.payoff;
            tau[i] = r.tau;
        }
    };

    if (workers <= 1) {
        run_range(0, n);
    } else {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(workers);
        const std::size_t chunk = (n + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(n, w * chunk);
            const std::size_t end = std::min(n, begin + chunk);
            pool.emplace_back([&, w, begin, end] {
                try {
                    run_range(begin, end);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        for (const auto& e : errors) {
            if (e) {
                std::rethrow_exception(e);
            }
        }
    }

    // Sequential reduction so the result does not depend on the thread count.
    double sum = 0.0;
    double tau_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += payoff[i];
        tau_sum += tau[i];
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (double v : payoff) {
        ss += (v - mean) * (v - mean);
    }
    McEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
    est.n_paths = cfg.n_paths;
    est.mean_tau = tau_sum / static_cast<double>(n);
    if (!std::isfinite(est.mean) || !std::isfinite(est.std_error)) {
        throw NonFiniteValue("Monte Carlo estimate is not finite");
    }
    return est;
}

/// {mean, std_error, n_paths, mean_tau, seed, dt}
inline nlohmann::ordered_json to_json(const McEstimate& e, const McConfig& cfg)
{
    nlohmann::ordered_json j;
    j["mean"] = e.mean;
    j["std_error"] = e.std_error;
    j["n_paths"] = e.n_paths;
    j["mean_tau"] = e.mean_tau;
    j["seed"] = cfg.seed;
    j["dt"] = cfg.dt;
    j["bridge_correction"] = cfg.bridge_correction;
    return j;
}

} // namespace aniso
