#pragma once

/// \file cli.hpp
/// Command-line front end. `run` is the whole program; tools/aniso.cpp only
/// forwards argv to it so tests can drive every subcommand in-process.
///
///   aniso check        compatibility and derivative sanity report (JSON)
///   aniso expand       u^[2n] on the staggered grid (field CSV)
///   aniso fd           finite-difference reference solve (field CSV)
///   aniso convergence  remainder table and order fits (CSV + JSON sidecar)
///   aniso mc           Feynman-Kac point estimate (JSON)
///   aniso identity     matching-identity deviation (JSON)
///
/// Exit codes: 0 success, 1 usage error, 2 numerical failure.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "aniso/errors.hpp"
#include "aniso/expansion.hpp"
#include "aniso/fdsolver.hpp"
#include "aniso/grid.hpp"
#include "aniso/montecarlo.hpp"
#include "aniso/problem.hpp"
#include "aniso/spectral.hpp"
#include "aniso/validation.hpp"

namespace aniso::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kNumerical = 2,
};

namespace detail {

struct Options {
    std::string problem = "paper";
    std::vector<double> eps2{0.05};
    int nx = 256;
    int ny = 128;
    int order = 1;
    std::vector<int> orders{0, 1};
    int modes = kDefaultModes;
    int quad = kDefaultQuadPoints;
    double tol = 1e-11;
    int max_iter = 1000;
    std::string precond = "fast";
    int ref_refine = 1;
    bool richardson = false;
    std::string scope = "interior";
    bool no_fit = false;
    double x = 0.5;
    double y = 0.5;
    long paths = 10000;
    std::uint64_t seed = 0;
    double dt = 1e-5;
    bool bridge = false;
    unsigned threads = 1;
    int samples = 9;
    int identity_modes = 8;
    int identity_quad = 4096;
    double compat_step = kDefaultCompatStep;
    double compat_tol = kDefaultCompatTol;
    std::string out;
    std::string json_out;
};

/// `#`-prefixed tool version and a full echo of the subcommand configuration.
inline std::string metadata_header(const CLI::App& sub)
{
    std::ostringstream os;
    os << "# aniso " << kVersion << '\n';
    os << "# command: " << sub.get_name() << '\n';
    std::istringstream cfg(sub.config_to_str(true, false));
    for (std::string line; std::getline(cfg, line);) {
        if (!line.empty()) {
            os << "# " << line << '\n';
        }
    }
    return os.str();
}

inline nlohmann::ordered_json metadata_json(const CLI::App& sub)
{
    nlohmann::ordered_json m;
    m["tool"] = "aniso";
    m["version"] = kVersion;
    m["command"] = sub.get_name();
    auto cfg = nlohmann::ordered_json::array();
    std::istringstream in(sub.config_to_str(true, false));
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) {
            cfg.push_back(line);
        }
    }
    m["config"] = cfg;
    return m;
}

/// Writes `text` to `path`, or to `fallback` when the path is empty.
inline void emit(const std::string& path, const std::string& text, std::ostream& fallback)
{
    if (path.empty()) {
        fallback << text;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw InvalidArgument("cannot open output file '" + path + "'");
    }
    f << text;
    if (!f) {
        throw InvalidArgument("failed writing output file '" + path + "'");
    }
}

inline double single_eps2(const Options& o)
{
    if (o.eps2.size() != 1) {
        throw InvalidArgument("--eps2 takes exactly one value for this subcommand");
    }
    return o.eps2.front();
}

inline ProblemSpec problem_for(const Options& o, double eps2)
{
    if (!(eps2 > 0.0)) {
        throw InvalidArgument("--eps2 must be positive");
    }
    return builtin_problem(o.problem, std::sqrt(eps2));
}

inline Preconditioner preconditioner_for(const std::string& name)
{
    if (name == "fast") {
        return Preconditioner::FastDiagonalization;
    }
    if (name == "sgs") {
        return Preconditioner::SymmetricGaussSeidel;
    }
    return Preconditioner::None;
}

inline std::string field_text(const CLI::App& sub, const Field2D& field)
{
    std::ostringstream os;
    os << metadata_header(sub);
    write_field_csv(os, field);
    return os.str();
}

inline std::string json_text(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

inline int cmd_check(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const ProblemSpec p = builtin_problem(o.problem);
    const CompatibilityReport c = check_compatibility(p, o.compat_step, o.compat_tol);
    const DerivativeCheck d = check_derivatives(p);
    const DecomposedProblem dp = decompose(p, o.quad);
    nlohmann::ordered_json j;
    j["meta"] = metadata_json(sub);
    j["problem"] = p.name;
    j["compatibility"] = {{"phi0_slope_x0", c.slopes[0]}, {"phi0_slope_x1", c.slopes[1]},
                          {"phi1_slope_x0", c.slopes[2]}, {"phi1_slope_x1", c.slopes[3]},
                          {"tol", c.tol},                 {"pass", c.pass}};
    j["y_derivatives"] = {{"supplied", p.f_y_derivs.size()},
                          {"max_deviation", d.max_deviation},
                          {"worst_order", d.worst_order},
                          {"pass", d.pass}};
    j["means"] = {{"phibar0", dp.phibar0()}, {"phibar1", dp.phibar1()}};
    emit(o.out, json_text(j), out);
    return kOk;
}

inline int cmd_expand(const CLI::App& sub, const Options& o, std::ostream& out, std::ostream& err)
{
    const ProblemSpec p = problem_for(o, single_eps2(o));
    const ExpansionResult u = composite(p, o.order, o.modes, o.quad);
    for (const auto& w : u.warnings()) {
        err << "warning: " << w << '\n';
    }
    emit(o.out, field_text(sub, u.sample(Grid2D(o.nx, o.ny))), out);
    return kOk;
}

inline int cmd_fd(const CLI::App& sub, const Options& o, std::ostream& out, std::ostream& err)
{
    const ProblemSpec p = problem_for(o, single_eps2(o));
    FdOptions fo;
    fo.tol = o.tol;
    fo.max_iter = o.max_iter;
    fo.preconditioner = preconditioner_for(o.precond);
    const FdSolution s = solve_fd(p, Grid2D(o.nx, o.ny), fo);
    err << "fd: " << s.stats.iterations << " iterations, relative residual "
        << format_double(s.stats.relative_residual) << '\n';
    const MaxPrincipleResult mp = max_principle_check(s.field, p);
    if (!mp.pass) {
        err << "warning: max |u| = " << format_double(mp.max_abs) << " exceeds the bound "
            << format_double(mp.bound) << '\n';
    }
    emit(o.out, field_text(sub, s.field), out);
    return kOk;
}

inline std::string sidecar_path(const Options& o)
{
    if (!o.json_out.empty()) {
        return o.json_out;
    }
    if (o.out.empty()) {
        return {};
    }
    const auto dot = o.out.find_last_of('.');
    const auto slash = o.out.find_last_of('/');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash)) {
        return o.out.substr(0, dot) + ".json";
    }
    return o.out + ".json";
}

inline int cmd_convergence(const CLI::App& sub, const Options& o, std::ostream& out,
                           std::ostream& err)
{
    if (!o.no_fit && o.eps2.size() < 3) {
        throw InvalidArgument("--eps2 needs at least 3 values for the order fit (or pass --no-fit)");
    }
    for (double e : o.eps2) {
        if (!(e > 0.0)) {
            throw InvalidArgument("--eps2 values must be positive");
        }
    }
    const ProblemSpec p = builtin_problem(o.problem);
    RemainderOptions ro;
    ro.modes = o.modes;
    ro.quad_points = o.quad;
    ro.reference.y_refine = o.ref_refine;
    ro.reference.richardson = o.richardson;
    ro.reference.fd.tol = o.tol;
    ro.reference.fd.max_iter = o.max_iter;
    ro.reference.fd.preconditioner = preconditioner_for(o.precond);
    ro.scope = o.scope == "all" ? NormScope::AllNodes : NormScope::Interior;
    ro.fit = !o.no_fit;
    const ErrorReport rep = remainder_norms(p, o.eps2, o.orders, Grid2D(o.nx, o.ny), ro);

    for (const auto& row : rep.rows) {
        if (row.flagged) {
            err << "warning: eps2 = " << format_double(row.eps2)
                << ": reference error estimate " << format_double(row.reference_error)
                << " is within a factor " << kReferenceMargin << " of the smallest remainder\n";
        }
        for (const auto& c : row.bound_checks) {
            if (!c.pass) {
                err << "warning: eps2 = " << format_double(row.eps2)
                    << ": maximum-principle bound violated\n";
            }
        }
    }

    std::ostringstream csv;
    csv << metadata_header(sub);
    write_report_csv(csv, rep);
    emit(o.out, csv.str(), out);

    nlohmann::ordered_json j = to_json(rep);
    j["meta"] = metadata_json(sub);
    const std::string sidecar = sidecar_path(o);
    if (!sidecar.empty()) {
        emit(sidecar, json_text(j), out);
    }
    return kOk;
}

inline int cmd_mc(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const ProblemSpec p = problem_for(o, single_eps2(o));
    McConfig cfg;
    cfg.dt = o.dt;
    cfg.n_paths = o.paths;
    cfg.seed = o.seed;
    cfg.bridge_correction = o.bridge;
    cfg.threads = o.threads;
    const McEstimate e = estimate_point(p, o.x, o.y, cfg);
    nlohmann::ordered_json j = to_json(e, cfg);
    j["x"] = o.x;
    j["y"] = o.y;
    j["eps2"] = single_eps2(o);
    j["problem"] = p.name;
    j["meta"] = metadata_json(sub);
    emit(o.out, json_text(j), out);
    return kOk;
}

inline int cmd_identity(const CLI::App& sub, const Options& o, std::ostream& out)
{
    const ProblemSpec p = builtin_problem(o.problem);
    const DecomposedProblem d = decompose(p, o.identity_quad);
    const AntiderivativeStack stack = build_antiderivatives(d, o.identity_quad);
    const IdentityReport r =
        matching_identity_check(d, stack, o.identity_modes, uniform_samples(o.samples));
    nlohmann::ordered_json j;
    j["problem"] = p.name;
    j["max_deviation"] = r.max_deviation;
    j["worst_y"] = r.worst_y;
    j["worst_k"] = r.worst_k;
    j["modes"] = r.modes;
    j["quad_points"] = o.identity_quad;
    j["y_samples"] = r.y_samples;
    j["meta"] = metadata_json(sub);
    emit(o.out, json_text(j), out);
    return kOk;
}

} // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr)
{
    detail::Options o;
    CLI::App app{"Asymptotic expansion and reference solvers for -eps^-2 u_xx - u_yy = f on the "
                 "unit square",
                 "aniso"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    const auto problem_names = builtin_problem_names();
    auto add_problem = [&](CLI::App* s) {
        s->add_option("--problem", o.problem, "built-in problem")
            ->check(CLI::IsMember(problem_names))
            ->capture_default_str();
    };
    auto add_eps2 = [&](CLI::App* s, const char* help) {
        s->add_option("--eps2", o.eps2, help)->delimiter(',')->capture_default_str();
    };
    auto add_grid = [&](CLI::App* s) {
        s->add_option("--nx", o.nx, "cells in x (N)")->check(CLI::Range(2, 1 << 20))->capture_default_str();
        s->add_option("--ny", o.ny, "cells in y (M)")->check(CLI::Range(2, 1 << 20))->capture_default_str();
    };
    auto add_series = [&](CLI::App* s) {
        s->add_option("--K", o.modes, "cosine modes")->check(CLI::PositiveNumber)->capture_default_str();
        s->add_option("--quad", o.quad, "Simpson intervals for x integrals")
            ->check(CLI::Range(8, 1 << 24))
            ->capture_default_str();
    };
    auto add_solver = [&](CLI::App* s) {
        s->add_option("--tol", o.tol, "relative residual for CG")->capture_default_str();
        s->add_option("--max-iter", o.max_iter, "CG iteration cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        s->add_option("--precond", o.precond, "preconditioner")
            ->check(CLI::IsMember({"fast", "sgs", "none"}))
            ->capture_default_str();
    };
    auto add_out = [&](CLI::App* s) {
        s->add_option("--out", o.out, "output file (default stdout)");
    };

    auto* check = app.add_subcommand("check", "compatibility and derivative sanity report");
    add_problem(check);
    check->add_option("--compat-step", o.compat_step, "difference step")->capture_default_str();
    check->add_option("--compat-tol", o.compat_tol, "compatibility tolerance")->capture_default_str();
    check->add_option("--quad", o.quad, "Simpson intervals for means")
        ->check(CLI::Range(8, 1 << 24))
        ->capture_default_str();
    add_out(check);

    auto* expand = app.add_subcommand("expand", "evaluate u^[2n] on the grid");
    add_problem(expand);
    add_eps2(expand, "eps^2");
    expand->add_option("--order", o.order, "expansion order n")->check(CLI::NonNegativeNumber)->capture_default_str();
    add_grid(expand);
    add_out(expand);

    auto* fd = app.add_subcommand("fd", "finite-difference reference solve");
    add_problem(fd);
    add_eps2(fd, "eps^2");
    add_grid(fd);
    add_solver(fd);
    add_out(fd);

    auto* conv = app.add_subcommand("convergence", "remainder norms and order fits");
    add_problem(conv);
    add_eps2(conv, "comma-separated eps^2 values");
    conv->add_option("--orders", o.orders, "comma-separated expansion orders")
        ->delimiter(',')
        ->capture_default_str();
    add_grid(conv);
    add_solver(conv);
    conv->add_option("--ref-refine", o.ref_refine, "reference solved with M * factor cells in y")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    conv->add_flag("--richardson", o.richardson, "Richardson-extrapolate the reference in y");
    conv->add_option("--scope", o.scope, "nodes entering the max-norm")
        ->check(CLI::IsMember({"interior", "all"}))
        ->capture_default_str();
    conv->add_flag("--no-fit", o.no_fit, "skip the slope fit");
    add_out(conv);
    conv->add_option("--json", o.json_out, "JSON sidecar (default: --out with .json extension)");

    auto* mc = app.add_subcommand("mc", "Feynman-Kac Monte Carlo point estimate");
    add_problem(mc);
    add_eps2(mc, "eps^2");
    mc->add_option("--x", o.x, "start x")->capture_default_str();
    mc->add_option("--y", o.y, "start y")->capture_default_str();
    mc->add_option("--paths", o.paths, "number of paths")->capture_default_str();
    mc->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
    mc->add_option("--dt", o.dt, "time step")->capture_default_str();
    mc->add_flag("--bridge", o.bridge, "Brownian-bridge exit correction");
    mc->add_option("--threads", o.threads, "worker threads (0 = all cores)")->capture_default_str();
    add_out(mc);

    auto* identity = app.add_subcommand("identity", "matching-identity deviation");
    add_problem(identity);
    identity->add_option("--samples", o.samples, "uniform y samples on [0, 1]")
        ->check(CLI::Range(2, 1 << 16))
        ->capture_default_str();
    add_out(identity);

    add_series(expand);
    add_series(conv);
    identity->add_option("--K", o.identity_modes, "cosine modes")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    identity->add_option("--quad", o.identity_quad, "Simpson intervals")
        ->check(CLI::Range(8, 1 << 24))
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*identity) {
            return detail::cmd_identity(*identity, o, out);
        }
        if (*check) {
            return detail::cmd_check(*check, o, out);
        }
        if (*expand) {
            return detail::cmd_expand(*expand, o, out, err);
        }
        if (*fd) {
            return detail::cmd_fd(*fd, o, out, err);
        }
        if (*conv) {
            return detail::cmd_convergence(*conv, o, out, err);
        }
        if (*mc) {
            return detail::cmd_mc(*mc, o, out);
        }
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

} // namespace aniso::cli
