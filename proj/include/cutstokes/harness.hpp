#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "assembly.hpp"
#include "discretization.hpp"
#include "manufactured.hpp"
#include "solver.hpp"

namespace cutstokes {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

inline std::shared_ptr<const level_set> make_circle(const point2& center, double radius)
{
    return std::make_shared<circle_level_set>(center, radius);
}

struct case_config
{
    fe_triplet triplet = fe_triplet::p2_p1_p0;
    int        n = 40;
    double     gamma0 = 0.05;
    point2     center{ 0.5, 0.5 };
    double     radius = 0.21;
    double     nu = 1.0;
    double     amplitude = 1.0;
    bool       estimate_condition = false;
    int        surface_points = 3;

    void validate() const
    {
        if (n < 2)
            throw std::invalid_argument("n must be at least 2");
        if (!(gamma0 >= 0.0))
            throw std::invalid_argument("gamma0 must be non-negative");
        if (!(radius > 0.0) || radius >= 0.5)
            throw std::invalid_argument("radius must lie in (0, 0.5)");
        if (!(nu > 0.0))
            throw std::invalid_argument("viscosity must be positive");
        if (center.x() - radius <= 0.0 || center.x() + radius >= 1.0 || center.y() - radius <= 0.0 ||
            center.y() + radius >= 1.0)
            throw std::invalid_argument("the circle must lie strictly inside the unit box");
        if (surface_points < 1)
            throw std::invalid_argument("surface_points must be positive");
    }
};

/// Relative errors in percent.
struct error_report
{
    std::string triplet;
    int         n = 0;
    double      h = 0.0;
    double      gamma0 = 0.0;
    double      err_u_l2 = nan_value, err_u_h1 = nan_value, err_p_l2 = nan_value, err_lambda_l2 = nan_value;
    double      cond = nan_value;
    std::string status = "ok";

    int    dofs = 0;
    double residual = nan_value;
    double err_lambda_dual = nan_value;   // same norm through the interface mass matrix
    double err_lambda_matrix = nan_value; // interpolant-based block expansion
    double mean_multiplier = nan_value;
    double seconds = 0.0;

    bool ok() const { return status == "ok"; }
};

/// Squared absolute errors and squared reference norms.
struct error_integrals
{
    double u_l2 = 0, u_h1 = 0, p_l2 = 0, lambda_l2 = 0;
    double ref_u_l2 = 0, ref_u_h1 = 0, ref_p_l2 = 0, ref_lambda_l2 = 0;

    double rel(double e, double r) const { return 100.0 * std::sqrt(e / r); }
};

/// Mean of the exact pressure over the discrete fluid domain.
inline double fluid_mean(const cut_rules& rules, const scalar_field& p)
{
    double s = 0.0, a = 0.0;
    for (const auto& r : rules.rules)
        for (const auto& q : r.volume)
        {
            s += q.w * p(q.x);
            a += q.w;
        }
    return s / a;
}

inline point2 element_multiplier(const discretization& d, const Eigen::VectorXd& L, std::size_t e)
{
    const auto& lay = d.layout;
    if (lay.multiplier_index[e] < 0)
        return point2::Zero();
    return { L(lay.multiplier_dof(e, 0)), L(lay.multiplier_dof(e, 1)) };
}

/// Errors of discrete fields against the manufactured solution. Volume terms
/// use `volume_rules` (typically of higher degree than the assembly rules),
/// interface terms the assembly chords of `d`.
inline error_integrals compute_errors(const discretization& d, const cut_rules& volume_rules,
                                      const manufactured_solution& ms, const Eigen::VectorXd& U,
                                      const Eigen::VectorXd& P, const Eigen::VectorXd& L)
{
    error_integrals r;
    for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
    {
        if (d.rules.effective.tags[e] == element_tag::solid)
            continue;
        element_basis eb(d, e);
        for (const auto& q : volume_rules.rules[e].volume)
        {
            auto f = eval_fields(d, eb, e, U, P, q.x);
            point2 u = ms.velocity(q.x);
            Eigen::Matrix2d g = ms.velocity_gradient(q.x);
            double p = ms.pressure(q.x);
            r.u_l2 += q.w * (u - f.u).squaredNorm();
            r.u_h1 += q.w * (g - f.grad_u).squaredNorm();
            r.p_l2 += q.w * (p - f.p) * (p - f.p);
            r.ref_u_l2 += q.w * u.squaredNorm();
            r.ref_u_h1 += q.w * g.squaredNorm();
            r.ref_p_l2 += q.w * p * p;
        }
        point2 lh = element_multiplier(d, L, e);
        for (const auto& s : d.rules.rules[e].surface)
        {
            point2 lam = ms.traction(s.x, s.normal);
            r.lambda_l2 += s.w * (lam - lh).squaredNorm();
            r.ref_lambda_l2 += s.w * lam.squaredNorm();
        }
    }
    return r;
}

/// |lambda_ex - lambda_h|^2 on the interface, expanded as
/// |lambda_ex|^2 - 2 (lambda_ex, lambda_h) + L^T M L with M the assembled
/// multiplier mass matrix.
inline double lambda_error_dual(const discretization& d, const stokes_forms& forms, const manufactured_solution& ms,
                                const Eigen::VectorXd& L)
{
    double ref = 0.0, cross = 0.0;
    for (int e : d.layout.multiplier_elements)
    {
        point2 lh = element_multiplier(d, L, e);
        for (const auto& s : d.rules.rules[e].surface)
        {
            point2 lam = ms.traction(s.x, s.normal);
            ref += s.w * lam.squaredNorm();
            cross += s.w * lam.dot(lh);
        }
    }
    // interface elements without a multiplier still contribute |lambda_ex|^2
    for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
        if (d.layout.multiplier_index[e] < 0)
            for (const auto& s : d.rules.rules[e].surface)
                ref += s.w * ms.traction(s.x, s.normal).squaredNorm();

    return ref - 2.0 * cross + L.dot(forms.multiplier_mass * L);
}

/// The error norm expanded through the interface-only blocks, with lambda_ex
/// replaced by the discrete traction of the interpolated exact fields:
/// |2 nu D(I u) n - (I p) n - lambda_h|^2 = -[U P L] S [U P L]^T.
inline double lambda_error_matrix(const stokes_forms& forms, const Eigen::VectorXd& Ui, const Eigen::VectorXd& Pi,
                                  const Eigen::VectorXd& L)
{
    double q = Ui.dot(forms.suu * Ui) + 2.0 * Ui.dot(forms.sup * Pi) + 2.0 * Ui.dot(forms.sul * L) +
               Pi.dot(forms.spp * Pi) + 2.0 * Pi.dot(forms.spl * L) + L.dot(forms.sll * L);
    return -q;
}

struct stokes_solution
{
    saddle_system          system;
    solve_report           report;
    saddle_system::fields  fields;
};

inline stokes_solution solve_stokes(const discretization& d, const stokes_forms& forms, double nu, double gamma,
                                    const vector_field& boundary, bool estimate_condition)
{
    stokes_solution s;
    s.system = make_system(d, forms, nu, gamma, boundary);
    check_multiplier_rows(s.system);
    s.report = solve(s.system.matrix, s.system.rhs, estimate_condition);
    s.fields = s.system.expand(s.report.x);
    return s;
}

struct case_result
{
    error_report          report;
    discretization        disc;
    manufactured_solution exact;
    stokes_solution       solution;
};

/// Assemble, solve and measure one manufactured-solution configuration.
/// Solver failures are recorded in the report status.
inline case_result run_case_full(const case_config& cfg)
{
    cfg.validate();
    auto t0 = std::chrono::steady_clock::now();

    case_result cr;
    auto& rep = cr.report;
    rep.triplet = to_string(cfg.triplet);
    rep.n = cfg.n;
    rep.gamma0 = cfg.gamma0;

    cr.disc = discretize(cfg.n, cfg.triplet, make_circle(cfg.center, cfg.radius), cfg.surface_points);
    const auto& d = cr.disc;
    rep.h = d.h();

    cr.exact.nu = cfg.nu;
    cr.exact.amplitude = cfg.amplitude;
    cr.exact.pressure_shift = fluid_mean(d.rules, [&](const point2& x) { return cr.exact.raw_pressure(x); });

    const bool stab = cfg.gamma0 != 0.0;
    auto forms = assemble_forms(d, cfg.nu, cr.exact.data(), stab);
    try
    {
        cr.solution = solve_stokes(d, forms, cfg.nu, cfg.gamma0 * d.h(), cr.exact.data().boundary,
                                   cfg.estimate_condition);
    }
    catch (const std::exception& ex)
    {
        rep.status = std::string("failed: ") + ex.what();
        rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return cr;
    }
    const auto& sol = cr.solution;
    rep.dofs = sol.report.dofs;
    rep.residual = sol.report.residual;
    rep.cond = sol.report.cond1;
    rep.mean_multiplier = sol.fields.m;

    auto err_rules = build_cut_rules(d.mesh, *d.ls, d.cls, max_volume_degree, cfg.surface_points);
    auto e = compute_errors(d, err_rules, cr.exact, sol.fields.U, sol.fields.P, sol.fields.L);
    rep.err_u_l2 = e.rel(e.u_l2, e.ref_u_l2);
    rep.err_u_h1 = e.rel(e.u_h1, e.ref_u_h1);
    rep.err_p_l2 = e.rel(e.p_l2, e.ref_p_l2);
    rep.err_lambda_l2 = e.rel(e.lambda_l2, e.ref_lambda_l2);
    rep.err_lambda_dual = e.rel(std::max(0.0, lambda_error_dual(d, forms, cr.exact, sol.fields.L)), e.ref_lambda_l2);

    if (stab)
    {
        auto Ui = interpolate_velocity(d, [&](const point2& x) { return cr.exact.velocity(x); });
        auto Pi = interpolate_pressure(d, [&](const point2& x) { return cr.exact.pressure(x); });
        rep.err_lambda_matrix =
            e.rel(std::max(0.0, lambda_error_matrix(forms, Ui, Pi, sol.fields.L)), e.ref_lambda_l2);
    }
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return cr;
}

inline error_report run_case(const case_config& cfg) { return run_case_full(cfg).report; }

/// Errors of the interpolated exact solution, bypassing the solver. The
/// multiplier is the chord average of the exact traction.
inline error_report interpolation_errors(const case_config& cfg)
{
    cfg.validate();
    error_report rep;
    rep.triplet = to_string(cfg.triplet);
    rep.n = cfg.n;
    rep.gamma0 = cfg.gamma0;
    auto d = discretize(cfg.n, cfg.triplet, make_circle(cfg.center, cfg.radius), cfg.surface_points);
    rep.h = d.h();

    manufactured_solution ms;
    ms.nu = cfg.nu;
    ms.amplitude = cfg.amplitude;
    ms.pressure_shift = fluid_mean(d.rules, [&](const point2& x) { return ms.raw_pressure(x); });

    auto U = interpolate_velocity(d, [&](const point2& x) { return ms.velocity(x); });
    auto P = interpolate_pressure(d, [&](const point2& x) { return ms.pressure(x); });
    Eigen::VectorXd L = Eigen::VectorXd::Zero(d.layout.num_multiplier_dofs());
    for (int e : d.layout.multiplier_elements)
    {
        point2 s = point2::Zero();
        double len = 0.0;
        for (const auto& q : d.rules.rules[e].surface)
        {
            s += q.w * ms.traction(q.x, q.normal);
            len += q.w;
        }
        L(d.layout.multiplier_dof(e, 0)) = s.x() / len;
        L(d.layout.multiplier_dof(e, 1)) = s.y() / len;
    }

    auto err_rules = build_cut_rules(d.mesh, *d.ls, d.cls, max_volume_degree, cfg.surface_points);
    auto e = compute_errors(d, err_rules, ms, U, P, L);
    rep.err_u_l2 = e.rel(e.u_l2, e.ref_u_l2);
    rep.err_u_h1 = e.rel(e.u_h1, e.ref_u_h1);
    rep.err_p_l2 = e.rel(e.p_l2, e.ref_p_l2);
    rep.err_lambda_l2 = e.rel(e.lambda_l2, e.ref_lambda_l2);
    return rep;
}

// ---------------------------------------------------------------- CSV output

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline void write_report_header(std::ostream& os)
{
    os << "triplet,n,h,gamma0,err_u_l2,err_u_h1,err_p_l2,err_lambda_l2,cond,status\n";
}

inline void write_report_row(std::ostream& os, const error_report& r)
{
    std::string status = r.status;
    for (auto& c : status)
        if (c == ',' || c == '\n')
            c = ';';
    os << r.triplet << "," << r.n << "," << format_number(r.h) << "," << format_number(r.gamma0) << ","
       << format_number(r.err_u_l2) << "," << format_number(r.err_u_h1) << "," << format_number(r.err_p_l2) << ","
       << format_number(r.err_lambda_l2) << "," << format_number(r.cond) << "," << status << "\n";
}

// ---------------------------------------------------------------- studies

/// Least-squares slope of log(e) against log(h); NaN with fewer than two points.
inline double fitted_order(const std::vector<double>& h, const std::vector<double>& e)
{
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < h.size(); i++)
        if (std::isfinite(e[i]) && e[i] > 0.0)
        {
            lx.push_back(std::log(h[i]));
            ly.push_back(std::log(e[i]));
        }
    if (lx.size() < 2)
        return nan_value;
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); i++)
    {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); i++)
    {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

struct convergence_table
{
    std::vector<error_report> rows;
    double order_u_l2 = nan_value, order_u_h1 = nan_value, order_p_l2 = nan_value, order_lambda_l2 = nan_value;
};

inline convergence_table fit_orders(std::vector<error_report> rows)
{
    convergence_table t;
    t.rows = std::move(rows);
    std::vector<double> h, a, b, c, l;
    for (const auto& r : t.rows)
        if (r.ok())
        {
            h.push_back(r.h);
            a.push_back(r.err_u_l2);
            b.push_back(r.err_u_h1);
            c.push_back(r.err_p_l2);
            l.push_back(r.err_lambda_l2);
        }
    t.order_u_l2 = fitted_order(h, a);
    t.order_u_h1 = fitted_order(h, b);
    t.order_p_l2 = fitted_order(h, c);
    t.order_lambda_l2 = fitted_order(h, l);
    return t;
}

inline convergence_table convergence_study(case_config base, const std::vector<int>& levels)
{
    if (levels.size() < 3)
        throw std::invalid_argument("convergence_study: need at least three mesh levels");
    std::vector<error_report> rows;
    for (int n : levels)
    {
        base.n = n;
        rows.push_back(run_case(base));
    }
    return fit_orders(std::move(rows));
}

/// One row per stabilization scale. The forms are assembled once and
/// recombined for every gamma0.
inline std::vector<error_report> gamma_sweep(case_config base, const std::vector<double>& grid)
{
    base.validate();
    for (double g : grid)
        if (!(g > 0.0))
            throw std::invalid_argument("gamma_sweep: grid values must be positive");

    auto d = discretize(base.n, base.triplet, make_circle(base.center, base.radius), base.surface_points);
    manufactured_solution ms;
    ms.nu = base.nu;
    ms.amplitude = base.amplitude;
    ms.pressure_shift = fluid_mean(d.rules, [&](const point2& x) { return ms.raw_pressure(x); });
    auto data = ms.data();
    auto forms = assemble_forms(d, base.nu, data, true);
    auto err_rules = build_cut_rules(d.mesh, *d.ls, d.cls, max_volume_degree, base.surface_points);

    std::vector<error_report> rows;
    for (double g0 : grid)
    {
        error_report rep;
        rep.triplet = to_string(base.triplet);
        rep.n = base.n;
        rep.h = d.h();
        rep.gamma0 = g0;
        try
        {
            auto sol = solve_stokes(d, forms, base.nu, g0 * d.h(), data.boundary, base.estimate_condition);
            auto e = compute_errors(d, err_rules, ms, sol.fields.U, sol.fields.P, sol.fields.L);
            rep.err_u_l2 = e.rel(e.u_l2, e.ref_u_l2);
            rep.err_u_h1 = e.rel(e.u_h1, e.ref_u_h1);
            rep.err_p_l2 = e.rel(e.p_l2, e.ref_p_l2);
            rep.err_lambda_l2 = e.rel(e.lambda_l2, e.ref_lambda_l2);
            rep.cond = sol.report.cond1;
            rep.residual = sol.report.residual;
            rep.dofs = sol.report.dofs;
        }
        catch (const std::exception& ex)
        {
            rep.status = std::string("failed: ") + ex.what();
        }
        rows.push_back(rep);
    }
    return rows;
}

struct geometry_row
{
    double       xc = 0.0;
    error_report stabilized, unstabilized;
};

inline std::vector<double> arithmetic_grid(double from, double to, double step)
{
    if (!(step > 0.0) || to < from)
        throw std::invalid_argument("grid: need step > 0 and to >= from");
    std::vector<double> g;
    const int count = int(std::floor((to - from) / step + 1e-9)) + 1;
    for (int i = 0; i < count; i++)
        g.push_back(from + i * step);
    return g;
}

inline std::vector<geometry_row> geometry_sweep(case_config base, const std::vector<double>& xcs)
{
    std::vector<geometry_row> rows;
    for (double xc : xcs)
    {
        geometry_row r;
        r.xc = xc;
        case_config c = base;
        c.center.x() = xc;
        r.stabilized = run_case(c);
        c.gamma0 = 0.0;
        r.unstabilized = run_case(c);
        rows.push_back(r);
    }
    return rows;
}

/// One line per position: the stabilized errors, then the unstabilized ones.
inline void write_geometry_header(std::ostream& os)
{
    os << "xc,n,h,gamma0,err_u_l2,err_u_h1,err_p_l2,err_lambda_l2,status,"
          "unstab_err_u_l2,unstab_err_u_h1,unstab_err_p_l2,unstab_err_lambda_l2,unstab_status\n";
}

inline void write_geometry_row(std::ostream& os, const geometry_row& r)
{
    auto status = [](std::string s) {
        for (auto& c : s)
            if (c == ',' || c == '\n')
                c = ';';
        return s;
    };
    const auto &a = r.stabilized, &b = r.unstabilized;
    os << format_number(r.xc) << "," << a.n << "," << format_number(a.h) << "," << format_number(a.gamma0) << ","
       << format_number(a.err_u_l2) << "," << format_number(a.err_u_h1) << "," << format_number(a.err_p_l2) << ","
       << format_number(a.err_lambda_l2) << "," << status(a.status) << "," << format_number(b.err_u_l2) << ","
       << format_number(b.err_u_h1) << "," << format_number(b.err_p_l2) << "," << format_number(b.err_lambda_l2)
       << "," << status(b.status) << "\n";
}

struct assumption_row
{
    int           n = 0;
    double        h = 0.0;
    eigmax_result cu, cp;
    std::string   status = "ok";

    double max_constant() const { return std::max(cu.value, cp.value); }
};

/// Interface-to-bulk constants
///   C_u(h) = lambda_max(h inv(A_H1(F)) A_L2(Gamma)) for symmetric velocity gradients,
///   C_p(h) = lambda_max(h inv(A_L2(F)) A_L2(Gamma)) for the pressure.
inline assumption_row assumption_constants(const discretization& d)
{
    assumption_row r;
    r.n = d.mesh.n;
    r.h = d.h();
    auto aux = assemble_aux_matrices(d);
    try
    {
        r.cu = generalized_eigmax(aux.l2_interface_velocity, aux.h1_fluid, r.h);
        r.cp = generalized_eigmax(aux.l2_interface_pressure, aux.l2_fluid_pressure, r.h);
        if (!r.cu.converged || !r.cp.converged)
            r.status = "not converged";
    }
    catch (const std::exception& ex)
    {
        r.status = std::string("failed: ") + ex.what();
    }
    return r;
}

inline std::vector<assumption_row> assumption_scan(const case_config& base, const std::vector<int>& levels)
{
    std::vector<assumption_row> rows;
    for (int n : levels)
    {
        case_config c = base;
        c.n = n;
        c.validate();
        rows.push_back(assumption_constants(discretize(n, c.triplet, make_circle(c.center, c.radius))));
    }
    return rows;
}

} // namespace cutstokes
