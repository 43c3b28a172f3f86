#pragma once

#include <cmath>
#include <filesystem>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "harness.hpp"
#include "vtk.hpp"

namespace cutstokes {

inline constexpr double standard_gravity = 9.81;

struct drag_config
{
    int        n = 80;
    fe_triplet triplet = fe_triplet::p2_p1_p0;
    double     gamma0 = 0.05;
    double     nu = 1.0;
    double     radius = 0.21;
    int        surface_points = 3;
};

struct drag_result
{
    double          alpha = 0.0;        // vertical multiplier integral for unit upward velocity
    double          alpha_volume = nan_value;
    bool            positive = false;   // drag opposes the motion
    discretization  disc;
    stokes_solution solution;
};

/// Distance from the ball to the nearest wall of the unit box.
inline double wall_gap(const point2& center, double radius)
{
    return std::min({ center.x(), 1.0 - center.x(), center.y(), 1.0 - center.y() }) - radius;
}

/// Smooth cut-off equal to 1 for r <= r1 and 0 for r >= r2 (C2 quintic step),
/// with its derivative.
inline std::pair<double, double> smooth_cutoff(double r, double r1, double r2)
{
    if (r <= r1)
        return { 1.0, 0.0 };
    if (r >= r2)
        return { 0.0, 0.0 };
    double s = (r - r1) / (r2 - r1);
    double v = 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    double dv = -30.0 * s * s * (1.0 - s) * (1.0 - s) / (r2 - r1);
    return { v, dv };
}

/// int_F sigma(u_h, p_h) : grad w for w = (0, psi(|x - c|)), psi = 1 around
/// the ball and 0 near the walls. Equals the vertical traction integral on
/// the interface up to the discretization error.
inline double volume_force(const discretization& d, const Eigen::VectorXd& U, const Eigen::VectorXd& P,
                           const point2& center, double radius, double nu)
{
    const double gap = wall_gap(center, radius);
    const double r1 = radius + 0.2 * gap, r2 = radius + 0.8 * gap;
    double s = 0.0;
    for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
    {
        if (d.rules.effective.tags[e] == element_tag::solid)
            continue;
        element_basis eb(d, e);
        for (const auto& q : d.rules.rules[e].volume)
        {
            point2 dx = q.x - center;
            double r = dx.norm();
            auto [psi, dpsi] = smooth_cutoff(r, r1, r2);
            if (dpsi == 0.0)
                continue;
            point2 grad_w2 = dpsi * dx / r;
            auto f = eval_fields(d, eb, e, U, P, q.x);
            Eigen::Matrix2d sigma = nu * (f.grad_u + f.grad_u.transpose()) - f.p * Eigen::Matrix2d::Identity();
            s += q.w * sigma.row(1).dot(grad_w2);
        }
    }
    return s;
}

/// Stabilized Stokes problem with f = 0, velocity `speed` * (0,1) on the ball
/// and zero velocity on the box. alpha is the second component of the
/// interface integral of the multiplier divided by `speed`.
inline drag_result drag_problem(const drag_config& cfg, const point2& center, double speed = 1.0,
                                bool with_volume_force = false)
{
    if (!(cfg.radius > 0.0) || cfg.radius >= 0.5)
        throw std::invalid_argument("drag: radius must lie in (0, 0.5)");
    if (wall_gap(center, cfg.radius) <= 0.0)
        throw std::invalid_argument("drag: ball must lie strictly inside the box");
    if (cfg.n < 2 || !(cfg.gamma0 >= 0.0) || !(cfg.nu > 0.0))
        throw std::invalid_argument("drag: invalid discretization parameters");

    drag_result r;
    r.disc = discretize(cfg.n, cfg.triplet, make_circle(center, cfg.radius), cfg.surface_points);
    stokes_data data{ zero_field(), [speed](const point2&) { return point2(0.0, speed); }, zero_field() };
    auto forms = assemble_forms(r.disc, cfg.nu, data, cfg.gamma0 != 0.0);
    r.solution = solve_stokes(r.disc, forms, cfg.nu, cfg.gamma0 * r.disc.h(), data.boundary, false);

    double force = 0.0;
    for (int e : r.disc.layout.multiplier_elements)
    {
        double len = 0.0;
        for (const auto& q : r.disc.rules.rules[e].surface)
            len += q.w;
        force += len * r.solution.fields.L(r.disc.layout.multiplier_dof(e, 1));
    }
    r.alpha = force / speed;
    r.positive = r.alpha > 0.0;
    if (with_volume_force)
        r.alpha_volume = volume_force(r.disc, r.solution.fields.U, r.solution.fields.P, center, cfg.radius, cfg.nu) /
                         speed;
    return r;
}

inline double drag_alpha(const drag_config& cfg, const point2& center)
{
    return drag_problem(cfg, center).alpha;
}

/// Semi-implicit update M (v' - v)/dt = -alpha v' - g M.
inline double fall_velocity_update(double v, double dt, double alpha, double mass, double gravity = standard_gravity)
{
    if (!(dt > 0.0) || !(mass > 0.0) || !(alpha >= 0.0))
        throw std::invalid_argument("fall step: need dt > 0, mass > 0, alpha >= 0");
    return (v - gravity * dt) / (1.0 + alpha * dt / mass);
}

struct fall_state
{
    double t = 0.0;
    double h2 = 0.75;
    double v = 0.0;
};

inline fall_state fall_step(const fall_state& s, double dt, double alpha, double mass,
                            double gravity = standard_gravity)
{
    fall_state n;
    n.v = fall_velocity_update(s.v, dt, alpha, mass, gravity);
    n.h2 = s.h2 + dt * n.v;
    n.t = s.t + dt;
    return n;
}

/// The motion is vertical only, so contact can only happen at the floor.
inline double floor_gap(double h2, double radius) { return h2 - radius; }

struct freefall_config
{
    drag_config drag;
    double      mass = 0.02;
    double      gravity = standard_gravity;
    double      dt = 1e-4;
    double      t_end = 0.1;
    double      xc = 0.5;
    double      h2_start = 0.75;
    double      v_start = 0.0;
    int         alpha_every = 1;      // recompute alpha every k steps
    int         snapshot_every = 0;   // 0: no VTK snapshots
    std::string snapshot_dir;

    void validate() const
    {
        if (!(dt > 0.0) || !(mass > 0.0) || !(t_end > 0.0) || !(gravity >= 0.0))
            throw std::invalid_argument("freefall: dt, mass and t_end must be positive, gravity non-negative");
        if (alpha_every < 1 || snapshot_every < 0)
            throw std::invalid_argument("freefall: alpha_every must be >= 1, snapshot_every >= 0");
        if (wall_gap({ xc, h2_start }, drag.radius) <= 0.0)
            throw std::invalid_argument("freefall: ball must start strictly inside the box");
        if (floor_gap(h2_start, drag.radius) < std::sqrt(2.0) / drag.n)
            throw std::invalid_argument("freefall: ball must start at least one element diameter above the floor");
    }
};

struct freefall_row
{
    double      t, h2, v, alpha;
    std::string status;
};

struct freefall_result
{
    std::vector<freefall_row> rows;
    std::string               status = "END";
    int                       solves = 0;
    double                    max_alpha_lag = 0.0; // largest relative change of alpha between fresh solves
};

/// Time loop with alpha recomputed every `alpha_every` steps. Halts with
/// CONTACT once the gap to the floor drops below one element diameter.
inline freefall_result simulate_freefall(const freefall_config& cfg)
{
    cfg.validate();
    const double hmesh = std::sqrt(2.0) / cfg.drag.n;
    const int steps = int(std::ceil(cfg.t_end / cfg.dt - 1e-9));

    freefall_result res;
    fall_state s{ 0.0, cfg.h2_start, cfg.v_start };
    double alpha = 0.0;

    for (int k = 0;; k++)
    {
        const point2 center(cfg.xc, s.h2);
        const bool contact = floor_gap(s.h2, cfg.drag.radius) < hmesh || wall_gap(center, cfg.drag.radius) <= 0.0;
        const bool refresh = k % cfg.alpha_every == 0;
        const bool snapshot = cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 && !cfg.snapshot_dir.empty();
        if (!contact && (refresh || snapshot))
        {
            auto dr = drag_problem(cfg.drag, center);
            res.solves++;
            if (!dr.positive)
                throw solver_error("freefall: non-positive drag coefficient at t = " + std::to_string(s.t));
            if (k > 0)
                res.max_alpha_lag = std::max(res.max_alpha_lag, std::abs(dr.alpha - alpha) / dr.alpha);
            if (refresh)
                alpha = dr.alpha;
            if (snapshot)
            {
                // fields are linear in the ball velocity
                Eigen::VectorXd U = s.v * dr.solution.fields.U;
                Eigen::VectorXd P = s.v * dr.solution.fields.P;
                auto path = std::filesystem::path(cfg.snapshot_dir) / ("freefall_" + std::to_string(k) + ".vtk");
                write_solution_vtk(path.string(), dr.disc, U, P);
            }
        }

        std::string status = contact ? "CONTACT" : (k >= steps ? "END" : "RUNNING");
        res.rows.push_back({ s.t, s.h2, s.v, alpha, status });
        if (contact || k >= steps)
        {
            res.status = status;
            break;
        }
        s = fall_step(s, cfg.dt, alpha, cfg.mass, cfg.gravity);
    }
    return res;
}

inline void write_trajectory_csv(std::ostream& os, const freefall_result& r)
{
    os << "t,h2,h2dot,alpha,status\n";
    for (const auto& row : r.rows)
        os << format_number(row.t) << "," << format_number(row.h2) << "," << format_number(row.v) << ","
           << format_number(row.alpha) << "," << row.status << "\n";
}

} // namespace cutstokes
