#pragma once

#include <cmath>

#include <Eigen/Dense>

#include "assembly.hpp"

namespace cutstokes {

/// Smooth divergence-free test solution on the unit box:
///   u = (cos(pi x) sin(pi y), -sin(pi x) cos(pi y))
///   p = (y - 1/2) cos(2 pi x) + (x - 1/2) sin(2 pi y)
/// scaled by `amplitude`. The pressure is shifted by `pressure_shift` so
/// that it can be normalized to zero mean on the discrete fluid domain.
struct manufactured_solution
{
    double nu = 1.0;
    double amplitude = 1.0;
    double pressure_shift = 0.0;

    point2 velocity(const point2& x) const
    {
        const double sx = std::sin(M_PI * x.x()), cx = std::cos(M_PI * x.x());
        const double sy = std::sin(M_PI * x.y()), cy = std::cos(M_PI * x.y());
        return amplitude * point2(cx * sy, -sx * cy);
    }

    /// grad(i,j) = d u_i / d x_j
    Eigen::Matrix2d velocity_gradient(const point2& x) const
    {
        const double sx = std::sin(M_PI * x.x()), cx = std::cos(M_PI * x.x());
        const double sy = std::sin(M_PI * x.y()), cy = std::cos(M_PI * x.y());
        Eigen::Matrix2d g;
        g << -M_PI * sx * sy, M_PI * cx * cy, -M_PI * cx * cy, M_PI * sx * sy;
        return amplitude * g;
    }

    Eigen::Matrix2d strain(const point2& x) const
    {
        Eigen::Matrix2d g = velocity_gradient(x);
        return 0.5 * (g + g.transpose());
    }

    double raw_pressure(const point2& x) const
    {
        return amplitude * ((x.y() - 0.5) * std::cos(2 * M_PI * x.x()) + (x.x() - 0.5) * std::sin(2 * M_PI * x.y()));
    }

    double pressure(const point2& x) const { return raw_pressure(x) - pressure_shift; }

    point2 pressure_gradient(const point2& x) const
    {
        const double dpx = -2 * M_PI * (x.y() - 0.5) * std::sin(2 * M_PI * x.x()) + std::sin(2 * M_PI * x.y());
        const double dpy = std::cos(2 * M_PI * x.x()) + 2 * M_PI * (x.x() - 0.5) * std::cos(2 * M_PI * x.y());
        return amplitude * point2(dpx, dpy);
    }

    /// -nu * laplace(u) + grad(p); each velocity component satisfies
    /// laplace(u_i) = -2 pi^2 u_i.
    point2 force(const point2& x) const { return 2 * M_PI * M_PI * nu * velocity(x) + pressure_gradient(x); }

    /// Normal stress (2 nu D(u) - p I) n.
    point2 traction(const point2& x, const point2& n) const
    {
        return 2 * nu * strain(x) * n - pressure(x) * n;
    }

    stokes_data data() const
    {
        manufactured_solution m = *this;
        return { [m](const point2& x) { return m.force(x); }, [m](const point2& x) { return m.velocity(x); },
                 [m](const point2& x) { return m.velocity(x); } };
    }
};

} // namespace cutstokes
