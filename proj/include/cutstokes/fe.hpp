#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geometry.hpp"

namespace cutstokes {

/// Scalar element families. Vector fields use one copy per component.
enum class scalar_element { p0, p1, p1b, p2, q0, q1, q2 };

inline constexpr int max_local_shapes = 9;

using shape_values    = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, max_local_shapes, 1>;
using shape_gradients = Eigen::Matrix<double, Eigen::Dynamic, 2, 0, max_local_shapes, 2>;

struct shape_eval
{
    shape_values    values;
    shape_gradients grads;
};

inline cell_kind element_cell(scalar_element el)
{
    switch (el)
    {
        case scalar_element::p0:
        case scalar_element::p1:
        case scalar_element::p1b:
        case scalar_element::p2: return cell_kind::triangle;
        default: return cell_kind::quad;
    }
}

inline int num_shapes(scalar_element el)
{
    switch (el)
    {
        case scalar_element::p0:
        case scalar_element::q0: return 1;
        case scalar_element::p1: return 3;
        case scalar_element::p1b:
        case scalar_element::q1: return 4;
        case scalar_element::p2: return 6;
        case scalar_element::q2: return 9;
    }
    return 0;
}

inline bool is_discontinuous(scalar_element el)
{
    return el == scalar_element::p0 || el == scalar_element::q0;
}

/// Nodes in reference coordinates. Triangle: (0,0),(1,0),(0,1); quad: [0,1]^2.
/// P2 edge nodes follow the edges 01, 12, 20; Q2 nodes are the four
/// vertices, the edge midpoints 01, 12, 23, 30, then the center.
/// Interior nodes (bubble, P0/Q0) sit at the barycenter.
inline std::vector<point2> reference_nodes(scalar_element el)
{
    switch (el)
    {
        case scalar_element::p0: return { point2(1. / 3, 1. / 3) };
        case scalar_element::q0: return { point2(0.5, 0.5) };
        case scalar_element::p1: return { point2(0, 0), point2(1, 0), point2(0, 1) };
        case scalar_element::p1b: return { point2(0, 0), point2(1, 0), point2(0, 1), point2(1. / 3, 1. / 3) };
        case scalar_element::p2:
            return { point2(0, 0), point2(1, 0),     point2(0, 1),
                     point2(0.5, 0), point2(0.5, 0.5), point2(0, 0.5) };
        case scalar_element::q1: return { point2(0, 0), point2(1, 0), point2(1, 1), point2(0, 1) };
        case scalar_element::q2:
            return { point2(0, 0),   point2(1, 0),   point2(1, 1),   point2(0, 1),  point2(0.5, 0),
                     point2(1, 0.5), point2(0.5, 1), point2(0, 0.5), point2(0.5, 0.5) };
    }
    return {};
}

struct outside_reference_error : std::domain_error
{
    using std::domain_error::domain_error;
};

inline bool inside_reference(cell_kind k, const point2& xi, double tol = 1e-10)
{
    if (k == cell_kind::triangle)
        return xi.x() >= -tol && xi.y() >= -tol && xi.x() + xi.y() <= 1.0 + tol;
    return xi.x() >= -tol && xi.y() >= -tol && xi.x() <= 1.0 + tol && xi.y() <= 1.0 + tol;
}

namespace detail {

// 1D quadratic Lagrange on {0, 1/2, 1}: value and derivative
inline std::array<double, 3> lagrange2(double x)
{
    return { 2.0 * (x - 0.5) * (x - 1.0), -4.0 * x * (x - 1.0), 2.0 * x * (x - 0.5) };
}
inline std::array<double, 3> lagrange2_d(double x)
{
    return { 4.0 * x - 3.0, -8.0 * x + 4.0, 4.0 * x - 1.0 };
}

} // namespace detail

/// Shape functions and their reference gradients. The P1 bubble is
/// 27*l0*l1*l2, equal to one at the barycenter.
inline shape_eval eval_basis(scalar_element el, const point2& xi)
{
    if (!inside_reference(element_cell(el), xi))
        throw outside_reference_error("eval_basis: point outside the reference element");

    const double x = xi.x(), y = xi.y();
    shape_eval r;
    r.values.resize(num_shapes(el));
    r.grads.resize(num_shapes(el), 2);

    switch (el)
    {
        case scalar_element::p0:
        case scalar_element::q0:
            r.values(0) = 1.0;
            r.grads.setZero();
            break;

        case scalar_element::p1:
        case scalar_element::p1b:
        {
            r.values(0) = 1.0 - x - y;
            r.values(1) = x;
            r.values(2) = y;
            r.grads.row(0) << -1.0, -1.0;
            r.grads.row(1) << 1.0, 0.0;
            r.grads.row(2) << 0.0, 1.0;
            if (el == scalar_element::p1b)
            {
                double l0 = 1.0 - x - y;
                r.values(3) = 27.0 * l0 * x * y;
                r.grads.row(3) << 27.0 * y * (l0 - x), 27.0 * x * (l0 - y);
            }
            break;
        }

        case scalar_element::p2:
        {
            const double l[3] = { 1.0 - x - y, x, y };
            const Eigen::RowVector2d dl[3] = { { -1.0, -1.0 }, { 1.0, 0.0 }, { 0.0, 1.0 } };
            for (int i = 0; i < 3; i++)
            {
                r.values(i) = l[i] * (2.0 * l[i] - 1.0);
                r.grads.row(i) = (4.0 * l[i] - 1.0) * dl[i];
            }
            const int edges[3][2] = { { 0, 1 }, { 1, 2 }, { 2, 0 } };
            for (int k = 0; k < 3; k++)
            {
                int a = edges[k][0], b = edges[k][1];
                r.values(3 + k) = 4.0 * l[a] * l[b];
                r.grads.row(3 + k) = 4.0 * (l[a] * dl[b] + l[b] * dl[a]);
            }
            break;
        }

        case scalar_element::q1:
        {
            r.values << (1 - x) * (1 - y), x * (1 - y), x * y, (1 - x) * y;
            r.grads << -(1 - y), -(1 - x), (1 - y), -x, y, x, -y, (1 - x);
            break;
        }

        case scalar_element::q2:
        {
            auto lx = detail::lagrange2(x), ly = detail::lagrange2(y);
            auto dx = detail::lagrange2_d(x), dy = detail::lagrange2_d(y);
            // (i,j) index of each node in the 1D factors {0, 1/2, 1}
            const int idx[9][2] = { { 0, 0 }, { 2, 0 }, { 2, 2 }, { 0, 2 }, { 1, 0 },
                                    { 2, 1 }, { 1, 2 }, { 0, 1 }, { 1, 1 } };
            for (int k = 0; k < 9; k++)
            {
                int i = idx[k][0], j = idx[k][1];
                r.values(k) = lx[i] * ly[j];
                r.grads.row(k) << dx[i] * ly[j], lx[i] * dy[j];
            }
            break;
        }
    }
    return r;
}

/// Geometric map of a mesh element: affine for triangles, bilinear for quads.
class element_map
{
    cell_kind             m_kind;
    std::array<point2, 4> m_v;

public:
    element_map(cell_kind kind, const std::vector<point2>& v) : m_kind(kind)
    {
        for (std::size_t i = 0; i < v.size() && i < 4; i++)
            m_v[i] = v[i];
    }

    element_map(const background_mesh& msh, std::size_t e) : element_map(msh.kind, msh.element_points(e)) {}

    cell_kind kind() const { return m_kind; }

    point2 map(const point2& xi) const
    {
        const double x = xi.x(), y = xi.y();
        if (m_kind == cell_kind::triangle)
            return m_v[0] + (m_v[1] - m_v[0]) * x + (m_v[2] - m_v[0]) * y;
        return (1 - x) * (1 - y) * m_v[0] + x * (1 - y) * m_v[1] + x * y * m_v[2] + (1 - x) * y * m_v[3];
    }

    /// Columns are dx/dxi and dx/deta.
    Eigen::Matrix2d jacobian(const point2& xi) const
    {
        Eigen::Matrix2d J;
        if (m_kind == cell_kind::triangle)
        {
            J.col(0) = m_v[1] - m_v[0];
            J.col(1) = m_v[2] - m_v[0];
            return J;
        }
        const double x = xi.x(), y = xi.y();
        J.col(0) = (1 - y) * (m_v[1] - m_v[0]) + y * (m_v[2] - m_v[3]);
        J.col(1) = (1 - x) * (m_v[3] - m_v[0]) + x * (m_v[2] - m_v[1]);
        return J;
    }

    point2 inverse(const point2& x) const
    {
        point2 xi(1.0 / 3.0, 1.0 / 3.0);
        if (m_kind == cell_kind::quad)
            xi = point2(0.5, 0.5);
        for (int it = 0; it < 20; it++)
        {
            point2 r = map(xi) - x;
            point2 d = jacobian(xi).partialPivLu().solve(r);
            xi -= d;
            if (m_kind == cell_kind::triangle || d.norm() < 1e-15)
                break;
        }
        return xi;
    }
};

/// Shape values and physical gradients at reference point `xi`.
inline shape_eval eval_physical(scalar_element el, const element_map& map, const point2& xi)
{
    shape_eval r = eval_basis(el, xi);
    Eigen::Matrix2d Jinv_t = map.jacobian(xi).inverse().transpose();
    for (int i = 0; i < r.grads.rows(); i++)
        r.grads.row(i) = (Jinv_t * r.grads.row(i).transpose()).transpose();
    return r;
}

enum class fe_triplet { p1b_p1_p0, p2_p1_p0, q1_q0_q0, q2_q1_q0 };

struct triplet_info
{
    const char*    name;
    scalar_element velocity;
    scalar_element pressure;
    cell_kind      cells;
    int            volume_degree;
};

inline triplet_info info(fe_triplet t)
{
    switch (t)
    {
        case fe_triplet::p1b_p1_p0:
            return { "p1bp1p0", scalar_element::p1b, scalar_element::p1, cell_kind::triangle, 4 };
        case fe_triplet::p2_p1_p0:
            return { "p2p1p0", scalar_element::p2, scalar_element::p1, cell_kind::triangle, 6 };
        case fe_triplet::q1_q0_q0:
            return { "q1q0q0", scalar_element::q1, scalar_element::q0, cell_kind::quad, 4 };
        case fe_triplet::q2_q1_q0:
            return { "q2q1q0", scalar_element::q2, scalar_element::q1, cell_kind::quad, 6 };
    }
    throw std::invalid_argument("unknown triplet");
}

inline std::string to_string(fe_triplet t) { return info(t).name; }

inline fe_triplet parse_triplet(const std::string& s)
{
    for (auto t : { fe_triplet::p1b_p1_p0, fe_triplet::p2_p1_p0, fe_triplet::q1_q0_q0, fe_triplet::q2_q1_q0 })
        if (s == info(t).name)
            return t;
    throw std::invalid_argument("unknown finite element triplet '" + s +
                                "' (expected p1bp1p0, p2p1p0, q1q0q0 or q2q1q0)");
}

} // namespace cutstokes
