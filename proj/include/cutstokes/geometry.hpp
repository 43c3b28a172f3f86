#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cutstokes {

using point2 = Eigen::Vector2d;

enum class cell_kind { triangle, quad };

inline std::string to_string(cell_kind k)
{
    return k == cell_kind::triangle ? "triangle" : "quad";
}

/// Structured mesh of the unit square. Vertex (i,j) sits at (i/n, j/n) and
/// has index i + j*(n+1). Triangles split every cell along the diagonal from
/// its lower-left to its upper-right corner; all elements are counter-clockwise.
struct background_mesh
{
    int                             n = 0;
    cell_kind                       kind = cell_kind::triangle;
    std::vector<point2>             vertices;
    std::vector<std::array<int, 4>> elements; // last entry unused for triangles
    double                          h = 0.0;  // measured max element diameter

    int vertices_per_element() const { return kind == cell_kind::triangle ? 3 : 4; }
    std::size_t num_elements() const { return elements.size(); }
    std::size_t num_vertices() const { return vertices.size(); }

    /// Diagonal of a grid cell; equals the diameter of both cell kinds.
    double h_analytic() const { return std::sqrt(2.0) / n; }

    std::array<int, 2> lattice(int v) const { return { v % (n + 1), v / (n + 1) }; }

    std::vector<point2> element_points(std::size_t e) const
    {
        std::vector<point2> pts;
        pts.reserve(4);
        for (int k = 0; k < vertices_per_element(); k++)
            pts.push_back(vertices[elements[e][k]]);
        return pts;
    }

    point2 centroid(std::size_t e) const
    {
        point2 c = point2::Zero();
        for (int k = 0; k < vertices_per_element(); k++)
            c += vertices[elements[e][k]];
        return c / vertices_per_element();
    }
};

inline double polygon_signed_area(const std::vector<point2>& poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); i++)
    {
        const auto& p = poly[i];
        const auto& q = poly[(i + 1) % poly.size()];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

inline double polygon_diameter(const std::vector<point2>& poly)
{
    double d = 0.0;
    for (std::size_t i = 0; i < poly.size(); i++)
        for (std::size_t j = i + 1; j < poly.size(); j++)
            d = std::max(d, (poly[i] - poly[j]).norm());
    return d;
}

inline background_mesh build_mesh(int n, cell_kind kind)
{
    if (n < 2)
        throw std::invalid_argument("build_mesh: need at least 2 subdivisions per axis, got " +
                                    std::to_string(n));

    background_mesh msh;
    msh.n = n;
    msh.kind = kind;
    msh.vertices.reserve((n + 1) * (n + 1));
    for (int j = 0; j <= n; j++)
        for (int i = 0; i <= n; i++)
            msh.vertices.emplace_back(double(i) / n, double(j) / n);

    auto vid = [n](int i, int j) { return i + j * (n + 1); };
    for (int j = 0; j < n; j++)
    {
        for (int i = 0; i < n; i++)
        {
            int v00 = vid(i, j), v10 = vid(i + 1, j), v11 = vid(i + 1, j + 1), v01 = vid(i, j + 1);
            if (kind == cell_kind::triangle)
            {
                msh.elements.push_back({ v00, v10, v11, -1 });
                msh.elements.push_back({ v00, v11, v01, -1 });
            }
            else
                msh.elements.push_back({ v00, v10, v11, v01 });
        }
    }

    for (std::size_t e = 0; e < msh.num_elements(); e++)
        msh.h = std::max(msh.h, polygon_diameter(msh.element_points(e)));

    return msh;
}

struct degenerate_point_error : std::domain_error
{
    using std::domain_error::domain_error;
};

/// Signed-distance description of the solid: negative inside, positive in the fluid.
class level_set
{
public:
    virtual ~level_set() = default;
    virtual double value(const point2& x) const = 0;
    virtual point2 gradient(const point2& x) const = 0;
};

class circle_level_set final : public level_set
{
    point2 m_center;
    double m_radius;

public:
    circle_level_set(point2 center, double radius) : m_center(std::move(center)), m_radius(radius)
    {
        if (!(radius > 0.0))
            throw std::invalid_argument("circle_level_set: radius must be positive");
    }

    const point2& center() const { return m_center; }
    double radius() const { return m_radius; }

    double value(const point2& x) const override { return (x - m_center).norm() - m_radius; }

    point2 gradient(const point2& x) const override
    {
        point2 d = x - m_center;
        double r = d.norm();
        if (r == 0.0)
            throw degenerate_point_error("level-set gradient undefined at the circle center");
        return d / r;
    }
};

struct levelset_eval
{
    double phi;
    point2 grad;
};

inline levelset_eval eval_levelset(const level_set& ls, const point2& x)
{
    return { ls.value(x), ls.gradient(x) };
}

/// Unit normal pointing out of the fluid (into the solid), evaluated anywhere
/// the gradient exists. The quadrature uses it off the exact interface too.
inline point2 fluid_outward_normal(const level_set& ls, const point2& x)
{
    point2 g = ls.gradient(x);
    double gn = g.norm();
    if (gn == 0.0)
        throw degenerate_point_error("level-set gradient vanishes");
    return -g / gn;
}

/// Normal at a point of the interface. `h` scales the on-interface tolerance.
inline point2 interface_normal(const level_set& ls, const point2& x, double h = 1.0)
{
    if (std::abs(ls.value(x)) > 1e-12 * h)
        throw std::invalid_argument("interface_normal: point is not on the interface");
    return fluid_outward_normal(ls, x);
}

enum class element_tag : unsigned char { fluid, solid, cut };

inline const char* to_string(element_tag t)
{
    switch (t)
    {
        case element_tag::fluid: return "fluid";
        case element_tag::solid: return "solid";
        case element_tag::cut: return "cut";
    }
    return "?";
}

struct element_class
{
    std::vector<element_tag> tags;

    std::size_t count(element_tag t) const
    {
        std::size_t c = 0;
        for (auto x : tags)
            c += (x == t);
        return c;
    }
};

inline element_tag classify_element(const background_mesh& msh, const level_set& ls, std::size_t e)
{
    bool all_pos = true, all_neg = true;
    auto test = [&](double phi) {
        all_pos = all_pos && phi > 0.0;
        all_neg = all_neg && phi < 0.0;
    };
    for (int k = 0; k < msh.vertices_per_element(); k++)
        test(ls.value(msh.vertices[msh.elements[e][k]]));
    test(ls.value(msh.centroid(e)));

    if (all_pos)
        return element_tag::fluid;
    if (all_neg)
        return element_tag::solid;
    return element_tag::cut;
}

inline element_class classify_elements(const background_mesh& msh, const level_set& ls)
{
    element_class cls;
    cls.tags.resize(msh.num_elements());
    for (std::size_t e = 0; e < msh.num_elements(); e++)
        cls.tags[e] = classify_element(msh, ls, e);
    return cls;
}

} // namespace cutstokes
