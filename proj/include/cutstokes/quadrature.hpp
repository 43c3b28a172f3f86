#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "geometry.hpp"

namespace cutstokes {

struct volume_point
{
    point2 x;
    double w;
};

struct surface_point
{
    point2 x;
    double w;
    point2 normal; // out of the fluid
};

/// Gauss-Legendre rule with `npts` points on [0,1].
inline std::vector<std::pair<double, double>> gauss_legendre01(int npts)
{
    if (npts < 1)
        throw std::invalid_argument("gauss_legendre01: need at least one point");

    // P_n(x) and P_n'(x) by the three-term recurrence
    auto legendre = [npts](double x) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= npts; k++)
        {
            double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        return std::pair{ p1, npts * (x * p1 - p0) / (x * x - 1.0) };
    };

    std::vector<std::pair<double, double>> rule(npts);
    for (int i = 0; i < npts; i++)
    {
        double x = std::cos(M_PI * (i + 0.75) / (npts + 0.5));
        for (int it = 0; it < 100; it++)
        {
            auto [p, dp] = legendre(x);
            double dx = p / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16)
                break;
        }
        double dp = legendre(x).second;
        rule[i] = { 0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp) };
    }
    std::sort(rule.begin(), rule.end());
    return rule;
}

inline constexpr int max_volume_degree = 6;

/// Conical-product Gauss rule on the reference triangle (0,0),(1,0),(0,1),
/// exact for polynomials of total degree `degree`. Weights sum to 1/2.
inline const std::vector<volume_point>& reference_triangle_rule(int degree)
{
    if (degree < 1 || degree > max_volume_degree)
        throw std::invalid_argument("triangle rule: unsupported degree " + std::to_string(degree));

    static std::mutex mtx;
    static std::map<int, std::vector<volume_point>> cache;
    std::lock_guard lock(mtx);
    auto it = cache.find(degree);
    if (it != cache.end())
        return it->second;

    int m = (degree + 3) / 2;
    auto gl = gauss_legendre01(m);
    std::vector<volume_point> rule;
    for (auto [s, ws] : gl)
        for (auto [t, wt] : gl)
            rule.push_back({ point2(s, (1.0 - s) * t), ws * wt * (1.0 - s) });
    return cache.emplace(degree, std::move(rule)).first->second;
}

/// Appends a rule for the physical triangle (a,b,c) to `out`.
inline void triangle_rule(const point2& a, const point2& b, const point2& c, int degree,
                          std::vector<volume_point>& out)
{
    double twice_area = (b - a).x() * (c - a).y() - (c - a).x() * (b - a).y();
    if (twice_area <= 0.0)
        return;
    for (const auto& qp : reference_triangle_rule(degree))
        out.push_back({ a + (b - a) * qp.x.x() + (c - a) * qp.x.y(), qp.w * twice_area });
}

struct clip_result
{
    std::vector<point2> polygon;
    bool degenerate = false; // fluid part negligible; treat as solid
};

/// Part of a convex polygon where the linear interpolant of the vertex
/// values is non-negative.
inline clip_result clip_element(const std::vector<point2>& poly, const std::vector<double>& phi)
{
    if (poly.size() != phi.size() || poly.size() < 3)
        throw std::invalid_argument("clip_element: polygon/values mismatch");

    clip_result res;
    const std::size_t nv = poly.size();
    for (std::size_t i = 0; i < nv; i++)
    {
        std::size_t j = (i + 1) % nv;
        double fi = phi[i], fj = phi[j];
        if (fi >= 0.0)
            res.polygon.push_back(poly[i]);
        if ((fi > 0.0 && fj < 0.0) || (fi < 0.0 && fj > 0.0))
        {
            double t = fi / (fi - fj);
            res.polygon.push_back(poly[i] + t * (poly[j] - poly[i]));
        }
    }

    double full = std::abs(polygon_signed_area(poly));
    double part = res.polygon.size() >= 3 ? polygon_signed_area(res.polygon) : 0.0;
    if (part < 1e-14 * full)
    {
        res.degenerate = true;
        res.polygon.clear();
    }
    return res;
}

/// Fan triangulation from the first vertex; each sub-triangle gets a rule of
/// the requested degree.
inline std::vector<volume_point> volume_rule(const std::vector<point2>& poly, int degree)
{
    if (degree < 1 || degree > max_volume_degree)
        throw std::invalid_argument("volume_rule: degree must be in [1," +
                                    std::to_string(max_volume_degree) + "]");
    if (poly.size() < 3)
        throw std::invalid_argument("volume_rule: empty polygon");

    std::vector<volume_point> pts;
    for (std::size_t k = 1; k + 1 < poly.size(); k++)
        triangle_rule(poly[0], poly[k], poly[k + 1], degree, pts);
    return pts;
}

struct ambiguous_cut_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// Zeros of the linear interpolant along the polygon boundary, in boundary order.
inline std::vector<point2> zero_crossings(const std::vector<point2>& poly, const std::vector<double>& phi)
{
    std::vector<point2> z;
    const std::size_t nv = poly.size();
    for (std::size_t i = 0; i < nv; i++)
    {
        std::size_t j = (i + 1) % nv;
        if (phi[i] == 0.0)
            z.push_back(poly[i]);
        if ((phi[i] > 0.0 && phi[j] < 0.0) || (phi[i] < 0.0 && phi[j] > 0.0))
        {
            double t = phi[i] / (phi[i] - phi[j]);
            z.push_back(poly[i] + t * (poly[j] - poly[i]));
        }
    }
    return z;
}

/// Gauss-Legendre points on the chord of the linearized interface. Each point
/// carries the exact level-set normal. Returns nothing when the zero set does
/// not cross the element; throws when it crosses more than two edges.
inline std::vector<surface_point> surface_rule(const std::vector<point2>& poly, const std::vector<double>& phi,
                                               const level_set& ls, int n_points = 3)
{
    auto z = zero_crossings(poly, phi);
    if (z.size() > 2)
        throw ambiguous_cut_error("surface_rule: interface crosses more than two edges");
    if (z.size() < 2)
        return {};

    double len = (z[1] - z[0]).norm();
    if (len == 0.0)
        return {};

    std::vector<surface_point> pts;
    for (auto [t, w] : gauss_legendre01(n_points))
    {
        point2 x = z[0] + t * (z[1] - z[0]);
        pts.push_back({ x, w * len, fluid_outward_normal(ls, x) });
    }
    return pts;
}

struct cut_rule
{
    std::vector<volume_point>          volume;
    std::vector<surface_point>         surface;
    double                             fluid_area_fraction = 0.0;
    double                             chord_length = 0.0;
    std::vector<std::vector<point2>>   polygons; // fluid sub-polygons, cut elements only
    std::vector<std::array<point2, 2>> chords;
};

struct cut_rules
{
    std::vector<cut_rule> rules; // one per element, empty for solid ones
    element_class         effective; // classification after dropping negligible cuts
    int                   volume_degree = 0;

    double total_volume() const
    {
        double s = 0.0;
        for (const auto& r : rules)
            for (const auto& q : r.volume)
                s += q.w;
        return s;
    }

    double total_surface() const
    {
        double s = 0.0;
        for (const auto& r : rules)
            for (const auto& q : r.surface)
                s += q.w;
        return s;
    }
};

namespace detail {

inline void cut_piece(const std::vector<point2>& poly, const std::vector<double>& phi, const level_set& ls,
                      int degree, int surface_points, cut_rule& rule)
{
    auto clipped = clip_element(poly, phi);
    if (clipped.degenerate)
        return;
    auto vol = volume_rule(clipped.polygon, degree);
    rule.volume.insert(rule.volume.end(), vol.begin(), vol.end());
    rule.polygons.push_back(clipped.polygon);

    auto surf = surface_rule(poly, phi, ls, surface_points);
    if (!surf.empty())
    {
        auto z = zero_crossings(poly, phi);
        rule.chords.push_back({ z[0], z[1] });
        rule.chord_length += (z[1] - z[0]).norm();
        rule.surface.insert(rule.surface.end(), surf.begin(), surf.end());
    }
}

} // namespace detail

/// Quadrature for the fluid part of one element and for its interface chord.
inline cut_rule build_cut_rule(const background_mesh& msh, const level_set& ls, std::size_t e, element_tag tag,
                               int degree, int surface_points = 3)
{
    cut_rule rule;
    auto poly = msh.element_points(e);
    double area = polygon_signed_area(poly);

    if (tag == element_tag::solid)
        return rule;
    if (tag == element_tag::fluid)
    {
        rule.volume = volume_rule(poly, degree);
        rule.fluid_area_fraction = 1.0;
        return rule;
    }

    std::vector<double> phi(poly.size());
    for (std::size_t k = 0; k < poly.size(); k++)
        phi[k] = ls.value(poly[k]);

    if (poly.size() == 4 && zero_crossings(poly, phi).size() > 2)
    {
        // saddle-shaped sign pattern: split along the 0-2 diagonal
        detail::cut_piece({ poly[0], poly[1], poly[2] }, { phi[0], phi[1], phi[2] }, ls, degree, surface_points, rule);
        detail::cut_piece({ poly[0], poly[2], poly[3] }, { phi[0], phi[2], phi[3] }, ls, degree, surface_points, rule);
    }
    else
        detail::cut_piece(poly, phi, ls, degree, surface_points, rule);

    double fluid = 0.0;
    for (const auto& p : rule.polygons)
        fluid += polygon_signed_area(p);
    rule.fluid_area_fraction = std::clamp(fluid / area, 0.0, 1.0);
    return rule;
}

inline cut_rules build_cut_rules(const background_mesh& msh, const level_set& ls, const element_class& cls,
                                 int degree, int surface_points = 3)
{
    cut_rules out;
    out.volume_degree = degree;
    out.effective = cls;
    out.rules.resize(msh.num_elements());
    for (std::size_t e = 0; e < msh.num_elements(); e++)
    {
        out.rules[e] = build_cut_rule(msh, ls, e, cls.tags[e], degree, surface_points);
        if (cls.tags[e] == element_tag::cut && out.rules[e].volume.empty())
        {
            out.rules[e] = cut_rule{};
            out.effective.tags[e] = element_tag::solid;
        }
    }
    return out;
}

} // namespace cutstokes
