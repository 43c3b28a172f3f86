#include <gtest/gtest.h>

#include <cmath>

#include "cutstokes/geometry.hpp"
#include "cutstokes/quadrature.hpp"

using namespace cutstokes;

namespace {

const circle_level_set centred({ 0.5, 0.5 }, 0.21);

double gap_order(double e_coarse, double e_fine) { return std::log2(e_coarse / e_fine); }

} // namespace

TEST(Mesh, Counts)
{
    auto t = build_mesh(2, cell_kind::triangle);
    EXPECT_EQ(t.num_elements(), 8u);
    EXPECT_EQ(t.num_vertices(), 9u);
    double area = 0;
    for (std::size_t e = 0; e < t.num_elements(); e++)
        area += polygon_signed_area(t.element_points(e));
    EXPECT_NEAR(area, 1.0, 1e-15);

    auto q = build_mesh(3, cell_kind::quad);
    EXPECT_EQ(q.num_elements(), 9u);
    EXPECT_EQ(q.num_vertices(), 16u);
}

TEST(Mesh, DiameterIsCellDiagonal)
{
    auto m = build_mesh(40, cell_kind::triangle);
    EXPECT_NEAR(m.h, std::sqrt(2.0) / 40, 1e-15);
    EXPECT_NEAR(m.h, 0.035355, 1e-6);
    EXPECT_NEAR(m.h, m.h_analytic(), 1e-15);
}

TEST(Mesh, RejectsTooCoarse) { EXPECT_THROW(build_mesh(1, cell_kind::triangle), std::invalid_argument); }

TEST(LevelSet, Values)
{
    auto c = eval_levelset(centred, { 0.71, 0.5 });
    EXPECT_NEAR(c.phi, 0.0, 1e-15);
    EXPECT_NEAR(c.grad.x(), 1.0, 1e-15);
    EXPECT_NEAR(c.grad.y(), 0.0, 1e-15);
    EXPECT_NEAR(centred.value({ 0.5, 0.5 }), -0.21, 1e-15);
    EXPECT_NEAR(centred.value({ 0.0, 0.5 }), 0.29, 1e-15);
    EXPECT_THROW(centred.gradient({ 0.5, 0.5 }), degenerate_point_error);
}

TEST(LevelSet, NormalPointsIntoSolid)
{
    point2 n = interface_normal(centred, { 0.71, 0.5 });
    EXPECT_NEAR(n.x(), -1.0, 1e-14);
    EXPECT_NEAR(n.y(), 0.0, 1e-14);
    n = interface_normal(centred, { 0.5, 0.29 });
    EXPECT_NEAR(n.x(), 0.0, 1e-14);
    EXPECT_NEAR(n.y(), 1.0, 1e-14);
    const double s = 0.21 / std::sqrt(2.0);
    n = interface_normal(centred, { 0.5 + s, 0.5 + s });
    EXPECT_NEAR(n.x(), -1 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(n.y(), -1 / std::sqrt(2.0), 1e-12);
    EXPECT_THROW(interface_normal(centred, { 0.2, 0.2 }), std::invalid_argument);
}

TEST(Classify, SimpleElements)
{
    background_mesh m = build_mesh(20, cell_kind::triangle);
    auto cls = classify_elements(m, centred);
    // element 0 has vertices (0,0),(0.05,0),(0.05,0.05)
    EXPECT_EQ(cls.tags[0], element_tag::fluid);
    for (std::size_t e = 0; e < m.num_elements(); e++)
    {
        auto p = m.element_points(e);
        if (p[0].isApprox(point2(0.5, 0.5)))
        {
            EXPECT_EQ(cls.tags[e], element_tag::solid);
        }
    }
    EXPECT_EQ(cls.count(element_tag::fluid) + cls.count(element_tag::solid) + cls.count(element_tag::cut),
              m.num_elements());
}

TEST(Classify, CutCountMatchesSignScan)
{
    auto m = build_mesh(40, cell_kind::triangle);
    auto cls = classify_elements(m, centred);
    std::size_t cut = 0;
    for (const auto& el : m.elements)
    {
        int pos = 0, neg = 0;
        for (int k = 0; k < 3; k++)
        {
            const point2& x = m.vertices[el[k]];
            double r2 = (x.x() - 0.5) * (x.x() - 0.5) + (x.y() - 0.5) * (x.y() - 0.5);
            (r2 > 0.21 * 0.21 ? pos : neg)++;
        }
        cut += pos > 0 && neg > 0;
    }
    EXPECT_EQ(cls.count(element_tag::cut), cut);
}

TEST(Clip, Examples)
{
    std::vector<point2> tri{ { 0, 0 }, { 1, 0 }, { 0, 1 } };
    auto whole = clip_element(tri, { 1, 1, 1 });
    ASSERT_EQ(whole.polygon.size(), 3u);
    EXPECT_NEAR(polygon_signed_area(whole.polygon), 0.5, 1e-15);

    auto part = clip_element(tri, { -1, 1, -1 });
    ASSERT_EQ(part.polygon.size(), 3u);
    EXPECT_TRUE(part.polygon[0].isApprox(point2(0.5, 0)));
    EXPECT_TRUE(part.polygon[1].isApprox(point2(1, 0)));
    EXPECT_TRUE(part.polygon[2].isApprox(point2(0.5, 0.5)));

    std::vector<point2> sq{ { 0, 0 }, { 1, 0 }, { 1, 1 }, { 0, 1 } };
    auto half = clip_element(sq, { -1, -1, 1, 1 });
    EXPECT_NEAR(polygon_signed_area(half.polygon), 0.5, 1e-15);
    for (const auto& p : half.polygon)
        EXPECT_GE(p.y(), 0.5 - 1e-15);

    EXPECT_TRUE(clip_element(tri, { -1, -1, -1 }).degenerate);
}

TEST(Quadrature, GaussLegendreExactness)
{
    for (int n = 1; n <= 6; n++)
    {
        auto r = gauss_legendre01(n);
        for (int k = 0; k <= 2 * n - 1; k++)
        {
            double s = 0;
            for (auto [x, w] : r)
                s += w * std::pow(x, k);
            EXPECT_NEAR(s, 1.0 / (k + 1), 1e-14) << "points " << n << " degree " << k;
        }
    }
}

TEST(Quadrature, TriangleMonomials)
{
    // int_T x^a y^b over the unit right triangle = a! b! / (a+b+2)!
    auto fact = [](int n) { return std::tgamma(n + 1.0); };
    for (int deg = 1; deg <= max_volume_degree; deg++)
    {
        auto r = volume_rule({ { 0, 0 }, { 1, 0 }, { 0, 1 } }, deg);
        for (int a = 0; a <= deg; a++)
            for (int b = 0; a + b <= deg; b++)
            {
                double s = 0;
                for (const auto& q : r)
                    s += q.w * std::pow(q.x.x(), a) * std::pow(q.x.y(), b);
                EXPECT_NEAR(s, fact(a) * fact(b) / fact(a + b + 2), 1e-14) << deg << " " << a << " " << b;
            }
    }
    auto r = volume_rule({ { 0, 0 }, { 1, 0 }, { 0, 1 } }, 4);
    double s = 0;
    for (const auto& q : r)
        s += q.w * q.x.x() * q.x.x() * q.x.y() * q.x.y();
    EXPECT_NEAR(s, 1.0 / 180, 1e-15);
}

TEST(Quadrature, UnitSquare)
{
    std::vector<point2> sq{ { 0, 0 }, { 1, 0 }, { 1, 1 }, { 0, 1 } };
    for (int deg = 1; deg <= max_volume_degree; deg++)
    {
        double w = 0, x = 0;
        for (const auto& q : volume_rule(sq, deg))
        {
            w += q.w;
            x += q.w * q.x.x();
        }
        EXPECT_NEAR(w, 1.0, 1e-14);
        EXPECT_NEAR(x, 0.5, 1e-14);
    }
    EXPECT_THROW(volume_rule(sq, max_volume_degree + 1), std::invalid_argument);
}

TEST(Quadrature, ChordAlongEdge)
{
    std::vector<point2> tri{ { 0, 0 }, { 0.3, 0 }, { 0, 0.3 } };
    circle_level_set ls({ 0.15, -1.0 }, 1.0);
    auto s = surface_rule(tri, { 0, 0, 1 }, ls, 3);
    double len = 0;
    for (const auto& q : s)
        len += q.w;
    EXPECT_NEAR(len, 0.3, 1e-15);
}

TEST(Quadrature, AreaAndLengthOracles)
{
    const double area = 1.0 - M_PI * 0.21 * 0.21, length = 2 * M_PI * 0.21;
    std::vector<double> ea, el;
    for (int n : { 20, 40, 80, 160 })
    {
        auto m = build_mesh(n, cell_kind::triangle);
        auto rules = build_cut_rules(m, centred, classify_elements(m, centred), 2);
        ea.push_back(std::abs(rules.total_volume() - area));
        el.push_back(std::abs(rules.total_surface() - length));
        if (n == 40)
        {
            EXPECT_NEAR(rules.total_volume(), 0.861456, 1e-3);
        }
        if (n == 80)
        {
            EXPECT_NEAR(rules.total_volume(), area, 1e-3);
            EXPECT_NEAR(rules.total_surface(), 1.319469, 5e-4);
        }
    }
    for (std::size_t k = 0; k + 1 < ea.size(); k++)
    {
        EXPECT_GE(gap_order(ea[k], ea[k + 1]), 1.8);
        EXPECT_GE(gap_order(el[k], el[k + 1]), 1.8);
    }
}

TEST(Quadrature, QuadMeshCutAreas)
{
    auto m = build_mesh(40, cell_kind::quad);
    auto rules = build_cut_rules(m, centred, classify_elements(m, centred), 4);
    EXPECT_NEAR(rules.total_volume(), 1.0 - M_PI * 0.21 * 0.21, 1e-3);
    EXPECT_NEAR(rules.total_surface(), 2 * M_PI * 0.21, 2e-3);
}
