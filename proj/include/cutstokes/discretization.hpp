#pragma once

#include <memory>

#include "dofs.hpp"
#include "fe.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

namespace cutstokes {

/// Everything geometric and combinatorial about one configuration:
/// mesh, solid, cut quadrature and the pruned dof layout.
struct discretization
{
    background_mesh                  mesh;
    std::shared_ptr<const level_set> ls;
    fe_triplet                       triplet = fe_triplet::p2_p1_p0;
    element_class                    cls;
    cut_rules                        rules;
    dof_layout                       layout;

    double h() const { return mesh.h; }
};

inline discretization discretize(int n, fe_triplet triplet, std::shared_ptr<const level_set> ls,
                                 int surface_points = 3)
{
    discretization d;
    auto ti = info(triplet);
    d.mesh = build_mesh(n, ti.cells);
    d.ls = std::move(ls);
    d.triplet = triplet;
    d.cls = classify_elements(d.mesh, *d.ls);
    d.rules = build_cut_rules(d.mesh, *d.ls, d.cls, ti.volume_degree, surface_points);
    d.layout = build_layout(d.mesh, d.rules.effective, triplet, d.ls.get());
    d.layout = prune_multiplier(d.layout, d.rules, d.mesh.h);
    return d;
}

/// Basis functions of both fields on one element, evaluated at physical points.
class element_basis
{
    element_map    m_map;
    scalar_element m_vel, m_pr;

public:
    element_basis(const discretization& d, std::size_t e)
        : m_map(d.mesh, e), m_vel(d.layout.velocity.element), m_pr(d.layout.pressure.element)
    {}

    const element_map& map() const { return m_map; }

    std::pair<shape_eval, shape_eval> at(const point2& x) const
    {
        point2 xi = m_map.inverse(x);
        return { eval_physical(m_vel, m_map, xi), eval_physical(m_pr, m_map, xi) };
    }
};

} // namespace cutstokes
