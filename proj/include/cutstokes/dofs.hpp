#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fe.hpp"
#include "geometry.hpp"
#include "quadrature.hpp"

namespace cutstokes {

enum class dof_status : unsigned char { active, virtual_, removed };

/// Global numbering of one scalar element family on the background mesh,
/// with the trimming status of every node. Vector fields store components
/// interleaved: dof = components * retained_index + component.
struct field_layout
{
    scalar_element      element = scalar_element::p1;
    int                 components = 1;
    int                 shapes_per_element = 0;
    std::vector<int>    element_nodes; // num_elements * shapes_per_element
    std::vector<point2> node_position;
    std::vector<dof_status> status;
    std::vector<char>   on_boundary;
    std::vector<int>    node_index; // retained index, -1 when removed
    int                 num_retained = 0;

    std::span<const int> nodes(std::size_t e) const
    {
        return { element_nodes.data() + e * shapes_per_element, std::size_t(shapes_per_element) };
    }

    std::size_t num_nodes() const { return node_position.size(); }
    int num_dofs() const { return components * num_retained; }
    int dof(int node, int comp) const { return components * node_index[node] + comp; }

    std::size_t count(dof_status s) const { return std::count(status.begin(), status.end(), s); }
};

struct dof_layout
{
    fe_triplet       triplet = fe_triplet::p2_p1_p0;
    field_layout     velocity;
    field_layout     pressure;
    std::vector<int> multiplier_index; // per element, -1 when the element carries none
    std::vector<int> multiplier_elements;
    std::vector<int> velocity_free;    // per velocity dof: free index, -1 on the outer boundary
    int              num_free_velocity = 0;

    int num_multiplier_dofs() const { return 2 * int(multiplier_elements.size()); }
    int multiplier_dof(std::size_t e, int comp) const { return 2 * multiplier_index[e] + comp; }
};

struct no_interface_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

namespace detail {

inline field_layout number_field(const background_mesh& msh, scalar_element el, int components)
{
    field_layout f;
    f.element = el;
    f.components = components;
    f.shapes_per_element = num_shapes(el);

    const auto ref = reference_nodes(el);
    const int  n = msh.n;
    const std::size_t ne = msh.num_elements();
    f.element_nodes.resize(ne * f.shapes_per_element);

    int lattice = 0; // lattice subdivisions; 0 for purely element-wise nodes
    switch (el)
    {
        case scalar_element::p1:
        case scalar_element::p1b:
        case scalar_element::q1: lattice = n; break;
        case scalar_element::p2:
        case scalar_element::q2: lattice = 2 * n; break;
        default: break;
    }

    std::size_t num_lattice = lattice ? std::size_t(lattice + 1) * (lattice + 1) : 0;
    std::size_t num_nodes = num_lattice;
    if (el == scalar_element::p1b || is_discontinuous(el))
        num_nodes += ne;
    f.node_position.resize(num_nodes);

    if (lattice)
        for (int j = 0; j <= lattice; j++)
            for (int i = 0; i <= lattice; i++)
                f.node_position[i + j * (lattice + 1)] = point2(double(i) / lattice, double(j) / lattice);

    for (std::size_t e = 0; e < ne; e++)
    {
        element_map map(msh, e);
        for (int k = 0; k < f.shapes_per_element; k++)
        {
            point2 x = map.map(ref[k]);
            int id;
            bool interior = is_discontinuous(el) || (el == scalar_element::p1b && k == 3);
            if (interior)
            {
                id = int(num_lattice + e);
                f.node_position[id] = x;
            }
            else
            {
                int i = int(std::lround(x.x() * lattice));
                int j = int(std::lround(x.y() * lattice));
                id = i + j * (lattice + 1);
            }
            f.element_nodes[e * f.shapes_per_element + k] = id;
        }
    }

    f.on_boundary.assign(num_nodes, 0);
    for (std::size_t k = 0; k < num_lattice; k++)
    {
        const auto& x = f.node_position[k];
        f.on_boundary[k] = (x.x() == 0.0 || x.y() == 0.0 || x.x() == 1.0 || x.y() == 1.0);
    }
    return f;
}

inline void trim_field(field_layout& f, const element_class& cls, const background_mesh& msh,
                       const level_set* ls)
{
    std::vector<char> used(f.num_nodes(), 0);
    for (std::size_t e = 0; e < msh.num_elements(); e++)
        if (cls.tags[e] != element_tag::solid)
            for (int id : f.nodes(e))
                used[id] = 1;

    f.status.assign(f.num_nodes(), dof_status::removed);
    f.node_index.assign(f.num_nodes(), -1);
    f.num_retained = 0;
    for (std::size_t k = 0; k < f.num_nodes(); k++)
    {
        if (!used[k])
            continue;
        f.node_index[k] = f.num_retained++;
        bool in_solid = ls && ls->value(f.node_position[k]) < 0.0;
        f.status[k] = in_solid ? dof_status::virtual_ : dof_status::active;
    }
}

inline void number_free_velocity(dof_layout& l)
{
    const auto& v = l.velocity;
    l.velocity_free.assign(v.num_dofs(), -1);
    l.num_free_velocity = 0;
    for (std::size_t k = 0; k < v.num_nodes(); k++)
    {
        if (v.node_index[k] < 0 || v.on_boundary[k])
            continue;
        for (int c = 0; c < v.components; c++)
            l.velocity_free[v.dof(int(k), c)] = l.num_free_velocity++;
    }
}

} // namespace detail

/// Velocity and pressure numbering trimmed to the elements that meet the
/// fluid, and one vector multiplier per cut element.
inline dof_layout build_layout(const background_mesh& msh, const element_class& cls, fe_triplet triplet,
                               const level_set* ls = nullptr)
{
    auto ti = info(triplet);
    if (ti.cells != msh.kind)
        throw std::invalid_argument(std::string("build_layout: triplet ") + ti.name + " needs a " +
                                    to_string(ti.cells) + " mesh");
    if (cls.tags.size() != msh.num_elements())
        throw std::invalid_argument("build_layout: classification does not match the mesh");
    if (cls.count(element_tag::cut) == 0)
        throw no_interface_error("build_layout: no cut element, the multiplier space is empty");

    dof_layout l;
    l.triplet = triplet;
    l.velocity = detail::number_field(msh, ti.velocity, 2);
    l.pressure = detail::number_field(msh, ti.pressure, 1);
    detail::trim_field(l.velocity, cls, msh, ls);
    detail::trim_field(l.pressure, cls, msh, ls);

    l.multiplier_index.assign(msh.num_elements(), -1);
    for (std::size_t e = 0; e < msh.num_elements(); e++)
    {
        if (cls.tags[e] != element_tag::cut)
            continue;
        l.multiplier_index[e] = int(l.multiplier_elements.size());
        l.multiplier_elements.push_back(int(e));
    }

    detail::number_free_velocity(l);
    return l;
}

/// Drops the multiplier of cut elements whose interface chord is shorter
/// than 1e-10*h (grazing cuts). Piecewise-constant multipliers on distinct
/// elements have disjoint supports, so no other redundancy exists.
inline dof_layout prune_multiplier(const dof_layout& layout, const cut_rules& rules, double h)
{
    dof_layout l = layout;
    l.multiplier_index.assign(layout.multiplier_index.size(), -1);
    l.multiplier_elements.clear();
    for (int e : layout.multiplier_elements)
    {
        if (rules.rules[e].chord_length < 1e-10 * h || rules.rules[e].surface.empty())
            continue;
        l.multiplier_index[e] = int(l.multiplier_elements.size());
        l.multiplier_elements.push_back(e);
    }
    return l;
}

inline void print_dof_report(std::ostream& os, const dof_layout& l)
{
    auto line = [&os](const char* name, const field_layout& f) {
        os << name << ": active " << f.count(dof_status::active) << ", virtual "
           << f.count(dof_status::virtual_) << ", removed " << f.count(dof_status::removed)
           << " (nodes), " << f.num_dofs() << " dofs\n";
    };
    line("velocity", l.velocity);
    line("pressure", l.pressure);
    os << "multiplier: " << l.multiplier_elements.size() << " cut elements, " << l.num_multiplier_dofs()
       << " dofs\n";
}

} // namespace cutstokes
