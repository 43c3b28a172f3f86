#pragma once

#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "assembly.hpp"

namespace cutstokes {

/// Legacy ASCII VTK unstructured grid of the background mesh with point and
/// cell scalars.
class vtk_writer
{
    const background_mesh& m_mesh;
    std::vector<std::pair<std::string, std::vector<double>>> m_point, m_cell;

public:
    explicit vtk_writer(const background_mesh& msh) : m_mesh(msh) {}

    void add_point_scalar(std::string name, std::vector<double> v)
    {
        if (v.size() != m_mesh.vertices.size())
            throw std::invalid_argument("vtk: point field size mismatch for " + name);
        m_point.emplace_back(std::move(name), std::move(v));
    }

    void add_cell_scalar(std::string name, std::vector<double> v)
    {
        if (v.size() != m_mesh.num_elements())
            throw std::invalid_argument("vtk: cell field size mismatch for " + name);
        m_cell.emplace_back(std::move(name), std::move(v));
    }

    void write(const std::string& path, const std::string& title = "cutstokes") const
    {
        std::ofstream os(path);
        if (!os)
            throw std::runtime_error("cannot write " + path);
        os << std::setprecision(12);
        os << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
        os << "POINTS " << m_mesh.vertices.size() << " double\n";
        for (const auto& v : m_mesh.vertices)
            os << v.x() << " " << v.y() << " 0\n";

        const int nv = m_mesh.vertices_per_element();
        const std::size_t ne = m_mesh.num_elements();
        os << "CELLS " << ne << " " << ne * (nv + 1) << "\n";
        for (std::size_t e = 0; e < ne; e++)
        {
            os << nv;
            for (int k = 0; k < nv; k++)
                os << " " << m_mesh.elements[e][k];
            os << "\n";
        }
        os << "CELL_TYPES " << ne << "\n";
        for (std::size_t e = 0; e < ne; e++)
            os << (m_mesh.kind == cell_kind::triangle ? 5 : 9) << "\n";

        if (!m_point.empty())
            os << "POINT_DATA " << m_mesh.vertices.size() << "\n";
        for (const auto& [name, v] : m_point)
        {
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double x : v)
                os << x << "\n";
        }
        if (!m_cell.empty())
            os << "CELL_DATA " << ne << "\n";
        for (const auto& [name, v] : m_cell)
        {
            os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
            for (double x : v)
                os << x << "\n";
        }
    }
};

/// Velocity magnitude and pressure at mesh vertices (zero where the vertex
/// touches no fluid element), element tags and fluid fractions per cell.
inline void write_solution_vtk(const std::string& path, const discretization& d, const Eigen::VectorXd& U,
                               const Eigen::VectorXd& P)
{
    const auto& msh = d.mesh;
    std::vector<double> speed(msh.vertices.size(), 0.0), pressure(msh.vertices.size(), 0.0);
    std::vector<char> done(msh.vertices.size(), 0);
    std::vector<double> tag(msh.num_elements()), frac(msh.num_elements());

    for (std::size_t e = 0; e < msh.num_elements(); e++)
    {
        tag[e] = double(int(d.rules.effective.tags[e]));
        frac[e] = d.rules.rules[e].fluid_area_fraction;
        if (d.rules.effective.tags[e] == element_tag::solid)
            continue;
        element_basis eb(d, e);
        for (int k = 0; k < msh.vertices_per_element(); k++)
        {
            int v = msh.elements[e][k];
            if (done[v])
                continue;
            auto f = eval_fields(d, eb, e, U, P, msh.vertices[v]);
            speed[v] = f.u.norm();
            pressure[v] = f.p;
            done[v] = 1;
        }
    }

    vtk_writer w(msh);
    w.add_point_scalar("velocity_magnitude", std::move(speed));
    w.add_point_scalar("pressure", std::move(pressure));
    w.add_cell_scalar("tag", std::move(tag));
    w.add_cell_scalar("fluid_fraction", std::move(frac));
    w.write(path);
}

/// Interface chords as VTK polydata lines.
inline void write_interface_vtk(const std::string& path, const discretization& d)
{
    std::vector<point2> pts;
    for (const auto& r : d.rules.rules)
        for (const auto& c : r.chords)
        {
            pts.push_back(c[0]);
            pts.push_back(c[1]);
        }
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os << std::setprecision(12);
    os << "# vtk DataFile Version 3.0\ninterface\nASCII\nDATASET POLYDATA\nPOINTS " << pts.size() << " double\n";
    for (const auto& p : pts)
        os << p.x() << " " << p.y() << " 0\n";
    os << "LINES " << pts.size() / 2 << " " << 3 * (pts.size() / 2) << "\n";
    for (std::size_t i = 0; i < pts.size(); i += 2)
        os << "2 " << i << " " << i + 1 << "\n";
}

} // namespace cutstokes
