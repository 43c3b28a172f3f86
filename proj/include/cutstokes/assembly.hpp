#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "discretization.hpp"

namespace cutstokes {

using sparse_matrix = Eigen::SparseMatrix<double>;
using triplet_list  = std::vector<Eigen::Triplet<double>>;
using vector_field  = std::function<point2(const point2&)>;
using scalar_field  = std::function<double(const point2&)>;

struct stokes_coefficients
{
    double nu = 1.0;
    double gamma0 = 0.05;
    double h = 0.0; // mesh parameter

    double gamma() const { return gamma0 * h; }

    void validate() const
    {
        if (!(nu > 0.0))
            throw std::invalid_argument("viscosity must be positive");
        if (!(gamma0 >= 0.0))
            throw std::invalid_argument("gamma0 must be non-negative");
        if (!(h > 0.0))
            throw std::invalid_argument("mesh parameter must be positive");
    }
};

struct stokes_data
{
    vector_field force;     // body force in the fluid
    vector_field interface; // Dirichlet datum on the immersed boundary
    vector_field boundary;  // Dirichlet datum on the box boundary
};

inline vector_field zero_field()
{
    return [](const point2&) { return point2(0.0, 0.0); };
}

/// Discretized bilinear forms on the full (retained) numbering. The
/// stabilized blocks are uu + gamma*suu etc.; the s-blocks already carry
/// their viscosity factors.
struct stokes_forms
{
    int             n_velocity = 0, n_pressure = 0, n_multiplier = 0;
    sparse_matrix   uu, up, ul;
    Eigen::VectorXd F, G, mean;
    sparse_matrix   multiplier_mass; // interface mass matrix of the multiplier space
    bool            has_stabilization = false;
    sparse_matrix   suu, sup, sul, spp, spl, sll;
};

namespace detail {

/// Symmetric gradient of a vector shape function N*e_c, stored (d11, d22, d12).
struct sym_grad
{
    double d11, d22, d12;

    double ddot(const sym_grad& o) const { return d11 * o.d11 + d22 * o.d22 + 2.0 * d12 * o.d12; }
    point2 times(const point2& n) const { return { d11 * n.x() + d12 * n.y(), d12 * n.x() + d22 * n.y() }; }
};

inline sym_grad shape_sym_grad(const shape_gradients& g, int a, int c)
{
    if (c == 0)
        return { g(a, 0), 0.0, 0.5 * g(a, 1) };
    return { 0.0, g(a, 1), 0.5 * g(a, 0) };
}

inline std::vector<int> velocity_dofs(const dof_layout& l, std::size_t e)
{
    std::vector<int> d;
    for (int node : l.velocity.nodes(e))
        for (int c = 0; c < 2; c++)
            d.push_back(l.velocity.dof(node, c));
    return d;
}

inline std::vector<int> pressure_dofs(const dof_layout& l, std::size_t e)
{
    std::vector<int> d;
    for (int node : l.pressure.nodes(e))
        d.push_back(l.pressure.dof(node, 0));
    return d;
}

inline void scatter(triplet_list& t, const std::vector<int>& rows, const std::vector<int>& cols,
                    const Eigen::MatrixXd& m)
{
    for (std::size_t i = 0; i < rows.size(); i++)
        for (std::size_t j = 0; j < cols.size(); j++)
            t.emplace_back(rows[i], cols[j], m(i, j));
}

inline sparse_matrix from_triplets(int rows, int cols, const triplet_list& t)
{
    sparse_matrix m(rows, cols);
    m.setFromTriplets(t.begin(), t.end());
    return m;
}

} // namespace detail

/// Element loop for the volume, trace and (optionally) stabilization integrals.
inline stokes_forms assemble_forms(const discretization& d, double nu, const stokes_data& data,
                                   bool stabilization_terms)
{
    const auto& L = d.layout;
    stokes_forms f;
    f.n_velocity = L.velocity.num_dofs();
    f.n_pressure = L.pressure.num_dofs();
    f.n_multiplier = L.num_multiplier_dofs();
    f.has_stabilization = stabilization_terms;
    f.F = Eigen::VectorXd::Zero(f.n_velocity);
    f.G = Eigen::VectorXd::Zero(f.n_multiplier);
    f.mean = Eigen::VectorXd::Zero(f.n_pressure);

    triplet_list t_uu, t_up, t_ul, t_lm, s_uu, s_up, s_ul, s_pp, s_pl, s_ll;

    for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
    {
        if (d.rules.effective.tags[e] == element_tag::solid)
            continue;
        const auto& rule = d.rules.rules[e];
        element_basis eb(d, e);

        auto vd = detail::velocity_dofs(L, e);
        auto pd = detail::pressure_dofs(L, e);
        const int nv = int(vd.size()), np = int(pd.size());
        const int ns = nv / 2;

        Eigen::MatrixXd Auu = Eigen::MatrixXd::Zero(nv, nv), Aup = Eigen::MatrixXd::Zero(nv, np);
        Eigen::VectorXd Fe = Eigen::VectorXd::Zero(nv), Me = Eigen::VectorXd::Zero(np);
        std::vector<detail::sym_grad> D(nv);
        std::vector<double> div(nv);

        for (const auto& qp : rule.volume)
        {
            auto [vb, pb] = eb.at(qp.x);
            for (int a = 0; a < ns; a++)
                for (int c = 0; c < 2; c++)
                {
                    D[2 * a + c] = detail::shape_sym_grad(vb.grads, a, c);
                    div[2 * a + c] = vb.grads(a, c);
                }
            point2 fx = data.force ? data.force(qp.x) : point2::Zero();
            for (int k = 0; k < nv; k++)
            {
                for (int l = 0; l < nv; l++)
                    Auu(k, l) += qp.w * 2.0 * nu * D[k].ddot(D[l]);
                for (int j = 0; j < np; j++)
                    Aup(k, j) -= qp.w * pb.values(j) * div[k];
                Fe(k) += qp.w * vb.values(k / 2) * fx(k % 2);
            }
            for (int j = 0; j < np; j++)
                Me(j) += qp.w * pb.values(j);
        }

        detail::scatter(t_uu, vd, vd, Auu);
        detail::scatter(t_up, vd, pd, Aup);
        for (int k = 0; k < nv; k++)
            f.F(vd[k]) += Fe(k);
        for (int j = 0; j < np; j++)
            f.mean(pd[j]) += Me(j);

        if (L.multiplier_index[e] < 0)
            continue;

        std::vector<int> ld = { L.multiplier_dof(e, 0), L.multiplier_dof(e, 1) };
        Eigen::MatrixXd Aul = Eigen::MatrixXd::Zero(nv, 2);
        Eigen::MatrixXd Suu = Eigen::MatrixXd::Zero(nv, nv), Sup = Eigen::MatrixXd::Zero(nv, np);
        Eigen::MatrixXd Sul = Eigen::MatrixXd::Zero(nv, 2), Spp = Eigen::MatrixXd::Zero(np, np);
        Eigen::MatrixXd Spl = Eigen::MatrixXd::Zero(np, 2), Sll = Eigen::MatrixXd::Zero(2, 2);
        std::vector<point2> Dn(nv);
        std::vector<double> Dnn(nv);

        for (const auto& sp : rule.surface)
        {
            auto [vb, pb] = eb.at(sp.x);
            const point2& n = sp.normal;
            const double w = sp.w;
            for (int a = 0; a < ns; a++)
                for (int c = 0; c < 2; c++)
                {
                    int k = 2 * a + c;
                    Dn[k] = detail::shape_sym_grad(vb.grads, a, c).times(n);
                    Dnn[k] = n.dot(Dn[k]);
                    Aul(k, c) -= w * vb.values(a);
                }

            point2 gx = data.interface ? data.interface(sp.x) : point2::Zero();
            f.G(ld[0]) -= w * gx.x();
            f.G(ld[1]) -= w * gx.y();
            t_lm.emplace_back(ld[0], ld[0], w);
            t_lm.emplace_back(ld[1], ld[1], w);

            if (!stabilization_terms)
                continue;

            for (int k = 0; k < nv; k++)
            {
                for (int l = 0; l < nv; l++)
                    Suu(k, l) -= w * 4.0 * nu * nu * Dn[k].dot(Dn[l]);
                for (int j = 0; j < np; j++)
                    Sup(k, j) += w * 2.0 * nu * pb.values(j) * Dnn[k];
                for (int m = 0; m < 2; m++)
                    Sul(k, m) += w * 2.0 * nu * Dn[k](m);
            }
            for (int i = 0; i < np; i++)
            {
                for (int j = 0; j < np; j++)
                    Spp(i, j) -= w * pb.values(i) * pb.values(j);
                for (int m = 0; m < 2; m++)
                    Spl(i, m) -= w * pb.values(i) * n(m);
            }
            Sll(0, 0) -= w;
            Sll(1, 1) -= w;
        }

        detail::scatter(t_ul, vd, ld, Aul);
        if (stabilization_terms)
        {
            detail::scatter(s_uu, vd, vd, Suu);
            detail::scatter(s_up, vd, pd, Sup);
            detail::scatter(s_ul, vd, ld, Sul);
            detail::scatter(s_pp, pd, pd, Spp);
            detail::scatter(s_pl, pd, ld, Spl);
            detail::scatter(s_ll, ld, ld, Sll);
        }
    }

    f.uu = detail::from_triplets(f.n_velocity, f.n_velocity, t_uu);
    f.up = detail::from_triplets(f.n_velocity, f.n_pressure, t_up);
    f.ul = detail::from_triplets(f.n_velocity, f.n_multiplier, t_ul);
    f.multiplier_mass = detail::from_triplets(f.n_multiplier, f.n_multiplier, t_lm);
    if (stabilization_terms)
    {
        f.suu = detail::from_triplets(f.n_velocity, f.n_velocity, s_uu);
        f.sup = detail::from_triplets(f.n_velocity, f.n_pressure, s_up);
        f.sul = detail::from_triplets(f.n_velocity, f.n_multiplier, s_ul);
        f.spp = detail::from_triplets(f.n_pressure, f.n_pressure, s_pp);
        f.spl = detail::from_triplets(f.n_pressure, f.n_multiplier, s_pl);
        f.sll = detail::from_triplets(f.n_multiplier, f.n_multiplier, s_ll);
    }
    return f;
}

/// Nodal interpolant on the full velocity numbering. The bubble coefficient
/// matches the field at the barycenter.
inline Eigen::VectorXd interpolate_velocity(const discretization& d, const vector_field& u)
{
    const auto& V = d.layout.velocity;
    Eigen::VectorXd U = Eigen::VectorXd::Zero(V.num_dofs());
    for (std::size_t k = 0; k < V.num_nodes(); k++)
    {
        if (V.node_index[k] < 0)
            continue;
        point2 val = u(V.node_position[k]);
        U(V.dof(int(k), 0)) = val.x();
        U(V.dof(int(k), 1)) = val.y();
    }
    if (V.element == scalar_element::p1b)
    {
        for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
        {
            auto nodes = V.nodes(e);
            int b = nodes[3];
            if (V.node_index[b] < 0)
                continue;
            point2 lin = point2::Zero();
            for (int k = 0; k < 3; k++)
                lin += u(V.node_position[nodes[k]]) / 3.0;
            point2 val = u(V.node_position[b]) - lin;
            U(V.dof(b, 0)) = val.x();
            U(V.dof(b, 1)) = val.y();
        }
    }
    return U;
}

inline Eigen::VectorXd interpolate_pressure(const discretization& d, const scalar_field& p)
{
    const auto& Q = d.layout.pressure;
    Eigen::VectorXd P = Eigen::VectorXd::Zero(Q.num_dofs());
    for (std::size_t k = 0; k < Q.num_nodes(); k++)
        if (Q.node_index[k] >= 0)
            P(Q.dof(int(k), 0)) = p(Q.node_position[k]);
    return P;
}

/// Assembled symmetric saddle-point system on the unknowns
/// [free velocity | pressure | multiplier | mean-value multiplier].
/// Velocity dofs on the box boundary are eliminated with their prescribed values.
struct saddle_system
{
    sparse_matrix   uu, up, ul, pp, pl, ll; // full numbering
    Eigen::VectorXd F, G, mean;
    double          gamma = 0.0;
    double          nu = 1.0;

    std::vector<int> velocity_free;
    Eigen::VectorXd  boundary_velocity; // full velocity vector, nonzero on the box boundary only
    int              nu_free = 0, np = 0, nl = 0;

    sparse_matrix   matrix;
    Eigen::VectorXd rhs;

    int size() const { return nu_free + np + nl + 1; }
    int offset_pressure() const { return nu_free; }
    int offset_multiplier() const { return nu_free + np; }
    int offset_mean() const { return nu_free + np + nl; }

    struct fields
    {
        Eigen::VectorXd U, P, L;
        double          m = 0.0;
    };

    /// Full-numbering fields of a reduced vector. With `homogeneous` the
    /// boundary velocity is left at zero.
    fields expand(const Eigen::VectorXd& x, bool homogeneous = false) const
    {
        if (x.size() != size())
            throw std::invalid_argument("saddle_system::expand: dimension mismatch");
        fields f;
        f.U = homogeneous ? Eigen::VectorXd::Zero(boundary_velocity.size()) : boundary_velocity;
        for (std::size_t i = 0; i < velocity_free.size(); i++)
            if (velocity_free[i] >= 0)
                f.U(i) = x(velocity_free[i]);
        f.P = x.segment(offset_pressure(), np);
        f.L = x.segment(offset_multiplier(), nl);
        f.m = x(offset_mean());
        return f;
    }

    Eigen::VectorXd restrict_velocity(const Eigen::VectorXd& U) const
    {
        Eigen::VectorXd r(nu_free);
        for (std::size_t i = 0; i < velocity_free.size(); i++)
            if (velocity_free[i] >= 0)
                r(velocity_free[i]) = U(i);
        return r;
    }
};

namespace detail {

inline void build_reduced(saddle_system& s)
{
    const int nu = s.nu_free, np = s.np, nl = s.nl;
    const int op = nu, ol = nu + np, om = nu + np + nl;
    const auto& fr = s.velocity_free;
    const auto& uB = s.boundary_velocity;

    triplet_list t;
    t.reserve(s.uu.nonZeros() + 2 * (s.up.nonZeros() + s.ul.nonZeros() + s.pl.nonZeros()) + s.pp.nonZeros() +
              s.ll.nonZeros() + 2 * np);
    s.rhs = Eigen::VectorXd::Zero(s.size());

    for (int k = 0; k < s.uu.outerSize(); k++)
        for (sparse_matrix::InnerIterator it(s.uu, k); it; ++it)
        {
            int i = fr[it.row()], j = fr[it.col()];
            if (i >= 0 && j >= 0)
                t.emplace_back(i, j, it.value());
            else if (i >= 0)
                s.rhs(i) -= it.value() * uB(it.col());
        }
    auto coupling = [&](const sparse_matrix& m, int off) {
        for (int k = 0; k < m.outerSize(); k++)
            for (sparse_matrix::InnerIterator it(m, k); it; ++it)
            {
                int i = fr[it.row()], j = off + int(it.col());
                if (i >= 0)
                {
                    t.emplace_back(i, j, it.value());
                    t.emplace_back(j, i, it.value());
                }
                else
                    s.rhs(j) -= it.value() * uB(it.row());
            }
    };
    coupling(s.up, op);
    coupling(s.ul, ol);

    auto block = [&](const sparse_matrix& m, int roff, int coff, bool mirror) {
        for (int k = 0; k < m.outerSize(); k++)
            for (sparse_matrix::InnerIterator it(m, k); it; ++it)
            {
                t.emplace_back(roff + int(it.row()), coff + int(it.col()), it.value());
                if (mirror)
                    t.emplace_back(coff + int(it.col()), roff + int(it.row()), it.value());
            }
    };
    block(s.pp, op, op, false);
    block(s.pl, op, ol, true);
    block(s.ll, ol, ol, false);
    for (int j = 0; j < np; j++)
    {
        t.emplace_back(op + j, om, s.mean(j));
        t.emplace_back(om, op + j, s.mean(j));
    }

    for (std::size_t i = 0; i < fr.size(); i++)
        if (fr[i] >= 0)
            s.rhs(fr[i]) += s.F(i);
    s.rhs.segment(ol, nl) += s.G;

    s.matrix = from_triplets(s.size(), s.size(), t);
}

} // namespace detail

/// Combines the forms with the stabilization weight gamma and reduces to
/// the free unknowns. gamma == 0 yields the unstabilized system exactly.
inline saddle_system make_system(const discretization& d, const stokes_forms& f, double nu, double gamma,
                                 const vector_field& boundary)
{
    if (gamma != 0.0 && !f.has_stabilization)
        throw std::invalid_argument("make_system: forms were assembled without stabilization terms");

    saddle_system s;
    s.gamma = gamma;
    s.nu = nu;
    s.F = f.F;
    s.G = f.G;
    s.mean = f.mean;
    s.uu = f.uu;
    s.up = f.up;
    s.ul = f.ul;
    s.pp = sparse_matrix(f.n_pressure, f.n_pressure);
    s.pl = sparse_matrix(f.n_pressure, f.n_multiplier);
    s.ll = sparse_matrix(f.n_multiplier, f.n_multiplier);
    if (gamma != 0.0)
    {
        s.uu += gamma * f.suu;
        s.up += gamma * f.sup;
        s.ul += gamma * f.sul;
        s.pp = gamma * f.spp;
        s.pl = gamma * f.spl;
        s.ll = gamma * f.sll;
    }

    s.velocity_free = d.layout.velocity_free;
    s.nu_free = d.layout.num_free_velocity;
    s.np = f.n_pressure;
    s.nl = f.n_multiplier;

    s.boundary_velocity = Eigen::VectorXd::Zero(f.n_velocity);
    if (boundary)
    {
        Eigen::VectorXd B = interpolate_velocity(d, boundary);
        for (int i = 0; i < f.n_velocity; i++)
            if (s.velocity_free[i] < 0)
                s.boundary_velocity(i) = B(i);
    }

    detail::build_reduced(s);
    return s;
}

struct singular_layout_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline void check_multiplier_rows(const saddle_system& s)
{
    Eigen::VectorXd colnorm = Eigen::VectorXd::Zero(s.nl);
    for (int k = 0; k < s.ul.outerSize(); k++)
        for (sparse_matrix::InnerIterator it(s.ul, k); it; ++it)
            colnorm(it.col()) += std::abs(it.value());
    for (int j = 0; j < s.nl; j++)
        if (colnorm(j) == 0.0)
            throw singular_layout_error("multiplier dof " + std::to_string(j) + " couples to no velocity dof");
}

/// Stabilized (gamma0 > 0) or plain (gamma0 == 0) system.
inline saddle_system assemble(const discretization& d, const stokes_coefficients& c, const stokes_data& data)
{
    c.validate();
    auto forms = assemble_forms(d, c.nu, data, c.gamma0 != 0.0);
    auto s = make_system(d, forms, c.nu, c.gamma(), data.boundary);
    check_multiplier_rows(s);
    return s;
}

/// The system without stabilization, assembled without evaluating any of the
/// stabilization integrals.
inline saddle_system assemble_unstabilized(const discretization& d, double nu, const stokes_data& data)
{
    auto forms = assemble_forms(d, nu, data, false);
    auto s = make_system(d, forms, nu, 0.0, data.boundary);
    check_multiplier_rows(s);
    return s;
}

/// Discrete fields of one element evaluated at a physical point.
struct local_fields
{
    point2          u;
    Eigen::Matrix2d grad_u; // grad_u(i,j) = d u_i / d x_j
    double          p;
};

inline local_fields eval_fields(const discretization& d, const element_basis& eb, std::size_t e,
                                const Eigen::VectorXd& U, const Eigen::VectorXd& P, const point2& x)
{
    const auto& L = d.layout;
    auto [vb, pb] = eb.at(x);
    local_fields r{ point2::Zero(), Eigen::Matrix2d::Zero(), 0.0 };
    auto vn = L.velocity.nodes(e);
    for (std::size_t a = 0; a < vn.size(); a++)
    {
        if (L.velocity.node_index[vn[a]] < 0)
            continue;
        for (int c = 0; c < 2; c++)
        {
            double coef = U(L.velocity.dof(vn[a], c));
            r.u(c) += coef * vb.values(a);
            r.grad_u.row(c) += coef * vb.grads.row(a);
        }
    }
    auto pn = L.pressure.nodes(e);
    for (std::size_t j = 0; j < pn.size(); j++)
        if (L.pressure.node_index[pn[j]] >= 0)
            r.p += P(L.pressure.dof(pn[j], 0)) * pb.values(j);
    return r;
}

/// Compact bilinear form of the stabilized method plus the mean-value
/// coupling, evaluated by re-integrating the fields of two reduced vectors.
/// Agrees with x^T K y for the assembled matrix K.
inline double apply_compact_form(const discretization& d, const saddle_system& s, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& y)
{
    if (x.size() != s.size() || y.size() != s.size())
        throw std::invalid_argument("apply_compact_form: dimension mismatch");

    auto fx = s.expand(x, true), fy = s.expand(y, true);
    const double nu = s.nu, gamma = s.gamma;
    const auto& L = d.layout;
    double val = 0.0;

    auto sym = [](const Eigen::Matrix2d& g) -> Eigen::Matrix2d { return 0.5 * (g + g.transpose()); };

    for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
    {
        if (d.rules.effective.tags[e] == element_tag::solid)
            continue;
        element_basis eb(d, e);
        const auto& rule = d.rules.rules[e];

        for (const auto& qp : rule.volume)
        {
            auto a = eval_fields(d, eb, e, fx.U, fx.P, qp.x);
            auto b = eval_fields(d, eb, e, fy.U, fy.P, qp.x);
            double dd = (sym(a.grad_u).array() * sym(b.grad_u).array()).sum();
            val += qp.w * (2.0 * nu * dd - a.p * b.grad_u.trace() - b.p * a.grad_u.trace());
        }

        if (L.multiplier_index[e] < 0)
            continue;
        point2 lx(fx.L(L.multiplier_dof(e, 0)), fx.L(L.multiplier_dof(e, 1)));
        point2 ly(fy.L(L.multiplier_dof(e, 0)), fy.L(L.multiplier_dof(e, 1)));
        for (const auto& sp : rule.surface)
        {
            auto a = eval_fields(d, eb, e, fx.U, fx.P, sp.x);
            auto b = eval_fields(d, eb, e, fy.U, fy.P, sp.x);
            const point2& n = sp.normal;
            point2 ra = 2.0 * nu * sym(a.grad_u) * n - a.p * n - lx;
            point2 rb = 2.0 * nu * sym(b.grad_u) * n - b.p * n - ly;
            val += sp.w * (-(lx.dot(b.u) + ly.dot(a.u)) - gamma * ra.dot(rb));
        }
    }

    val += fx.m * s.mean.dot(fy.P) + fy.m * s.mean.dot(fx.P);
    return val;
}

/// Matrices behind the assumption constants: H1(F) and L2(Gamma) (symmetric
/// gradients) for the velocity, L2(F) and L2(Gamma) for the pressure.
struct aux_matrices
{
    sparse_matrix h1_fluid, l2_interface_velocity, l2_fluid_pressure, l2_interface_pressure;
};

inline aux_matrices assemble_aux_matrices(const discretization& d)
{
    const auto& L = d.layout;
    const int nvd = L.velocity.num_dofs(), npd = L.pressure.num_dofs();
    triplet_list th, tgv, tfp, tgp;

    for (std::size_t e = 0; e < d.mesh.num_elements(); e++)
    {
        if (d.rules.effective.tags[e] == element_tag::solid)
            continue;
        const auto& rule = d.rules.rules[e];
        element_basis eb(d, e);
        auto vd = detail::velocity_dofs(L, e);
        auto pd = detail::pressure_dofs(L, e);
        const int nv = int(vd.size()), np = int(pd.size());

        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(nv, nv), Gv = Eigen::MatrixXd::Zero(nv, nv);
        Eigen::MatrixXd Mf = Eigen::MatrixXd::Zero(np, np), Mg = Eigen::MatrixXd::Zero(np, np);

        for (const auto& qp : rule.volume)
        {
            auto [vb, pb] = eb.at(qp.x);
            for (int k = 0; k < nv; k++)
                for (int l = 0; l < nv; l++)
                    if (k % 2 == l % 2)
                        H(k, l) += qp.w * (vb.grads.row(k / 2).dot(vb.grads.row(l / 2)) +
                                           vb.values(k / 2) * vb.values(l / 2));
            Mf += qp.w * pb.values * pb.values.transpose();
        }
        for (const auto& sp : rule.surface)
        {
            auto [vb, pb] = eb.at(sp.x);
            for (int k = 0; k < nv; k++)
            {
                auto Dk = detail::shape_sym_grad(vb.grads, k / 2, k % 2);
                for (int l = 0; l < nv; l++)
                    Gv(k, l) += sp.w * Dk.ddot(detail::shape_sym_grad(vb.grads, l / 2, l % 2));
            }
            Mg += sp.w * pb.values * pb.values.transpose();
        }
        detail::scatter(th, vd, vd, H);
        detail::scatter(tgv, vd, vd, Gv);
        detail::scatter(tfp, pd, pd, Mf);
        detail::scatter(tgp, pd, pd, Mg);
    }

    aux_matrices a;
    a.h1_fluid = detail::from_triplets(nvd, nvd, th);
    a.l2_interface_velocity = detail::from_triplets(nvd, nvd, tgv);
    a.l2_fluid_pressure = detail::from_triplets(npd, npd, tfp);
    a.l2_interface_pressure = detail::from_triplets(npd, npd, tgp);
    return a;
}

/// MatrixMarket coordinate format, general real.
inline void write_matrix_market(const std::string& path, const sparse_matrix& m)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os << "%%MatrixMarket matrix coordinate real general\n";
    os << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
    os << std::setprecision(17);
    for (int k = 0; k < m.outerSize(); k++)
        for (sparse_matrix::InnerIterator it(m, k); it; ++it)
            os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

inline void write_vector(const std::string& path, const Eigen::VectorXd& v)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("cannot write " + path);
    os << std::setprecision(17);
    for (int i = 0; i < v.size(); i++)
        os << v(i) << "\n";
}

} // namespace cutstokes
