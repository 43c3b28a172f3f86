#pragma once

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <iostream> // ArpackSupport uses std::cout without including it
#include <unsupported/Eigen/ArpackSupport>

#include <umfpack.h>

namespace cutstokes {

using sparse_matrix_t = Eigen::SparseMatrix<double>;

struct singular_system_error : std::runtime_error
{
    int pivot; // offending column of the system matrix
    singular_system_error(const std::string& what, int pivot_) : std::runtime_error(what), pivot(pivot_) {}
};

struct solver_error : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

/// LU factorization of a square sparse matrix with UMFPACK. Keeps the
/// factors so that both A x = b and A^T x = b can be solved repeatedly.
class sparse_lu
{
    sparse_matrix_t m_a;
    void*           m_symbolic = nullptr;
    void*           m_numeric = nullptr;
    double          m_info[UMFPACK_INFO];
    double          m_control[UMFPACK_CONTROL];

    void release()
    {
        if (m_numeric)
            umfpack_di_free_numeric(&m_numeric);
        if (m_symbolic)
            umfpack_di_free_symbolic(&m_symbolic);
        m_numeric = m_symbolic = nullptr;
    }

    int singular_column() const
    {
        int lnz, unz, n_row, n_col, nz_udiag;
        umfpack_di_get_lunz(&lnz, &unz, &n_row, &n_col, &nz_udiag, m_numeric);
        std::vector<double> udiag(std::min(n_row, n_col));
        std::vector<int>    Q(n_col);
        int                 do_recip;
        umfpack_di_get_numeric(nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, nullptr, Q.data(), udiag.data(),
                               &do_recip, nullptr, m_numeric);
        for (std::size_t k = 0; k < udiag.size(); k++)
            if (udiag[k] == 0.0 || !std::isfinite(udiag[k]))
                return Q[k];
        return -1;
    }

public:
    explicit sparse_lu(const sparse_matrix_t& a) : m_a(a)
    {
        if (a.rows() != a.cols())
            throw std::invalid_argument("sparse_lu: matrix must be square");
        m_a.makeCompressed();
        umfpack_di_defaults(m_control);
        // saddle-point systems have a symmetric pattern; the default unsymmetric
        // ordering fills in an order of magnitude more
        m_control[UMFPACK_STRATEGY] = UMFPACK_STRATEGY_SYMMETRIC;

        const int n = int(m_a.rows());
        int st = umfpack_di_symbolic(n, n, m_a.outerIndexPtr(), m_a.innerIndexPtr(), m_a.valuePtr(), &m_symbolic,
                                     m_control, m_info);
        if (st != UMFPACK_OK)
        {
            release();
            throw solver_error("umfpack symbolic analysis failed (status " + std::to_string(st) + ")");
        }
        st = umfpack_di_numeric(m_a.outerIndexPtr(), m_a.innerIndexPtr(), m_a.valuePtr(), m_symbolic, &m_numeric,
                                m_control, m_info);
        if (st == UMFPACK_WARNING_singular_matrix)
        {
            int col = singular_column();
            release();
            throw singular_system_error("singular system: zero pivot at column " + std::to_string(col), col);
        }
        if (st != UMFPACK_OK)
        {
            release();
            throw solver_error("umfpack numeric factorization failed (status " + std::to_string(st) + ")");
        }
    }

    sparse_lu(const sparse_lu&) = delete;
    sparse_lu& operator=(const sparse_lu&) = delete;
    ~sparse_lu() { release(); }

    const sparse_matrix_t& matrix() const { return m_a; }

    /// Reciprocal pivot growth, min|U_ii| / max|U_ii|.
    double rcond() const { return m_info[UMFPACK_RCOND]; }

    Eigen::VectorXd solve(const Eigen::VectorXd& b, bool transpose = false) const
    {
        if (b.size() != m_a.rows())
            throw std::invalid_argument("sparse_lu::solve: dimension mismatch");
        Eigen::VectorXd x(b.size());
        double info[UMFPACK_INFO];
        int st = umfpack_di_solve(transpose ? UMFPACK_At : UMFPACK_A, m_a.outerIndexPtr(), m_a.innerIndexPtr(),
                                  m_a.valuePtr(), x.data(), b.data(), m_numeric, m_control, info);
        if (st != UMFPACK_OK)
            throw solver_error("umfpack solve failed (status " + std::to_string(st) + ")");
        return x;
    }
};

struct solve_report
{
    Eigen::VectorXd x;
    double          residual = 0.0;
    double          rcond = 0.0;
    bool            pivots_healthy = true;
    double          cond1 = std::numeric_limits<double>::quiet_NaN();
    int             refinements = 0;
    double          factor_seconds = 0.0, solve_seconds = 0.0;
    int             dofs = 0;
    int             nonzeros = 0;
};

inline double relative_residual(const sparse_matrix_t& a, const Eigen::VectorXd& x, const Eigen::VectorXd& b)
{
    double nb = b.norm();
    double nr = (a * x - b).norm();
    return nb > 0.0 ? nr / nb : nr;
}

inline double norm1(const sparse_matrix_t& a)
{
    double best = 0.0;
    for (int k = 0; k < a.outerSize(); k++)
    {
        double s = 0.0;
        for (sparse_matrix_t::InnerIterator it(a, k); it; ++it)
            s += std::abs(it.value());
        best = std::max(best, s);
    }
    return best;
}

/// Hager's 1-norm estimate of inv(A) with Higham's alternating-sign probe,
/// returned as an estimate of cond_1(A) = |A|_1 |inv(A)|_1 (a lower bound).
inline double condition_estimate(const sparse_lu& lu)
{
    const auto& a = lu.matrix();
    const int   n = int(a.rows());
    if (n == 0)
        return 0.0;

    Eigen::VectorXd x = Eigen::VectorXd::Constant(n, 1.0 / n);
    double est = 0.0;
    int last_j = -1;
    for (int it = 0; it < 5; it++)
    {
        Eigen::VectorXd y = lu.solve(x);
        est = std::max(est, y.lpNorm<1>());
        Eigen::VectorXd xi = y.unaryExpr([](double v) { return v >= 0.0 ? 1.0 : -1.0; });
        Eigen::VectorXd z = lu.solve(xi, true);
        int j;
        double zmax = z.cwiseAbs().maxCoeff(&j);
        if (zmax <= z.dot(x) || j == last_j)
            break;
        x.setZero();
        x(j) = 1.0;
        last_j = j;
    }

    Eigen::VectorXd b(n);
    for (int i = 0; i < n; i++)
        b(i) = (i % 2 ? -1.0 : 1.0) * (1.0 + (n > 1 ? double(i) / (n - 1) : 0.0));
    est = std::max(est, 2.0 * lu.solve(b).lpNorm<1>() / (3.0 * n));

    return norm1(a) * est;
}

/// Direct solve with up to three steps of iterative refinement.
inline solve_report solve(const sparse_matrix_t& a, const Eigen::VectorXd& b, bool estimate_condition = false,
                          double tolerance = 1e-9)
{
    using clock = std::chrono::steady_clock;
    solve_report r;
    r.dofs = int(a.rows());
    r.nonzeros = int(a.nonZeros());

    auto t0 = clock::now();
    sparse_lu lu(a);
    auto t1 = clock::now();

    r.x = lu.solve(b);
    r.residual = relative_residual(a, r.x, b);
    while (r.residual > 1e-12 && r.refinements < 3)
    {
        Eigen::VectorXd dx = lu.solve(b - a * r.x);
        Eigen::VectorXd x2 = r.x + dx;
        double res2 = relative_residual(a, x2, b);
        if (!(res2 < r.residual))
            break;
        r.x = x2;
        r.residual = res2;
        r.refinements++;
    }
    auto t2 = clock::now();

    r.rcond = lu.rcond();
    r.pivots_healthy = std::isfinite(r.rcond) && r.rcond > 1e-15;
    if (estimate_condition)
        r.cond1 = condition_estimate(lu);
    r.factor_seconds = std::chrono::duration<double>(t1 - t0).count();
    r.solve_seconds = std::chrono::duration<double>(t2 - t1).count();

    if (!std::isfinite(r.residual) || r.residual > tolerance)
        throw solver_error("solve: relative residual " + std::to_string(r.residual) + " exceeds tolerance");
    return r;
}

inline void print_csv_header(std::ostream& os)
{
    os << "dofs,nnz,residual,rcond,cond1,refinements,factor_s,solve_s\n";
}

inline void print_csv_row(std::ostream& os, const solve_report& r)
{
    os << r.dofs << "," << r.nonzeros << "," << r.residual << "," << r.rcond << "," << r.cond1 << ","
       << r.refinements << "," << r.factor_seconds << "," << r.solve_seconds << "\n";
}

struct eigmax_result
{
    double value = 0.0;
    int    iterations = 0; // implicit restarts used by ARPACK
    bool   converged = false;
};

/// Largest eigenvalue of h * inv(B) * A for symmetric positive semidefinite A
/// and positive definite B (implicitly restarted Lanczos, ARPACK).
inline eigmax_result generalized_eigmax(const sparse_matrix_t& A, const sparse_matrix_t& B, double h,
                                        double tolerance = 0.0)
{
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows())
        throw std::invalid_argument("generalized_eigmax: dimension mismatch");
    if (A.rows() < 2)
        throw std::invalid_argument("generalized_eigmax: pencil of dimension < 2");
    if (Eigen::SimplicialLLT<sparse_matrix_t>(B).info() != Eigen::Success)
        throw solver_error("generalized_eigmax: B is not positive definite");

    Eigen::ArpackGeneralizedSelfAdjointEigenSolver<sparse_matrix_t, Eigen::SimplicialLLT<sparse_matrix_t>> es(
        A, B, 1, "LA", Eigen::EigenvaluesOnly, tolerance);
    eigmax_result r;
    r.iterations = int(es.getNbrIterations());
    r.converged = es.info() == Eigen::Success && es.getNbrConvergedEigenValues() >= 1;
    r.value = r.converged ? h * es.eigenvalues()(0) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

} // namespace cutstokes
