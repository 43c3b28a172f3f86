#include <gtest/gtest.h>

#include <random>

#include "cutstokes/harness.hpp"

using namespace cutstokes;

namespace {

sparse_matrix_t dense_to_sparse(const Eigen::MatrixXd& m) { return m.sparseView(); }

} // namespace

TEST(Solver, Identity)
{
    sparse_matrix_t a = dense_to_sparse(Eigen::MatrixXd::Identity(4, 4));
    Eigen::VectorXd b = Eigen::VectorXd::Unit(4, 0);
    auto r = solve(a, b, true);
    EXPECT_LE((r.x - b).norm(), 1e-15);
    EXPECT_NEAR(r.cond1, 1.0, 1e-14);
}

TEST(Solver, TwoByTwoSaddle)
{
    Eigen::MatrixXd m(2, 2);
    m << 2, 1, 1, 0;
    auto r = solve(dense_to_sparse(m), Eigen::Vector2d(3, 1));
    EXPECT_NEAR(r.x(0), 1.0, 1e-14);
    EXPECT_NEAR(r.x(1), 1.0, 1e-14);
    EXPECT_LE(r.residual, 1e-15);
}

TEST(Solver, DiagonalCondition)
{
    Eigen::MatrixXd m = Eigen::Vector2d(1.0, 1e6).asDiagonal();
    auto r = solve(dense_to_sparse(m), Eigen::Vector2d(1, 1), true);
    EXPECT_NEAR(r.cond1 / 1e6, 1.0, 0.01);
}

TEST(Solver, ConditionOfRandomMatrixIsALowerBound)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd m(30, 30);
    for (int i = 0; i < 30; i++)
        for (int j = 0; j < 30; j++)
            m(i, j) = u(rng) + (i == j ? 3.0 : 0.0);
    double exact = m.cwiseAbs().colwise().sum().maxCoeff() * m.inverse().cwiseAbs().colwise().sum().maxCoeff();
    auto r = solve(dense_to_sparse(m), Eigen::VectorXd::Ones(30), true);
    EXPECT_LE(r.cond1, exact * (1 + 1e-12));
    EXPECT_GE(r.cond1, exact / 3);
}

TEST(Solver, SingularMatrixReportsColumn)
{
    Eigen::MatrixXd m(3, 3);
    m << 1, 0, 0, 0, 0, 0, 0, 0, 1;
    try
    {
        sparse_lu lu(dense_to_sparse(m));
        FAIL() << "singular matrix accepted";
    }
    catch (const singular_system_error& e)
    {
        EXPECT_EQ(e.pivot, 1);
    }
}

TEST(Solver, StabilizedSystemResidual)
{
    case_config c;
    c.n = 20;
    auto r = run_case_full(c);
    ASSERT_TRUE(r.report.ok()) << r.report.status;
    EXPECT_LE(r.solution.report.residual, 1e-9);
    EXPECT_TRUE(r.solution.report.pivots_healthy);
}

TEST(Eigmax, IdentityPencil)
{
    sparse_matrix_t b = dense_to_sparse(Eigen::Vector3d(1, 2, 3).asDiagonal());
    auto r = generalized_eigmax(b, b, 0.25);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 0.25, 1e-12);
}

TEST(Eigmax, Diagonal)
{
    sparse_matrix_t a = dense_to_sparse(Eigen::Vector2d(1, 2).asDiagonal());
    sparse_matrix_t b = dense_to_sparse(Eigen::MatrixXd::Identity(2, 2));
    auto r = generalized_eigmax(a, b, 1.0);
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 2.0, 1e-7);
}

TEST(Eigmax, RandomPencilMatchesDense)
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(-1, 1);
    Eigen::MatrixXd g(40, 40);
    for (int i = 0; i < 40; i++)
        for (int j = 0; j < 40; j++)
            g(i, j) = u(rng);
    Eigen::MatrixXd a = g * g.transpose();
    Eigen::MatrixXd b = Eigen::MatrixXd::Identity(40, 40) * 2.0 + Eigen::MatrixXd::Constant(40, 40, 0.01);
    auto r = generalized_eigmax(dense_to_sparse(a), dense_to_sparse(b), 0.5);
    ASSERT_TRUE(r.converged);
    double exact = Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(a, b).eigenvalues().maxCoeff() * 0.5;
    EXPECT_NEAR(r.value, exact, 1e-10 * exact);
}

TEST(Eigmax, NearlyDegenerateTopPair)
{
    // a top gap of 1e-5 stalls plain power iteration
    Eigen::VectorXd d = Eigen::VectorXd::LinSpaced(60, 0.0, 1.0);
    d(58) = 1.0 - 1e-5;
    sparse_matrix_t a = dense_to_sparse(d.asDiagonal());
    sparse_matrix_t b = dense_to_sparse(Eigen::MatrixXd::Identity(60, 60));
    auto r = generalized_eigmax(a, b, 1.0);
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Eigmax, PressurePencilMatchesDense)
{
    auto d = discretize(10, fe_triplet::p2_p1_p0, make_circle({ 0.5, 0.5 }, 0.21));
    auto a = assemble_aux_matrices(d);
    auto r = generalized_eigmax(a.l2_interface_pressure, a.l2_fluid_pressure, d.h());
    Eigen::MatrixXd A(a.l2_interface_pressure), B(a.l2_fluid_pressure);
    double exact = Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd>(A, B).eigenvalues().maxCoeff() * d.h();
    ASSERT_TRUE(r.converged);
    EXPECT_NEAR(r.value, exact, 1e-9 * exact);
}

TEST(Eigmax, ScalesWithH)
{
    auto d = discretize(20, fe_triplet::p2_p1_p0, make_circle({ 0.5, 0.5 }, 0.21));
    auto a = assemble_aux_matrices(d);
    auto r1 = generalized_eigmax(a.l2_interface_pressure, a.l2_fluid_pressure, d.h());
    auto r2 = generalized_eigmax(a.l2_interface_pressure, a.l2_fluid_pressure, 2 * d.h());
    EXPECT_NEAR(r2.value, 2 * r1.value, 1e-12 * r1.value);
    EXPECT_THROW(generalized_eigmax(a.l2_interface_pressure, a.h1_fluid, 1.0), std::invalid_argument);
}
