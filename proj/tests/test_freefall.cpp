#include <gtest/gtest.h>

#include "cutstokes/freefall.hpp"

using namespace cutstokes;

TEST(FallStep, Examples)
{
    EXPECT_NEAR(fall_velocity_update(0.0, 1e-4, 1.0, 0.02), -9.81e-4 / 1.005, 1e-18);
    EXPECT_NEAR(fall_velocity_update(0.0, 1e-4, 1.0, 0.02), -9.7612e-4, 1e-8);
}

TEST(FallStep, Reductions)
{
    for (double v : { 0.0, -0.3, 1.7 })
        EXPECT_NEAR(fall_velocity_update(v, 1e-3, 0.0, 0.02), v - 9.81e-3, 1e-12);
    for (double alpha : { 0.5, 62.0, 3000.0 })
    {
        const double vt = -9.81 * 0.02 / alpha;
        EXPECT_NEAR(fall_velocity_update(vt, 1e-3, alpha, 0.02), vt, 1e-12);
    }
}

TEST(FallStep, ContractsTowardTerminalVelocity)
{
    for (double alpha : { 0.1, 10.0, 1e4 })
        for (double dt : { 1e-5, 1e-2, 10.0 })
            for (double v : { -5.0, 0.0, 3.0 })
            {
                const double vt = -9.81 * 0.02 / alpha;
                EXPECT_LE(std::abs(fall_velocity_update(v, dt, alpha, 0.02) - vt), std::abs(v - vt) + 1e-15);
            }
}

TEST(FallStep, RejectsInvalidInput)
{
    EXPECT_THROW(fall_velocity_update(0, 0.0, 1, 1), std::invalid_argument);
    EXPECT_THROW(fall_velocity_update(0, 1e-3, 1, 0), std::invalid_argument);
    EXPECT_THROW(fall_velocity_update(0, 1e-3, -1, 1), std::invalid_argument);
}

TEST(Drag, PositiveAndDeterministic)
{
    drag_config c;
    c.n = 20;
    double a = drag_alpha(c, { 0.5, 0.5 });
    EXPECT_GT(a, 0.0);
    EXPECT_EQ(a, drag_alpha(c, { 0.5, 0.5 }));
}

TEST(Drag, LinearInBallVelocity)
{
    drag_config c;
    c.n = 20;
    auto unit = drag_problem(c, { 0.5, 0.6 });
    auto fast = drag_problem(c, { 0.5, 0.6 }, -0.37);
    EXPECT_NEAR(fast.alpha / unit.alpha, 1.0, 1e-8);
}

TEST(Drag, ViscosityScaling)
{
    // gamma = gamma0 h carries units of length, so doubling nu needs gamma0 halved
    drag_config c;
    c.n = 20;
    double a1 = drag_alpha(c, { 0.5, 0.55 });
    c.nu = 2.0;
    c.gamma0 /= 2.0;
    double a2 = drag_alpha(c, { 0.5, 0.55 });
    EXPECT_NEAR(a2 / (2 * a1), 1.0, 1e-8);
    c.gamma0 = 0.0;
    double b2 = drag_alpha(c, { 0.5, 0.55 });
    c.nu = 1.0;
    EXPECT_NEAR(b2 / (2 * drag_alpha(c, { 0.5, 0.55 })), 1.0, 1e-8);
}

TEST(Drag, GrowsNearTheFloor)
{
    drag_config c;
    c.n = 20;
    double mid = drag_alpha(c, { 0.5, 0.5 }), low = drag_alpha(c, { 0.5, 0.4 }), lower = drag_alpha(c, { 0.5, 0.3 });
    EXPECT_LT(mid, low);
    EXPECT_LT(low, lower);
}

TEST(Drag, VolumeForceOracle)
{
    drag_config c;
    c.n = 80;
    auto r = drag_problem(c, { 0.5, 0.5 }, 1.0, true);
    EXPECT_NEAR(r.alpha_volume / r.alpha, 1.0, 0.05);
}

TEST(Drag, RejectsBallOutsideBox)
{
    drag_config c;
    c.n = 10;
    EXPECT_THROW(drag_alpha(c, { 0.5, 0.1 }), std::invalid_argument);
}

TEST(Freefall, ZeroGravityStaysAtRest)
{
    freefall_config f;
    f.drag.n = 12;
    f.gravity = 0.0;
    f.dt = 1e-3;
    f.t_end = 5e-3;
    auto r = simulate_freefall(f);
    for (const auto& row : r.rows)
    {
        EXPECT_EQ(row.v, 0.0);
        EXPECT_EQ(row.h2, 0.75);
    }
}

TEST(Freefall, DeskScaleTrajectory)
{
    freefall_config f;
    f.drag.n = 20;
    f.dt = 1e-3;
    f.t_end = 0.02;
    auto r = simulate_freefall(f);
    ASSERT_EQ(r.status, "END");
    ASSERT_EQ(r.rows.size(), 21u);
    for (std::size_t k = 1; k < r.rows.size(); k++)
    {
        EXPECT_LT(r.rows[k].h2, r.rows[k - 1].h2);
        EXPECT_GT(r.rows[k - 1].alpha, 0.0);
        const double vt = -f.gravity * f.mass / r.rows[k - 1].alpha;
        EXPECT_LE(std::abs(r.rows[k].v - vt), std::abs(r.rows[k - 1].v - vt) + 1e-15);
    }
    // after many relaxation times the velocity sits on the terminal value
    const auto& last = r.rows.back();
    EXPECT_NEAR(last.v / (-f.gravity * f.mass / last.alpha), 1.0, 0.01);
}

TEST(Freefall, CadenceAndContact)
{
    freefall_config f;
    f.drag.n = 10;
    f.h2_start = 0.21 + 0.16;
    f.v_start = -20.0;
    f.mass = 10.0;
    f.dt = 1e-3;
    f.t_end = 1.0;
    f.alpha_every = 3;
    auto r = simulate_freefall(f);
    EXPECT_EQ(r.status, "CONTACT");
    EXPECT_LT(floor_gap(r.rows.back().h2, 0.21), std::sqrt(2.0) / 10);
    EXPECT_LE(r.solves, int(r.rows.size() + 2) / 3 + 1);
}

TEST(Freefall, RejectsStartTooLow)
{
    freefall_config f;
    f.drag.n = 10;
    f.h2_start = 0.25;
    EXPECT_THROW(simulate_freefall(f), std::invalid_argument);
}
