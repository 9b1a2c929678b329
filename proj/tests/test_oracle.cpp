#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dweit/optics.hpp"
#include "dweit/oracle.hpp"
#include "support.hpp"

namespace dweit {
namespace {

using testing::random_draw;
using testing::relative_error;

double stable_step(const LinearSystem& sys) { return 0.1 / spectral_radius_bound(sys); }

TEST(IntegrateToSteady, ScalarExponentialApproach)
{
    LinearSystem sys;
    sys.m = Matrix4cd::Identity();
    sys.a = Vector4cd(1.0, 0.0, 0.0, 0.0);
    const IntegrationReport r = integrate_to_steady(sys, 0.01, 40.0, 0.0);
    EXPECT_LE((r.final_state - sys.a).norm(), 1e-12);
    EXPECT_FALSE(r.converged);  // zero tolerance is never met exactly
    EXPECT_EQ(r.steps, 4000u);
    EXPECT_NEAR(r.elapsed_model_time, 40.0, 1e-9);
}

TEST(IntegrateToSteady, FigureTwoScaleMatchesTheLinearSolve)
{
    const SystemParams p = figure_params(0.1, 0.1);
    for (Branch branch : {Branch::B, Branch::Bprime}) {
        const LinearSystem sys = build_linear_system(p, 0.3, branch);
        const IntegrationReport r = integrate_to_steady(sys, stable_step(sys), 1e4, 1e-12);
        EXPECT_TRUE(r.converged);
        EXPECT_LE(r.residual, 1e-12);
        const Vector4cd exact = solve_steady(sys).x;
        EXPECT_LE((r.final_state - exact).norm() / exact.norm(), 1e-8);
    }
}

TEST(IntegrateToSteady, FigureThreeResonanceDoesNotConverge)
{
    const SystemParams p = figure_params(2e-4, 2e-4);
    const LinearSystem sys = build_linear_system(p, -p.g_b / 2.0, Branch::B);
    const IntegrationReport r = integrate_to_steady(sys, stable_step(sys), 1e5, 1e-10);
    EXPECT_FALSE(r.converged);
    EXPECT_GT(r.residual, 1e-10);
    EXPECT_NEAR(r.elapsed_model_time, 1e5, 1.0);
}

TEST(IntegrateToSteady, ConvergedImpliesTolerance)
{
    std::mt19937_64 rng(41);
    for (int i = 0; i < 20; ++i) {
        auto d = random_draw(rng);
        d.params.g_b = d.params.g_c = 0.2;
        d.params = validate_params(d.params);
        const LinearSystem sys = build_linear_system(d.params, d.delta_p, Branch::B);
        const IntegrationReport r = integrate_to_steady(sys, stable_step(sys), 2e3, 1e-9);
        if (r.converged) {
            EXPECT_LE(r.residual, 1e-9);
        }
        EXPECT_LE(r.residual, 1.0);  // decaying system never diverges
    }
}

TEST(IntegrateToSteady, OversizedStepIsUnstable)
{
    const SystemParams p = figure_params(0.1, 0.1);
    const LinearSystem sys = build_linear_system(p, 0.3, Branch::B);
    try {
        integrate_to_steady(sys, 50.0 / spectral_radius_bound(sys), 1e4, 1e-12);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::StepUnstable);
    }
    EXPECT_THROW(integrate_to_steady(sys, 0.0, 1.0, 1e-9), Error);
}

TEST(IntegrateToSteady, FourthOrderInTheStep)
{
    LinearSystem sys = build_linear_system(figure_params(0.3, 0.3), 0.4, Branch::B);
    // Whole number of steps so every run ends at exactly t = 4.
    const double dt = 4.0 / std::ceil(4.0 * spectral_radius_bound(sys) / 0.5);
    auto at = [&](double step) { return integrate_to_steady(sys, step, 4.0, 0.0).final_state; };
    const Vector4cd coarse = at(dt);
    const Vector4cd fine = at(dt / 2.0);
    const Vector4cd finest = at(dt / 4.0);
    const double e1 = (coarse - fine).norm();
    const double e2 = (fine - finest).norm();
    // Successive differences shrink by 2⁴ for a fourth-order method.
    EXPECT_NEAR(e1 / e2, 16.0, 1.0);
}

TEST(Residual, ExactSolveZeroAndClosedForm)
{
    const SystemParams p = figure_params(0.1, 0.1);
    for (Branch branch : {Branch::B, Branch::Bprime}) {
        const LinearSystem sys = build_linear_system(p, 0.3, branch);
        EXPECT_LE(residual(sys, solve_steady(sys).x), 1e-12);
        EXPECT_EQ(residual(sys, Vector4cd::Zero()), 1.0);
        EXPECT_LE(residual(sys, closed_form_state(p, 0.3, branch)), 1e-9);
    }
}

TEST(Residual, ClosedFormStateOnRandomDraws)
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_draw(rng);
        for (Branch branch : {Branch::B, Branch::Bprime}) {
            const LinearSystem sys = build_linear_system(d.params, d.delta_p, branch);
            EXPECT_LE(residual(sys, closed_form_state(d.params, d.delta_p, branch)), 1e-9) << i;
        }
    }
}

TEST(Residual, ClosedFormStateAtTheFactoredZero)
{
    // At Δ_p = 0 with g_b = g_c one C-coherence diagonal vanishes.
    const SystemParams p = figure_params(0.1, 0.1);
    for (Branch branch : {Branch::B, Branch::Bprime}) {
        const LinearSystem sys = build_linear_system(p, 0.0, branch);
        EXPECT_LE(residual(sys, closed_form_state(p, 0.0, branch)), 1e-12);
    }
}

TEST(BareBasis, HamiltonianIsHermitian)
{
    std::mt19937_64 rng(43);
    const auto d = random_draw(rng);
    const auto h = bare_hamiltonian(d.params, d.delta_p);
    EXPECT_LE((h - h.adjoint()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BareBasis, AgreesWithTheDressedSystems)
{
    std::mt19937_64 rng(44);
    for (int i = 0; i < 200; ++i) {
        const auto d = random_draw(rng);
        const BareCoherences bare = bare_basis_coherences(d.params, d.delta_p);
        const SteadyCoherences s = solve_coherences(d.params, d.delta_p);
        EXPECT_LE(relative_error(bare.rho_ab(), s.rho_ab), 1e-9) << i;
        EXPECT_LE((dressed_vector(bare, Branch::B) - s.x_b).norm(), 1e-9 * s.x_b.norm() + 1e-300);
        EXPECT_LE((dressed_vector(bare, Branch::Bprime) - s.x_bp).norm(), 1e-9 * s.x_bp.norm() + 1e-300);
    }
}

TEST(BareBasis, AgreesWithTheClosedFormAtFigureScales)
{
    for (const SystemParams& p : {figure_params(0.1, 0.1), figure_params(2e-4, 2e-4, 0.3)}) {
        for (double x : {-1.0, -p.g_b / 2.0, p.g_b / 2.0 + p.g_c / 8.0, 0.3, 1.0})
            EXPECT_LE(relative_error(bare_basis_coherences(p, x).rho_ab(), closed_form_coherence(p, x)), 1e-9);
    }
}

}  // namespace
}  // namespace dweit
