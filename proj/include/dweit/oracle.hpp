// Independent checks of the steady-state coherences.
//
// Three routes that share nothing with the closed form except the physical
// parameters: fixed-step time integration of dX/dt = −M X + A, the algebraic
// residual, and a first-order solve posed directly in the bare
// (undressed) six-level basis.
#pragma once

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "dressed.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "steady.hpp"

namespace dweit {

struct IntegrationReport {
    Vector4cd final_state;
    std::size_t steps = 0;
    double elapsed_model_time = 0.0;
    bool converged = false;
    double residual = 1.0;  ///< ‖M X − A‖ / ‖A‖ at the final state
};

/// ‖M x − A‖₂ / ‖A‖₂.
inline double residual(const LinearSystem& sys, const Vector4cd& x)
{
    return relative_residual(sys, x);
}

/// Maximum absolute row sum of M, an upper bound on its spectral radius.
inline double spectral_radius_bound(const LinearSystem& sys)
{
    return sys.m.cwiseAbs().rowwise().sum().maxCoeff();
}

/// Classic RK4 from X(0) = 0 until the relative residual drops to `tol` or
/// `t_max` is reached. Stable stepping needs dt ≤ 0.1 / spectral_radius_bound.
/// Throws StepUnstable when the residual grows for 10 consecutive steps past
/// ten times its starting value.
inline IntegrationReport integrate_to_steady(const LinearSystem& sys, double dt, double t_max,
                                             double tol)
{
    if (!(dt > 0.0) || !(t_max >= 0.0))
        throw Error(ErrorCode::InvalidArgument, "need dt > 0 and t_max >= 0");
    const double norm_a = sys.a.norm();
    const double scale = norm_a > 0.0 ? norm_a : 1.0;
    const auto max_steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));

    auto rhs = [&](const Vector4cd& x) -> Vector4cd { return sys.a - sys.m * x; };

    IntegrationReport report;
    Vector4cd x = Vector4cd::Zero();
    Vector4cd k1 = rhs(x);
    double res = k1.norm() / scale;
    int growth_run = 0;
    while (res > tol && report.steps < max_steps) {
        const Vector4cd k2 = rhs(x + (dt / 2.0) * k1);
        const Vector4cd k3 = rhs(x + (dt / 2.0) * k2);
        const Vector4cd k4 = rhs(x + dt * k3);
        x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        ++report.steps;

        k1 = rhs(x);
        const double next = k1.norm() / scale;
        if (!std::isfinite(next))
            throw Error(ErrorCode::StepUnstable, "state became non-finite");
        growth_run = next > res ? growth_run + 1 : 0;
        res = next;
        if (growth_run >= 10 && res > 10.0)
            throw Error(ErrorCode::StepUnstable, "residual grew for 10 consecutive steps");
    }
    report.final_state = x;
    report.elapsed_model_time = dt * static_cast<double>(report.steps);
    report.residual = res;
    report.converged = res <= tol;
    return report;
}

/// Rotating-frame one-body Hamiltonian in the bare basis (a, b, c, a', b', c'),
/// energies relative to the mean of the b doublet and mean-field shifts
/// folded into the detunings.
inline Eigen::Matrix<cdouble, 6, 6> bare_hamiltonian(const SystemParams& p, double delta_p)
{
    const double dp = p.shifted_probe_detuning(delta_p);
    const double dmu = p.shifted_control_detuning();
    Eigen::Matrix<cdouble, 6, 6> h = Eigen::Matrix<cdouble, 6, 6>::Zero();
    h(0, 0) = dp;
    h(3, 3) = dp;
    h(1, 1) = p.delta_bb / 2.0;
    h(4, 4) = -p.delta_bb / 2.0;
    h(2, 2) = dp - dmu + p.delta_cc / 2.0;
    h(5, 5) = dp - dmu - p.delta_cc / 2.0;
    h(0, 1) = -p.omega_ab / 2.0 * std::polar(1.0, -p.phi_ab);
    h(0, 2) = -p.omega_ac / 2.0 * std::polar(1.0, -p.phi_ac);
    h(0, 3) = -p.g_a / 2.0;
    h(1, 4) = -p.g_b / 2.0;
    h(2, 5) = -p.g_c / 2.0;
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j)
            h(j, i) = std::conj(h(i, j));
    return h;
}

/// First-order coherences ρ_xy, x ∈ (a, a', c, c'), y ∈ (b, b'), solved in
/// the bare basis from the Hamiltonian above with the zeroth-order ground
/// density matrix ρ_BB |B⟩⟨B| + ρ_B'B' |B'⟩⟨B'|.
struct BareCoherences {
    Eigen::Matrix<cdouble, 4, 2> x;  ///< rows (a, a', c, c'), cols (b, b')
    Eigen::Matrix<cdouble, 4, 2> dressed;  ///< rows (a, a', C, C'), cols (B, B')

    cdouble rho_ab() const { return x(0, 0); }
};

inline BareCoherences bare_basis_coherences(const SystemParams& p, double delta_p)
{
    const Eigen::Matrix<cdouble, 6, 6> h = bare_hamiltonian(p, delta_p);
    const DressedFrame frame = dressed_frame(p);
    const Matrix6d d = rotation_matrix(frame);

    constexpr int upper[4] = {0, 3, 2, 5};  // a, a', c, c'
    constexpr int ground[2] = {1, 4};  // b, b'
    Eigen::Matrix4cd he;
    Eigen::Matrix<cdouble, 4, 2> coupling;
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j)
            he(i, j) = h(upper[i], upper[j]);
        for (int j = 0; j < 2; ++j)
            coupling(i, j) = h(upper[i], ground[j]);
    }
    Eigen::Matrix2cd hg;
    Eigen::Matrix2d rotation;  // rows B, B' in (b, b') components
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            hg(i, j) = h(ground[i], ground[j]);
            rotation(i, j) = d(ground[i], ground[j]);
        }

    const auto [rho_bb, rho_bpbp] = dressed_populations(frame.b, p.phi_prep);
    const Eigen::Vector2d state_b = rotation.row(0).transpose();
    const Eigen::Vector2d state_bp = rotation.row(1).transpose();
    const Eigen::Matrix2d rho0 =
        rho_bb * state_b * state_b.transpose() + rho_bpbp * state_bp * state_bp.transpose();
    const Eigen::Matrix<cdouble, 4, 2> source = coupling * rho0.cast<cdouble>();
    const double gamma = p.coherence_decay();
    const Eigen::Vector4cd decay(gamma, gamma, 0.0, 0.0);

    // 0 = −i (H_e X − X H_g + S) − Γ X, vectorised column-major.
    Eigen::Matrix<cdouble, 8, 8> l = Eigen::Matrix<cdouble, 8, 8>::Zero();
    for (int k = 0; k < 8; ++k) {
        Eigen::Matrix<cdouble, 4, 2> e = Eigen::Matrix<cdouble, 4, 2>::Zero();
        e(k % 4, k / 4) = 1.0;
        const Eigen::Matrix<cdouble, 4, 2> col =
            -kI * (he * e - e * hg) - decay.asDiagonal() * e;
        l.col(k) = Eigen::Map<const Eigen::Matrix<cdouble, 8, 1>>(col.data());
    }
    const Eigen::Matrix<cdouble, 4, 2> rhs_m = kI * source;
    const Eigen::Matrix<cdouble, 8, 1> rhs = Eigen::Map<const Eigen::Matrix<cdouble, 8, 1>>(rhs_m.data());
    const Eigen::FullPivLU<Eigen::Matrix<cdouble, 8, 8>> lu(l);
    if (!lu.isInvertible())
        throw Error(ErrorCode::SingularSystem, "bare-basis system is singular");
    const Eigen::Matrix<cdouble, 8, 1> sol = lu.solve(rhs);

    BareCoherences out;
    out.x = Eigen::Map<const Eigen::Matrix<cdouble, 4, 2>>(sol.data());
    Eigen::Matrix4d de = Eigen::Matrix4d::Identity();
    de(2, 2) = frame.c.cos_theta;
    de(2, 3) = frame.c.sin_theta;
    de(3, 2) = -frame.c.sin_theta;
    de(3, 3) = frame.c.cos_theta;
    out.dressed = de.cast<cdouble>() * out.x * rotation.transpose().cast<cdouble>();
    return out;
}

/// Dressed-ordering view (ρ_aX, ρ_CX, ρ_C'X, ρ_a'X) of one column of
/// BareCoherences::dressed, comparable with build_linear_system's unknowns.
inline Vector4cd dressed_vector(const BareCoherences& bare, Branch branch)
{
    const int col = branch == Branch::B ? 0 : 1;
    return {bare.dressed(0, col), bare.dressed(2, col), bare.dressed(3, col), bare.dressed(1, col)};
}

/// Full four-component state of one branch built from the closed-form ρ_aX:
/// rows 2-4 of M X = A are solved for the remaining components given ρ_aX
/// (row 1 instead, for a component whose diagonal vanishes). The residual of
/// this state measures how well the closed form satisfies the system.
inline Vector4cd closed_form_state(const SystemParams& p, double delta_p, Branch branch)
{
    const LinearSystem sys = build_linear_system(p, delta_p, branch);
    const DressedFrame frame = dressed_frame(p);
    const auto [rho_bb, rho_bpbp] = dressed_populations(frame.b, p.phi_prep);
    const cdouble probe = p.omega_ab * std::polar(1.0, -p.phi_ab);
    const double weight = branch == Branch::B ? frame.b.cos_theta * rho_bb
                                              : -frame.b.sin_theta * rho_bpbp;
    const double sigma = branch == Branch::B ? 1.0 : -1.0;

    Vector4cd x = Vector4cd::Zero();
    x[0] = probe * detail::branch_term(p, frame, delta_p, sigma, weight);
    int free_index = -1;
    for (int k = 1; k < 4; ++k) {
        if (sys.m(k, k) != 0.0)
            x[k] = (sys.a[k] - sys.m(k, 0) * x[0]) / sys.m(k, k);
        else
            free_index = k;
    }
    if (free_index > 0 && sys.m(0, free_index) != 0.0) {
        cdouble rest = sys.a[0];
        for (int j = 0; j < 4; ++j)
            if (j != free_index)
                rest -= sys.m(0, j) * x[j];
        x[free_index] = rest / sys.m(0, free_index);
    }
    return x;
}

}  // namespace dweit
