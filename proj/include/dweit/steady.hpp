// First-order probe coherences of the double-well Λ system.
//
// In the dressed ground-state basis the probe response splits into two
// independent four-equation systems, one per dressed ground state B and B'.
// Each has the form dX/dt = −M X + A with X = (ρ_aX, ρ_CX, ρ_C'X, ρ_a'X).
// The closed forms below are the exact steady states of those systems and
// are the fast path for spectra; the explicit linear systems back the
// solver and the oracles.
#pragma once

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include "dressed.hpp"
#include "errors.hpp"
#include "model.hpp"

namespace dweit {

using cdouble = std::complex<double>;
using Matrix4cd = Eigen::Matrix4cd;
using Vector4cd = Eigen::Vector4cd;

inline constexpr cdouble kI{0.0, 1.0};

enum class Branch { B, Bprime };

struct LinearSystem {
    Matrix4cd m;
    Vector4cd a;
    Branch branch = Branch::B;
};

/// Zeroth-order dressed populations (ρ_BB, ρ_B'B') set by the preparation
/// angle: cos²(θ_b − φ) and sin²(θ_b − φ).
inline std::pair<double, double> dressed_populations(const Mixing& b, double phi_prep)
{
    const double c = b.cos_theta * std::cos(phi_prep) + b.sin_theta * std::sin(phi_prep);
    const double s = b.sin_theta * std::cos(phi_prep) - b.cos_theta * std::sin(phi_prep);
    return {c * c, s * s};
}

inline LinearSystem build_linear_system(const SystemParams& p, double delta_p, Branch branch)
{
    const DressedFrame frame = dressed_frame(p);
    const double dp = p.shifted_probe_detuning(delta_p);
    const double dmu = p.shifted_control_detuning();
    const double gamma = p.coherence_decay();
    const double sign = branch == Branch::B ? 1.0 : -1.0;  // B sits at −g_b^eff/2
    const double shift = dp + sign * frame.b.g_eff / 2.0;
    const double half_gc = frame.c.g_eff / 2.0;
    const cdouble control_down = p.omega_ac / 2.0 * std::polar(1.0, -p.phi_ac);
    const cdouble control_up = p.omega_ac / 2.0 * std::polar(1.0, p.phi_ac);

    // i dX/dt = H X + s
    Matrix4cd h = Matrix4cd::Zero();
    h(0, 0) = cdouble(shift, -gamma);
    h(0, 1) = -control_down * frame.c.cos_theta;
    h(0, 2) = control_down * frame.c.sin_theta;
    h(0, 3) = -p.g_a / 2.0;
    h(1, 0) = -control_up * frame.c.cos_theta;
    h(1, 1) = shift - dmu - half_gc;
    h(2, 0) = control_up * frame.c.sin_theta;
    h(2, 2) = shift - dmu + half_gc;
    h(3, 0) = -p.g_a / 2.0;
    h(3, 3) = cdouble(shift, -gamma);

    const auto [rho_bb, rho_bpbp] = dressed_populations(frame.b, p.phi_prep);
    const cdouble probe = p.omega_ab / 2.0 * std::polar(1.0, -p.phi_ab);
    const cdouble source = branch == Branch::B ? -probe * frame.b.cos_theta * rho_bb
                                               : probe * frame.b.sin_theta * rho_bpbp;

    LinearSystem sys;
    sys.branch = branch;
    sys.m = kI * h;
    sys.a = Vector4cd::Zero();
    sys.a[0] = -kI * source;
    return sys;
}

struct SteadySolve {
    Vector4cd x;
    double residual = 0.0;  ///< ‖M x − A‖ / ‖A‖
    double condition_estimate = 1.0;
    bool ill_conditioned = false;  ///< condition estimate above 1e12
};

inline double relative_residual(const LinearSystem& sys, const Vector4cd& x)
{
    const double norm_a = sys.a.norm();
    const double r = (sys.m * x - sys.a).norm();
    return norm_a > 0.0 ? r / norm_a : r;
}

/// Steady state M⁻¹ A by LU with partial pivoting.
inline SteadySolve solve_steady(const LinearSystem& sys)
{
    const Eigen::PartialPivLU<Matrix4cd> lu(sys.m);
    const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
    if (!(pivots.minCoeff() >= 1e-300))
        throw Error(ErrorCode::SingularSystem, "pivot magnitude below 1e-300");

    SteadySolve out;
    out.x = lu.solve(sys.a);
    out.residual = relative_residual(sys, out.x);
    const double rcond = lu.rcond();
    out.condition_estimate = rcond > 0.0 ? 1.0 / rcond : std::numeric_limits<double>::infinity();
    out.ill_conditioned = out.condition_estimate > 1e12;
    return out;
}

/// Contributions of each dressed branch to ρ_ab, including the Ω_ab e^{−iφ_ab}
/// prefactor. `b` = cos θ_b ρ_aB and `bprime` = −sin θ_b ρ_aB'.
struct BranchCoherence {
    cdouble b;
    cdouble bprime;

    cdouble total() const { return b + bprime; }
};

namespace detail {

/// One branch term w (Q² − g_c²) P / ζ with Q = 2Δ_μ − 2Δ_p − σ g_b^eff,
/// P = 2Δ_p + σ g_b^eff − 2iγ_ab (σ = +1 for B, −1 for B').
inline cdouble branch_term(const SystemParams& p, const DressedFrame& frame, double delta_p,
                           double sigma, double weight)
{
    if (weight == 0.0)
        return 0.0;
    const double dp = p.shifted_probe_detuning(delta_p);
    const double dmu = p.shifted_control_detuning();
    const double gbe = frame.b.g_eff;
    const double gce = frame.c.g_eff;
    const double q = 2.0 * dmu - 2.0 * dp - sigma * gbe;
    const cdouble pp(2.0 * dp + sigma * gbe, -2.0 * p.coherence_decay());
    // Q² − g_c² = (Q − g_c)(Q + g_c) and Q − g_c cos 2θ_c = (Q − g_c) cos²θ_c + (Q + g_c) sin²θ_c,
    // so a vanishing factor shared by numerator and ζ cancels.
    const double below = q - gce;
    const double above = q + gce;
    const double c2 = frame.c.cos_theta * frame.c.cos_theta;
    const double s2 = frame.c.sin_theta * frame.c.sin_theta;
    const double w2 = p.omega_ac * p.omega_ac;
    const cdouble pg = pp * pp - p.g_a * p.g_a;
    const cdouble zeta = below * above * pg + pp * w2 * (below * c2 + above * s2);
    if (std::abs(zeta) > std::numeric_limits<double>::min())
        return weight * below * above * pp / zeta;
    cdouble reduced;
    if (below == 0.0 && above == 0.0)
        reduced = w2 > 0.0 ? cdouble(0.0) : pp / pg;  // Q² cancels in full
    else if (below == 0.0 && s2 == 0.0)
        reduced = above * pp / (above * pg + pp * w2 * c2);
    else if (above == 0.0 && c2 == 0.0)
        reduced = below * pp / (below * pg + pp * w2 * s2);
    else
        throw Error(ErrorCode::PoleEncountered, "zeta vanishes at this detuning");
    if (!std::isfinite(reduced.real()) || !std::isfinite(reduced.imag()))
        throw Error(ErrorCode::PoleEncountered, "zeta vanishes at this detuning");
    return weight * reduced;
}

}  // namespace detail

/// ρ_ab split by dressed branch, from the closed-form steady state.
inline BranchCoherence closed_form_branches(const SystemParams& p, double delta_p)
{
    const DressedFrame frame = dressed_frame(p);
    const auto [rho_bb, rho_bpbp] = dressed_populations(frame.b, p.phi_prep);
    const double cb = frame.b.cos_theta;
    const double sb = frame.b.sin_theta;
    const cdouble probe = p.omega_ab * std::polar(1.0, -p.phi_ab);
    return {probe * detail::branch_term(p, frame, delta_p, 1.0, rho_bb * cb * cb),
            probe * detail::branch_term(p, frame, delta_p, -1.0, rho_bpbp * sb * sb)};
}

inline cdouble closed_form_coherence(const SystemParams& p, double delta_p)
{
    return closed_form_branches(p, delta_p).total();
}

/// Symmetric-well form (θ_b = θ_c = π/4): ρ_ab = (Ω_ab e^{−iφ_ab}/2)(Z₊ + Z₋)/2.
/// Requires δ_bb' = δ_cc' = 0 and g_b > 0, otherwise NotDegenerate.
inline cdouble degenerate_coherence(const SystemParams& p, double delta_p)
{
    if (p.delta_bb != 0.0 || p.delta_cc != 0.0)
        throw Error(ErrorCode::NotDegenerate, "well asymmetries must vanish");
    if (p.g_b == 0.0)
        throw Error(ErrorCode::NotDegenerate, "g_b = 0 leaves the b doublet in the bare basis");
    const double dp = p.shifted_probe_detuning(delta_p);
    const double dmu = p.shifted_control_detuning();
    const double gamma = p.coherence_decay();
    const double sin2phi = std::sin(2.0 * p.phi_prep);

    auto z = [&](double pm) {
        const double q = 2.0 * dmu - 2.0 * dp + pm * p.g_b;
        const double qq = q * q - p.g_c * p.g_c;
        const cdouble pp(2.0 * dp - pm * p.g_b, -2.0 * gamma);
        const cdouble denom = qq * (pp * pp - p.g_a * p.g_a) + q * pp * (p.omega_ac * p.omega_ac);
        if (qq == 0.0 && p.g_c == 0.0)  // q² cancels in full
            return p.omega_ac > 0.0 ? cdouble(0.0) : pp * (1.0 - pm * sin2phi) / (pp * pp - p.g_a * p.g_a);
        if (!(std::abs(denom) > std::numeric_limits<double>::min()))
            throw Error(ErrorCode::PoleEncountered, "Z denominator vanishes");
        return qq * pp * (1.0 - pm * sin2phi) / denom;
    };
    const cdouble probe = p.omega_ab * std::polar(1.0, -p.phi_ab);
    return probe / 2.0 * (z(1.0) + z(-1.0)) / 2.0;
}

/// Second-order excited population, 2 Ω_ab² Im S / γ_a where
/// ρ_ab = Ω_ab e^{−iφ_ab} S. Non-negative whenever the probe is absorbed.
inline double population_aa(const SystemParams& p, double delta_p)
{
    const cdouble s = closed_form_coherence(p, delta_p) * std::polar(1.0, p.phi_ab) / p.omega_ab;
    const cdouble bracket = kI * (std::conj(s) - s);
    return p.omega_ab * p.omega_ab * bracket.real() / p.gamma_a;
}

/// Single-well EIT coherence with the control on resonance.
inline cdouble standard_eit_coherence(double delta_p, double omega_ac, double gamma_ab,
                                      double omega_ab, double phi_ab)
{
    const cdouble denom =
        2.0 * (delta_p * cdouble(delta_p, -gamma_ab) - omega_ac * omega_ac / 4.0);
    return delta_p * omega_ab * std::polar(1.0, -phi_ab) / denom;
}

/// The eight first-order coherences from the linear solves, with the
/// assembled ρ_ab and the second-order ρ_aa.
struct SteadyCoherences {
    Vector4cd x_b;
    Vector4cd x_bp;
    cdouble rho_ab;
    double rho_aa = 0.0;
    double max_residual = 0.0;
};

inline SteadyCoherences solve_coherences(const SystemParams& p, double delta_p)
{
    const DressedFrame frame = dressed_frame(p);
    const SteadySolve b = solve_steady(build_linear_system(p, delta_p, Branch::B));
    const SteadySolve bp = solve_steady(build_linear_system(p, delta_p, Branch::Bprime));
    SteadyCoherences out;
    out.x_b = b.x;
    out.x_bp = bp.x;
    out.rho_ab = frame.b.cos_theta * b.x[0] - frame.b.sin_theta * bp.x[0];
    const double im_s = (out.rho_ab * std::polar(1.0, p.phi_ab)).imag() / p.omega_ab;
    out.rho_aa = 2.0 * p.omega_ab * p.omega_ab * im_s / p.gamma_a;
    out.max_residual = std::max(b.residual, bp.residual);
    return out;
}

}  // namespace dweit
