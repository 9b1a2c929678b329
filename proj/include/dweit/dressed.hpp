// Dressed bases of the tunnel-coupled doublets and the {a, c, c'} subsystem.
#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "errors.hpp"
#include "model.hpp"

namespace dweit {

/// Rotation diagonalising (1/2)[[δ, −g], [−g, −δ]]. The lower state is
/// cos θ|x⟩ + sin θ|x'⟩ with energy −g_eff/2.
struct Mixing {
    double cos_theta = 1.0;
    double sin_theta = 0.0;
    double g_eff = 0.0;

    double theta() const noexcept { return std::atan2(sin_theta, cos_theta); }
    double cos_2theta() const noexcept
    {
        return (cos_theta - sin_theta) * (cos_theta + sin_theta);
    }
};

/// Principal-branch mixing angle of a doublet with asymmetry `delta` and
/// tunneling `g`. Throws DegenerateSubspace when both vanish.
inline Mixing mixing(double delta, double g)
{
    if (delta == 0.0 && g == 0.0)
        throw Error(ErrorCode::DegenerateSubspace, "mixing angle undefined for delta = g = 0");
    const double g_eff = std::hypot(delta, g);
    if (delta == 0.0)
        return {std::numbers::sqrt2 / 2.0, std::numbers::sqrt2 / 2.0, g_eff};
    // Take the square root on the non-cancelling side and recover the other
    // component from 2 cos θ sin θ = g/g_eff.
    const double ratio = delta / g_eff;
    if (delta > 0.0) {
        const double s = std::sqrt((1.0 + ratio) / 2.0);
        return {g / (2.0 * g_eff * s), s, g_eff};
    }
    const double c = std::sqrt((1.0 - ratio) / 2.0);
    return {c, g / (2.0 * g_eff * c), g_eff};
}

struct DressedFrame {
    Mixing b;
    Mixing c;
};

/// Dressed frame of a configuration. A doublet with neither tunneling nor
/// asymmetry is left in the bare basis (θ = 0), the decoupled-wells limit in
/// which the dressed states are the bare states.
inline DressedFrame dressed_frame(const SystemParams& p)
{
    auto doublet = [](double delta, double g) {
        if (delta == 0.0 && g == 0.0)
            return Mixing{};
        return mixing(delta, g);
    };
    return {doublet(p.delta_bb, p.g_b), doublet(p.delta_cc, p.g_c)};
}

using Matrix6d = Eigen::Matrix<double, 6, 6>;

/// Orthogonal map from the bare basis (a, b, c, a', b', c') to the dressed
/// basis (a, B, C, a', B', C').
inline Matrix6d rotation_matrix(const DressedFrame& frame)
{
    Matrix6d d = Matrix6d::Zero();
    d(0, 0) = 1.0;
    d(3, 3) = 1.0;
    d(1, 1) = frame.b.cos_theta;
    d(1, 4) = frame.b.sin_theta;
    d(4, 1) = -frame.b.sin_theta;
    d(4, 4) = frame.b.cos_theta;
    d(2, 2) = frame.c.cos_theta;
    d(2, 5) = frame.c.sin_theta;
    d(5, 2) = -frame.c.sin_theta;
    d(5, 5) = frame.c.cos_theta;
    return d;
}

/// Eigensystem of the resonant {|a⟩, |c⟩, |c'⟩} Hamiltonian, energies
/// relative to ω_a.
struct AccEigensystem {
    double e_plus = 0.0;
    double e_minus = 0.0;
    double e_zero = 0.0;
    Eigen::Vector3d v_plus;
    Eigen::Vector3d v_minus;
    Eigen::Vector3d v_zero;  ///< dark state, no |c⟩ component
    double theta = 0.0;  ///< tan θ = −Ω_ac/g_c
};

/// (1/2)[[0, Ω_ac, 0], [Ω_ac, 0, −g_c], [0, −g_c, 0]].
inline Eigen::Matrix3d acc_hamiltonian(double omega_ac, double g_c)
{
    Eigen::Matrix3d h;
    h << 0.0, omega_ac, 0.0,
         omega_ac, 0.0, -g_c,
         0.0, -g_c, 0.0;
    return 0.5 * h;
}

inline AccEigensystem acc_eigensystem(double omega_ac, double g_c)
{
    if (omega_ac == 0.0 && g_c == 0.0)
        throw Error(ErrorCode::DegenerateSubspace, "Omega_ac = g_c = 0 has no dressed structure");
    const double r = std::hypot(omega_ac, g_c);
    // θ sits in the quadrant where (sin θ, ±1, cos θ)/√2 carry energies ±r/2.
    const double sin_t = omega_ac / r;
    const double cos_t = -g_c / r;

    AccEigensystem out;
    out.theta = std::atan2(sin_t, cos_t);
    out.e_plus = r / 2.0;
    out.e_minus = -r / 2.0;
    out.e_zero = 0.0;
    const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
    out.v_plus = Eigen::Vector3d(sin_t, 1.0, cos_t) * inv_sqrt2;
    out.v_minus = Eigen::Vector3d(sin_t, -1.0, cos_t) * inv_sqrt2;
    out.v_zero = Eigen::Vector3d(cos_t, 0.0, -sin_t);
    if (out.v_zero[0] < 0.0 || (out.v_zero[0] == 0.0 && out.v_zero[2] < 0.0))
        out.v_zero = -out.v_zero;
    out.v_zero[1] = 0.0;  // exact, not −0
    return out;
}

}  // namespace dweit
