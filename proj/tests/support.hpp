// Shared helpers for the test and acceptance binaries.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "dweit/model.hpp"

namespace dweit::testing {

inline double relative_error(std::complex<double> got, std::complex<double> want)
{
    const double scale = std::abs(want);
    return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got);
}

/// Random valid configuration: log-uniform tunneling in [1e-5, 1e-1],
/// Ω_ac in [0.5, 4], γ_ab = 1, arbitrary phases, asymmetries, control
/// detuning and mean-field shifts.
struct RandomDraw {
    SystemParams params;
    double delta_p = 0.0;
};

inline RandomDraw random_draw(std::mt19937_64& rng, bool symmetric_wells = false)
{
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto log_uniform = [&](double lo, double hi) {
        return std::exp(std::log(lo) + unit(rng) * (std::log(hi) - std::log(lo)));
    };
    auto between = [&](double lo, double hi) { return lo + unit(rng) * (hi - lo); };

    SystemParams p;
    p.omega_ac = between(0.5, 4.0);
    p.gamma_a = between(2.0, 4.0);
    p.gamma_ab = 1.0;
    p.g_a = log_uniform(1e-5, 1e-1);
    p.g_b = log_uniform(1e-5, 1e-1);
    p.g_c = log_uniform(1e-5, 1e-1);
    p.phi_ab = between(-3.0, 3.0);
    p.phi_ac = between(-3.0, 3.0);
    p.phi_prep = between(0.0, 3.1);
    if (!symmetric_wells) {
        p.delta_bb = between(-1e-1, 1e-1) * p.g_b;
        p.delta_cc = between(-1e-1, 1e-1) * p.g_c;
    }
    p.delta_mu = between(-1e-2, 1e-2);
    p.u_bb = between(0.0, 1e-3);
    p.u_cb = between(0.0, 1e-3);
    p.u_ab = between(0.0, 1e-3);
    RandomDraw d;
    d.params = validate_params(p);
    d.delta_p = between(-2.0, 2.0) * p.omega_ac;
    return d;
}

}  // namespace dweit::testing
