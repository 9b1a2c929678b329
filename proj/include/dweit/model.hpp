// Physical configuration of the double-well Λ condensate.
//
// Rates are plain doubles in whatever unit the caller chooses; the figures
// and the CLI use units of the optical coherence decay γ_ab. Angles are in
// radians.
#pragma once

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace dweit {

struct SystemParams {
    double omega_ac = 0.0;  ///< control Rabi frequency Ω_ac
    double omega_ab = 1e-3;  ///< probe Rabi frequency Ω_ab (linear factor only)
    double phi_ab = 0.0;
    double phi_ac = 0.0;
    double gamma_a = 2.0;  ///< excited-state decay
    std::optional<double> gamma_ab;  ///< a-b coherence decay, γ_a/2 when unset
    double g_a = 0.0;
    double g_b = 0.0;
    double g_c = 0.0;
    double delta_bb = 0.0;  ///< mean-field well asymmetry δ_bb'
    double delta_cc = 0.0;  ///< mean-field well asymmetry δ_cc'
    double delta_mu = 0.0;  ///< control detuning Δ_μ
    double phi_prep = 0.0;  ///< preparation angle φ of the dressed populations
    double u_bb = 0.0;
    double u_cb = 0.0;
    double u_ab = 0.0;
    double prefactor = 1.0;  ///< optical-density constant C of the figure units

    /// γ_ab, falling back to the zero-dephasing value γ_a/2.
    double coherence_decay() const noexcept { return gamma_ab.value_or(gamma_a / 2.0); }

    /// Probe detuning with the mean-field substitution Δ_p − U_bb/2 + U_ab.
    double shifted_probe_detuning(double delta_p) const noexcept
    {
        return delta_p - u_bb / 2.0 + u_ab;
    }

    /// Control detuning with the mean-field substitution Δ_μ − U_cb/2 + U_ab.
    double shifted_control_detuning() const noexcept { return delta_mu - u_cb / 2.0 + u_ab; }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Names and member pointers of every plain-double field, in declaration
/// order. gamma_ab is optional and handled separately.
struct ParamField {
    std::string_view name;
    double SystemParams::*member;
};

inline constexpr std::array<ParamField, 16> kScalarFields{{
    {"omega_ac", &SystemParams::omega_ac},
    {"omega_ab", &SystemParams::omega_ab},
    {"phi_ab", &SystemParams::phi_ab},
    {"phi_ac", &SystemParams::phi_ac},
    {"gamma_a", &SystemParams::gamma_a},
    {"g_a", &SystemParams::g_a},
    {"g_b", &SystemParams::g_b},
    {"g_c", &SystemParams::g_c},
    {"delta_bb", &SystemParams::delta_bb},
    {"delta_cc", &SystemParams::delta_cc},
    {"delta_mu", &SystemParams::delta_mu},
    {"phi_prep", &SystemParams::phi_prep},
    {"u_bb", &SystemParams::u_bb},
    {"u_cb", &SystemParams::u_cb},
    {"u_ab", &SystemParams::u_ab},
    {"prefactor", &SystemParams::prefactor},
}};

/// Fields measured in rate units (rescaled by the CLI's si mode).
inline constexpr std::array<std::string_view, 12> kRateFields{
    "omega_ac", "omega_ab", "gamma_a", "gamma_ab", "g_a", "g_b",
    "g_c", "delta_bb", "delta_cc", "delta_mu", "u_bb", "u_cb"};

struct ParamIssue {
    ErrorCode code;
    std::string field;
};

/// Thrown by validate_params with every violated invariant.
class ParamError : public Error {
  public:
    explicit ParamError(std::vector<ParamIssue> issues)
        : Error(issues.front().code, describe(issues)), issues_(std::move(issues))
    {
    }

    const std::vector<ParamIssue>& issues() const noexcept { return issues_; }

  private:
    static std::string describe(const std::vector<ParamIssue>& issues)
    {
        std::string out = "invalid parameters:";
        for (const auto& issue : issues) {
            out += ' ';
            out += issue.field;
            out += '(';
            out += to_string(issue.code);
            out += ')';
        }
        return out;
    }

    std::vector<ParamIssue> issues_;
};

enum class Validation {
    Strict,
    /// Also accepts γ_ab = 0, the lossless limit used to exercise pole
    /// handling in oracle comparisons.
    AllowLossless,
};

/// Fills defaults and checks every invariant. Idempotent.
inline SystemParams validate_params(SystemParams raw, Validation mode = Validation::Strict)
{
    std::vector<ParamIssue> issues;
    for (const auto& field : kScalarFields) {
        if (!std::isfinite(raw.*field.member))
            issues.push_back({ErrorCode::NonFinite, std::string(field.name)});
    }
    if (raw.gamma_ab && !std::isfinite(*raw.gamma_ab))
        issues.push_back({ErrorCode::NonFinite, "gamma_ab"});
    if (!issues.empty())
        throw ParamError(std::move(issues));

    if (!raw.gamma_ab)
        raw.gamma_ab = raw.gamma_a / 2.0;

    if (!(raw.gamma_a > 0.0))
        issues.push_back({ErrorCode::NonPositiveRate, "gamma_a"});
    const bool lossless_ok = mode == Validation::AllowLossless && *raw.gamma_ab == 0.0;
    if (!(*raw.gamma_ab > 0.0) && !lossless_ok)
        issues.push_back({ErrorCode::NonPositiveRate, "gamma_ab"});
    if (!(raw.omega_ab > 0.0))
        issues.push_back({ErrorCode::NonPositiveRate, "omega_ab"});
    if (raw.g_a < 0.0)
        issues.push_back({ErrorCode::NegativeTunneling, "g_a"});
    if (raw.g_b < 0.0)
        issues.push_back({ErrorCode::NegativeTunneling, "g_b"});
    if (raw.g_c < 0.0)
        issues.push_back({ErrorCode::NegativeTunneling, "g_c"});
    if (!issues.empty())
        throw ParamError(std::move(issues));
    return raw;
}

/// Control/probe Rabi frequency 2, γ_a = 2, γ_ab = 1 with equal b and c
/// tunneling; the configuration family used throughout the figures.
inline SystemParams figure_params(double g_b, double g_c, double phi_prep = 0.0)
{
    SystemParams p;
    p.omega_ac = 2.0;
    p.gamma_a = 2.0;
    p.gamma_ab = 1.0;
    p.g_a = g_b;
    p.g_b = g_b;
    p.g_c = g_c;
    p.phi_prep = phi_prep;
    return validate_params(p);
}

}  // namespace dweit
