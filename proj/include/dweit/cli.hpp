// Command implementations behind the dweit executable: configuration
// loading, detuning scans, φ sweeps and oracle comparisons.
//
// Commands write to a std::ostream and report failures by throwing Error;
// exit_code() maps those onto the process exit status.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "format.hpp"
#include "model.hpp"
#include "model_json.hpp"
#include "optics.hpp"
#include "oracle.hpp"
#include "steady.hpp"

namespace dweit::cli {

enum class Format { Csv, Json };

/// Effective configuration of one command, rates in units of γ_ab.
struct RunConfig {
    SystemParams params;
    GridSpec grid{-3.0, 3.0, 601, false};
    OpticsScale scale;
    Format format = Format::Csv;
    bool oracle_check = false;
    unsigned threads = 1;  ///< never affects output
    double t_max = 1e4;
    double tolerance = 1e-12;  ///< integration residual target
    std::vector<double> phi;
    std::vector<double> delta_p;
};

/// Config keys besides the SystemParams fields.
inline constexpr std::string_view kRunKeys[] = {
    "grid_min", "grid_max", "grid_count", "refine", "format", "oracle_check", "units",
    "threads", "omega_p", "k_p", "t_max", "tolerance", "phi", "delta_p"};

namespace detail {

inline double number(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_number())
        throw Error(ErrorCode::BadConfig, std::string("key '") + key + "' must be a number");
    return v.get<double>();
}

inline bool flag(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_boolean())
        throw Error(ErrorCode::BadConfig, std::string("key '") + key + "' must be true or false");
    return v.get<bool>();
}

inline std::vector<double> number_list(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_array())
        throw Error(ErrorCode::BadConfig, std::string("key '") + key + "' must be an array");
    std::vector<double> out;
    for (const auto& item : v) {
        if (!item.is_number() || !std::isfinite(item.get<double>()))
            throw Error(ErrorCode::BadConfig, std::string("key '") + key + "' needs finite numbers");
        out.push_back(item.get<double>());
    }
    return out;
}

inline std::size_t count(const nlohmann::json& j, const char* key)
{
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw Error(ErrorCode::BadConfig, std::string("key '") + key + "' must be a non-negative integer");
    return static_cast<std::size_t>(v.get<long long>());
}

}  // namespace detail

/// Builds the effective configuration from a flat JSON object. With
/// "units": "si" every rate (parameters, grid bounds, ω_p, Δ_p list) is
/// divided by the supplied gamma_ab and t_max multiplied by it.
inline RunConfig load_config(const nlohmann::json& j, Validation mode = Validation::Strict)
{
    RunConfig cfg;
    SystemParams p = params_from_json(j, kRunKeys);
    if (j.contains("grid_min"))
        cfg.grid.min = detail::number(j, "grid_min");
    if (j.contains("grid_max"))
        cfg.grid.max = detail::number(j, "grid_max");
    if (j.contains("grid_count"))
        cfg.grid.count = detail::count(j, "grid_count");
    if (j.contains("refine"))
        cfg.grid.refine = detail::flag(j, "refine");
    if (j.contains("oracle_check"))
        cfg.oracle_check = detail::flag(j, "oracle_check");
    if (j.contains("format")) {
        const auto& f = j.at("format");
        if (f == "csv")
            cfg.format = Format::Csv;
        else if (f == "json")
            cfg.format = Format::Json;
        else
            throw Error(ErrorCode::BadConfig, "format must be \"csv\" or \"json\"");
    }
    if (j.contains("threads"))
        cfg.threads = static_cast<unsigned>(std::max<std::size_t>(1, detail::count(j, "threads")));
    if (j.contains("omega_p"))
        cfg.scale.omega_probe = detail::number(j, "omega_p");
    if (j.contains("k_p"))
        cfg.scale.k_probe = detail::number(j, "k_p");
    if (j.contains("t_max"))
        cfg.t_max = detail::number(j, "t_max");
    if (j.contains("tolerance"))
        cfg.tolerance = detail::number(j, "tolerance");
    if (j.contains("phi"))
        cfg.phi = detail::number_list(j, "phi");
    if (j.contains("delta_p"))
        cfg.delta_p = detail::number_list(j, "delta_p");

    bool si = false;
    if (j.contains("units")) {
        const auto& u = j.at("units");
        if (u == "si")
            si = true;
        else if (u != "gamma_ab")
            throw Error(ErrorCode::BadConfig, "units must be \"gamma_ab\" or \"si\"");
    }
    if (si) {
        if (!p.gamma_ab || !(*p.gamma_ab > 0.0) || !std::isfinite(*p.gamma_ab))
            throw Error(ErrorCode::BadConfig, "si units need a positive gamma_ab");
        const double unit = *p.gamma_ab;
        for (const auto& field : kScalarFields) {
            if (std::find(kRateFields.begin(), kRateFields.end(), field.name) != kRateFields.end())
                p.*(field.member) /= unit;
        }
        p.gamma_ab = 1.0;
        cfg.grid.min /= unit;
        cfg.grid.max /= unit;
        cfg.scale.omega_probe /= unit;
        for (double& x : cfg.delta_p)
            x /= unit;
        cfg.t_max *= unit;
    }

    cfg.params = validate_params(p, mode);
    if (cfg.grid.count < 2 || !(cfg.grid.min < cfg.grid.max) || !std::isfinite(cfg.grid.min)
        || !std::isfinite(cfg.grid.max))
        throw Error(ErrorCode::InvalidArgument, "grid needs count >= 2 and finite min < max");
    if (!(cfg.scale.omega_probe > 0.0) || !std::isfinite(cfg.scale.k_probe))
        throw Error(ErrorCode::BadConfig, "omega_p must be positive and k_p finite");
    if (!(cfg.t_max >= 0.0) || !(cfg.tolerance > 0.0))
        throw Error(ErrorCode::BadConfig, "t_max must be non-negative and tolerance positive");
    return cfg;
}

/// Flat JSON of the effective configuration in γ_ab units, the same keys
/// load_config accepts. The thread count is omitted: it never changes output.
inline nlohmann::json config_to_json(const RunConfig& cfg)
{
    nlohmann::json j = params_to_json(cfg.params);
    j["units"] = "gamma_ab";
    j["grid_min"] = cfg.grid.min;
    j["grid_max"] = cfg.grid.max;
    j["grid_count"] = cfg.grid.count;
    j["refine"] = cfg.grid.refine;
    j["format"] = cfg.format == Format::Csv ? "csv" : "json";
    j["oracle_check"] = cfg.oracle_check;
    j["omega_p"] = cfg.scale.omega_probe;
    j["k_p"] = cfg.scale.k_probe;
    j["t_max"] = cfg.t_max;
    j["tolerance"] = cfg.tolerance;
    if (!cfg.phi.empty())
        j["phi"] = cfg.phi;
    if (!cfg.delta_p.empty())
        j["delta_p"] = cfg.delta_p;
    return j;
}

/// Exit status for a failed command: 2 for configuration errors, 3 for an
/// unresolved resonance, 1 otherwise.
inline int exit_code(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NonPositiveRate:
    case ErrorCode::NonFinite:
    case ErrorCode::NegativeTunneling:
    case ErrorCode::UnknownKey:
    case ErrorCode::BadConfig:
    case ErrorCode::InvalidArgument:
    case ErrorCode::NotDegenerate:
    case ErrorCode::DegenerateSubspace:
        return 2;
    case ErrorCode::UnresolvedFeature:
        return 3;
    default:
        return 1;
    }
}

/// A number, or the token NonFinite; never NaN or inf in output.
inline std::string cell(double value)
{
    return std::isfinite(value) ? format_number(value) : std::string("NonFinite");
}

inline std::string token(ErrorCode code)
{
    return std::string(to_string(code));
}

/// Larger of the two branch residuals of the closed-form state.
inline double closed_form_residual(const SystemParams& p, double delta_p)
{
    double worst = 0.0;
    for (Branch branch : {Branch::B, Branch::Bprime}) {
        const LinearSystem sys = build_linear_system(p, delta_p, branch);
        worst = std::max(worst, residual(sys, closed_form_state(p, delta_p, branch)));
    }
    return worst;
}

struct ScanRow {
    std::string delta_p, re_chi, im_chi, n, dre_chi_domega, vg_ratio, residual;
};

inline ScanRow format_row(const SystemParams& p, const SpectrumPoint& pt, bool oracle_check)
{
    ScanRow row;
    row.delta_p = cell(pt.delta_p);
    row.re_chi = cell(pt.chi.real());
    row.im_chi = cell(pt.chi.imag());
    row.n = pt.index_error ? token(*pt.index_error) : cell(pt.n);
    row.dre_chi_domega = pt.slope_error ? token(*pt.slope_error) : cell(pt.dre_chi_domega);
    if (pt.index_error)
        row.vg_ratio = token(*pt.index_error);
    else if (pt.slope_error)
        row.vg_ratio = token(*pt.slope_error);
    else
        row.vg_ratio = cell(pt.vg_ratio);
    if (oracle_check) {
        try {
            row.residual = cell(closed_form_residual(p, pt.delta_p));
        } catch (const Error& e) {
            row.residual = token(e.code());
        }
    }
    return row;
}

inline std::string json_value(const std::string& cell_text)
{
    const bool numeric = !cell_text.empty()
                      && (std::isdigit(static_cast<unsigned char>(cell_text.front())) != 0
                          || cell_text.front() == '-');
    return numeric ? cell_text : '"' + cell_text + '"';
}

/// Detuning scan: one row per grid point followed by the resolved peaks and
/// the effective configuration.
inline SpectrumScan cmd_scan(const RunConfig& cfg, std::ostream& out)
{
    SpectrumScan scan = scan_spectrum(cfg.params, cfg.grid, cfg.scale, cfg.threads);
    const std::vector<PeakReport> peaks = find_peaks(scan);
    const std::string config = config_to_json(cfg).dump();

    std::vector<ScanRow> rows;
    rows.reserve(scan.points.size());
    for (const auto& pt : scan.points)
        rows.push_back(format_row(cfg.params, pt, cfg.oracle_check));

    if (cfg.format == Format::Csv) {
        out << "delta_p,re_chi,im_chi,n,dre_chi_domega,vg_ratio";
        if (cfg.oracle_check)
            out << ",residual";
        out << '\n';
        for (const auto& r : rows) {
            out << r.delta_p << ',' << r.re_chi << ',' << r.im_chi << ',' << r.n << ','
                << r.dre_chi_domega << ',' << r.vg_ratio;
            if (cfg.oracle_check)
                out << ',' << r.residual;
            out << '\n';
        }
        out << "# peaks\n# center,height,fwhm,predicted_fwhm\n";
        for (const auto& pk : peaks)
            out << "# " << cell(pk.center) << ',' << cell(pk.height) << ',' << cell(pk.fwhm) << ','
                << cell(pk.predicted_fwhm) << '\n';
        out << "# config " << config << '\n';
        return scan;
    }

    out << "{\"config\":" << config << ",\"points\":[";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        out << (i ? "," : "") << "{\"delta_p\":" << json_value(r.delta_p)
            << ",\"re_chi\":" << json_value(r.re_chi) << ",\"im_chi\":" << json_value(r.im_chi)
            << ",\"n\":" << json_value(r.n) << ",\"dre_chi_domega\":" << json_value(r.dre_chi_domega)
            << ",\"vg_ratio\":" << json_value(r.vg_ratio);
        if (cfg.oracle_check)
            out << ",\"residual\":" << json_value(r.residual);
        out << '}';
    }
    out << "],\"peaks\":[";
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        const auto& pk = peaks[i];
        out << (i ? "," : "") << "{\"center\":" << json_value(cell(pk.center))
            << ",\"height\":" << json_value(cell(pk.height))
            << ",\"fwhm\":" << json_value(cell(pk.fwhm))
            << ",\"predicted_fwhm\":" << json_value(cell(pk.predicted_fwhm)) << '}';
    }
    out << "]}\n";
    return scan;
}

/// Resonance heights at one preparation angle. `minus`/`plus` refer to the
/// resonances at ∓g_b/2; branch amplitudes are the Im χ of the dressed
/// branch that produces each resonance (B for −, B' for +).
struct PhiRow {
    double phi = 0.0;
    double center_minus = 0.0;
    double center_plus = 0.0;
    double height_minus = 0.0;
    double height_plus = 0.0;
    double branch_minus = 0.0;
    double branch_plus = 0.0;
    double factor_minus = 0.0;  ///< 1 + sin 2φ
    double factor_plus = 0.0;  ///< 1 − sin 2φ
};

/// Centre of the resolved Im χ maximum nearest `guess`, scanned at Γ_n/16
/// over ±2 Γ_n.
inline double locate_resonance(const SystemParams& p, double guess)
{
    const double width = predicted_linewidth(p);
    const GridSpec grid{guess - 2.0 * width, guess + 2.0 * width, 65, false};
    SpectrumScan scan{p, grid, {}, {}};
    for (double x : build_grid(p, grid)) {
        SpectrumPoint pt;
        pt.delta_p = x;
        pt.chi = chi_at(p, x);
        scan.points.push_back(pt);
    }
    const auto peaks = find_peaks(scan);
    if (peaks.empty())
        throw Error(ErrorCode::UnresolvedFeature, "no resolved maximum near a predicted resonance");
    return std::min_element(peaks.begin(), peaks.end(),
                            [&](const PeakReport& a, const PeakReport& b) {
                                return std::abs(a.center - guess) < std::abs(b.center - guess);
                            })
        ->center;
}

/// Resonance heights for each φ at the centres located for φ = 0.
inline std::vector<PhiRow> sweep_phi(const SystemParams& params, const std::vector<double>& phis)
{
    if (params.delta_bb != 0.0 || params.delta_cc != 0.0 || params.g_b == 0.0)
        throw Error(ErrorCode::NotDegenerate, "sweep-phi needs symmetric wells and g_b > 0");
    if (predicted_linewidth(params) == 0.0)
        throw Error(ErrorCode::BadConfig, "sweep-phi needs g_c > 0 and omega_ac > 0");
    SystemParams base = params;
    base.phi_prep = 0.0;
    const auto guesses = predicted_centers(base);
    const double c_minus = locate_resonance(base, guesses.front());
    const double c_plus = locate_resonance(base, guesses.back());

    std::vector<PhiRow> rows;
    for (double phi : phis) {
        SystemParams p = params;
        p.phi_prep = phi;
        const BranchCoherence at_minus = closed_form_branches(p, c_minus);
        const BranchCoherence at_plus = closed_form_branches(p, c_plus);
        PhiRow r;
        r.phi = phi;
        r.center_minus = c_minus;
        r.center_plus = c_plus;
        r.height_minus = susceptibility(at_minus.total(), p).imag();
        r.height_plus = susceptibility(at_plus.total(), p).imag();
        r.branch_minus = susceptibility(at_minus.b, p).imag();
        r.branch_plus = susceptibility(at_plus.bprime, p).imag();
        r.factor_minus = 1.0 + std::sin(2.0 * phi);
        r.factor_plus = 1.0 - std::sin(2.0 * phi);
        rows.push_back(r);
    }
    return rows;
}

inline std::vector<PhiRow> cmd_sweep_phi(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.phi.empty())
        throw Error(ErrorCode::BadConfig, "sweep-phi needs a phi list");
    const auto rows = sweep_phi(cfg.params, cfg.phi);
    out << "phi,center_minus,center_plus,height_minus,height_plus,branch_minus,branch_plus,"
           "factor_minus,factor_plus\n";
    for (const auto& r : rows)
        out << cell(r.phi) << ',' << cell(r.center_minus) << ',' << cell(r.center_plus) << ','
            << cell(r.height_minus) << ',' << cell(r.height_plus) << ',' << cell(r.branch_minus)
            << ',' << cell(r.branch_plus) << ',' << cell(r.factor_minus) << ','
            << cell(r.factor_plus) << '\n';
    out << "# config " << config_to_json(cfg).dump() << '\n';
    return rows;
}

/// ρ_ab by one route, or the error that route raised.
struct RouteValue {
    std::optional<cdouble> value;
    std::optional<ErrorCode> error;
};

struct OracleRow {
    double delta_p = 0.0;
    RouteValue closed_form;
    RouteValue linear_solve;
    RouteValue integration;
};

/// ρ_ab from RK4 integration of both branches; NotConverged is reported as
/// an error token, not thrown.
inline RouteValue integrate_coherence(const SystemParams& p, double delta_p, double t_max,
                                      double tolerance)
{
    const DressedFrame frame = dressed_frame(p);
    cdouble rho = 0.0;
    for (Branch branch : {Branch::B, Branch::Bprime}) {
        const LinearSystem sys = build_linear_system(p, delta_p, branch);
        if (sys.a.isZero(0.0))
            continue;
        const double dt = 0.1 / spectral_radius_bound(sys);
        const IntegrationReport report = integrate_to_steady(sys, dt, t_max, tolerance);
        if (!report.converged)
            return {std::nullopt, ErrorCode::NotConverged};
        rho += branch == Branch::B ? frame.b.cos_theta * report.final_state[0]
                                   : -frame.b.sin_theta * report.final_state[0];
    }
    return {rho, std::nullopt};
}

template <class F>
RouteValue attempt(F&& f)
{
    try {
        return {f(), std::nullopt};
    } catch (const Error& e) {
        return {std::nullopt, e.code()};
    }
}

inline OracleRow compare_oracle(const RunConfig& cfg, double delta_p)
{
    const SystemParams& p = cfg.params;
    OracleRow row;
    row.delta_p = delta_p;
    row.closed_form = attempt([&] { return closed_form_coherence(p, delta_p); });
    row.linear_solve = attempt([&] { return solve_coherences(p, delta_p).rho_ab; });
    try {
        row.integration = integrate_coherence(p, delta_p, cfg.t_max, cfg.tolerance);
    } catch (const Error& e) {
        row.integration = {std::nullopt, e.code()};
    }
    return row;
}

/// |a − b| / max(|a|, |b|), zero when both vanish.
inline double relative_difference(cdouble a, cdouble b)
{
    const double scale = std::max(std::abs(a), std::abs(b));
    return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

inline std::vector<OracleRow> cmd_compare_oracle(const RunConfig& cfg, std::ostream& out)
{
    if (cfg.delta_p.empty())
        throw Error(ErrorCode::BadConfig, "compare-oracle needs a delta_p list");
    auto parts = [](const RouteValue& v) {
        if (v.value)
            return cell(v.value->real()) + ',' + cell(v.value->imag());
        return token(*v.error) + ',' + token(*v.error);
    };
    auto diff = [](const RouteValue& a, const RouteValue& b) {
        if (!a.value)
            return token(*a.error);
        if (!b.value)
            return token(*b.error);
        return cell(relative_difference(*a.value, *b.value));
    };

    std::vector<OracleRow> rows;
    out << "delta_p,closed_re,closed_im,solve_re,solve_im,integrate_re,integrate_im,"
           "diff_closed_solve,diff_closed_integrate,diff_solve_integrate\n";
    for (double dp : cfg.delta_p) {
        const OracleRow r = compare_oracle(cfg, dp);
        out << cell(dp) << ',' << parts(r.closed_form) << ',' << parts(r.linear_solve) << ','
            << parts(r.integration) << ',' << diff(r.closed_form, r.linear_solve) << ','
            << diff(r.closed_form, r.integration) << ',' << diff(r.linear_solve, r.integration)
            << '\n';
        rows.push_back(r);
    }
    out << "# config " << config_to_json(cfg).dump() << '\n';
    return rows;
}

}  // namespace dweit::cli
