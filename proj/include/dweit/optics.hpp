// Probe optics: susceptibility, refraction, dispersion, group velocity and
// resonance analysis of detuning scans.
//
// χ is reported in figure units N u_a* u_b D_ab² / (2 ε₀ ħ γ_ab) times the
// dimensionless prefactor C, so that χ = 4 C γ_ab ρ_ab e^{iφ_ab} / Ω_ab.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "steady.hpp"

namespace dweit {

/// Scales that only fix absolute optical units: the probe carrier ω_p (in the
/// same rate unit as the params) and the wavenumber k_p multiplying Im χ.
struct OpticsScale {
    double omega_probe = 1e8;
    double k_probe = 1.0;
};

inline cdouble susceptibility(cdouble coherence, const SystemParams& p)
{
    return 4.0 * p.prefactor * p.coherence_decay() * coherence * std::polar(1.0, p.phi_ab)
         / p.omega_ab;
}

/// χ at one detuning via the closed form.
inline cdouble chi_at(const SystemParams& p, double delta_p)
{
    return susceptibility(closed_form_coherence(p, delta_p), p);
}

inline double refractive_index(cdouble chi)
{
    if (chi.real() < -1.0)
        throw Error(ErrorCode::UnphysicalIndex, "Re chi < -1");
    return std::sqrt(1.0 + chi.real());
}

/// Γ_n = 2 (g_c/Ω_ac)² γ_ab, the FWHM of the tunneling resonances. Zero
/// when there is no c tunneling or no control field.
inline double predicted_linewidth(const SystemParams& p)
{
    if (p.g_c == 0.0 || p.omega_ac == 0.0)
        return 0.0;
    const double r = p.g_c / p.omega_ac;
    return 2.0 * r * r * p.coherence_decay();
}

/// Detunings ±g_b^eff/2 of the tunneling resonances (one value when they
/// merge), in unshifted Δ_p. Empty when no narrow resonance exists.
inline std::vector<double> predicted_centers(const SystemParams& p)
{
    if (predicted_linewidth(p) == 0.0)
        return {};
    const double half = dressed_frame(p).b.g_eff / 2.0;
    const double offset = p.u_bb / 2.0 - p.u_ab;  // undo the mean-field shift
    if (half == 0.0)
        return {offset};
    return {offset - half, offset + half};
}

/// Step for dispersion_slope: one hundredth of the narrowest structure near
/// `delta_p` (γ_ab, Ω_ac, g_c and the distance to a tunneling resonance,
/// never below its width).
inline double default_slope_step(const SystemParams& p, double delta_p)
{
    double scale = p.coherence_decay();
    if (p.omega_ac > 0.0)
        scale = std::min(scale, p.omega_ac);
    const double width = predicted_linewidth(p);
    if (width > 0.0) {
        scale = std::min(scale, dressed_frame(p).c.g_eff);
        double nearest = std::numeric_limits<double>::infinity();
        for (double c : predicted_centers(p))
            nearest = std::min(nearest, std::abs(delta_p - c));
        scale = std::min(scale, std::max(width, nearest));
    }
    return std::max(scale / 100.0, 1e-13 * std::max(1.0, std::abs(delta_p)));
}

/// ∂Re χ/∂ω_p = −∂Re χ/∂Δ_p by central differences at h and h/2 with one
/// Richardson step. Throws StepTooLarge when the two estimates disagree by
/// more than 1 % (plus a 10⁻⁶ |Re χ| / h floor).
inline double dispersion_slope(const SystemParams& p, double delta_p, double h)
{
    if (!(h > 0.0))
        throw Error(ErrorCode::InvalidArgument, "finite-difference step must be positive");
    auto re = [&](double x) { return chi_at(p, x).real(); };
    const double f_pp = re(delta_p + h);
    const double f_mm = re(delta_p - h);
    const double f_p = re(delta_p + h / 2.0);
    const double f_m = re(delta_p - h / 2.0);
    const double coarse = -(f_pp - f_mm) / (2.0 * h);
    const double fine = -(f_p - f_m) / h;
    const double refined = (4.0 * fine - coarse) / 3.0;

    const double magnitude = std::max({std::abs(f_pp), std::abs(f_mm), std::abs(f_p), std::abs(f_m)});
    const double noise = 64.0 * std::numeric_limits<double>::epsilon() * magnitude / h;
    // Absolute floor so a vanishing slope is not judged by relative agreement.
    const double floor = 1e-6 * magnitude / h;
    if (std::abs(refined - fine) > 0.01 * std::abs(refined) + floor + noise)
        throw Error(ErrorCode::StepTooLarge, "Richardson estimates differ by more than 1%");
    return refined;
}

inline double dispersion_slope(const SystemParams& p, double delta_p)
{
    return dispersion_slope(p, delta_p, default_slope_step(p, delta_p));
}

/// v_g / c = 1 / (n + (ω_p / 2n) ∂Re χ/∂ω_p).
inline double group_velocity(const SystemParams& p, double delta_p, const OpticsScale& scale)
{
    const double n = refractive_index(chi_at(p, delta_p));
    const double slope = dispersion_slope(p, delta_p);
    return 1.0 / (n + scale.omega_probe / (2.0 * n) * slope);
}

/// The standard-EIT reference: same control, decay, detuning and optical
/// constants with the wells decoupled and every atom in |b⟩.
inline SystemParams standard_eit_reference(SystemParams p)
{
    p.g_a = p.g_b = p.g_c = 0.0;
    p.delta_bb = p.delta_cc = 0.0;
    p.phi_prep = 0.0;
    return p;
}

/// v_g at the reference line centre Δ_p = 0.
inline double reference_group_velocity(const SystemParams& p, const OpticsScale& scale)
{
    return group_velocity(standard_eit_reference(p), 0.0, scale);
}

inline double group_velocity_ratio(const SystemParams& p, double delta_p, const OpticsScale& scale)
{
    return group_velocity(p, delta_p, scale) / reference_group_velocity(p, scale);
}

struct SpectrumPoint {
    double delta_p = 0.0;
    cdouble chi;
    double alpha = 0.0;
    double n = 0.0;
    double dre_chi_domega = 0.0;
    double vg_ratio = 0.0;
    std::optional<ErrorCode> index_error;
    std::optional<ErrorCode> slope_error;

    bool has_vg() const { return !index_error && !slope_error; }
};

struct GridSpec {
    double min = -1.0;
    double max = 1.0;
    std::size_t count = 2;
    bool refine = false;
};

struct SpectrumScan {
    SystemParams params;
    GridSpec grid;
    OpticsScale scale;
    std::vector<SpectrumPoint> points;
};

/// Half-width of a refinement window and its spacing, in units of Γ_n.
inline constexpr double kRefineHalfWidth = 20.0;
inline constexpr double kRefineSpacing = 1.0 / 16.0;

/// Uniform grid plus, when requested, windows of ±20 Γ_n sampled at Γ_n/16
/// around each predicted tunneling resonance inside the range.
inline std::vector<double> build_grid(const SystemParams& p, const GridSpec& grid)
{
    if (grid.count < 2 || !(grid.min < grid.max))
        throw Error(ErrorCode::InvalidArgument, "grid needs count >= 2 and min < max");
    std::vector<double> xs(grid.count);
    const double step = (grid.max - grid.min) / static_cast<double>(grid.count - 1);
    for (std::size_t i = 0; i < grid.count; ++i)
        xs[i] = grid.min + step * static_cast<double>(i);
    xs.back() = grid.max;

    const double width = predicted_linewidth(p);
    double min_gap = step;
    if (grid.refine && width > 0.0 && std::isfinite(width)) {
        const double h = width * kRefineSpacing;
        const int half_count = static_cast<int>(kRefineHalfWidth / kRefineSpacing);
        for (double c : predicted_centers(p)) {
            if (c < grid.min || c > grid.max)
                continue;
            for (int k = -half_count; k <= half_count; ++k) {
                const double x = c + h * k;
                if (x > grid.min && x < grid.max)
                    xs.push_back(x);
            }
        }
        min_gap = std::min(min_gap, h);
    }
    std::sort(xs.begin(), xs.end());
    // Drop near-coincident samples so the grid is strictly increasing.
    const double tol = 1e-6 * min_gap;
    std::vector<double> out;
    out.reserve(xs.size());
    for (double x : xs) {
        if (out.empty() || x - out.back() > tol)
            out.push_back(x);
    }
    if (out.back() != grid.max)
        out.back() = grid.max;
    return out;
}

inline SpectrumPoint evaluate_point(const SystemParams& p, double delta_p, const OpticsScale& scale,
                                    double reference_vg)
{
    SpectrumPoint pt;
    pt.delta_p = delta_p;
    pt.chi = chi_at(p, delta_p);
    pt.alpha = scale.k_probe * pt.chi.imag();
    try {
        pt.n = refractive_index(pt.chi);
    } catch (const Error& e) {
        pt.index_error = e.code();
    }
    try {
        pt.dre_chi_domega = dispersion_slope(p, delta_p);
    } catch (const Error& e) {
        pt.slope_error = e.code();
    }
    if (pt.has_vg()) {
        const double vg = 1.0 / (pt.n + scale.omega_probe / (2.0 * pt.n) * pt.dre_chi_domega);
        pt.vg_ratio = vg / reference_vg;
    }
    return pt;
}

/// Evaluates every grid point; `threads` > 1 splits the grid into contiguous
/// chunks. Results are stored by grid index, so the output does not depend
/// on the thread count.
inline SpectrumScan scan_spectrum(const SystemParams& p, const GridSpec& grid,
                                  const OpticsScale& scale = {}, unsigned threads = 1)
{
    SpectrumScan scan{p, grid, scale, {}};
    const std::vector<double> xs = build_grid(p, grid);
    const double reference_vg = reference_group_velocity(p, scale);
    scan.points.resize(xs.size());

    auto work = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            scan.points[i] = evaluate_point(p, xs[i], scale, reference_vg);
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(xs.size())));
    if (threads == 1) {
        work(0, xs.size());
        return scan;
    }
    {
        std::vector<std::jthread> pool;
        const std::size_t chunk = (xs.size() + threads - 1) / threads;
        for (std::size_t begin = 0; begin < xs.size(); begin += chunk)
            pool.emplace_back(work, begin, std::min(xs.size(), begin + chunk));
    }
    return scan;
}

struct PeakReport {
    double center = 0.0;
    double height = 0.0;  ///< Im χ at the refined maximum
    double fwhm = 0.0;
    double predicted_fwhm = 0.0;  ///< Γ_n of the configuration
};

/// Local maxima of Im χ with three-point quadratic refinement and FWHM from
/// linearly interpolated half-height crossings. Maxima whose half-height
/// interval is not bracketed inside the scan, or that are not the highest
/// sample within it, are not reported. Throws UnresolvedFeature when the
/// grid is coarser than Γ_n/8 around a predicted tunneling resonance.
inline std::vector<PeakReport> find_peaks(const SpectrumScan& scan)
{
    const auto& pts = scan.points;
    const std::size_t n = pts.size();
    const double width = predicted_linewidth(scan.params);

    if (width > 0.0 && n >= 2) {
        for (double c : predicted_centers(scan.params)) {
            if (c < pts.front().delta_p || c > pts.back().delta_p)
                continue;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                const double lo = pts[i].delta_p;
                const double hi = pts[i + 1].delta_p;
                if (hi < c - width / 2.0 || lo > c + width / 2.0)
                    continue;
                if (hi - lo > width / 8.0 * (1.0 + 1e-9))
                    throw Error(ErrorCode::UnresolvedFeature,
                                "grid spacing exceeds Gamma_n/8 near a tunneling resonance");
            }
        }
    }

    auto y = [&](std::size_t i) { return pts[i].chi.imag(); };
    auto x = [&](std::size_t i) { return pts[i].delta_p; };
    std::vector<PeakReport> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y(i) > y(i - 1)))
            continue;
        std::size_t j = i;
        while (j + 1 < n && y(j + 1) == y(i))
            ++j;
        if (j + 1 >= n || !(y(j + 1) < y(i)) || !(y(i) > 0.0))
            continue;

        // Quadratic through (i-1, i, i+1) on a possibly non-uniform grid.
        double center = x(i);
        double height = y(i);
        if (j == i) {
            const double x0 = x(i - 1), x1 = x(i), x2 = x(i + 1);
            const double d1 = (y(i) - y(i - 1)) / (x1 - x0);
            const double d2 = (y(i + 1) - y(i)) / (x2 - x1);
            const double curvature = (d2 - d1) / (x2 - x0);
            if (curvature < 0.0) {
                const double slope_mid = d1 + curvature * (x1 - x0);  // derivative at x1
                const double shift = -slope_mid / (2.0 * curvature);
                if (std::abs(shift) <= std::max(x1 - x0, x2 - x1)) {
                    center = x1 + shift;
                    height = y(i) + slope_mid * shift + curvature * shift * shift;
                }
            }
        }

        const double half = height / 2.0;
        std::optional<double> left, right;
        bool dominated = false;
        for (std::size_t k = i; k-- > 0;) {
            if (y(k) > height) {
                dominated = true;
                break;
            }
            if (y(k) < half) {
                const double t = (half - y(k)) / (y(k + 1) - y(k));
                left = x(k) + t * (x(k + 1) - x(k));
                break;
            }
        }
        for (std::size_t k = j + 1; k < n && !dominated; ++k) {
            if (y(k) > height) {
                dominated = true;
                break;
            }
            if (y(k) < half) {
                const double t = (half - y(k)) / (y(k - 1) - y(k));
                right = x(k) + t * (x(k - 1) - x(k));
                break;
            }
        }
        if (dominated || !left || !right)
            continue;
        peaks.push_back({center, height, *right - *left, width});
    }
    return peaks;
}

}  // namespace dweit
