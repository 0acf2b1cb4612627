#ifndef RANDCAV_EXTRACTION_HPP
#define RANDCAV_EXTRACTION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

#include "randcav/constants.hpp"
#include "randcav/errors.hpp"
#include "randcav/ldos.hpp"
#include "randcav/modefit.hpp"
#include "randcav/peaks.hpp"
#include "randcav/quasimode.hpp"
#include "randcav/stack.hpp"

namespace randcav
{
struct PeakCandidate
{
    double lambda_peak = 0.0;  // meters, refined to lambda * 1e-9
    double probe_z = 0.0;      // meters; probe used for fitting
    double prominence = 0.0;   // rho_rel units at the detecting probe
    double fwhm_lambda = 0.0;  // meters, half-max width estimate
    std::size_t probe_index = 0;
    bool from_transmission = false;
};

struct ExtractionOptions
{
    double prominence = 5.0;        // rho_rel units, any probe
    double lnt_prominence = 2.0;    // ln T units
    std::size_t probe_count = 8;
    double probe_span = 0.7;        // probes cover this central fraction of L
    std::size_t coarse_samples = 4000;
    double center_fraction = 0.5;   // filter_modes default
    double residual_bound = 0.05;   // relative RMS bound for filter_modes
    double merge_linewidths = 0.5;  // merge candidates closer than this x FWHM
    double joint_linewidths = 10.0; // joint-fit clustering distance in linewidths
    double refine_rel_tol = 1e-9;   // golden-section bracket / lambda
    std::size_t samples_per_fwhm = 12;
    double profile_subsample = 4.0; // z refinement factor near the profile peak
};

struct ExtractionDiagnostics
{
    std::size_t n_candidates = 0;
    std::size_t n_fit_failures = 0;
    std::size_t n_modes = 0;
};

struct ExtractionResult
{
    std::vector<QuasiMode> modes;
    ExtractionDiagnostics diagnostics;
};

// Probe positions: `count` points equally spaced across the central `span`
// fraction of [0, L]. Localized modes decay exponentially away from their
// center, so probes concentrate where the retained modes live.
inline std::vector<double> default_probes(double sample_length, std::size_t count,
                                          double span)
{
    std::vector<double> probes;
    probes.reserve(count);
    const double lo = 0.5 * (1.0 - span) * sample_length;
    for (std::size_t i = 0; i < count; ++i)
    {
        probes.push_back(lo + span * sample_length * (static_cast<double>(i) + 0.5) /
                                  static_cast<double>(count));
    }
    return probes;
}

// Two-stage peak search: coarse scan of rho_rel at every probe plus ln T,
// golden-section refinement of each local maximum, then merging of
// candidates closer than half a linewidth.
inline std::vector<PeakCandidate> detect_peaks(const Stack &stack,
                                               const SpectralWindow &window,
                                               const std::vector<double> &probe_z,
                                               const ExtractionOptions &opts = {})
{
    if (probe_z.empty())
    {
        throw ValidationError("detect_peaks: need at least one probe position");
    }
    SpectralEngine engine(stack, probe_z);
    const auto scan = engine.scan(window, opts.coarse_samples);
    const std::size_t n_probes = probe_z.size();

    struct RawHit
    {
        std::size_t grid_index;
        std::size_t series; // probe index, or n_probes for the ln T series
        double prominence;
    };
    std::vector<RawHit> hits;
    for (std::size_t p = 0; p < n_probes; ++p)
    {
        for (const SeriesPeak &peak : find_series_peaks(scan.rho_rel[p], opts.prominence))
        {
            hits.push_back({peak.index, p, peak.prominence});
        }
    }
    for (const SeriesPeak &peak : find_series_peaks(scan.ln_t, opts.lnt_prominence))
    {
        hits.push_back({peak.index, n_probes, peak.prominence});
    }
    if (hits.empty())
    {
        return {};
    }

    // Hits within one grid step of each other are the same spectral feature;
    // refine once per group from its most prominent series.
    std::sort(hits.begin(), hits.end(), [](const RawHit &a, const RawHit &b) {
        return a.grid_index < b.grid_index;
    });
    std::vector<std::vector<RawHit>> groups;
    for (const RawHit &hit : hits)
    {
        if (groups.empty() || hit.grid_index > groups.back().back().grid_index + 1)
        {
            groups.emplace_back();
        }
        groups.back().push_back(hit);
    }

    std::vector<PeakCandidate> candidates;
    for (const auto &group : groups)
    {
        const RawHit best = *std::max_element(
            group.begin(), group.end(), [&](const RawHit &a, const RawHit &b) {
                // Prefer LDOS series over ln T when both see the feature.
                const bool a_ldos = a.series < n_probes;
                const bool b_ldos = b.series < n_probes;
                if (a_ldos != b_ldos)
                {
                    return b_ldos;
                }
                return a.prominence < b.prominence;
            });

        auto objective = [&](double lambda) {
            auto sample = engine.eval(lambda);
            return best.series < n_probes ? sample.rho_rel[best.series] : sample.ln_t;
        };
        const std::size_t i = best.grid_index;
        const double lo = scan.lambda[std::min(i + 1, scan.lambda.size() - 1)];
        const double hi = scan.lambda[i > 0 ? i - 1 : 0];
        if (!(lo < hi))
        {
            continue;
        }
        const RefinedPeak refined =
            golden_max(objective, lo, hi, opts.refine_rel_tol * scan.lambda[i]);

        const double floor_value =
            (best.series < n_probes ? scan.rho_rel[best.series][i] : scan.ln_t[i]) -
            best.prominence;
        const double fwhm =
            half_max_width(objective, refined.x, refined.value, floor_value,
                           0.25 * (hi - lo), 0.6 * (window.lambda_max - window.lambda_min));

        PeakCandidate cand;
        cand.lambda_peak = refined.x;
        cand.fwhm_lambda = fwhm;
        cand.prominence = best.prominence;
        cand.from_transmission = best.series >= n_probes;

        // Fit from the probe where the refined peak is strongest.
        auto at_peak = engine.eval(refined.x);
        std::size_t best_probe = 0;
        for (std::size_t p = 1; p < n_probes; ++p)
        {
            if (at_peak.rho_rel[p] > at_peak.rho_rel[best_probe])
            {
                best_probe = p;
            }
        }
        cand.probe_index = best_probe;
        cand.probe_z = probe_z[best_probe];
        if (!cand.from_transmission)
        {
            cand.prominence = std::max(cand.prominence,
                                       at_peak.rho_rel[best_probe] - floor_value);
        }
        candidates.push_back(cand);
    }

    // Merge candidates within half a linewidth; keep the more prominent one.
    std::sort(candidates.begin(), candidates.end(),
              [](const PeakCandidate &a, const PeakCandidate &b) {
                  return a.lambda_peak < b.lambda_peak;
              });
    std::vector<PeakCandidate> merged;
    for (const PeakCandidate &cand : candidates)
    {
        if (!merged.empty())
        {
            PeakCandidate &prev = merged.back();
            const double threshold = opts.merge_linewidths *
                                     std::max(prev.fwhm_lambda, cand.fwhm_lambda);
            if (cand.lambda_peak - prev.lambda_peak < threshold)
            {
                if (cand.prominence > prev.prominence)
                {
                    prev = cand;
                }
                continue;
            }
        }
        merged.push_back(cand);
    }
    return merged;
}

// rho_0(z) = pi (kappa/2) rho_1d(z, omega_c): the Lorentzian amplitude under
// single-mode dominance at resonance, before any background handling.
inline std::vector<double> resonant_amplitude_profile(const Stack &stack, double omega_c,
                                                      double kappa,
                                                      const std::vector<double> &z_grid)
{
    const double lambda = 2.0 * constants::pi * constants::speed_of_light / omega_c;
    const auto line = ldos_line(stack, z_grid, lambda);
    std::vector<double> profile(line.size());
    for (std::size_t i = 0; i < line.size(); ++i)
    {
        profile[i] = constants::pi * 0.5 * kappa * line[i].rho_1d;
    }
    return profile;
}

struct NeighborMode
{
    double omega_c = 0.0;
    double kappa = 0.0;
    const std::vector<double> *profile = nullptr; // on the same z_grid
};

struct ProfileResult
{
    std::vector<double> rho0;   // clamped to >= 0, 1/m
    bool overlap_warning = false;
    double background_fraction = 0.0; // at the profile maximum
};

// Profile of one mode with the neighbor-mode background subtracted before
// scaling. Negative leftovers from background overshoot clamp to zero.
inline ProfileResult extract_profile(const Stack &stack, double omega_c, double kappa,
                                     const std::vector<double> &z_grid,
                                     const std::vector<NeighborMode> &neighbors = {})
{
    if (z_grid.empty())
    {
        throw ValidationError("extract_profile: empty z grid");
    }
    const double lambda = 2.0 * constants::pi * constants::speed_of_light / omega_c;
    const auto line = ldos_line(stack, z_grid, lambda);

    ProfileResult out;
    out.rho0.resize(z_grid.size());
    std::vector<double> background(z_grid.size(), 0.0);
    for (const NeighborMode &nb : neighbors)
    {
        const double weight = lorentzian(omega_c, nb.omega_c, nb.kappa);
        for (std::size_t i = 0; i < z_grid.size(); ++i)
        {
            background[i] += (*nb.profile)[i] * weight;
        }
    }

    std::size_t arg_raw = 0;
    for (std::size_t i = 0; i < z_grid.size(); ++i)
    {
        const double rho_total = line[i].rho_1d;
        const double rho_mode = rho_total - background[i];
        out.rho0[i] = std::max(constants::pi * 0.5 * kappa * rho_mode, 0.0);
        if (out.rho0[i] > out.rho0[arg_raw])
        {
            arg_raw = i;
        }
    }

    const double total_at_peak = line[arg_raw].rho_1d;
    if (total_at_peak > 0.0)
    {
        out.background_fraction = background[arg_raw] / total_at_peak;
        out.overlap_warning = out.background_fraction > 0.5;
    }
    return out;
}

// Retained modes: centered, in-window, well fitted, not overlap-flagged.
inline std::vector<QuasiMode> filter_modes(const std::vector<QuasiMode> &modes,
                                           double sample_length,
                                           const SpectralWindow &window,
                                           double center_fraction,
                                           double residual_bound)
{
    if (!(center_fraction > 0.0) || center_fraction > 1.0)
    {
        throw ValidationError("filter_modes: require 0 < center_fraction <= 1");
    }
    const double lo = 0.5 * (1.0 - center_fraction) * sample_length;
    const double hi = sample_length - lo;
    std::vector<QuasiMode> kept;
    for (const QuasiMode &mode : modes)
    {
        if (mode.z_peak < lo || mode.z_peak > hi)
        {
            continue;
        }
        if (!window.contains_omega(mode.omega_c))
        {
            continue;
        }
        if (mode.fit_residual >= residual_bound || mode.overlap_warning)
        {
            continue;
        }
        kept.push_back(mode);
    }
    return kept;
}

namespace detail
{
// Sample offsets (in linewidths) around a candidate: dense core, sparse tail.
inline std::vector<double> fit_offsets(std::size_t samples_per_fwhm)
{
    std::vector<double> offsets{0.0};
    const double core_step = 2.0 / static_cast<double>(samples_per_fwhm);
    for (double u = core_step; u <= 1.0 + 1e-12; u += core_step)
    {
        offsets.push_back(u);
        offsets.push_back(-u);
    }
    for (double u : {1.4, 1.8, 2.3, 3.0, 4.0, 5.5, 7.5, 10.0})
    {
        offsets.push_back(u);
        offsets.push_back(-u);
    }
    std::sort(offsets.begin(), offsets.end());
    return offsets;
}
} // namespace detail

// Full per-realization pipeline: detect -> cluster -> fit -> profiles.
inline ExtractionResult extract_modes(const Stack &stack, const SpectralWindow &window,
                                      const ExtractionOptions &opts, int realization_id)
{
    ExtractionResult result;
    const std::vector<double> probes =
        default_probes(stack.total_length(), opts.probe_count, opts.probe_span);
    std::vector<PeakCandidate> candidates = detect_peaks(stack, window, probes, opts);
    result.diagnostics.n_candidates = candidates.size();
    if (candidates.empty())
    {
        return result;
    }

    SpectralEngine engine(stack, probes);
    const double c = constants::speed_of_light;

    // Cluster candidates within joint_linewidths of each other (in omega).
    struct Fitted
    {
        LorentzTerm term;
        double residual;
        std::size_t probe_index;
    };
    std::vector<Fitted> fitted;

    std::vector<std::vector<const PeakCandidate *>> clusters;
    for (const PeakCandidate &cand : candidates) // sorted by lambda already
    {
        bool attach = false;
        if (!clusters.empty())
        {
            const PeakCandidate *prev = clusters.back().back();
            const double gap = cand.lambda_peak - prev->lambda_peak;
            const double reach = opts.joint_linewidths *
                                 std::max(prev->fwhm_lambda, cand.fwhm_lambda);
            attach = gap < reach;
        }
        if (!attach)
        {
            clusters.emplace_back();
        }
        clusters.back().push_back(&cand);
    }

    for (const auto &cluster : clusters)
    {
        // Fit at the probe where the cluster's strongest member peaks.
        const PeakCandidate *lead = *std::max_element(
            cluster.begin(), cluster.end(),
            [](const PeakCandidate *a, const PeakCandidate *b) {
                return a->prominence < b->prominence;
            });
        const std::size_t probe = lead->probe_index;

        const auto offsets = detail::fit_offsets(opts.samples_per_fwhm);
        std::vector<double> omegas;
        for (const PeakCandidate *cand : cluster)
        {
            const double omega_c = 2.0 * constants::pi * c / cand->lambda_peak;
            const double kappa =
                cand->fwhm_lambda * omega_c / cand->lambda_peak; // |domega| = w dlambda/lambda
            for (double u : offsets)
            {
                omegas.push_back(omega_c + u * kappa);
            }
        }
        std::sort(omegas.begin(), omegas.end());
        omegas.erase(std::unique(omegas.begin(), omegas.end()), omegas.end());

        std::vector<double> values;
        values.reserve(omegas.size());
        for (double om : omegas)
        {
            values.push_back(engine.eval(2.0 * constants::pi * c / om).rho_rel[probe]);
        }

        std::vector<LorentzTerm> initial;
        for (const PeakCandidate *cand : cluster)
        {
            const double omega_c = 2.0 * constants::pi * c / cand->lambda_peak;
            const double kappa = cand->fwhm_lambda * omega_c / cand->lambda_peak;
            const double peak_value = engine.eval(cand->lambda_peak).rho_rel[probe];
            LorentzTerm term;
            term.omega_c = omega_c;
            term.kappa = kappa;
            term.amplitude = std::max(peak_value, 0.5) * constants::pi * 0.5 * kappa;
            initial.push_back(term);
        }

        LorentzFitResult fit = fit_lorentzian_sum(omegas, values, initial);
        if (!fit.converged)
        {
            result.diagnostics.n_fit_failures += cluster.size();
            continue;
        }
        for (std::size_t i = 0; i < fit.terms.size(); ++i)
        {
            if (!(fit.terms[i].kappa > 0.0) || !(fit.terms[i].amplitude > 0.0))
            {
                ++result.diagnostics.n_fit_failures;
                continue;
            }
            fitted.push_back({fit.terms[i], fit.residual, probe});
        }
    }
    if (fitted.empty())
    {
        return result;
    }

    // z grid: one sample per layer boundary.
    auto z_grid = std::make_shared<std::vector<double>>(stack.edges());

    // First pass: raw profiles; second pass: neighbor-subtracted profiles.
    std::vector<std::vector<double>> raw(fitted.size());
    for (std::size_t i = 0; i < fitted.size(); ++i)
    {
        raw[i] = resonant_amplitude_profile(stack, fitted[i].term.omega_c,
                                            fitted[i].term.kappa, *z_grid);
    }

    const auto &layers = stack.layers();
    for (std::size_t i = 0; i < fitted.size(); ++i)
    {
        std::vector<NeighborMode> neighbors;
        for (std::size_t j = 0; j < fitted.size(); ++j)
        {
            if (j != i)
            {
                neighbors.push_back({fitted[j].term.omega_c, fitted[j].term.kappa, &raw[j]});
            }
        }
        ProfileResult prof = extract_profile(stack, fitted[i].term.omega_c,
                                             fitted[i].term.kappa, *z_grid, neighbors);

        QuasiMode mode;
        mode.omega_c = fitted[i].term.omega_c;
        mode.kappa = fitted[i].term.kappa;
        mode.q_factor = mode.omega_c / mode.kappa;
        mode.profile = std::move(prof.rho0);
        mode.z_grid = z_grid;
        mode.fit_residual = fitted[i].residual;
        mode.overlap_warning = prof.overlap_warning;
        mode.realization_id = realization_id;

        // Peak of n^2 rho_0 on the grid, then refined on a sub-layer grid.
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t k = 0; k < z_grid->size(); ++k)
        {
            const double z = (*z_grid)[k];
            const double n = layers[stack.layer_at(z)].n_real;
            const double v = n * n * mode.profile[k];
            if (v > best)
            {
                best = v;
                arg = k;
            }
        }
        double z_peak = (*z_grid)[arg];
        if (opts.profile_subsample > 1.0)
        {
            const double dz = layers[0].thickness / opts.profile_subsample;
            const double z_lo = std::max(0.0, z_peak - layers[0].thickness);
            const double z_hi = std::min(stack.total_length(), z_peak + layers[0].thickness);
            std::vector<double> fine;
            for (double z = z_lo; z <= z_hi + 1e-15; z += dz)
            {
                fine.push_back(std::min(z, stack.total_length()));
            }
            const auto fine_profile = resonant_amplitude_profile(
                stack, mode.omega_c, mode.kappa, fine);
            for (std::size_t k = 0; k < fine.size(); ++k)
            {
                const double n = layers[stack.layer_at(fine[k])].n_real;
                // Background varies slowly on the layer scale; reuse the
                // mode's own coarse-grid correction at the peak.
                const double corrected = std::max(
                    fine_profile[k] - (raw[i][arg] - mode.profile[arg]), 0.0);
                const double v = n * n * corrected;
                if (v > best)
                {
                    best = v;
                    z_peak = fine[k];
                }
            }
        }
        mode.z_peak = z_peak;
        mode.peak_n2rho = best;
        result.modes.push_back(std::move(mode));
    }
    result.diagnostics.n_modes = result.modes.size();
    return result;
}
} // namespace randcav

#endif // RANDCAV_EXTRACTION_HPP
