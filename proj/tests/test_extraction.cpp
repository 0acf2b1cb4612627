#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "randcav/extraction.hpp"
#include "randcav/ldos.hpp"
#include "randcav/peaks.hpp"
#include "randcav/stack.hpp"

using namespace randcav;

namespace
{
oracles::FabryPerot test_cavity()
{
    oracles::FabryPerot fp;
    fp.n_embed = 1.0;
    fp.n_mirror = 6.0;
    fp.d_mirror = 975e-9 / (4.0 * fp.n_mirror);
    fp.n_cavity = 1.0;
    fp.d_cavity = 61.0 * 975e-9 / 2.0;
    return fp;
}

Stack paper_stack(std::uint64_t index)
{
    DisorderSpec spec;
    spec.n_mean = 3.45;
    spec.delta_n = 0.70;
    spec.layer_thickness = 10e-9;
    spec.sample_length = 100e-6;
    return generate_stack(spec, 424242, index);
}
} // namespace

TEST_CASE("find_series_peaks: prominence screening", "[peaks]")
{
    std::vector<double> series{1, 1, 8, 1, 1, 2, 1, 1, 12, 1, 1};
    auto peaks = find_series_peaks(series, 5.0);
    REQUIRE(peaks.size() == 2);
    REQUIRE(peaks[0].index == 2);
    REQUIRE(peaks[1].index == 8);
    REQUIRE(peaks[0].prominence == Catch::Approx(7.0));

    // The small bump survives only with a lower threshold.
    REQUIRE(find_series_peaks(series, 0.5).size() == 3);
    REQUIRE(find_series_peaks({1.0, 2.0}, 0.0).empty());
}

TEST_CASE("detection completeness: K planted Lorentzians give K candidates", "[peaks][property]")
{
    // Spec'd property: separation > 3 kappa, amplitude > 10x threshold.
    SplitMix64 rng(99);
    for (int trial = 0; trial < 20; ++trial)
    {
        const std::size_t k_modes = 1 + static_cast<std::size_t>(rng.next_u64() % 5);
        std::vector<LorentzTerm> terms;
        const double kappa = 2e10;
        double omega = 1.930e15;
        for (std::size_t i = 0; i < k_modes; ++i)
        {
            omega += (4.0 + 4.0 * rng.next_unit()) * kappa; // separation > 3 kappa
            LorentzTerm t;
            t.omega_c = omega;
            t.kappa = kappa * (0.5 + rng.next_unit());
            t.amplitude = (60.0 + 100.0 * rng.next_unit()) * constants::pi * 0.5 * t.kappa;
            terms.push_back(t); // peak height = 2 A / (pi kappa) >= 60 > 10 * threshold
        }
        std::vector<double> series;
        const double omega_lo = 1.9295e15;
        const double omega_hi = omega + 20.0 * kappa;
        const std::size_t count = 4000;
        for (std::size_t i = 0; i < count; ++i)
        {
            const double om = omega_lo + (omega_hi - omega_lo) * static_cast<double>(i) /
                                             static_cast<double>(count - 1);
            series.push_back(lorentzian_sum(terms, om));
        }
        const auto peaks = find_series_peaks(series, 5.0);
        REQUIRE(peaks.size() == k_modes);
    }
}

TEST_CASE("golden_max and half_max_width recover a Lorentzian", "[peaks]")
{
    const double omega_c = 1.932e15;
    const double kappa = 3.7e9;
    auto f = [&](double om) { return 100.0 * lorentzian(om, omega_c, kappa) /
                                     lorentzian(omega_c, omega_c, kappa); };
    const auto refined = golden_max(f, omega_c - 5e9, omega_c + 4e9, 1.0);
    REQUIRE(std::abs(refined.x - omega_c) < 10.0);
    const double width = half_max_width(f, refined.x, refined.value, 0.0, 1e9, 1e14);
    REQUIRE(width == Catch::Approx(kappa).epsilon(1e-5));
}

TEST_CASE("detect_peaks: homogeneous stack yields nothing", "[extraction]")
{
    std::vector<Layer> layers(2000, Layer{3.45, 0.0, 10e-9});
    const Stack stack(layers, 3.45);
    const auto candidates =
        detect_peaks(stack, SpectralWindow{}, default_probes(stack.total_length(), 8, 0.7));
    REQUIRE(candidates.empty());
}

TEST_CASE("detect_peaks: Fabry-Perot resonance within 1 pm of the oracle", "[extraction][oracle]")
{
    const auto fp = test_cavity();
    const Stack stack = fp.make_stack();
    const double expected = fp.resonance_lambda(970e-9, 980e-9);

    const double z_center = fp.d_mirror + 0.5 * fp.d_cavity;
    const auto candidates = detect_peaks(stack, SpectralWindow{}, {z_center});
    REQUIRE(candidates.size() == 1);
    REQUIRE(std::abs(candidates[0].lambda_peak - expected) < 1e-12);
    REQUIRE(candidates[0].prominence > 5.0);
}

TEST_CASE("fit_lorentzian_sum: exact recovery of a noise-free Lorentzian", "[modefit]")
{
    const double omega_c = 1.932e15;
    const double q = 5e4;
    const double kappa = omega_c / q;
    const double amplitude = 3.2e12;

    std::vector<double> omegas, values;
    for (int i = -40; i <= 40; ++i)
    {
        const double om = omega_c + kappa * 0.25 * i;
        omegas.push_back(om);
        values.push_back(amplitude * lorentzian(om, omega_c, kappa));
    }
    LorentzTerm init;
    init.omega_c = omega_c * (1.0 + 2e-7); // off by ~kappa/2
    init.kappa = kappa * 1.4;
    init.amplitude = amplitude * 0.6;
    const auto fit = fit_lorentzian_sum(omegas, values, {init});
    REQUIRE(fit.converged);
    REQUIRE(fit.terms.size() == 1);
    REQUIRE(fit.terms[0].omega_c == Catch::Approx(omega_c).epsilon(1e-9));
    REQUIRE(fit.terms[0].kappa == Catch::Approx(kappa).epsilon(1e-6));
    REQUIRE(fit.terms[0].amplitude == Catch::Approx(amplitude).epsilon(1e-6));
    REQUIRE(fit.residual < 1e-8);
}

TEST_CASE("fit_lorentzian_sum: two modes 5 kappa apart, Q within 0.1%", "[modefit][oracle]")
{
    const double omega_1 = 1.930e15;
    const double kappa_1 = 4e10;
    const double omega_2 = omega_1 + 5.0 * kappa_1;
    const double kappa_2 = 2.5e10;
    std::vector<LorentzTerm> truth{{8e12, omega_1, kappa_1}, {5e12, omega_2, kappa_2}};

    std::vector<double> omegas, values;
    for (int i = -80; i <= 160; ++i)
    {
        const double om = omega_1 + kappa_1 * 0.125 * i;
        omegas.push_back(om);
        values.push_back(lorentzian_sum(truth, om));
    }
    std::vector<LorentzTerm> init{{6e12, omega_1 + 0.2 * kappa_1, 1.3 * kappa_1},
                                  {6e12, omega_2 - 0.1 * kappa_2, 0.8 * kappa_2}};
    const auto fit = fit_lorentzian_sum(omegas, values, init);
    REQUIRE(fit.converged);
    const double q1_true = omega_1 / kappa_1;
    const double q2_true = omega_2 / kappa_2;
    REQUIRE(fit.terms[0].omega_c / fit.terms[0].kappa == Catch::Approx(q1_true).epsilon(1e-3));
    REQUIRE(fit.terms[1].omega_c / fit.terms[1].kappa == Catch::Approx(q2_true).epsilon(1e-3));
}

TEST_CASE("fit_lorentzian_sum: flat spectrum with no candidates", "[modefit]")
{
    std::vector<double> omegas{1.0, 2.0, 3.0};
    std::vector<double> values{0.0, 0.0, 0.0};
    const auto fit = fit_lorentzian_sum(omegas, values, {});
    REQUIRE(fit.converged);
    REQUIRE(fit.terms.empty());
    REQUIRE(fit.residual == 0.0);
}

TEST_CASE("fit round-trip: synthesized spectra refit to the same parameters", "[modefit][property]")
{
    SplitMix64 rng(1234);
    for (int trial = 0; trial < 10; ++trial)
    {
        const std::size_t k_modes = 1 + static_cast<std::size_t>(rng.next_u64() % 3);
        std::vector<LorentzTerm> truth;
        double omega = 1.925e15;
        for (std::size_t i = 0; i < k_modes; ++i)
        {
            LorentzTerm t;
            omega += (6.0 + 10.0 * rng.next_unit()) * 3e10;
            t.omega_c = omega;
            t.kappa = 3e10 * (0.3 + rng.next_unit());
            t.amplitude = 1e12 * (0.5 + rng.next_unit());
            truth.push_back(t);
        }
        std::vector<double> omegas, values;
        for (const LorentzTerm &t : truth)
        {
            for (int i = -30; i <= 30; ++i)
            {
                omegas.push_back(t.omega_c + t.kappa * 0.3 * i);
            }
        }
        std::sort(omegas.begin(), omegas.end());
        for (double om : omegas)
        {
            values.push_back(lorentzian_sum(truth, om));
        }
        std::vector<LorentzTerm> init = truth;
        for (LorentzTerm &t : init)
        {
            t.amplitude *= 0.8;
            t.kappa *= 1.15;
        }
        const auto fit = fit_lorentzian_sum(omegas, values, init);
        REQUIRE(fit.converged);
        for (std::size_t i = 0; i < k_modes; ++i)
        {
            REQUIRE(fit.terms[i].amplitude == Catch::Approx(truth[i].amplitude).epsilon(1e-6));
            REQUIRE(fit.terms[i].omega_c == Catch::Approx(truth[i].omega_c).epsilon(1e-9));
            REQUIRE(fit.terms[i].kappa == Catch::Approx(truth[i].kappa).epsilon(1e-6));
        }
    }
}

TEST_CASE("extract_profile: isolated synthetic mode inverts exactly", "[extraction]")
{
    // For a single mode, rho_0 = pi (kappa/2) rho_1d(omega_c) by construction.
    const auto fp = test_cavity();
    const Stack stack = fp.make_stack();
    const double lambda_res = fp.resonance_lambda(970e-9, 980e-9);
    const double omega_c = 2.0 * constants::pi * constants::speed_of_light / lambda_res;
    const double kappa = 1e11; // scale drops out of the single-mode identity

    std::vector<double> z_grid;
    for (int i = 0; i <= 400; ++i)
    {
        z_grid.push_back(stack.total_length() * i / 400.0);
    }
    const auto raw = resonant_amplitude_profile(stack, omega_c, kappa, z_grid);
    const auto prof = extract_profile(stack, omega_c, kappa, z_grid);
    REQUIRE_FALSE(prof.overlap_warning);
    for (std::size_t i = 0; i < z_grid.size(); ++i)
    {
        REQUIRE(prof.rho0[i] == Catch::Approx(raw[i]).epsilon(1e-12).margin(1e-30));
        REQUIRE(prof.rho0[i] >= 0.0);
    }
}

TEST_CASE("extract_profile: Fabry-Perot profile peaks at the cavity center", "[extraction][oracle]")
{
    const auto fp = test_cavity();
    const Stack stack = fp.make_stack();
    SpectralWindow window;
    ExtractionOptions opts;
    opts.probe_count = 3;
    opts.probe_span = 0.5;
    const auto extraction = extract_modes(stack, window, opts, 0);
    REQUIRE(extraction.modes.size() == 1);
    const QuasiMode &mode = extraction.modes[0];

    // Shape comparison against the analytic two-interface LDOS at resonance.
    const double lambda_res = 2.0 * constants::pi * constants::speed_of_light / mode.omega_c;
    const double z_center = fp.d_mirror + 0.5 * fp.d_cavity;
    REQUIRE(std::abs(mode.z_peak - z_center) < 0.02 * fp.d_cavity);

    const double mode_max = mode.profile_at(mode.z_peak);
    REQUIRE(mode_max > 0.0);
    for (double frac : {0.25, 0.4, 0.6, 0.75})
    {
        const double z = fp.d_mirror + frac * fp.d_cavity;
        const double zeta = z - fp.d_mirror;
        const double shape_ref = fp.rho_rel(zeta, lambda_res) /
                                 fp.rho_rel(0.5 * fp.d_cavity, lambda_res);
        const double shape = mode.profile_at(z) / mode_max;
        REQUIRE(shape == Catch::Approx(shape_ref).margin(0.01));
    }
}

TEST_CASE("background subtraction separates two synthetic modes", "[extraction][oracle]")
{
    std::vector<double> z_grid;
    for (int i = 0; i <= 100; ++i)
    {
        z_grid.push_back(i * 1e-7);
    }
    std::vector<double> profile_a(z_grid.size()), profile_b(z_grid.size());
    for (std::size_t i = 0; i < z_grid.size(); ++i)
    {
        profile_a[i] = 5e5 * std::exp(-std::abs(z_grid[i] - 2e-6) / 1e-6);
        profile_b[i] = 3e5 * std::exp(-std::abs(z_grid[i] - 8e-6) / 1e-6);
    }
    const double omega_a = 1.930e15, kappa_a = 2e10;
    const double omega_b = 1.934e15, kappa_b = 3e10;

    // Synthetic two-term LDOS evaluated at omega_a, then inverted for mode A
    // with mode B subtracted as the neighbor term.
    const double w_aa = lorentzian(omega_a, omega_a, kappa_a);
    const double w_ba = lorentzian(omega_a, omega_b, kappa_b);
    for (std::size_t i = 0; i < z_grid.size(); ++i)
    {
        const double rho_total = profile_a[i] * w_aa + profile_b[i] * w_ba;
        const double inverted = (rho_total - profile_b[i] * w_ba) / w_aa;
        REQUIRE(inverted == Catch::Approx(profile_a[i]).epsilon(1e-9).margin(1e-6));
    }
    // The cross-talk of mode B at mode A's peak is tiny versus mode A itself.
    REQUIRE(profile_b[20] * w_ba < 1e-3 * profile_a[20] * w_aa);
}

TEST_CASE("filter_modes: center window, spectral window, residual, flags", "[extraction]")
{
    auto z_grid = std::make_shared<std::vector<double>>(std::vector<double>{0.0, 100e-6});
    auto make_mode = [&](double z_peak, double lambda, double residual, bool flag) {
        QuasiMode m;
        m.omega_c = 2.0 * constants::pi * constants::speed_of_light / lambda;
        m.kappa = m.omega_c / 1e4;
        m.q_factor = 1e4;
        m.profile = {1.0, 1.0};
        m.z_grid = z_grid;
        m.z_peak = z_peak;
        m.fit_residual = residual;
        m.overlap_warning = flag;
        return m;
    };
    const double L = 100e-6;
    SpectralWindow window;
    std::vector<QuasiMode> modes;
    modes.push_back(make_mode(0.02 * L, 975e-9, 0.001, false)); // outside central half
    modes.push_back(make_mode(0.50 * L, 975e-9, 0.001, false)); // kept
    modes.push_back(make_mode(0.60 * L, 990e-9, 0.001, false)); // outside window
    modes.push_back(make_mode(0.55 * L, 975e-9, 0.500, false)); // bad residual
    modes.push_back(make_mode(0.45 * L, 975e-9, 0.001, true));  // overlap flag

    const auto kept = filter_modes(modes, L, window, 0.5, 0.05);
    REQUIRE(kept.size() == 1);
    REQUIRE(kept[0].z_peak == Catch::Approx(0.5 * L));
    REQUIRE_THROWS_AS(filter_modes(modes, L, window, 0.0, 0.05), ValidationError);
}

TEST_CASE("extraction is deterministic", "[extraction]")
{
    const Stack stack = paper_stack(5);
    ExtractionOptions opts;
    opts.coarse_samples = 1500; // keep the repeated run affordable
    const auto a = extract_modes(stack, SpectralWindow{}, opts, 5);
    const auto b = extract_modes(stack, SpectralWindow{}, opts, 5);
    REQUIRE(a.modes.size() == b.modes.size());
    for (std::size_t i = 0; i < a.modes.size(); ++i)
    {
        REQUIRE(a.modes[i].omega_c == b.modes[i].omega_c);
        REQUIRE(a.modes[i].kappa == b.modes[i].kappa);
        REQUIRE(a.modes[i].z_peak == b.modes[i].z_peak);
        REQUIRE(a.modes[i].q_factor * a.modes[i].kappa ==
                Catch::Approx(a.modes[i].omega_c).epsilon(1e-12));
    }
}

TEST_CASE("extraction on disordered stacks finds order-10 modes", "[extraction][slow]")
{
    // Paper-scale check: ~60000 modes / 8000 realizations ~ 7.5 per window.
    std::size_t total = 0;
    const int n_real = 4;
    for (int i = 0; i < n_real; ++i)
    {
        const Stack stack = paper_stack(static_cast<std::uint64_t>(i));
        const auto extraction = extract_modes(stack, SpectralWindow{}, ExtractionOptions{}, i);
        total += extraction.modes.size();
    }
    const double mean = static_cast<double>(total) / n_real;
    REQUIRE(mean > 2.0);
    REQUIRE(mean < 25.0);
}
