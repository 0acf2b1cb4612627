#ifndef RANDCAV_LDOS_HPP
#define RANDCAV_LDOS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <vector>

#include "randcav/constants.hpp"
#include "randcav/errors.hpp"
#include "randcav/scatter.hpp"
#include "randcav/stack.hpp"

namespace randcav
{
// One LDOS evaluation point. rho_1d is the 1D electric LDOS in s/m
// (states per length per angular frequency); rho_rel is rho_1d divided by
// the homogeneous-medium value 1/(pi c n_embed).
struct LdosSample
{
    double z = 0.0;      // meters
    double lambda = 0.0; // meters
    double rho_1d = 0.0;
    double rho_rel = 0.0;
};

struct SpectralWindow
{
    double lambda_min = 970e-9;
    double lambda_max = 980e-9;

    double center() const { return 0.5 * (lambda_min + lambda_max); }
    double omega_center() const
    {
        return 2.0 * constants::pi * constants::speed_of_light / center();
    }
    bool contains_lambda(double lam) const { return lam >= lambda_min && lam <= lambda_max; }
    bool contains_omega(double omega) const
    {
        const double lam = 2.0 * constants::pi * constants::speed_of_light / omega;
        return contains_lambda(lam);
    }
};

// rho_rel sampled on a (z, lambda) grid; values[iz][il].
struct LdosSpectrum
{
    std::vector<double> z_grid;
    std::vector<double> lambda_grid;
    std::vector<std::vector<double>> values;
};

namespace detail
{
// Looking-left (A, at layer left edges) and looking-right (U, at layer right
// edges) reflection coefficients of the structure on either side of every
// layer, plus exp(2 i k_m d_m). Everything the diagonal Green's function
// needs, from one O(N) double sweep.
struct ReflectionProfiles
{
    std::vector<complexd> looking_left;
    std::vector<complexd> looking_right;
    std::vector<complexd> phase2;
    double k0 = 0.0;
};

inline void projective_renorm(complexd &p, complexd &q)
{
    const double scale = std::abs(q.real()) + std::abs(q.imag());
    if (scale > 1e140)
    {
        p *= 1e-140;
        q *= 1e-140;
    }
}

inline ReflectionProfiles reflection_profiles(const Stack &stack, double lambda)
{
    if (!(lambda > 0.0))
    {
        throw ValidationError("ldos: lambda must be > 0");
    }
    const auto &layers = stack.layers();
    const std::size_t n_layers = layers.size();
    const double k0 = 2.0 * constants::pi / lambda;
    const complexd n_embed(stack.n_embed(), 0.0);

    ReflectionProfiles prof;
    prof.k0 = k0;
    prof.looking_left.resize(n_layers);
    prof.looking_right.resize(n_layers);
    prof.phase2.resize(n_layers);
    for (std::size_t m = 0; m < n_layers; ++m)
    {
        prof.phase2[m] =
            std::exp(complexd(0.0, 2.0) * layers[m].index() * (k0 * layers[m].thickness));
    }

    // Looking-left reflection, carried as p/q so the sweep never divides.
    complexd p(0.0, 0.0), q(1.0, 0.0);
    complexd n_left = n_embed;
    for (std::size_t m = 0; m < n_layers; ++m)
    {
        const complexd r = fresnel_r(layers[m].index(), n_left);
        const complexd pa = p + r * q;
        const complexd qa = q + r * p;
        prof.looking_left[m] = pa / qa;
        p = pa * prof.phase2[m];
        q = qa;
        projective_renorm(p, q);
        n_left = layers[m].index();
    }

    // Looking-right reflection.
    p = complexd(0.0, 0.0);
    q = complexd(1.0, 0.0);
    complexd n_right = n_embed;
    for (std::size_t mi = n_layers; mi-- > 0;)
    {
        const complexd r = fresnel_r(layers[mi].index(), n_right);
        const complexd pa = p + r * q;
        const complexd qa = q + r * p;
        prof.looking_right[mi] = pa / qa;
        p = pa * prof.phase2[mi];
        q = qa;
        projective_renorm(p, q);
        n_right = layers[mi].index();
    }
    return prof;
}

// Outgoing-wave Green's function of psi'' + k0^2 n^2 psi = -delta on the
// diagonal: G(z,z) = i (1 + rL)(1 + rR) / (2 k (1 - rL rR)).
inline complexd green_diag(complexd r_left, complexd r_right, complexd k)
{
    const complexd denom = 1.0 - r_left * r_right;
    if (!(std::abs(denom.real()) + std::abs(denom.imag()) >= 1e-300))
    {
        throw DegenerateError("ldos: Wronskian magnitude below 1e-300");
    }
    return complexd(0.0, 1.0) * (1.0 + r_left) * (1.0 + r_right) / (2.0 * k * denom);
}

inline double rho_rel_from_green(complexd g, double k0, double n_ref)
{
    return 2.0 * k0 * n_ref * g.imag();
}
} // namespace detail

// 1D electric LDOS along z at one vacuum wavelength:
// rho_1d(z) = (2 w / (pi c^2)) Im G(z,z;w). Homogeneous limit 1/(pi c n),
// i.e. rho_rel = 1 everywhere.
inline std::vector<LdosSample> ldos_line(const Stack &stack,
                                         const std::vector<double> &z_grid,
                                         double lambda)
{
    const auto prof = detail::reflection_profiles(stack, lambda);
    const auto &layers = stack.layers();
    const auto &edges = stack.edges();
    const double k0 = prof.k0;
    const double n_ref = stack.n_embed();

    std::vector<LdosSample> samples;
    samples.reserve(z_grid.size());
    for (double z : z_grid)
    {
        const std::size_t m = stack.layer_at(z);
        const double zeta = z - edges[m];
        const complexd k_m = layers[m].index() * k0;
        const complexd r_left =
            prof.looking_left[m] * std::exp(complexd(0.0, 2.0) * k_m * zeta);
        const complexd r_right =
            prof.looking_right[m] *
            std::exp(complexd(0.0, 2.0) * k_m * (layers[m].thickness - zeta));
        const complexd g = detail::green_diag(r_left, r_right, k_m);

        LdosSample s;
        s.z = z;
        s.lambda = lambda;
        s.rho_rel = detail::rho_rel_from_green(g, k0, n_ref);
        s.rho_1d = s.rho_rel / (constants::pi * constants::speed_of_light * n_ref);
        if (!std::isfinite(s.rho_1d))
        {
            throw NumericError("ldos_line: non-finite LDOS value");
        }
        samples.push_back(s);
    }
    return samples;
}

// rho_rel on the full (z, lambda) grid; one reflection sweep per wavelength.
inline LdosSpectrum ldos_map(const Stack &stack,
                             const std::vector<double> &z_grid,
                             const std::vector<double> &lambda_grid)
{
    if (z_grid.empty() || lambda_grid.empty())
    {
        throw ValidationError("ldos_map: grids must be non-empty");
    }
    if (!std::is_sorted(z_grid.begin(), z_grid.end()) ||
        !std::is_sorted(lambda_grid.begin(), lambda_grid.end()))
    {
        throw ValidationError("ldos_map: grids must be sorted ascending");
    }

    LdosSpectrum spec;
    spec.z_grid = z_grid;
    spec.lambda_grid = lambda_grid;
    spec.values.assign(z_grid.size(), std::vector<double>(lambda_grid.size(), 0.0));
    for (std::size_t il = 0; il < lambda_grid.size(); ++il)
    {
        const auto line = ldos_line(stack, z_grid, lambda_grid[il]);
        for (std::size_t iz = 0; iz < z_grid.size(); ++iz)
        {
            spec.values[iz][il] = line[iz].rho_rel;
        }
    }
    return spec;
}

// Fast spectral sampler for one stack: ln T plus rho_rel at a fixed probe
// set. Point evaluations use exact trigonometry; uniform-frequency scans of
// lossless stacks advance per-layer phase factors by precomputed rotors so
// the only trig left in the hot loop is one sincos per probe.
class SpectralEngine
{
public:
    SpectralEngine(const Stack &stack, std::vector<double> probe_z)
        : stack_(&stack), probe_z_(std::move(probe_z))
    {
        const auto &layers = stack.layers();
        const std::size_t n_layers = layers.size();
        n_.resize(n_layers);
        nd2_.resize(n_layers);
        lossless_ = true;
        for (std::size_t m = 0; m < n_layers; ++m)
        {
            n_[m] = layers[m].index();
            nd2_[m] = 2.0 * layers[m].index() * layers[m].thickness;
            if (layers[m].n_imag != 0.0)
            {
                lossless_ = false;
            }
        }
        r_if_.resize(n_layers + 1);
        log_t_sum_ = 0.0;
        complexd n_prev(stack.n_embed(), 0.0);
        for (std::size_t m = 0; m < n_layers; ++m)
        {
            r_if_[m] = detail::fresnel_r(n_prev, n_[m]);
            log_t_sum_ += std::log(std::abs(detail::fresnel_t(n_prev, n_[m])));
            n_prev = n_[m];
        }
        const complexd n_embed(stack.n_embed(), 0.0);
        r_if_[n_layers] = detail::fresnel_r(n_prev, n_embed);
        log_t_sum_ += std::log(std::abs(detail::fresnel_t(n_prev, n_embed)));

        const std::size_t n_probes = probe_z_.size();
        probe_layer_.resize(n_probes);
        probe_zeta_.resize(n_probes);
        for (std::size_t i = 0; i < n_probes; ++i)
        {
            probe_layer_[i] = stack.layer_at(probe_z_[i]);
            probe_zeta_[i] = probe_z_[i] - stack.edges()[probe_layer_[i]];
        }
        by_layer_.resize(n_probes);
        std::iota(by_layer_.begin(), by_layer_.end(), std::size_t{0});
        std::sort(by_layer_.begin(), by_layer_.end(), [this](std::size_t a, std::size_t b) {
            return probe_layer_[a] < probe_layer_[b];
        });

        phase2_.resize(n_layers);
        left_at_probe_.resize(n_probes);
        right_at_probe_.resize(n_probes);
    }

    std::size_t probe_count() const { return probe_z_.size(); }
    const std::vector<double> &probe_z() const { return probe_z_; }
    const Stack &stack() const { return *stack_; }

    struct Sample
    {
        double lambda = 0.0;
        double ln_t = 0.0;
        std::vector<double> rho_rel; // one per probe
    };

    // Exact evaluation at an arbitrary wavelength.
    Sample eval(double lambda)
    {
        if (!(lambda > 0.0))
        {
            throw ValidationError("SpectralEngine::eval: lambda must be > 0");
        }
        const double k0 = 2.0 * constants::pi / lambda;
        for (std::size_t m = 0; m < phase2_.size(); ++m)
        {
            phase2_[m] = std::exp(complexd(0.0, 1.0) * nd2_[m] * k0);
        }
        return eval_with_phases(lambda, k0);
    }

    double ln_t_at(double lambda) { return eval(lambda).ln_t; }

    struct Scan
    {
        std::vector<double> lambda; // descending
        std::vector<double> omega;  // ascending
        std::vector<double> ln_t;
        std::vector<std::vector<double>> rho_rel; // [probe][sample]
    };

    // `count` samples uniform in angular frequency across the window.
    Scan scan(const SpectralWindow &window, std::size_t count)
    {
        if (count < 2)
        {
            throw ValidationError("SpectralEngine::scan: need at least 2 samples");
        }
        const double c = constants::speed_of_light;
        const double omega_lo = 2.0 * constants::pi * c / window.lambda_max;
        const double omega_hi = 2.0 * constants::pi * c / window.lambda_min;
        const double step = (omega_hi - omega_lo) / static_cast<double>(count - 1);

        Scan out;
        out.lambda.resize(count);
        out.omega.resize(count);
        out.ln_t.resize(count);
        out.rho_rel.assign(probe_z_.size(), std::vector<double>(count, 0.0));

        std::vector<complexd> rotor_step;
        const bool incremental = lossless_;
        if (incremental)
        {
            rotor_step.resize(nd2_.size());
            const double k0_start = omega_lo / c;
            const double dk = step / c;
            for (std::size_t m = 0; m < nd2_.size(); ++m)
            {
                const double a = nd2_[m].real();
                phase2_[m] = std::polar(1.0, a * k0_start);
                rotor_step[m] = std::polar(1.0, a * dk);
            }
        }
        for (std::size_t i = 0; i < count; ++i)
        {
            const double omega = omega_lo + step * static_cast<double>(i);
            const double lambda = 2.0 * constants::pi * c / omega;
            const Sample s = incremental ? eval_with_phases(lambda, omega / c) : eval(lambda);
            out.omega[i] = omega;
            out.lambda[i] = lambda;
            out.ln_t[i] = s.ln_t;
            for (std::size_t pidx = 0; pidx < probe_z_.size(); ++pidx)
            {
                out.rho_rel[pidx][i] = s.rho_rel[pidx];
            }
            if (incremental && i + 1 < count)
            {
                complexd *ph = phase2_.data();
                const complexd *rs = rotor_step.data();
                for (std::size_t m = 0; m < phase2_.size(); ++m)
                {
                    ph[m] *= rs[m];
                }
            }
        }
        return out;
    }

private:
    Sample eval_with_phases(double lambda, double k0)
    {
        const std::size_t n_layers = n_.size();
        const std::size_t n_probes = probe_z_.size();

        // Forward sweep. q telescopes the cascade denominators, so the same
        // pass yields ln T; probes pick up the looking-left reflection when
        // their layer is reached.
        complexd p(0.0, 0.0), q(1.0, 0.0);
        double log_scale = 0.0;
        std::size_t ps = 0;
        const complexd *phase = phase2_.data();
        for (std::size_t m = 0; m < n_layers; ++m)
        {
            const complexd r = -r_if_[m];
            const complexd pa = p + r * q;
            const complexd qa = q + r * p;
            while (ps < n_probes && probe_layer_[by_layer_[ps]] == m)
            {
                left_at_probe_[by_layer_[ps]] = pa / qa;
                ++ps;
            }
            p = pa * phase[m];
            q = qa;
            if (std::abs(q.real()) + std::abs(q.imag()) > 1e140)
            {
                p *= 1e-140;
                q *= 1e-140;
                log_scale += 140.0 * 2.302585092994046; // ln(1e140)
            }
        }
        const complexd q_final = q - r_if_[n_layers] * p;
        const double ln_t = 2.0 * (log_t_sum_ - std::log(std::abs(q_final)) - log_scale);
        if (!std::isfinite(ln_t))
        {
            throw NumericError("SpectralEngine: non-finite ln T in cascade");
        }

        // Backward sweep for the looking-right reflection.
        p = complexd(0.0, 0.0);
        q = complexd(1.0, 0.0);
        std::size_t pb = n_probes;
        for (std::size_t mi = n_layers; mi-- > 0;)
        {
            const complexd r = r_if_[mi + 1];
            const complexd pa = p + r * q;
            const complexd qa = q + r * p;
            while (pb > 0 && probe_layer_[by_layer_[pb - 1]] == mi)
            {
                right_at_probe_[by_layer_[pb - 1]] = pa / qa;
                --pb;
            }
            p = pa * phase[mi];
            q = qa;
            if (std::abs(q.real()) + std::abs(q.imag()) > 1e140)
            {
                p *= 1e-140;
                q *= 1e-140;
            }
        }

        Sample s;
        s.lambda = lambda;
        s.ln_t = ln_t;
        s.rho_rel.resize(n_probes);
        const double n_ref = stack_->n_embed();
        const auto &layers = stack_->layers();
        for (std::size_t i = 0; i < n_probes; ++i)
        {
            const std::size_t m = probe_layer_[i];
            const complexd k_m = n_[m] * k0;
            const complexd r_left =
                left_at_probe_[i] * std::exp(complexd(0.0, 2.0) * k_m * probe_zeta_[i]);
            const complexd r_right =
                right_at_probe_[i] *
                std::exp(complexd(0.0, 2.0) * k_m * (layers[m].thickness - probe_zeta_[i]));
            const complexd g = detail::green_diag(r_left, r_right, k_m);
            s.rho_rel[i] = detail::rho_rel_from_green(g, k0, n_ref);
        }
        return s;
    }

    const Stack *stack_;
    std::vector<double> probe_z_;
    std::vector<complexd> n_;
    std::vector<complexd> nd2_; // 2 n_m d_m
    std::vector<complexd> r_if_;
    double log_t_sum_ = 0.0;
    bool lossless_ = true;
    std::vector<std::size_t> probe_layer_;
    std::vector<double> probe_zeta_;
    std::vector<std::size_t> by_layer_;
    std::vector<complexd> phase2_;
    std::vector<complexd> left_at_probe_;
    std::vector<complexd> right_at_probe_;
};
} // namespace randcav

#endif // RANDCAV_LDOS_HPP
