#ifndef RANDCAV_SCATTER_HPP
#define RANDCAV_SCATTER_HPP

#include <cmath>
#include <complex>
#include <vector>

#include "randcav/constants.hpp"
#include "randcav/errors.hpp"
#include "randcav/stack.hpp"

namespace randcav
{
using complexd = std::complex<double>;

// 2x2 complex matrix, row-major.
struct Mat2c
{
    complexd a11{1.0, 0.0}, a12{0.0, 0.0};
    complexd a21{0.0, 0.0}, a22{1.0, 0.0};

    complexd det() const { return a11 * a22 - a12 * a21; }

    Mat2c operator*(const Mat2c &rhs) const
    {
        Mat2c m;
        m.a11 = a11 * rhs.a11 + a12 * rhs.a21;
        m.a12 = a11 * rhs.a12 + a12 * rhs.a22;
        m.a21 = a21 * rhs.a11 + a22 * rhs.a21;
        m.a22 = a21 * rhs.a12 + a22 * rhs.a22;
        return m;
    }
};

// Transfer of (psi, psi'/k0) across a homogeneous slab of index n and
// thickness d at vacuum wavelength lambda. Unimodular by construction;
// kept for analysis and cross-checks -- the production recursions below
// never multiply raw transfer matrices.
inline Mat2c propagation_step(complexd n, double d, double lambda)
{
    if (!(d >= 0.0) || !(lambda > 0.0) || !(n.real() > 0.0) ||
        !std::isfinite(n.real()) || !std::isfinite(n.imag()) || !std::isfinite(d))
    {
        throw NumericError("propagation_step: non-finite or out-of-domain input");
    }
    const double k0 = 2.0 * constants::pi / lambda;
    const complexd kd = n * (k0 * d);
    const complexd c = std::cos(kd);
    const complexd s = std::sin(kd);
    Mat2c m;
    m.a11 = c;
    m.a12 = s / n;
    m.a21 = -n * s;
    m.a22 = c;
    return m;
}

// Plane-wave response of a finite stack (equal entrance/exit media).
struct ScatterResult
{
    complexd r{0.0, 0.0}; // reflection amplitude, left incidence
    complexd t{1.0, 0.0}; // transmission amplitude, left incidence
    complexd r_back{0.0, 0.0}; // reflection amplitude, right incidence
    complexd t_back{1.0, 0.0}; // transmission amplitude, right incidence
    double R = 0.0;
    double T = 1.0;
    double lambda = 0.0;
};

namespace detail
{
// Scalar scattering matrix of a segment between two reference planes.
// rf/tf: response to left incidence, rb/tb: to right incidence.
struct SMatrix
{
    complexd rf{0.0, 0.0};
    complexd tf{1.0, 0.0};
    complexd rb{0.0, 0.0};
    complexd tb{1.0, 0.0};
};

// Redheffer star product: left segment `a` followed by right segment `b`.
// Every factor is bounded for passive media, so the cascade cannot overflow
// no matter how deep the localization (L/xi >> 1).
inline SMatrix star(const SMatrix &a, const SMatrix &b)
{
    const complexd denom = 1.0 - a.rb * b.rf;
    SMatrix s;
    s.rf = a.rf + a.tb * b.rf * a.tf / denom;
    s.tf = b.tf * a.tf / denom;
    s.rb = b.rb + b.tf * a.rb * b.tb / denom;
    s.tb = a.tb * b.tb / denom;
    return s;
}

// Fresnel amplitude coefficients for normal incidence from medium ni into nj.
inline complexd fresnel_r(complexd ni, complexd nj) { return (ni - nj) / (ni + nj); }
inline complexd fresnel_t(complexd ni, complexd nj) { return 2.0 * ni / (ni + nj); }

// Segment = interface (ni|nj) followed by propagation through (nj, d).
inline SMatrix layer_segment(complexd ni, complexd nj, double d, double k0)
{
    const complexd phase = std::exp(complexd(0.0, 1.0) * nj * (k0 * d));
    const complexd r = fresnel_r(ni, nj);
    SMatrix s;
    s.rf = r;
    s.tf = fresnel_t(ni, nj) * phase;
    s.rb = -r * phase * phase;
    s.tb = fresnel_t(nj, ni) * phase;
    return s;
}
} // namespace detail

// Scattering amplitudes of the stack at vacuum wavelength lambda, cascaded
// with the stable star-product recursion. Throws NumericError on any
// non-finite intermediate instead of returning garbage.
inline ScatterResult stack_scattering(const Stack &stack, double lambda)
{
    if (!(lambda > 0.0))
    {
        throw ValidationError("stack_scattering: lambda must be > 0");
    }
    const double k0 = 2.0 * constants::pi / lambda;
    const complexd n_embed(stack.n_embed(), 0.0);

    detail::SMatrix total; // identity segment
    complexd n_prev = n_embed;
    for (const Layer &layer : stack.layers())
    {
        const complexd n_j = layer.index();
        total = detail::star(total, detail::layer_segment(n_prev, n_j, layer.thickness, k0));
        n_prev = n_j;
    }
    // Closing interface back into the embedding medium.
    detail::SMatrix exit_iface;
    exit_iface.rf = detail::fresnel_r(n_prev, n_embed);
    exit_iface.tf = detail::fresnel_t(n_prev, n_embed);
    exit_iface.rb = -exit_iface.rf;
    exit_iface.tb = detail::fresnel_t(n_embed, n_prev);
    total = detail::star(total, exit_iface);

    ScatterResult result;
    result.r = total.rf;
    result.t = total.tf;
    result.r_back = total.rb;
    result.t_back = total.tb;
    result.R = std::norm(total.rf);
    result.T = std::norm(total.tf);
    result.lambda = lambda;
    if (!std::isfinite(result.R) || !std::isfinite(result.T))
    {
        throw NumericError("stack_scattering: non-finite amplitude in cascade");
    }
    return result;
}

struct XiEstimate
{
    double xi = 0.0;     // meters
    double stderr_ = 0.0; // meters, propagated from SEM of mean(ln T)
    double mean_ln_t = 0.0;
};

// Localization length from the self-averaging observable <ln T> = -L/xi.
inline XiEstimate estimate_xi(const std::vector<double> &log_transmissions, double sample_length)
{
    if (log_transmissions.size() < 2)
    {
        throw ValidationError("estimate_xi: need at least 2 samples");
    }
    double mean = 0.0;
    for (double v : log_transmissions)
    {
        if (v > 0.0)
        {
            throw ValidationError("estimate_xi: ln T must be <= 0");
        }
        mean += v;
    }
    mean /= static_cast<double>(log_transmissions.size());
    if (mean >= 0.0)
    {
        throw NoDecayError("estimate_xi: mean(ln T) >= 0, localization length undefined/infinite");
    }
    double var = 0.0;
    for (double v : log_transmissions)
    {
        var += (v - mean) * (v - mean);
    }
    var /= static_cast<double>(log_transmissions.size() - 1);
    const double sem = std::sqrt(var / static_cast<double>(log_transmissions.size()));

    XiEstimate est;
    est.mean_ln_t = mean;
    est.xi = -sample_length / mean;
    est.stderr_ = sample_length * sem / (mean * mean);
    return est;
}
} // namespace randcav

#endif // RANDCAV_SCATTER_HPP
