#ifndef RANDCAV_MODEFIT_HPP
#define RANDCAV_MODEFIT_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "randcav/constants.hpp"
#include "randcav/errors.hpp"

namespace randcav
{
// Normalized Lorentzian: unit integral over omega.
inline double lorentzian(double omega, double omega_c, double kappa)
{
    const double hw = 0.5 * kappa;
    const double d = omega - omega_c;
    return (hw / constants::pi) / (d * d + hw * hw);
}

struct LorentzTerm
{
    double amplitude = 0.0; // integral of the term over omega
    double omega_c = 0.0;   // rad/s
    double kappa = 0.0;     // rad/s
};

inline double lorentzian_sum(const std::vector<LorentzTerm> &terms, double omega)
{
    double v = 0.0;
    for (const LorentzTerm &t : terms)
    {
        v += t.amplitude * lorentzian(omega, t.omega_c, t.kappa);
    }
    return v;
}

struct LorentzFitResult
{
    std::vector<LorentzTerm> terms;
    double residual = 0.0; // rms(residual) / rms(data)
    bool converged = false;
    int iterations = 0;
};

namespace detail
{
// Cholesky solve of (A + mu diag(A)) x = b for a small SPD system.
inline bool solve_damped(std::vector<double> a, std::vector<double> b, double mu,
                         std::size_t n, std::vector<double> &x)
{
    for (std::size_t i = 0; i < n; ++i)
    {
        a[i * n + i] *= (1.0 + mu);
        a[i * n + i] += 1e-300;
    }
    // In-place Cholesky.
    for (std::size_t i = 0; i < n; ++i)
    {
        for (std::size_t j = 0; j <= i; ++j)
        {
            double sum = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k)
            {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if (i == j)
            {
                if (!(sum > 0.0))
                {
                    return false;
                }
                a[i * n + i] = std::sqrt(sum);
            }
            else
            {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    x.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        double sum = b[i];
        for (std::size_t k = 0; k < i; ++k)
        {
            sum -= a[i * n + k] * x[k];
        }
        x[i] = sum / a[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;)
    {
        double sum = x[i];
        for (std::size_t k = i + 1; k < n; ++k)
        {
            sum -= a[k * n + i] * x[k];
        }
        x[i] = sum / a[i * n + i];
    }
    return true;
}
} // namespace detail

// Damped Gauss-Newton (Levenberg-Marquardt) fit of a sum of normalized
// Lorentzians to (omega, value) samples. Parameters are scaled internally by
// their initial guesses so the system stays well conditioned; convergence is
// a relative parameter update below 1e-10 (or 200 iterations).
inline LorentzFitResult fit_lorentzian_sum(const std::vector<double> &omega,
                                           const std::vector<double> &values,
                                           const std::vector<LorentzTerm> &initial)
{
    if (omega.size() != values.size())
    {
        throw ValidationError("fit_lorentzian_sum: omega/value size mismatch");
    }
    LorentzFitResult result;
    if (initial.empty())
    {
        result.converged = true;
        result.residual = 0.0;
        return result;
    }
    const std::size_t n_modes = initial.size();
    const std::size_t n_par = 3 * n_modes;
    const std::size_t n_samp = omega.size();
    if (n_samp < n_par)
    {
        throw ValidationError("fit_lorentzian_sum: fewer samples than parameters");
    }

    // Scales: amplitude and kappa by their initial values, omega offset by
    // the initial kappa.
    std::vector<double> a0(n_modes), w0(n_modes), k0(n_modes);
    for (std::size_t i = 0; i < n_modes; ++i)
    {
        if (!(initial[i].amplitude > 0.0) || !(initial[i].kappa > 0.0))
        {
            throw ValidationError("fit_lorentzian_sum: initial amplitude/kappa must be > 0");
        }
        a0[i] = initial[i].amplitude;
        w0[i] = initial[i].omega_c;
        k0[i] = initial[i].kappa;
    }

    // x layout per mode: [a, w, k] with A = a*a0, omega_c = w0 + w*k0, kappa = k*k0.
    std::vector<double> x(n_par);
    for (std::size_t i = 0; i < n_modes; ++i)
    {
        x[3 * i + 0] = 1.0;
        x[3 * i + 1] = 0.0;
        x[3 * i + 2] = 1.0;
    }

    auto unpack = [&](const std::vector<double> &p) {
        std::vector<LorentzTerm> terms(n_modes);
        for (std::size_t i = 0; i < n_modes; ++i)
        {
            terms[i].amplitude = p[3 * i + 0] * a0[i];
            terms[i].omega_c = w0[i] + p[3 * i + 1] * k0[i];
            terms[i].kappa = p[3 * i + 2] * k0[i];
        }
        return terms;
    };
    auto admissible = [&](const std::vector<double> &p) {
        for (std::size_t i = 0; i < n_modes; ++i)
        {
            if (!(p[3 * i + 0] > 0.0) || !(p[3 * i + 2] > 0.0) || std::abs(p[3 * i + 1]) > 1e4)
            {
                return false;
            }
        }
        return true;
    };
    auto chi2 = [&](const std::vector<LorentzTerm> &terms) {
        double s = 0.0;
        for (std::size_t j = 0; j < n_samp; ++j)
        {
            const double r = values[j] - lorentzian_sum(terms, omega[j]);
            s += r * r;
        }
        return s;
    };

    std::vector<LorentzTerm> terms = unpack(x);
    double cost = chi2(terms);
    double mu = 1e-3;
    bool converged = false;
    int iter = 0;

    std::vector<double> jtj(n_par * n_par), jtr(n_par), row(n_par), delta;
    for (; iter < 200; ++iter)
    {
        std::fill(jtj.begin(), jtj.end(), 0.0);
        std::fill(jtr.begin(), jtr.end(), 0.0);
        for (std::size_t j = 0; j < n_samp; ++j)
        {
            const double om = omega[j];
            double model = 0.0;
            for (std::size_t i = 0; i < n_modes; ++i)
            {
                const double hw = 0.5 * terms[i].kappa;
                const double d = om - terms[i].omega_c;
                const double denom = d * d + hw * hw;
                const double lor = (hw / constants::pi) / denom;
                model += terms[i].amplitude * lor;
                // d/dA, then chain rule through the scalings.
                row[3 * i + 0] = lor * a0[i];
                const double dl_domega_c = (2.0 * d) * (hw / constants::pi) / (denom * denom);
                row[3 * i + 1] = terms[i].amplitude * dl_domega_c * k0[i];
                const double dl_dkappa =
                    0.5 / constants::pi * (d * d - hw * hw) / (denom * denom);
                row[3 * i + 2] = terms[i].amplitude * dl_dkappa * k0[i];
            }
            const double resid = values[j] - model;
            for (std::size_t p = 0; p < n_par; ++p)
            {
                jtr[p] += row[p] * resid;
                for (std::size_t qx = 0; qx <= p; ++qx)
                {
                    jtj[p * n_par + qx] += row[p] * row[qx];
                }
            }
        }
        for (std::size_t p = 0; p < n_par; ++p)
        {
            for (std::size_t qx = p + 1; qx < n_par; ++qx)
            {
                jtj[p * n_par + qx] = jtj[qx * n_par + p];
            }
        }

        bool stepped = false;
        for (int attempt = 0; attempt < 25; ++attempt)
        {
            if (!detail::solve_damped(jtj, jtr, mu, n_par, delta))
            {
                mu *= 4.0;
                continue;
            }
            std::vector<double> x_new(n_par);
            for (std::size_t p = 0; p < n_par; ++p)
            {
                x_new[p] = x[p] + delta[p];
            }
            if (!admissible(x_new))
            {
                mu *= 4.0;
                continue;
            }
            const std::vector<LorentzTerm> terms_new = unpack(x_new);
            const double cost_new = chi2(terms_new);
            if (cost_new <= cost * (1.0 + 1e-14))
            {
                double max_update = 0.0;
                for (std::size_t p = 0; p < n_par; ++p)
                {
                    max_update = std::max(max_update,
                                          std::abs(delta[p]) / std::max(std::abs(x[p]), 1.0));
                }
                x = x_new;
                terms = terms_new;
                cost = cost_new;
                mu = std::max(mu / 3.0, 1e-14);
                stepped = true;
                if (max_update < 1e-10)
                {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if (converged || !stepped)
        {
            break; // done, or damping saturated with no acceptable step left
        }
    }

    result.terms = terms;
    result.iterations = iter + 1;
    result.converged = converged;
    double ss_data = 0.0;
    for (double v : values)
    {
        ss_data += v * v;
    }
    result.residual = ss_data > 0.0 ? std::sqrt(cost / ss_data) : std::sqrt(cost / n_samp);
    return result;
}
} // namespace randcav

#endif // RANDCAV_MODEFIT_HPP
