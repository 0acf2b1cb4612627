#ifndef RANDCAV_PEAKS_HPP
#define RANDCAV_PEAKS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "randcav/errors.hpp"

namespace randcav
{
struct SeriesPeak
{
    std::size_t index = 0;
    double value = 0.0;
    double prominence = 0.0;
};

// Local maxima of a sampled series with topographic prominence above
// min_prominence. A peak's bases are the minima between it and the nearest
// higher samples (or the series ends); prominence = value - max(base_l, base_r).
inline std::vector<SeriesPeak> find_series_peaks(const std::vector<double> &values,
                                                 double min_prominence)
{
    std::vector<SeriesPeak> peaks;
    const std::size_t n = values.size();
    if (n < 3)
    {
        return peaks;
    }
    for (std::size_t i = 1; i + 1 < n; ++i)
    {
        if (!(values[i] > values[i - 1]) || !(values[i] >= values[i + 1]))
        {
            continue; // plateaus credit their first sample
        }
        double base_left = values[i];
        for (std::size_t j = i; j-- > 0;)
        {
            base_left = std::min(base_left, values[j]);
            if (values[j] > values[i])
            {
                break;
            }
        }
        double base_right = values[i];
        for (std::size_t j = i + 1; j < n; ++j)
        {
            base_right = std::min(base_right, values[j]);
            if (values[j] > values[i])
            {
                break;
            }
        }
        const double prominence = values[i] - std::max(base_left, base_right);
        if (prominence >= min_prominence)
        {
            peaks.push_back({i, values[i], prominence});
        }
    }
    return peaks;
}

struct RefinedPeak
{
    double x = 0.0;
    double value = 0.0;
    std::size_t evaluations = 0;
};

// Golden-section maximization of f on [a, b]; stops when the bracket is
// narrower than tol_abs.
inline RefinedPeak golden_max(const std::function<double(double)> &f, double a, double b,
                              double tol_abs)
{
    if (!(a < b) || !(tol_abs > 0.0))
    {
        throw ValidationError("golden_max: invalid bracket or tolerance");
    }
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1);
    double f2 = f(x2);
    std::size_t evals = 2;
    while (b - a > tol_abs)
    {
        if (f1 < f2)
        {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
        else
        {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        }
        ++evals;
        if (evals > 400)
        {
            break;
        }
    }
    RefinedPeak out;
    if (f1 > f2)
    {
        out.x = x1;
        out.value = f1;
    }
    else
    {
        out.x = x2;
        out.value = f2;
    }
    out.evaluations = evals;
    return out;
}

// Full width of f around a maximum at x_peak, measured where f crosses
// floor + (f_peak - floor)/2. The first probe distance adapts up and down,
// so widths from 1e-6 to 1e6 times `step_hint` are found reliably.
inline double half_max_width(const std::function<double(double)> &f, double x_peak,
                             double f_peak, double floor_value, double step_hint,
                             double max_span)
{
    const double half_level = floor_value + 0.5 * (f_peak - floor_value);
    auto side_width = [&](double direction) {
        double step = step_hint;
        // Shrink first so ultra-narrow peaks are not stepped over.
        for (int i = 0; i < 80 && f(x_peak + direction * step) < half_level; ++i)
        {
            step *= 0.5;
        }
        if (f(x_peak + direction * step) < half_level)
        {
            return step; // narrower than resolvable; report the floor step
        }
        double lo = step;
        while (lo < max_span && f(x_peak + direction * 2.0 * lo) >= half_level)
        {
            lo *= 2.0;
        }
        double hi = std::min(2.0 * lo, max_span);
        for (int i = 0; i < 60; ++i)
        {
            const double mid = 0.5 * (lo + hi);
            if (f(x_peak + direction * mid) >= half_level)
            {
                lo = mid;
            }
            else
            {
                hi = mid;
            }
        }
        return 0.5 * (lo + hi);
    };
    return side_width(+1.0) + side_width(-1.0);
}
} // namespace randcav

#endif // RANDCAV_PEAKS_HPP
