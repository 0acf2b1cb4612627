#ifndef RANDCAV_QUASIMODE_HPP
#define RANDCAV_QUASIMODE_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "randcav/errors.hpp"

namespace randcav
{
// One Anderson-localized resonance. (omega_c, kappa) is the single source of
// truth; q_factor is always omega_c / kappa. The profile is the 1D Lorentzian
// amplitude rho_0(z) in 1/m sampled on z_grid (shared across the modes of a
// realization).
struct QuasiMode
{
    double omega_c = 0.0; // rad/s
    double kappa = 0.0;   // rad/s
    double q_factor = 0.0;
    std::vector<double> profile; // rho_0(z) >= 0, 1/m
    std::shared_ptr<const std::vector<double>> z_grid;
    double z_peak = 0.0;     // argmax of n^2 rho_0, meters
    double peak_n2rho = 0.0; // max_z n^2(z) rho_0(z), 1/m
    double fit_residual = 0.0;
    bool overlap_warning = false;
    int realization_id = 0;

    // Linear interpolation of the profile at z (clamped to the grid range).
    double profile_at(double z) const
    {
        const auto &grid = *z_grid;
        if (grid.size() != profile.size() || grid.empty())
        {
            throw ValidationError("QuasiMode: profile/grid mismatch");
        }
        if (z <= grid.front())
        {
            return profile.front();
        }
        if (z >= grid.back())
        {
            return profile.back();
        }
        const auto it = std::upper_bound(grid.begin(), grid.end(), z);
        const std::size_t hi = static_cast<std::size_t>(it - grid.begin());
        const std::size_t lo = hi - 1;
        const double w = (z - grid[lo]) / (grid[hi] - grid[lo]);
        return (1.0 - w) * profile[lo] + w * profile[hi];
    }
};
} // namespace randcav

#endif // RANDCAV_QUASIMODE_HPP
