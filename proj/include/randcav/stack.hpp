#ifndef RANDCAV_STACK_HPP
#define RANDCAV_STACK_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "randcav/constants.hpp"
#include "randcav/errors.hpp"
#include "randcav/rng.hpp"

namespace randcav
{
// One homogeneous slab of the 1D multilayer.
struct Layer
{
    double n_real = 1.0;    // refractive index, > 0
    double n_imag = 0.0;    // extinction, >= 0 (loss)
    double thickness = 0.0; // meters, > 0

    std::complex<double> index() const { return {n_real, n_imag}; }
};

// Ordered layer sequence between two semi-infinite media of index n_embed.
// Immutable after construction; cheap to copy, safe to share across workers.
class Stack
{
public:
    Stack(std::vector<Layer> layers, double n_embed)
        : layers_(std::move(layers)), n_embed_(n_embed)
    {
        if (layers_.empty())
        {
            throw ValidationError("Stack: at least 1 layer required");
        }
        if (!(n_embed_ > 0.0))
        {
            throw ValidationError("Stack: n_embed must be > 0");
        }
        edges_.reserve(layers_.size() + 1);
        edges_.push_back(0.0);
        double total = 0.0;
        for (const Layer &layer : layers_)
        {
            if (!(layer.n_real > 0.0))
            {
                throw ValidationError("Layer: n_real must be > 0");
            }
            if (layer.n_imag < 0.0)
            {
                throw ValidationError("Layer: n_imag must be >= 0");
            }
            if (!(layer.thickness > 0.0))
            {
                throw ValidationError("Layer: thickness must be > 0");
            }
            total += layer.thickness;
            edges_.push_back(total);
        }
        total_length_ = total;
    }

    const std::vector<Layer> &layers() const { return layers_; }
    double n_embed() const { return n_embed_; }
    double total_length() const { return total_length_; }

    // z coordinates of the layer boundaries, edges()[0] = 0, edges()[N] = L.
    const std::vector<double> &edges() const { return edges_; }

    // Index of the layer containing z (z==L maps to the last layer).
    std::size_t layer_at(double z) const
    {
        if (z < 0.0 || z > total_length_ * (1.0 + 1e-12))
        {
            throw ValidationError("Stack: z outside [0, total_length]");
        }
        auto it = std::upper_bound(edges_.begin(), edges_.end(), z);
        std::size_t idx = (it == edges_.begin()) ? 0 : static_cast<std::size_t>(it - edges_.begin()) - 1;
        if (idx >= layers_.size())
        {
            idx = layers_.size() - 1;
        }
        return idx;
    }

    double index_real_at(double z) const { return layers_[layer_at(z)].n_real; }

private:
    std::vector<Layer> layers_;
    double n_embed_ = 1.0;
    double total_length_ = 0.0;
    std::vector<double> edges_;
};

// Statistical description of one disorder model: uniform index fluctuations
// n in [n_mean - delta_n, n_mean + delta_n] on fixed-thickness layers.
struct DisorderSpec
{
    double n_mean = 3.45;            // mean refractive index
    double delta_n = 0.70;           // half-width of the uniform index interval
    double layer_thickness = 10e-9;  // meters
    double sample_length = 100e-6;   // meters
    std::optional<double> loss_length; // meters; absent = lossless

    std::size_t layer_count() const
    {
        return static_cast<std::size_t>(std::llround(sample_length / layer_thickness));
    }

    void validate() const
    {
        if (!(n_mean > 0.0))
        {
            throw ValidationError("DisorderSpec: n_mean must be > 0");
        }
        if (delta_n < 0.0 || delta_n >= n_mean)
        {
            throw ValidationError("DisorderSpec: require 0 <= delta_n < n_mean");
        }
        if (!(layer_thickness > 0.0) || !(sample_length > 0.0))
        {
            throw ValidationError("DisorderSpec: lengths must be > 0");
        }
        const double ratio = sample_length / layer_thickness;
        if (std::abs(ratio - std::llround(ratio)) > 1e-9 * ratio || std::llround(ratio) < 1)
        {
            throw ValidationError(
                "DisorderSpec: sample_length / layer_thickness must be a positive integer count");
        }
        if (loss_length.has_value() && !(*loss_length > 0.0))
        {
            throw ValidationError("DisorderSpec: loss_length must be > 0 when present");
        }
    }
};

// One Monte Carlo ensemble: disorder model, size, seed, spectral window.
struct EnsembleSpec
{
    DisorderSpec disorder;
    std::size_t n_realizations = 500;
    std::uint64_t master_seed = 0;
    double lambda_min = 970e-9; // meters
    double lambda_max = 980e-9; // meters

    double lambda_center() const { return 0.5 * (lambda_min + lambda_max); }

    void validate() const
    {
        disorder.validate();
        if (!(lambda_min < lambda_max) || !(lambda_min > 0.0))
        {
            throw ValidationError("EnsembleSpec: require 0 < lambda_min < lambda_max");
        }
        if (n_realizations < 1)
        {
            throw ValidationError("EnsembleSpec: n_realizations must be >= 1");
        }
    }
};

// Localization length predicted by the calibrated disorder model
// (10 nm layers, L = 100 um, lambda ~ 975 nm): xi = 7.40 um / delta_n^2.
// delta_n = 0 signals an infinite localization length.
inline double predicted_xi(double delta_n)
{
    if (delta_n < 0.0)
    {
        throw ValidationError("predicted_xi: delta_n must be >= 0");
    }
    if (delta_n == 0.0)
    {
        return std::numeric_limits<double>::infinity();
    }
    return 7.40e-6 / (delta_n * delta_n);
}

// Non-fatal diagnostics for a disorder spec. Localization requires xi < L;
// callers surface these once per run.
inline std::vector<std::string> disorder_warnings(const DisorderSpec &spec)
{
    std::vector<std::string> warnings;
    const double xi = predicted_xi(spec.delta_n);
    if (!(xi < spec.sample_length))
    {
        warnings.push_back(
            "predicted localization length exceeds sample length (xi >= L): "
            "the stack is not in the Anderson-localized regime");
    }
    return warnings;
}

// Deterministic disorder realization: a pure function of
// (spec, master_seed, realization_index). Repeated calls are bit-identical.
// lambda_ref fixes the extinction n'' = lambda_ref / (2 pi l) when loss is on.
inline Stack generate_stack(const DisorderSpec &spec,
                            std::uint64_t master_seed,
                            std::uint64_t realization_index,
                            double lambda_ref = 975e-9)
{
    spec.validate();
    const std::size_t count = spec.layer_count();
    double n_imag = 0.0;
    if (spec.loss_length.has_value())
    {
        n_imag = lambda_ref / (2.0 * constants::pi * (*spec.loss_length));
    }

    SplitMix64 rng(stream_seed(master_seed, realization_index));
    std::vector<Layer> layers;
    layers.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
    {
        Layer layer;
        layer.n_real = spec.n_mean + spec.delta_n * (2.0 * rng.next_unit() - 1.0);
        layer.n_imag = n_imag;
        layer.thickness = spec.layer_thickness;
        layers.push_back(layer);
    }
    return Stack(std::move(layers), spec.n_mean);
}
} // namespace randcav

#endif // RANDCAV_STACK_HPP
