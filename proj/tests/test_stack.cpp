#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "randcav/stack.hpp"

using namespace randcav;

namespace
{
DisorderSpec paper_spec()
{
    DisorderSpec spec;
    spec.n_mean = 3.45;
    spec.delta_n = 0.70;
    spec.layer_thickness = 10e-9;
    spec.sample_length = 100e-6;
    return spec;
}
} // namespace

TEST_CASE("generate_stack: zero disorder gives identical layers", "[stack]")
{
    DisorderSpec spec = paper_spec();
    spec.delta_n = 0.0;
    spec.sample_length = 1e-6;
    const Stack stack = generate_stack(spec, 12345, 0);
    REQUIRE(stack.layers().size() == 100);
    for (const Layer &layer : stack.layers())
    {
        REQUIRE(layer.n_real == 3.45);
        REQUIRE(layer.n_imag == 0.0);
        REQUIRE(layer.thickness == 10e-9);
    }
    REQUIRE(stack.n_embed() == 3.45);
    REQUIRE(stack.total_length() == Catch::Approx(1e-6).epsilon(1e-12));
}

TEST_CASE("generate_stack: indices stay in the disorder interval", "[stack]")
{
    const DisorderSpec spec = paper_spec();
    const Stack stack = generate_stack(spec, 99, 7);
    REQUIRE(stack.layers().size() == 10000);
    for (const Layer &layer : stack.layers())
    {
        REQUIRE(layer.n_real >= 2.75);
        REQUIRE(layer.n_real <= 4.15);
    }
}

TEST_CASE("generate_stack: deterministic in (seed, index)", "[stack]")
{
    const DisorderSpec spec = paper_spec();
    const Stack a = generate_stack(spec, 42, 3);
    const Stack b = generate_stack(spec, 42, 3);
    REQUIRE(a.layers().size() == b.layers().size());
    for (std::size_t i = 0; i < a.layers().size(); ++i)
    {
        REQUIRE(a.layers()[i].n_real == b.layers()[i].n_real);
    }
    // Different indices decorrelate immediately.
    const Stack c = generate_stack(spec, 42, 4);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.layers().size(); ++i)
    {
        any_diff = any_diff || (a.layers()[i].n_real != c.layers()[i].n_real);
    }
    REQUIRE(any_diff);
}

TEST_CASE("generate_stack: empirical index mean matches n_mean", "[stack]")
{
    DisorderSpec spec = paper_spec();
    spec.sample_length = 100e-6; // 10^4 layers per realization
    double sum = 0.0;
    std::size_t count = 0;
    for (std::uint64_t idx = 0; idx < 12; ++idx) // 1.2e5 layers total
    {
        const Stack stack = generate_stack(spec, 2024, idx);
        for (const Layer &layer : stack.layers())
        {
            sum += layer.n_real;
            ++count;
        }
    }
    REQUIRE(count >= 100000);
    const double mean = sum / static_cast<double>(count);
    const double se = spec.delta_n / std::sqrt(3.0 * static_cast<double>(count));
    REQUIRE(std::abs(mean - spec.n_mean) < 3.0 * se);
}

TEST_CASE("generate_stack: loss maps to a uniform extinction", "[stack]")
{
    DisorderSpec spec = paper_spec();
    spec.loss_length = 2.5e-3;
    const double lambda_ref = 975e-9;
    const Stack stack = generate_stack(spec, 5, 0, lambda_ref);
    const double expected = lambda_ref / (2.0 * constants::pi * 2.5e-3);
    for (const Layer &layer : stack.layers())
    {
        REQUIRE(layer.n_imag == Catch::Approx(expected).epsilon(1e-12));
        REQUIRE(layer.n_imag > 0.0);
    }
}

TEST_CASE("generate_stack: invalid specs are rejected by name", "[stack]")
{
    DisorderSpec spec = paper_spec();
    spec.delta_n = 4.0; // >= n_mean
    REQUIRE_THROWS_AS(generate_stack(spec, 0, 0), ValidationError);

    spec = paper_spec();
    spec.sample_length = 1.05e-8; // not an integer layer count
    REQUIRE_THROWS_AS(generate_stack(spec, 0, 0), ValidationError);

    spec = paper_spec();
    spec.loss_length = -1.0;
    REQUIRE_THROWS_AS(generate_stack(spec, 0, 0), ValidationError);
}

TEST_CASE("predicted_xi: calibrated disorder model", "[stack]")
{
    REQUIRE(predicted_xi(0.70) == Catch::Approx(15.102040816e-6).epsilon(1e-9));
    REQUIRE(predicted_xi(0.35) == Catch::Approx(60.408163265e-6).epsilon(1e-9));
    REQUIRE(std::isinf(predicted_xi(0.0)));
}

TEST_CASE("disorder_warnings: xi >= L flags a non-localized stack", "[stack]")
{
    DisorderSpec spec = paper_spec();
    REQUIRE(disorder_warnings(spec).empty()); // xi = 15.1 um < 100 um

    spec.delta_n = 0.05; // xi = 2.96 mm >> L
    REQUIRE(disorder_warnings(spec).size() == 1);

    spec.delta_n = 0.0; // infinite xi
    REQUIRE(disorder_warnings(spec).size() == 1);
}

TEST_CASE("Stack: layer lookup and edges", "[stack]")
{
    std::vector<Layer> layers = {{2.0, 0.0, 1e-6}, {3.0, 0.0, 2e-6}, {1.5, 0.0, 1e-6}};
    const Stack stack(layers, 1.0);
    REQUIRE(stack.total_length() == Catch::Approx(4e-6).epsilon(1e-12));
    REQUIRE(stack.layer_at(0.0) == 0);
    REQUIRE(stack.layer_at(1e-6) == 1);
    REQUIRE(stack.layer_at(2.5e-6) == 1);
    REQUIRE(stack.layer_at(4e-6) == 2);
    REQUIRE(stack.index_real_at(3.5e-6) == 1.5);
    REQUIRE_THROWS_AS(stack.layer_at(5e-6), ValidationError);
    REQUIRE_THROWS_AS(Stack({}, 1.0), ValidationError);
}
