#pragma once

#include "epsmode/dielectric.hpp"

#include <numbers>
#include <random>

namespace epsmode::testing
{

inline constexpr double two_pi = 2.0 * std::numbers::pi;

inline Grid cube_grid(Index3 dims)
{
    return Grid(dims, {two_pi, two_pi, two_pi});
}

/// eps = 1 on [0, L/2) and `high` on [L/2, L) along z, edges of width w.
inline DielectricProfile layered(const Grid &g, double high = 2.25, double width_fraction = 1.0 / 16.0)
{
    const double lz = g.lengths()[2];
    return build_profile(g, LayeredSpec{{1.0, high}, {lz / 2}, lz * width_fraction, 2});
}

inline DielectricProfile disordered(const DielectricProfile &base, std::uint64_t seed, double rms)
{
    DisorderSpec spec;
    spec.seed = seed;
    spec.rms = rms;
    const auto &l = base.grid().lengths();
    spec.correlation_lengths = {l[0] / 8, l[1] / 8, l[2] / 8};
    return generate_disorder(base, spec);
}

inline VectorField random_field(const Grid &g, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    VectorField v(g);
    for (auto &x : v.data())
    {
        const double re = n(rng);
        x = {re, n(rng)};
    }
    return v;
}

inline ScalarField random_scalar(const Grid &g, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    ScalarField s(g);
    for (auto &x : s.values())
    {
        const double re = n(rng);
        x = {re, n(rng)};
    }
    return s;
}

/// Brute-force DFT coefficient c_m = (1/N) sum_r f(r) e^{-i k_m . r}.
inline cplx dft_coefficient(const Grid &g, std::span<const cplx> values, const Index3 &m)
{
    cplx acc{};
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        const Index3 p = g.unflat(i);
        double phase = 0.0;
        for (int a = 0; a < 3; ++a)
        {
            phase += two_pi * m[a] * p[a] / g.dims()[a];
        }
        acc += values[i] * std::polar(1.0, -phase);
    }
    return acc / static_cast<double>(g.size());
}

} // namespace epsmode::testing
