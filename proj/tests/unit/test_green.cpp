#include "support.hpp"

#include "epsmode/errors.hpp"
#include "epsmode/green.hpp"

#include <doctest.h>

#include <cmath>

using namespace epsmode;
using namespace epsmode::testing;

namespace
{
struct Fixture
{
    Grid grid = cube_grid({4, 2, 8});
    DielectricProfile eps = disordered(layered(grid), 4, 0.05);
    ModeSet modes = solve_modes(eps);
};

/// A frequency halfway between two distinct eigenfrequencies.
double off_resonance(const ModeSet &m, std::size_t after)
{
    std::size_t j = after + 1;
    while (m.omega(j) <= m.omega(after) * (1 + 1e-6))
    {
        ++j;
    }
    return 0.5 * (m.omega(after) + m.omega(j));
}
} // namespace

TEST_CASE("G minus K is the local term")
{
    Fixture fx;
    const double w = off_resonance(fx.modes, 3);
    const SpectralKernel g(fx.modes, KernelKind::Full, w);
    const SpectralKernel k(fx.modes, KernelKind::Reduced, w);
    const VectorField v = random_field(fx.grid, 1);
    const VectorField diff = g.apply(v) - k.apply(v);
    const VectorField local = (1.0 / (w * w)) * fx.eps.divide(v);
    CHECK(max_abs(diff - local) <= 1e-12 * max_abs(local));
}

TEST_CASE("transverse plus longitudinal kernels give G")
{
    Fixture fx;
    for (double w : {off_resonance(fx.modes, 0), off_resonance(fx.modes, 10), 0.37})
    {
        CHECK(kernel_identity_residual(fx.modes, w) <= 1e-11);
    }
    const Grid g = cube_grid({2, 2, 4});
    CHECK(kernel_identity_residual(solve_modes(build_profile(g, HomogeneousSpec{1.0})), 0.6) <= 1e-13);
}

TEST_CASE("eps K v is divergence-free for any source and frequency")
{
    Fixture fx;
    for (double w : {0.3, off_resonance(fx.modes, 5), 7.1})
    {
        const SpectralKernel k(fx.modes, KernelKind::Reduced, w);
        for (std::uint64_t s = 0; s < 3; ++s)
        {
            const VectorField v = random_field(fx.grid, 100 + s);
            CHECK(norm(divergence(k.apply(v), fx.eps.profile())) <= 1e-9 * norm(v));
        }
    }
}

TEST_CASE("longitudinal kernel output is curl-free")
{
    Fixture fx;
    const double w = off_resonance(fx.modes, 2);
    const SpectralKernel gl(fx.modes, KernelKind::Longitudinal, w);
    const VectorField mode_out = gl.apply(fx.modes.field(7));
    CHECK(norm(curl(mode_out)) <= 1e-9);
    const VectorField v = random_field(fx.grid, 3);
    CHECK(norm(curl(gl.apply(v))) <= 1e-9 * norm(v));
}

TEST_CASE("kernel matches the dense inverse of the wave operator")
{
    const Grid g = cube_grid({2, 1, 16});
    const auto eps = disordered(layered(g), 1, 0.05);
    const ModeSet modes = solve_modes(eps);
    for (double w : {off_resonance(modes, 0), off_resonance(modes, 8)})
    {
        const SpectralKernel kernel(modes, KernelKind::Full, w);
        for (std::uint64_t s = 0; s < 3; ++s)
        {
            const VectorField v = random_field(g, s);
            const VectorField x = direct_inverse_apply(eps, w, v);
            // the dense solution satisfies the differential equation
            const VectorField lhs = (w * w) * eps.multiply(x) - curl(curl(x));
            CHECK(norm(lhs - v) <= 1e-9 * norm(v));
            CHECK(norm(kernel.apply(v) - x) <= 1e-8 * norm(v));
        }
    }
    const Grid big = cube_grid({4, 4, 64});
    CHECK_THROWS_AS(direct_inverse_apply(build_profile(big, HomogeneousSpec{1.0}), 1.0, VectorField(big)),
                    InvalidArgument);
}

TEST_CASE("resonance guard, broadening and exclusions")
{
    Fixture fx;
    const std::size_t l = lowest_nondegenerate(fx.modes, 1).at(0);
    const double w = fx.modes.omega(l);
    CHECK_THROWS_AS(SpectralKernel(fx.modes, KernelKind::Transverse, w), ResonanceError);
    CHECK_THROWS_AS(SpectralKernel(fx.modes, KernelKind::Reduced, w), ResonanceError);
    CHECK_NOTHROW(SpectralKernel(fx.modes, KernelKind::Longitudinal, w));

    KernelOptions broadened;
    broadened.eta = 1e-3;
    const SpectralKernel k(fx.modes, KernelKind::Reduced, w, broadened);
    CHECK(k.apply(random_field(fx.grid, 2)).all_finite());

    KernelOptions excl;
    excl.excluded = modes_near(fx.modes, w, 1e-6);
    CHECK(excl.excluded == std::vector<std::size_t>{l});
    const SpectralKernel reduced(fx.modes, KernelKind::Full, w, excl);
    // the excluded mode is annihilated by the mode sum
    const VectorField f = fx.modes.field(l);
    CHECK(norm(reduced.apply(fx.eps.multiply(f)) - (1.0 / (w * w)) * f) <= 1e-10);

    CHECK_THROWS_AS(SpectralKernel(fx.modes, KernelKind::Reduced, 0.0), InvalidArgument);
    excl.excluded = {fx.modes.size()};
    CHECK_THROWS_AS(SpectralKernel(fx.modes, KernelKind::Reduced, 0.5, excl), InvalidArgument);
}

TEST_CASE("transverse kernel acts diagonally on modes")
{
    Fixture fx;
    const double w = off_resonance(fx.modes, 4);
    const SpectralKernel gt(fx.modes, KernelKind::Transverse, w);
    for (std::size_t l : {0u, 5u, 20u})
    {
        const VectorField f = fx.modes.field(l);
        const double wl = fx.modes.omega(l);
        const VectorField expected = (1.0 / (w * w - wl * wl)) * f;
        CHECK(norm(gt.apply(fx.eps.multiply(f)) - expected) <= 1e-10 * norm(expected));
    }
}

TEST_CASE("Helmholtz decomposition")
{
    Fixture fx;
    SUBCASE("random field splits into eps-orthogonal parts")
    {
        const VectorField v = random_field(fx.grid, 8);
        const HelmholtzParts h = helmholtz_decompose(v, fx.eps);
        CHECK(norm(h.transverse + h.longitudinal - v) <= 1e-11 * norm(v));
        CHECK(norm(divergence(h.transverse, fx.eps.profile())) <= 1e-9 * norm(v));
        CHECK(norm(curl(h.longitudinal)) <= 1e-12 * norm(v));
        CHECK(std::abs(weighted_inner_product(h.transverse, h.longitudinal, &fx.eps.profile())) <= 1e-9 * norm(v) * norm(v));
        CHECK(h.iterations > 0);
    }
    SUBCASE("eigenmode has no longitudinal part")
    {
        const VectorField f = fx.modes.field(3);
        CHECK(norm(helmholtz_decompose(f, fx.eps).longitudinal) <= 1e-9);
    }
    SUBCASE("gradient has no transverse part")
    {
        const VectorField grad = gradient(random_scalar(fx.grid, 5));
        CHECK(norm(helmholtz_decompose(grad, fx.eps).transverse) <= 1e-9 * norm(grad));
    }
}
