#include "support.hpp"

#include "epsmode/errors.hpp"
#include "epsmode/modes.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace epsmode;
using namespace epsmode::testing;

namespace
{

/// Full plane-wave operators A (curl curl) and B (eps) built from scratch.
std::pair<Eigen::MatrixXcd, Eigen::MatrixXcd> dense_operators(const DielectricProfile &eps)
{
    const Grid &g = eps.grid();
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
    Eigen::MatrixXcd b = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
    const Index3 band = eps.band();
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Index3 mi = g.wave_index(static_cast<std::size_t>(i));
        Real3 k{};
        for (int c = 0; c < 3; ++c)
        {
            k[c] = two_pi * mi[c] / g.lengths()[c];
        }
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for (int p = 0; p < 3; ++p)
        {
            for (int q = 0; q < 3; ++q)
            {
                a(p * n + i, q * n + i) = (p == q ? k2 : 0.0) - k[p] * k[q];
            }
        }
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const Index3 mj = g.wave_index(static_cast<std::size_t>(j));
            const Index3 d{mi[0] - mj[0], mi[1] - mj[1], mi[2] - mj[2]};
            if (std::abs(d[0]) > band[0] || std::abs(d[1]) > band[1] || std::abs(d[2]) > band[2])
            {
                continue;
            }
            std::vector<cplx> vals(eps.values().begin(), eps.values().end());
            const cplx e = dft_coefficient(g, vals, d);
            for (int p = 0; p < 3; ++p)
            {
                b(p * n + i, p * n + j) = e;
            }
        }
    }
    return {a, b};
}

std::vector<double> plane_wave_spectrum(const Grid &g, double eps)
{
    std::vector<double> out;
    for (std::size_t j = 1; j < g.size(); ++j)
    {
        const Real3 k = g.wave_vector(j);
        const double w = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]) / std::sqrt(eps);
        out.push_back(w);
        out.push_back(w);
    }
    std::sort(out.begin(), out.end());
    return out;
}

double gram_error(const ModeSet &m)
{
    double worst = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
    {
        const VectorField bi = m.profile().multiply(m.field(i));
        for (std::size_t j = 0; j < m.size(); ++j)
        {
            const cplx ip = inner(m.field(j), bi);
            worst = std::max(worst, std::abs(ip - (i == j ? 1.0 : 0.0)));
        }
    }
    return worst;
}

} // namespace

TEST_CASE("nonzero spectrum and null space agree with the dense generalized problem")
{
    for (const Index3 dims : {Index3{2, 1, 8}, Index3{2, 2, 4}})
    {
        const Grid g = cube_grid(dims);
        const auto eps = disordered(layered(g), 3, 0.05);
        const auto [a, b] = dense_operators(eps);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXcd> ges(a, b);
        REQUIRE(ges.info() == Eigen::Success);
        std::vector<double> nonzero;
        std::size_t null = 0;
        for (Eigen::Index i = 0; i < ges.eigenvalues().size(); ++i)
        {
            const double w2 = ges.eigenvalues()(i);
            if (w2 < 1e-8)
            {
                ++null;
            }
            else
            {
                nonzero.push_back(std::sqrt(w2));
            }
        }
        CHECK(null == g.size() + 2);
        const ModeSet modes = solve_modes(eps);
        REQUIRE(modes.size() == nonzero.size());
        CHECK(modes.complete());
        for (std::size_t i = 0; i < nonzero.size(); ++i)
        {
            CHECK(std::abs(modes.omega(i) - nonzero[i]) <= 1e-10 * nonzero[i]);
        }
    }
}

TEST_CASE("homogeneous spectrum is the plane-wave dispersion")
{
    for (const double e : {1.0, 2.25})
    {
        const Grid g({4, 2, 6}, {1.0, 2.0, 3.0});
        const ModeSet modes = solve_modes(build_profile(g, HomogeneousSpec{e}));
        const auto expected = plane_wave_spectrum(g, e);
        REQUIRE(modes.size() == expected.size());
        for (std::size_t i = 0; i < expected.size(); ++i)
        {
            CHECK(std::abs(modes.omega(i) - expected[i]) <= 1e-10 * expected[i]);
        }
    }
}

TEST_CASE("transverse mode count is 2N - 2")
{
    for (const Index3 dims : {Index3{4, 4, 4}, Index3{2, 1, 16}, Index3{3, 1, 5}})
    {
        const Grid g = cube_grid(dims);
        const ModeSet modes = solve_modes(layered(g));
        CHECK(modes.size() == 2 * g.size() - 2);
        CHECK(modes.complete());
    }
}

TEST_CASE("modes are eps-orthonormal, transverse and satisfy the eigen equation")
{
    const Grid g = cube_grid({4, 2, 8});
    const auto eps = disordered(layered(g), 9, 0.05);
    const ModeSet modes = solve_modes(eps);
    CHECK(gram_error(modes) <= 1e-10);
    CHECK(std::is_sorted(modes.omegas().begin(), modes.omegas().end()));
    for (std::size_t l = 0; l < modes.size(); ++l)
    {
        const VectorField f = modes.field(l);
        CHECK(transversality_residual(f, eps) <= 1e-9);
        if (!modes.degenerate(l))
        {
            const VectorField bf = eps.multiply(f);
            const double w2 = modes.omega(l) * modes.omega(l);
            CHECK(norm(curl(curl(f)) - w2 * bf) <= 1e-9 * w2 * norm(bf));
        }
    }
}

TEST_CASE("largest Fourier coefficient is real and positive")
{
    const Grid g = cube_grid({4, 1, 8});
    const ModeSet modes = solve_modes(layered(g));
    for (std::size_t l = 0; l < modes.size(); ++l)
    {
        const auto c = to_fourier(modes.field(l));
        double mx = 0.0;
        for (const auto &x : c)
        {
            mx = std::max(mx, std::abs(x));
        }
        const auto it = std::find_if(c.begin(), c.end(), [&](const cplx &x) { return std::abs(x) >= (1 - 1e-9) * mx; });
        REQUIRE(it != c.end());
        CHECK(it->real() > 0.0);
        CHECK(std::abs(it->imag()) <= 1e-12 * mx);
    }
}

TEST_CASE("solve is deterministic and truncation keeps the lowest modes")
{
    const Grid g = cube_grid({2, 2, 8});
    const auto eps = layered(g);
    const ModeSet a = solve_modes(eps);
    const ModeSet b = solve_modes(eps);
    CHECK(a.omegas() == b.omegas());
    CHECK(a.matrix() == b.matrix());
    ModeSolverOptions opt;
    opt.count = 5;
    const ModeSet c = solve_modes(eps, opt);
    REQUIRE(c.size() == 5);
    CHECK_FALSE(c.complete());
    for (std::size_t i = 0; i < 5; ++i)
    {
        CHECK(c.omega(i) == doctest::Approx(a.omega(i)).epsilon(1e-12));
    }
    opt.count = 2 * g.size() - 1;
    CHECK_THROWS_AS(solve_modes(eps, opt), InvalidArgument);
}

TEST_CASE("degenerate clusters and nondegenerate labels")
{
    const Grid g = cube_grid({2, 1, 8});
    const ModeSet modes = solve_modes(build_profile(g, HomogeneousSpec{1.0}));
    // |k| = 1: m = (0,0,+-1) and the x Nyquist wave, two polarizations each
    CHECK(modes.cluster(0).size() == 6);
    CHECK(modes.degenerate(0));
    CHECK(lowest_nondegenerate(modes, 10).empty());

    const ModeSet layered_modes = solve_modes(layered(g));
    const auto labels = lowest_nondegenerate(layered_modes, 3);
    CHECK(labels.size() == 3);
    for (std::size_t l : labels)
    {
        CHECK(layered_modes.cluster(l).size() == 1);
    }
}

TEST_CASE("matching a mode set against itself is the identity")
{
    const Grid g = cube_grid({2, 1, 16});
    const auto eps = layered(g);
    const ModeSet modes = solve_modes(eps);
    const MatchResult r = match_modes(modes, modes);
    CHECK(r.unmatched_references.empty());
    for (const auto &m : r.matches)
    {
        REQUIRE(m.reference.has_value());
        CHECK(std::abs(m.overlap - 1.0) < 1e-10);
    }
    const ModeSet perturbed = solve_modes(disordered(eps, 2, 0.01));
    const MatchResult p = match_modes(modes, perturbed);
    for (std::size_t l : lowest_nondegenerate(perturbed, 4))
    {
        REQUIRE(p.matches[l].reference.has_value());
        CHECK(p.matches[l].overlap > 0.9);
    }
    ModeSolverOptions opt;
    opt.count = 10;
    CHECK_THROWS_AS(match_modes(modes, solve_modes(eps, opt)), InvalidArgument);
}
