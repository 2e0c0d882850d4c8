#include "epsmode/gauge.hpp"

#include "epsmode/errors.hpp"

#include <cmath>

namespace epsmode
{

namespace
{

/// chi from its gradient: chi_k = -i k.g_k / |k|^2, chi_0 = 0; returns g_0.
Cplx3 integrate_gradient(const VectorField &g, ScalarField &chi)
{
    const Grid &grid = g.grid();
    const std::size_t n = grid.size();
    const auto c = to_fourier(g);
    std::vector<cplx> chik(n);
    Cplx3 uniform{};
    for (std::size_t j = 0; j < n; ++j)
    {
        const Real3 k = grid.wave_vector(j);
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        if (k2 == 0.0)
        {
            uniform = {c[j], c[n + j], c[2 * n + j]};
            continue;
        }
        const cplx kg = k[0] * c[j] + k[1] * c[n + j] + k[2] * c[2 * n + j];
        chik[j] = cplx(0.0, -1.0) * kg / k2;
    }
    chi = ScalarField(grid, from_fourier(grid, chik));
    return uniform;
}

} // namespace

GaugeTerm gauge_gradient(const ModeSet &modes_ii, const DielectricProfile &eps_i, const VectorField &f_i,
                         double omega, std::size_t label)
{
    require_same_grid(modes_ii.grid(), eps_i.grid());
    require_same_grid(modes_ii.grid(), f_i.grid());
    if (!modes_ii.complete())
    {
        throw InvalidArgument("gauge term needs the complete medium-II mode set");
    }
    const PerturbationPotential v = perturbation_potential(eps_i, modes_ii.profile(), omega);
    const SpectralKernel gl(modes_ii, KernelKind::Longitudinal, omega);
    GaugeTerm term{label, omega, gl.apply(v.apply(f_i)), ScalarField(f_i.grid()), {}};
    term.uniform = integrate_gradient(term.gradient_field, term.chi);
    return term;
}

GaugeTerm zero_gauge(const VectorField &f, double omega, std::size_t label)
{
    return {label, omega, VectorField(f.grid()), ScalarField(f.grid()), {}};
}

double verify_gauge_condition(const DielectricProfile &eps_ii, const VectorField &f_i, const GaugeTerm &term)
{
    return transversality_residual(f_i + term.gradient_field, eps_ii);
}

VectorField regradient(const GaugeTerm &term)
{
    VectorField out = gradient(term.chi);
    out += VectorField::constant(out.grid(), term.uniform);
    return out;
}

Real3 polarization(const Real3 &k, int sigma)
{
    const double kn = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
    if (kn == 0.0)
    {
        throw InvalidArgument("polarization undefined for k = 0");
    }
    if (sigma != 1 && sigma != 2)
    {
        throw InvalidArgument("polarization index must be 1 or 2");
    }
    Real3 e1{-k[1], k[0], 0.0}; // z x k
    const double n1 = std::hypot(e1[0], e1[1]);
    if (n1 <= 1e-14 * kn)
    {
        e1 = {1.0, 0.0, 0.0};
    }
    else
    {
        e1 = {e1[0] / n1, e1[1] / n1, 0.0};
    }
    if (sigma == 1)
    {
        return e1;
    }
    const Real3 h{k[0] / kn, k[1] / kn, k[2] / kn};
    return {h[1] * e1[2] - h[2] * e1[1], h[2] * e1[0] - h[0] * e1[2], h[0] * e1[1] - h[1] * e1[0]};
}

VectorField plane_wave(const Grid &grid, const Index3 &m, int sigma)
{
    const std::size_t j = grid.flat_of_wave(m);
    if (j == Grid::npos)
    {
        throw InvalidArgument("wave index not representable on the grid");
    }
    const Real3 k = grid.wave_vector(j);
    const Real3 e = polarization(k, sigma);
    const double s = 1.0 / std::sqrt(grid.volume());
    return VectorField::from_function(grid, [&](const Real3 &r) {
        const cplx phase = std::polar(s, k[0] * r[0] + k[1] * r[1] + k[2] * r[2]);
        return Cplx3{phase * e[0], phase * e[1], phase * e[2]};
    });
}

VectorField plane_wave_gauge_profile(const DielectricProfile &eps_ii, const ModeSet &modes_ii, const Index3 &m,
                                     int sigma)
{
    require_same_grid(eps_ii.grid(), modes_ii.grid());
    const VectorField pw = plane_wave(eps_ii.grid(), m, sigma);
    // sum_l f_l <f_l, (eps_II - 1) pw> is the transverse kernel sum with unit weights.
    const VectorField weighted = eps_ii.multiply(pw) - pw;
    const auto &f = modes_ii.matrix();
    const Eigen::Map<const Eigen::VectorXcd> w(weighted.data().data(), static_cast<Eigen::Index>(weighted.data().size()));
    const Eigen::VectorXcd sum = f * (eps_ii.grid().cell_volume() * (f.adjoint() * w));
    VectorField out = eps_ii.divide(pw);
    out += VectorField(eps_ii.grid(), std::vector<cplx>(sum.data(), sum.data() + sum.size()));
    return out;
}

FieldProfiles assemble_field_profiles(const VectorField &f_i, const GaugeTerm &term, const DielectricProfile &eps_ii)
{
    VectorField a = f_i + term.gradient_field;
    VectorField d = eps_ii.multiply(a);
    FieldProfiles out{a, a, curl(f_i), d, norm(curl(term.gradient_field)), 0.0};
    const double dn = norm(d);
    out.divergence_d = dn > 0.0 ? norm(divergence(d)) / dn : 0.0;
    return out;
}

} // namespace epsmode
