#pragma once

#include "epsmode/green.hpp"

namespace epsmode
{

/// Gauge term grad(chi) turning an eps_I-transverse mode into an
/// eps_II-transverse field.
///
/// On the periodic box the gradient may carry a uniform (zero wave number)
/// part, which is kept in `uniform`; gradient(chi) + uniform == gradient_field.
struct GaugeTerm
{
    std::size_t label = 0;
    double omega = 0.0;
    VectorField gradient_field;
    ScalarField chi; ///< zero mean
    Cplx3 uniform{};
};

/// grad(chi) = G^L_II(omega) V(omega) f_I, with G^L_II built from the complete
/// eps_II mode set.
GaugeTerm gauge_gradient(const ModeSet &modes_ii, const DielectricProfile &eps_i, const VectorField &f_i,
                         double omega, std::size_t label = 0);

/// Zero gauge term on the grid of f, used as a control.
GaugeTerm zero_gauge(const VectorField &f, double omega, std::size_t label = 0);

/// ||div(eps_II (f_I + grad chi))|| / ||f_I + grad chi||
double verify_gauge_condition(const DielectricProfile &eps_ii, const VectorField &f_i, const GaugeTerm &term);

/// gradient(chi) + uniform.
VectorField regradient(const GaugeTerm &term);

/// Polarization e_{k, sigma}: e_1 ~ z x k (x when k || z), e_2 = k_hat x e_1.
Real3 polarization(const Real3 &k, int sigma);

/// e^{ik.r} e_{k, sigma} / sqrt(V) for signed wave index m.
VectorField plane_wave(const Grid &grid, const Index3 &m, int sigma);

/// Gauge-transformed profile of a unit plane wave when eps_I = 1:
/// pw / eps_II + sum_l f_l <f_l, (eps_II - 1) pw>, division dealiased.
VectorField plane_wave_gauge_profile(const DielectricProfile &eps_ii, const ModeSet &modes_ii, const Index3 &m,
                                     int sigma);

struct FieldProfiles
{
    VectorField a; ///< f_I + grad chi
    VectorField e; ///< equal to a
    VectorField b; ///< curl f_I
    VectorField d; ///< eps_II e
    double curl_gauge = 0.0;       ///< ||curl(grad chi)||
    double divergence_d = 0.0;     ///< ||div D|| / ||D||
};

FieldProfiles assemble_field_profiles(const VectorField &f_i, const GaugeTerm &term, const DielectricProfile &eps_ii);

} // namespace epsmode
