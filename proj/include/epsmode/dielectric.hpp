#pragma once

#include "epsmode/spectral.hpp"

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

namespace epsmode
{

/// Interface planes of a layered profile, normal to `axis`.
struct InterfaceSet
{
    int axis = 2;
    std::vector<double> positions;
    double width = 0.0;
};

/// Strictly positive, real, band-limited dielectric function.
class DielectricProfile
{
public:
    DielectricProfile(ScalarProfile profile, double eps_min, std::optional<InterfaceSet> interfaces = std::nullopt);

    const ScalarProfile &profile() const noexcept { return profile_; }
    const Grid &grid() const noexcept { return profile_.grid(); }
    const Index3 &band() const noexcept { return profile_.band(); }
    std::span<const double> values() const noexcept { return profile_.values(); }
    double eps_min() const noexcept { return eps_min_; }
    const std::optional<InterfaceSet> &interfaces() const noexcept { return interfaces_; }

    VectorField multiply(const VectorField &f) const { return profile_.multiply(f); }
    VectorField divide(const VectorField &f) const { return profile_.divide(f); }

private:
    ScalarProfile profile_;
    double eps_min_;
    std::optional<InterfaceSet> interfaces_;
};

struct HomogeneousSpec
{
    double value = 1.0;
};

/// values[j] fills the layer between interfaces[j-1] and interfaces[j]; the
/// first layer starts at 0 and the last ends at L, where it meets the first
/// layer again through the periodic boundary.
struct LayeredSpec
{
    std::vector<double> values;
    std::vector<double> interfaces;
    double width = 0.0;
    int axis = 2;
};

struct SampledSpec
{
    std::vector<double> values;
};

using ProfileSpec = std::variant<HomogeneousSpec, LayeredSpec, SampledSpec>;

struct ProfileOptions
{
    double eps_min = 0.05;
    /// Defaults to floor(N/3) per axis.
    std::optional<Index3> band_limit;
};

DielectricProfile build_profile(const Grid &grid, const ProfileSpec &spec, const ProfileOptions &options = {});

/// Smooth periodic indicator of [lo, hi) along one axis with tanh edges of width w.
std::vector<double> smooth_window(const Grid &grid, int axis, double lo, double hi, double width);

/// eps_b with the slab [lo, hi) along `axis` replaced by eps_a, tanh edges of width w.
DielectricProfile embed_region(const DielectricProfile &eps_b, const DielectricProfile &eps_a, int axis, double lo,
                               double hi, double width);

struct BoxRegion
{
    Real3 lower{};
    Real3 upper{};
    double edge_width = 0.0;
};

/// Seeded, Gaussian-correlated random perturbation. The statistical model is
/// a configurable stand-in: white noise filtered by a Gaussian kernel.
struct DisorderSpec
{
    std::uint64_t seed = 0;
    double rms = 0.0;
    Real3 correlation_lengths{1.0, 1.0, 1.0};
    std::optional<BoxRegion> region;
};

DielectricProfile generate_disorder(const DielectricProfile &base, const DisorderSpec &spec);

/// eps_ii - eps_i.
ScalarProfile delta_epsilon(const DielectricProfile &eps_i, const DielectricProfile &eps_ii);

/// V(r, w) = -(eps_ii - eps_i) w^2, an isotropic diagonal tensor.
class PerturbationPotential
{
public:
    PerturbationPotential(ScalarProfile delta_eps, double omega);

    const ScalarProfile &delta_eps() const noexcept { return delta_eps_; }
    double omega() const noexcept { return omega_; }
    /// Scalar field -delta_eps * omega^2.
    ScalarProfile scalar() const { return delta_eps_.scaled(-omega_ * omega_); }
    VectorField apply(const VectorField &f) const;

private:
    ScalarProfile delta_eps_;
    double omega_;
};

PerturbationPotential perturbation_potential(const DielectricProfile &eps_i, const DielectricProfile &eps_ii,
                                             double omega);

} // namespace epsmode
