#pragma once

#include "epsmode/modes.hpp"

#include <vector>

namespace epsmode
{

enum class KernelKind
{
    Transverse,   ///< G^T: sum f f^* / ((w + i eta)^2 - w_l^2)
    Longitudinal, ///< G^L: delta / (eps w^2) - sum f f^* / w^2
    Reduced,      ///< K:   sum (w_l / w)^2 f f^* / ((w + i eta)^2 - w_l^2)
    Full,         ///< G = K + delta / (eps w^2)
};

const char *to_string(KernelKind kind) noexcept;

struct KernelOptions
{
    double eta = 0.0;
    /// Minimum |w - w_l| for non-excluded modes when eta == 0.
    double resonance_tol = 1e-8;
    /// Mode labels dropped from every mode sum of the kernel.
    std::vector<std::size_t> excluded;
};

/// Mode-sum Green kernel at probe frequency w over a ModeSet.
///
/// Holds a reference to the ModeSet, which must outlive the kernel. Inner
/// products in the sums are unweighted; the discrete delta is delta_rr' / dV, so
/// the local term is the inverse of the dealiased multiplication by eps, over w^2.
class SpectralKernel
{
public:
    SpectralKernel(const ModeSet &modes, KernelKind kind, double omega, KernelOptions options = {});

    KernelKind kind() const noexcept { return kind_; }
    double omega() const noexcept { return omega_; }
    const KernelOptions &options() const noexcept { return options_; }
    const ModeSet &modes() const noexcept { return *modes_; }

    VectorField apply(const VectorField &source) const;

private:
    const ModeSet *modes_;
    KernelKind kind_;
    double omega_;
    KernelOptions options_;
    Eigen::VectorXcd weights_;
    bool local_term_;
};

inline VectorField apply_kernel(const SpectralKernel &kernel, const VectorField &source)
{
    return kernel.apply(source);
}

/// Modes within rel_tol * w of the probe frequency w.
std::vector<std::size_t> modes_near(const ModeSet &modes, double omega, double rel_tol);

/// Max over 16 fixed pseudo-random probes of ||(G - K) v - v / (eps w^2)|| / ||v||,
/// with G evaluated as G^T + G^L.
double kernel_identity_residual(const ModeSet &modes, double omega);

/// The 16 probe fields used by kernel_identity_residual.
std::vector<VectorField> probe_fields(const Grid &grid, std::size_t count = 16, std::uint64_t seed = 0x5eed);

struct HelmholtzOptions
{
    double tolerance = 1e-11;
    int max_iterations = 500;
};

struct HelmholtzParts
{
    VectorField transverse;   ///< div(eps T) = 0
    VectorField longitudinal; ///< grad phi
    ScalarField potential;    ///< phi, zero mean
    int iterations = 0;
};

/// Unique split v = T + grad(phi) with div(eps T) = 0, solving
/// div(eps grad phi) = div(eps v) by preconditioned conjugate gradients.
HelmholtzParts helmholtz_decompose(const VectorField &field, const DielectricProfile &eps,
                                   const HelmholtzOptions &options = {});

/// Solves (-curl curl + eps w^2) x = source with a dense factorization of the
/// plane-wave operator. Limited to 3N <= 3000 unknowns.
VectorField direct_inverse_apply(const DielectricProfile &eps, double omega, const VectorField &source);

} // namespace epsmode
