#pragma once

#include "epsmode/green.hpp"

#include <optional>
#include <string>
#include <vector>

namespace epsmode
{

enum class BornVariant
{
    GBased, ///< f(n+1) = f_I + G_I V f(n)
    KBased, ///< eps_II f(n+1) = eps_I f_I + eps_I K_I V f(n)
};

enum class FrequencyPolicy
{
    Fixed,          ///< omega = omega_I, reduced kernel without the degenerate cluster
    SelfConsistent, ///< first-order shift at order 0, Rayleigh quotient afterwards
};

const char *to_string(BornVariant v) noexcept;
const char *to_string(FrequencyPolicy p) noexcept;

struct BornOptions
{
    FrequencyPolicy policy = FrequencyPolicy::Fixed;
    /// Relative width of the excluded cluster around omega_I.
    double degeneracy_tol = 1e-6;
    double resonance_tol = 1e-8;
};

struct BornOrder
{
    int order = 0;
    double omega = 0.0;
    VectorField field;
    /// ||div(eps_II f)|| / ||f||
    double transversality = 0.0;
    /// ||f(n) - f(n-1)||, zero at order 0.
    double change_norm = 0.0;
    /// Residual of the driven equation evaluated at f(n), relative.
    double ls_residual = 0.0;
};

struct BornTrace
{
    BornVariant variant = BornVariant::GBased;
    FrequencyPolicy policy = FrequencyPolicy::Fixed;
    std::size_t label = 0;
    std::vector<std::size_t> excluded;
    std::vector<BornOrder> orders;
};

/// Born iteration of the driven integral equation for mode `label` of medium I,
/// orders 0..max_order. All products with eps and delta eps are dealiased.
BornTrace born_series(BornVariant variant, const ModeSet &modes_i, const DielectricProfile &eps_ii,
                      std::size_t label, int max_order, const BornOptions &options = {});

/// Residual of the homogeneous integral equation for an eigenpair of medium II,
/// using full (unreduced) medium-I kernels at omega_ii.
double homogeneous_ls_residual(BornVariant variant, const ModeSet &modes_i, const DielectricProfile &eps_ii,
                               const VectorField &f_ii, double omega_ii, double resonance_tol = 1e-8);

/// delta(omega^2) = -omega^2 * integral of delta_eps |f|^2 for an eps_I-normalized mode.
double first_order_frequency_shift(const ModeSet &modes_i, std::size_t label, const ScalarProfile &delta_eps);

struct CouplingMatrix
{
    /// Rows: medium-II labels; columns: medium-I labels.
    Eigen::MatrixXcd c;
    std::vector<double> row_residuals;
    double max_residual = 0.0;
    double gram_condition = 0.0;
    /// Largest relative plain divergence over both h families.
    double max_divergence = 0.0;
    bool truncated = false;
    std::size_t basis_size = 0;
};

/// Least-squares expansion of h_II = eps_II f_II in the basis h_I = eps_I f_I.
/// Throws when the basis Gram matrix has condition number above 1e12.
CouplingMatrix coupling_matrix(const ModeSet &modes_i, const ModeSet &modes_ii,
                               std::optional<std::size_t> basis_size = std::nullopt);

struct InterfaceRow
{
    double position = 0.0;
    double g_tangential_e = 0.0;
    double k_tangential_e = 0.0;
    double g_normal_d = 0.0;
    double k_normal_d = 0.0;
    /// Normal-D proxy of the unperturbed field eps_I f_I.
    double unperturbed_normal_d = 0.0;
};

struct InterfaceReport
{
    std::size_t label = 0;
    int axis = 2;
    double width = 0.0;
    std::vector<InterfaceRow> rows;
    /// max |eps_II f_K(0) - eps_I f_I| pointwise.
    double d_identity_residual = 0.0;
};

/// Jump proxies max_slab w |d_n q| of the two zero-order solutions across the
/// declared interfaces of eps_ii.
InterfaceReport interface_continuity_report(const DielectricProfile &eps_ii, const ModeSet &modes_i,
                                            std::size_t label);

} // namespace epsmode
