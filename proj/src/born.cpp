#include "epsmode/born.hpp"

#include "epsmode/errors.hpp"

#include <algorithm>
#include <cmath>

namespace epsmode
{

const char *to_string(BornVariant v) noexcept
{
    return v == BornVariant::GBased ? "G-based" : "K-based";
}

const char *to_string(FrequencyPolicy p) noexcept
{
    return p == FrequencyPolicy::Fixed ? "fixed" : "self-consistent";
}

namespace
{

/// ||curl f||^2 / <f, eps f>
double rayleigh_omega(const VectorField &f, const DielectricProfile &eps)
{
    const double num = std::pow(norm(curl(f)), 2);
    const double den = weighted_inner_product(f, f, &eps.profile()).real();
    if (!(den > 0.0) || !(num > 0.0))
    {
        throw ConvergenceError("Rayleigh quotient undefined for Born iterate");
    }
    return std::sqrt(num / den);
}

} // namespace

BornTrace born_series(BornVariant variant, const ModeSet &modes_i, const DielectricProfile &eps_ii,
                      std::size_t label, int max_order, const BornOptions &options)
{
    require_same_grid(modes_i.grid(), eps_ii.grid());
    if (label >= modes_i.size())
    {
        throw InvalidArgument("mode label out of range");
    }
    if (max_order < 0)
    {
        throw InvalidArgument("Born order must be non-negative");
    }
    const DielectricProfile &eps_i = modes_i.profile();
    const ScalarProfile delta = delta_epsilon(eps_i, eps_ii);
    const VectorField f_i = modes_i.field(label);
    const VectorField source = eps_i.multiply(f_i); // eps_I f_I, K-based driving term
    const double omega_i = modes_i.omega(label);

    BornTrace trace;
    trace.variant = variant;
    trace.policy = options.policy;
    trace.label = label;
    trace.excluded = modes_near(modes_i, omega_i, options.degeneracy_tol);

    double omega = omega_i;
    if (options.policy == FrequencyPolicy::SelfConsistent)
    {
        const double w2 = omega_i * omega_i + first_order_frequency_shift(modes_i, label, delta);
        if (!(w2 > 0.0))
        {
            throw ConvergenceError("first-order frequency estimate is not positive");
        }
        omega = std::sqrt(w2);
    }

    VectorField current = variant == BornVariant::GBased ? f_i : eps_ii.divide(source);
    for (int n = 0;; ++n)
    {
        KernelOptions kopt;
        kopt.resonance_tol = options.resonance_tol;
        kopt.excluded = trace.excluded;
        const PerturbationPotential v(delta, omega);
        const VectorField vf = v.apply(current);

        VectorField next(current.grid());
        double residual = 0.0;
        if (variant == BornVariant::GBased)
        {
            const SpectralKernel g(modes_i, KernelKind::Full, omega, kopt);
            next = f_i + g.apply(vf);
            residual = norm(current - next) / norm(current);
        }
        else
        {
            const SpectralKernel k(modes_i, KernelKind::Reduced, omega, kopt);
            const VectorField rhs = source + eps_i.multiply(k.apply(vf));
            const VectorField d = eps_ii.multiply(current);
            residual = norm(d - rhs) / norm(d);
            next = eps_ii.divide(rhs);
        }

        if (!current.all_finite())
        {
            throw ConvergenceError("Born iterate is not finite at order " + std::to_string(n));
        }
        const double transversality = transversality_residual(current, eps_ii);
        const double change = n == 0 ? 0.0 : norm(current - trace.orders.back().field);
        BornOrder rec{n, omega, std::move(current), transversality, change, residual};
        trace.orders.push_back(std::move(rec));
        if (n == max_order)
        {
            break;
        }
        current = std::move(next);
        if (options.policy == FrequencyPolicy::SelfConsistent)
        {
            omega = rayleigh_omega(current, eps_ii);
        }
    }
    return trace;
}

double homogeneous_ls_residual(BornVariant variant, const ModeSet &modes_i, const DielectricProfile &eps_ii,
                               const VectorField &f_ii, double omega_ii, double resonance_tol)
{
    require_same_grid(modes_i.grid(), eps_ii.grid());
    require_same_grid(modes_i.grid(), f_ii.grid());
    const DielectricProfile &eps_i = modes_i.profile();
    const PerturbationPotential v = perturbation_potential(eps_i, eps_ii, omega_ii);
    KernelOptions kopt;
    kopt.resonance_tol = resonance_tol;
    const VectorField vf = v.apply(f_ii);
    if (variant == BornVariant::GBased)
    {
        const SpectralKernel g(modes_i, KernelKind::Full, omega_ii, kopt);
        return norm(f_ii - g.apply(vf)) / norm(f_ii);
    }
    const SpectralKernel k(modes_i, KernelKind::Reduced, omega_ii, kopt);
    const VectorField d = eps_ii.multiply(f_ii);
    return norm(d - eps_i.multiply(k.apply(vf))) / norm(d);
}

double first_order_frequency_shift(const ModeSet &modes_i, std::size_t label, const ScalarProfile &delta_eps)
{
    require_same_grid(modes_i.grid(), delta_eps.grid());
    const VectorField f = modes_i.field(label);
    const double w = modes_i.omega(label);
    return -w * w * weighted_inner_product(f, f, &delta_eps).real();
}

namespace
{

Eigen::MatrixXcd h_family(const ModeSet &modes, std::size_t count, double &max_div)
{
    const auto n3 = static_cast<Eigen::Index>(3 * modes.grid().size());
    Eigen::MatrixXcd h(n3, static_cast<Eigen::Index>(count));
    for (std::size_t l = 0; l < count; ++l)
    {
        const VectorField hl = modes.profile().multiply(modes.field(l));
        max_div = std::max(max_div, norm(divergence(hl)) / norm(hl));
        h.col(static_cast<Eigen::Index>(l)) =
            Eigen::Map<const Eigen::VectorXcd>(hl.data().data(), n3);
    }
    return h;
}

} // namespace

CouplingMatrix coupling_matrix(const ModeSet &modes_i, const ModeSet &modes_ii, std::optional<std::size_t> basis_size)
{
    require_same_grid(modes_i.grid(), modes_ii.grid());
    const std::size_t nb = std::min(basis_size.value_or(modes_i.size()), modes_i.size());
    if (nb == 0)
    {
        throw InvalidArgument("coupling basis is empty");
    }
    CouplingMatrix out;
    out.basis_size = nb;
    out.truncated = nb < modes_i.size() || !modes_i.complete();

    const Eigen::MatrixXcd hi = h_family(modes_i, nb, out.max_divergence);
    const Eigen::MatrixXcd hii = h_family(modes_ii, modes_ii.size(), out.max_divergence);
    if (out.max_divergence > 1e-9)
    {
        throw ConvergenceError("h fields are not divergence-free (" + std::to_string(out.max_divergence) + ")");
    }

    const Eigen::MatrixXcd gram = hi.adjoint() * hi;
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(gram, Eigen::EigenvaluesOnly).eigenvalues();
    out.gram_condition = ev(0) > 0.0 ? ev(ev.size() - 1) / ev(0) : std::numeric_limits<double>::infinity();
    if (!(out.gram_condition <= 1e12))
    {
        throw SingularSystemError("coupling basis Gram condition number " + std::to_string(out.gram_condition));
    }

    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(hi);
    const Eigen::MatrixXcd coeffs = qr.solve(hii); // nb x n_ii
    out.c = coeffs.transpose();
    out.row_residuals.resize(modes_ii.size());
    for (Eigen::Index r = 0; r < hii.cols(); ++r)
    {
        const double res = (hi * coeffs.col(r) - hii.col(r)).norm() / hii.col(r).norm();
        out.row_residuals[static_cast<std::size_t>(r)] = res;
        out.max_residual = std::max(out.max_residual, res);
    }
    return out;
}

namespace
{

/// max over points within `half` of `position` (periodic) of w |d_axis q|.
double slab_proxy(const ScalarField &q, int axis, double position, double half, double width)
{
    const Grid &g = q.grid();
    const VectorField dq = gradient(q);
    const double len = g.lengths()[axis];
    double best = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i)
    {
        double d = std::fmod(std::abs(g.position(i)[axis] - position), len);
        d = std::min(d, len - d);
        if (d <= half)
        {
            best = std::max(best, width * std::abs(dq(axis, i)));
        }
    }
    return best;
}

double tangential_proxy(const VectorField &e, int axis, double position, double half, double width)
{
    double best = 0.0;
    for (int c = 0; c < 3; ++c)
    {
        if (c == axis)
        {
            continue;
        }
        const auto comp = e.component(c);
        const ScalarField s(e.grid(), std::vector<cplx>(comp.begin(), comp.end()));
        best = std::max(best, slab_proxy(s, axis, position, half, width));
    }
    return best;
}

double normal_proxy(const VectorField &d, int axis, double position, double half, double width)
{
    const auto comp = d.component(axis);
    const ScalarField s(d.grid(), std::vector<cplx>(comp.begin(), comp.end()));
    return slab_proxy(s, axis, position, half, width);
}

} // namespace

InterfaceReport interface_continuity_report(const DielectricProfile &eps_ii, const ModeSet &modes_i,
                                            std::size_t label)
{
    require_same_grid(modes_i.grid(), eps_ii.grid());
    if (!eps_ii.interfaces() || eps_ii.interfaces()->positions.empty())
    {
        throw InvalidArgument("interface report needs a profile with declared interfaces");
    }
    if (label >= modes_i.size())
    {
        throw InvalidArgument("mode label out of range");
    }
    const InterfaceSet &set = *eps_ii.interfaces();
    const Grid &g = eps_ii.grid();
    const double spacing = g.lengths()[set.axis] / g.dims()[set.axis];
    const double half = std::max(2.0 * set.width, spacing);
    const double w = set.width > 0.0 ? set.width : spacing;

    const VectorField f_i = modes_i.field(label);
    const VectorField d_unperturbed = modes_i.profile().multiply(f_i);
    const VectorField e_g = f_i;
    const VectorField d_g = eps_ii.multiply(e_g);
    const VectorField e_k = eps_ii.divide(d_unperturbed);
    const VectorField d_k = eps_ii.multiply(e_k);

    InterfaceReport report;
    report.label = label;
    report.axis = set.axis;
    report.width = set.width;
    report.d_identity_residual = max_abs(d_k - d_unperturbed);
    for (double z : set.positions)
    {
        InterfaceRow row;
        row.position = z;
        row.g_tangential_e = tangential_proxy(e_g, set.axis, z, half, w);
        row.k_tangential_e = tangential_proxy(e_k, set.axis, z, half, w);
        row.g_normal_d = normal_proxy(d_g, set.axis, z, half, w);
        row.k_normal_d = normal_proxy(d_k, set.axis, z, half, w);
        row.unperturbed_normal_d = normal_proxy(d_unperturbed, set.axis, z, half, w);
        report.rows.push_back(row);
    }
    return report;
}

} // namespace epsmode
