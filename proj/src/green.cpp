#include "epsmode/green.hpp"

#include "epsmode/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace epsmode
{

const char *to_string(KernelKind kind) noexcept
{
    switch (kind)
    {
    case KernelKind::Transverse:
        return "G_T";
    case KernelKind::Longitudinal:
        return "G_L";
    case KernelKind::Reduced:
        return "K";
    case KernelKind::Full:
        return "G";
    }
    return "?";
}

SpectralKernel::SpectralKernel(const ModeSet &modes, KernelKind kind, double omega, KernelOptions options)
    : modes_(&modes), kind_(kind), omega_(omega), options_(std::move(options))
{
    if (!(omega_ >= 0.0) || !std::isfinite(omega_) || !(options_.eta >= 0.0))
    {
        throw InvalidArgument("kernel needs omega >= 0 and eta >= 0");
    }
    if (kind_ != KernelKind::Transverse && omega_ == 0.0)
    {
        throw InvalidArgument("kernel kind requires omega > 0");
    }
    const std::size_t n = modes.size();
    std::vector<bool> excluded(n, false);
    for (std::size_t l : options_.excluded)
    {
        if (l >= n)
        {
            throw InvalidArgument("excluded mode label out of range");
        }
        excluded[l] = true;
    }
    const bool resonant_kind = kind_ != KernelKind::Longitudinal;
    if (resonant_kind && options_.eta == 0.0)
    {
        for (std::size_t l = 0; l < n; ++l)
        {
            if (!excluded[l] && std::abs(omega_ - modes.omega(l)) <= options_.resonance_tol)
            {
                throw ResonanceError("probe frequency " + std::to_string(omega_) + " resonant with mode " +
                                     std::to_string(l) + " (omega " + std::to_string(modes.omega(l)) + ")");
            }
        }
    }
    const cplx w(omega_, options_.eta);
    const double w2 = omega_ * omega_;
    weights_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t l = 0; l < n; ++l)
    {
        if (excluded[l])
        {
            continue;
        }
        const double wl2 = modes.omega(l) * modes.omega(l);
        cplx weight{};
        switch (kind_)
        {
        case KernelKind::Transverse:
            weight = 1.0 / (w * w - wl2);
            break;
        case KernelKind::Longitudinal:
            weight = -1.0 / w2;
            break;
        case KernelKind::Reduced:
        case KernelKind::Full:
            weight = (wl2 / w2) / (w * w - wl2);
            break;
        }
        weights_(static_cast<Eigen::Index>(l)) = weight;
    }
    local_term_ = kind_ == KernelKind::Longitudinal || kind_ == KernelKind::Full;
}

VectorField SpectralKernel::apply(const VectorField &source) const
{
    require_same_grid(modes_->grid(), source.grid());
    const auto &f = modes_->matrix();
    const Eigen::Map<const Eigen::VectorXcd> v(source.data().data(), static_cast<Eigen::Index>(source.data().size()));
    const Eigen::VectorXcd c = source.grid().cell_volume() * (f.adjoint() * v);
    const Eigen::VectorXcd sum = f * c.cwiseProduct(weights_);
    VectorField out(source.grid(), std::vector<cplx>(sum.data(), sum.data() + sum.size()));
    if (local_term_)
    {
        out.axpy(1.0 / (omega_ * omega_), modes_->profile().divide(source));
    }
    return out;
}

std::vector<std::size_t> modes_near(const ModeSet &modes, double omega, double rel_tol)
{
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < modes.size(); ++l)
    {
        if (std::abs(modes.omega(l) - omega) <= rel_tol * omega)
        {
            out.push_back(l);
        }
    }
    return out;
}

std::vector<VectorField> probe_fields(const Grid &grid, std::size_t count, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<VectorField> out;
    out.reserve(count);
    for (std::size_t p = 0; p < count; ++p)
    {
        VectorField v(grid);
        for (auto &x : v.data())
        {
            const double re = normal(rng);
            const double im = normal(rng);
            x = {re, im};
        }
        out.push_back(std::move(v));
    }
    return out;
}

double kernel_identity_residual(const ModeSet &modes, double omega)
{
    const SpectralKernel gt(modes, KernelKind::Transverse, omega);
    const SpectralKernel gl(modes, KernelKind::Longitudinal, omega);
    const SpectralKernel k(modes, KernelKind::Reduced, omega);
    double worst = 0.0;
    for (const auto &v : probe_fields(modes.grid()))
    {
        VectorField diff = gt.apply(v) + gl.apply(v) - k.apply(v);
        diff.axpy(-1.0 / (omega * omega), modes.profile().divide(v));
        worst = std::max(worst, norm(diff) / norm(v));
    }
    return worst;
}

namespace
{
double dot_real(std::span<const cplx> a, std::span<const cplx> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        s += (std::conj(a[i]) * b[i]).real();
    }
    return s;
}

/// -div(eps grad phi)
ScalarField elliptic(const ScalarField &phi, const DielectricProfile &eps)
{
    ScalarField out = divergence(gradient(phi), eps.profile());
    out *= -1.0;
    return out;
}
} // namespace

HelmholtzParts helmholtz_decompose(const VectorField &field, const DielectricProfile &eps,
                                   const HelmholtzOptions &options)
{
    require_same_grid(field.grid(), eps.grid());
    const Grid &g = field.grid();
    const std::size_t n = g.size();
    const double eps_mean = eps.profile().mean();

    ScalarField b = divergence(field, eps.profile());
    b *= -1.0;
    const double bnorm = std::sqrt(dot_real(b.values(), b.values()));

    // Preconditioner: inverse of the constant-coefficient operator mean(eps) |k|^2.
    auto precondition = [&](const ScalarField &r) {
        auto c = to_fourier(g, r.values());
        for (std::size_t j = 0; j < n; ++j)
        {
            const Real3 k = g.wave_vector(j);
            const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            c[j] = k2 > 0.0 ? c[j] / (eps_mean * k2) : cplx{};
        }
        return ScalarField(g, from_fourier(g, c));
    };

    ScalarField phi(g);
    int iterations = 0;
    if (bnorm > 0.0)
    {
        ScalarField r = b;
        ScalarField z = precondition(r);
        ScalarField p = z;
        double rz = dot_real(r.values(), z.values());
        while (std::sqrt(dot_real(r.values(), r.values())) > options.tolerance * bnorm)
        {
            if (iterations >= options.max_iterations)
            {
                throw ConvergenceError("Helmholtz decomposition did not converge");
            }
            const ScalarField ap = elliptic(p, eps);
            const double alpha = rz / dot_real(p.values(), ap.values());
            for (std::size_t i = 0; i < n; ++i)
            {
                phi[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            z = precondition(r);
            const double rz_new = dot_real(r.values(), z.values());
            const double beta = rz_new / rz;
            rz = rz_new;
            for (std::size_t i = 0; i < n; ++i)
            {
                p[i] = z[i] + beta * p[i];
            }
            ++iterations;
        }
    }
    VectorField longitudinal = gradient(phi);
    VectorField transverse = field - longitudinal;
    return {std::move(transverse), std::move(longitudinal), std::move(phi), iterations};
}

VectorField direct_inverse_apply(const DielectricProfile &eps, double omega, const VectorField &source)
{
    require_same_grid(eps.grid(), source.grid());
    const Grid &g = eps.grid();
    const auto n = static_cast<Eigen::Index>(g.size());
    if (3 * n > 3000)
    {
        throw InvalidArgument("direct inverse limited to 3000 unknowns");
    }
    Eigen::MatrixXcd op = Eigen::MatrixXcd::Zero(3 * n, 3 * n);
    const double w2 = omega * omega;
    for (Eigen::Index i = 0; i < n; ++i)
    {
        const Index3 mi = g.wave_index(static_cast<std::size_t>(i));
        const Real3 k = g.wave_vector(static_cast<std::size_t>(i));
        const double k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
        for (int a = 0; a < 3; ++a)
        {
            for (int b = 0; b < 3; ++b)
            {
                op(a * n + i, b * n + i) -= (a == b ? k2 : 0.0) - k[a] * k[b];
            }
        }
        for (Eigen::Index j = 0; j < n; ++j)
        {
            const Index3 mj = g.wave_index(static_cast<std::size_t>(j));
            const cplx e = eps.profile().coefficient({mi[0] - mj[0], mi[1] - mj[1], mi[2] - mj[2]});
            if (e != cplx{})
            {
                for (int a = 0; a < 3; ++a)
                {
                    op(a * n + i, a * n + j) += w2 * e;
                }
            }
        }
    }
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(op);
    if (!(lu.rcond() > 1e-13))
    {
        throw SingularSystemError("wave operator singular at omega = " + std::to_string(omega));
    }
    const auto c = to_fourier(source);
    const Eigen::Map<const Eigen::VectorXcd> rhs(c.data(), 3 * n);
    const Eigen::VectorXcd x = lu.solve(rhs);
    return vector_from_fourier(g, std::vector<cplx>(x.data(), x.data() + x.size()));
}

} // namespace epsmode
