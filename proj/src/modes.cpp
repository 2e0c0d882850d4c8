#include "epsmode/modes.hpp"

#include "epsmode/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <tuple>

namespace epsmode
{

ModeSet::ModeSet(DielectricProfile eps, std::vector<double> omegas, Eigen::MatrixXcd fields, double degeneracy_tol)
    : eps_(std::move(eps)), omegas_(std::move(omegas)), fields_(std::move(fields)), degeneracy_tol_(degeneracy_tol)
{
    if (static_cast<std::size_t>(fields_.cols()) != omegas_.size() ||
        static_cast<std::size_t>(fields_.rows()) != 3 * eps_.grid().size())
    {
        throw InvalidArgument("mode field matrix does not match grid or frequency count");
    }
    if (!std::is_sorted(omegas_.begin(), omegas_.end()))
    {
        throw InvalidArgument("mode frequencies must be sorted");
    }
}

VectorField ModeSet::field(std::size_t i) const
{
    if (i >= size())
    {
        throw InvalidArgument("mode label out of range");
    }
    std::vector<cplx> data(fields_.col(static_cast<Eigen::Index>(i)).data(),
                           fields_.col(static_cast<Eigen::Index>(i)).data() + fields_.rows());
    return VectorField(grid(), std::move(data));
}

std::vector<std::size_t> ModeSet::cluster(std::size_t i) const
{
    const double w = omega(i);
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < size(); ++j)
    {
        if (std::abs(omegas_[j] - w) <= degeneracy_tol_ * w)
        {
            out.push_back(j);
        }
    }
    return out;
}

namespace
{
using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

/// Orthonormal polarizations perpendicular to k: e1 ~ z x k (x when k || z), e2 = k^ x e1.
std::pair<Eigen::Vector3d, Eigen::Vector3d> polarizations(const Real3 &kv)
{
    const Eigen::Vector3d k(kv[0], kv[1], kv[2]);
    const Eigen::Vector3d khat = k.normalized();
    Eigen::Vector3d e1 = Eigen::Vector3d::UnitZ().cross(khat);
    if (e1.norm() < 1e-12)
    {
        e1 = Eigen::Vector3d::UnitX();
    }
    e1.normalize();
    Eigen::Vector3d e2 = khat.cross(e1);
    e2.normalize();
    return {e1, e2};
}

struct Toeplitz
{
    MatrixXcd b;
    MatrixXcd binv;
};

Toeplitz assemble_mass(const DielectricProfile &eps)
{
    const Grid &g = eps.grid();
    const auto n = static_cast<Index>(g.size());
    Toeplitz t;
    t.b.resize(n, n);
    for (Index i = 0; i < n; ++i)
    {
        const Index3 mi = g.wave_index(static_cast<std::size_t>(i));
        for (Index j = 0; j < n; ++j)
        {
            const Index3 mj = g.wave_index(static_cast<std::size_t>(j));
            t.b(i, j) = eps.profile().coefficient({mi[0] - mj[0], mi[1] - mj[1], mi[2] - mj[2]});
        }
    }
    Eigen::LLT<MatrixXcd> llt(t.b);
    if (llt.info() != Eigen::Success)
    {
        throw EigenSolverError("mass matrix not positive definite (band limit or aliasing violation)");
    }
    t.binv = llt.solve(MatrixXcd::Identity(n, n));
    return t;
}

/// Dominant coefficient: first entry within 1e-9 of the maximum magnitude.
Index dominant(const VectorXcd &c)
{
    const double m = c.cwiseAbs().maxCoeff();
    for (Index i = 0; i < c.size(); ++i)
    {
        if (std::abs(c(i)) >= (1.0 - 1e-9) * m)
        {
            return i;
        }
    }
    return 0;
}

/// V * u^H (B (x) I3) v for coefficient vectors.
cplx mass_inner(const MatrixXcd &b, double volume, const VectorXcd &u, const VectorXcd &v)
{
    const Index n = b.rows();
    cplx s{};
    for (int c = 0; c < 3; ++c)
    {
        s += u.segment(c * n, n).dot(b * v.segment(c * n, n));
    }
    return volume * s;
}

/// Rotate a degenerate block into a basis that depends only on the subspace
/// (up to exact ties), then B-orthonormalize it in pivot order.
void canonicalize(MatrixXcd &block, const MatrixXcd &b, double volume)
{
    const Index m = block.cols();
    if (m < 2)
    {
        return;
    }
    Eigen::ColPivHouseholderQR<MatrixXcd> qr(block.adjoint());
    MatrixXcd pivots(m, m);
    for (Index i = 0; i < m; ++i)
    {
        pivots.row(i) = block.row(qr.colsPermutation().indices()(i));
    }
    MatrixXcd w = block * pivots.inverse();
    for (Index j = 0; j < m; ++j)
    {
        VectorXcd v = w.col(j);
        for (Index i = 0; i < j; ++i)
        {
            v -= mass_inner(b, volume, w.col(i), v) * w.col(i);
        }
        v /= std::sqrt(mass_inner(b, volume, v, v).real());
        w.col(j) = v;
    }
    block = w;
}
} // namespace

ModeSet solve_modes(const DielectricProfile &eps, const ModeSolverOptions &options)
{
    const Grid &g = eps.grid();
    const std::size_t n = g.size();
    const auto ni = static_cast<Index>(n);
    const std::size_t ntrans = 2 * n - 2;
    if (options.count && *options.count > ntrans)
    {
        throw InvalidArgument("requested mode count exceeds 2N - 2");
    }
    const double max_len = *std::max_element(g.lengths().begin(), g.lengths().end());
    const double omega_tol = options.omega_tol.value_or(1e-6 * 2.0 * std::numbers::pi / max_len);

    const Toeplitz mass = assemble_mass(eps);

    // Divergence-free subspace of h = eps f: two polarizations per nonzero k.
    // With h = Q y the problem reduces to D^{1/2} (Q^H B^{-1} Q) D^{1/2} z = w^2 z,
    // y = D^{1/2} z, f = B^{-1} Q y / w, where D = |k|^2 is curl curl on that subspace.
    std::vector<Eigen::Vector3d> pol(2 * n);
    std::vector<double> kabs(n, 0.0);
    for (std::size_t j = 1; j < n; ++j)
    {
        const Real3 k = g.wave_vector(j);
        kabs[j] = std::sqrt(k[0] * k[0] + k[1] * k[1] + k[2] * k[2]);
        auto [e1, e2] = polarizations(k);
        pol[2 * j] = e1;
        pol[2 * j + 1] = e2;
    }
    const auto nt = static_cast<Index>(ntrans);
    MatrixXcd reduced(nt, nt);
    for (Index t = 0; t < nt; ++t)
    {
        const std::size_t j = static_cast<std::size_t>(t / 2) + 1;
        const auto &pj = pol[2 * j + static_cast<std::size_t>(t % 2)];
        for (Index s = 0; s < nt; ++s)
        {
            const std::size_t l = static_cast<std::size_t>(s / 2) + 1;
            const auto &pl = pol[2 * l + static_cast<std::size_t>(s % 2)];
            reduced(t, s) = kabs[j] * kabs[l] * pj.dot(pl) *
                            mass.binv(static_cast<Index>(j), static_cast<Index>(l));
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXcd> solver(reduced);
    if (solver.info() != Eigen::Success)
    {
        throw EigenSolverError("Hermitian eigensolver did not converge");
    }

    std::vector<Index> keep;
    for (Index t = 0; t < nt; ++t)
    {
        if (solver.eigenvalues()(t) > omega_tol * omega_tol)
        {
            keep.push_back(t);
        }
    }
    if (options.count && keep.size() > *options.count)
    {
        keep.resize(*options.count);
    }
    const auto nm = static_cast<Index>(keep.size());

    std::vector<double> omegas(keep.size());
    MatrixXcd h = MatrixXcd::Zero(3 * ni, nm);
    for (Index q = 0; q < nm; ++q)
    {
        omegas[static_cast<std::size_t>(q)] = std::sqrt(solver.eigenvalues()(keep[static_cast<std::size_t>(q)]));
        const auto z = solver.eigenvectors().col(keep[static_cast<std::size_t>(q)]);
        for (Index t = 0; t < nt; ++t)
        {
            const std::size_t j = static_cast<std::size_t>(t / 2) + 1;
            const auto &p = pol[2 * j + static_cast<std::size_t>(t % 2)];
            const cplx y = kabs[j] * z(t);
            for (int c = 0; c < 3; ++c)
            {
                h(c * ni + static_cast<Index>(j), q) += p(c) * y;
            }
        }
    }
    const double sqrt_vol = std::sqrt(g.volume());
    MatrixXcd coeffs(3 * ni, nm);
    for (int c = 0; c < 3; ++c)
    {
        coeffs.middleRows(c * ni, ni).noalias() = mass.binv * h.middleRows(c * ni, ni);
    }
    for (Index q = 0; q < nm; ++q)
    {
        coeffs.col(q) /= omegas[static_cast<std::size_t>(q)] * sqrt_vol;
    }

    // Degenerate groups, canonical basis, phase, ordering.
    std::vector<Index> order;
    order.reserve(keep.size());
    Index start = 0;
    while (start < nm)
    {
        Index end = start + 1;
        while (end < nm && omegas[static_cast<std::size_t>(end)] - omegas[static_cast<std::size_t>(end - 1)] <=
                               options.degeneracy_tol * omegas[static_cast<std::size_t>(end - 1)])
        {
            ++end;
        }
        MatrixXcd block = coeffs.middleCols(start, end - start);
        canonicalize(block, mass.b, g.volume());
        std::vector<std::tuple<Index3, Index, Index>> keys;
        for (Index q = 0; q < block.cols(); ++q)
        {
            VectorXcd col = block.col(q);
            const Index d = dominant(col);
            col *= std::conj(col(d)) / std::abs(col(d));
            block.col(q) = col;
            keys.emplace_back(g.wave_index(static_cast<std::size_t>(d % ni)), d / ni, q);
        }
        std::sort(keys.begin(), keys.end());
        for (Index q = 0; q < block.cols(); ++q)
        {
            coeffs.col(start + q) = block.col(std::get<2>(keys[static_cast<std::size_t>(q)]));
        }
        start = end;
    }

    MatrixXcd fields(3 * ni, nm);
    std::vector<cplx> buf(3 * n);
    for (Index q = 0; q < nm; ++q)
    {
        std::copy(coeffs.col(q).data(), coeffs.col(q).data() + 3 * ni, buf.begin());
        const VectorField f = vector_from_fourier(g, buf);
        std::copy(f.data().begin(), f.data().end(), fields.col(q).data());
    }
    return ModeSet(eps, std::move(omegas), std::move(fields), options.degeneracy_tol);
}

double transversality_residual(const VectorField &f, const DielectricProfile &eps)
{
    require_same_grid(f.grid(), eps.grid());
    const double fn = norm(f);
    if (fn == 0.0)
    {
        throw InvalidArgument("transversality residual of a zero field");
    }
    return norm(divergence(f, eps.profile())) / fn;
}

std::vector<std::size_t> lowest_nondegenerate(const ModeSet &modes, std::size_t count)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < modes.size() && out.size() < count; ++i)
    {
        if (!modes.degenerate(i))
        {
            out.push_back(i);
        }
    }
    return out;
}

MatchResult match_modes(const ModeSet &reference, const ModeSet &candidate, std::size_t max_count_difference)
{
    require_same_grid(reference.grid(), candidate.grid());
    const std::size_t nr = reference.size();
    const std::size_t nc = candidate.size();
    if ((nr > nc ? nr - nc : nc - nr) > max_count_difference)
    {
        throw InvalidArgument("mode count mismatch between reference and candidate");
    }
    const Grid &g = reference.grid();
    MatrixXcd weighted(3 * static_cast<Index>(g.size()), static_cast<Index>(nr));
    for (std::size_t l = 0; l < nr; ++l)
    {
        const auto w = candidate.profile().multiply(reference.field(l));
        std::copy(w.data().begin(), w.data().end(), weighted.col(static_cast<Index>(l)).data());
    }
    MatchResult result;
    result.overlaps = g.cell_volume() * (candidate.matrix().adjoint() * weighted);

    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    pairs.reserve(nr * nc);
    for (std::size_t m = 0; m < nc; ++m)
    {
        for (std::size_t l = 0; l < nr; ++l)
        {
            pairs.emplace_back(std::abs(result.overlaps(static_cast<Index>(m), static_cast<Index>(l))), m, l);
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(),
                     [](const auto &a, const auto &b) { return std::get<0>(a) > std::get<0>(b); });
    result.matches.resize(nc);
    for (std::size_t m = 0; m < nc; ++m)
    {
        result.matches[m].candidate = m;
    }
    std::vector<bool> ref_used(nr, false);
    std::size_t assigned = 0;
    for (const auto &[mag, m, l] : pairs)
    {
        if (assigned == std::min(nr, nc))
        {
            break;
        }
        if (result.matches[m].reference || ref_used[l])
        {
            continue;
        }
        result.matches[m].reference = l;
        result.matches[m].overlap = mag;
        ref_used[l] = true;
        ++assigned;
    }
    for (std::size_t l = 0; l < nr; ++l)
    {
        if (!ref_used[l])
        {
            result.unmatched_references.push_back(l);
        }
    }
    return result;
}

} // namespace epsmode
