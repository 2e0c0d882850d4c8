#pragma once

#include "epsmode/dielectric.hpp"

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace epsmode
{

struct ModeSolverOptions
{
    /// Number of lowest modes to keep; all 2N-2 transverse modes when empty.
    std::optional<std::size_t> count;
    /// Relative eigenfrequency tolerance used to group degenerate modes.
    double degeneracy_tol = 1e-6;
    /// Null-space threshold; defaults to 1e-6 * 2 pi / max(L).
    std::optional<double> omega_tol;
};

/// Eigenpairs (omega, f) of -curl curl f + eps omega^2 f = 0 with omega > 0.
///
/// Fields are eps-weighted orthonormal, the largest Fourier coefficient of each
/// field is real and positive, and modes are sorted by omega with degenerate
/// groups ordered by the lexicographic index of their dominant coefficient.
class ModeSet
{
public:
    static constexpr const char *normalization_tag = "eps-weighted-orthonormal";
    static constexpr const char *phase_tag = "max-fourier-coefficient-real-positive";

    ModeSet(DielectricProfile eps, std::vector<double> omegas, Eigen::MatrixXcd fields, double degeneracy_tol);

    const Grid &grid() const noexcept { return eps_.grid(); }
    const DielectricProfile &profile() const noexcept { return eps_; }
    std::size_t size() const noexcept { return omegas_.size(); }
    double omega(std::size_t i) const { return omegas_.at(i); }
    const std::vector<double> &omegas() const noexcept { return omegas_; }
    double degeneracy_tol() const noexcept { return degeneracy_tol_; }

    VectorField field(std::size_t i) const;
    /// Columns are the real-space mode fields in VectorField layout.
    const Eigen::MatrixXcd &matrix() const noexcept { return fields_; }

    /// True when the set holds every transverse mode of the grid (2N - 2).
    bool complete() const noexcept { return size() == 2 * grid().size() - 2; }

    /// Modes whose frequency lies within degeneracy_tol * omega of mode i.
    std::vector<std::size_t> cluster(std::size_t i) const;
    bool degenerate(std::size_t i) const { return cluster(i).size() > 1; }

private:
    DielectricProfile eps_;
    std::vector<double> omegas_;
    Eigen::MatrixXcd fields_;
    double degeneracy_tol_;
};

ModeSet solve_modes(const DielectricProfile &eps, const ModeSolverOptions &options = {});

/// ||div(eps f)|| / ||f|| (reference frequency 1).
double transversality_residual(const VectorField &f, const DielectricProfile &eps);

/// Labels of the `count` lowest modes that are not degenerate with any other mode.
std::vector<std::size_t> lowest_nondegenerate(const ModeSet &modes, std::size_t count);

struct ModeMatch
{
    std::size_t candidate = 0;
    std::optional<std::size_t> reference;
    double overlap = 0.0;
};

struct MatchResult
{
    std::vector<ModeMatch> matches; // one per candidate, in candidate order
    std::vector<std::size_t> unmatched_references;
    /// O(mu, lambda): eps_candidate-weighted product of candidate mu with reference lambda.
    Eigen::MatrixXcd overlaps;
};

/// Greedy assignment of candidate modes to reference labels by descending |overlap|.
MatchResult match_modes(const ModeSet &reference, const ModeSet &candidate, std::size_t max_count_difference = 0);

} // namespace epsmode
