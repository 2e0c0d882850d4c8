#pragma once

#include "epsmode/grid.hpp"

#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace epsmode
{

namespace fft
{
/// Unnormalized forward transform (kernel e^{-ikr}) on a grid of the given dims.
void forward(const Index3 &dims, const cplx *in, cplx *out);
/// Unnormalized backward transform (kernel e^{+ikr}).
void backward(const Index3 &dims, const cplx *in, cplx *out);
} // namespace fft

/// Fourier coefficients c_k with f(r) = sum_k c_k e^{ik.r}.
std::vector<cplx> to_fourier(const Grid &grid, std::span<const cplx> values);
std::vector<cplx> from_fourier(const Grid &grid, std::span<const cplx> coeffs);

/// Component-planar coefficients of a vector field (same layout as VectorField::data()).
std::vector<cplx> to_fourier(const VectorField &f);
VectorField vector_from_fourier(const Grid &grid, std::span<const cplx> coeffs);

ScalarField divergence(const VectorField &f);
VectorField curl(const VectorField &f);
VectorField gradient(const ScalarField &s);

/// Per-axis size of the zero-padded grid used for products (3/2 rule, rounded up).
Index3 padded_dims(const Index3 &dims) noexcept;
/// Largest admissible band limit per axis (floor(N/3)).
Index3 max_band(const Index3 &dims) noexcept;

/// Real, band-limited scalar field acting as a pointwise multiplier.
///
/// Values are projected onto Fourier indices |m_a| <= band_a on construction.
/// multiply() evaluates the product on the padded grid and truncates back, i.e.
/// it applies the Toeplitz matrix w_{k-k'} restricted to the retained indices.
/// divide() inverts exactly that operator, so multiply(divide(v)) == v to
/// solver tolerance; it requires a strictly positive profile.
///
/// Copies share immutable state and are cheap.
class ScalarProfile
{
public:
    ScalarProfile(const Grid &grid, std::span<const double> values, Index3 band);

    static ScalarProfile constant(const Grid &grid, double value);

    const Grid &grid() const noexcept;
    const Index3 &band() const noexcept;
    std::span<const double> values() const noexcept;
    double min_value() const noexcept;
    double max_value() const noexcept;
    /// Zero-wave-number coefficient, i.e. the spatial average.
    double mean() const noexcept;
    bool is_constant() const noexcept;

    /// Band-limited Fourier coefficient; zero outside the band.
    cplx coefficient(const Index3 &m) const noexcept;

    ScalarField multiply(const ScalarField &s) const;
    VectorField multiply(const VectorField &f) const;
    ScalarField divide(const ScalarField &s) const;
    VectorField divide(const VectorField &f) const;

    ScalarProfile operator-(const ScalarProfile &other) const;
    ScalarProfile operator+(const ScalarProfile &other) const;
    ScalarProfile scaled(double s) const;

private:
    struct State;
    explicit ScalarProfile(std::shared_ptr<const State> state);
    std::shared_ptr<const State> state_;
};

/// Product of an arbitrary (complex, full-band) scalar with a vector field on the
/// padded grid, truncated back to the retained wave numbers.
VectorField dealiased_product(const ScalarField &a, const VectorField &b);
VectorField dealiased_product(const ScalarProfile &a, const VectorField &b);

/// div(w * f), with the product dealiased.
ScalarField divergence(const VectorField &f, const ScalarProfile &weight);

/// Integral of w a^* . b. The product is evaluated exactly (padded quadrature),
/// so the result is conjugate-symmetric in (a, b) to roundoff.
cplx weighted_inner_product(const VectorField &a, const VectorField &b,
                            const ScalarProfile *weight = nullptr);

} // namespace epsmode
