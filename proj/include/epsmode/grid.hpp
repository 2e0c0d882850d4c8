#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace epsmode
{

using cplx = std::complex<double>;
using Index3 = std::array<int, 3>;
using Real3 = std::array<double, 3>;
using Cplx3 = std::array<cplx, 3>;

/// Periodic rectangular box sampled on a uniform grid, natural units (c = 1).
///
/// Points are stored row-major with x fastest: flat = ix + Nx * (iy + Ny * iz).
/// Fourier index i along an axis of size N maps to the signed wave number
/// m = i for i < (N + 1) / 2 and m = i - N otherwise, so the Nyquist index of an
/// even axis is -N/2 and carries a nonzero derivative.
class Grid
{
public:
    Grid(Index3 dims, Real3 lengths);

    const Index3 &dims() const noexcept { return dims_; }
    const Real3 &lengths() const noexcept { return lengths_; }
    std::size_t size() const noexcept { return size_; }
    double cell_volume() const noexcept { return cell_volume_; }
    double volume() const noexcept { return lengths_[0] * lengths_[1] * lengths_[2]; }

    std::size_t flat(int ix, int iy, int iz) const noexcept
    {
        return static_cast<std::size_t>(ix) +
               static_cast<std::size_t>(dims_[0]) *
                   (static_cast<std::size_t>(iy) + static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(iz));
    }
    Index3 unflat(std::size_t flat) const noexcept;

    Real3 position(std::size_t flat) const noexcept;

    /// Signed integer wave index of the Fourier coefficient stored at `flat`.
    Index3 wave_index(std::size_t flat) const noexcept;
    /// 2*pi*m/L per axis.
    Real3 wave_vector(std::size_t flat) const noexcept;
    /// Flat storage position of a signed wave index, or npos if it is not retained.
    std::size_t flat_of_wave(const Index3 &m) const noexcept;

    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    bool operator==(const Grid &other) const noexcept
    {
        return dims_ == other.dims_ && lengths_ == other.lengths_;
    }

private:
    Index3 dims_;
    Real3 lengths_;
    std::size_t size_;
    double cell_volume_;
};

int signed_wave(int i, int n) noexcept;

void require_same_grid(const Grid &a, const Grid &b);

/// Complex scalar field on a grid.
class ScalarField
{
public:
    explicit ScalarField(Grid grid);
    ScalarField(Grid grid, std::vector<cplx> values);

    static ScalarField from_function(const Grid &grid, const std::function<cplx(const Real3 &)> &fn);

    const Grid &grid() const noexcept { return grid_; }
    std::span<cplx> values() noexcept { return values_; }
    std::span<const cplx> values() const noexcept { return values_; }
    cplx &operator[](std::size_t i) noexcept { return values_[i]; }
    const cplx &operator[](std::size_t i) const noexcept { return values_[i]; }

    ScalarField &operator+=(const ScalarField &o);
    ScalarField &operator-=(const ScalarField &o);
    ScalarField &operator*=(cplx s);

private:
    Grid grid_;
    std::vector<cplx> values_;
};

/// Complex 3-vector field on a grid.
///
/// Storage is component-planar: component c of point i lives at c * N + i.
class VectorField
{
public:
    explicit VectorField(Grid grid);
    VectorField(Grid grid, std::vector<cplx> data);

    static VectorField from_function(const Grid &grid, const std::function<Cplx3(const Real3 &)> &fn);
    static VectorField constant(const Grid &grid, const Cplx3 &value);

    const Grid &grid() const noexcept { return grid_; }
    std::size_t points() const noexcept { return grid_.size(); }

    std::span<cplx> data() noexcept { return data_; }
    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> component(int c) noexcept { return {data_.data() + c * points(), points()}; }
    std::span<const cplx> component(int c) const noexcept { return {data_.data() + c * points(), points()}; }

    cplx &operator()(int c, std::size_t i) noexcept { return data_[c * points() + i]; }
    const cplx &operator()(int c, std::size_t i) const noexcept { return data_[c * points() + i]; }

    VectorField &operator+=(const VectorField &o);
    VectorField &operator-=(const VectorField &o);
    VectorField &operator*=(cplx s);
    /// this += s * o
    VectorField &axpy(cplx s, const VectorField &o);

    bool all_finite() const noexcept;

private:
    Grid grid_;
    std::vector<cplx> data_;
};

VectorField operator+(VectorField a, const VectorField &b);
VectorField operator-(VectorField a, const VectorField &b);
VectorField operator*(cplx s, VectorField a);
ScalarField operator+(ScalarField a, const ScalarField &b);
ScalarField operator-(ScalarField a, const ScalarField &b);
ScalarField operator*(cplx s, ScalarField a);

/// sqrt(dV * sum |v|^2)
double norm(const VectorField &f);
double norm(const ScalarField &f);
double max_abs(const VectorField &f);
double max_abs(const ScalarField &f);

/// Unweighted dV * sum a^* . b, conjugate-linear in the first argument.
cplx inner(const VectorField &a, const VectorField &b);
cplx inner(const ScalarField &a, const ScalarField &b);

} // namespace epsmode
