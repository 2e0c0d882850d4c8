#include "epsmode/grid.hpp"

#include "epsmode/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace epsmode
{

int signed_wave(int i, int n) noexcept
{
    return i < (n + 1) / 2 ? i : i - n;
}

Grid::Grid(Index3 dims, Real3 lengths) : dims_(dims), lengths_(lengths)
{
    for (int a = 0; a < 3; ++a)
    {
        if (dims_[a] < 1)
        {
            throw InvalidArgument("grid dimensions must be >= 1");
        }
        if (!(lengths_[a] > 0.0) || !std::isfinite(lengths_[a]))
        {
            throw InvalidArgument("grid lengths must be positive and finite");
        }
    }
    size_ = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
    cell_volume_ = volume() / static_cast<double>(size_);
}

Index3 Grid::unflat(std::size_t flat) const noexcept
{
    const auto nx = static_cast<std::size_t>(dims_[0]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return {static_cast<int>(flat % nx), static_cast<int>((flat / nx) % ny), static_cast<int>(flat / (nx * ny))};
}

Real3 Grid::position(std::size_t flat) const noexcept
{
    const Index3 i = unflat(flat);
    Real3 r{};
    for (int a = 0; a < 3; ++a)
    {
        r[a] = lengths_[a] * i[a] / dims_[a];
    }
    return r;
}

Index3 Grid::wave_index(std::size_t flat) const noexcept
{
    const Index3 i = unflat(flat);
    return {signed_wave(i[0], dims_[0]), signed_wave(i[1], dims_[1]), signed_wave(i[2], dims_[2])};
}

Real3 Grid::wave_vector(std::size_t flat) const noexcept
{
    const Index3 m = wave_index(flat);
    Real3 k{};
    for (int a = 0; a < 3; ++a)
    {
        k[a] = 2.0 * std::numbers::pi * m[a] / lengths_[a];
    }
    return k;
}

std::size_t Grid::flat_of_wave(const Index3 &m) const noexcept
{
    Index3 i{};
    for (int a = 0; a < 3; ++a)
    {
        const int n = dims_[a];
        const int lo = -(n / 2);
        const int hi = (n - 1) / 2;
        if (m[a] < lo || m[a] > hi)
        {
            return npos;
        }
        i[a] = m[a] < 0 ? m[a] + n : m[a];
    }
    return flat(i[0], i[1], i[2]);
}

void require_same_grid(const Grid &a, const Grid &b)
{
    if (!(a == b))
    {
        std::ostringstream os;
        os << "(" << a.dims()[0] << "," << a.dims()[1] << "," << a.dims()[2] << ") vs (" << b.dims()[0] << ","
           << b.dims()[1] << "," << b.dims()[2] << ")";
        throw GridMismatch(os.str());
    }
}

// --- ScalarField ---------------------------------------------------------

ScalarField::ScalarField(Grid grid) : grid_(grid), values_(grid.size(), cplx{}) {}

ScalarField::ScalarField(Grid grid, std::vector<cplx> values) : grid_(grid), values_(std::move(values))
{
    if (values_.size() != grid_.size())
    {
        throw InvalidArgument("scalar field size does not match grid");
    }
}

ScalarField ScalarField::from_function(const Grid &grid, const std::function<cplx(const Real3 &)> &fn)
{
    ScalarField s(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        s.values_[i] = fn(grid.position(i));
    }
    return s;
}

ScalarField &ScalarField::operator+=(const ScalarField &o)
{
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i)
    {
        values_[i] += o.values_[i];
    }
    return *this;
}

ScalarField &ScalarField::operator-=(const ScalarField &o)
{
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < values_.size(); ++i)
    {
        values_[i] -= o.values_[i];
    }
    return *this;
}

ScalarField &ScalarField::operator*=(cplx s)
{
    for (auto &v : values_)
    {
        v *= s;
    }
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField &b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField &b) { return a -= b; }
ScalarField operator*(cplx s, ScalarField a) { return a *= s; }

// --- VectorField ---------------------------------------------------------

VectorField::VectorField(Grid grid) : grid_(grid), data_(3 * grid.size(), cplx{}) {}

VectorField::VectorField(Grid grid, std::vector<cplx> data) : grid_(grid), data_(std::move(data))
{
    if (data_.size() != 3 * grid_.size())
    {
        throw InvalidArgument("vector field size does not match grid");
    }
}

VectorField VectorField::from_function(const Grid &grid, const std::function<Cplx3(const Real3 &)> &fn)
{
    VectorField f(grid);
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        const Cplx3 v = fn(grid.position(i));
        for (int c = 0; c < 3; ++c)
        {
            f(c, i) = v[c];
        }
    }
    return f;
}

VectorField VectorField::constant(const Grid &grid, const Cplx3 &value)
{
    return from_function(grid, [&](const Real3 &) { return value; });
}

VectorField &VectorField::operator+=(const VectorField &o)
{
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i)
    {
        data_[i] += o.data_[i];
    }
    return *this;
}

VectorField &VectorField::operator-=(const VectorField &o)
{
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i)
    {
        data_[i] -= o.data_[i];
    }
    return *this;
}

VectorField &VectorField::operator*=(cplx s)
{
    for (auto &v : data_)
    {
        v *= s;
    }
    return *this;
}

VectorField &VectorField::axpy(cplx s, const VectorField &o)
{
    require_same_grid(grid_, o.grid_);
    for (std::size_t i = 0; i < data_.size(); ++i)
    {
        data_[i] += s * o.data_[i];
    }
    return *this;
}

bool VectorField::all_finite() const noexcept
{
    return std::all_of(data_.begin(), data_.end(),
                       [](const cplx &v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); });
}

VectorField operator+(VectorField a, const VectorField &b) { return a += b; }
VectorField operator-(VectorField a, const VectorField &b) { return a -= b; }
VectorField operator*(cplx s, VectorField a) { return a *= s; }

// --- reductions ----------------------------------------------------------
// Serial left-to-right sums: results are bit-reproducible.

namespace
{
double sum_sq(std::span<const cplx> v)
{
    double s = 0.0;
    for (const auto &x : v)
    {
        s += std::norm(x);
    }
    return s;
}

double max_mag(std::span<const cplx> v)
{
    double m = 0.0;
    for (const auto &x : v)
    {
        m = std::max(m, std::abs(x));
    }
    return m;
}

cplx dot(std::span<const cplx> a, std::span<const cplx> b)
{
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        s += std::conj(a[i]) * b[i];
    }
    return s;
}
} // namespace

double norm(const VectorField &f) { return std::sqrt(f.grid().cell_volume() * sum_sq(f.data())); }
double norm(const ScalarField &f) { return std::sqrt(f.grid().cell_volume() * sum_sq(f.values())); }
double max_abs(const VectorField &f) { return max_mag(f.data()); }
double max_abs(const ScalarField &f) { return max_mag(f.values()); }

cplx inner(const VectorField &a, const VectorField &b)
{
    require_same_grid(a.grid(), b.grid());
    return a.grid().cell_volume() * dot(a.data(), b.data());
}

cplx inner(const ScalarField &a, const ScalarField &b)
{
    require_same_grid(a.grid(), b.grid());
    return a.grid().cell_volume() * dot(a.values(), b.values());
}

} // namespace epsmode
