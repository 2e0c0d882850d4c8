#include "epsmode/spectral.hpp"

#include "epsmode/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

namespace epsmode
{

namespace fft
{
namespace
{
// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex plan_mutex;

fftw_plan plan_for(const Index3 &dims, int sign)
{
    static std::map<std::pair<Index3, int>, fftw_plan> cache;
    std::lock_guard lock(plan_mutex);
    const auto key = std::make_pair(dims, sign);
    if (auto it = cache.find(key); it != cache.end())
    {
        return it->second;
    }
    const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
    auto *in = fftw_alloc_complex(n);
    auto *out = fftw_alloc_complex(n);
    // fftw is row-major with the last index fastest; our x index is fastest.
    fftw_plan p = fftw_plan_dft_3d(dims[2], dims[1], dims[0], in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(in);
    fftw_free(out);
    cache.emplace(key, p);
    return p;
}

void run(const Index3 &dims, int sign, const cplx *in, cplx *out)
{
    fftw_plan p = plan_for(dims, sign);
    if (in == out)
    {
        const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
        std::vector<cplx> tmp(in, in + n);
        fftw_execute_dft(p, reinterpret_cast<fftw_complex *>(tmp.data()), reinterpret_cast<fftw_complex *>(out));
        return;
    }
    fftw_execute_dft(p, reinterpret_cast<fftw_complex *>(const_cast<cplx *>(in)),
                     reinterpret_cast<fftw_complex *>(out));
}
} // namespace

void forward(const Index3 &dims, const cplx *in, cplx *out) { run(dims, FFTW_FORWARD, in, out); }
void backward(const Index3 &dims, const cplx *in, cplx *out) { run(dims, FFTW_BACKWARD, in, out); }
} // namespace fft

std::vector<cplx> to_fourier(const Grid &grid, std::span<const cplx> values)
{
    std::vector<cplx> out(grid.size());
    fft::forward(grid.dims(), values.data(), out.data());
    const double scale = 1.0 / static_cast<double>(grid.size());
    for (auto &c : out)
    {
        c *= scale;
    }
    return out;
}

std::vector<cplx> from_fourier(const Grid &grid, std::span<const cplx> coeffs)
{
    std::vector<cplx> out(grid.size());
    fft::backward(grid.dims(), coeffs.data(), out.data());
    return out;
}

std::vector<cplx> to_fourier(const VectorField &f)
{
    const std::size_t n = f.points();
    std::vector<cplx> out(3 * n);
    for (int c = 0; c < 3; ++c)
    {
        auto comp = to_fourier(f.grid(), f.component(c));
        std::copy(comp.begin(), comp.end(), out.begin() + c * n);
    }
    return out;
}

VectorField vector_from_fourier(const Grid &grid, std::span<const cplx> coeffs)
{
    const std::size_t n = grid.size();
    if (coeffs.size() != 3 * n)
    {
        throw InvalidArgument("coefficient vector size does not match grid");
    }
    VectorField f(grid);
    for (int c = 0; c < 3; ++c)
    {
        auto comp = from_fourier(grid, coeffs.subspan(c * n, n));
        std::copy(comp.begin(), comp.end(), f.component(c).begin());
    }
    return f;
}

namespace
{
constexpr cplx I{0.0, 1.0};

std::vector<Real3> wave_vectors(const Grid &grid)
{
    std::vector<Real3> k(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        k[i] = grid.wave_vector(i);
    }
    return k;
}
} // namespace

ScalarField divergence(const VectorField &f)
{
    const Grid &g = f.grid();
    const auto c = to_fourier(f);
    const auto k = wave_vectors(g);
    const std::size_t n = g.size();
    std::vector<cplx> d(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        d[i] = I * (k[i][0] * c[i] + k[i][1] * c[n + i] + k[i][2] * c[2 * n + i]);
    }
    return ScalarField(g, from_fourier(g, d));
}

VectorField curl(const VectorField &f)
{
    const Grid &g = f.grid();
    const auto c = to_fourier(f);
    const auto k = wave_vectors(g);
    const std::size_t n = g.size();
    std::vector<cplx> out(3 * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        const cplx fx = c[i], fy = c[n + i], fz = c[2 * n + i];
        out[i] = I * (k[i][1] * fz - k[i][2] * fy);
        out[n + i] = I * (k[i][2] * fx - k[i][0] * fz);
        out[2 * n + i] = I * (k[i][0] * fy - k[i][1] * fx);
    }
    return vector_from_fourier(g, out);
}

VectorField gradient(const ScalarField &s)
{
    const Grid &g = s.grid();
    const auto c = to_fourier(g, s.values());
    const auto k = wave_vectors(g);
    const std::size_t n = g.size();
    std::vector<cplx> out(3 * n);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (int a = 0; a < 3; ++a)
        {
            out[a * n + i] = I * k[i][a] * c[i];
        }
    }
    return vector_from_fourier(g, out);
}

Index3 padded_dims(const Index3 &dims) noexcept
{
    Index3 m{};
    for (int a = 0; a < 3; ++a)
    {
        m[a] = dims[a] == 1 ? 1 : (3 * dims[a] + 1) / 2;
    }
    return m;
}

Index3 max_band(const Index3 &dims) noexcept
{
    return {dims[0] / 3, dims[1] / 3, dims[2] / 3};
}

namespace
{
std::size_t padded_flat(const Index3 &m, const Index3 &pdims)
{
    std::size_t idx = 0;
    std::size_t stride = 1;
    for (int a = 0; a < 3; ++a)
    {
        const int i = m[a] < 0 ? m[a] + pdims[a] : m[a];
        idx += static_cast<std::size_t>(i) * stride;
        stride *= static_cast<std::size_t>(pdims[a]);
    }
    return idx;
}

std::vector<std::size_t> pad_map(const Grid &grid, const Index3 &pdims)
{
    std::vector<std::size_t> map(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        map[j] = padded_flat(grid.wave_index(j), pdims);
    }
    return map;
}

std::size_t count(const Index3 &d)
{
    return static_cast<std::size_t>(d[0]) * d[1] * d[2];
}

/// Values of the trigonometric interpolant of `values` on the padded grid.
std::vector<cplx> to_padded(const Grid &grid, std::span<const cplx> values, const Index3 &pdims,
                            const std::vector<std::size_t> &map)
{
    const auto c = to_fourier(grid, values);
    std::vector<cplx> buf(count(pdims), cplx{});
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        buf[map[j]] = c[j];
    }
    std::vector<cplx> out(buf.size());
    fft::backward(pdims, buf.data(), out.data());
    return out;
}

/// Truncate padded-grid values back to the retained wave numbers, returning grid values.
std::vector<cplx> from_padded(const Grid &grid, std::span<const cplx> pvalues, const Index3 &pdims,
                              const std::vector<std::size_t> &map)
{
    std::vector<cplx> buf(pvalues.size());
    fft::forward(pdims, pvalues.data(), buf.data());
    const double scale = 1.0 / static_cast<double>(pvalues.size());
    std::vector<cplx> c(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        c[j] = buf[map[j]] * scale;
    }
    return from_fourier(grid, c);
}

double dot_real(std::span<const cplx> a, std::span<const cplx> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        s += (std::conj(a[i]) * b[i]).real();
    }
    return s;
}

double l2(std::span<const cplx> a)
{
    return std::sqrt(dot_real(a, a));
}
} // namespace

// --- ScalarProfile -------------------------------------------------------

struct ScalarProfile::State
{
    Grid grid;
    Index3 band;
    std::vector<double> values;
    std::vector<cplx> coeffs; // zero outside band
    Index3 pdims;
    std::vector<std::size_t> map;
    std::vector<double> padded; // values on the padded grid
    double vmin = 0.0;
    double vmax = 0.0;
    bool constant = false;
};

ScalarProfile::ScalarProfile(std::shared_ptr<const State> state) : state_(std::move(state)) {}

ScalarProfile::ScalarProfile(const Grid &grid, std::span<const double> values, Index3 band)
{
    if (values.size() != grid.size())
    {
        throw InvalidArgument("profile size does not match grid");
    }
    const Index3 limit = max_band(grid.dims());
    for (int a = 0; a < 3; ++a)
    {
        if (band[a] < 0 || band[a] > limit[a])
        {
            throw ProfileError("band limit exceeds N/3 on axis " + std::to_string(a));
        }
    }
    for (double v : values)
    {
        if (!std::isfinite(v))
        {
            throw ProfileError("profile values must be finite");
        }
    }
    auto st = std::make_shared<State>(State{grid, band, {}, {}, padded_dims(grid.dims()), {}, {}});
    std::vector<cplx> cv(values.begin(), values.end());
    st->coeffs = to_fourier(grid, cv);
    double cmax = 0.0;
    for (const auto &c : st->coeffs)
    {
        cmax = std::max(cmax, std::abs(c));
    }
    // Roundoff-level coefficients are dropped so that uniform profiles stay exactly uniform.
    const double floor = 1e-15 * cmax;
    bool constant = true;
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        if (std::abs(st->coeffs[j]) <= floor)
        {
            st->coeffs[j] = 0.0;
        }
        const Index3 m = grid.wave_index(j);
        bool inside = true;
        for (int a = 0; a < 3; ++a)
        {
            inside = inside && std::abs(m[a]) <= band[a];
        }
        if (!inside)
        {
            st->coeffs[j] = 0.0;
        }
        else if (j != 0 && st->coeffs[j] != 0.0)
        {
            constant = false;
        }
    }
    st->coeffs[0] = st->coeffs[0].real();
    st->constant = constant;
    if (constant)
    {
        st->values.assign(grid.size(), st->coeffs[0].real());
    }
    else
    {
        const auto back = from_fourier(grid, st->coeffs);
        st->values.resize(grid.size());
        std::transform(back.begin(), back.end(), st->values.begin(), [](const cplx &v) { return v.real(); });
    }
    st->map = pad_map(grid, st->pdims);
    std::vector<cplx> buf(count(st->pdims), cplx{});
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        buf[st->map[j]] = st->coeffs[j];
    }
    std::vector<cplx> pv(buf.size());
    fft::backward(st->pdims, buf.data(), pv.data());
    st->padded.resize(pv.size());
    std::transform(pv.begin(), pv.end(), st->padded.begin(), [](const cplx &v) { return v.real(); });
    st->vmin = *std::min_element(st->values.begin(), st->values.end());
    st->vmax = *std::max_element(st->values.begin(), st->values.end());
    state_ = std::move(st);
}

ScalarProfile ScalarProfile::constant(const Grid &grid, double value)
{
    std::vector<double> v(grid.size(), value);
    return ScalarProfile(grid, v, {0, 0, 0});
}

const Grid &ScalarProfile::grid() const noexcept { return state_->grid; }
const Index3 &ScalarProfile::band() const noexcept { return state_->band; }
std::span<const double> ScalarProfile::values() const noexcept { return state_->values; }
double ScalarProfile::min_value() const noexcept { return state_->vmin; }
double ScalarProfile::max_value() const noexcept { return state_->vmax; }
double ScalarProfile::mean() const noexcept { return state_->coeffs[0].real(); }
bool ScalarProfile::is_constant() const noexcept { return state_->constant; }

cplx ScalarProfile::coefficient(const Index3 &m) const noexcept
{
    for (int a = 0; a < 3; ++a)
    {
        if (std::abs(m[a]) > state_->band[a])
        {
            return {};
        }
    }
    const std::size_t j = state_->grid.flat_of_wave(m);
    return j == Grid::npos ? cplx{} : state_->coeffs[j];
}

ScalarField ScalarProfile::multiply(const ScalarField &s) const
{
    require_same_grid(grid(), s.grid());
    const State &st = *state_;
    if (st.constant)
    {
        return cplx(st.coeffs[0].real()) * ScalarField(s);
    }
    auto pv = to_padded(st.grid, s.values(), st.pdims, st.map);
    for (std::size_t i = 0; i < pv.size(); ++i)
    {
        pv[i] *= st.padded[i];
    }
    return ScalarField(st.grid, from_padded(st.grid, pv, st.pdims, st.map));
}

VectorField ScalarProfile::multiply(const VectorField &f) const
{
    require_same_grid(grid(), f.grid());
    VectorField out(f.grid());
    for (int c = 0; c < 3; ++c)
    {
        const ScalarField comp(f.grid(), std::vector<cplx>(f.component(c).begin(), f.component(c).end()));
        const auto prod = multiply(comp);
        std::copy(prod.values().begin(), prod.values().end(), out.component(c).begin());
    }
    return out;
}

ScalarField ScalarProfile::divide(const ScalarField &b) const
{
    require_same_grid(grid(), b.grid());
    const State &st = *state_;
    if (!(st.vmin > 0.0))
    {
        throw ProfileError("division requires a strictly positive profile");
    }
    if (st.constant)
    {
        return cplx(1.0 / st.coeffs[0].real()) * ScalarField(b);
    }
    const std::size_t n = st.grid.size();
    const auto bv = b.values();
    const double bnorm = l2(bv);
    if (bnorm == 0.0)
    {
        return ScalarField(st.grid);
    }
    // Preconditioned conjugate gradients; the pointwise reciprocal is the preconditioner.
    std::vector<cplx> x(n), r(n), z(n), p(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        x[i] = bv[i] / st.values[i];
    }
    ScalarField xf(st.grid, x);
    auto ax = multiply(xf);
    for (std::size_t i = 0; i < n; ++i)
    {
        r[i] = bv[i] - ax[i];
        z[i] = r[i] / st.values[i];
    }
    p = z;
    double rz = dot_real(r, z);
    constexpr double tol = 1e-14;
    constexpr int max_iter = 500;
    for (int it = 0; it < max_iter && l2(r) > tol * bnorm; ++it)
    {
        const auto ap = multiply(ScalarField(st.grid, p));
        const double pap = dot_real(p, ap.values());
        const double alpha = rz / pap;
        for (std::size_t i = 0; i < n; ++i)
        {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] / st.values[i];
        }
        const double rz_new = dot_real(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::size_t i = 0; i < n; ++i)
        {
            p[i] = z[i] + beta * p[i];
        }
    }
    ScalarField result(st.grid, std::move(x));
    const auto check = multiply(result);
    double res = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        res += std::norm(bv[i] - check[i]);
    }
    if (std::sqrt(res) > 1e-11 * bnorm)
    {
        throw ConvergenceError("dealiased division did not converge");
    }
    return result;
}

VectorField ScalarProfile::divide(const VectorField &f) const
{
    require_same_grid(grid(), f.grid());
    VectorField out(f.grid());
    for (int c = 0; c < 3; ++c)
    {
        const ScalarField comp(f.grid(), std::vector<cplx>(f.component(c).begin(), f.component(c).end()));
        const auto q = divide(comp);
        std::copy(q.values().begin(), q.values().end(), out.component(c).begin());
    }
    return out;
}

ScalarProfile ScalarProfile::operator-(const ScalarProfile &other) const
{
    require_same_grid(grid(), other.grid());
    std::vector<double> v(grid().size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        v[i] = state_->values[i] - other.state_->values[i];
    }
    Index3 band{};
    for (int a = 0; a < 3; ++a)
    {
        band[a] = std::max(state_->band[a], other.state_->band[a]);
    }
    return ScalarProfile(grid(), v, band);
}

ScalarProfile ScalarProfile::operator+(const ScalarProfile &other) const
{
    return *this - other.scaled(-1.0);
}

ScalarProfile ScalarProfile::scaled(double s) const
{
    std::vector<double> v(state_->values);
    for (auto &x : v)
    {
        x *= s;
    }
    return ScalarProfile(grid(), v, state_->band);
}

// --- products ------------------------------------------------------------

VectorField dealiased_product(const ScalarField &a, const VectorField &b)
{
    require_same_grid(a.grid(), b.grid());
    const Grid &g = a.grid();
    const Index3 pdims = padded_dims(g.dims());
    const auto map = pad_map(g, pdims);
    const auto pa = to_padded(g, a.values(), pdims, map);
    VectorField out(g);
    for (int c = 0; c < 3; ++c)
    {
        auto pb = to_padded(g, b.component(c), pdims, map);
        for (std::size_t i = 0; i < pb.size(); ++i)
        {
            pb[i] *= pa[i];
        }
        const auto back = from_padded(g, pb, pdims, map);
        std::copy(back.begin(), back.end(), out.component(c).begin());
    }
    return out;
}

VectorField dealiased_product(const ScalarProfile &a, const VectorField &b)
{
    return a.multiply(b);
}

ScalarField divergence(const VectorField &f, const ScalarProfile &weight)
{
    return divergence(weight.multiply(f));
}

cplx weighted_inner_product(const VectorField &a, const VectorField &b, const ScalarProfile *weight)
{
    require_same_grid(a.grid(), b.grid());
    if (weight == nullptr)
    {
        return inner(a, b);
    }
    return inner(a, weight->multiply(b));
}

} // namespace epsmode
