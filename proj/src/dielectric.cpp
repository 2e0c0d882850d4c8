#include "epsmode/dielectric.hpp"

#include "epsmode/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace epsmode
{

DielectricProfile::DielectricProfile(ScalarProfile profile, double eps_min, std::optional<InterfaceSet> interfaces)
    : profile_(std::move(profile)), eps_min_(eps_min), interfaces_(std::move(interfaces))
{
    if (!(eps_min_ > 0.0))
    {
        throw ProfileError("eps_min must be positive");
    }
    if (profile_.min_value() < eps_min_)
    {
        throw ProfileError("dielectric value " + std::to_string(profile_.min_value()) + " below eps_min " +
                           std::to_string(eps_min_));
    }
}

namespace
{
Index3 resolve_band(const Grid &grid, const ProfileOptions &options)
{
    const Index3 limit = max_band(grid.dims());
    if (!options.band_limit)
    {
        return limit;
    }
    for (int a = 0; a < 3; ++a)
    {
        if ((*options.band_limit)[a] > limit[a] || (*options.band_limit)[a] < 0)
        {
            throw ProfileError("band limit exceeds N/3 on axis " + std::to_string(a));
        }
    }
    return *options.band_limit;
}

/// Periodic tanh step summed over images: 1/2 [tanh((x-lo)/w) - tanh((x-hi)/w)].
double window_value(double x, double lo, double hi, double w, double length)
{
    double s = 0.0;
    for (int image = -3; image <= 3; ++image)
    {
        const double xi = x + image * length;
        if (w > 0.0)
        {
            s += 0.5 * (std::tanh((xi - lo) / w) - std::tanh((xi - hi) / w));
        }
        else
        {
            s += (xi >= lo && xi < hi) ? 1.0 : 0.0;
        }
    }
    return s;
}

double wrap(double x, double length)
{
    double r = std::fmod(x, length);
    return r < 0.0 ? r + length : r;
}
} // namespace

std::vector<double> smooth_window(const Grid &grid, int axis, double lo, double hi, double width)
{
    if (axis < 0 || axis > 2)
    {
        throw InvalidArgument("axis must be 0, 1 or 2");
    }
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
    {
        v[i] = window_value(grid.position(i)[axis], lo, hi, width, grid.lengths()[axis]);
    }
    return v;
}

DielectricProfile build_profile(const Grid &grid, const ProfileSpec &spec, const ProfileOptions &options)
{
    const Index3 band = resolve_band(grid, options);
    std::vector<double> values(grid.size(), 0.0);
    std::optional<InterfaceSet> interfaces;

    if (const auto *h = std::get_if<HomogeneousSpec>(&spec))
    {
        std::fill(values.begin(), values.end(), h->value);
    }
    else if (const auto *l = std::get_if<LayeredSpec>(&spec))
    {
        if (l->values.size() != l->interfaces.size() + 1)
        {
            throw ProfileError("layered profile needs one more value than interfaces");
        }
        if (l->axis < 0 || l->axis > 2)
        {
            throw ProfileError("layered axis must be 0, 1 or 2");
        }
        const double length = grid.lengths()[l->axis];
        if (!std::is_sorted(l->interfaces.begin(), l->interfaces.end()) ||
            (!l->interfaces.empty() && (l->interfaces.front() <= 0.0 || l->interfaces.back() >= length)))
        {
            throw ProfileError("interfaces must be increasing and inside (0, L)");
        }
        InterfaceSet set{l->axis, {}, l->width};
        if (l->values.back() != l->values.front() && !l->interfaces.empty())
        {
            set.positions.push_back(0.0);
        }
        set.positions.insert(set.positions.end(), l->interfaces.begin(), l->interfaces.end());
        std::vector<double> bounds{0.0};
        bounds.insert(bounds.end(), l->interfaces.begin(), l->interfaces.end());
        bounds.push_back(length);
        for (std::size_t j = 0; j < l->values.size(); ++j)
        {
            const auto w = smooth_window(grid, l->axis, bounds[j], bounds[j + 1], l->width);
            for (std::size_t i = 0; i < values.size(); ++i)
            {
                values[i] += l->values[j] * w[i];
            }
        }
        interfaces = std::move(set);
    }
    else
    {
        const auto &s = std::get<SampledSpec>(spec);
        if (s.values.size() != grid.size())
        {
            throw ProfileError("sampled profile size does not match grid");
        }
        values = s.values;
    }
    return DielectricProfile(ScalarProfile(grid, values, band), options.eps_min, std::move(interfaces));
}

DielectricProfile embed_region(const DielectricProfile &eps_b, const DielectricProfile &eps_a, int axis, double lo,
                               double hi, double width)
{
    require_same_grid(eps_b.grid(), eps_a.grid());
    const auto w = smooth_window(eps_b.grid(), axis, lo, hi, width);
    std::vector<double> v(w.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        v[i] = eps_b.values()[i] + (eps_a.values()[i] - eps_b.values()[i]) * w[i];
    }
    Index3 band{};
    for (int a = 0; a < 3; ++a)
    {
        band[a] = std::max(eps_b.band()[a], eps_a.band()[a]);
    }
    band[axis] = max_band(eps_b.grid().dims())[axis];
    const double length = eps_b.grid().lengths()[axis];
    InterfaceSet set{axis, {wrap(lo, length), wrap(hi, length)}, width};
    return DielectricProfile(ScalarProfile(eps_b.grid(), v, band), std::min(eps_b.eps_min(), eps_a.eps_min()),
                             std::move(set));
}

namespace
{
std::vector<double> lowpass_gaussian(const Grid &grid, const std::vector<double> &noise, const Real3 &corr,
                                     const Index3 &band)
{
    std::vector<cplx> c(noise.begin(), noise.end());
    c = to_fourier(grid, c);
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        const Index3 m = grid.wave_index(j);
        const Real3 k = grid.wave_vector(j);
        bool inside = true;
        double arg = 0.0;
        for (int a = 0; a < 3; ++a)
        {
            inside = inside && std::abs(m[a]) <= band[a];
            arg += k[a] * k[a] * corr[a] * corr[a];
        }
        c[j] = inside ? c[j] * std::exp(-0.5 * arg) : cplx{};
    }
    const auto back = from_fourier(grid, c);
    std::vector<double> out(back.size());
    std::transform(back.begin(), back.end(), out.begin(), [](const cplx &v) { return v.real(); });
    return out;
}

std::vector<double> lowpass(const Grid &grid, const std::vector<double> &v, const Index3 &band)
{
    return lowpass_gaussian(grid, v, {0.0, 0.0, 0.0}, band);
}

double masked_rms(const std::vector<double> &v, const std::vector<double> &mask)
{
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (mask[i] > 0.5)
        {
            s += v[i] * v[i];
            ++n;
        }
    }
    return n == 0 ? 0.0 : std::sqrt(s / static_cast<double>(n));
}
} // namespace

DielectricProfile generate_disorder(const DielectricProfile &base, const DisorderSpec &spec)
{
    if (!(spec.rms >= 0.0))
    {
        throw ProfileError("disorder rms must be >= 0");
    }
    for (double l : spec.correlation_lengths)
    {
        if (!(l > 0.0))
        {
            throw ProfileError("correlation lengths must be positive");
        }
    }
    if (spec.rms == 0.0)
    {
        return base;
    }
    const Grid &grid = base.grid();
    const Index3 band = max_band(grid.dims());

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> noise(grid.size());
    for (auto &x : noise)
    {
        x = normal(rng);
    }
    auto d = lowpass_gaussian(grid, noise, spec.correlation_lengths, band);

    std::vector<double> mask(grid.size(), 1.0);
    if (spec.region)
    {
        const auto &r = *spec.region;
        for (int a = 0; a < 3; ++a)
        {
            const auto w = smooth_window(grid, a, r.lower[a], r.upper[a], r.edge_width);
            for (std::size_t i = 0; i < mask.size(); ++i)
            {
                mask[i] *= w[i];
            }
        }
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            d[i] *= mask[i];
        }
        d = lowpass(grid, d, band);
    }
    const double raw = masked_rms(d, mask);
    if (raw == 0.0)
    {
        throw ProfileError("disorder realization has zero amplitude in the region");
    }
    for (auto &x : d)
    {
        x *= spec.rms / raw;
    }

    const auto bv = base.values();
    const double eps_min = base.eps_min();
    bool clipped = false;
    for (std::size_t i = 0; i < d.size(); ++i)
    {
        if (bv[i] + d[i] < eps_min)
        {
            clipped = true;
        }
    }
    if (clipped)
    {
        // Clip, then relax once: re-filter to the band and rescale to the target rms.
        for (std::size_t i = 0; i < d.size(); ++i)
        {
            d[i] = std::max(bv[i] + d[i], eps_min) - bv[i];
        }
        const double achieved = masked_rms(d, mask);
        if (std::abs(achieved - spec.rms) > 0.2 * spec.rms)
        {
            throw ProfileError("disorder rms too large: clipping changed the achieved rms by more than 20%");
        }
        d = lowpass(grid, d, band);
        const double relaxed = masked_rms(d, mask);
        for (auto &x : d)
        {
            x *= spec.rms / relaxed;
        }
    }

    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        v[i] = bv[i] + d[i];
    }
    Index3 out_band = band;
    for (int a = 0; a < 3; ++a)
    {
        out_band[a] = std::max(out_band[a], base.band()[a]);
    }
    ScalarProfile profile(grid, v, out_band);
    if (profile.min_value() < eps_min)
    {
        throw ProfileError("disorder realization violates eps_min after relaxation");
    }
    return DielectricProfile(std::move(profile), eps_min, base.interfaces());
}

ScalarProfile delta_epsilon(const DielectricProfile &eps_i, const DielectricProfile &eps_ii)
{
    return eps_ii.profile() - eps_i.profile();
}

PerturbationPotential::PerturbationPotential(ScalarProfile delta_eps, double omega)
    : delta_eps_(std::move(delta_eps)), omega_(omega)
{
    if (!(omega_ >= 0.0) || !std::isfinite(omega_))
    {
        throw InvalidArgument("probe frequency must be >= 0");
    }
}

VectorField PerturbationPotential::apply(const VectorField &f) const
{
    auto out = delta_eps_.multiply(f);
    out *= -omega_ * omega_;
    return out;
}

PerturbationPotential perturbation_potential(const DielectricProfile &eps_i, const DielectricProfile &eps_ii,
                                             double omega)
{
    require_same_grid(eps_i.grid(), eps_ii.grid());
    return PerturbationPotential(delta_epsilon(eps_i, eps_ii), omega);
}

} // namespace epsmode
