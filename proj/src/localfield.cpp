#include "epsmode/localfield.hpp"

#include "epsmode/errors.hpp"

#include <cmath>

namespace epsmode
{

const char *to_string(LocalFieldRoute route) noexcept
{
    switch (route)
    {
    case LocalFieldRoute::Closed:
        return "closed";
    case LocalFieldRoute::FixedPointG:
        return "fixed-point-G";
    case LocalFieldRoute::FixedPointK:
        return "fixed-point-K";
    }
    return "?";
}

namespace
{
constexpr int max_iterations = 200;
constexpr double step_tol = 1e-14;

/// Iterates L <- a + b L from L = 1; solves L = a / (1 - b) when |b| >= 1.
LocalFieldResult affine_fixed_point(double eps, LocalFieldRoute route, double a, double b)
{
    LocalFieldResult out;
    out.eps = eps;
    out.route = route;
    if (std::abs(b) >= 1.0)
    {
        out.l = a / (1.0 - b);
        out.solved_linearly = true;
        return out;
    }
    double l = 1.0;
    for (int it = 1; it <= max_iterations; ++it)
    {
        const double next = a + b * l;
        const double step = std::abs(next - l);
        l = next;
        out.iterations = it;
        if (step < step_tol)
        {
            out.l = l;
            return out;
        }
    }
    throw ConvergenceError("local-field fixed point did not converge");
}
} // namespace

LocalFieldResult local_field_factor(double eps, LocalFieldRoute route)
{
    if (!(eps >= 1.0) || !std::isfinite(eps))
    {
        throw InvalidArgument("local-field factor needs eps >= 1");
    }
    LocalFieldResult out;
    switch (route)
    {
    case LocalFieldRoute::Closed:
        out.eps = eps;
        out.route = route;
        out.l = 3.0 * eps / (2.0 * eps + 1.0);
        break;
    case LocalFieldRoute::FixedPointG:
        out = affine_fixed_point(eps, route, 1.0, (eps - 1.0) / (3.0 * eps));
        break;
    case LocalFieldRoute::FixedPointK:
        out = affine_fixed_point(eps, route, eps, -2.0 * (eps - 1.0) / 3.0);
        break;
    }
    out.emission = out.l * out.l * std::sqrt(eps);
    return out;
}

double emission_enhancement(double eps)
{
    if (!(eps >= 1.0) || !std::isfinite(eps))
    {
        throw InvalidArgument("emission enhancement needs eps >= 1");
    }
    const double l = 3.0 * eps / (2.0 * eps + 1.0);
    return l * l * std::sqrt(eps);
}

} // namespace epsmode
