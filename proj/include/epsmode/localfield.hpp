#pragma once

namespace epsmode
{

enum class LocalFieldRoute
{
    Closed,       ///< 3 eps / (2 eps + 1)
    FixedPointG,  ///< L = 1 + (eps - 1) L / (3 eps)
    FixedPointK,  ///< L = eps - (2/3)(eps - 1) L
};

const char *to_string(LocalFieldRoute route) noexcept;

struct LocalFieldResult
{
    double eps = 1.0;
    double l = 1.0;
    LocalFieldRoute route = LocalFieldRoute::Closed;
    int iterations = 0;
    /// True when the fixed-point iteration diverged and the linear relation was solved instead.
    bool solved_linearly = false;
    double emission = 1.0; ///< L^2 sqrt(eps)
};

/// Empty-cavity local-field factor. Fixed-point routes iterate from L = 1 until
/// |dL| < 1e-14 (at most 200 steps); a non-contracting K route is solved directly.
LocalFieldResult local_field_factor(double eps, LocalFieldRoute route);

/// (3 eps / (2 eps + 1))^2 sqrt(eps)
double emission_enhancement(double eps);

} // namespace epsmode
