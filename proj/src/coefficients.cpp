#include "elab/coefficients.hpp"

#include "elab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elab {

std::pair<double, double> eigenvalue_bounds(const Mat2& a)
{
    const double mean = 0.5 * (a.xx + a.yy);
    const double rad = std::hypot(0.5 * (a.xx - a.yy), a.xy);
    return {mean - rad, mean + rad};
}

CoefficientSet::CoefficientSet(GridPtr g)
    : grid(std::move(g)), mu(grid)
{
    a.assign(grid->num_interior(), Mat2{});
    b.assign(grid->num_interior(), Vec2{});
}

bool CoefficientSet::has_drift() const
{
    return std::any_of(b.begin(), b.end(), [](Vec2 v) { return v.x != 0.0 || v.y != 0.0; });
}

bool CoefficientSet::is_diagonal() const
{
    return std::all_of(a.begin(), a.end(), [](const Mat2& m) { return m.xy == 0.0; });
}

CoefficientSet laplacian_coefficients(GridPtr grid)
{
    return CoefficientSet(std::move(grid));
}

double clamped_delta(const Grid& grid, std::size_t node)
{
    return std::max(grid.delta(node), 0.5 * grid.h());
}

CoefficientSet singular_coefficients(GridPtr grid, double beta, double b_scale, double c_scale, Vec2 direction)
{
    if (!(beta > 0.0 && beta < 1.0)) throw GeometryError("singular profile requires beta in (0,1)");
    if (!(b_scale >= 0.0) || !(c_scale >= 0.0)) throw GeometryError("profile scales must be >= 0");
    const double len = norm(direction);
    if (!(len > 0.0)) throw GeometryError("drift direction must be nonzero");
    direction = (1.0 / len) * direction;

    CoefficientSet c(grid);
    c.profile = SingularProfile{beta, b_scale, c_scale, direction};
    const Grid& g = *grid;
    std::vector<double> mu(g.num_interior(), 0.0);
    for (std::size_t i = 0; i < g.num_interior(); ++i) {
        const double d = clamped_delta(g, i);
        if (b_scale > 0.0) c.b[i] = (b_scale * std::pow(d, beta - 1.0)) * direction;
        if (c_scale > 0.0) mu[i] = c_scale * std::pow(d, beta - 2.0) * g.cell_volume(i);
    }
    c.mu = DiscreteMeasure(grid, std::move(mu));
    return c;
}

EllipticityReport check_ellipticity(const CoefficientSet& coeffs)
{
    EllipticityReport r;
    r.min_eigenvalue = std::numeric_limits<double>::infinity();
    r.max_eigenvalue = -std::numeric_limits<double>::infinity();
    constexpr double slack = 1e-12;
    if (!(coeffs.ellipticity_bound >= 1.0)) r.ok = false;
    for (std::size_t i = 0; i < coeffs.a.size(); ++i) {
        const auto [lo, hi] = eigenvalue_bounds(coeffs.a[i]);
        const bool bad = lo < 1.0 - slack || hi > coeffs.ellipticity_bound * (1.0 + slack);
        if (bad && r.ok) r.worst_node = static_cast<std::int32_t>(i);
        if (bad) r.ok = false;
        r.min_eigenvalue = std::min(r.min_eigenvalue, lo);
        r.max_eigenvalue = std::max(r.max_eigenvalue, hi);
    }
    return r;
}

}  // namespace elab
