#pragma once

#include "elab/geometry.hpp"
#include "elab/measure.hpp"

#include <optional>
#include <vector>

namespace elab {

/// Symmetric 2x2 matrix.
struct Mat2 {
    double xx = 1.0;
    double xy = 0.0;
    double yy = 1.0;
};

/// Smallest and largest eigenvalue of a symmetric matrix.
std::pair<double, double> eigenvalue_bounds(const Mat2& a);

/// δ-power descriptor: |b| = b_scale·δ^{β-1}, μ = c_scale·δ^{β-2}·m.
struct SingularProfile {
    double beta = 0.5;
    double b_scale = 0.0;
    double c_scale = 0.0;
    Vec2 direction{1.0, 0.0};
};

/// Operator data (A, b, μ) on the interior nodes of a grid.
struct CoefficientSet {
    explicit CoefficientSet(GridPtr g);

    GridPtr grid;
    std::vector<Mat2> a;
    /// Ellipticity upper bound L >= 1.
    double ellipticity_bound = 1.0;
    std::vector<Vec2> b;
    DiscreteMeasure mu;
    std::optional<SingularProfile> profile;
    /// Permits a signed μ (used to probe the non-unique branch).
    bool allow_signed_mu = false;

    [[nodiscard]] bool has_drift() const;
    [[nodiscard]] bool has_potential() const { return !mu.is_zero(); }
    [[nodiscard]] bool is_diagonal() const;
};

/// A = I, b = 0, μ = 0.
CoefficientSet laplacian_coefficients(GridPtr grid);

/// δ(x) clamped below by h/2 for boundary-adjacent nodes.
double clamped_delta(const Grid& grid, std::size_t node);

/// A = I, |b| = b_scale·δ^{β-1} along `direction`, μ with density c_scale·δ^{β-2}.
CoefficientSet singular_coefficients(GridPtr grid, double beta, double b_scale, double c_scale,
                                     Vec2 direction = {1.0, 0.0});

struct EllipticityReport {
    bool ok = true;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
    std::int32_t worst_node = -1;
};

/// Checks |ξ|² <= Aξ·ξ <= L|ξ|² at every node.
EllipticityReport check_ellipticity(const CoefficientSet& coeffs);

}  // namespace elab
