#pragma once

#include "elab/geometry.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace elab {

/// Signed measure made of one mass per interior cell of a grid.
class DiscreteMeasure {
public:
    explicit DiscreteMeasure(GridPtr grid);
    DiscreteMeasure(GridPtr grid, std::vector<double> cell_mass);

    /// Lebesgue measure m: each cell carries |cell ∩ Ω|.
    static DiscreteMeasure lebesgue(GridPtr grid);
    /// Density f(x, delta(x)) times the cell volume.
    static DiscreteMeasure with_density(GridPtr grid, const std::function<double(Vec2, double)>& density);
    static DiscreteMeasure atom(GridPtr grid, std::size_t node, double mass);

    [[nodiscard]] const Grid& grid() const noexcept { return *grid_; }
    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return mass_.size(); }
    [[nodiscard]] std::span<const double> masses() const noexcept { return mass_; }
    [[nodiscard]] double mass(std::size_t cell) const { return mass_[cell]; }

    [[nodiscard]] double total_variation() const noexcept { return total_variation_; }
    [[nodiscard]] double total_mass() const;
    /// ∫ φ dν for a test function sampled at interior nodes.
    [[nodiscard]] double pair(std::span<const double> test) const;
    [[nodiscard]] bool is_nonnegative() const;
    [[nodiscard]] bool is_zero() const;

    [[nodiscard]] DiscreteMeasure scaled(double a) const;
    /// Total variation measure |ν|.
    [[nodiscard]] DiscreteMeasure absolute() const;

private:
    GridPtr grid_;
    std::vector<double> mass_;
    double total_variation_ = 0.0;
};

/// Cell-wise a·ν + μ; both measures must live on the same grid.
DiscreteMeasure measure_axpy(double a, const DiscreteMeasure& nu, const DiscreteMeasure& mu);

struct BallMass {
    double mass = 0.0;
    double abs_mass = 0.0;
    std::size_t cells = 0;
};

/// Mass of the cells whose centres lie in the open ball B(center, radius).
/// The ball must stay inside the domain: radius <= delta(center).
BallMass ball_mass(const DiscreteMeasure& nu, std::size_t center, double radius);

/// Largest m with m^2 < rho2 - dj^2 (or -1): half-width of lattice row dj of an open ball.
int ball_row_halfwidth(double rho2, int dj);

struct MorreyScanOptions {
    /// Radii delta(x)/2 * 2^-k for k = 0..depth.
    int depth = 6;
    /// Radii below min_radius_cells * h are not resolved by the lattice and are skipped.
    double min_radius_cells = 4.0;
};

struct MorreyNormResult {
    double q = 0.0;
    double value = 0.0;
    std::int32_t argmax_center = -1;
    double argmax_radius = 0.0;
    std::size_t balls_scanned = 0;
};

/// diam(Ω)^{2-n/q} · sup_{x, r < δ(x)/2} r^{n/q-n} |ν|(B(x,r)), scanned over
/// every interior node and dyadic radii anchored at δ(x)/2.
MorreyNormResult morrey_norm(const DiscreteMeasure& nu, double q, const MorreyScanOptions& options = {});

/// CSV with header cell,x,y,mass.
void write_measure_csv(std::ostream& out, const DiscreteMeasure& nu);
DiscreteMeasure read_measure_csv(std::istream& in, GridPtr grid);

}  // namespace elab
