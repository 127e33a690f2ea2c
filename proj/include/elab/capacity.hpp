#pragma once

#include "elab/geometry.hpp"
#include "elab/elliptic.hpp"

#include <functional>
#include <string>
#include <vector>

namespace elab {

/// Relative condenser (K, U) with U = B(center, outer_radius).
struct Condenser {
    Vec2 center;
    double outer_radius = 1.0;
    /// Membership in the compact set K.
    std::function<bool(Vec2)> in_compact;
    /// Parameters t in [0,1] along p + t(q-p) where membership in K may change.
    std::function<std::vector<double>(Vec2, Vec2)> compact_events;
    std::string description;
};

/// K = closed ball B̄(center, radius), U = B(center, outer_radius).
Condenser ball_condenser(Vec2 center, double radius, double outer_radius);
/// K = B̄(center, radius) minus the open domain, U = B(center, outer_radius).
Condenser complement_condenser(const Domain& domain, Vec2 center, double radius, double outer_radius);

struct CapacityOptions {
    /// Lattice cells across the diameter of U.
    int resolution = 128;
    SolverOptions solver;
};

/// Potential on the condenser lattice (centred at the condenser centre).
struct CapacitaryPotential {
    Vec2 origin;
    double h = 0.0;
    /// Lattice points per side; index (i, j) -> j * side + i.
    int side = 0;
    /// Value per lattice point: 1 on K, 0 outside U, the potential elsewhere.
    std::vector<double> values;
    [[nodiscard]] Vec2 position(int i, int j) const { return {origin.x + i * h, origin.y + j * h}; }
    [[nodiscard]] double at(int i, int j) const { return values[static_cast<std::size_t>(j * side + i)]; }
};

struct CapacityResult {
    /// Dirichlet energy of the potential, equal to cap(K, U).
    double value = 0.0;
    CapacitaryPotential potential;
    std::string condenser;
    /// Free lattice points.
    std::size_t unknowns = 0;
    /// Lattice points in K plus arms ending on K.
    std::size_t compact_contacts = 0;
};

/// Discrete condenser problem: graph Laplacian on the lattice points of U minus K,
/// with arms cut at the exact place where they meet K or the sphere ∂U.
class CondenserProblem {
public:
    CondenserProblem(Condenser condenser, const CapacityOptions& options = {});

    [[nodiscard]] CapacityResult solve() const;
    /// Energy Σ w (Δu)² for given values on the free lattice points.
    [[nodiscard]] double energy(const std::vector<double>& free_values) const;
    [[nodiscard]] std::size_t unknowns() const noexcept { return free_.size(); }
    [[nodiscard]] std::size_t compact_contacts() const noexcept { return contacts_; }

private:
    struct Cut {
        std::size_t from;
        double weight;
        double value;
    };
    struct Link {
        std::size_t a;
        std::size_t b;
    };
    Condenser condenser_;
    CapacityOptions options_;
    CapacitaryPotential lattice_;
    std::vector<int> free_;
    std::vector<std::int8_t> state_;
    std::vector<Link> links_;
    std::vector<Cut> cuts_;
    std::size_t contacts_ = 0;
};

CapacityResult capacity(const Condenser& condenser, const CapacityOptions& options = {});

struct CdcRatio {
    double ratio = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
    /// The complement is not resolved by the condenser lattice.
    bool warning = false;
};

/// cap(B̄(ξ,R)∖Ω, B(ξ,2R)) / cap(B̄(ξ,R), B(ξ,2R)).
/// `grid` supplies the domain and the smallest admissible radius (R > 2h).
CdcRatio cdc_ratio(const Grid& grid, Vec2 xi, double radius, const CapacityOptions& options = {});

struct CdcReport {
    Vec2 xi;
    double arclength = 0.0;
    std::vector<double> radii;
    std::vector<double> ratios;
    std::vector<bool> warnings;
};

struct CdcSweep {
    std::vector<CdcReport> points;
    /// Minimum ratio over all points and radii.
    double gamma_hat = 0.0;
    /// Range of radii the sweep covers; the condition is only certified there.
    double certified_min_radius = 0.0;
    double certified_max_radius = 0.0;
    std::size_t warnings = 0;
};

/// Ratios at n_points boundary points spaced uniformly in arclength (starting at s = 0).
CdcSweep cdc_sweep(const Grid& grid, int n_points, const std::vector<double>& radii,
                   const CapacityOptions& options = {});

}  // namespace elab
