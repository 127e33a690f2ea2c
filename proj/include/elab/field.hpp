#pragma once

#include "elab/geometry.hpp"

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

namespace elab {

/// Values on the boundary nodes of a grid, indexed by node - num_interior.
using BoundaryTrace = std::vector<double>;

/// Nodal scalar function on every node (interior and boundary) of a grid.
class DiscreteField {
public:
    explicit DiscreteField(GridPtr grid);
    DiscreteField(GridPtr grid, std::vector<double> values);
    static DiscreteField from_function(GridPtr grid, const std::function<double(Vec2)>& f);

    [[nodiscard]] const Grid& grid() const noexcept { return *grid_; }
    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return grid_; }

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<double> values() noexcept { return values_; }
    [[nodiscard]] double operator[](std::size_t node) const { return values_[node]; }
    [[nodiscard]] std::span<const double> interior() const;
    [[nodiscard]] BoundaryTrace trace() const;
    void set_trace(const BoundaryTrace& g);

    [[nodiscard]] double max_abs() const;
    [[nodiscard]] double min() const;
    [[nodiscard]] double max() const;

    DiscreteField& operator+=(const DiscreteField& other);
    DiscreteField& operator*=(double s);

private:
    GridPtr grid_;
    std::vector<double> values_;
};

DiscreteField operator+(DiscreteField a, const DiscreteField& b);
DiscreteField operator-(DiscreteField a, const DiscreteField& b);
/// max_node |a - b|.
double sup_distance(const DiscreteField& a, const DiscreteField& b);

BoundaryTrace trace_from_function(const Grid& grid, const std::function<double(Vec2)>& g);

/// CSV with header node,x,y,kind,value.
void write_field_csv(std::ostream& out, const DiscreteField& u);
/// Lattice values as a whitespace matrix (rows from the bottom), nan outside the closure.
void write_field_grid(std::ostream& out, const DiscreteField& u);

}  // namespace elab
