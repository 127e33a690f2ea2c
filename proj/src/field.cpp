#include "elab/field.hpp"

#include "elab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace elab {

DiscreteField::DiscreteField(GridPtr grid)
    : grid_(std::move(grid))
{
    values_.assign(grid_->num_nodes(), 0.0);
}

DiscreteField::DiscreteField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values))
{
    if (values_.size() != grid_->num_nodes()) throw Error("field size does not match the grid");
}

DiscreteField DiscreteField::from_function(GridPtr grid, const std::function<double(Vec2)>& f)
{
    std::vector<double> v(grid->num_nodes());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid->position(i));
    return {std::move(grid), std::move(v)};
}

std::span<const double> DiscreteField::interior() const
{
    return std::span<const double>(values_).first(grid_->num_interior());
}

BoundaryTrace DiscreteField::trace() const
{
    return {values_.begin() + static_cast<std::ptrdiff_t>(grid_->num_interior()), values_.end()};
}

void DiscreteField::set_trace(const BoundaryTrace& g)
{
    if (g.size() != grid_->num_boundary()) throw Error("boundary trace size does not match the grid");
    std::copy(g.begin(), g.end(), values_.begin() + static_cast<std::ptrdiff_t>(grid_->num_interior()));
}

double DiscreteField::max_abs() const
{
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

double DiscreteField::min() const { return *std::min_element(values_.begin(), values_.end()); }
double DiscreteField::max() const { return *std::max_element(values_.begin(), values_.end()); }

DiscreteField& DiscreteField::operator+=(const DiscreteField& other)
{
    if (other.grid_ != grid_) throw Error("field grid mismatch");
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
    return *this;
}

DiscreteField& DiscreteField::operator*=(double s)
{
    for (double& v : values_) v *= s;
    return *this;
}

DiscreteField operator+(DiscreteField a, const DiscreteField& b)
{
    a += b;
    return a;
}

DiscreteField operator-(DiscreteField a, const DiscreteField& b)
{
    if (a.grid_ptr() != b.grid_ptr()) throw Error("field grid mismatch");
    auto v = a.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b[i];
    return a;
}

double sup_distance(const DiscreteField& a, const DiscreteField& b)
{
    if (a.grid_ptr() != b.grid_ptr()) throw Error("field grid mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

BoundaryTrace trace_from_function(const Grid& grid, const std::function<double(Vec2)>& g)
{
    BoundaryTrace t(grid.num_boundary());
    for (std::size_t k = 0; k < t.size(); ++k) t[k] = g(grid.position(grid.num_interior() + k));
    return t;
}

void write_field_csv(std::ostream& out, const DiscreteField& u)
{
    const Grid& g = u.grid();
    out << "node,x,y,kind,value\n" << std::setprecision(17);
    for (std::size_t i = 0; i < g.num_nodes(); ++i) {
        const Vec2 p = g.position(i);
        out << i << ',' << p.x << ',' << p.y << ',' << (g.is_interior(i) ? "interior" : "boundary") << ','
            << u[i] << '\n';
    }
}

void write_field_grid(std::ostream& out, const DiscreteField& u)
{
    const Grid& g = u.grid();
    out << "# nx " << g.lattice_nx() << " ny " << g.lattice_ny() << " h " << g.h() << " origin " << g.origin().x
        << ' ' << g.origin().y << '\n'
        << std::setprecision(17);
    for (int j = 0; j <= g.lattice_ny(); ++j) {
        for (int i = 0; i <= g.lattice_nx(); ++i) {
            const std::int32_t n = g.lattice_node(i, j);
            if (i > 0) out << ' ';
            if (n < 0)
                out << "nan";
            else
                out << u[static_cast<std::size_t>(n)];
        }
        out << '\n';
    }
}

}  // namespace elab
