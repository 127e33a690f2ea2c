#include "elab/measure.hpp"

#include "elab/csv.hpp"
#include "elab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace elab {

namespace {

double sum_abs(std::span<const double> v)
{
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(GridPtr grid)
    : grid_(std::move(grid))
{
    if (!grid_) throw MeasureError("measure requires a grid");
    mass_.assign(grid_->num_interior(), 0.0);
}

DiscreteMeasure::DiscreteMeasure(GridPtr grid, std::vector<double> cell_mass)
    : grid_(std::move(grid)), mass_(std::move(cell_mass))
{
    if (!grid_) throw MeasureError("measure requires a grid");
    if (mass_.size() != grid_->num_interior()) {
        throw MeasureError("cell mass count does not match the grid's interior cells");
    }
    for (double m : mass_) {
        if (!std::isfinite(m)) throw MeasureError("non-finite cell mass");
    }
    total_variation_ = sum_abs(mass_);
}

DiscreteMeasure DiscreteMeasure::lebesgue(GridPtr grid)
{
    const auto vol = grid->cell_volumes();
    std::vector<double> m(vol.begin(), vol.end());
    return {std::move(grid), std::move(m)};
}

DiscreteMeasure DiscreteMeasure::with_density(GridPtr grid, const std::function<double(Vec2, double)>& density)
{
    std::vector<double> m(grid->num_interior());
    for (std::size_t i = 0; i < m.size(); ++i) {
        m[i] = density(grid->position(i), grid->delta(i)) * grid->cell_volume(i);
    }
    return {std::move(grid), std::move(m)};
}

DiscreteMeasure DiscreteMeasure::atom(GridPtr grid, std::size_t node, double mass)
{
    if (node >= grid->num_interior()) throw MeasureError("atom must sit on an interior cell");
    std::vector<double> m(grid->num_interior(), 0.0);
    m[node] = mass;
    return {std::move(grid), std::move(m)};
}

double DiscreteMeasure::total_mass() const
{
    double s = 0.0;
    for (double m : mass_) s += m;
    return s;
}

double DiscreteMeasure::pair(std::span<const double> test) const
{
    if (test.size() < mass_.size()) throw MeasureError("test function shorter than the measure");
    double s = 0.0;
    for (std::size_t i = 0; i < mass_.size(); ++i) s += test[i] * mass_[i];
    return s;
}

bool DiscreteMeasure::is_nonnegative() const
{
    return std::all_of(mass_.begin(), mass_.end(), [](double m) { return m >= 0.0; });
}

bool DiscreteMeasure::is_zero() const
{
    return total_variation_ == 0.0;
}

DiscreteMeasure DiscreteMeasure::scaled(double a) const
{
    std::vector<double> m(mass_);
    for (double& x : m) x *= a;
    return {grid_, std::move(m)};
}

DiscreteMeasure DiscreteMeasure::absolute() const
{
    std::vector<double> m(mass_);
    for (double& x : m) x = std::abs(x);
    return {grid_, std::move(m)};
}

DiscreteMeasure measure_axpy(double a, const DiscreteMeasure& nu, const DiscreteMeasure& mu)
{
    if (nu.grid_ptr() != mu.grid_ptr()) throw MeasureError("measure_axpy: grid mismatch");
    std::vector<double> m(mu.masses().begin(), mu.masses().end());
    const auto x = nu.masses();
    for (std::size_t i = 0; i < m.size(); ++i) m[i] += a * x[i];
    return {nu.grid_ptr(), std::move(m)};
}

int ball_row_halfwidth(double rho2, int dj)
{
    const double s = rho2 - static_cast<double>(dj) * dj;
    if (s <= 0.0) return -1;
    auto m = static_cast<long long>(std::ceil(std::sqrt(s))) - 1;
    while (static_cast<double>(m + 1) * static_cast<double>(m + 1) < s) ++m;
    while (m >= 0 && static_cast<double>(m) * static_cast<double>(m) >= s) --m;
    return static_cast<int>(m);
}

BallMass ball_mass(const DiscreteMeasure& nu, std::size_t center, double radius)
{
    const Grid& g = nu.grid();
    if (center >= g.num_interior()) throw MeasureError("ball centre must be an interior node");
    if (!(radius > 0.0)) throw MeasureError("ball radius must be positive");
    if (radius > g.delta(center) * (1.0 + 1e-12)) {
        throw MeasureError("ball B(x, r) leaves the domain (r > delta(x))");
    }
    const auto [ci, cj] = g.lattice_index(center);
    const double rho = radius / g.h();
    const double rho2 = rho * rho;
    const int reach = static_cast<int>(std::ceil(rho));
    BallMass out;
    for (int dj = -reach; dj <= reach; ++dj) {
        const int w = ball_row_halfwidth(rho2, dj);
        for (int di = -w; di <= w; ++di) {
            const auto id = g.lattice_node(ci + di, cj + dj);
            if (id < 0 || !g.is_interior(static_cast<std::size_t>(id))) continue;
            const double m = nu.mass(static_cast<std::size_t>(id));
            out.mass += m;
            out.abs_mass += std::abs(m);
            ++out.cells;
        }
    }
    return out;
}

MorreyNormResult morrey_norm(const DiscreteMeasure& nu, double q, const MorreyScanOptions& options)
{
    if (!(q >= 1.0)) throw MeasureError("Morrey exponent q must be >= 1");
    if (options.depth < 0) throw MeasureError("scan depth must be >= 0");
    const Grid& g = nu.grid();
    const int n = g.dimension();
    const double h = g.h();
    const int nx = g.lattice_nx() + 1;
    const int ny = g.lattice_ny() + 1;

    // Row prefix sums of |ν| over the lattice (zero off the interior).
    const auto row = static_cast<std::size_t>(nx + 1);
    std::vector<double> prefix(row * static_cast<std::size_t>(ny), 0.0);
    for (std::size_t c = 0; c < g.num_interior(); ++c) {
        const auto [i, j] = g.lattice_index(c);
        prefix[static_cast<std::size_t>(j) * row + static_cast<std::size_t>(i) + 1] = std::abs(nu.mass(c));
    }
    for (int j = 0; j < ny; ++j) {
        double* r = prefix.data() + static_cast<std::size_t>(j) * row;
        for (int i = 1; i <= nx; ++i) r[i] += r[i - 1];
    }
    auto abs_ball = [&](int ci, int cj, double radius) {
        const double rho = radius / h;
        const double rho2 = rho * rho;
        const int reach = static_cast<int>(std::ceil(rho));
        double s = 0.0;
        for (int dj = -reach; dj <= reach; ++dj) {
            const int j = cj + dj;
            if (j < 0 || j >= ny) continue;
            const int w = ball_row_halfwidth(rho2, dj);
            if (w < 0) continue;
            const int lo = std::max(ci - w, 0);
            const int hi = std::min(ci + w + 1, nx);
            if (lo >= hi) continue;
            const double* r = prefix.data() + static_cast<std::size_t>(j) * row;
            s += r[hi] - r[lo];
        }
        return s;
    };

    const double radius_exponent = static_cast<double>(n) / q - n;
    const double r_min = options.min_radius_cells * h;
    const auto count = static_cast<std::int64_t>(g.num_interior());

    struct Best {
        double value = 0.0;
        std::int32_t node = -1;
        double radius = 0.0;
        std::size_t scanned = 0;
    };
    auto better = [](const Best& a, const Best& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.node >= 0 && (b.node < 0 || a.node < b.node);
    };

    Best best;
#pragma omp parallel
    {
        Best local;
#pragma omp for schedule(static)
        for (std::int64_t c = 0; c < count; ++c) {
            const auto node = static_cast<std::size_t>(c);
            const auto [ci, cj] = g.lattice_index(node);
            double radius = 0.5 * g.delta(node);
            for (int k = 0; k <= options.depth; ++k, radius *= 0.5) {
                if (radius < r_min) break;
                ++local.scanned;
                const double v = std::pow(radius, radius_exponent) * abs_ball(ci, cj, radius);
                const Best cand{v, static_cast<std::int32_t>(node), radius, 0};
                if (v > 0.0 && better(cand, local)) {
                    local.value = v;
                    local.node = cand.node;
                    local.radius = radius;
                }
            }
        }
#pragma omp critical
        {
            best.scanned += local.scanned;
            if (local.node >= 0 && better(local, best)) {
                best.value = local.value;
                best.node = local.node;
                best.radius = local.radius;
            }
        }
    }

    MorreyNormResult out;
    out.q = q;
    out.value = std::pow(g.domain().diameter(), 2.0 - n / q) * best.value;
    out.argmax_center = best.node;
    out.argmax_radius = best.radius;
    out.balls_scanned = best.scanned;
    return out;
}

void write_measure_csv(std::ostream& out, const DiscreteMeasure& nu)
{
    const Grid& g = nu.grid();
    out << "cell,x,y,mass\n";
    out << std::setprecision(17);
    for (std::size_t c = 0; c < nu.size(); ++c) {
        const Vec2 p = g.position(c);
        out << c << ',' << p.x << ',' << p.y << ',' << nu.mass(c) << '\n';
    }
}

DiscreteMeasure read_measure_csv(std::istream& in, GridPtr grid)
{
    const CsvTable table = read_csv(in);
    const auto cell_col = table.column("cell");
    const auto mass_col = table.column("mass");
    std::vector<double> m(grid->num_interior(), 0.0);
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto cell = static_cast<long long>(table.number(r, cell_col));
        if (cell < 0 || static_cast<std::size_t>(cell) >= m.size()) {
            throw MeasureError("measure CSV row " + std::to_string(r + 2) + ": cell index out of range");
        }
        m[static_cast<std::size_t>(cell)] += table.number(r, mass_col);
    }
    return {std::move(grid), std::move(m)};
}

}  // namespace elab
