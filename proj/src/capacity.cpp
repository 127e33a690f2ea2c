#include "elab/capacity.hpp"

#include "elab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace elab {

namespace {

constexpr std::int8_t free_point = 0;
constexpr std::int8_t compact_point = 1;
constexpr std::int8_t outside_point = 2;

/// Parameters in [0,1] where p + t(q-p) meets the circle |z - c| = rho.
std::vector<double> circle_events(Vec2 p, Vec2 q, Vec2 c, double rho)
{
    const Vec2 d = q - p;
    const Vec2 f = p - c;
    const double a = dot(d, d);
    const double b = dot(f, d);
    const double cc = dot(f, f) - rho * rho;
    const double disc = b * b - a * cc;
    std::vector<double> out;
    if (a == 0.0 || disc < 0.0) return out;
    const double s = std::sqrt(disc);
    const double qq = b >= 0.0 ? -(b + s) : -(b - s);
    for (double t : {qq / a, qq != 0.0 ? cc / qq : -1.0})
        if (t >= 0.0 && t <= 1.0) out.push_back(t);
    return out;
}

}  // namespace

Condenser ball_condenser(Vec2 center, double radius, double outer_radius)
{
    if (!(radius >= 0.0) || !(outer_radius > radius))
        throw GeometryError("condenser needs 0 <= radius < outer radius");
    Condenser c;
    c.center = center;
    c.outer_radius = outer_radius;
    const double slack = 1e-12 * outer_radius;
    c.in_compact = [=](Vec2 z) { return norm(z - center) <= radius + slack; };
    c.compact_events = [=](Vec2 p, Vec2 q) { return circle_events(p, q, center, radius); };
    c.description = "ball";
    return c;
}

Condenser complement_condenser(const Domain& domain, Vec2 center, double radius, double outer_radius)
{
    if (!(radius > 0.0) || !(outer_radius > radius))
        throw GeometryError("condenser needs 0 < radius < outer radius");
    Condenser c;
    c.center = center;
    c.outer_radius = outer_radius;
    const double slack = 1e-12 * outer_radius;
    c.in_compact = [=](Vec2 z) { return norm(z - center) <= radius + slack && !domain.contains(z); };
    c.compact_events = [=](Vec2 p, Vec2 q) {
        auto t = circle_events(p, q, center, radius);
        const auto b = domain.boundary_crossings(p, q);
        t.insert(t.end(), b.begin(), b.end());
        return t;
    };
    c.description = "ball minus " + domain.name();
    return c;
}

CondenserProblem::CondenserProblem(Condenser condenser, const CapacityOptions& options)
    : condenser_(std::move(condenser)), options_(options)
{
    const int res = options_.resolution;
    if (res < 8 || res % 2 != 0) throw GeometryError("condenser resolution must be even and >= 8");
    const double outer = condenser_.outer_radius;
    const Vec2 c = condenser_.center;
    lattice_.h = 2.0 * outer / res;
    lattice_.side = res + 1;
    lattice_.origin = {c.x - outer, c.y - outer};
    const std::size_t total = static_cast<std::size_t>(lattice_.side) * static_cast<std::size_t>(lattice_.side);
    lattice_.values.assign(total, 0.0);
    state_.assign(total, outside_point);

    const double edge = outer * (1.0 - 1e-12);
    std::vector<int> index(total, -1);
    for (int j = 0; j < lattice_.side; ++j) {
        for (int i = 0; i < lattice_.side; ++i) {
            const std::size_t k = static_cast<std::size_t>(j * lattice_.side + i);
            const Vec2 z = lattice_.position(i, j);
            if (norm(z - c) >= edge) continue;
            if (condenser_.in_compact(z)) {
                state_[k] = compact_point;
                lattice_.values[k] = 1.0;
                ++contacts_;
            } else {
                state_[k] = free_point;
                index[k] = static_cast<int>(free_.size());
                free_.push_back(static_cast<int>(k));
            }
        }
    }

    constexpr int di[4] = {1, -1, 0, 0};
    constexpr int dj[4] = {0, 0, 1, -1};
    for (std::size_t f = 0; f < free_.size(); ++f) {
        const int k = free_[f];
        const int i = k % lattice_.side;
        const int j = k / lattice_.side;
        const Vec2 p = lattice_.position(i, j);
        for (int dir = 0; dir < 4; ++dir) {
            const int ni = i + di[dir];
            const int nj = j + dj[dir];
            const Vec2 q = lattice_.position(ni, nj);
            auto events = condenser_.compact_events(p, q);
            const auto ring = circle_events(p, q, c, outer);
            events.insert(events.end(), ring.begin(), ring.end());
            events.push_back(1.0);
            std::sort(events.begin(), events.end());
            bool cut = false;
            for (double t : events) {
                if (t <= 0.0) continue;
                const Vec2 z = p + t * (q - p);
                double value = -1.0;
                if (norm(z - c) >= edge)
                    value = 0.0;
                else if (condenser_.in_compact(z))
                    value = 1.0;
                if (value < 0.0) continue;
                cuts_.push_back({f, 1.0 / std::max(t, 1e-9), value});
                if (value == 1.0) ++contacts_;
                cut = true;
                break;
            }
            if (cut) continue;
            const int nk = nj * lattice_.side + ni;
            // Each free-free link is stored once, from its lower end.
            if (index[static_cast<std::size_t>(nk)] > static_cast<int>(f))
                links_.push_back({f, static_cast<std::size_t>(index[static_cast<std::size_t>(nk)])});
        }
    }
}

double CondenserProblem::energy(const std::vector<double>& u) const
{
    if (u.size() != free_.size()) throw Error("free value vector has the wrong size");
    double e = 0.0;
    for (const Link& l : links_) {
        const double d = u[l.a] - u[l.b];
        e += d * d;
    }
    for (const Cut& c : cuts_) {
        const double d = u[c.from] - c.value;
        e += c.weight * d * d;
    }
    return e;
}

CapacityResult CondenserProblem::solve() const
{
    CapacityResult out;
    out.potential = lattice_;
    out.condenser = condenser_.description;
    out.unknowns = free_.size();
    out.compact_contacts = contacts_;
    if (contacts_ == 0 || free_.empty()) return out;

    const auto n = static_cast<Eigen::Index>(free_.size());
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(free_.size() + 2 * links_.size() + cuts_.size());
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const Link& l : links_) {
        const auto a = static_cast<int>(l.a);
        const auto b = static_cast<int>(l.b);
        trip.emplace_back(a, a, 1.0);
        trip.emplace_back(b, b, 1.0);
        trip.emplace_back(a, b, -1.0);
        trip.emplace_back(b, a, -1.0);
    }
    for (const Cut& c : cuts_) {
        const auto a = static_cast<int>(c.from);
        trip.emplace_back(a, a, c.weight);
        rhs[a] += c.weight * c.value;
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(trip.begin(), trip.end());
    const LinearSolver solver(std::move(m), options_.solver);
    const Eigen::VectorXd x = solver.solve(rhs);
    std::vector<double> u(x.begin(), x.end());
    for (std::size_t f = 0; f < free_.size(); ++f) out.potential.values[static_cast<std::size_t>(free_[f])] = u[f];
    out.value = energy(u);
    return out;
}

CapacityResult capacity(const Condenser& condenser, const CapacityOptions& options)
{
    return CondenserProblem(condenser, options).solve();
}

namespace {

void check_cdc_arguments(const Grid& grid, Vec2 xi, double radius)
{
    const Domain& d = grid.domain();
    if (d.distance_to_boundary(xi) > 1e-9 * d.characteristic_size())
        throw GeometryError("capacity density point must lie on the boundary");
    if (!(radius > 2.0 * grid.h())) throw GeometryError("capacity density radius must exceed 2h");
}

CdcRatio ratio_with(const Grid& grid, Vec2 xi, double radius, double denominator, const CapacityOptions& options)
{
    const auto num = capacity(complement_condenser(grid.domain(), xi, radius, 2.0 * radius), options);
    CdcRatio r;
    r.numerator = num.value;
    r.denominator = denominator;
    r.warning = num.compact_contacts == 0;
    r.ratio = denominator > 0.0 ? num.value / denominator : 0.0;
    return r;
}

}  // namespace

CdcRatio cdc_ratio(const Grid& grid, Vec2 xi, double radius, const CapacityOptions& options)
{
    check_cdc_arguments(grid, xi, radius);
    const double den = capacity(ball_condenser(xi, radius, 2.0 * radius), options).value;
    return ratio_with(grid, xi, radius, den, options);
}

CdcSweep cdc_sweep(const Grid& grid, int n_points, const std::vector<double>& radii, const CapacityOptions& options)
{
    if (n_points < 4) throw GeometryError("capacity density sweep needs at least 4 boundary points");
    if (radii.empty()) throw GeometryError("capacity density sweep needs at least one radius");
    const Domain& d = grid.domain();
    CdcSweep out;
    out.points.resize(static_cast<std::size_t>(n_points));
    for (int k = 0; k < n_points; ++k) {
        auto& p = out.points[static_cast<std::size_t>(k)];
        p.arclength = d.boundary_length() * k / n_points;
        p.xi = d.boundary_point(p.arclength);
        p.radii = radii;
        p.ratios.assign(radii.size(), 0.0);
        p.warnings.assign(radii.size(), false);
        for (double r : radii) check_cdc_arguments(grid, p.xi, r);
    }
    // The ball condenser is translation invariant: one solve per radius.
    std::vector<double> den(radii.size());
    for (std::size_t r = 0; r < radii.size(); ++r)
        den[r] = capacity(ball_condenser({0.0, 0.0}, radii[r], 2.0 * radii[r]), options).value;

    const auto tasks = static_cast<long>(out.points.size() * radii.size());
    std::vector<CdcRatio> results(static_cast<std::size_t>(tasks));
#pragma omp parallel for schedule(dynamic)
    for (long t = 0; t < tasks; ++t) {
        const auto pi = static_cast<std::size_t>(t) / radii.size();
        const auto ri = static_cast<std::size_t>(t) % radii.size();
        results[static_cast<std::size_t>(t)] = ratio_with(grid, out.points[pi].xi, radii[ri], den[ri], options);
    }

    out.gamma_hat = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < results.size(); ++t) {
        auto& p = out.points[t / radii.size()];
        const auto ri = t % radii.size();
        p.ratios[ri] = results[t].ratio;
        p.warnings[ri] = results[t].warning;
        out.warnings += results[t].warning ? 1 : 0;
        out.gamma_hat = std::min(out.gamma_hat, results[t].ratio);
    }
    out.certified_min_radius = *std::min_element(radii.begin(), radii.end());
    out.certified_max_radius = *std::max_element(radii.begin(), radii.end());
    return out;
}

}  // namespace elab
