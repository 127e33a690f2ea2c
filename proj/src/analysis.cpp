#include "elab/analysis.hpp"

#include "elab/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>

namespace elab {

namespace {

/// Uniform bucket index over a point cloud.
class PointIndex {
public:
    PointIndex(std::span<const Vec2> pts, double cell) : pts_(pts), cell_(cell)
    {
        lo_ = hi_ = pts.empty() ? Vec2{} : pts[0];
        for (const Vec2& p : pts) {
            lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
            hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
        }
        nx_ = static_cast<int>((hi_.x - lo_.x) / cell_) + 1;
        ny_ = static_cast<int>((hi_.y - lo_.y) / cell_) + 1;
        start_.assign(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_) + 1, 0);
        for (const Vec2& p : pts) ++start_[bucket(p) + 1];
        std::partial_sum(start_.begin(), start_.end(), start_.begin());
        items_.resize(pts.size());
        auto fill = start_;
        for (std::size_t i = 0; i < pts.size(); ++i) items_[fill[bucket(pts[i])]++] = static_cast<int>(i);
    }

    /// Nearest sample to z among the buckets within `reach` cells.
    [[nodiscard]] std::optional<int> nearest(Vec2 z, int reach = 1) const
    {
        const int bi = cell_x(z.x);
        const int bj = cell_y(z.y);
        double best = std::numeric_limits<double>::infinity();
        int found = -1;
        for (int j = std::max(0, bj - reach); j <= std::min(ny_ - 1, bj + reach); ++j) {
            for (int i = std::max(0, bi - reach); i <= std::min(nx_ - 1, bi + reach); ++i) {
                const auto b = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
                for (auto k = start_[b]; k < start_[b + 1]; ++k) {
                    const Vec2 d = pts_[static_cast<std::size_t>(items_[k])] - z;
                    const double dd = dot(d, d);
                    if (dd < best) {
                        best = dd;
                        found = items_[k];
                    }
                }
            }
        }
        if (found < 0) return std::nullopt;
        return found;
    }

    template <class F>
    void within(Vec2 z, double radius, F&& visit) const
    {
        const int reach = static_cast<int>(std::ceil(radius / cell_));
        const int bi = cell_x(z.x);
        const int bj = cell_y(z.y);
        for (int j = std::max(0, bj - reach); j <= std::min(ny_ - 1, bj + reach); ++j) {
            for (int i = std::max(0, bi - reach); i <= std::min(nx_ - 1, bi + reach); ++i) {
                const auto b = static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
                for (auto k = start_[b]; k < start_[b + 1]; ++k)
                    if (norm(pts_[static_cast<std::size_t>(items_[k])] - z) <= radius) visit(items_[k]);
            }
        }
    }

private:
    [[nodiscard]] int cell_x(double x) const
    {
        return std::clamp(static_cast<int>(std::floor((x - lo_.x) / cell_)), 0, nx_ - 1);
    }
    [[nodiscard]] int cell_y(double y) const
    {
        return std::clamp(static_cast<int>(std::floor((y - lo_.y) / cell_)), 0, ny_ - 1);
    }
    [[nodiscard]] std::size_t bucket(Vec2 p) const
    {
        return static_cast<std::size_t>(cell_y(p.y)) * static_cast<std::size_t>(nx_) +
               static_cast<std::size_t>(cell_x(p.x));
    }

    std::span<const Vec2> pts_;
    double cell_;
    Vec2 lo_;
    Vec2 hi_;
    int nx_ = 1;
    int ny_ = 1;
    std::vector<std::size_t> start_;
    std::vector<int> items_;
};

/// Median nearest-neighbour distance over a deterministic sample of the points.
double typical_spacing(std::span<const Vec2> pts)
{
    const std::size_t n = pts.size();
    const std::size_t stride = std::max<std::size_t>(1, n / 256);
    std::vector<double> nn;
    for (std::size_t i = 0; i < n; i += stride) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            const double d = norm(pts[i] - pts[j]);
            if (j != i && d > 0.0) best = std::min(best, d);
        }
        if (std::isfinite(best)) nn.push_back(best);
    }
    if (nn.empty()) return 1.0;
    std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(nn.size() / 2), nn.end());
    return nn[nn.size() / 2];
}

double pair_ratio(const SampledFunction& f, std::size_t i, std::size_t j, double beta)
{
    const double d = norm(f.points[i] - f.points[j]);
    if (d <= 0.0) return 0.0;
    return std::abs(f.values[i] - f.values[j]) / std::pow(d, beta);
}

}  // namespace

SampledFunction sample(const DiscreteField& u)
{
    const Grid& g = u.grid();
    SampledFunction f;
    f.points.assign(g.positions().begin(), g.positions().end());
    f.values.assign(u.values().begin(), u.values().end());
    return f;
}

SampledFunction sample(const DiscreteField& u, std::span<const std::size_t> nodes)
{
    SampledFunction f;
    f.points.reserve(nodes.size());
    f.values.reserve(nodes.size());
    for (std::size_t n : nodes) {
        f.points.push_back(u.grid().position(n));
        f.values.push_back(u[n]);
    }
    return f;
}

SampledFunction sample_trace(const Grid& grid, const BoundaryTrace& g)
{
    if (g.size() != grid.num_boundary()) throw Error("boundary trace size does not match the grid");
    SampledFunction f;
    f.values = g;
    f.points.reserve(g.size());
    for (std::size_t k = 0; k < g.size(); ++k) f.points.push_back(grid.position(grid.num_interior() + k));
    return f;
}

double point_set_diameter(std::span<const Vec2> points)
{
    if (points.size() < 2) return 0.0;
    std::vector<Vec2> p(points.begin(), points.end());
    std::sort(p.begin(), p.end(), [](Vec2 a, Vec2 b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
    std::vector<Vec2> hull(2 * p.size());
    std::size_t k = 0;
    for (const Vec2& q : p) {
        while (k >= 2 && cross(hull[k - 1] - hull[k - 2], q - hull[k - 2]) <= 0.0) --k;
        hull[k++] = q;
    }
    for (std::size_t i = p.size() - 1, t = k + 1; i-- > 0;) {
        while (k >= t && cross(hull[k - 1] - hull[k - 2], p[i] - hull[k - 2]) <= 0.0) --k;
        hull[k++] = p[i];
    }
    hull.resize(k > 1 ? k - 1 : k);
    double d = 0.0;
    for (std::size_t a = 0; a < hull.size(); ++a)
        for (std::size_t b = a + 1; b < hull.size(); ++b) d = std::max(d, norm(hull[a] - hull[b]));
    return d;
}

HolderNorm holder_norm(const SampledFunction& f, double beta, const HolderNormOptions& options)
{
    if (!(beta > 0.0 && beta <= 1.0)) throw Error("Hölder exponent must lie in (0,1]");
    if (f.points.size() != f.values.size()) throw Error("sample points and values differ in size");
    const std::size_t n = f.size();
    if (n < 2) throw Error("Hölder norm needs at least two samples");

    HolderNorm out;
    for (double v : f.values) out.sup = std::max(out.sup, std::abs(v));
    out.diameter = point_set_diameter(f.points);

    const double all_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
    double semi = 0.0;
    if (all_pairs <= static_cast<double>(options.pair_budget)) {
        const auto sn = static_cast<long>(n);
#pragma omp parallel for reduction(max : semi) schedule(dynamic, 16)
        for (long i = 0; i < sn; ++i)
            for (auto j = static_cast<std::size_t>(i) + 1; j < n; ++j)
                semi = std::max(semi, pair_ratio(f, static_cast<std::size_t>(i), j, beta));
        out.pairs = static_cast<std::size_t>(all_pairs);
        out.exact = true;
    } else {
        // Three interleaved pair sources; the sequence does not depend on the budget.
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return f.values[a] < f.values[b]; });
        const std::size_t argmin = order.front();
        const std::size_t argmax = order.back();
        std::size_t extreme_pos = 0;
        auto next_extreme = [&]() -> std::optional<std::pair<std::size_t, std::size_t>> {
            if (extreme_pos >= 2 * n) return std::nullopt;
            const std::size_t k = extreme_pos / 2;
            const bool from_max = extreme_pos % 2 == 0;
            ++extreme_pos;
            return from_max ? std::pair{argmax, order[k]} : std::pair{argmin, order[n - 1 - k]};
        };

        const double s = typical_spacing(f.points);
        const PointIndex index(f.points, s);
        std::vector<double> variation(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            index.within(f.points[i], 1.5 * s, [&](int j) {
                variation[i] = std::max(variation[i], std::abs(f.values[i] - f.values[static_cast<std::size_t>(j)]));
            });
        std::vector<std::size_t> rough(n);
        std::iota(rough.begin(), rough.end(), 0);
        std::stable_sort(rough.begin(), rough.end(), [&](std::size_t a, std::size_t b) { return variation[a] > variation[b]; });
        std::size_t near_point = 0;
        std::vector<int> near_list;
        std::size_t near_pos = 0;
        auto next_near = [&]() -> std::optional<std::pair<std::size_t, std::size_t>> {
            while (near_pos >= near_list.size()) {
                if (near_point >= n) return std::nullopt;
                near_list.clear();
                near_pos = 0;
                const std::size_t i = rough[near_point++];
                index.within(f.points[i], 2.5 * s, [&](int j) {
                    if (static_cast<std::size_t>(j) != i) near_list.push_back(j);
                });
                std::sort(near_list.begin(), near_list.end());
                if (!near_list.empty()) near_list.insert(near_list.begin(), static_cast<int>(i));
                if (!near_list.empty()) near_pos = 1;
            }
            return std::pair{static_cast<std::size_t>(near_list[0]), static_cast<std::size_t>(near_list[near_pos++])};
        };

        std::mt19937_64 rng(options.seed);
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const int bands = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(out.diameter / s, 2.0)))));
        auto next_random = [&]() -> std::pair<std::size_t, std::size_t> {
            const std::size_t i = pick(rng);
            const double d = s * std::exp2(bands * unit(rng));
            const double t = 2.0 * std::numbers::pi * unit(rng);
            const Vec2 target = f.points[i] + Vec2{d * std::cos(t), d * std::sin(t)};
            const auto j = index.nearest(target);
            return {i, j ? static_cast<std::size_t>(*j) : pick(rng)};
        };

        std::size_t used = 0;
        bool extremes_left = true;
        bool near_left = true;
        while (used < options.pair_budget) {
            for (int source = 0; source < 3 && used < options.pair_budget; ++source) {
                std::optional<std::pair<std::size_t, std::size_t>> p;
                if (source == 0 && extremes_left) {
                    p = next_extreme();
                    extremes_left = p.has_value();
                } else if (source == 1 && near_left) {
                    p = next_near();
                    near_left = p.has_value();
                } else if (source == 2) {
                    p = next_random();
                }
                if (!p) continue;
                semi = std::max(semi, pair_ratio(f, p->first, p->second, beta));
                ++used;
            }
        }
        out.pairs = used;
        out.exact = false;
    }
    out.seminorm = semi;
    out.value = out.sup + std::pow(out.diameter, beta) * semi;
    return out;
}

namespace {

HolderFit fit_modulus(const SampledFunction& f, double spacing, double diameter, const HolderFitOptions& options)
{
    if (f.points.size() != f.values.size()) throw Error("sample points and values differ in size");
    if (f.size() < 2) throw Error("Hölder fit needs at least two samples");
    if (!(spacing > 0.0)) throw Error("sample spacing must be positive");
    HolderFit out;
    out.r_min = options.r_min > 0.0 ? options.r_min : 4.0 * spacing;
    out.r_max = options.r_max > 0.0 ? options.r_max : diameter / 4.0;
    if (!(out.r_min > 2.0 * spacing * (1.0 - 1e-12)) || !(out.r_max < diameter / 2.0) || !(out.r_min < out.r_max))
        throw Error("Hölder fit range must satisfy 2h < r_min < r_max < diam/2");
    const int scales = std::max(2, options.scales);
    out.radii.resize(static_cast<std::size_t>(scales));
    for (int k = 0; k < scales; ++k)
        out.radii[static_cast<std::size_t>(k)] = out.r_min * std::pow(out.r_max / out.r_min, static_cast<double>(k) / (scales - 1));
    std::vector<double> omega(out.radii.size(), 0.0);
    std::vector<double> at(out.radii.size(), 0.0);
    auto merge = [&](const std::vector<double>& w, const std::vector<double>& d) {
        for (std::size_t k = 0; k < omega.size(); ++k)
            if (w[k] > omega[k] || (w[k] == omega[k] && d[k] < at[k] && w[k] > 0.0)) {
                omega[k] = w[k];
                at[k] = d[k];
            }
    };
    const double band = options.band;
    const std::size_t n = f.size();
    const auto sn = static_cast<long>(n);

    if (n <= 3000) {
#pragma omp parallel
        {
            std::vector<double> local(omega.size(), 0.0);
            std::vector<double> local_at(omega.size(), 0.0);
#pragma omp for schedule(dynamic, 16)
            for (long i = 0; i < sn; ++i) {
                for (auto j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
                    const double d = norm(f.points[static_cast<std::size_t>(i)] - f.points[j]);
                    const double du = std::abs(f.values[static_cast<std::size_t>(i)] - f.values[j]);
                    for (std::size_t k = 0; k < out.radii.size(); ++k)
                        if (std::abs(d - out.radii[k]) <= band * out.radii[k] &&
                            (du > local[k] || (du == local[k] && d < local_at[k]))) {
                            local[k] = du;
                            local_at[k] = d;
                        }
                }
            }
#pragma omp critical
            merge(local, local_at);
        }
    } else {
        const PointIndex index(f.points, spacing);
        const int dirs = std::max(4, options.directions);
#pragma omp parallel
        {
            std::vector<double> local(omega.size(), 0.0);
            std::vector<double> local_at(omega.size(), 0.0);
#pragma omp for schedule(static)
            for (long i = 0; i < sn; ++i) {
                const Vec2 p = f.points[static_cast<std::size_t>(i)];
                for (std::size_t k = 0; k < out.radii.size(); ++k) {
                    const double r = out.radii[k];
                    for (int m = 0; m < dirs; ++m) {
                        const double t = 2.0 * std::numbers::pi * m / dirs;
                        const auto j = index.nearest(p + Vec2{r * std::cos(t), r * std::sin(t)});
                        if (!j) continue;
                        const auto jj = static_cast<std::size_t>(*j);
                        const double d = norm(f.points[jj] - p);
                        if (std::abs(d - r) > band * r) continue;
                        const double du = std::abs(f.values[static_cast<std::size_t>(i)] - f.values[jj]);
                        if (du > local[k] || (du == local[k] && d < local_at[k])) {
                            local[k] = du;
                            local_at[k] = d;
                        }
                    }
                }
            }
#pragma omp critical
            merge(local, local_at);
        }
    }
    out.modulus = omega;
    out.distances = at;

    double sup = 0.0;
    for (double v : f.values) sup = std::max(sup, std::abs(v));
    const double floor = 1e-13 * std::max(1.0, sup);
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t k = 0; k < omega.size(); ++k)
        if (omega[k] > floor) {
            // Regress on the distance actually realised by the maximising pair.
            xs.push_back(std::log(at[k]));
            ys.push_back(std::log(omega[k]));
        }
    if (xs.size() < 2) {
        out.degenerate = true;
        return out;
    }
    const double m = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
    double sxx = 0.0;
    double sxy = 0.0;
    double syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    out.beta_hat = sxy / sxx;
    out.seminorm_hat = std::exp(my - out.beta_hat * mx);
    double ss_res = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        const double e = ys[k] - (my + out.beta_hat * (xs[k] - mx));
        ss_res += e * e;
    }
    out.fit_r2 = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
    return out;
}

}  // namespace

double median_spacing(std::span<const Vec2> points) { return typical_spacing(points); }

HolderFit holder_fit(const SampledFunction& f, double spacing, const HolderFitOptions& options)
{
    return fit_modulus(f, spacing, point_set_diameter(f.points), options);
}

HolderFit holder_fit(const DiscreteField& u, const HolderFitOptions& options)
{
    return fit_modulus(sample(u), u.grid().h(), u.grid().domain().diameter(), options);
}

double oscillation(std::span<const double> values)
{
    if (values.empty()) throw Error("oscillation of an empty set");
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    return *hi - *lo;
}

double oscillation(const DiscreteField& u) { return oscillation(u.values()); }

double oscillation(const DiscreteField& u, std::span<const std::size_t> nodes)
{
    if (nodes.empty()) throw Error("oscillation of an empty set");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t n : nodes) {
        lo = std::min(lo, u[n]);
        hi = std::max(hi, u[n]);
    }
    return hi - lo;
}

HarnackResult weak_harnack_ratio(const DiscreteField& u, const std::vector<HarnackBall>& balls)
{
    const Grid& g = u.grid();
    HarnackResult out;
    for (const HarnackBall& b : balls) {
        if (!g.is_interior(b.center)) throw GeometryError("Harnack ball centre must be an interior node");
        if (!(b.radius > 0.0)) throw GeometryError("Harnack ball radius must be positive");
        if (2.0 * b.radius > g.delta(b.center) * (1.0 + 1e-12))
            throw GeometryError("Harnack ball B(x,2r) is not contained in the domain");
        const Vec2 c = g.position(b.center);
        double sum = 0.0;
        double vol = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p < g.num_interior(); ++p) {
            if (norm(g.position(p) - c) >= b.radius) continue;
            if (u[p] < 0.0) throw Error("Harnack ratio needs a nonnegative function on the ball");
            sum += u[p] * g.cell_volume(p);
            vol += g.cell_volume(p);
            lo = std::min(lo, u[p]);
        }
        if (lo < 1e-14) {
            lo = 1e-14;
            out.clamped = true;
        }
        const double ratio = (sum / vol) / lo;
        out.ratios.push_back(ratio);
        out.max_ratio = std::max(out.max_ratio, ratio);
    }
    return out;
}

}  // namespace elab
