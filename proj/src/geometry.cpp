#include "elab/geometry.hpp"

#include "elab/errors.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numbers>

namespace elab {

namespace {

double polygon_signed_area(std::span<const Vec2> poly)
{
    double a = 0.0;
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 p = poly[i];
        const Vec2 q = poly[(i + 1) % poly.size()];
        a += cross(p, q);
    }
    return 0.5 * a;
}

double point_segment_distance(Vec2 p, const Segment& s)
{
    const Vec2 d = s.b - s.a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(p - s.a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(p - (s.a + t * d));
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly)
{
    bool inside = false;
    for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
        const Vec2 a = poly[i];
        const Vec2 b = poly[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            const double x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if (p.x < x) inside = !inside;
        }
    }
    return inside;
}

void segment_crossings(Vec2 p, Vec2 q, const Segment& s, std::vector<double>& out)
{
    constexpr double eps = 1e-12;
    const Vec2 d = q - p;
    const Vec2 e = s.b - s.a;
    const double denom = cross(d, e);
    const Vec2 ap = s.a - p;
    const double scale = std::max(norm(d) * norm(e), std::numeric_limits<double>::min());
    if (std::abs(denom) <= eps * scale) {
        // Parallel: only collinear overlaps matter.
        if (std::abs(cross(ap, d)) > eps * std::max(norm(d), 1.0) * std::max(norm(ap), 1.0)) return;
        const double dd = dot(d, d);
        if (dd == 0.0) return;
        double ta = dot(s.a - p, d) / dd;
        double tb = dot(s.b - p, d) / dd;
        if (ta > tb) std::swap(ta, tb);
        const double lo = std::max(ta, 0.0);
        const double hi = std::min(tb, 1.0);
        if (lo <= hi) {
            out.push_back(lo);
            out.push_back(hi);
        }
        return;
    }
    const double t = cross(ap, e) / denom;
    const double u = cross(ap, d) / denom;
    if (t >= -eps && t <= 1.0 + eps && u >= -eps && u <= 1.0 + eps) {
        out.push_back(std::clamp(t, 0.0, 1.0));
    }
}

void circle_crossings(Vec2 p, Vec2 q, const Circle& c, std::vector<double>& out)
{
    const Vec2 d = q - p;
    const Vec2 f = p - c.center;
    const double a = dot(d, d);
    if (a == 0.0) return;
    const double b = 2.0 * dot(f, d);
    const double cc = dot(f, f) - c.radius * c.radius;
    const double disc = b * b - 4.0 * a * cc;
    if (disc < 0.0) return;
    const double s = std::sqrt(disc);
    // Numerically stable roots.
    const double qq = -0.5 * (b + std::copysign(s, b));
    double roots[2] = {qq / a, qq != 0.0 ? cc / qq : -b / (2.0 * a)};
    constexpr double eps = 1e-12;
    for (double t : roots) {
        if (t >= -eps && t <= 1.0 + eps) out.push_back(std::clamp(t, 0.0, 1.0));
    }
}

// Clip polygon against the half-plane keeping points with sign * (coord - bound) <= 0.
std::vector<Vec2> clip_axis(const std::vector<Vec2>& poly, int axis, double bound, double sign)
{
    std::vector<Vec2> out;
    if (poly.empty()) return out;
    auto coord = [axis](Vec2 v) { return axis == 0 ? v.x : v.y; };
    auto inside = [&](Vec2 v) { return sign * (coord(v) - bound) <= 0.0; };
    for (std::size_t i = 0; i < poly.size(); ++i) {
        const Vec2 cur = poly[i];
        const Vec2 prev = poly[(i + poly.size() - 1) % poly.size()];
        const bool cin = inside(cur);
        const bool pin = inside(prev);
        if (cin != pin) {
            const double t = (bound - coord(prev)) / (coord(cur) - coord(prev));
            out.push_back(prev + t * (cur - prev));
        }
        if (cin) out.push_back(cur);
    }
    return out;
}

// Antiderivative of sqrt(r^2 - x^2).
double half_chord_primitive(double x, double r)
{
    const double xc = std::clamp(x, -r, r);
    return 0.5 * (xc * std::sqrt(std::max(r * r - xc * xc, 0.0)) + r * r * std::asin(xc / r));
}

}  // namespace

double rectangle_disk_area(double x0, double x1, double y0, double y1, const Circle& disk)
{
    const double r = disk.radius;
    x0 -= disk.center.x;
    x1 -= disk.center.x;
    y0 -= disk.center.y;
    y1 -= disk.center.y;
    x0 = std::max(x0, -r);
    x1 = std::min(x1, r);
    if (x0 >= x1 || y0 >= y1) return 0.0;

    std::vector<double> breaks{x0, x1};
    for (double y : {y0, y1}) {
        if (std::abs(y) < r) {
            const double xb = std::sqrt(r * r - y * y);
            for (double c : {xb, -xb}) {
                if (c > x0 && c < x1) breaks.push_back(c);
            }
        }
    }
    std::sort(breaks.begin(), breaks.end());

    double area = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        const double a = breaks[k];
        const double b = breaks[k + 1];
        if (b <= a) continue;
        const double m = 0.5 * (a + b);
        const double s = std::sqrt(std::max(r * r - m * m, 0.0));
        const bool upper_is_chord = s < y1;
        const bool lower_is_chord = -s > y0;
        const double upper_m = upper_is_chord ? s : y1;
        const double lower_m = lower_is_chord ? -s : y0;
        if (upper_m <= lower_m) continue;
        const double chord = half_chord_primitive(b, r) - half_chord_primitive(a, r);
        const double upper = upper_is_chord ? chord : y1 * (b - a);
        const double lower = lower_is_chord ? -chord : y0 * (b - a);
        area += upper - lower;
    }
    return area;
}

double rectangle_polygon_area(double x0, double x1, double y0, double y1,
                              std::span<const Vec2> polygon)
{
    std::vector<Vec2> poly(polygon.begin(), polygon.end());
    poly = clip_axis(poly, 0, x1, 1.0);
    poly = clip_axis(poly, 0, x0, -1.0);
    poly = clip_axis(poly, 1, y1, 1.0);
    poly = clip_axis(poly, 1, y0, -1.0);
    if (poly.size() < 3) return 0.0;
    return std::abs(polygon_signed_area(poly));
}

// ---------------------------------------------------------------------------
// Domain

Domain Domain::unit_square()
{
    Domain d;
    d.kind_ = DomainKind::unit_square;
    d.name_ = "unit_square";
    d.outline_ = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    d.finalize();
    return d;
}

Domain Domain::unit_disk()
{
    Domain d;
    d.kind_ = DomainKind::unit_disk;
    d.name_ = "unit_disk";
    d.circles_ = {Circle{{0, 0}, 1.0}};
    d.finalize();
    return d;
}

Domain Domain::l_shape()
{
    Domain d;
    d.kind_ = DomainKind::l_shape;
    d.name_ = "l_shape";
    d.outline_ = {{-1, -1}, {0, -1}, {0, 0}, {1, 0}, {1, 1}, {-1, 1}};
    d.finalize();
    return d;
}

Domain Domain::slit_square()
{
    Domain d;
    d.kind_ = DomainKind::slit_square;
    d.name_ = "slit_square";
    d.outline_ = {{-1, -1}, {1, -1}, {1, 1}, {-1, 1}};
    d.finalize();
    d.segments_.push_back(Segment{{0, 0}, {1, 0}});
    d.boundary_length_ += 1.0;
    return d;
}

Domain Domain::annulus(double inner, double outer)
{
    if (!(inner > 0.0) || !(outer > inner)) {
        throw GeometryError("annulus requires 0 < inner < outer");
    }
    Domain d;
    d.kind_ = DomainKind::annulus;
    d.name_ = "annulus";
    d.circles_ = {Circle{{0, 0}, outer}, Circle{{0, 0}, inner}};
    d.finalize();
    return d;
}

Domain Domain::polygon(std::vector<Vec2> vertices)
{
    if (vertices.size() < 3) {
        throw GeometryError("polygon needs at least 3 vertices");
    }
    const double a = polygon_signed_area(vertices);
    double extent = 0.0;
    for (const auto& v : vertices) extent = std::max({extent, std::abs(v.x), std::abs(v.y)});
    if (std::abs(a) <= 1e-14 * std::max(extent * extent, 1.0)) {
        throw GeometryError("degenerate polygon (zero area)");
    }
    if (a < 0.0) std::reverse(vertices.begin(), vertices.end());
    Domain d;
    d.kind_ = DomainKind::polygon;
    d.name_ = "polygon";
    d.outline_ = std::move(vertices);
    d.finalize();
    return d;
}

Domain Domain::from_name(std::string_view name)
{
    if (name == "unit_square") return unit_square();
    if (name == "unit_disk") return unit_disk();
    if (name == "l_shape") return l_shape();
    if (name == "slit_square") return slit_square();
    if (name == "annulus") return annulus();
    throw GeometryError("unknown domain preset '" + std::string(name) + "'");
}

void Domain::finalize()
{
    segments_.clear();
    boundary_length_ = 0.0;
    Box box{{std::numeric_limits<double>::max(), std::numeric_limits<double>::max()},
            {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()}};
    for (std::size_t i = 0; i < outline_.size(); ++i) {
        const Segment s{outline_[i], outline_[(i + 1) % outline_.size()]};
        segments_.push_back(s);
        boundary_length_ += norm(s.b - s.a);
        box.lo = {std::min(box.lo.x, s.a.x), std::min(box.lo.y, s.a.y)};
        box.hi = {std::max(box.hi.x, s.a.x), std::max(box.hi.y, s.a.y)};
    }
    for (const auto& c : circles_) {
        boundary_length_ += 2.0 * std::numbers::pi * c.radius;
        box.lo = {std::min(box.lo.x, c.center.x - c.radius), std::min(box.lo.y, c.center.y - c.radius)};
        box.hi = {std::max(box.hi.x, c.center.x + c.radius), std::max(box.hi.y, c.center.y + c.radius)};
    }
    box_ = box;

    if (!outline_.empty()) {
        area_ = std::abs(polygon_signed_area(outline_));
        diameter_ = 0.0;
        for (const auto& a : outline_) {
            for (const auto& b : outline_) diameter_ = std::max(diameter_, norm(a - b));
        }
    } else {
        const double outer = circles_.front().radius;
        area_ = std::numbers::pi * outer * outer;
        for (std::size_t k = 1; k < circles_.size(); ++k) {
            area_ -= std::numbers::pi * circles_[k].radius * circles_[k].radius;
        }
        diameter_ = 2.0 * outer;
    }
    if (!(diameter_ > 0.0)) throw GeometryError("domain has zero diameter");
}

double Domain::characteristic_size() const noexcept
{
    return std::max(box_.hi.x - box_.lo.x, box_.hi.y - box_.lo.y);
}

bool Domain::inside_closure_region(Vec2 p) const
{
    if (!outline_.empty()) return point_in_polygon(p, outline_);
    const double r = norm(p - circles_.front().center);
    if (r >= circles_.front().radius) return false;
    for (std::size_t k = 1; k < circles_.size(); ++k) {
        if (norm(p - circles_[k].center) <= circles_[k].radius) return false;
    }
    return true;
}

bool Domain::contains(Vec2 p) const
{
    const double tol = 1e-12 * characteristic_size();
    return inside_closure_region(p) && distance_to_boundary(p) > tol;
}

double Domain::distance_to_boundary(Vec2 p) const
{
    double d = std::numeric_limits<double>::infinity();
    for (const auto& s : segments_) d = std::min(d, point_segment_distance(p, s));
    for (const auto& c : circles_) d = std::min(d, std::abs(norm(p - c.center) - c.radius));
    return d;
}

std::vector<double> Domain::boundary_crossings(Vec2 p, Vec2 q) const
{
    std::vector<double> ts;
    for (const auto& s : segments_) segment_crossings(p, q, s, ts);
    for (const auto& c : circles_) circle_crossings(p, q, c, ts);
    std::sort(ts.begin(), ts.end());
    return ts;
}

double Domain::cell_area(Vec2 center, double h) const
{
    const double half = 0.5 * h;
    if (contains(center) && distance_to_boundary(center) >= half * std::numbers::sqrt2 * (1.0 + 1e-12)) {
        return h * h;
    }
    const double x0 = center.x - half;
    const double x1 = center.x + half;
    const double y0 = center.y - half;
    const double y1 = center.y + half;
    if (!outline_.empty()) return rectangle_polygon_area(x0, x1, y0, y1, outline_);
    double a = rectangle_disk_area(x0, x1, y0, y1, circles_.front());
    for (std::size_t k = 1; k < circles_.size(); ++k) {
        a -= rectangle_disk_area(x0, x1, y0, y1, circles_[k]);
    }
    return std::max(a, 0.0);
}

Vec2 Domain::boundary_point(double s) const
{
    s = std::fmod(s, boundary_length_);
    if (s < 0.0) s += boundary_length_;
    for (const auto& seg : segments_) {
        const double len = norm(seg.b - seg.a);
        if (s <= len) return seg.a + (s / len) * (seg.b - seg.a);
        s -= len;
    }
    for (const auto& c : circles_) {
        const double len = 2.0 * std::numbers::pi * c.radius;
        if (s <= len) {
            const double theta = s / c.radius;
            return c.center + c.radius * Vec2{std::cos(theta), std::sin(theta)};
        }
        s -= len;
    }
    return segments_.empty() ? circles_.front().center + Vec2{circles_.front().radius, 0.0}
                             : segments_.front().a;
}

// ---------------------------------------------------------------------------
// Grid

bool Grid::regular(std::size_t interior_node) const
{
    for (const auto& arm : arms_[interior_node]) {
        if (std::abs(arm.length - h_) > arm_tolerance * h_) return false;
    }
    return true;
}

std::int32_t Grid::lattice_node(int i, int j) const
{
    if (i < 0 || j < 0 || i > nx_ || j > ny_) return -1;
    return lattice_[static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_ + 1) + static_cast<std::size_t>(i)];
}

std::int32_t Grid::nearest_interior(Vec2 p) const
{
    const int ci = static_cast<int>(std::lround((p.x - origin_.x) / h_));
    const int cj = static_cast<int>(std::lround((p.y - origin_.y) / h_));
    std::int32_t best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int radius = 0; radius <= std::max(nx_, ny_); ++radius) {
        for (int j = cj - radius; j <= cj + radius; ++j) {
            for (int i = ci - radius; i <= ci + radius; ++i) {
                if (std::max(std::abs(i - ci), std::abs(j - cj)) != radius) continue;
                const auto id = lattice_node(i, j);
                if (id < 0 || !is_interior(static_cast<std::size_t>(id))) continue;
                const double d = norm(positions_[static_cast<std::size_t>(id)] - p);
                if (d < best_d) {
                    best_d = d;
                    best = id;
                }
            }
        }
        if (best >= 0 && best_d <= radius * h_) break;
    }
    return best;
}

std::shared_ptr<const Grid> build_grid(const Domain& domain, int resolution)
{
    if (resolution < 8) throw GeometryError("grid resolution must be >= 8");

    auto grid = std::shared_ptr<Grid>(new Grid(domain));
    Grid& g = *grid;
    const Box box = domain.bounding_box();
    g.resolution_ = resolution;
    g.h_ = domain.characteristic_size() / resolution;
    g.origin_ = box.lo;
    g.nx_ = static_cast<int>(std::lround((box.hi.x - box.lo.x) / g.h_));
    g.ny_ = static_cast<int>(std::lround((box.hi.y - box.lo.y) / g.h_));
    const double h = g.h_;
    const double on_boundary_tol = 1e-10 * h;

    const auto nlat = static_cast<std::size_t>(g.nx_ + 1) * static_cast<std::size_t>(g.ny_ + 1);
    g.lattice_.assign(nlat, -1);
    auto lattice_pos = [&](int i, int j) { return Vec2{box.lo.x + i * h, box.lo.y + j * h}; };
    auto lat = [&](int i, int j) -> std::int32_t& {
        return g.lattice_[static_cast<std::size_t>(j) * static_cast<std::size_t>(g.nx_ + 1) + static_cast<std::size_t>(i)];
    };

    // Interior lattice nodes first.
    std::vector<std::array<int, 2>> boundary_lattice;
    for (int j = 0; j <= g.ny_; ++j) {
        for (int i = 0; i <= g.nx_; ++i) {
            const Vec2 p = lattice_pos(i, j);
            if (domain.contains(p)) {
                lat(i, j) = static_cast<std::int32_t>(g.positions_.size());
                g.positions_.push_back(p);
                g.delta_.push_back(domain.distance_to_boundary(p));
                g.lattice_index_.push_back({i, j});
            } else if (domain.distance_to_boundary(p) <= on_boundary_tol) {
                boundary_lattice.push_back({i, j});
            }
        }
    }
    g.num_interior_ = g.positions_.size();
    if (g.num_interior_ == 0) throw GeometryError("grid has no interior nodes");

    for (const auto& [i, j] : boundary_lattice) {
        lat(i, j) = static_cast<std::int32_t>(g.positions_.size());
        g.positions_.push_back(lattice_pos(i, j));
        g.delta_.push_back(0.0);
        g.lattice_index_.push_back({i, j});
    }

    // Arms; crossing points are deduplicated by their coordinates.
    std::map<std::pair<long long, long long>, std::int32_t> crossing_ids;
    auto crossing_node = [&](Vec2 z) {
        const auto key = std::make_pair(std::llround(z.x / (1e-9 * h)), std::llround(z.y / (1e-9 * h)));
        auto it = crossing_ids.find(key);
        if (it != crossing_ids.end()) return it->second;
        const auto id = static_cast<std::int32_t>(g.positions_.size());
        g.positions_.push_back(z);
        g.delta_.push_back(0.0);
        g.lattice_index_.push_back({-1, -1});
        crossing_ids.emplace(key, id);
        return id;
    };

    constexpr int di[4] = {1, -1, 0, 0};
    constexpr int dj[4] = {0, 0, 1, -1};
    g.arms_.resize(g.num_interior_);
    g.cell_volume_.resize(g.num_interior_);
    for (std::size_t n = 0; n < g.num_interior_; ++n) {
        const auto [i, j] = g.lattice_index_[n];
        const Vec2 p = g.positions_[n];
        g.cell_volume_[n] = domain.cell_area(p, h);
        for (int d = 0; d < 4; ++d) {
            const int ii = i + di[d];
            const int jj = j + dj[d];
            const Vec2 q = lattice_pos(ii, jj);
            double t_hit = 2.0;
            if (g.delta_[n] < h * (1.0 + 1e-9)) {
                for (double t : domain.boundary_crossings(p, q)) {
                    if (t > 1e-12) {
                        t_hit = t;
                        break;
                    }
                }
            }
            const auto qid = (ii >= 0 && jj >= 0 && ii <= g.nx_ && jj <= g.ny_) ? lat(ii, jj) : -1;
            Arm arm;
            if (t_hit <= 1.0) {
                if (t_hit >= 1.0 - 1e-9 && qid >= 0 && !g.is_interior(static_cast<std::size_t>(qid))) {
                    arm = {qid, h};
                } else {
                    arm = {crossing_node(p + t_hit * (q - p)), t_hit * h};
                }
            } else if (qid >= 0) {
                arm = {qid, h};
            } else {
                // No crossing reported although q is outside: locate the exit by bisection.
                double lo = 0.0;
                double hi = 1.0;
                for (int it = 0; it < 60; ++it) {
                    const double mid = 0.5 * (lo + hi);
                    (domain.contains(p + mid * (q - p)) ? lo : hi) = mid;
                }
                arm = {crossing_node(p + hi * (q - p)), hi * h};
            }
            g.arms_[n][static_cast<std::size_t>(d)] = arm;
        }
    }
    return grid;
}

}  // namespace elab
