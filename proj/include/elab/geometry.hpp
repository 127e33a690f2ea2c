#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace elab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2 a, Vec2 b) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::hypot(a.x, a.y); }

struct Box {
    Vec2 lo;
    Vec2 hi;
};

struct Segment {
    Vec2 a;
    Vec2 b;
};

struct Circle {
    Vec2 center;
    double radius = 0.0;
};

enum class DomainKind { unit_square, unit_disk, l_shape, slit_square, annulus, polygon };

/// Bounded open planar set with an exactly representable boundary made of
/// line segments (polygon edges, slits) and full circles.
class Domain {
public:
    static Domain unit_square();
    static Domain unit_disk();
    /// (-1,1)^2 with the closed quadrant [0,1]x[-1,0] removed.
    static Domain l_shape();
    /// (-1,1)^2 minus the closed segment [0,1]x{0}.
    static Domain slit_square();
    static Domain annulus(double inner = 0.5, double outer = 1.0);
    /// Simple polygon given by its vertex loop (either orientation).
    static Domain polygon(std::vector<Vec2> vertices);
    /// Preset by name: unit_square, unit_disk, l_shape, slit_square, annulus.
    static Domain from_name(std::string_view name);

    [[nodiscard]] DomainKind kind() const noexcept { return kind_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// Membership in the open set; points within 1e-12 * size of the boundary are excluded.
    [[nodiscard]] bool contains(Vec2 p) const;
    /// Euclidean distance from p to the boundary, valid anywhere in the plane.
    [[nodiscard]] double distance_to_boundary(Vec2 p) const;
    /// Sorted parameters t in [0,1] where p + t(q-p) meets the boundary.
    [[nodiscard]] std::vector<double> boundary_crossings(Vec2 p, Vec2 q) const;
    /// Area of the axis-aligned square of side h centred at `center`, intersected with the domain.
    [[nodiscard]] double cell_area(Vec2 center, double h) const;

    [[nodiscard]] double diameter() const noexcept { return diameter_; }
    [[nodiscard]] double area() const noexcept { return area_; }
    [[nodiscard]] const Box& bounding_box() const noexcept { return box_; }
    /// Longer side of the bounding box; grid spacing is this over the resolution.
    [[nodiscard]] double characteristic_size() const noexcept;

    [[nodiscard]] double boundary_length() const noexcept { return boundary_length_; }
    /// Point at arclength s along the boundary (outline, then slits, then circles).
    [[nodiscard]] Vec2 boundary_point(double s) const;

    [[nodiscard]] std::span<const Segment> segments() const noexcept { return segments_; }
    [[nodiscard]] std::span<const Circle> circles() const noexcept { return circles_; }
    [[nodiscard]] std::span<const Vec2> outline() const noexcept { return outline_; }

private:
    Domain() = default;
    void finalize();
    [[nodiscard]] bool inside_closure_region(Vec2 p) const;

    DomainKind kind_ = DomainKind::polygon;
    std::string name_;
    std::vector<Vec2> outline_;
    std::vector<Segment> segments_;
    std::vector<Circle> circles_;
    double diameter_ = 0.0;
    double area_ = 0.0;
    double boundary_length_ = 0.0;
    Box box_;
};

/// Area of the rectangle [x0,x1]x[y0,y1] intersected with a disk (closed form).
double rectangle_disk_area(double x0, double x1, double y0, double y1, const Circle& disk);
/// Area of a simple polygon clipped to an axis-aligned rectangle.
double rectangle_polygon_area(double x0, double x1, double y0, double y1,
                              std::span<const Vec2> polygon);

enum class Direction : int { east = 0, west = 1, north = 2, south = 3 };

/// Neighbour of an interior node along one axis direction. `length` equals h
/// for a regular arm and is shorter when the boundary is crossed first.
struct Arm {
    std::int32_t node = -1;
    double length = 0.0;
};

/// Uniform lattice over a domain. Interior nodes (lattice points inside the
/// open set) carry ids [0, num_interior); boundary nodes follow: lattice
/// points on the boundary, then exact arm/boundary crossing points.
class Grid {
public:
    [[nodiscard]] const Domain& domain() const noexcept { return domain_; }
    [[nodiscard]] int dimension() const noexcept { return 2; }
    [[nodiscard]] int resolution() const noexcept { return resolution_; }
    [[nodiscard]] double h() const noexcept { return h_; }
    [[nodiscard]] Vec2 origin() const noexcept { return origin_; }
    /// Number of lattice intervals along x (indices run 0..nx).
    [[nodiscard]] int lattice_nx() const noexcept { return nx_; }
    [[nodiscard]] int lattice_ny() const noexcept { return ny_; }

    [[nodiscard]] std::size_t num_nodes() const noexcept { return positions_.size(); }
    [[nodiscard]] std::size_t num_interior() const noexcept { return num_interior_; }
    [[nodiscard]] std::size_t num_boundary() const noexcept { return num_nodes() - num_interior_; }
    [[nodiscard]] bool is_interior(std::size_t node) const noexcept { return node < num_interior_; }

    [[nodiscard]] Vec2 position(std::size_t node) const { return positions_[node]; }
    [[nodiscard]] double delta(std::size_t node) const { return delta_[node]; }
    [[nodiscard]] double cell_volume(std::size_t interior_node) const { return cell_volume_[interior_node]; }
    [[nodiscard]] const std::array<Arm, 4>& arms(std::size_t interior_node) const { return arms_[interior_node]; }
    /// All four arms have length h.
    [[nodiscard]] bool regular(std::size_t interior_node) const;

    [[nodiscard]] std::span<const Vec2> positions() const noexcept { return positions_; }
    [[nodiscard]] std::span<const double> deltas() const noexcept { return delta_; }
    [[nodiscard]] std::span<const double> cell_volumes() const noexcept { return cell_volume_; }

    /// Node id of lattice point (i, j), or -1 when it is outside the closure.
    [[nodiscard]] std::int32_t lattice_node(int i, int j) const;
    /// Lattice coordinates of a node; {-1, -1} for off-lattice crossing points.
    [[nodiscard]] std::array<int, 2> lattice_index(std::size_t node) const { return lattice_index_[node]; }
    /// Interior node nearest to p (by lattice rounding, then local search).
    [[nodiscard]] std::int32_t nearest_interior(Vec2 p) const;

    /// Relative slack under which an arm counts as regular.
    static constexpr double arm_tolerance = 1e-9;

private:
    friend std::shared_ptr<const Grid> build_grid(const Domain& domain, int resolution);
    explicit Grid(Domain domain) : domain_(std::move(domain)) {}

    Domain domain_;
    int resolution_ = 0;
    double h_ = 0.0;
    Vec2 origin_;
    int nx_ = 0;
    int ny_ = 0;
    std::size_t num_interior_ = 0;
    std::vector<Vec2> positions_;
    std::vector<double> delta_;
    std::vector<double> cell_volume_;
    std::vector<std::array<Arm, 4>> arms_;
    std::vector<std::int32_t> lattice_;
    std::vector<std::array<int, 2>> lattice_index_;
};

/// Builds the lattice with h = characteristic_size / resolution; distances are
/// computed against the exact boundary. Requires resolution >= 8.
std::shared_ptr<const Grid> build_grid(const Domain& domain, int resolution);

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace elab
