#include "elab/coefficients.hpp"
#include "elab/errors.hpp"
#include "elab/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace elab;

namespace {

std::int32_t node_at(const Grid& g, Vec2 p)
{
    const int i = static_cast<int>(std::lround((p.x - g.origin().x) / g.h()));
    const int j = static_cast<int>(std::lround((p.y - g.origin().y) / g.h()));
    return g.lattice_node(i, j);
}

}  // namespace

TEST(Domain, PresetsHaveExpectedMeasures)
{
    EXPECT_DOUBLE_EQ(Domain::unit_square().area(), 1.0);
    EXPECT_NEAR(Domain::unit_square().diameter(), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(Domain::unit_disk().area(), std::numbers::pi, 1e-14);
    EXPECT_NEAR(Domain::unit_disk().diameter(), 2.0, 1e-14);
    EXPECT_NEAR(Domain::l_shape().area(), 3.0, 1e-14);
    EXPECT_NEAR(Domain::slit_square().area(), 4.0, 1e-14);
    EXPECT_NEAR(Domain::annulus().area(), std::numbers::pi * 0.75, 1e-14);
}

TEST(Domain, FromNameRoundTripsAndRejectsUnknown)
{
    for (const char* n : {"unit_square", "unit_disk", "l_shape", "slit_square", "annulus"})
        EXPECT_EQ(Domain::from_name(n).name(), n);
    EXPECT_THROW((void)Domain::from_name("torus"), GeometryError);
}

TEST(Domain, DegeneratePolygonRejected)
{
    EXPECT_THROW((void)Domain::polygon({{0, 0}, {1, 1}, {2, 2}}), GeometryError);
    EXPECT_THROW((void)Domain::polygon({{0, 0}, {1, 0}}), GeometryError);
}

TEST(Domain, SlitIsBoundary)
{
    const Domain d = Domain::slit_square();
    EXPECT_FALSE(d.contains({0.5, 0.0}));
    EXPECT_TRUE(d.contains({-0.5, 0.0}));
    EXPECT_TRUE(d.contains({0.5, 0.01}));
    EXPECT_NEAR(d.distance_to_boundary({0.5, 0.1}), 0.1, 1e-15);
    EXPECT_NEAR(d.distance_to_boundary({-0.2, 0.0}), 0.2, 1e-15);
}

TEST(Domain, LShapeExcludesRemovedQuadrant)
{
    const Domain d = Domain::l_shape();
    EXPECT_FALSE(d.contains({0.5, -0.5}));
    EXPECT_TRUE(d.contains({-0.5, -0.5}));
    EXPECT_TRUE(d.contains({0.5, 0.5}));
    EXPECT_NEAR(d.distance_to_boundary({0.1, -0.1 + 0.2}), 0.1, 1e-15);
}

TEST(Domain, BoundaryCrossingsOfSquare)
{
    const Domain d = Domain::unit_square();
    const auto t = d.boundary_crossings({0.5, 0.5}, {1.5, 0.5});
    ASSERT_EQ(t.size(), 1u);
    EXPECT_NEAR(t[0], 0.5, 1e-15);
    EXPECT_TRUE(d.boundary_crossings({0.2, 0.2}, {0.4, 0.4}).empty());
}

TEST(Domain, CellAreaClipping)
{
    const Domain sq = Domain::unit_square();
    EXPECT_NEAR(sq.cell_area({0.5, 0.5}, 0.1), 0.01, 1e-15);
    EXPECT_NEAR(sq.cell_area({0.0, 0.5}, 0.1), 0.005, 1e-15);
    EXPECT_NEAR(sq.cell_area({0.0, 0.0}, 0.1), 0.0025, 1e-15);
    // A cell covering the whole disk carries its area.
    EXPECT_NEAR(Domain::unit_disk().cell_area({0, 0}, 4.0), std::numbers::pi, 1e-12);
}

TEST(Domain, BoundaryPointWalksTheOutline)
{
    const Domain sq = Domain::unit_square();
    EXPECT_NEAR(sq.boundary_length(), 4.0, 1e-15);
    for (double s : {0.0, 0.3, 1.7, 3.99}) EXPECT_NEAR(sq.distance_to_boundary(sq.boundary_point(s)), 0.0, 1e-14);
    const Domain slit = Domain::slit_square();
    EXPECT_NEAR(slit.boundary_length(), 9.0, 1e-14);
    const Vec2 p = slit.boundary_point(8.5);
    EXPECT_NEAR(p.y, 0.0, 1e-15);
    EXPECT_GT(p.x, 0.0);
}

TEST(Grid, UnitSquareSpacingAndCentreDistance)
{
    const auto g = build_grid(Domain::unit_square(), 64);
    EXPECT_DOUBLE_EQ(g->h(), 1.0 / 64);
    EXPECT_EQ(g->num_interior(), 63u * 63u);
    EXPECT_EQ(g->num_boundary(), 4u * 64u);
    double dmax = 0.0;
    for (std::size_t i = 0; i < g->num_interior(); ++i) dmax = std::max(dmax, g->delta(i));
    EXPECT_NEAR(dmax, 0.5, 1e-14);
    for (std::size_t i = 0; i < g->num_nodes(); ++i) EXPECT_EQ(g->delta(i) > 0.0, g->is_interior(i));
}

TEST(Grid, DiskOriginHasUnitDistance)
{
    const auto g = build_grid(Domain::unit_disk(), 64);
    const auto n = node_at(*g, {0, 0});
    ASSERT_GE(n, 0);
    EXPECT_DOUBLE_EQ(g->delta(static_cast<std::size_t>(n)), 1.0);
}

TEST(Grid, SlitDistanceAboveSlit)
{
    const auto g = build_grid(Domain::slit_square(), 128);
    const double h = g->h();
    const auto n = node_at(*g, {0.5, h});
    ASSERT_GE(n, 0);
    EXPECT_NEAR(g->delta(static_cast<std::size_t>(n)), h, 1e-15);
    const auto on = node_at(*g, {0.5, 0.0});
    ASSERT_GE(on, 0);
    EXPECT_FALSE(g->is_interior(static_cast<std::size_t>(on)));
}

TEST(Grid, ResolutionTooSmallRejected)
{
    EXPECT_THROW((void)build_grid(Domain::unit_square(), 4), GeometryError);
}

TEST(Grid, DeltaIsOneLipschitz)
{
    for (const char* name : {"unit_square", "unit_disk", "l_shape", "slit_square", "annulus"}) {
        const auto g = build_grid(Domain::from_name(name), 32);
        std::mt19937 rng(7);
        std::uniform_int_distribution<std::size_t> pick(0, g->num_nodes() - 1);
        for (int k = 0; k < 2000; ++k) {
            const auto a = pick(rng);
            const auto b = pick(rng);
            EXPECT_LE(std::abs(g->delta(a) - g->delta(b)), norm(g->position(a) - g->position(b)) + 1e-13) << name;
        }
    }
}

TEST(Grid, ArmsEndOnNodesAtTheRecordedLength)
{
    for (const char* name : {"unit_disk", "l_shape", "slit_square", "annulus"}) {
        const auto g = build_grid(Domain::from_name(name), 32);
        for (std::size_t p = 0; p < g->num_interior(); ++p) {
            for (const Arm& arm : g->arms(p)) {
                ASSERT_GE(arm.node, 0);
                const double len = norm(g->position(static_cast<std::size_t>(arm.node)) - g->position(p));
                EXPECT_NEAR(len, arm.length, 1e-12) << name;
                EXPECT_GT(arm.length, 0.0);
                EXPECT_LE(arm.length, g->h() * (1 + 1e-12));
                if (arm.length < g->h() * (1 - 1e-9))
                    EXPECT_FALSE(g->is_interior(static_cast<std::size_t>(arm.node)));
            }
        }
    }
}

TEST(Grid, BoundaryNodesLieOnTheBoundary)
{
    for (const char* name : {"unit_disk", "l_shape", "slit_square", "annulus"}) {
        const auto g = build_grid(Domain::from_name(name), 32);
        for (std::size_t n = g->num_interior(); n < g->num_nodes(); ++n)
            EXPECT_LT(g->domain().distance_to_boundary(g->position(n)), 1e-9 * g->h()) << name;
    }
}

TEST(Grid, CellVolumesSumToArea)
{
    for (const char* name : {"unit_square", "unit_disk", "l_shape", "slit_square"}) {
        const auto g = build_grid(Domain::from_name(name), 64);
        double s = 0.0;
        for (double v : g->cell_volumes()) s += v;
        // Cells of boundary lattice nodes are not represented; their share is O(h).
        EXPECT_NEAR(s, g->domain().area(), 4.0 * g->domain().boundary_length() * g->h()) << name;
    }
}

TEST(Grid, NearestInteriorFindsTheClosestNode)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    const auto n = g->nearest_interior({0.013, -0.02});
    ASSERT_GE(n, 0);
    EXPECT_LT(norm(g->position(static_cast<std::size_t>(n)) - Vec2{0.013, -0.02}), g->h());
}

TEST(Coefficients, ZeroScalesGiveZeroLowerOrder)
{
    const auto g = build_grid(Domain::unit_square(), 32);
    const auto c = singular_coefficients(g, 0.5, 0.0, 0.0);
    EXPECT_FALSE(c.has_drift());
    EXPECT_FALSE(c.has_potential());
}

TEST(Coefficients, DriftMagnitudeFollowsDistancePower)
{
    const auto g = build_grid(Domain::unit_square(), 64);
    const auto c = singular_coefficients(g, 0.5, 1.0, 0.0);
    const auto n = node_at(*g, {0.25, 0.5});
    ASSERT_GE(n, 0);
    EXPECT_DOUBLE_EQ(g->delta(static_cast<std::size_t>(n)), 0.25);
    EXPECT_NEAR(norm(c.b[static_cast<std::size_t>(n)]), 2.0, 1e-14);
}

TEST(Coefficients, ProfilesMatchClosedFormEverywhere)
{
    const auto g = build_grid(Domain::l_shape(), 32);
    const double beta = 0.3;
    const auto c = singular_coefficients(g, beta, 0.7, 1.3, {3.0, 4.0});
    for (std::size_t p = 0; p < g->num_interior(); ++p) {
        const double d = std::max(g->delta(p), g->h() / 2);
        EXPECT_NEAR(norm(c.b[p]), 0.7 * std::pow(d, beta - 1), 1e-12 * norm(c.b[p]));
        EXPECT_NEAR(c.b[p].x / norm(c.b[p]), 0.6, 1e-14);
        EXPECT_NEAR(c.mu.mass(p), 1.3 * std::pow(d, beta - 2) * g->cell_volume(p), 1e-12 * c.mu.mass(p));
    }
}

TEST(Coefficients, BetaOutOfRangeRejected)
{
    const auto g = build_grid(Domain::unit_square(), 16);
    EXPECT_THROW((void)singular_coefficients(g, 0.0, 1, 1), Error);
    EXPECT_THROW((void)singular_coefficients(g, 1.0, 1, 1), Error);
    EXPECT_THROW((void)singular_coefficients(g, 0.5, -1, 1), Error);
}

TEST(Coefficients, EllipticityCheck)
{
    const auto g = build_grid(Domain::unit_square(), 16);
    auto c = laplacian_coefficients(g);
    EXPECT_TRUE(check_ellipticity(c).ok);
    c.a[5] = Mat2{0.5, 0.0, 1.0};
    const auto r = check_ellipticity(c);
    EXPECT_FALSE(r.ok);
    EXPECT_EQ(r.worst_node, 5);
    EXPECT_NEAR(r.min_eigenvalue, 0.5, 1e-15);
}

TEST(Coefficients, EigenvalueBounds)
{
    const auto [lo, hi] = eigenvalue_bounds(Mat2{2.0, 1.0, 2.0});
    EXPECT_NEAR(lo, 1.0, 1e-15);
    EXPECT_NEAR(hi, 3.0, 1e-15);
}
