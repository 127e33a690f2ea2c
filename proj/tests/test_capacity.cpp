#include "elab/capacity.hpp"
#include "elab/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace elab;

namespace {

const double annulus_capacity = 2.0 * std::numbers::pi / std::log(2.0);

CapacityOptions at(int res)
{
    CapacityOptions o;
    o.resolution = res;
    return o;
}

}  // namespace

TEST(Capacity, ConcentricDisksMatchLogarithmicFormula)
{
    double prev = 1.0;
    for (int res : {64, 128, 256}) {
        const auto c = capacity(ball_condenser({0.0, 0.0}, 1.0, 2.0), at(res));
        const double err = std::abs(c.value - annulus_capacity) / annulus_capacity;
        EXPECT_LT(err, prev);
        prev = err;
    }
    EXPECT_LT(prev, 0.02);
}

TEST(Capacity, ScaleAndTranslationInvariantInThePlane)
{
    const double a = capacity(ball_condenser({0.0, 0.0}, 1.0, 2.0), at(64)).value;
    const double b = capacity(ball_condenser({0.3, -0.7}, 0.05, 0.1), at(64)).value;
    EXPECT_NEAR(a, b, 1e-9 * a);
}

TEST(Capacity, PotentialIsBetweenZeroAndOne)
{
    const auto c = capacity(ball_condenser({0, 0}, 0.5, 1.0), at(64));
    for (double v : c.potential.values) {
        EXPECT_GE(v, -1e-12);
        EXPECT_LE(v, 1.0 + 1e-12);
    }
    EXPECT_DOUBLE_EQ(c.potential.at(32, 32), 1.0);
    EXPECT_DOUBLE_EQ(c.potential.at(0, 32), 0.0);
}

TEST(Capacity, MonotoneInTheCompactSet)
{
    const double small = capacity(ball_condenser({0, 0}, 1.0, 2.0), at(64)).value;
    const double large = capacity(ball_condenser({0, 0}, 1.9, 2.0), at(64)).value;
    EXPECT_GT(large, small);
}

TEST(Capacity, AntitoneInTheOpenSet)
{
    // Same lattice spacing: 64 cells over radius 2, 96 over radius 3.
    const double tight = capacity(ball_condenser({0, 0}, 1.0, 2.0), at(64)).value;
    const double loose = capacity(ball_condenser({0, 0}, 1.0, 3.0), at(96)).value;
    EXPECT_LT(loose, tight);
    EXPECT_NEAR(loose, 2.0 * std::numbers::pi / std::log(3.0), 0.01 * loose);
}

TEST(Capacity, SinglePointIsBoundedByTheInnerRadiusFormula)
{
    double prev = 1e300;
    for (int res : {32, 64, 128}) {
        const double R = 1.0;
        const double h = 2.0 * R / res;
        const double c = capacity(ball_condenser({0, 0}, 0.0, R), at(res)).value;
        EXPECT_GT(c, 0.0);
        EXPECT_LT(c, prev);
        EXPECT_LE(c, 2.0 * std::numbers::pi / std::log(R / h) * 1.5);
        prev = c;
    }
}

TEST(Capacity, PotentialMinimisesTheEnergy)
{
    const Condenser k = ball_condenser({0, 0}, 0.4, 1.0);
    const CondenserProblem problem(k, at(32));
    const auto sol = problem.solve();
    std::vector<double> free;
    for (int j = 0; j < sol.potential.side; ++j)
        for (int i = 0; i < sol.potential.side; ++i) {
            const Vec2 z = sol.potential.position(i, j);
            if (norm(z) < 1.0 * (1 - 1e-12) && !k.in_compact(z)) free.push_back(sol.potential.at(i, j));
        }
    ASSERT_EQ(free.size(), problem.unknowns());
    EXPECT_NEAR(problem.energy(free), sol.value, 1e-12 * sol.value);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> d(0.0, 1e-3);
    for (int t = 0; t < 10; ++t) {
        auto p = free;
        for (auto& v : p) v += d(rng);
        EXPECT_GE(problem.energy(p), sol.value);
    }
}

TEST(Capacity, EmptyCompactGivesZero)
{
    const Domain sq = Domain::unit_square();
    // The ball around the centre of the square contains no complement.
    const auto c = capacity(complement_condenser(sq, {0.5, 0.5}, 0.1, 0.2), at(32));
    EXPECT_EQ(c.value, 0.0);
    EXPECT_EQ(c.compact_contacts, 0u);
}

TEST(Capacity, CompactTouchingTheOuterSphereRejected)
{
    EXPECT_THROW((void)ball_condenser({0, 0}, 1.0, 1.0), GeometryError);
    EXPECT_THROW((void)capacity(ball_condenser({0, 0}, 0.5, 1.0), at(7)), GeometryError);
}

TEST(Cdc, SquareEdgeMidpointIsScaleUniform)
{
    const auto g = build_grid(Domain::unit_square(), 128);
    std::vector<double> r;
    for (double R : {0.05, 0.1, 0.2}) {
        const auto c = cdc_ratio(*g, {0.5, 0.0}, R);
        EXPECT_FALSE(c.warning);
        EXPECT_GT(c.ratio, 0.0);
        EXPECT_LE(c.ratio, 1.0);
        r.push_back(c.ratio);
    }
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    EXPECT_LE(*hi / *lo, 1.1);
}

TEST(Cdc, CornerExceedsEdge)
{
    const auto g = build_grid(Domain::unit_square(), 64);
    EXPECT_GT(cdc_ratio(*g, {0.0, 0.0}, 0.1).ratio, cdc_ratio(*g, {0.5, 0.0}, 0.1).ratio);
}

TEST(Cdc, DiskBoundaryPointHasPositiveRatio)
{
    const auto g = build_grid(Domain::unit_disk(), 64);
    const auto c = cdc_ratio(*g, {1.0, 0.0}, 0.1);
    EXPECT_GT(c.ratio, 0.3);
    EXPECT_LE(c.ratio, 1.0);
}

TEST(Cdc, RejectsInteriorPointsAndUnresolvedRadii)
{
    const auto g = build_grid(Domain::unit_square(), 64);
    EXPECT_THROW((void)cdc_ratio(*g, {0.5, 0.5}, 0.1), GeometryError);
    EXPECT_THROW((void)cdc_ratio(*g, {0.5, 0.0}, g->h()), GeometryError);
}

TEST(Cdc, SweepsArePositiveAndOrdered)
{
    const std::vector<double> radii{0.05, 0.1, 0.2};
    const auto sq = cdc_sweep(*build_grid(Domain::unit_square(), 128), 16, radii, at(64));
    const auto l = cdc_sweep(*build_grid(Domain::l_shape(), 128), 16, radii, at(64));
    const auto slit = cdc_sweep(*build_grid(Domain::slit_square(), 128), 16, radii, at(64));
    EXPECT_GT(sq.gamma_hat, 0.1);
    EXPECT_GT(l.gamma_hat, 0.0);
    EXPECT_LE(l.gamma_hat, sq.gamma_hat);
    EXPECT_GT(slit.gamma_hat, 0.0);
    EXPECT_EQ(sq.points.size(), 16u);
    EXPECT_DOUBLE_EQ(sq.certified_min_radius, 0.05);
    EXPECT_DOUBLE_EQ(sq.certified_max_radius, 0.2);
    bool on_slit = false;
    for (const auto& p : slit.points) on_slit = on_slit || (std::abs(p.xi.y) < 1e-12 && p.xi.x > 0.0 && p.xi.x < 1.0);
    EXPECT_TRUE(on_slit);
    for (const auto* s : {&sq, &l, &slit})
        for (const auto& p : s->points)
            for (double r : p.ratios) {
                EXPECT_GE(r, 0.0);
                EXPECT_LE(r, 1.0 + 1e-9);
            }
}

TEST(Cdc, SweepNeedsFourPoints)
{
    const auto g = build_grid(Domain::unit_square(), 64);
    EXPECT_THROW((void)cdc_sweep(*g, 3, {0.1}), GeometryError);
}
