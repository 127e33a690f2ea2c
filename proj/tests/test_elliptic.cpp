#include "elab/elliptic.hpp"
#include "elab/errors.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace elab;

namespace {

double disk_poisson(Vec2 p) { return 0.25 * (1.0 - dot(p, p)); }

double im_sqrt(Vec2 p)
{
    double t = std::atan2(p.y, p.x);
    if (t <= 0.0) t += 2.0 * std::numbers::pi;
    return std::sqrt(norm(p)) * std::sin(0.5 * t);
}

double disk_error(int res)
{
    const auto g = build_grid(Domain::unit_disk(), res);
    const auto u = green_apply(laplacian_coefficients(g), DiscreteMeasure::lebesgue(g));
    double e = 0.0;
    for (std::size_t i = 0; i < g->num_nodes(); ++i) e = std::max(e, std::abs(u[i] - disk_poisson(g->position(i))));
    return e;
}

std::size_t centre(const Grid& g, Vec2 p) { return static_cast<std::size_t>(g.nearest_interior(p)); }

}  // namespace

TEST(Assemble, LaplacianRowIsFivePoint)
{
    const auto g = build_grid(Domain::unit_square(), 64);
    const auto op = assemble(laplacian_coefficients(g));
    const auto p = centre(*g, {0.5, 0.5});
    const double h2 = g->h() * g->h();
    EXPECT_NEAR(op.interior.coeff(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)) * h2, 4.0, 1e-12);
    double off = 0.0;
    int count = 0;
    for (const Arm& a : g->arms(p)) {
        off += op.interior.coeff(static_cast<Eigen::Index>(p), a.node) * h2;
        ++count;
    }
    EXPECT_EQ(count, 4);
    EXPECT_NEAR(off, -4.0, 1e-12);
    EXPECT_EQ(op.stencil, Stencil::five_point);
    EXPECT_TRUE(op.symmetric());
}

TEST(Assemble, ConstantsHaveZeroResidual)
{
    for (const char* name : {"unit_square", "unit_disk", "slit_square"}) {
        const auto g = build_grid(Domain::from_name(name), 32);
        const auto op = assemble(laplacian_coefficients(g));
        const DiscreteField one = DiscreteField::from_function(g, [](Vec2) { return 1.0; });
        EXPECT_LT(op.apply(one).lpNorm<Eigen::Infinity>(), 1e-9) << name;
    }
}

TEST(Assemble, PotentialRowCarriesCellVolume)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    auto c = laplacian_coefficients(g);
    c.mu = DiscreteMeasure::lebesgue(g);
    const auto op = assemble(c);
    const DiscreteField one = DiscreteField::from_function(g, [](Vec2) { return 1.0; });
    const auto r = op.as_measure(one);
    for (std::size_t i = 0; i < r.size(); ++i) EXPECT_NEAR(r.mass(i), g->cell_volume(i), 1e-12);
}

TEST(Assemble, ShortleyWellerIsExactForQuadratics)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    const auto op = assemble(laplacian_coefficients(g));
    const DiscreteField u = DiscreteField::from_function(g, [](Vec2 p) { return p.x * p.x + 3.0 * p.y * p.y - p.x; });
    const auto ku = op.apply(u);
    for (Eigen::Index i = 0; i < ku.size(); ++i) EXPECT_NEAR(ku[i], -8.0, 1e-7);
}

TEST(Assemble, AnisotropicCrossTermIsExactForBilinear)
{
    const auto g = build_grid(Domain::unit_square(), 32);
    auto c = laplacian_coefficients(g);
    for (auto& a : c.a) a = Mat2{2.0, 0.5, 1.5};
    c.ellipticity_bound = 3.0;
    const auto op = assemble(c);
    EXPECT_EQ(op.stencil, Stencil::nine_point);
    const DiscreteField u = DiscreteField::from_function(g, [](Vec2 p) { return p.x * p.y + p.x * p.x; });
    const auto ku = op.apply(u);
    // -div(A∇u) = -(2 a_xx + 2 a_xy) = -5.
    for (Eigen::Index i = 0; i < ku.size(); ++i) EXPECT_NEAR(ku[i], -5.0, 1e-8);
}

TEST(Assemble, NonEllipticMatrixRejected)
{
    const auto g = build_grid(Domain::unit_square(), 16);
    auto c = laplacian_coefficients(g);
    c.a[0] = Mat2{0.5, 0.0, 1.0};
    EXPECT_THROW((void)assemble(c), Error);
}

TEST(Assemble, UpwindDriftKeepsMMatrixSigns)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    const auto c = singular_coefficients(g, 0.5, 5.0, 1.0, {1.0, -2.0});
    const auto op = assemble(c);
    for (Eigen::Index k = 0; k < op.interior.outerSize(); ++k) {
        for (SparseMatrix::InnerIterator it(op.interior, k); it; ++it) {
            if (it.row() == it.col())
                EXPECT_GT(it.value(), 0.0);
            else
                EXPECT_LE(it.value(), 0.0);
        }
    }
    EXPECT_FALSE(op.symmetric());
}

TEST(Assemble, NegativePotentialNeedsExplicitPermission)
{
    const auto g = build_grid(Domain::unit_square(), 16);
    auto c = laplacian_coefficients(g);
    c.mu = DiscreteMeasure::lebesgue(g).scaled(-1.0);
    EXPECT_THROW((void)assemble(c), MeasureError);
    c.allow_signed_mu = true;
    EXPECT_NO_THROW((void)assemble(c));
}

TEST(Green, DiskPoissonConvergesAtSecondOrder)
{
    const double e64 = disk_error(64);
    const double e128 = disk_error(128);
    const double e256 = disk_error(256);
    EXPECT_LT(e64, 1e-3);
    EXPECT_GE(std::log2(e64 / e128), 1.8);
    EXPECT_GE(std::log2(e128 / e256), 1.8);
}

TEST(Green, DiskPoissonPeakAndPositivity)
{
    const auto g = build_grid(Domain::unit_disk(), 64);
    const auto u = green_apply(laplacian_coefficients(g), DiscreteMeasure::lebesgue(g));
    EXPECT_NEAR(u[centre(*g, {0, 0})], 0.25, 1e-4);
    EXPECT_GE(u.min(), -1e-10);
}

TEST(Green, ZeroDataGivesZero)
{
    const auto g = build_grid(Domain::l_shape(), 32);
    const auto u = green_apply(laplacian_coefficients(g), DiscreteMeasure(g));
    EXPECT_EQ(u.max_abs(), 0.0);
}

TEST(Green, LinearInTheData)
{
    const auto g = build_grid(Domain::l_shape(), 32);
    const GreenOperator G(laplacian_coefficients(g));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> d(-1, 1);
    std::vector<double> a(g->num_interior()), b(g->num_interior());
    for (auto& x : a) x = d(rng);
    for (auto& x : b) x = d(rng);
    const DiscreteMeasure n1(g, a), n2(g, b);
    auto lhs = G.apply(measure_axpy(3.0, n1, n2));
    auto rhs = G.apply(n1);
    rhs *= 3.0;
    rhs += G.apply(n2);
    EXPECT_LT(sup_distance(lhs, rhs), 1e-10 * lhs.max_abs());
}

TEST(Green, MaximumPrincipleForRandomNonnegativeData)
{
    const auto g = build_grid(Domain::slit_square(), 32);
    const GreenOperator G(laplacian_coefficients(g));
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> d(0, 1);
    for (int k = 0; k < 5; ++k) {
        std::vector<double> a(g->num_interior());
        for (auto& x : a) x = d(rng) < 0.1 ? d(rng) : 0.0;
        EXPECT_GE(G.apply(DiscreteMeasure(g, a)).min(), -1e-10);
    }
}

TEST(Green, ResidualMeasureVanishes)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    const auto c = laplacian_coefficients(g);
    const auto nu = DiscreteMeasure::lebesgue(g);
    const auto u = green_apply(c, nu);
    EXPECT_LT(assemble(c).residual_measure(u, nu).total_variation(), 1e-12);
}

TEST(Harmonic, LinearTraceIsReproduced)
{
    const auto g = build_grid(Domain::unit_disk(), 64);
    const auto w = harmonic_extension(laplacian_coefficients(g), trace_from_function(*g, [](Vec2 p) { return p.x; }));
    for (std::size_t i = 0; i < g->num_nodes(); ++i) EXPECT_NEAR(w[i], g->position(i).x, 1e-12);
    EXPECT_NEAR(w.max() - w.min(), 2.0, 1e-12);
}

TEST(Harmonic, ConstantTraceIsReproduced)
{
    const auto g = build_grid(Domain::l_shape(), 32);
    const auto w = harmonic_extension(laplacian_coefficients(g), BoundaryTrace(g->num_boundary(), 1.75));
    for (double v : w.values()) EXPECT_NEAR(v, 1.75, 1e-12);
}

TEST(Harmonic, OscillationNeverExceedsTraceOscillation)
{
    const auto g = build_grid(Domain::annulus(), 32);
    const GreenOperator G(laplacian_coefficients(g));
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> d(-2, 3);
    for (int k = 0; k < 5; ++k) {
        BoundaryTrace t(g->num_boundary());
        for (auto& x : t) x = d(rng);
        const auto w = G.harmonic_extension(t);
        const auto [lo, hi] = std::minmax_element(t.begin(), t.end());
        EXPECT_GE(w.min(), *lo);
        EXPECT_LE(w.max(), *hi);
    }
}

TEST(Harmonic, SlitSquareConvergesToImSqrt)
{
    auto err = [](int res) {
        const auto g = build_grid(Domain::slit_square(), res);
        const auto w = harmonic_extension(laplacian_coefficients(g), trace_from_function(*g, im_sqrt));
        double e = 0.0;
        for (std::size_t i = 0; i < g->num_nodes(); ++i) e = std::max(e, std::abs(w[i] - im_sqrt(g->position(i))));
        return e;
    };
    const double a = err(32);
    const double b = err(64);
    const double c = err(128);
    EXPECT_LT(b, a);
    EXPECT_LT(c, b);
    EXPECT_LT(c, 0.05);
}

TEST(Gradient, LinearAndConstantAreExact)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    const auto gx = gradient(DiscreteField::from_function(g, [](Vec2 p) { return p.x; }));
    const auto gc = gradient(DiscreteField::from_function(g, [](Vec2) { return 4.0; }));
    for (std::size_t i = 0; i < gx.size(); ++i) {
        EXPECT_NEAR(gx[i].x, 1.0, 1e-12);
        EXPECT_NEAR(gx[i].y, 0.0, 1e-12);
        EXPECT_EQ(gc[i].x, 0.0);
        EXPECT_EQ(gc[i].y, 0.0);
    }
}

TEST(Gradient, DiskPoissonGradientSecondOrder)
{
    auto err = [](int res) {
        const auto g = build_grid(Domain::unit_disk(), res);
        const auto u = DiscreteField::from_function(g, disk_poisson);
        const auto du = gradient(u);
        double e = 0.0;
        for (std::size_t i = 0; i < du.size(); ++i) e = std::max(e, norm(du[i] + 0.5 * g->position(i)));
        return e;
    };
    // Three-point differences are exact for quadratics.
    EXPECT_LT(err(32), 1e-12);
    EXPECT_LT(err(64), 1e-12);
}

TEST(Caccioppoli, ZeroFieldHasZeroEnergy)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    const auto r = caccioppoli_check(DiscreteField(g), DiscreteMeasure(g), centre(*g, {0, 0}), 0.1, 0.5);
    EXPECT_EQ(r.lhs, 0.0);
    EXPECT_LE(r.lhs, r.rhs);
}

TEST(Caccioppoli, DiskEnergyMatchesQuadrature)
{
    const auto g = build_grid(Domain::unit_disk(), 128);
    const auto nu = DiscreteMeasure::lebesgue(g);
    const auto u = green_apply(laplacian_coefficients(g), nu);
    const auto c = centre(*g, {0, 0});
    double prev_ratio = -1.0;
    for (double r : {0.05, 0.1, 0.2}) {
        const auto res = caccioppoli_check(u, nu, c, r, 0.5);
        // ∫_{B_r} |x/2|^2 = π r^4 / 8
        EXPECT_NEAR(res.lhs, std::numbers::pi * std::pow(r, 4) / 8.0, std::numbers::pi * std::pow(r, 3) * g->h());
        EXPECT_GT(res.bracket, 0.0);
        EXPECT_GT(res.lhs / res.bracket, prev_ratio);
        prev_ratio = res.lhs / res.bracket;
    }
}

TEST(Caccioppoli, QuadraticInTheField)
{
    const auto g = build_grid(Domain::unit_disk(), 64);
    const auto nu = DiscreteMeasure::lebesgue(g);
    auto u = green_apply(laplacian_coefficients(g), nu);
    const auto c = centre(*g, {0.1, 0});
    const double a = caccioppoli_check(u, nu, c, 0.15, 0.5).lhs;
    u *= 2.0;
    EXPECT_NEAR(caccioppoli_check(u, nu, c, 0.15, 0.5).lhs, 4.0 * a, 1e-12 * a);
}

TEST(Caccioppoli, BallMustBeCompactlyInside)
{
    const auto g = build_grid(Domain::unit_disk(), 32);
    EXPECT_THROW((void)caccioppoli_check(DiscreteField(g), DiscreteMeasure(g), centre(*g, {0, 0}), 0.3, 0.5),
                 GeometryError);
}

TEST(Solver, ReportsSingularSystem)
{
    SparseMatrix m(2, 2);
    m.insert(0, 0) = 1.0;
    m.insert(0, 1) = 1.0;
    m.insert(1, 0) = 1.0;
    m.insert(1, 1) = 1.0;
    const LinearSolver s(m);
    EXPECT_GT(s.condition_estimate(), 1e12);
    EXPECT_THROW((void)s.solve(Eigen::VectorXd::Ones(2)), SolverError);
}

TEST(Solver, IterativePathAgreesWithDirect)
{
    const auto g = build_grid(Domain::unit_disk(), 64);
    const auto c = singular_coefficients(g, 0.5, 0.3, 0.2);
    const auto op = assemble(c);
    SolverOptions it;
    it.direct_limit = 10;
    const LinearSolver direct(op.interior);
    const LinearSolver iterative(op.interior, it);
    EXPECT_FALSE(iterative.direct());
    const Eigen::VectorXd b = Eigen::VectorXd::Ones(op.interior.rows());
    EXPECT_LT((direct.solve(b) - iterative.solve(b)).lpNorm<Eigen::Infinity>(), 1e-8);
}

TEST(FieldCsv, WritesOneRowPerNode)
{
    const auto g = build_grid(Domain::unit_square(), 8);
    std::stringstream s;
    write_field_csv(s, DiscreteField(g));
    int lines = 0;
    for (std::string l; std::getline(s, l);) ++lines;
    EXPECT_EQ(static_cast<std::size_t>(lines), g->num_nodes() + 1);
}
