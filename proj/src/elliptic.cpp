#include "elab/elliptic.hpp"

#include "elab/errors.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <random>

namespace elab {

namespace {

using Triplet = Eigen::Triplet<double>;

struct RowBuilder {
    std::size_t n_int;
    std::vector<Triplet>& inner;
    std::vector<Triplet>& outer;

    void add(std::size_t row, std::int32_t node, double v) const
    {
        if (v == 0.0) return;
        const auto col = static_cast<std::size_t>(node);
        if (col < n_int)
            inner.emplace_back(static_cast<int>(row), static_cast<int>(col), v);
        else
            outer.emplace_back(static_cast<int>(row), static_cast<int>(col - n_int), v);
    }
};

constexpr int east = static_cast<int>(Direction::east);
constexpr int west = static_cast<int>(Direction::west);
constexpr int north = static_cast<int>(Direction::north);
constexpr int south = static_cast<int>(Direction::south);

OperatorMatrix build(const CoefficientSet& coeffs, bool principal, bool lower)
{
    const Grid& g = *coeffs.grid;
    const std::size_t n = g.num_interior();
    const double h = g.h();

    if (principal) {
        const auto report = check_ellipticity(coeffs);
        if (!report.ok)
            throw Error("coefficient matrix is not uniformly elliptic at node " + std::to_string(report.worst_node));
    }
    if (lower && !coeffs.allow_signed_mu && !coeffs.mu.is_nonnegative())
        throw MeasureError("potential μ must be nonnegative");

    std::vector<Triplet> inner;
    std::vector<Triplet> outer;
    inner.reserve(n * 5);
    RowBuilder rows{n, inner, outer};
    bool cross = false;

    for (std::size_t p = 0; p < n; ++p) {
        const auto& arms = g.arms(p);
        double diag = 0.0;
        if (principal) {
            auto face = [&](int dir, double Mat2::*entry) {
                const Arm& arm = arms[static_cast<std::size_t>(dir)];
                const double here = coeffs.a[p].*entry;
                const auto q = static_cast<std::size_t>(arm.node);
                return q < n ? 0.5 * (here + coeffs.a[q].*entry) : here;
            };
            auto axis = [&](int plus, int minus, double Mat2::*entry) {
                const double hp = arms[static_cast<std::size_t>(plus)].length;
                const double hm = arms[static_cast<std::size_t>(minus)].length;
                const double cp = 2.0 * face(plus, entry) / (hp * (hp + hm));
                const double cm = 2.0 * face(minus, entry) / (hm * (hp + hm));
                diag += cp + cm;
                rows.add(p, arms[static_cast<std::size_t>(plus)].node, -cp);
                rows.add(p, arms[static_cast<std::size_t>(minus)].node, -cm);
            };
            axis(east, west, &Mat2::xx);
            axis(north, south, &Mat2::yy);

            auto off = [&](int dir) { return face(dir, &Mat2::xy) * 2.0 - coeffs.a[p].xy; };
            const bool any_cross = coeffs.a[p].xy != 0.0 ||
                                   std::any_of(arms.begin(), arms.end(), [&](const Arm& a) {
                                       const auto q = static_cast<std::size_t>(a.node);
                                       return q < n && coeffs.a[q].xy != 0.0;
                                   });
            if (any_cross) {
                if (!g.regular(p))
                    throw GeometryError("anisotropic coefficients need a lattice-aligned stencil near the boundary");
                const auto [i, j] = g.lattice_index(p);
                const std::int32_t ne = g.lattice_node(i + 1, j + 1);
                const std::int32_t se = g.lattice_node(i + 1, j - 1);
                const std::int32_t nw = g.lattice_node(i - 1, j + 1);
                const std::int32_t sw = g.lattice_node(i - 1, j - 1);
                if (ne < 0 || se < 0 || nw < 0 || sw < 0)
                    throw GeometryError("anisotropic stencil reaches outside the domain");
                // off(dir) recovers the neighbour value (or the centre value when the neighbour is a boundary node).
                const double aE = off(east);
                const double aW = off(west);
                const double aN = off(north);
                const double aS = off(south);
                const double s = 1.0 / (4.0 * h * h);
                rows.add(p, ne, -(aE + aN) * s);
                rows.add(p, se, (aE + aS) * s);
                rows.add(p, nw, (aW + aN) * s);
                rows.add(p, sw, -(aW + aS) * s);
                cross = true;
            }
        }
        if (lower) {
            const Vec2 b = coeffs.b.empty() ? Vec2{} : coeffs.b[p];
            auto upwind = [&](double component, int plus, int minus) {
                if (component > 0.0) {
                    const Arm& arm = arms[static_cast<std::size_t>(minus)];
                    diag += component / arm.length;
                    rows.add(p, arm.node, -component / arm.length);
                } else if (component < 0.0) {
                    const Arm& arm = arms[static_cast<std::size_t>(plus)];
                    diag -= component / arm.length;
                    rows.add(p, arm.node, component / arm.length);
                }
            };
            upwind(b.x, east, west);
            upwind(b.y, north, south);
            diag += coeffs.mu.mass(p) / (h * h);
        }
        rows.add(p, static_cast<std::int32_t>(p), diag);
    }

    OperatorMatrix op;
    op.grid = coeffs.grid;
    op.interior.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    op.interior.setFromTriplets(inner.begin(), inner.end());
    op.interior.makeCompressed();
    op.boundary.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(g.num_boundary()));
    op.boundary.setFromTriplets(outer.begin(), outer.end());
    op.boundary.makeCompressed();
    op.stencil = cross ? Stencil::nine_point : Stencil::five_point;
    op.lower_order = lower;
    return op;
}

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> s)
{
    return {s.data(), static_cast<Eigen::Index>(s.size())};
}

double inf_norm(const SparseMatrix& m)
{
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(m.rows());
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) rows[it.row()] += std::abs(it.value());
    return rows.size() ? rows.maxCoeff() : 0.0;
}

}  // namespace

Eigen::VectorXd OperatorMatrix::apply(const DiscreteField& u) const
{
    if (u.grid_ptr() != grid) throw Error("field grid mismatch");
    const std::size_t n = grid->num_interior();
    auto vals = u.values();
    return interior * as_vector(vals.first(n)) + boundary * as_vector(vals.subspan(n));
}

DiscreteMeasure OperatorMatrix::as_measure(const DiscreteField& u) const
{
    const Eigen::VectorXd ku = apply(u);
    const double h2 = grid->h() * grid->h();
    std::vector<double> masses(static_cast<std::size_t>(ku.size()));
    for (Eigen::Index i = 0; i < ku.size(); ++i) masses[static_cast<std::size_t>(i)] = h2 * ku[i];
    return {grid, std::move(masses)};
}

DiscreteMeasure OperatorMatrix::residual_measure(const DiscreteField& u, const DiscreteMeasure& nu) const
{
    return measure_axpy(-1.0, nu, as_measure(u));
}

bool OperatorMatrix::symmetric(double tolerance) const
{
    const SparseMatrix t = interior.transpose();
    return (interior - t).norm() <= tolerance * interior.norm();
}

OperatorMatrix assemble(const CoefficientSet& coeffs, bool include_lower_order)
{
    return build(coeffs, true, include_lower_order);
}

OperatorMatrix assemble_lower_order(const CoefficientSet& coeffs)
{
    return build(coeffs, false, true);
}

struct LinearSolver::Impl {
    Eigen::SimplicialLDLT<SparseMatrix> ldlt;
    Eigen::SparseLU<SparseMatrix> lu;
    Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper, Eigen::IncompleteCholesky<double>> cg;
    Eigen::BiCGSTAB<SparseMatrix, Eigen::IncompleteLUT<double>> bicg;
    // The iterative solvers record iteration counts on solve.
    std::mutex iterative_mutex;
};

LinearSolver::LinearSolver(SparseMatrix matrix, SolverOptions options)
    : matrix_(std::move(matrix)), options_(options), impl_(std::make_unique<Impl>())
{
    matrix_.makeCompressed();
    const SparseMatrix t = matrix_.transpose();
    symmetric_ = (matrix_ - t).norm() <= 1e-12 * matrix_.norm();
    direct_ = static_cast<std::size_t>(matrix_.rows()) <= options_.direct_limit;
    if (matrix_.rows() == 0) {
        ok_ = true;
        return;
    }
    if (direct_ && symmetric_) {
        impl_->ldlt.compute(matrix_);
        ok_ = impl_->ldlt.info() == Eigen::Success;
    } else if (direct_) {
        impl_->lu.analyzePattern(matrix_);
        impl_->lu.factorize(matrix_);
        ok_ = impl_->lu.info() == Eigen::Success;
    } else if (symmetric_) {
        impl_->cg.setTolerance(options_.iterative_tolerance);
        impl_->cg.setMaxIterations(options_.max_iterations);
        impl_->cg.compute(matrix_);
        ok_ = impl_->cg.info() == Eigen::Success;
    } else {
        impl_->bicg.setTolerance(options_.iterative_tolerance);
        impl_->bicg.setMaxIterations(options_.max_iterations);
        impl_->bicg.compute(matrix_);
        ok_ = impl_->bicg.info() == Eigen::Success;
    }
}

LinearSolver::~LinearSolver() = default;

namespace {

template <class S>
Eigen::VectorXd run(const S& solver, const Eigen::VectorXd& rhs, bool& ok)
{
    Eigen::VectorXd x = solver.solve(rhs);
    ok = solver.info() == Eigen::Success;
    return x;
}

}  // namespace

Eigen::VectorXd LinearSolver::solve(const Eigen::VectorXd& rhs) const
{
    if (rhs.size() != matrix_.rows()) throw Error("right-hand side has the wrong size");
    if (!ok_) throw SolverError("matrix factorisation failed (singular system)", std::numeric_limits<double>::infinity());
    if (rhs.size() == 0 || rhs.lpNorm<Eigen::Infinity>() == 0.0) return Eigen::VectorXd::Zero(rhs.size());

    bool ok = true;
    Eigen::VectorXd x;
    if (direct_ && symmetric_) {
        x = run(impl_->ldlt, rhs, ok);
    } else if (direct_) {
        x = run(impl_->lu, rhs, ok);
    } else {
        std::lock_guard lock(impl_->iterative_mutex);
        if (symmetric_) {
            x = impl_->cg.solveWithGuess(rhs, Eigen::VectorXd::Zero(rhs.size()));
            ok = impl_->cg.info() == Eigen::Success;
        } else {
            x = impl_->bicg.solveWithGuess(rhs, Eigen::VectorXd::Zero(rhs.size()));
            ok = impl_->bicg.info() == Eigen::Success;
        }
    }
    const Eigen::VectorXd r = matrix_ * x - rhs;
    const double scale = inf_norm(matrix_) * x.lpNorm<Eigen::Infinity>() + rhs.lpNorm<Eigen::Infinity>();
    const double rel = r.lpNorm<Eigen::Infinity>() / scale;
    if (!ok || !x.allFinite() || !(rel <= options_.residual_limit))
        throw SolverError("linear solve did not reach the residual limit", rel);
    return x;
}

double LinearSolver::condition_estimate() const
{
    if (!ok_) return std::numeric_limits<double>::infinity();
    const Eigen::Index n = matrix_.rows();
    if (n == 0) return 1.0;
    std::mt19937_64 rng(20240531);
    std::bernoulli_distribution coin(0.5);
    double inv = 0.0;
    for (int probe = 0; probe < 4; ++probe) {
        Eigen::VectorXd x(n);
        for (Eigen::Index i = 0; i < n; ++i) x[i] = probe == 0 || coin(rng) ? 1.0 : -1.0;
        try {
            inv = std::max(inv, solve(x).lpNorm<Eigen::Infinity>());
        } catch (const SolverError&) {
            return std::numeric_limits<double>::infinity();
        }
    }
    return inf_norm(matrix_) * inv;
}

GreenOperator::GreenOperator(const CoefficientSet& coeffs, SolverOptions options)
    : op_(assemble(coeffs, false)), solver_(std::make_shared<LinearSolver>(op_.interior, options))
{
}

DiscreteField GreenOperator::apply(const DiscreteMeasure& nu) const
{
    if (nu.grid_ptr() != op_.grid) throw Error("measure grid mismatch");
    const double h2 = op_.grid->h() * op_.grid->h();
    const Eigen::VectorXd rhs = as_vector(nu.masses()) / h2;
    const Eigen::VectorXd x = solver_->solve(rhs);
    DiscreteField u(op_.grid);
    std::copy(x.begin(), x.end(), u.values().begin());
    return u;
}

DiscreteField GreenOperator::harmonic_extension(const BoundaryTrace& g) const
{
    DiscreteField w(op_.grid);
    w.set_trace(g);
    const Eigen::VectorXd rhs = -(op_.boundary * as_vector(g));
    const Eigen::VectorXd x = solver_->solve(rhs);
    std::copy(x.begin(), x.end(), w.values().begin());
    return w;
}

DiscreteField green_apply(const CoefficientSet& coeffs, const DiscreteMeasure& nu)
{
    return GreenOperator(coeffs).apply(nu);
}

DiscreteField harmonic_extension(const CoefficientSet& coeffs, const BoundaryTrace& g)
{
    return GreenOperator(coeffs).harmonic_extension(g);
}

std::vector<Vec2> gradient(const DiscreteField& u)
{
    const Grid& g = u.grid();
    std::vector<Vec2> out(g.num_interior());
    for (std::size_t p = 0; p < out.size(); ++p) {
        const auto& arms = g.arms(p);
        auto axis = [&](int plus, int minus) {
            const Arm& ap = arms[static_cast<std::size_t>(plus)];
            const Arm& am = arms[static_cast<std::size_t>(minus)];
            const double hp = ap.length;
            const double hm = am.length;
            const double dp = u[static_cast<std::size_t>(ap.node)] - u[p];
            const double dm = u[p] - u[static_cast<std::size_t>(am.node)];
            return (hm * dp / hp + hp * dm / hm) / (hp + hm);
        };
        out[p] = {axis(east, west), axis(north, south)};
    }
    return out;
}

CaccioppoliCheck caccioppoli_check(const DiscreteField& u, const DiscreteMeasure& nu, std::size_t center,
                                   double radius, double beta, double constant, const MorreyScanOptions& scan)
{
    const Grid& g = u.grid();
    if (nu.grid_ptr() != u.grid_ptr()) throw Error("measure grid mismatch");
    if (!g.is_interior(center)) throw GeometryError("ball centre must be an interior node");
    if (!(radius > 0.0)) throw GeometryError("ball radius must be positive");
    if (4.0 * radius > g.delta(center) * (1.0 + 1e-12))
        throw GeometryError("ball B(x,4r) is not contained in the domain");

    const auto grad = gradient(u);
    const Vec2 c = g.position(center);
    const double h2 = g.h() * g.h();
    CaccioppoliCheck out;
    for (std::size_t p = 0; p < grad.size(); ++p)
        if (norm(g.position(p) - c) < radius) out.lhs += dot(grad[p], grad[p]) * h2;

    const double q = 2.0 / (2.0 - beta);
    const double sup = u.max_abs();
    const double data = nu.is_zero() ? 0.0 : morrey_norm(nu, q, scan).value;
    // r^{n-2} = 1 in the plane.
    out.bracket = sup * sup + sup * data;
    out.rhs = constant * out.bracket;
    out.empirical_constant = out.bracket > 0.0 ? out.lhs / out.bracket : 0.0;
    return out;
}

}  // namespace elab
