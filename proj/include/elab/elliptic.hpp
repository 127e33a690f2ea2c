#pragma once

#include "elab/coefficients.hpp"
#include "elab/field.hpp"
#include "elab/measure.hpp"

#include <Eigen/Sparse>

#include <memory>
#include <vector>

namespace elab {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class Stencil { five_point, nine_point };

/// Discrete operator, rows scaled per unit volume.
///
/// For A = I and a regular node the row is (-1, -1, 4, -1, -1)/h². Couplings to
/// boundary nodes live in `boundary` so that K u = interior·u_I + boundary·u_B.
struct OperatorMatrix {
    SparseMatrix interior;
    SparseMatrix boundary;
    GridPtr grid;
    Stencil stencil = Stencil::five_point;
    bool lower_order = false;

    /// (K u) on interior nodes, per unit volume.
    [[nodiscard]] Eigen::VectorXd apply(const DiscreteField& u) const;
    /// h²·(K u) as a measure on interior cells.
    [[nodiscard]] DiscreteMeasure as_measure(const DiscreteField& u) const;
    /// h²·(K u) - ν.
    [[nodiscard]] DiscreteMeasure residual_measure(const DiscreteField& u, const DiscreteMeasure& nu) const;
    [[nodiscard]] bool symmetric(double tolerance = 1e-12) const;
};

/// Shortley–Weller assembly of -div(A∇u), plus upwind b·∇u and μ when requested.
OperatorMatrix assemble(const CoefficientSet& coeffs, bool include_lower_order = true);
/// Only the b·∇u + μ rows (same stencil as in the full assembly).
OperatorMatrix assemble_lower_order(const CoefficientSet& coeffs);

struct SolverOptions {
    /// Above this many unknowns an iterative method is used.
    std::size_t direct_limit = 257 * 257;
    double iterative_tolerance = 1e-11;
    int max_iterations = 20000;
    /// Relative residual accepted after a solve.
    double residual_limit = 1e-10;
};

/// Factorised sparse matrix. LDLT when symmetric, LU otherwise.
class LinearSolver {
public:
    explicit LinearSolver(SparseMatrix matrix, SolverOptions options = {});
    ~LinearSolver();
    LinearSolver(const LinearSolver&) = delete;
    LinearSolver& operator=(const LinearSolver&) = delete;

    /// Throws SolverError when the factorisation failed or the residual check does not pass.
    [[nodiscard]] Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const;
    /// ‖K‖∞ · max ‖K⁻¹x‖∞ over a few probe vectors with ‖x‖∞ = 1.
    [[nodiscard]] double condition_estimate() const;

    [[nodiscard]] bool symmetric() const noexcept { return symmetric_; }
    [[nodiscard]] bool direct() const noexcept { return direct_; }
    /// False when the factorisation reported a singular matrix.
    [[nodiscard]] bool factorised() const noexcept { return ok_; }
    [[nodiscard]] const SparseMatrix& matrix() const noexcept { return matrix_; }

private:
    struct Impl;
    SparseMatrix matrix_;
    SolverOptions options_;
    bool symmetric_ = false;
    bool direct_ = true;
    bool ok_ = false;
    std::unique_ptr<Impl> impl_;
};

/// Solution operators of the principal part -div(A∇·) with zero boundary values.
class GreenOperator {
public:
    explicit GreenOperator(const CoefficientSet& coeffs, SolverOptions options = {});

    /// u = G ν: K_A u = ν/h² inside, u = 0 on the boundary.
    [[nodiscard]] DiscreteField apply(const DiscreteMeasure& nu) const;
    /// K_A w = 0 inside, w = g on the boundary.
    [[nodiscard]] DiscreteField harmonic_extension(const BoundaryTrace& g) const;

    [[nodiscard]] const OperatorMatrix& matrix() const noexcept { return op_; }
    [[nodiscard]] const LinearSolver& solver() const noexcept { return *solver_; }
    [[nodiscard]] const GridPtr& grid_ptr() const noexcept { return op_.grid; }

private:
    OperatorMatrix op_;
    std::shared_ptr<const LinearSolver> solver_;
};

DiscreteField green_apply(const CoefficientSet& coeffs, const DiscreteMeasure& nu);
DiscreteField harmonic_extension(const CoefficientSet& coeffs, const BoundaryTrace& g);

/// Nodal gradient on interior nodes; three-point differences on the actual arm lengths.
std::vector<Vec2> gradient(const DiscreteField& u);

struct CaccioppoliCheck {
    /// Σ_{B(x,r)} |∇u|² h².
    double lhs = 0.0;
    /// (‖u‖∞² + ‖u‖∞·⫴ν⫴_q)·r^{n-2}.
    double bracket = 0.0;
    double rhs = 0.0;
    /// lhs / bracket.
    double empirical_constant = 0.0;
};

/// Local energy bound on B(x, r) with q = n/(2-β); requires 4r <= δ(x).
CaccioppoliCheck caccioppoli_check(const DiscreteField& u, const DiscreteMeasure& nu, std::size_t center,
                                   double radius, double beta, double constant = 1.0,
                                   const MorreyScanOptions& scan = {});

}  // namespace elab
