#pragma once

#include "elab/analysis.hpp"
#include "elab/coefficients.hpp"
#include "elab/elliptic.hpp"
#include "elab/errors.hpp"

#include <limits>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace elab {

enum class Strategy { neumann, direct };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);

struct PerturbationOptions {
    /// Data exponent; the Morrey index is q = n/(2-β).
    double beta = 0.5;
    /// Series stops once ⫴Tᵏν⫴ <= tol·⫴ν⫴.
    double tol = 1e-12;
    int max_iter = 200;
    /// Consecutive non-decreasing iterate norms that mark the series as divergent.
    int stall_limit = 3;
    MorreyScanOptions scan;
    SolverOptions solver;
    /// Direct solves with a larger condition estimate are treated as singular.
    double condition_limit = 1e12;
    /// In series mode, also run the direct solve and record the gap.
    bool compare_direct = false;
    /// Fit a Hölder exponent to the solution and form the global estimate ratio.
    bool analyse_solution = true;
    HolderFitOptions holder;
    HolderNormOptions holder_norm;
};

constexpr double not_computed = std::numeric_limits<double>::quiet_NaN();

struct SolveReport {
    Strategy mode = Strategy::direct;
    double q = 0.0;
    /// ⫴Tᵏσ₀⫴ for k = 0, 1, ... (series mode).
    std::vector<double> iterate_norms;
    double contraction_ratio_hat = not_computed;
    int iterations = 0;
    bool converged = false;
    /// max over cells of |h²(Ku) - ν|.
    double residual = not_computed;
    double series_vs_direct_gap = not_computed;
    double condition_estimate = not_computed;
    /// ⫴|b|²m⫴^{1/2} (index n/(2-2β)) and ⫴μ⫴ (index q).
    double drift_norm = 0.0;
    double potential_norm = 0.0;
    double data_norm = 0.0;
    /// ⫴Tν⫴ / ((drift_norm + potential_norm)·⫴ν⫴).
    double empirical_C2 = not_computed;
    double sup_norm = 0.0;
    HolderFit holder_fit;
    /// ‖u‖ in C^{β̂} with β̂ the fitted exponent (lower bound).
    double solution_holder_norm = not_computed;
    /// ‖g‖ in C^β on the boundary nodes.
    double trace_holder_norm = 0.0;
    /// solution_holder_norm / (⫴ν⫴ + ‖g‖).
    double estimate_ratio = not_computed;
};

/// The series diverges or stalls; carries the diagnostics gathered so far.
class NonContractiveError : public Error {
public:
    NonContractiveError(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
    [[nodiscard]] const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

/// The full operator is (numerically) singular: the homogeneous problem has a nontrivial solution.
class FredholmCaseOneError : public Error {
public:
    FredholmCaseOneError(const std::string& what, SolveReport report) : Error(what), report_(std::move(report)) {}
    [[nodiscard]] const SolveReport& report() const noexcept { return report_; }

private:
    SolveReport report_;
};

struct Solution {
    DiscreteField u;
    SolveReport report;
};

/// Shares one factorisation of the principal part (and, lazily, of the full operator).
class PerturbationSolver {
public:
    PerturbationSolver(const CoefficientSet& coeffs, PerturbationOptions options = {});

    /// Tν = -(b·∇G₀ν + μ G₀ν) as cell masses.
    [[nodiscard]] DiscreteMeasure apply_T(const DiscreteMeasure& nu) const;
    /// Zero boundary data, u = G₀ Σ Tᵏν.
    [[nodiscard]] Solution neumann(const DiscreteMeasure& nu) const;
    /// Full system with boundary data g.
    [[nodiscard]] Solution direct(const DiscreteMeasure& nu, const BoundaryTrace& g) const;
    /// u = v + w with w the A-harmonic lift of g and v from the chosen strategy.
    [[nodiscard]] Solution solve(const DiscreteMeasure& nu, const BoundaryTrace& g, Strategy strategy) const;

    [[nodiscard]] double q() const noexcept { return 2.0 / (2.0 - options_.beta); }
    [[nodiscard]] const GreenOperator& green() const noexcept { return green_; }
    [[nodiscard]] const OperatorMatrix& full_operator() const noexcept { return full_; }
    [[nodiscard]] const PerturbationOptions& options() const noexcept { return options_; }

private:
    [[nodiscard]] double morrey(const DiscreteMeasure& nu, double q) const;
    [[nodiscard]] DiscreteMeasure lift_correction(const DiscreteField& w) const;
    [[nodiscard]] SolveReport base_report(Strategy mode, const DiscreteMeasure& nu) const;
    [[nodiscard]] Solution series(const DiscreteMeasure& rhs, const DiscreteMeasure& nu) const;
    [[nodiscard]] Solution full_solve(const DiscreteMeasure& rhs, const DiscreteMeasure& nu) const;
    void finish(Solution& s, const DiscreteMeasure& nu, const BoundaryTrace& g) const;
    [[nodiscard]] const LinearSolver& full_solver() const;

    CoefficientSet coeffs_;
    PerturbationOptions options_;
    GreenOperator green_;
    OperatorMatrix lower_;
    OperatorMatrix full_;
    mutable std::shared_ptr<LinearSolver> full_solver_;
    mutable std::once_flag full_once_;
};

DiscreteMeasure apply_T(const CoefficientSet& coeffs, const DiscreteMeasure& nu);
Solution neumann_solve(const CoefficientSet& coeffs, const DiscreteMeasure& nu, double tol, int max_iter);
Solution direct_solve(const CoefficientSet& coeffs, const DiscreteMeasure& nu, const BoundaryTrace& g);
Solution solve_bvp(const CoefficientSet& coeffs, const DiscreteMeasure& nu, const BoundaryTrace& g, Strategy strategy,
                   const PerturbationOptions& options = {});

}  // namespace elab
