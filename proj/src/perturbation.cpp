#include "elab/perturbation.hpp"

#include <algorithm>
#include <cmath>

namespace elab {

const char* to_string(Strategy s) { return s == Strategy::neumann ? "neumann" : "direct"; }

Strategy strategy_from_string(const std::string& name)
{
    if (name == "neumann") return Strategy::neumann;
    if (name == "direct") return Strategy::direct;
    throw Error("unknown strategy '" + name + "' (expected neumann or direct)");
}

PerturbationSolver::PerturbationSolver(const CoefficientSet& coeffs, PerturbationOptions options)
    : coeffs_(coeffs),
      options_(options),
      green_(coeffs, options.solver),
      lower_(assemble_lower_order(coeffs)),
      full_(assemble(coeffs, true))
{
    if (!(options_.beta > 0.0 && options_.beta < 1.0)) throw Error("beta must lie in (0,1)");
    if (!(options_.tol > 0.0)) throw Error("series tolerance must be positive");
    if (options_.max_iter < 1) throw Error("max_iter must be at least 1");
}

double PerturbationSolver::morrey(const DiscreteMeasure& nu, double q) const
{
    if (nu.is_zero()) return 0.0;
    return morrey_norm(nu, q, options_.scan).value;
}

DiscreteMeasure PerturbationSolver::apply_T(const DiscreteMeasure& nu) const
{
    if (nu.grid_ptr() != coeffs_.grid) throw Error("measure grid mismatch");
    if (nu.is_zero() || (!coeffs_.has_drift() && !coeffs_.has_potential())) return DiscreteMeasure(coeffs_.grid);
    return lower_.as_measure(green_.apply(nu)).scaled(-1.0);
}

DiscreteMeasure PerturbationSolver::lift_correction(const DiscreteField& w) const
{
    return lower_.as_measure(w);
}

const LinearSolver& PerturbationSolver::full_solver() const
{
    std::call_once(full_once_, [&] { full_solver_ = std::make_shared<LinearSolver>(full_.interior, options_.solver); });
    return *full_solver_;
}

SolveReport PerturbationSolver::base_report(Strategy mode, const DiscreteMeasure& nu) const
{
    SolveReport r;
    r.mode = mode;
    r.q = q();
    const Grid& g = *coeffs_.grid;
    if (coeffs_.has_drift()) {
        std::vector<double> b2(g.num_interior());
        for (std::size_t i = 0; i < b2.size(); ++i) b2[i] = dot(coeffs_.b[i], coeffs_.b[i]) * g.cell_volume(i);
        r.drift_norm = std::sqrt(morrey(DiscreteMeasure(coeffs_.grid, std::move(b2)), 2.0 / (2.0 - 2.0 * options_.beta)));
    }
    r.potential_norm = morrey(coeffs_.mu, q());
    r.data_norm = morrey(nu, q());
    return r;
}

Solution PerturbationSolver::series(const DiscreteMeasure& rhs, const DiscreteMeasure& nu) const
{
    Solution s{DiscreteField(coeffs_.grid), base_report(Strategy::neumann, nu)};
    SolveReport& r = s.report;
    const double n0 = morrey(rhs, q());
    r.iterate_norms.push_back(n0);
    if (rhs.is_zero()) {
        r.converged = true;
        return s;
    }
    DiscreteMeasure sigma = rhs;
    DiscreteMeasure term = rhs;
    double ratio_max = 0.0;
    int stalled = 0;
    for (int k = 1; k <= options_.max_iter; ++k) {
        term = apply_T(term);
        const double nk = morrey(term, q());
        const double prev = r.iterate_norms.back();
        r.iterate_norms.push_back(nk);
        r.iterations = k;
        const double ratio = prev > 0.0 ? nk / prev : 0.0;
        ratio_max = std::max(ratio_max, ratio);
        r.contraction_ratio_hat = ratio_max;
        sigma = measure_axpy(1.0, term, sigma);
        if (nk <= options_.tol * n0) {
            r.converged = true;
            break;
        }
        stalled = ratio >= 1.0 ? stalled + 1 : 0;
        if (stalled >= options_.stall_limit)
            throw NonContractiveError("perturbation series is not contractive (norm ratio " + std::to_string(ratio) + ")", r);
    }
    if (!r.converged)
        throw NonContractiveError("perturbation series did not reach the tolerance in " +
                                      std::to_string(options_.max_iter) + " terms",
                                  r);
    s.u = green_.apply(sigma);
    return s;
}

Solution PerturbationSolver::full_solve(const DiscreteMeasure& rhs, const DiscreteMeasure& nu) const
{
    Solution s{DiscreteField(coeffs_.grid), base_report(Strategy::direct, nu)};
    SolveReport& r = s.report;
    const LinearSolver& solver = full_solver();
    r.condition_estimate = solver.condition_estimate();
    if (!solver.factorised() || !(r.condition_estimate <= options_.condition_limit))
        throw FredholmCaseOneError("full operator is numerically singular (condition estimate " +
                                       std::to_string(r.condition_estimate) + ")",
                                   r);
    const double h2 = coeffs_.grid->h() * coeffs_.grid->h();
    Eigen::VectorXd b(static_cast<Eigen::Index>(rhs.size()));
    for (std::size_t i = 0; i < rhs.size(); ++i) b[static_cast<Eigen::Index>(i)] = rhs.mass(i) / h2;
    const Eigen::VectorXd x = solver.solve(b);
    std::copy(x.begin(), x.end(), s.u.values().begin());
    r.converged = true;
    return s;
}

Solution PerturbationSolver::solve(const DiscreteMeasure& nu, const BoundaryTrace& g, Strategy strategy) const
{
    const Grid& grid = *coeffs_.grid;
    if (nu.grid_ptr() != coeffs_.grid) throw Error("measure grid mismatch");
    if (g.size() != grid.num_boundary()) throw Error("boundary trace size does not match the grid");
    for (double v : g)
        if (!std::isfinite(v)) throw Error("boundary trace has a non-finite value");

    const bool has_trace = std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; });
    DiscreteField w(coeffs_.grid);
    DiscreteMeasure rhs = nu;
    if (has_trace) {
        w = green_.harmonic_extension(g);
        rhs = measure_axpy(-1.0, lift_correction(w), nu);
    }
    Solution s = strategy == Strategy::neumann ? series(rhs, nu) : full_solve(rhs, nu);
    s.u += w;
    finish(s, nu, g);
    return s;
}

Solution PerturbationSolver::neumann(const DiscreteMeasure& nu) const
{
    return solve(nu, BoundaryTrace(coeffs_.grid->num_boundary(), 0.0), Strategy::neumann);
}

Solution PerturbationSolver::direct(const DiscreteMeasure& nu, const BoundaryTrace& g) const
{
    return solve(nu, g, Strategy::direct);
}

void PerturbationSolver::finish(Solution& s, const DiscreteMeasure& nu, const BoundaryTrace& g) const
{
    SolveReport& r = s.report;
    const auto res = full_.residual_measure(s.u, nu);
    r.residual = 0.0;
    for (double m : res.masses()) r.residual = std::max(r.residual, std::abs(m));
    r.sup_norm = s.u.max_abs();

    if ((coeffs_.has_drift() || coeffs_.has_potential()) && r.data_norm > 0.0) {
        const double t_norm = r.mode == Strategy::neumann && r.iterate_norms.size() > 1 &&
                                      !std::any_of(g.begin(), g.end(), [](double v) { return v != 0.0; })
                                  ? r.iterate_norms[1]
                                  : morrey(apply_T(nu), q());
        r.empirical_C2 = t_norm / ((r.drift_norm + r.potential_norm) * r.data_norm);
    }

    if (r.mode == Strategy::neumann && options_.compare_direct) {
        const Solution d = solve(nu, g, Strategy::direct);
        r.series_vs_direct_gap = sup_distance(s.u, d.u);
        r.condition_estimate = d.report.condition_estimate;
    }

    if (options_.analyse_solution) {
        r.holder_fit = holder_fit(s.u, options_.holder);
        const double exponent =
            r.holder_fit.degenerate ? options_.beta : std::clamp(r.holder_fit.beta_hat, 1e-3, 1.0);
        r.solution_holder_norm = holder_norm(sample(s.u), exponent, options_.holder_norm).value;
        r.trace_holder_norm = holder_norm(sample_trace(*coeffs_.grid, g), options_.beta, options_.holder_norm).value;
        const double denom = r.data_norm + r.trace_holder_norm;
        r.estimate_ratio = denom > 0.0 ? r.solution_holder_norm / denom : not_computed;
    }
}

DiscreteMeasure apply_T(const CoefficientSet& coeffs, const DiscreteMeasure& nu)
{
    PerturbationOptions o;
    o.analyse_solution = false;
    if (coeffs.profile) o.beta = coeffs.profile->beta;
    return PerturbationSolver(coeffs, o).apply_T(nu);
}

Solution neumann_solve(const CoefficientSet& coeffs, const DiscreteMeasure& nu, double tol, int max_iter)
{
    PerturbationOptions o;
    o.tol = tol;
    o.max_iter = max_iter;
    o.analyse_solution = false;
    if (coeffs.profile) o.beta = coeffs.profile->beta;
    return PerturbationSolver(coeffs, o).neumann(nu);
}

Solution direct_solve(const CoefficientSet& coeffs, const DiscreteMeasure& nu, const BoundaryTrace& g)
{
    PerturbationOptions o;
    o.analyse_solution = false;
    if (coeffs.profile) o.beta = coeffs.profile->beta;
    return PerturbationSolver(coeffs, o).direct(nu, g);
}

Solution solve_bvp(const CoefficientSet& coeffs, const DiscreteMeasure& nu, const BoundaryTrace& g, Strategy strategy,
                   const PerturbationOptions& options)
{
    return PerturbationSolver(coeffs, options).solve(nu, g, strategy);
}

}  // namespace elab
