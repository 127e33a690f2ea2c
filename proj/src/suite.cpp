#include "elab/suite.hpp"

#include "elab/analysis.hpp"
#include "elab/capacity.hpp"
#include "elab/config.hpp"
#include "elab/csv.hpp"
#include "elab/elliptic.hpp"
#include "elab/errors.hpp"
#include "elab/measure.hpp"
#include "elab/perturbation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace elab {

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

BoundaryTrace zero_trace(const Grid& g) { return BoundaryTrace(g.num_boundary(), 0.0); }

DiscreteMeasure random_measure(const GridPtr& g, std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> mass(-1.0, 1.0);
    std::bernoulli_distribution present(0.3);
    std::vector<double> m(g->num_interior());
    for (auto& x : m) x = present(rng) ? mass(rng) * g->h() * g->h() : 0.0;
    return {g, std::move(m)};
}

/// Smooth random function: a few plane waves with seeded frequencies and phases.
PointFunction random_wave(std::mt19937_64& rng)
{
    std::uniform_real_distribution<double> freq(-6.0, 6.0);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    struct Wave {
        double a, wx, wy, phi;
    };
    std::vector<Wave> waves(4);
    for (auto& w : waves) w = {amp(rng), freq(rng), freq(rng), phase(rng)};
    return [waves](Vec2 p) {
        double s = 0.0;
        for (const auto& w : waves) s += w.a * std::sin(w.wx * p.x + w.wy * p.y + w.phi);
        return s;
    };
}

CriterionResult morrey_oracle()
{
    CriterionResult r;
    const auto start = Clock::now();
    const auto g = build_grid(Domain::unit_square(), 256);
    MorreyScanOptions scan;
    scan.depth = 6;
    const double value = morrey_norm(DiscreteMeasure::lebesgue(g), 4.0 / 3.0, scan).value;
    const double exact = std::pow(2.0, 0.25) * std::numbers::pi / 8.0;
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    r.value = std::abs(value / exact - 1.0);
    r.limit = 0.05;
    r.passed = r.value <= r.limit && seconds < 10.0;
    r.detail = "norm " + fmt(value) + " vs " + fmt(exact) + (seconds < 10.0 ? "" : "; scan exceeded 10 s");
    return r;
}

CriterionResult norm_axioms()
{
    CriterionResult r;
    const auto g = build_grid(Domain::unit_disk(), 32);
    std::mt19937_64 rng(20240601);
    std::uniform_real_distribution<double> scalar(-3.0, 3.0);
    const double q = 4.0 / 3.0;
    int failures = 0;
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const auto a = random_measure(g, rng);
        const auto b = random_measure(g, rng);
        const double s = scalar(rng);
        const double na = morrey_norm(a, q).value;
        const double nb = morrey_norm(b, q).value;
        const double nsum = morrey_norm(measure_axpy(1.0, a, b), q).value;
        const double nscaled = morrey_norm(a.scaled(s), q).value;
        const double homog = std::abs(nscaled - std::abs(s) * na) / std::max(na, 1e-300);
        worst = std::max(worst, homog);
        const bool ok = (na > 0.0) == !a.is_zero() && homog <= 1e-12 && nsum <= (na + nb) * (1.0 + 1e-14) &&
                        morrey_norm(a, 1.2).value <= na * (1.0 + 1e-14) &&
                        na <= morrey_norm(a, 2.0).value * (1.0 + 1e-14);
        failures += ok ? 0 : 1;
    }
    if (morrey_norm(DiscreteMeasure(g), q).value != 0.0) ++failures;

    // ν_j = (1 - 2^{-j}) ν: distances to ν must halve at every step.
    const auto nu = random_measure(g, rng);
    double prev = morrey_norm(measure_axpy(-1.0, nu.scaled(0.5), nu), q).value;
    double ratio_error = 0.0;
    for (int j = 2; j <= 20; ++j) {
        const auto nu_j = nu.scaled(1.0 - std::ldexp(1.0, -j));
        const double d = morrey_norm(measure_axpy(-1.0, nu_j, nu), q).value;
        ratio_error = std::max(ratio_error, std::abs(d / prev - 0.5));
        prev = d;
    }
    r.value = failures;
    r.limit = 0;
    r.passed = failures == 0 && ratio_error <= 1e-9;
    r.detail = "50 instances, worst homogeneity error " + fmt(worst) + ", Cauchy ratio error " + fmt(ratio_error);
    return r;
}

CriterionResult capacity_oracle()
{
    CriterionResult r;
    const double exact = 2.0 * std::numbers::pi / std::log(2.0);
    std::vector<double> errors;
    for (int res : {64, 128, 256}) {
        CapacityOptions o;
        o.resolution = res;
        errors.push_back(std::abs(capacity(ball_condenser({0.0, 0.0}, 0.5, 1.0), o).value / exact - 1.0));
    }
    r.value = errors.back();
    r.limit = 0.02;
    const bool converging = errors[1] < errors[0] && errors[2] < errors[1];
    r.passed = r.value <= r.limit && converging;
    r.detail = "relative errors " + fmt(errors[0]) + ", " + fmt(errors[1]) + ", " + fmt(errors[2]);
    return r;
}

CriterionResult cdc_sweep_check()
{
    CriterionResult r;
    const std::vector<double> radii{1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0};
    double gamma_min = 1.0;
    std::string detail;
    for (const char* name : {"unit_square", "l_shape", "slit_square"}) {
        const auto g = build_grid(Domain::from_name(name), 128);
        const auto sweep = cdc_sweep(*g, 16, radii);
        gamma_min = std::min(gamma_min, sweep.gamma_hat);
        detail += std::string(name) + " " + fmt(sweep.gamma_hat) + "; ";
    }
    const auto square = build_grid(Domain::unit_square(), 128);
    std::vector<double> edge;
    for (double radius : radii) edge.push_back(cdc_ratio(*square, {0.5, 0.0}, radius).ratio);
    double mean = 0.0;
    for (double v : edge) mean += v / static_cast<double>(edge.size());
    double spread = 0.0;
    for (double v : edge) spread = std::max(spread, std::abs(v / mean - 1.0));
    r.value = gamma_min;
    r.limit = 0.0;
    r.passed = gamma_min > 0.0 && spread <= 0.1;
    r.detail = detail + "edge-midpoint spread " + fmt(spread);
    return r;
}

/// Lower bound u >= min(0, min g) for ν, μ >= 0; both bounds when ν = 0 and there is no potential.
double principle_violation(const DiscreteField& u, const BoundaryTrace& g, bool two_sided)
{
    double gmin = 0.0;
    double gmax = 0.0;
    if (!g.empty()) {
        gmin = *std::min_element(g.begin(), g.end());
        gmax = *std::max_element(g.begin(), g.end());
    }
    const double floor = two_sided ? gmin : std::min(0.0, gmin);
    double v = std::max(0.0, floor - u.min());
    if (two_sided) v = std::max(v, u.max() - gmax);
    return v;
}

CriterionResult green_oracle()
{
    CriterionResult r;
    std::vector<double> errors;
    double violation = 0.0;
    for (int res : {64, 128, 256}) {
        const auto g = build_grid(Domain::unit_disk(), res);
        const auto u = green_apply(laplacian_coefficients(g), DiscreteMeasure::lebesgue(g));
        const auto exact = DiscreteField::from_function(g, [](Vec2 p) { return (1.0 - dot(p, p)) / 4.0; });
        errors.push_back(sup_distance(u, exact));
        violation = std::max(violation, principle_violation(u, zero_trace(*g), false));
    }
    const double order = std::min(std::log2(errors[0] / errors[1]), std::log2(errors[1] / errors[2]));

    // Comparison checks on every preset with nonnegative data and mixed coefficient classes.
    std::mt19937_64 rng(77);
    for (const char* name : {"unit_square", "unit_disk", "l_shape", "slit_square", "annulus"}) {
        const auto g = build_grid(Domain::from_name(name), 64);
        const auto tr = trace_from_function(*g, random_wave(rng));
        for (double scale : {0.0, 0.2, 1.0}) {
            const auto c = singular_coefficients(g, 0.5, scale, scale);
            PerturbationOptions o;
            o.analyse_solution = false;
            const PerturbationSolver solver(c, o);
            const auto with_data = solver.direct(DiscreteMeasure::lebesgue(g), tr).u;
            violation = std::max(violation, principle_violation(with_data, tr, false));
            if (scale == 0.0) {
                const auto harmonic = solver.direct(DiscreteMeasure(g), tr).u;
                violation = std::max(violation, principle_violation(harmonic, tr, true));
            } else {
                const auto drift_only = PerturbationSolver(singular_coefficients(g, 0.5, scale, 0.0), o)
                                            .direct(DiscreteMeasure(g), tr)
                                            .u;
                violation = std::max(violation, principle_violation(drift_only, tr, true));
            }
        }
    }
    r.value = order;
    r.limit = 1.8;
    r.passed = order >= 1.8 && violation <= 1e-10;
    r.detail = "errors " + fmt(errors[0]) + ", " + fmt(errors[1]) + ", " + fmt(errors[2]) +
               "; max principle violation " + fmt(violation);
    return r;
}

CriterionResult boundary_lift()
{
    CriterionResult r;
    std::mt19937_64 rng(4242);
    const char* names[] = {"unit_square", "unit_disk", "l_shape", "slit_square", "annulus"};
    double excess = -1e300;
    for (int k = 0; k < 10; ++k) {
        const auto g = build_grid(Domain::from_name(names[k % 5]), 64);
        const auto tr = trace_from_function(*g, random_wave(rng));
        const auto w = harmonic_extension(laplacian_coefficients(g), tr);
        excess = std::max(excess, oscillation(w) - oscillation(std::span<const double>(tr)));
    }
    const auto g = build_grid(Domain::slit_square(), 128);
    PerturbationOptions o;
    const auto s = solve_bvp(laplacian_coefficients(g), DiscreteMeasure(g), trace_from_function(*g, trace_function("im_sqrt")),
                             Strategy::direct, o);
    const double beta_hat = s.report.holder_fit.beta_hat;
    r.value = beta_hat;
    r.limit = 0.45;
    r.passed = excess <= 1e-12 && beta_hat >= 0.45 && beta_hat <= 0.55;
    r.detail = "max osc(w) - osc(g) = " + fmt(excess) + "; slit beta_hat " + fmt(beta_hat);
    return r;
}

CriterionResult perturbation_equivalence()
{
    CriterionResult r;
    const auto g = build_grid(Domain::unit_square(), 128);
    const auto nu = DiscreteMeasure::lebesgue(g);
    double worst = 0.0;
    int converged = 0;
    for (double b : {0.02, 0.05, 0.1}) {
        for (double c : {0.02, 0.05, 0.1}) {
            PerturbationOptions o;
            o.analyse_solution = false;
            o.compare_direct = true;
            try {
                const auto s = PerturbationSolver(singular_coefficients(g, 0.5, b, c), o).neumann(nu);
                worst = std::max(worst, s.report.series_vs_direct_gap);
                ++converged;
            } catch (const NonContractiveError&) {
                // the criterion only constrains convergent series
            }
        }
    }
    r.value = worst;
    r.limit = 1e-6;
    r.passed = converged > 0 && worst <= 1e-6;
    r.detail = std::to_string(converged) + "/9 series converged";
    return r;
}

CriterionResult bound_shape()
{
    CriterionResult r;
    const auto g = build_grid(Domain::unit_square(), 64);
    const auto nu = DiscreteMeasure::lebesgue(g);
    PerturbationOptions o;
    o.analyse_solution = false;
    double lo = 1e300;
    double hi = 0.0;
    bool monotone = true;
    for (double c : {0.0, 0.05}) {
        double prev = 0.0;
        for (double b : {0.02, 0.05, 0.1, 0.2, 0.4}) {
            const auto s = PerturbationSolver(singular_coefficients(g, 0.5, b, c), o).neumann(nu);
            lo = std::min(lo, s.report.empirical_C2);
            hi = std::max(hi, s.report.empirical_C2);
            monotone = monotone && s.report.contraction_ratio_hat > prev;
            prev = s.report.contraction_ratio_hat;
        }
    }
    r.value = hi / lo;
    r.limit = 3.0;
    r.passed = r.value <= 3.0 && monotone;
    r.detail = "C2 in [" + fmt(lo) + ", " + fmt(hi) + "]" + (monotone ? "" : "; contraction not monotone");
    return r;
}

CriterionResult uniqueness()
{
    CriterionResult r;
    struct Case {
        double beta, b, c;
    };
    const Case cases[] = {{0.5, 0.0, 0.0}, {0.5, 0.1, 0.1}, {0.5, 1.0, 1.0}, {0.25, 0.3, 0.2}, {0.75, 2.0, 0.5}};
    double worst = 0.0;
    int runs = 0;
    for (const char* name : {"unit_square", "unit_disk", "l_shape", "slit_square", "annulus"}) {
        const auto g = build_grid(Domain::from_name(name), 64);
        for (const auto& k : cases) {
            const auto s = direct_solve(singular_coefficients(g, k.beta, k.b, k.c), DiscreteMeasure(g), zero_trace(*g));
            worst = std::max(worst, s.u.max_abs());
            ++runs;
        }
    }
    r.value = worst;
    r.limit = 1e-10;
    r.passed = worst <= 1e-10;
    r.detail = std::to_string(runs) + " configurations";
    return r;
}

CriterionResult holder_solvability()
{
    CriterionResult r;
    std::vector<SolveReport> reports;
    for (int res : {128, 256}) {
        const auto g = build_grid(Domain::unit_square(), res);
        PerturbationOptions o;
        o.holder.r_min = 1.0 / 32.0;
        o.holder.r_max = std::sqrt(2.0) / 4.0;
        const auto tr = trace_from_function(*g, trace_function("distance_power: 0.5, 0.5, 0"));
        reports.push_back(solve_bvp(singular_coefficients(g, 0.5, 0.2, 0.2), DiscreteMeasure::lebesgue(g), tr,
                                    Strategy::direct, o)
                              .report);
    }
    const auto& a = reports[0];
    const auto& b = reports[1];
    const double beta_gap = std::abs(a.holder_fit.beta_hat - b.holder_fit.beta_hat);
    const double ratio_change = std::abs(b.estimate_ratio / a.estimate_ratio - 1.0);
    const bool bounded = std::isfinite(a.sup_norm) && std::isfinite(b.sup_norm) && b.sup_norm <= 1.1 * a.sup_norm;
    r.value = beta_gap;
    r.limit = 0.05;
    r.passed = bounded && a.holder_fit.beta_hat > 0.0 && b.holder_fit.beta_hat > 0.0 && beta_gap <= 0.05 &&
               std::isfinite(a.estimate_ratio) && std::isfinite(b.estimate_ratio) && ratio_change <= 0.25;
    r.detail = "beta_hat " + fmt(a.holder_fit.beta_hat) + " -> " + fmt(b.holder_fit.beta_hat) + "; estimate ratio " +
               fmt(a.estimate_ratio) + " -> " + fmt(b.estimate_ratio) + "; sup " + fmt(b.sup_norm);
    return r;
}

CriterionResult manufactured()
{
    CriterionResult r;
    double worst = 0.0;
    for (const char* name : {"unit_square", "l_shape"}) {
        const auto g = build_grid(Domain::from_name(name), 128);
        const auto c = singular_coefficients(g, 0.5, 0.5, 0.5);
        const auto exact = DiscreteField::from_function(g, [](Vec2 p) {
            return std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y) + 0.3 * p.x * p.x * p.y;
        });
        const auto s = direct_solve(c, assemble(c).as_measure(exact), exact.trace());
        worst = std::max(worst, sup_distance(s.u, exact));
    }
    r.value = worst;
    r.limit = 1e-8;
    r.passed = worst <= 1e-8;
    r.detail = "unit_square and l_shape at resolution 128, b = c = 0.5";
    return r;
}

}  // namespace

std::vector<CriterionResult> run_acceptance_suite(const SuiteOptions& options)
{
    using Fn = CriterionResult (*)();
    static constexpr Fn battery[suite_size] = {morrey_oracle, norm_axioms,     capacity_oracle,
                                               cdc_sweep_check, green_oracle,  boundary_lift,
                                               perturbation_equivalence, bound_shape, uniqueness,
                                               holder_solvability, manufactured};
    static const char* names[suite_size] = {"morrey_norm_oracle",        "norm_axioms_and_cauchy",
                                            "capacity_oracle",           "cdc_sweep",
                                            "green_operator_oracle",     "boundary_lift",
                                            "neumann_direct_equivalence", "bound_shape",
                                            "uniqueness",                "global_holder_solvability",
                                            "manufactured_solution"};
    std::vector<CriterionResult> out;
    for (int id = 1; id <= suite_size; ++id) {
        if (!options.only.empty() && std::find(options.only.begin(), options.only.end(), id) == options.only.end()) {
            continue;
        }
        const auto start = Clock::now();
        CriterionResult res;
        try {
            res = battery[id - 1]();
        } catch (const std::exception& e) {
            res = CriterionResult{};
            res.detail = std::string("exception: ") + e.what();
            res.value = std::nan("");
        }
        res.id = id;
        res.name = names[id - 1];
        res.seconds = std::chrono::duration<double>(Clock::now() - start).count();
        if (options.on_result) options.on_result(res);
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace elab
