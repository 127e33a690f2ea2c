#include "elab/runner.hpp"

#include "elab/analysis.hpp"
#include "elab/capacity.hpp"
#include "elab/csv.hpp"
#include "elab/errors.hpp"
#include "elab/suite.hpp"
#include "elab/version.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>

namespace elab {

namespace {

using Row = std::vector<std::string>;

std::string num(double v) { return format_number(v); }
std::string num(std::size_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }

std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

class Artifact {
public:
    Artifact(const RunConfig& config, const std::string& suffix, std::vector<std::string>& files)
        : path_(config.prefix + "_" + suffix + ".csv")
    {
        const auto parent = std::filesystem::path(path_).parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        out_.open(path_);
        if (!out_) throw Error("cannot write '" + path_ + "'");
        files.push_back(path_);
    }

    std::ofstream& stream() { return out_; }
    void row(const Row& fields) { write_csv_row(out_, fields); }

private:
    std::string path_;
    std::ofstream out_;
};

GridPtr make_grid(const RunConfig& c) { return build_grid(Domain::from_name(c.domain), c.resolution); }

struct SolveOutcome {
    GridPtr grid;
    Solution solution;
    double error = not_computed;
};

SolveOutcome solve_configured(const RunConfig& c, bool analyse)
{
    const auto grid = make_grid(c);
    const auto coeffs = singular_coefficients(grid, c.beta, c.b_scale, c.c_scale, c.direction);
    const auto nu = build_measure(c.nu, grid);
    const auto tr = trace_from_function(*grid, trace_function(c.g));
    auto options = c.perturbation_options();
    options.analyse_solution = analyse;
    SolveOutcome out{grid, PerturbationSolver(coeffs, options).solve(nu, tr, c.strategy)};
    if (!c.reference.empty()) {
        out.error = sup_distance(out.solution.u, DiscreteField::from_function(out.grid, reference_function(c.reference)));
    }
    return out;
}

Summary solve_summary(const RunConfig& c, const SolveOutcome& s)
{
    const auto& r = s.solution.report;
    const auto& fit = r.holder_fit;
    return {summary_header(Command::solve),
            {c.domain,
             num(c.resolution),
             num(s.grid->h()),
             num(c.beta),
             num(r.q),
             num(c.b_scale),
             num(c.c_scale),
             to_string(r.mode),
             r.converged ? "true" : "false",
             num(r.iterations),
             num(r.contraction_ratio_hat),
             num(r.residual),
             num(r.series_vs_direct_gap),
             num(r.condition_estimate),
             num(r.drift_norm),
             num(r.potential_norm),
             num(r.data_norm),
             num(r.empirical_C2),
             num(r.sup_norm),
             num(s.solution.u.min()),
             num(s.solution.u.max()),
             num(fit.beta_hat),
             num(fit.seminorm_hat),
             num(fit.fit_r2),
             num(r.solution_holder_norm),
             num(r.trace_holder_norm),
             num(r.estimate_ratio),
             num(s.error)}};
}

Summary morrey_summary(const RunConfig& c, std::ostream& log)
{
    const auto g = make_grid(c);
    const auto nu = build_measure(c.nu, g);
    MorreyScanOptions scan;
    scan.depth = c.scan_depth;
    scan.min_radius_cells = c.min_radius_cells;
    const auto r = morrey_norm(nu, c.q(), scan);
    Vec2 at{std::nan(""), std::nan("")};
    if (r.argmax_center >= 0) at = g->position(static_cast<std::size_t>(r.argmax_center));
    log << "morrey norm (q = " << c.q() << ") = " << r.value << " at (" << at.x << ", " << at.y
        << "), radius " << r.argmax_radius << '\n';
    return {summary_header(Command::morrey_norm),
            {c.domain, num(c.resolution), num(g->h()), num(r.q), num(c.scan_depth), num(r.value), num(at.x),
             num(at.y), num(r.argmax_radius), num(r.balls_scanned), num(nu.total_variation())}};
}

Summary capacity_summary(const RunConfig& c, std::ostream& log)
{
    CapacityOptions o;
    o.resolution = c.capacity_resolution;
    const auto r = capacity(ball_condenser({0.0, 0.0}, c.inner_radius, c.outer_radius), o);
    const double reference =
        c.inner_radius > 0.0 ? 2.0 * std::numbers::pi / std::log(c.outer_radius / c.inner_radius) : 0.0;
    const double rel = reference > 0.0 ? r.value / reference - 1.0 : std::nan("");
    log << "capacity = " << r.value << " (analytic " << reference << ")\n";
    return {summary_header(Command::capacity),
            {num(c.inner_radius), num(c.outer_radius), num(c.capacity_resolution), num(r.value), num(reference),
             num(rel), num(r.unknowns)}};
}

struct CdcOutcome {
    Summary summary;
    CdcSweep sweep;
};

CdcOutcome cdc_outcome(const RunConfig& c, std::ostream& log)
{
    const auto g = make_grid(c);
    CapacityOptions o;
    o.resolution = c.cdc_resolution;
    CdcOutcome out;
    out.sweep = cdc_sweep(*g, c.cdc_points, c.cdc_radii, o);
    log << "gamma_hat = " << out.sweep.gamma_hat << " over " << c.cdc_points << " points and " << c.cdc_radii.size()
        << " radii\n";
    std::ostringstream radii;
    for (std::size_t i = 0; i < c.cdc_radii.size(); ++i) radii << (i ? " " : "") << num(c.cdc_radii[i]);
    out.summary = {summary_header(Command::cdc_check),
                   {c.domain, num(c.resolution), num(g->h()), num(c.cdc_points), radii.str(),
                    num(out.sweep.gamma_hat), num(out.sweep.certified_min_radius),
                    num(out.sweep.certified_max_radius), num(out.sweep.warnings)}};
    return out;
}

struct FitOutcome {
    Summary summary;
    HolderFit fit;
};

FitOutcome holder_outcome(const RunConfig& c, std::ostream& log)
{
    HolderFitOptions o;
    o.r_min = c.fit_r_min;
    o.r_max = c.fit_r_max;
    o.scales = c.fit_scales;
    FitOutcome out;
    std::string source;
    std::size_t points = 0;
    double spacing = 0.0;
    if (!c.holder_input.empty()) {
        const auto table = read_csv_file(c.holder_input);
        const auto cx = table.column("x");
        const auto cy = table.column("y");
        const auto cv = table.column("value");
        SampledFunction f;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            f.points.push_back({table.number(i, cx), table.number(i, cy)});
            f.values.push_back(table.number(i, cv));
        }
        if (f.points.size() < 3) throw ConfigError("holder.input", "needs at least three samples");
        spacing = median_spacing(f.points);
        out.fit = holder_fit(f, spacing, o);
        source = c.holder_input;
        points = f.points.size();
    } else {
        const auto s = solve_configured(c, false);
        out.fit = holder_fit(s.solution.u, o);
        source = "solve";
        points = s.grid->num_nodes();
        spacing = s.grid->h();
    }
    log << "beta_hat = " << out.fit.beta_hat << " (r^2 = " << out.fit.fit_r2 << ") over [" << out.fit.r_min << ", "
        << out.fit.r_max << "]\n";
    out.summary = {summary_header(Command::holder_fit),
                   {source, num(points), num(spacing), num(out.fit.r_min), num(out.fit.r_max),
                    num(out.fit.beta_hat), num(out.fit.seminorm_hat), num(out.fit.fit_r2),
                    out.fit.degenerate ? "true" : "false"}};
    return out;
}

void write_summary(const RunConfig& c, const std::string& suffix, const Summary& s, std::vector<std::string>& files,
                   const std::vector<std::pair<std::string, std::string>>& extra = {})
{
    Artifact a(c, suffix, files);
    write_provenance(a.stream(), c, extra);
    a.row(s.header);
    a.row(s.values);
}

int run_suite(const RunConfig& c, std::ostream& log, std::vector<std::string>& files)
{
    SuiteOptions o;
    o.on_result = [&](const CriterionResult& r) {
        log << (r.passed ? "PASS " : "FAIL ") << std::setw(2) << r.id << ' ' << r.name << "  value=" << r.value
            << " limit=" << r.limit << "  (" << std::fixed << std::setprecision(1) << r.seconds << " s)  "
            << std::defaultfloat << std::setprecision(6) << r.detail << '\n';
    };
    const auto results = run_acceptance_suite(o);
    Artifact a(c, "suite", files);
    write_provenance(a.stream(), c);
    a.row({"criterion", "name", "status", "value", "limit", "detail"});
    int failed = 0;
    for (const auto& r : results) {
        a.row({num(r.id), r.name, r.passed ? "pass" : "fail", num(r.value), num(r.limit), r.detail});
        failed += r.passed ? 0 : 1;
    }
    log << (results.size() - static_cast<std::size_t>(failed)) << "/" << results.size() << " criteria passed\n";
    return failed == 0 ? exit_ok : exit_suite_failure;
}

std::string sweep_key(const std::string& parameter)
{
    if (parameter == "resolution") return "domain.resolution";
    return "coefficients." + parameter;
}

std::string sweep_value_text(const std::string& parameter, double v)
{
    if (parameter == "resolution" && v == std::floor(v) && std::abs(v) < 1e9) {
        return std::to_string(static_cast<long long>(v));
    }
    return num(v);
}

int run_sweep(const RunConfig& c, std::ostream& log, std::vector<std::string>& files)
{
    const std::size_t n = c.sweep_values.size();
    std::vector<Summary> rows(n);
    std::vector<std::string> status(n, "ok");
    std::vector<std::string> message(n);
    std::vector<std::ostringstream> logs(n);

#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        const auto k = static_cast<std::size_t>(i);
        try {
            ConfigSource src = c.source;
            src.set(sweep_key(c.sweep_parameter), sweep_value_text(c.sweep_parameter, c.sweep_values[k]));
            rows[k] = run_summary(make_run_config(src, c.sweep_command), logs[k]);
        } catch (const ConfigError& e) {
            status[k] = "config_error";
            message[k] = e.what();
        } catch (const NonContractiveError& e) {
            status[k] = "non_contractive";
            message[k] = e.what();
        } catch (const FredholmCaseOneError& e) {
            status[k] = "fredholm_case_one";
            message[k] = e.what();
        } catch (const std::exception& e) {
            status[k] = "solver_failure";
            message[k] = e.what();
        }
    }

    const auto header = summary_header(c.sweep_command);
    std::size_t error_col = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == "error") error_col = j;
    }
    const bool orders = c.sweep_parameter == "resolution" && error_col < header.size();

    Artifact a(c, "sweep", files);
    write_provenance(a.stream(), c, {{"sweep", c.sweep_parameter + " over " + num(n) + " values"}});
    Row head{"parameter", "value", "status", "message"};
    head.insert(head.end(), header.begin(), header.end());
    if (orders) head.push_back("observed_order");
    a.row(head);

    double prev_error = std::nan("");
    double prev_res = std::nan("");
    for (std::size_t k = 0; k < n; ++k) {
        log << logs[k].str();
        log << c.sweep_parameter << " = " << num(c.sweep_values[k]) << ": " << status[k]
            << (message[k].empty() ? "" : " (" + message[k] + ")") << '\n';
        Row row{c.sweep_parameter, num(c.sweep_values[k]), status[k], message[k]};
        if (status[k] == "ok") {
            row.insert(row.end(), rows[k].values.begin(), rows[k].values.end());
        } else {
            row.resize(row.size() + header.size(), "nan");
        }
        if (orders) {
            double order = std::nan("");
            if (status[k] == "ok") {
                const double err = std::stod(rows[k].values[error_col]);
                const double res = c.sweep_values[k];
                if (std::isfinite(prev_error) && err > 0.0 && res != prev_res) {
                    order = std::log(prev_error / err) / std::log(res / prev_res);
                }
                prev_error = err;
                prev_res = res;
            }
            row.push_back(num(order));
        }
        a.row(row);
    }
    return exit_ok;
}

}  // namespace

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e)) return exit_config_error;
    if (dynamic_cast<const NonContractiveError*>(&e)) return exit_non_contractive;
    if (dynamic_cast<const FredholmCaseOneError*>(&e)) return exit_fredholm;
    return exit_solver_failure;
}

std::vector<std::string> summary_header(Command command)
{
    switch (command) {
    case Command::solve:
        return {"domain",         "resolution",  "h",          "beta",        "q",
                "b_scale",        "c_scale",     "strategy",   "converged",   "iterations",
                "contraction_ratio_hat",         "residual",   "series_vs_direct_gap",
                "condition_estimate",            "drift_norm", "potential_norm",
                "data_norm",      "empirical_C2", "sup_norm",  "min_value",   "max_value",
                "beta_hat",       "seminorm_hat", "fit_r2",    "solution_holder_norm",
                "trace_holder_norm",             "estimate_ratio",           "error"};
    case Command::morrey_norm:
        return {"domain", "resolution", "h", "q", "depth", "value", "argmax_x", "argmax_y", "argmax_radius",
                "balls_scanned", "total_variation"};
    case Command::capacity:
        return {"inner_radius", "outer_radius", "resolution", "value", "analytic", "relative_error", "unknowns"};
    case Command::cdc_check:
        return {"domain", "resolution", "h", "points", "radii", "gamma_hat", "certified_min_radius",
                "certified_max_radius", "warnings"};
    case Command::holder_fit:
        return {"source", "points", "spacing", "r_min", "r_max", "beta_hat", "seminorm_hat", "fit_r2", "degenerate"};
    case Command::suite:
    case Command::sweep:
        break;
    }
    throw ConfigError("sweep.command", std::string(to_string(command)) + " has no summary row");
}

Summary run_summary(const RunConfig& c, std::ostream& log)
{
    switch (c.command) {
    case Command::solve: return solve_summary(c, solve_configured(c, true));
    case Command::morrey_norm: return morrey_summary(c, log);
    case Command::capacity: return capacity_summary(c, log);
    case Command::cdc_check: return cdc_outcome(c, log).summary;
    case Command::holder_fit: return holder_outcome(c, log).summary;
    case Command::suite:
    case Command::sweep:
        break;
    }
    throw ConfigError("command", std::string(to_string(c.command)) + " has no summary row");
}

void write_provenance(std::ostream& out, const RunConfig& config,
                      const std::vector<std::pair<std::string, std::string>>& extra)
{
    out << "# elab " << version_string << '\n';
    out << "# command: " << to_string(config.command) << '\n';
    out << "# timestamp: " << timestamp() << '\n';
    out << "# config: " << config.source.origin() << '\n';
    for (const auto& [key, value] : config.source.entries()) out << "# " << key << " = " << value << '\n';
    const double h = Domain::from_name(config.domain).characteristic_size() / config.resolution;
    out << "# h = " << num(h) << '\n';
    out << "# q = " << num(config.q()) << '\n';
    for (const auto& [key, value] : extra) out << "# " << key << " = " << value << '\n';
}

int run(const RunConfig& c, std::ostream& log)
{
    std::vector<std::string> files;
    int code = exit_ok;
    switch (c.command) {
    case Command::solve: {
        const auto s = solve_configured(c, true);
        const auto& r = s.solution.report;
        log << "solved " << c.domain << " at resolution " << c.resolution << " with " << to_string(r.mode)
            << ": sup = " << r.sup_norm << ", beta_hat = " << r.holder_fit.beta_hat << ", residual = " << r.residual
            << '\n';
        write_summary(c, "solve", solve_summary(c, s), files);
        if (!r.iterate_norms.empty()) {
            Artifact a(c, "iterates", files);
            write_provenance(a.stream(), c);
            a.row({"k", "morrey_norm"});
            for (std::size_t k = 0; k < r.iterate_norms.size(); ++k) a.row({num(k), num(r.iterate_norms[k])});
        }
        if (c.write_field) {
            Artifact a(c, "field", files);
            write_provenance(a.stream(), c);
            write_field_csv(a.stream(), s.solution.u);
        }
        break;
    }
    case Command::morrey_norm: {
        const auto s = morrey_summary(c, log);
        write_summary(c, "morrey", s, files);
        break;
    }
    case Command::capacity: write_summary(c, "capacity", capacity_summary(c, log), files); break;
    case Command::cdc_check: {
        const auto out = cdc_outcome(c, log);
        write_summary(c, "cdc_summary", out.summary, files);
        Artifact a(c, "cdc", files);
        write_provenance(a.stream(), c);
        a.row({"point", "arclength", "x", "y", "radius", "ratio", "warning"});
        for (std::size_t i = 0; i < out.sweep.points.size(); ++i) {
            const auto& p = out.sweep.points[i];
            for (std::size_t k = 0; k < p.radii.size(); ++k) {
                a.row({num(i), num(p.arclength), num(p.xi.x), num(p.xi.y), num(p.radii[k]), num(p.ratios[k]),
                       p.warnings[k] ? "true" : "false"});
            }
        }
        break;
    }
    case Command::holder_fit: {
        const auto out = holder_outcome(c, log);
        write_summary(c, "holder", out.summary, files);
        Artifact a(c, "holder_scales", files);
        write_provenance(a.stream(), c);
        a.row({"radius", "distance", "modulus"});
        for (std::size_t k = 0; k < out.fit.radii.size(); ++k) {
            a.row({num(out.fit.radii[k]), num(out.fit.distances[k]), num(out.fit.modulus[k])});
        }
        break;
    }
    case Command::suite: code = run_suite(c, log, files); break;
    case Command::sweep: code = run_sweep(c, log, files); break;
    }
    for (const auto& f : files) log << "wrote " << f << '\n';
    return code;
}

}  // namespace elab
