// Command-line front end: elab <command> [--config FILE] [overrides...]

#include "elab/config.hpp"
#include "elab/csv.hpp"
#include "elab/errors.hpp"
#include "elab/runner.hpp"
#include "elab/version.hpp"

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"Numerical experiments for Dirichlet problems with singular lower-order coefficients"};
    app.set_version_flag("--version", std::string(elab::version_string));

    std::string command;
    std::string config_path;
    std::string out;
    std::string strategy;
    std::string domain;
    std::string radii;
    std::string input;
    std::vector<double> range;
    std::vector<std::string> overrides;
    int points = 0;
    int threads = 0;

    app.add_option("command", command, "solve | morrey-norm | capacity | cdc-check | holder-fit | suite | sweep")
        ->required()
        ->check(CLI::IsMember({"solve", "morrey-norm", "capacity", "cdc-check", "holder-fit", "suite", "sweep"}));
    app.add_option("-c,--config", config_path, "INI experiment file")->check(CLI::ExistingFile);
    app.add_option("-o,--out", out, "output prefix; files are written as PREFIX_<table>.csv");
    app.add_option("-j,--threads", threads, "OpenMP threads (0 keeps the runtime default)")->check(CLI::NonNegativeNumber);
    app.add_option("--strategy", strategy, "neumann | direct")->check(CLI::IsMember({"neumann", "direct"}));
    app.add_option("--domain", domain, "domain preset");
    app.add_option("--points", points, "boundary points for cdc-check")->check(CLI::PositiveNumber);
    app.add_option("--radii", radii, "comma separated radii for cdc-check");
    app.add_option("--in", input, "CSV with x,y,value columns for holder-fit")->check(CLI::ExistingFile);
    app.add_option("--range", range, "holder-fit radius range R_MIN R_MAX")->expected(2);
    app.add_option("--set", overrides, "override a config key: section.key=value (repeatable)");

    CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        auto source = config_path.empty() ? elab::ConfigSource::defaults() : elab::ConfigSource::load(config_path);
        if (!out.empty()) source.set("output.prefix", out);
        if (!strategy.empty()) source.set("solver.strategy", strategy);
        if (!domain.empty()) source.set("domain.preset", domain);
        if (points > 0) source.set("cdc.points", std::to_string(points));
        if (!radii.empty()) source.set("cdc.radii", radii);
        if (!input.empty()) source.set("holder.input", input);
        if (range.size() == 2) {
            source.set("holder.r_min", elab::format_number(range[0]));
            source.set("holder.r_max", elab::format_number(range[1]));
        }
        for (const auto& o : overrides) {
            const auto eq = o.find('=');
            if (eq == std::string::npos) throw elab::ConfigError("--set " + o, "expected section.key=value");
            source.set(elab::trim(o.substr(0, eq)), elab::trim(o.substr(eq + 1)));
        }
        const auto config = elab::make_run_config(source, elab::command_from_string(command));
        return elab::run(config, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "elab: " << e.what() << '\n';
        return elab::exit_code_for(e);
    }
}
