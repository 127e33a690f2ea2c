#pragma once

#include "elab/field.hpp"
#include "elab/geometry.hpp"
#include "elab/measure.hpp"
#include "elab/perturbation.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace elab {

/// Raw `section.key -> value` pairs of an INI experiment file layered over
/// the defaults.
class ConfigSource {
public:
    /// Every recognised key with its default value.
    static ConfigSource defaults();
    /// Parses INI text on top of the defaults. Malformed lines raise
    /// ConfigError naming the line; unknown keys name the key.
    static ConfigSource parse(std::istream& in, const std::string& origin = "<config>");
    static ConfigSource load(const std::string& path);

    /// Overrides one key ("section.key"); throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);
    [[nodiscard]] const std::string& get(const std::string& key) const;
    /// "<origin> [section] key" for error messages.
    [[nodiscard]] std::string where(const std::string& key) const;
    /// Keys in canonical order with their effective values.
    [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries() const;
    [[nodiscard]] const std::string& origin() const noexcept { return origin_; }

private:
    std::map<std::string, std::string> values_;
    std::string origin_ = "<defaults>";
};

enum class Command { solve, morrey_norm, capacity, cdc_check, holder_fit, suite, sweep };

const char* to_string(Command c);
Command command_from_string(const std::string& name);

/// Validated experiment description.
struct RunConfig {
    Command command = Command::solve;
    ConfigSource source = ConfigSource::defaults();

    std::string domain = "unit_square";
    int resolution = 128;

    double beta = 0.5;
    double b_scale = 0.0;
    double c_scale = 0.0;
    Vec2 direction{1.0, 0.0};

    std::string nu = "lebesgue";
    std::string g = "zero";
    /// Exact solution used for the error column; empty when unknown.
    std::string reference;

    Strategy strategy = Strategy::direct;
    double tol = 1e-12;
    int max_iter = 200;
    bool compare_direct = false;
    double condition_limit = 1e12;

    int scan_depth = 6;
    double min_radius_cells = 4.0;

    double inner_radius = 0.5;
    double outer_radius = 1.0;
    int capacity_resolution = 128;

    int cdc_points = 16;
    std::vector<double> cdc_radii{0.05, 0.1, 0.2};
    int cdc_resolution = 128;

    double fit_r_min = 0.0;
    double fit_r_max = 0.0;
    int fit_scales = 10;
    std::string holder_input;
    std::size_t pair_budget = 100000;
    std::uint64_t seed = 1;

    Command sweep_command = Command::solve;
    std::string sweep_parameter;
    std::vector<double> sweep_values;

    std::string prefix = "elab";
    bool write_field = false;

    /// Morrey index of the data space, 2/(2 - beta).
    [[nodiscard]] double q() const noexcept { return 2.0 / (2.0 - beta); }
    [[nodiscard]] PerturbationOptions perturbation_options() const;
};

/// Validates every field; errors carry the line or key of the offending entry.
RunConfig make_run_config(const ConfigSource& source, Command command);

using PointFunction = std::function<double(Vec2)>;

/// Data measure descriptor: `lebesgue`, `zero`, `density: <expr>` (x, y, r, d)
/// or `atoms: x y mass; x y mass; ...`.
DiscreteMeasure build_measure(const std::string& descriptor, GridPtr grid);
/// Boundary trace descriptor: `zero`, `constant: c`, `im_sqrt`,
/// `distance_power: alpha, x0, y0` (|p - p0|^alpha) or `expression: <expr>`.
PointFunction trace_function(const std::string& descriptor);
/// Reference solution: a bare expression in x, y, r.
PointFunction reference_function(const std::string& expression);

/// Numbers separated by commas and/or blanks.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace elab
