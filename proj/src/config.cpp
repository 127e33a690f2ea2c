#include "elab/config.hpp"

#include "elab/csv.hpp"
#include "elab/errors.hpp"
#include "elab/expression.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace elab {

namespace {

struct KeyDefault {
    const char* key;
    const char* value;
};

// Canonical order of the echo block.
constexpr KeyDefault key_defaults[] = {
    {"domain.preset", "unit_square"},
    {"domain.resolution", "128"},
    {"coefficients.beta", "0.5"},
    {"coefficients.b_scale", "0"},
    {"coefficients.c_scale", "0"},
    {"coefficients.direction", "1, 0"},
    {"data.nu", "lebesgue"},
    {"data.g", "zero"},
    {"data.reference", ""},
    {"solver.strategy", "direct"},
    {"solver.tol", "1e-12"},
    {"solver.max_iter", "200"},
    {"solver.compare_direct", "false"},
    {"solver.condition_limit", "1e12"},
    {"morrey.depth", "6"},
    {"morrey.min_radius_cells", "4"},
    {"capacity.inner_radius", "0.5"},
    {"capacity.outer_radius", "1"},
    {"capacity.resolution", "128"},
    {"cdc.points", "16"},
    {"cdc.radii", "0.05, 0.1, 0.2"},
    {"cdc.resolution", "128"},
    {"holder.r_min", "0"},
    {"holder.r_max", "0"},
    {"holder.scales", "10"},
    {"holder.input", ""},
    {"holder.pair_budget", "100000"},
    {"holder.seed", "1"},
    {"sweep.command", "solve"},
    {"sweep.parameter", ""},
    {"sweep.values", ""},
    {"output.prefix", "elab"},
    {"output.field", "false"},
};

class Reader {
public:
    explicit Reader(const ConfigSource& s) : s_(s) {}

    [[noreturn]] void fail(const std::string& key, const std::string& what) const
    {
        throw ConfigError(s_.where(key), what + " (got '" + s_.get(key) + "')");
    }

    double number(const std::string& key) const
    {
        const std::string& text = s_.get(key);
        try {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used == text.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        fail(key, "expected a finite number");
    }

    long long integer(const std::string& key) const
    {
        const std::string& text = s_.get(key);
        try {
            std::size_t used = 0;
            const long long v = std::stoll(text, &used);
            if (used == text.size()) return v;
        } catch (const std::exception&) {
        }
        fail(key, "expected an integer");
    }

    bool boolean(const std::string& key) const
    {
        const std::string& t = s_.get(key);
        if (t == "true" || t == "yes" || t == "on" || t == "1") return true;
        if (t == "false" || t == "no" || t == "off" || t == "0") return false;
        fail(key, "expected true or false");
    }

    std::vector<double> numbers(const std::string& key) const
    {
        try {
            return parse_number_list(s_.get(key));
        } catch (const Error& e) {
            fail(key, e.what());
        }
    }

    const std::string& text(const std::string& key) const { return s_.get(key); }

private:
    const ConfigSource& s_;
};

bool power_of_two(long long v) { return v > 0 && (v & (v - 1)) == 0; }

std::string after_colon(const std::string& descriptor, std::size_t colon)
{
    return trim(std::string_view(descriptor).substr(colon + 1));
}

std::string descriptor_head(const std::string& descriptor, std::size_t& colon)
{
    colon = descriptor.find(':');
    return trim(std::string_view(descriptor).substr(0, colon));
}

}  // namespace

ConfigSource ConfigSource::defaults()
{
    ConfigSource s;
    for (const auto& kd : key_defaults) s.values_[kd.key] = kd.value;
    return s;
}

ConfigSource ConfigSource::parse(std::istream& in, const std::string& origin)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(origin + " line " + std::to_string(e.line()), e.message());
    }
    ConfigSource s = defaults();
    s.origin_ = origin;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            throw ConfigError(origin + " key " + section, "keys must live inside a [section]");
        }
        for (const auto& [key, value] : body) s.set(section + "." + key, trim(value.data()));
    }
    return s;
}

ConfigSource ConfigSource::load(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open config file");
    return parse(in, path);
}

void ConfigSource::set(const std::string& key, const std::string& value)
{
    const auto it = values_.find(key);
    if (it == values_.end()) {
        const auto dot = key.find('.');
        throw ConfigError(origin_ + " [" + key.substr(0, dot) + "] " + (dot == std::string::npos ? "" : key.substr(dot + 1)),
                          "unknown key");
    }
    it->second = value;
}

const std::string& ConfigSource::get(const std::string& key) const
{
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "unknown key");
    return it->second;
}

std::string ConfigSource::where(const std::string& key) const
{
    const auto dot = key.find('.');
    return origin_ + " [" + key.substr(0, dot) + "] " + key.substr(dot + 1);
}

std::vector<std::pair<std::string, std::string>> ConfigSource::entries() const
{
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& kd : key_defaults) out.emplace_back(kd.key, values_.at(kd.key));
    return out;
}

const char* to_string(Command c)
{
    switch (c) {
    case Command::solve: return "solve";
    case Command::morrey_norm: return "morrey-norm";
    case Command::capacity: return "capacity";
    case Command::cdc_check: return "cdc-check";
    case Command::holder_fit: return "holder-fit";
    case Command::suite: return "suite";
    case Command::sweep: return "sweep";
    }
    return "?";
}

Command command_from_string(const std::string& name)
{
    for (Command c : {Command::solve, Command::morrey_norm, Command::capacity, Command::cdc_check,
                      Command::holder_fit, Command::suite, Command::sweep}) {
        if (name == to_string(c)) return c;
    }
    throw ConfigError("command", "unknown command '" + name + "'");
}

PerturbationOptions RunConfig::perturbation_options() const
{
    PerturbationOptions o;
    o.beta = beta;
    o.tol = tol;
    o.max_iter = max_iter;
    o.compare_direct = compare_direct;
    o.condition_limit = condition_limit;
    o.scan.depth = scan_depth;
    o.scan.min_radius_cells = min_radius_cells;
    o.holder.r_min = fit_r_min;
    o.holder.r_max = fit_r_max;
    o.holder.scales = fit_scales;
    o.holder_norm.pair_budget = pair_budget;
    o.holder_norm.seed = seed;
    return o;
}

RunConfig make_run_config(const ConfigSource& source, Command command)
{
    const Reader r(source);
    RunConfig c;
    c.command = command;
    c.source = source;

    c.domain = r.text("domain.preset");
    try {
        (void)Domain::from_name(c.domain);
    } catch (const Error&) {
        r.fail("domain.preset", "expected unit_square, unit_disk, l_shape, slit_square or annulus");
    }
    const long long res = r.integer("domain.resolution");
    if (!power_of_two(res) || res < 8 || res > 1024) r.fail("domain.resolution", "expected a power of two in [8, 1024]");
    c.resolution = static_cast<int>(res);

    c.beta = r.number("coefficients.beta");
    if (!(c.beta > 0.0 && c.beta < 1.0)) r.fail("coefficients.beta", "expected 0 < beta < 1");
    c.b_scale = r.number("coefficients.b_scale");
    if (c.b_scale < 0.0) r.fail("coefficients.b_scale", "expected b_scale >= 0");
    c.c_scale = r.number("coefficients.c_scale");
    if (c.c_scale < 0.0) r.fail("coefficients.c_scale", "expected c_scale >= 0 (mu must be nonnegative)");
    const auto dir = r.numbers("coefficients.direction");
    if (dir.size() != 2 || std::hypot(dir[0], dir[1]) == 0.0) {
        r.fail("coefficients.direction", "expected two numbers forming a nonzero vector");
    }
    c.direction = {dir[0], dir[1]};

    c.nu = r.text("data.nu");
    c.g = r.text("data.g");
    c.reference = r.text("data.reference");
    // Parse descriptors now so mistakes surface as config errors.
    try {
        (void)build_measure(c.nu, build_grid(Domain::unit_square(), 8));
    } catch (const ConfigError&) {
        // atoms outside the probe grid are checked against the real grid later
    } catch (const Error& e) {
        r.fail("data.nu", e.what());
    }
    try {
        (void)trace_function(c.g);
    } catch (const Error& e) {
        r.fail("data.g", e.what());
    }
    if (!c.reference.empty()) {
        try {
            (void)reference_function(c.reference);
        } catch (const Error& e) {
            r.fail("data.reference", e.what());
        }
    }

    try {
        c.strategy = strategy_from_string(r.text("solver.strategy"));
    } catch (const Error&) {
        r.fail("solver.strategy", "expected neumann or direct");
    }
    c.tol = r.number("solver.tol");
    if (!(c.tol > 0.0)) r.fail("solver.tol", "expected tol > 0");
    const long long it = r.integer("solver.max_iter");
    if (it < 1 || it > 100000) r.fail("solver.max_iter", "expected 1 <= max_iter <= 100000");
    c.max_iter = static_cast<int>(it);
    c.compare_direct = r.boolean("solver.compare_direct");
    c.condition_limit = r.number("solver.condition_limit");
    if (!(c.condition_limit > 1.0)) r.fail("solver.condition_limit", "expected condition_limit > 1");

    const long long depth = r.integer("morrey.depth");
    if (depth < 0 || depth > 30) r.fail("morrey.depth", "expected 0 <= depth <= 30");
    c.scan_depth = static_cast<int>(depth);
    c.min_radius_cells = r.number("morrey.min_radius_cells");
    if (c.min_radius_cells < 0.0) r.fail("morrey.min_radius_cells", "expected a nonnegative cell count");

    c.inner_radius = r.number("capacity.inner_radius");
    c.outer_radius = r.number("capacity.outer_radius");
    if (c.inner_radius < 0.0) r.fail("capacity.inner_radius", "expected inner_radius >= 0");
    if (!(c.outer_radius > c.inner_radius)) r.fail("capacity.outer_radius", "expected outer_radius > inner_radius");
    const long long cres = r.integer("capacity.resolution");
    if (cres < 8 || cres > 4096) r.fail("capacity.resolution", "expected 8 <= resolution <= 4096");
    c.capacity_resolution = static_cast<int>(cres);

    const long long pts = r.integer("cdc.points");
    if (pts < 4 || pts > 4096) r.fail("cdc.points", "expected 4 <= points <= 4096");
    c.cdc_points = static_cast<int>(pts);
    c.cdc_radii = r.numbers("cdc.radii");
    if (c.cdc_radii.empty()) r.fail("cdc.radii", "expected at least one radius");
    for (double v : c.cdc_radii) {
        if (!(v > 0.0)) r.fail("cdc.radii", "radii must be positive");
    }
    const long long cdcres = r.integer("cdc.resolution");
    if (cdcres < 8 || cdcres > 4096) r.fail("cdc.resolution", "expected 8 <= resolution <= 4096");
    c.cdc_resolution = static_cast<int>(cdcres);

    c.fit_r_min = r.number("holder.r_min");
    c.fit_r_max = r.number("holder.r_max");
    if (c.fit_r_min < 0.0 || c.fit_r_max < 0.0) r.fail("holder.r_min", "fit radii must be nonnegative");
    if ((c.fit_r_min > 0.0 || c.fit_r_max > 0.0) && !(c.fit_r_min < c.fit_r_max)) {
        r.fail("holder.r_max", "expected r_min < r_max (or both 0 for the default range)");
    }
    const long long scales = r.integer("holder.scales");
    if (scales < 3 || scales > 200) r.fail("holder.scales", "expected 3 <= scales <= 200");
    c.fit_scales = static_cast<int>(scales);
    c.holder_input = r.text("holder.input");
    const long long budget = r.integer("holder.pair_budget");
    if (budget < 1) r.fail("holder.pair_budget", "expected a positive pair budget");
    c.pair_budget = static_cast<std::size_t>(budget);
    const long long seed = r.integer("holder.seed");
    if (seed < 0) r.fail("holder.seed", "expected a nonnegative seed");
    c.seed = static_cast<std::uint64_t>(seed);

    try {
        c.sweep_command = command_from_string(r.text("sweep.command"));
    } catch (const ConfigError&) {
        r.fail("sweep.command", "unknown command");
    }
    if (c.sweep_command == Command::suite || c.sweep_command == Command::sweep) {
        r.fail("sweep.command", "suite and sweep cannot be swept");
    }
    c.sweep_parameter = r.text("sweep.parameter");
    c.sweep_values = r.numbers("sweep.values");
    if (command == Command::sweep) {
        static const char* allowed[] = {"b_scale", "c_scale", "resolution", "beta"};
        if (std::find_if(std::begin(allowed), std::end(allowed),
                         [&](const char* a) { return c.sweep_parameter == a; }) == std::end(allowed)) {
            r.fail("sweep.parameter", "expected b_scale, c_scale, resolution or beta");
        }
    }

    c.prefix = r.text("output.prefix");
    if (c.prefix.empty()) r.fail("output.prefix", "expected a non-empty path prefix");
    c.write_field = r.boolean("output.field");
    return c;
}

std::vector<double> parse_number_list(const std::string& text)
{
    std::string spaced = text;
    std::replace(spaced.begin(), spaced.end(), ',', ' ');
    std::istringstream in(spaced);
    std::vector<double> out;
    std::string token;
    while (in >> token) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(token, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != token.size() || !std::isfinite(v)) throw Error("'" + token + "' is not a number");
        out.push_back(v);
    }
    return out;
}

DiscreteMeasure build_measure(const std::string& descriptor, GridPtr grid)
{
    std::size_t colon = 0;
    const std::string head = descriptor_head(descriptor, colon);
    if (colon == std::string::npos) {
        if (head == "lebesgue") return DiscreteMeasure::lebesgue(grid);
        if (head == "zero") return DiscreteMeasure(grid);
        throw Error("unknown measure '" + descriptor + "' (lebesgue, zero, density:, atoms:)");
    }
    const std::string body = after_colon(descriptor, colon);
    if (head == "density") {
        const Expression f(body);
        return DiscreteMeasure::with_density(grid, [&](Vec2 p, double d) { return f(p.x, p.y, d); });
    }
    if (head == "atoms") {
        std::vector<double> mass(grid->num_interior(), 0.0);
        for (const auto& item : split(body, ';')) {
            if (item.empty()) continue;
            const auto v = parse_number_list(item);
            if (v.size() != 3) throw Error("atom '" + item + "' needs x y mass");
            const Vec2 p{v[0], v[1]};
            if (!grid->domain().contains(p)) {
                throw ConfigError("data.nu", "atom at (" + format_number(p.x) + ", " + format_number(p.y) +
                                                 ") lies outside the domain");
            }
            mass[static_cast<std::size_t>(grid->nearest_interior(p))] += v[2];
        }
        return DiscreteMeasure(grid, std::move(mass));
    }
    throw Error("unknown measure kind '" + head + "'");
}

PointFunction trace_function(const std::string& descriptor)
{
    std::size_t colon = 0;
    const std::string head = descriptor_head(descriptor, colon);
    if (colon == std::string::npos) {
        if (head == "zero") return [](Vec2) { return 0.0; };
        if (head == "im_sqrt") {
            // Branch cut along the positive x-axis, so the trace vanishes on both faces of the slit.
            return [](Vec2 p) {
                double t = std::atan2(p.y, p.x);
                if (t <= 0.0) t += 2.0 * std::numbers::pi;
                return std::sqrt(norm(p)) * std::sin(0.5 * t);
            };
        }
        throw Error("unknown trace '" + descriptor + "' (zero, constant:, im_sqrt, distance_power:, expression:)");
    }
    const std::string body = after_colon(descriptor, colon);
    if (head == "constant") {
        const auto v = parse_number_list(body);
        if (v.size() != 1) throw Error("constant: expects one number");
        return [c = v[0]](Vec2) { return c; };
    }
    if (head == "distance_power") {
        const auto v = parse_number_list(body);
        if (v.size() != 3 || !(v[0] > 0.0)) throw Error("distance_power: expects alpha > 0, x0, y0");
        return [a = v[0], p0 = Vec2{v[1], v[2]}](Vec2 p) { return std::pow(norm(p - p0), a); };
    }
    if (head == "expression") return reference_function(body);
    throw Error("unknown trace kind '" + head + "'");
}

PointFunction reference_function(const std::string& expression)
{
    const Expression f(expression);
    if (f.uses_distance()) throw Error("boundary and reference expressions cannot use d");
    return [f](Vec2 p) { return f(p.x, p.y); };
}

}  // namespace elab
