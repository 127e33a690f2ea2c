#include "elab/config.hpp"
#include "elab/csv.hpp"
#include "elab/errors.hpp"
#include "elab/expression.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace elab;

namespace {

ConfigSource parse(const std::string& text)
{
    std::istringstream in(text);
    return ConfigSource::parse(in, "test.ini");
}

std::string config_error(const std::string& text, Command command = Command::solve)
{
    try {
        (void)make_run_config(parse(text), command);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Expression, ArithmeticAndPrecedence)
{
    EXPECT_DOUBLE_EQ(Expression("1 + 2 * 3")(0, 0), 7.0);
    EXPECT_DOUBLE_EQ(Expression("(1 + 2) * 3")(0, 0), 9.0);
    EXPECT_DOUBLE_EQ(Expression("2 ^ 3 ^ 2")(0, 0), 512.0);
    EXPECT_DOUBLE_EQ(Expression("-x^2")(3, 0), -9.0);
    EXPECT_DOUBLE_EQ(Expression("8 / 4 / 2")(0, 0), 1.0);
    EXPECT_DOUBLE_EQ(Expression("1.5e1 - .5")(0, 0), 14.5);
}

TEST(Expression, VariablesAndFunctions)
{
    EXPECT_DOUBLE_EQ(Expression("r")(3, 4), 5.0);
    EXPECT_DOUBLE_EQ(Expression("x*y + d")({2, 3, 0.5}), 6.5);
    EXPECT_NEAR(Expression("sin(pi*x) + cos(0)")(0.5, 0), 2.0, 1e-15);
    EXPECT_DOUBLE_EQ(Expression("max(x, y) - min(x, y)")(2, 5), 3.0);
    EXPECT_DOUBLE_EQ(Expression("pow(2, 10)")(0, 0), 1024.0);
    EXPECT_DOUBLE_EQ(Expression("atan2(1, 1)")(0, 0), std::numbers::pi / 4);
    EXPECT_DOUBLE_EQ(Expression("abs(x) + sqrt(y) + exp(0) + log(e)")(-1, 4), 5.0);
    EXPECT_TRUE(Expression("1/d").uses_distance());
    EXPECT_FALSE(Expression("x").uses_distance());
}

TEST(Expression, ParseErrorsNameTheColumn)
{
    auto message = [](const std::string& s) {
        try {
            (void)Expression(s);
        } catch (const Error& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    EXPECT_NE(message("1 +").find("column 4"), std::string::npos);
    EXPECT_NE(message("foo(x)").find("unknown function"), std::string::npos);
    EXPECT_NE(message("z + 1").find("unknown name"), std::string::npos);
    EXPECT_NE(message("sin(x, y)").find("one argument"), std::string::npos);
    EXPECT_NE(message("(x").find("expected ')'"), std::string::npos);
    EXPECT_NE(message("x y").find("unexpected"), std::string::npos);
    EXPECT_FALSE(message("").empty());
}

TEST(ConfigSource, DefaultsCoverEveryKeyInOrder)
{
    const auto e = ConfigSource::defaults().entries();
    ASSERT_FALSE(e.empty());
    EXPECT_EQ(e.front().first, "domain.preset");
    EXPECT_EQ(e.back().first, "output.field");
    const auto c = make_run_config(ConfigSource::defaults(), Command::solve);
    EXPECT_EQ(c.domain, "unit_square");
    EXPECT_EQ(c.resolution, 128);
    EXPECT_DOUBLE_EQ(c.q(), 4.0 / 3.0);
}

TEST(ConfigSource, ParsesSectionsAndComments)
{
    const auto c = make_run_config(parse("; experiment\n[domain]\npreset = l_shape\nresolution = 64\n"
                                         "[coefficients]\nbeta = 0.25\nb_scale = 0.1\ndirection = 0, 2\n"
                                         "[data]\nnu = density: 1 + x*y\ng = distance_power: 0.5, 0.5, 0\n"
                                         "[solver]\nstrategy = neumann\ncompare_direct = yes\n"
                                         "[cdc]\nradii = 0.1 0.2\n"),
                                   Command::solve);
    EXPECT_EQ(c.domain, "l_shape");
    EXPECT_EQ(c.resolution, 64);
    EXPECT_DOUBLE_EQ(c.beta, 0.25);
    EXPECT_DOUBLE_EQ(c.q(), 2.0 / 1.75);
    EXPECT_EQ(c.direction, (Vec2{0, 2}));
    EXPECT_EQ(c.strategy, Strategy::neumann);
    EXPECT_TRUE(c.compare_direct);
    EXPECT_EQ(c.cdc_radii, (std::vector<double>{0.1, 0.2}));
    EXPECT_EQ(c.source.get("data.nu"), "density: 1 + x*y");
}

TEST(ConfigSource, ErrorsNameLineOrField)
{
    try {
        (void)parse("[domain]\npreset = unit_square\nthis line is broken\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
    try {
        (void)parse("[domain]\nshape = disk\n");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("[domain] shape"), std::string::npos) << e.what();
    }
    EXPECT_THROW((void)parse("[nowhere]\nkey = 1\n"), ConfigError);
    EXPECT_THROW((void)parse("[domain]\npreset = a\npreset = b\n"), ConfigError);
}

TEST(RunConfig, ValidationRejectsOutOfRangeFields)
{
    EXPECT_NE(config_error("[coefficients]\nbeta = 1\n").find("[coefficients] beta"), std::string::npos);
    EXPECT_NE(config_error("[coefficients]\nbeta = 0\n"), "");
    EXPECT_NE(config_error("[domain]\nresolution = 100\n").find("power of two"), std::string::npos);
    EXPECT_NE(config_error("[domain]\nresolution = 4\n"), "");
    EXPECT_NE(config_error("[domain]\nresolution = 2048\n"), "");
    EXPECT_NE(config_error("[domain]\nresolution = abc\n").find("integer"), std::string::npos);
    EXPECT_NE(config_error("[domain]\npreset = torus\n"), "");
    EXPECT_NE(config_error("[coefficients]\nc_scale = -1\n"), "");
    EXPECT_NE(config_error("[coefficients]\ndirection = 0 0\n"), "");
    EXPECT_NE(config_error("[data]\nnu = density: x +\n").find("[data] nu"), std::string::npos);
    EXPECT_NE(config_error("[data]\ng = im_cbrt\n"), "");
    EXPECT_NE(config_error("[data]\nreference = 1/d\n"), "");
    EXPECT_NE(config_error("[solver]\nstrategy = gmres\n"), "");
    EXPECT_NE(config_error("[solver]\ntol = 0\n"), "");
    EXPECT_NE(config_error("[solver]\ncompare_direct = maybe\n"), "");
    EXPECT_NE(config_error("[capacity]\ninner_radius = 2\n"), "");
    EXPECT_NE(config_error("[cdc]\npoints = 3\n"), "");
    EXPECT_NE(config_error("[cdc]\nradii = 0.1, -1\n"), "");
    EXPECT_NE(config_error("[holder]\nr_min = 0.3\nr_max = 0.1\n"), "");
    EXPECT_NE(config_error("[sweep]\ncommand = suite\n"), "");
    EXPECT_NE(config_error("[sweep]\nparameter = tol\n", Command::sweep), "");
    EXPECT_EQ(config_error("[sweep]\nparameter = tol\n", Command::solve), "");
    EXPECT_NE(config_error("[output]\nprefix =\n"), "");
}

TEST(RunConfig, OverridesReplaceValues)
{
    auto src = ConfigSource::defaults();
    src.set("coefficients.b_scale", "0.3");
    EXPECT_DOUBLE_EQ(make_run_config(src, Command::solve).b_scale, 0.3);
    EXPECT_THROW(src.set("coefficients.q", "2"), ConfigError);
}

TEST(RunConfig, PerturbationOptionsFollowFields)
{
    auto src = ConfigSource::defaults();
    src.set("solver.tol", "1e-9");
    src.set("morrey.depth", "3");
    src.set("holder.r_min", "0.1");
    src.set("holder.r_max", "0.3");
    const auto o = make_run_config(src, Command::solve).perturbation_options();
    EXPECT_DOUBLE_EQ(o.tol, 1e-9);
    EXPECT_EQ(o.scan.depth, 3);
    EXPECT_DOUBLE_EQ(o.holder.r_min, 0.1);
    EXPECT_DOUBLE_EQ(o.holder.r_max, 0.3);
}

TEST(Descriptors, Measures)
{
    const auto g = build_grid(Domain::unit_square(), 16);
    // Interior cells cover the square minus a boundary strip of width h/2.
    const double covered = std::pow(1.0 - g->h(), 2);
    EXPECT_NEAR(build_measure("lebesgue", g).total_mass(), covered, 1e-12);
    EXPECT_TRUE(build_measure("zero", g).is_zero());
    EXPECT_NEAR(build_measure("density: 2", g).total_mass(), 2.0 * covered, 1e-12);
    const auto atoms = build_measure("atoms: 0.5 0.5 1; 0.25 0.25 -2", g);
    EXPECT_DOUBLE_EQ(atoms.total_mass(), -1.0);
    EXPECT_DOUBLE_EQ(atoms.total_variation(), 3.0);
    EXPECT_THROW((void)build_measure("atoms: 2 2 1", g), ConfigError);
    EXPECT_THROW((void)build_measure("atoms: 0.5 0.5", g), Error);
    EXPECT_THROW((void)build_measure("gaussian", g), Error);
    EXPECT_THROW((void)build_measure("kernel: x", g), Error);
}

TEST(Descriptors, Traces)
{
    EXPECT_DOUBLE_EQ(trace_function("zero")({0.3, 0.2}), 0.0);
    EXPECT_DOUBLE_EQ(trace_function("constant: 2.5")({0.3, 0.2}), 2.5);
    EXPECT_DOUBLE_EQ(trace_function("distance_power: 0.5, 0.5, 0")({0.5, 4.0}), 2.0);
    EXPECT_DOUBLE_EQ(trace_function("expression: x + 2*y")({1, 1}), 3.0);
    const auto im = trace_function("im_sqrt");
    EXPECT_NEAR(im({0.0, 4.0}), std::sqrt(2.0), 1e-14);
    EXPECT_NEAR(im({0.5, 1e-300}), 0.0, 1e-12);
    EXPECT_NEAR(im({0.5, -1e-300}), 0.0, 1e-12);
    EXPECT_NEAR(im({-4.0, 0.0}), 2.0, 1e-14);
    EXPECT_THROW((void)trace_function("constant: 1 2"), Error);
    EXPECT_THROW((void)trace_function("distance_power: -1, 0, 0"), Error);
    EXPECT_THROW((void)trace_function("expression: d"), Error);
}

TEST(Descriptors, NumberLists)
{
    EXPECT_EQ(parse_number_list("1, 2 3,4"), (std::vector<double>{1, 2, 3, 4}));
    EXPECT_TRUE(parse_number_list("  ").empty());
    EXPECT_THROW((void)parse_number_list("1, two"), Error);
    EXPECT_THROW((void)parse_number_list("nan"), Error);
}

TEST(Csv, QuotedFieldsRoundTrip)
{
    std::ostringstream out;
    write_csv_row(out, {"a", "b, c", "say \"hi\""});
    std::istringstream in(out.str());
    const auto t = read_csv(in);
    EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b, c", "say \"hi\""}));
}

TEST(Commands, NamesRoundTrip)
{
    for (Command c : {Command::solve, Command::morrey_norm, Command::capacity, Command::cdc_check,
                      Command::holder_fit, Command::suite, Command::sweep}) {
        EXPECT_EQ(command_from_string(to_string(c)), c);
    }
    EXPECT_THROW((void)command_from_string("plot"), ConfigError);
}
