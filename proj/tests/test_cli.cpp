#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "hessianlab/expr.hpp"
#include "hessianlab/torusgrid.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hessianlab;
using json = nlohmann::json;

namespace {

const std::string bin = HESSIANLAB_CLI_BIN;

int run(const std::string& args) {
    int ret = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(ret);
}

std::string slurp(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::filesystem::path tmp_dir(const std::string& leaf) {
    auto p = std::filesystem::temp_directory_path() / ("hessianlab_cli_" + leaf);
    std::filesystem::remove_all(p);
    return p;
}

} // namespace

TEST_CASE("expression parsing") {
    TorusGrid g(1, 128);
    SUBCASE("zero") {
        ScalarField f = parse_field_expression("0", g);
        for (double v : f.v) CHECK(v == 0.0);
    }
    SUBCASE("sampled sine matches the closed form") {
        ScalarField f = parse_field_expression("0.3*sin(2*pi*x1)", g);
        for (std::size_t p = 0; p < g.points(); ++p)
            CHECK(f[p] == doctest::Approx(0.3 * std::sin(2 * M_PI * g.coords(p)[0]))
                              .epsilon(1e-15));
    }
    SUBCASE("sums, products, exp, parentheses") {
        ScalarField f = parse_field_expression("exp(0.5*cos(2*pi*y1)) - 2*(1 + x1*0)", g);
        for (std::size_t p = 0; p < g.points(); ++p)
            CHECK(f[p] == doctest::Approx(std::exp(0.5 * std::cos(2 * M_PI * g.coords(p)[1])) -
                                          2.0));
    }
    SUBCASE("aperiodic frequency rejected") {
        CHECK_THROWS_AS((void)parse_field_expression("sin(1.5*x1)", g), expr_error);
    }
    SUBCASE("nonlinear trig argument rejected") {
        CHECK_THROWS_AS((void)parse_field_expression("sin(x1*x1)", g), expr_error);
    }
    SUBCASE("syntax errors carry a position") {
        try {
            (void)parse_field_expression("1 + * 2", g);
            FAIL("expected expr_error");
        } catch (const expr_error& e) {
            CHECK(e.position == 4);
        }
    }
    SUBCASE("off-grid coordinate rejected") {
        CHECK_THROWS_AS((void)parse_field_expression("x2", g), expr_error);
    }
}

TEST_CASE("solve subcommand writes a result matching the derived constant") {
    auto out = tmp_dir("solve");
    REQUIRE(run("solve --op sigma:1/1 --N 128 --G \"0.3*sin(2*pi*x1)\" --out " +
                out.string()) == 0);
    json j = json::parse(slurp((out / "result.json").string()));
    CHECK(j["schema"] == "hessianlab-result-v1");
    // e^c = 1 / int e^G, quadrature oracle evaluated here
    TorusGrid g(1, 128);
    ScalarField eg = parse_field_expression("exp(0.3*sin(2*pi*x1))", g);
    double oracle = -std::log(integrate(eg));
    CHECK(double(j["c"]) == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(double(j["residual_linf"]) <= 1e-9);
    CHECK(std::filesystem::exists(out / "phi.field"));
    CHECK(std::filesystem::exists(out / "residual.svg"));
}

TEST_CASE("identical configs give bit-identical outputs") {
    auto a = tmp_dir("rep_a"), b = tmp_dir("rep_b");
    std::string cmd = "solve --op sigma:1/1 --N 64 --G \"0.2*sin(2*pi*x1)\" --out ";
    REQUIRE(run(cmd + a.string()) == 0);
    REQUIRE(run(cmd + b.string()) == 0);
    CHECK(slurp((a / "phi.field").string()) == slurp((b / "phi.field").string()));
    json ja = json::parse(slurp((a / "result.json").string()));
    json jb = json::parse(slurp((b / "result.json").string()));
    ja.erase("wall_seconds");
    jb.erase("wall_seconds");
    CHECK(ja == jb);
}

TEST_CASE("checker subcommand encodes pass/fail in the exit code") {
    CHECK(run("subsolution-check --op sigma:1/1 --N 16 --u 0 --chi scale:2 --rhs 0.5") == 0);
    CHECK(run("subsolution-check --op sigma:1/1 --N 16 --u 0 --chi scale:2 --rhs 3.0") == 1);
}

TEST_CASE("supconv subcommand certifies semiconvexity") {
    auto out = tmp_dir("conv");
    CHECK(run("supconv --n 1 --N 32 --field \"0.2*cos(2*pi*x1)\" --eps 0.1 --out " +
              out.string()) == 0);
    CHECK(std::filesystem::exists(out / "conv.field"));
}

TEST_CASE("demo subcommands emit their tables") {
    auto r = tmp_dir("regmax");
    CHECK(run("regmax-demo --count 40 --seed 7 --out " + r.string()) == 0);
    std::string csv = slurp((r / "regmax.csv").string());
    CHECK(csv.rfind("m,max_t,reg_max,max_t_plus_eps", 0) == 0);
    int lines = 0;
    for (char c : csv)
        if (c == '\n') ++lines;
    CHECK(lines == 41);

    auto c = tmp_dir("cvx");
    CHECK(run("convexify-demo --out " + c.string()) == 0);
    CHECK(std::filesystem::exists(c / "convexify.csv"));
}

TEST_CASE("usage errors exit with status 2") {
    CHECK(run("") == 2);
    CHECK(run("solve --no-such-flag 1") == 2);
    CHECK(run("solve --op sigma:1/1 --N 16 --G \"sin(1.5*x1)\"") == 2);
}
