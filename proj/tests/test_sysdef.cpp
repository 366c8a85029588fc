#include <doctest.h>

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "orbitcert/sysdef.hpp"

using namespace orbitcert;

namespace {

double pitchfork_rhs(double x) { return x - x * x * x; }

std::vector<double> random_point(const SystemSpec& spec, std::mt19937_64& rng) {
    std::vector<double> p(static_cast<std::size_t>(spec.space.dim));
    for (int k = 0; k < spec.space.dim; ++k) {
        std::uniform_real_distribution<double> dist(spec.isolated_region.lo[static_cast<std::size_t>(k)],
                                                    spec.isolated_region.hi[static_cast<std::size_t>(k)]);
        p[static_cast<std::size_t>(k)] = dist(rng);
    }
    return p;
}

}  // namespace

TEST_SUITE("sysdef") {

TEST_CASE("builtin catalog lists four systems") {
    const std::vector<std::string> names = builtin_names();
    REQUIRE(names.size() == 4);
    CHECK(names[0] == "pitchfork1d");
    CHECK(names[1] == "circle_ns");
    CHECK(names[2] == "torus_linear");
    CHECK(names[3] == "saddle2d");
    CHECK_THROWS_AS(builtin_system("nosuch"), std::invalid_argument);
}

TEST_CASE("print/parse round-trip is the identity on every builtin") {
    for (const std::string& name : builtin_names()) {
        const SystemSpec spec = name == "torus_linear"
                                    ? builtin_system(name, {{"alpha", 1.25}})
                                    : builtin_system(name);
        const std::string text = print_system(spec);
        const SystemSpec back = parse_system(text);
        CHECK(back.name == spec.name);
        CHECK(back.space.kind == spec.space.kind);
        CHECK(back.space.dim == spec.space.dim);
        CHECK(back.space.lo == spec.space.lo);
        CHECK(back.space.hi == spec.space.hi);
        CHECK(back.isolated_region.lo == spec.isolated_region.lo);
        CHECK(back.isolated_region.hi == spec.isolated_region.hi);
        CHECK(print_system(back) == text);
        for (int k = 0; k < spec.space.dim; ++k)
            CHECK(expr_equal(*back.field[static_cast<std::size_t>(k)],
                             *spec.field[static_cast<std::size_t>(k)]));
    }
}

TEST_CASE("builtin fields agree with hand-coded formulas at 100 random points") {
    std::mt19937_64 rng(42);
    const double alpha = 1.4142135623730951;
    const SystemSpec pf = builtin_system("pitchfork1d");
    const SystemSpec ci = builtin_system("circle_ns");
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", alpha}});
    const SystemSpec sd = builtin_system("saddle2d");
    for (int i = 0; i < 100; ++i) {
        {
            const std::vector<double> p = random_point(pf, rng);
            CHECK(std::abs(eval_field(pf, p)[0] - pitchfork_rhs(p[0])) <= 1e-12);
        }
        {
            const std::vector<double> p = random_point(ci, rng);
            CHECK(std::abs(eval_field(ci, p)[0] - std::sin(p[0])) <= 1e-12);
        }
        {
            const std::vector<double> p = random_point(tl, rng);
            const std::vector<double> v = eval_field(tl, p);
            CHECK(v[0] == 1.0);
            CHECK(std::abs(v[1] - alpha) <= 1e-12);
        }
        {
            const std::vector<double> p = random_point(sd, rng);
            const std::vector<double> v = eval_field(sd, p);
            CHECK(std::abs(v[0] - p[0]) <= 1e-12);
            CHECK(std::abs(v[1] - (-p[1])) <= 1e-12);
        }
    }
}

TEST_CASE("expression grammar covers the documented function set") {
    const SystemSpec spec = parse_system(
        "name = grammar\n"
        "space = box(-1, 1; -1, 1)\n"
        "dx0 = sin(x0) * cos(x1) + exp(0 - x0^2) - tanh(x1) / 2\n"
        "dx1 = sqrt(abs(x0)) + 0.5 * x1^3\n");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const double a = dist(rng), b = dist(rng);
        const std::vector<double> v = eval_field(spec, {a, b});
        const double e0 = std::sin(a) * std::cos(b) + std::exp(-(a * a)) - std::tanh(b) / 2.0;
        const double e1 = std::sqrt(std::abs(a)) + 0.5 * b * b * b;
        CHECK(std::abs(v[0] - e0) <= 1e-12);
        CHECK(std::abs(v[1] - e1) <= 1e-12);
    }
}

TEST_CASE("parse_expression round-trips through print_expr") {
    for (const std::string text : {"x0 - x0^3", "sin(x0)", "1", "1.4142135623730951",
                                   "sqrt(abs(x0)) + 0.5 * x1^3", "(x0 + x1) * (x0 - x1)"}) {
        const ExprPtr e = parse_expression(text, 2);
        const std::string printed = print_expr(*e);
        const ExprPtr back = parse_expression(printed, 2);
        CHECK(expr_equal(*e, *back));
        CHECK(print_expr(*back) == printed);
    }
}

TEST_CASE("malformed documents raise ParseError with a position") {
    // the field-before-space case regressed once: parse_system used to lose
    // track of whether the space line had been seen
    CHECK_THROWS_AS(parse_system("name = a\ndx0 = x0\nspace = box(-1, 1)\n"), ParseError);
    CHECK_THROWS_AS(parse_system("space = box(-1, 1)\nname = a\ndx0 = x0\n"), ParseError);
    CHECK_THROWS_AS(parse_system("name = a\nspace = box(-1, 1)\ndx0 = x0 +\n"), ParseError);
    CHECK_THROWS_AS(parse_system("name = a\nspace = box(-1, 1)\ndx0 = foo(x0)\n"), ParseError);
    CHECK_THROWS_AS(parse_system("name = a\nspace = box(-1, 1)\ndx0 = x3\n"), ParseError);
    CHECK_THROWS_AS(parse_system("name = a\nspace = box(1, -1)\ndx0 = x0\n"), ParseError);
    CHECK_THROWS_AS(parse_system("name = a\nspace = box(-1, 1)\n"), ParseError);
    CHECK_THROWS_AS(parse_system(""), ParseError);
    // nine axes exceeds the supported dimension cap
    CHECK_THROWS_AS(
        parse_system("name = a\nspace = box(0,1; 0,1; 0,1; 0,1; 0,1; 0,1; 0,1; 0,1; 0,1)\n"
                     "dx0 = 1\ndx1 = 1\ndx2 = 1\ndx3 = 1\ndx4 = 1\ndx5 = 1\ndx6 = 1\n"
                     "dx7 = 1\ndx8 = 1\n"),
        ParseError);
    try {
        parse_system("name = a\nspace = box(-1, 1)\ndx0 = x0 +\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(e.col >= 1);
    }
}

TEST_CASE("domain faults during evaluation point at the offending subexpression") {
    const SystemSpec div0 = parse_system("name = a\nspace = box(-1, 1)\ndx0 = 1 / (x0 - x0)\n");
    CHECK_THROWS_AS(eval_field(div0, {0.5}), EvalDomainError);
    const SystemSpec negroot =
        parse_system("name = a\nspace = box(-1, 1)\ndx0 = sqrt(0 - abs(x0) - 1)\n");
    try {
        eval_field(negroot, {0.5});
        FAIL("expected EvalDomainError");
    } catch (const EvalDomainError& e) {
        CHECK(!e.subexpression.empty());
    }
}

TEST_CASE("normalize_point wraps torus coordinates and leaves box points alone") {
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.0}});
    CHECK(normalize_point(tl.space, {1.25, -0.25})[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(normalize_point(tl.space, {1.25, -0.25})[1] == doctest::Approx(0.75).epsilon(1e-14));
    const SystemSpec ci = builtin_system("circle_ns");
    const double two_pi = 6.283185307179586;
    CHECK(normalize_point(ci.space, {7.0})[0] == doctest::Approx(7.0 - two_pi).epsilon(1e-14));
    const SystemSpec pf = builtin_system("pitchfork1d");
    CHECK(normalize_point(pf.space, {1.5})[0] == 1.5);
}

TEST_CASE("a missing region line defaults to the full space") {
    const SystemSpec spec = parse_system("name = a\nspace = box(-3, 5)\ndx0 = x0\n");
    CHECK(spec.isolated_region.lo == std::vector<double>{-3.0});
    CHECK(spec.isolated_region.hi == std::vector<double>{5.0});
    const SystemSpec sub =
        parse_system("name = a\nspace = box(-3, 5)\nregion = box(-1, 1)\ndx0 = x0\n");
    CHECK(sub.isolated_region.lo == std::vector<double>{-1.0});
    CHECK(sub.isolated_region.hi == std::vector<double>{1.0});
}

TEST_CASE("random token soup never crashes the parser") {
    const std::vector<std::string> pool = {
        "x0", "x1", "x9",  "sin", "cos",  "exp", "sqrt", "abs", "tanh", "(", ")", "+", "-",
        "*",  "/",  "^",   "1",   "0.5",  "2",   "3.25", "1e3", ",",    ";", "=", "name",
        "space", "box", "torus", "dx0", "dx1", "region", "\n", " ", ".", "e", "_"};
    std::mt19937_64 rng(20260815);
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    std::uniform_int_distribution<int> len(1, 40);
    int parsed = 0;
    for (int i = 0; i < 2000; ++i) {
        std::string text;
        const int n = len(rng);
        for (int j = 0; j < n; ++j) text += pool[pick(rng)];
        try {
            parse_system(text);
            ++parsed;
        } catch (const ParseError&) {
        }
        try {
            parse_expression(text, 2);
            ++parsed;
        } catch (const ParseError&) {
        }
    }
    CHECK(parsed >= 0);  // reaching here without a crash is the point
}

}  // TEST_SUITE
