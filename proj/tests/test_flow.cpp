#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "orbitcert/flow.hpp"

using namespace orbitcert;

namespace {

// x' = x - x^3 started at x0 has the closed form x(t) = x0 e^t / sqrt(1 - x0^2 + x0^2 e^{2t})
double pitchfork_closed(double x0, double t) {
    const double e = std::exp(t);
    return x0 * e / std::sqrt(1.0 - x0 * x0 + x0 * x0 * e * e);
}

}  // namespace

TEST_SUITE("flow") {

TEST_CASE("distance respects the space geometry") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    CHECK(distance(pf.space, {0.25}, {1.0}) == 0.75);
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.0}});
    // wrap-around is shorter than the straight segment
    CHECK(distance(tl.space, {0.05, 0.5}, {0.95, 0.5}) == doctest::Approx(0.1).epsilon(1e-12));
    const SystemSpec sd = builtin_system("saddle2d");
    CHECK(distance(sd.space, {0.0, 0.0}, {0.3, 0.4}) == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> dist01(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const std::vector<double> a{dist01(rng), dist01(rng)};
        const std::vector<double> b{dist01(rng), dist01(rng)};
        const std::vector<double> c{dist01(rng), dist01(rng)};
        const double dab = distance(tl.space, a, b);
        CHECK(distance(tl.space, b, a) == dab);                       // symmetry
        CHECK(distance(tl.space, a, a) == 0.0);                       // identity
        CHECK(dab <= distance(tl.space, a, c) + distance(tl.space, c, b) + 1e-12);  // triangle
    }
}

TEST_CASE("integrator matches the closed-form pitchfork solution") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    for (const double x0 : {0.5, -0.25, 0.9, 0.01}) {
        for (const double t : {1.0, 2.5, 5.0}) {
            const double num = flow_to(pf, {x0}, t, cfg)[0];
            CHECK(std::abs(num - pitchfork_closed(x0, t)) <= 1e-10);
        }
    }
}

TEST_CASE("halving the step shrinks the error by a fourth-order factor") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const double exact = pitchfork_closed(0.5, 5.0);
    IntegratorConfig coarse;
    coarse.step = 1e-2;
    IntegratorConfig fine;
    fine.step = 5e-3;
    const double e_coarse = std::abs(flow_to(pf, {0.5}, 5.0, coarse)[0] - exact);
    const double e_fine = std::abs(flow_to(pf, {0.5}, 5.0, fine)[0] - exact);
    CHECK(e_fine > 0.0);
    CHECK(e_coarse / e_fine >= 12.0);  // a fourth-order method gives ~16
}

TEST_CASE("restarting at a step boundary reproduces the long run bitwise") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const double direct = flow_to(pf, {0.3}, 5.0, cfg)[0];
    const double staged = flow_to(pf, flow_to(pf, {0.3}, 2.0, cfg), 3.0, cfg)[0];
    CHECK(direct == staged);
}

TEST_CASE("flowing backward undoes flowing forward") {
    const SystemSpec ci = builtin_system("circle_ns");
    const IntegratorConfig cfg;
    const std::vector<double> x0{2.0};
    const std::vector<double> back = flow_to(ci, flow_to(ci, x0, 3.0, cfg), -3.0, cfg);
    CHECK(std::abs(back[0] - x0[0]) <= 1e-9);
}

TEST_CASE("flow_trace endpoints agree with flow_to") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const Trajectory traj = flow_trace(pf, {0.4}, 2.0, cfg);
    REQUIRE(!traj.points.empty());
    CHECK(traj.times.front() == 0.0);
    CHECK(traj.times.back() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(traj.points.front()[0] == 0.4);
    CHECK(traj.points.back()[0] == flow_to(pf, {0.4}, 2.0, cfg)[0]);
}

TEST_CASE("walker advances match one-shot integration bitwise") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    FlowWalker walker(pf, {0.2}, cfg);
    walker.advance(1.0);
    walker.advance(0.5);
    walker.advance(1.5);
    CHECK(walker.time() == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(walker.state()[0] == flow_to(pf, {0.2}, 3.0, cfg)[0]);
}

TEST_CASE("leaving a box space raises EscapeError near the exit time") {
    const SystemSpec sd = builtin_system("saddle2d");
    const IntegratorConfig cfg;
    bool threw = false;
    try {
        flow_to(sd, {0.5, 0.5}, 2.0, cfg);
    } catch (const EscapeError& e) {
        threw = true;
        // x(t) = 0.5 e^t crosses the wall x = 1 at t = ln 2
        CHECK(std::abs(e.exit_time - std::log(2.0)) <= 1e-2);
    }
    CHECK(threw);
    // tori never escape
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    CHECK_NOTHROW(flow_to(tl, {0.1, 0.1}, 50.0, cfg));
}

TEST_CASE("field slope estimates carry a one-and-a-half safety factor") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    // max |1 - 3x^2| on [-2, 2] is 11, times the 1.5 safety factor
    CHECK(lipschitz_estimate(pf, pf.isolated_region, 201) ==
          doctest::Approx(16.5).epsilon(1e-9));
    const SystemSpec ci = builtin_system("circle_ns");
    CHECK(lipschitz_estimate(ci, ci.isolated_region, 201) ==
          doctest::Approx(1.5).epsilon(1e-9));
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    CHECK(lipschitz_estimate(tl, tl.isolated_region, 65) == 0.0);  // constant field
}

TEST_CASE("sampling a true orbit yields an exact pseudo-orbit window") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    // one point per duration entry; the final duration dangles past the window
    const PseudoOrbit po = sample_orbit(pf, {0.5}, std::vector<double>(6, 1.0), cfg);
    CHECK(po.size() == 6);
    CHECK(po.i_min() == 0);
    CHECK(po.i_max() == 5);
    CHECK(po.point(0)[0] == 0.5);
    CHECK(po.s_at(0) == 0.0);
    CHECK(po.s_at(3) == 3.0);
    // each stored point is the previous one flowed by its duration, bitwise
    for (int i = 0; i < 5; ++i)
        CHECK(po.point(i + 1)[0] == flow_to(pf, po.point(i), po.duration(i), cfg)[0]);
}

}  // TEST_SUITE
