#include <doctest.h>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "orbitcert/pseudo.hpp"

using namespace orbitcert;

namespace {

std::shared_ptr<SystemSpec> pitchfork() {
    return std::make_shared<SystemSpec>(builtin_system("pitchfork1d"));
}

PseudoOrbit splice_ab(const std::shared_ptr<SystemSpec>& sys, int half_len,
                      const IntegratorConfig& cfg) {
    PseudoOrbit po = make_concat_ab(*sys, {1.0}, {-1.0}, half_len, cfg);
    po.system = sys;
    return po;
}

}  // namespace

TEST_SUITE("pseudo") {

TEST_CASE("defects of a sampled true orbit vanish") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    PseudoOrbit po = sample_orbit(*sys, {0.5}, std::vector<double>(8, 1.0), cfg);
    po.system = sys;
    validate_pseudo_orbit(po);
    for (double d : defects(po, cfg)) CHECK(d == 0.0);
}

TEST_CASE("the fixed-point splice has a single defect of exactly two") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    const PseudoOrbit po = splice_ab(sys, 33, cfg);
    validate_pseudo_orbit(po);
    CHECK(po.size() == 67);
    CHECK(po.i_min() == -33);
    CHECK(po.i_max() == 33);
    CHECK(po.s_at(0) == 0.0);
    CHECK(po.s_at(-33) == -33.0);
    const std::vector<double> d = defects(po, cfg);
    REQUIRE(d.size() == 66);
    for (std::size_t j = 0; j < d.size(); ++j) {
        if (j == 33)
            CHECK(d[j] == 2.0);  // the a-to-b hop between the two rest points
        else
            CHECK(d[j] == 0.0);
    }
}

TEST_CASE("windowed average classification shrinks as delta grows") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    const PseudoOrbit po = splice_ab(sys, 33, cfg);
    const auto run = [&](double delta) {
        return classify(po, PseudoKind::delta_average, delta, cfg);
    };
    const ClassificationReport r005 = run(0.05);
    const ClassificationReport r01 = run(0.1);
    const ClassificationReport r05 = run(0.5);
    const ClassificationReport r21 = run(2.1);
    CHECK(r005.verdict == Verdict::holds);
    CHECK(r01.verdict == Verdict::holds);
    CHECK(r05.verdict == Verdict::holds);
    CHECK(r21.verdict == Verdict::holds);
    CHECK(r005.window_N == 41);
    CHECK(r01.window_N == 21);
    CHECK(r05.window_N == 5);
    CHECK(r21.window_N == 1);
    CHECK(r01.defect_origin == -33);
    CHECK(r01.defect_sequence[33] == 2.0);
}

TEST_CASE("partial averages of the splice decay like 2/n") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    const PseudoOrbit po = splice_ab(sys, 33, cfg);
    const ClassificationReport r =
        classify(po, PseudoKind::asymptotic_average, std::nullopt, cfg);
    // a finite window cannot certify an asymptotic property outright; the
    // diagnostics carry the decay structure instead
    CHECK(r.verdict == Verdict::inconclusive);
    REQUIRE(r.partial_averages.size() >= 32);
    for (std::size_t n = 1; n <= 32; ++n)
        CHECK(std::abs(r.partial_averages[n - 1] - 2.0 / static_cast<double>(n)) <= 1e-12);
    CHECK(!r.sides.empty());
}

TEST_CASE("the splice is a limit and positive-limit pseudo-orbit") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    const PseudoOrbit po = splice_ab(sys, 33, cfg);
    CHECK(classify(po, PseudoKind::limit, std::nullopt, cfg).verdict == Verdict::holds);
    CHECK(classify(po, PseudoKind::positive_limit, std::nullopt, cfg).verdict ==
          Verdict::holds);
}

TEST_CASE("constant-size defects defeat the limit kinds") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    // hop between the two sinks every segment: defects stay near 2 forever
    PseudoOrbit po;
    po.system = sys;
    po.origin = -8;
    for (int i = -8; i <= 8; ++i) {
        po.points.push_back({i % 2 == 0 ? 1.0 : -1.0});
        po.durations.push_back(1.0);
    }
    validate_pseudo_orbit(po);
    CHECK(classify(po, PseudoKind::limit, std::nullopt, cfg).verdict == Verdict::fails);
    CHECK(classify(po, PseudoKind::positive_limit, std::nullopt, cfg).verdict ==
          Verdict::fails);
    CHECK(classify(po, PseudoKind::delta_pseudo, 0.1, cfg).verdict == Verdict::fails);
    CHECK(classify(po, PseudoKind::delta_pseudo, 2.5, cfg).verdict == Verdict::holds);
}

TEST_CASE("perturbed orbits are deterministic in the seed and bounded by sigma") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    const std::vector<double> sigma(12, 0.02);
    PseudoOrbit a = perturb_orbit(*sys, {0.5}, sigma, 7, cfg);
    PseudoOrbit b = perturb_orbit(*sys, {0.5}, sigma, 7, cfg);
    PseudoOrbit c = perturb_orbit(*sys, {0.5}, sigma, 8, cfg);
    a.system = sys;
    b.system = sys;
    c.system = sys;
    CHECK(a.points == b.points);
    CHECK(a.points != c.points);
    validate_pseudo_orbit(a);
    const std::vector<double> d = defects(a, cfg);
    bool some_positive = false;
    for (double v : d) {
        CHECK(v <= 0.02 + 1e-12);
        some_positive = some_positive || v > 0.0;
    }
    CHECK(some_positive);
    CHECK(classify(a, PseudoKind::delta_pseudo, 0.05, cfg).verdict == Verdict::holds);
    CHECK(classify(a, PseudoKind::delta_pseudo, 1e-9, cfg).verdict == Verdict::fails);
}

TEST_CASE("forward concatenation records its junctions") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    PseudoOrbit s1 = sample_orbit(*sys, {0.5}, std::vector<double>(3, 1.0), cfg);
    PseudoOrbit s2 = sample_orbit(*sys, {-0.5}, std::vector<double>(3, 1.0), cfg);
    s1.system = sys;
    s2.system = sys;
    ConcatInfo info;
    PseudoOrbit ab = make_alpha_beta({s1, s2}, cfg, &info);
    ab.system = sys;
    validate_pseudo_orbit(ab);
    CHECK(ab.size() == 6);
    CHECK(ab.i_min() == 0);
    CHECK(ab.i_max() == 5);
    REQUIRE(info.junction_indices.size() == 1);
    CHECK(info.junction_indices[0] == 2);
    const double hop = distance(sys->space, flow_to(*sys, s1.point(2), 1.0, cfg), {-0.5});
    CHECK(info.junction_defects[0] == hop);
    const std::vector<double> d = defects(ab, cfg);
    CHECK(d[2] == hop);
    CHECK(d[0] == 0.0);
    CHECK(d[3] == 0.0);
}

TEST_CASE("ill-formed windows and arguments are rejected") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    PseudoOrbit po = sample_orbit(*sys, {0.5}, std::vector<double>(4, 1.0), cfg);
    po.system = sys;
    // short windows cannot carry the limit/average kinds
    CHECK_THROWS_AS(classify(po, PseudoKind::limit, std::nullopt, cfg), std::invalid_argument);
    // delta kinds need a positive delta
    CHECK_THROWS_AS(classify(po, PseudoKind::delta_pseudo, std::nullopt, cfg),
                    std::invalid_argument);
    // the asymptotic kind needs a two-sided window
    PseudoOrbit oneside = sample_orbit(*sys, {0.5}, std::vector<double>(20, 1.0), cfg);
    oneside.system = sys;
    CHECK_THROWS_AS(classify(oneside, PseudoKind::asymptotic_average, std::nullopt, cfg),
                    std::invalid_argument);

    PseudoOrbit bad = po;
    bad.durations[1] = 0.5;  // segment times must be at least one
    CHECK_THROWS_AS(validate_pseudo_orbit(bad), std::invalid_argument);
    PseudoOrbit shifted = po;
    shifted.origin = 1;  // the window must contain index zero
    CHECK_THROWS_AS(validate_pseudo_orbit(shifted), std::invalid_argument);
    PseudoOrbit empty;
    empty.system = sys;
    CHECK_THROWS_AS(validate_pseudo_orbit(empty), std::invalid_argument);
    CHECK_THROWS_AS(make_concat_ab(*sys, {1.0}, {-1.0}, 0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(perturb_orbit(*sys, {0.5}, {}, 1, cfg), std::invalid_argument);
}

}  // TEST_SUITE
