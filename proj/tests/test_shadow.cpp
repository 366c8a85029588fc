#include <doctest.h>

#include <cmath>
#include <memory>
#include <optional>
#include <vector>

#include "orbitcert/shadow.hpp"

using namespace orbitcert;

namespace {

std::shared_ptr<SystemSpec> pitchfork() {
    return std::make_shared<SystemSpec>(builtin_system("pitchfork1d"));
}

double pitchfork_closed(double x0, double t) {
    const double e = std::exp(t);
    return x0 * e / std::sqrt(1.0 - x0 * x0 + x0 * x0 * e * e);
}

SegmentCheck seg(int index, double value) {
    SegmentCheck s;
    s.index = index;
    s.length = 1.0;
    s.integral = value;
    s.sup = value;
    return s;
}

}  // namespace

TEST_SUITE("shadow") {

TEST_CASE("reparameterizations are monotone anchors through zero") {
    const Reparameterization id = Reparameterization::identity();
    CHECK(id.is_identity());
    CHECK(id(0.0) == 0.0);
    CHECK(id(3.75) == 3.75);
    CHECK(id(-2.0) == -2.0);
    Reparameterization h;
    h.knots_t = {-1.0, 0.0, 2.0};
    h.knots_h = {-3.0, 0.0, 1.0};
    validate_reparameterization(h);
    CHECK(!h.is_identity());
    CHECK(h(0.0) == 0.0);
    CHECK(h(1.0) == 0.5);                         // interpolated
    CHECK(h(-0.5) == doctest::Approx(-1.5));      // interpolated
    CHECK(h(3.0) == doctest::Approx(2.0));        // slope-1 extension
    Reparameterization bad = h;
    bad.knots_h = {0.5, 0.0, 1.0};  // not increasing
    CHECK_THROWS_AS(validate_reparameterization(bad), std::invalid_argument);
}

TEST_CASE("window statistics match hand-computed values") {
    // forward side: one integral of 2 right after the center, then silence
    std::vector<SegmentCheck> fwd;
    for (int i = 0; i <= 32; ++i) fwd.push_back(seg(i, i == 1 ? 2.0 : 0.0));
    std::optional<double> f, b;
    CHECK(statistic_from_segments(fwd, ShadowMode::average, false, false, &f, &b) == 0.125);
    CHECK(*f == 0.125);  // max over n >= 16 of 2/n
    CHECK(!b.has_value());
    CHECK(statistic_from_segments(fwd, ShadowMode::uniform, false, false, &f, &b) == 2.0);

    // backward side: entry 1/i at index -i; the limit statistic reads the far tail
    std::vector<SegmentCheck> bwd;
    for (int i = -32; i < 8; ++i)
        bwd.push_back(seg(i, i < 0 ? 1.0 / static_cast<double>(-i) : 0.0));
    const double lim = statistic_from_segments(bwd, ShadowMode::limit, false, false, &f, &b);
    CHECK(*b == 1.0 / 25.0);  // max over the outermost quarter, indices -25..-32
    CHECK(lim == 1.0 / 25.0);

    // escape on a side forces that side's statistic to infinity
    const double esc = statistic_from_segments(fwd, ShadowMode::uniform, true, false, &f, &b);
    CHECK(std::isinf(esc));
    CHECK(std::isinf(*f));
    CHECK_THROWS_AS(statistic_from_segments({}, ShadowMode::uniform, false, false),
                    std::invalid_argument);
}

TEST_CASE("a fixed point tracks its own sampled orbit with zero error") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    PseudoOrbit po = sample_orbit(*sys, {1.0}, std::vector<double>(10, 1.0), cfg);
    po.system = sys;
    const ShadowCheck check = evaluate_shadowing(po, {1.0}, ShadowMode::uniform,
                                                 Reparameterization::identity(), 0.0, cfg);
    CHECK(check.value == 0.0);
    for (const SegmentCheck& s : check.segments) {
        CHECK(s.sup == 0.0);
        CHECK(s.integral == 0.0);
    }
}

TEST_CASE("gap evaluation with zero shift equals the limit evaluation") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    PseudoOrbit po = make_concat_ab(*sys, {1.0}, {-1.0}, 8, cfg);
    po.system = sys;
    const std::vector<double> z{0.97};
    const ShadowCheck gap = evaluate_shadowing(po, z, ShadowMode::gap,
                                               Reparameterization::identity(), 0.0, cfg);
    const ShadowCheck lim = evaluate_shadowing(po, z, ShadowMode::limit,
                                               Reparameterization::identity(), 0.0, cfg);
    REQUIRE(gap.segments.size() == lim.segments.size());
    for (std::size_t j = 0; j < gap.segments.size(); ++j) {
        CHECK(gap.segments[j].integral == lim.segments[j].integral);
        CHECK(gap.segments[j].sup == lim.segments[j].sup);
    }
    CHECK(gap.value == lim.value);
    CHECK(gap.forward_escaped == lim.forward_escaped);
}

TEST_CASE("the searcher finds the seeding point of a true orbit exactly") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    PseudoOrbit po = sample_orbit(*sys, {0.5}, std::vector<double>(21, 1.0), cfg);
    po.system = sys;
    ShadowSearchOptions opts;
    opts.integ = cfg;
    const ShadowResult r =
        search_shadowing(po, ShadowMode::uniform, uniform_grid(sys->isolated_region, 4001), opts);
    CHECK(r.best.z[0] == 0.5);  // the 4001-point grid on [-2,2] contains 0.5 exactly
    CHECK(r.best.value <= 1e-5);
    CHECK(r.evaluated == 4001);
}

TEST_CASE("a shifted window is recovered by the matching time gap") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    // x_i follows X_i(0.5) for i <= 0 and jumps two units ahead afterwards
    PseudoOrbit po;
    po.system = sys;
    po.origin = -8;
    for (int i = -8; i <= 9; ++i) {
        const double shift = i <= 0 ? 0.0 : 2.0;
        po.points.push_back(flow_to(*sys, {0.5}, static_cast<double>(i) + shift, cfg));
        po.durations.push_back(1.0);
    }
    validate_pseudo_orbit(po);
    ShadowSearchOptions opts;
    opts.integ = cfg;
    const ShadowResult r =
        search_shadowing(po, ShadowMode::gap, uniform_grid(sys->isolated_region, 4001), opts);
    CHECK(r.best.z[0] == 0.5);
    CHECK(r.best.gap_k == 2.0);  // the gap grid holds integers exactly
    CHECK(r.best.value <= 1e-12);
    // forward tail against the closed form, reparameterized by tau + K
    const double tail = std::abs(pitchfork_closed(0.5, 9.0 + 2.0) -
                                 flow_to(*sys, {0.5}, 11.0, cfg)[0]);
    CHECK(tail <= 1e-4);
}

TEST_CASE("widening the slope budget can only improve the searched value") {
    auto sys = pitchfork();
    const IntegratorConfig cfg;
    // a stretched sampling: true orbit points but 1.5-unit durations claimed as 1
    PseudoOrbit po;
    po.system = sys;
    po.origin = 0;
    for (int i = 0; i < 12; ++i) {
        po.points.push_back(flow_to(*sys, {0.1}, 1.5 * static_cast<double>(i), cfg));
        po.durations.push_back(1.0);
    }
    validate_pseudo_orbit(po);
    ShadowSearchOptions tight;
    tight.integ = cfg;
    tight.lambda = 1.0;
    ShadowSearchOptions wide = tight;
    wide.lambda = 2.0;
    const std::vector<std::vector<double>> grid = uniform_grid(sys->isolated_region, 201);
    const double v_tight =
        search_shadowing(po, ShadowMode::uniform, grid, tight).best.value;
    const double v_wide = search_shadowing(po, ShadowMode::uniform, grid, wide).best.value;
    CHECK(v_wide <= v_tight + 1e-12);
    CHECK(v_wide < v_tight);  // the stretch genuinely needs a non-identity time change
}

TEST_CASE("candidate grids are inclusive and exact at dyadic fractions") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const std::vector<std::vector<double>> g = uniform_grid(pf.isolated_region, 4001);
    REQUIRE(g.size() == 4001);
    CHECK(g.front()[0] == -2.0);
    CHECK(g.back()[0] == 2.0);
    CHECK(g[2500][0] == 0.5);
    const SystemSpec sd = builtin_system("saddle2d");
    const std::vector<std::vector<double>> g2 = uniform_grid(sd.isolated_region, 21);
    CHECK(g2.size() == 441);
    CHECK(g2.front() == std::vector<double>{-1.0, -1.0});
    CHECK(g2.back() == std::vector<double>{1.0, 1.0});
}

TEST_CASE("the two-sink obstruction certificate validates and survives recheck") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    const BoxGraph graph = transition_graph(pf, cover, 0.0, 2.0, 7, cfg, 0);
    std::vector<int> attractor;
    const long long a_box = cover.locate({1.0});
    for (const AttractorCandidate& cand : find_attractors(graph))
        if (std::binary_search(cand.boxes.begin(), cand.boxes.end(), static_cast<int>(a_box)))
            attractor = cand.boxes;
    REQUIRE(!attractor.empty());
    const NonShadowCertificate cert =
        certify_average_nonshadowing(pf, attractor, {-1.0}, 0.5, 6, cfg, 0);
    REQUIRE(cert.valid);
    CHECK(cert.min_gap == 1.5);
    CHECK(cert.implied_average_bound == 0.25);
    CHECK(cert.margin == doctest::Approx(0.0165).epsilon(1e-9));
    // the box sets partition cleanly
    for (int u : cert.neighborhood_boxes)
        CHECK(!std::binary_search(cert.complement_boxes.begin(), cert.complement_boxes.end(), u));
    for (int a : cert.attractor_boxes)
        CHECK(std::binary_search(cert.neighborhood_boxes.begin(), cert.neighborhood_boxes.end(),
                                 a));
    std::string why;
    CHECK(recheck_certificate(cert, pf, cfg, &why, 0));

    // removing one neighborhood box breaks the inflation coverage
    NonShadowCertificate tampered = cert;
    tampered.neighborhood_boxes.erase(tampered.neighborhood_boxes.begin());
    CHECK(!recheck_certificate(tampered, pf, cfg, &why, 0));
    CHECK(why.find("neighborhood") != std::string::npos);

    // moving the outside point into the basin is caught
    NonShadowCertificate moved = cert;
    moved.point_b = {0.9};
    CHECK(!recheck_certificate(moved, pf, cfg, &why, 0));
}

TEST_CASE("certification refuses a point inside the basin") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    const BoxGraph graph = transition_graph(pf, cover, 0.0, 2.0, 7, cfg, 0);
    std::vector<int> attractor;
    const long long a_box = cover.locate({1.0});
    for (const AttractorCandidate& cand : find_attractors(graph))
        if (std::binary_search(cand.boxes.begin(), cand.boxes.end(), static_cast<int>(a_box)))
            attractor = cand.boxes;
    REQUIRE(!attractor.empty());
    const NonShadowCertificate cert =
        certify_average_nonshadowing(pf, attractor, {0.9}, 0.5, 6, cfg, 0);
    CHECK(!cert.valid);
    CHECK(!cert.failure.empty());
}

}  // TEST_SUITE
