#include <doctest.h>

#include <string>
#include <vector>

#include "orbitcert/report.hpp"
#include "orbitcert/verify.hpp"

using namespace orbitcert;

namespace {

bool notes_mention(const TheoremReport& r, const std::string& needle) {
    for (const std::string& note : r.notes)
        if (note.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_SUITE("verify") {

TEST_CASE("the harness registry is fixed and closed") {
    const std::vector<std::string> ids = theorem_ids();
    const std::vector<std::string> expected{
        "prop3",          "thm_asp",
        "thm_aasp",       "lem_plsp",
        "lem_nonempty",   "thm_gap_noattractor",
        "lem_tt",         "prop_chain_limit_shadow",
        "thm_final"};
    CHECK(ids == expected);
    const SystemSpec pf = builtin_system("pitchfork1d");
    CHECK_THROWS_AS(run_theorem("nope", pf, HarnessConfig{}), std::invalid_argument);
}

TEST_CASE("attractor census and chain transitivity always agree on the catalog") {
    HarnessConfig cfg;
    for (const std::string name : {"pitchfork1d", "circle_ns"}) {
        const TheoremReport r = run_theorem("prop3", builtin_system(name), cfg);
        CHECK(r.verdict == TheoremVerdict::consistent);
        REQUIRE(r.chain_transitive.has_value());
        CHECK(!*r.chain_transitive);
        CHECK(r.proper_attractors > 0);
    }
    HarnessConfig torus_cfg;
    torus_cfg.depth = 4;
    const TheoremReport t = run_theorem(
        "prop3", builtin_system("torus_linear", {{"alpha", 1.4142135623730951}}), torus_cfg);
    CHECK(t.verdict == TheoremVerdict::consistent);
    REQUIRE(t.chain_transitive.has_value());
    CHECK(*t.chain_transitive);
    CHECK(t.proper_attractors == 0);
}

TEST_CASE("prop3 reports are byte-identical across runs") {
    HarnessConfig cfg;
    const SystemSpec pf = builtin_system("pitchfork1d");
    const std::string a = theorem_json(run_theorem("prop3", pf, cfg)).dump(2);
    const std::string b = theorem_json(run_theorem("prop3", pf, cfg)).dump(2);
    CHECK(a == b);
    CHECK(!a.empty());
}

TEST_CASE("average-window splicing outside the basin is honestly inconclusive") {
    // the circle catalog pairs a sink with a nearby point that still falls
    // into the sink's graph basin, so the precondition cannot be met
    HarnessConfig cfg;
    const TheoremReport r = run_theorem("thm_asp", builtin_system("circle_ns"), cfg);
    CHECK(r.verdict == TheoremVerdict::inconclusive);
    CHECK(notes_mention(r, "basin"));
}

TEST_CASE("partial averages of the splice window decay as predicted") {
    HarnessConfig cfg;
    const TheoremReport r = run_theorem("thm_aasp", builtin_system("pitchfork1d"), cfg);
    CHECK(r.verdict == TheoremVerdict::consistent);
    REQUIRE(r.partial_average_deviation.has_value());
    CHECK(*r.partial_average_deviation <= 1e-9);
    REQUIRE(r.certificate.has_value());
    CHECK(r.certificate->valid);
}

TEST_CASE("identity-reparameterization evaluations agree between the two functionals") {
    HarnessConfig cfg;
    for (const std::string name : {"pitchfork1d", "saddle2d"}) {
        const TheoremReport r = run_theorem("lem_plsp", builtin_system(name), cfg);
        CHECK(r.verdict == TheoremVerdict::consistent);
        REQUIRE(r.functional_gap.has_value());
        CHECK(*r.functional_gap == 0.0);
    }
}

TEST_CASE("the saddle witness sweep finds the origin with zero shift") {
    HarnessConfig cfg;
    const TheoremReport r = run_theorem("lem_nonempty", builtin_system("saddle2d"), cfg);
    CHECK(r.verdict == TheoremVerdict::consistent);
    REQUIRE(r.witness.has_value());
    CHECK(r.witness->z == std::vector<double>{0.0, 0.0});
    CHECK(r.witness->gap_k == 0.0);
    CHECK(r.witness_candidates > 0);
    // boxes whose every sample escapes are reported, not silently dropped
    CHECK(notes_mention(r, "escape"));
}

TEST_CASE("torus reachability probes support the transitivity lemma") {
    HarnessConfig cfg;
    cfg.depth = 4;
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    const TheoremReport r = run_theorem("lem_tt", tl, cfg);
    CHECK(r.verdict == TheoremVerdict::consistent);
    REQUIRE(r.transitivity.has_value());
    CHECK(r.transitivity->verdict == Verdict::holds);
    for (const TransitivityPair& p : r.transitivity->pairs)
        CHECK(p.outcome == PairOutcome::hit);
}

TEST_CASE("block concatenations with shrinking kicks stay positive-limit trackable") {
    HarnessConfig cfg;
    cfg.depth = 4;
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    const TheoremReport r = run_theorem("prop_chain_limit_shadow", tl, cfg);
    CHECK(r.verdict == TheoremVerdict::consistent);
    REQUIRE(r.classification.has_value());
    CHECK(r.classification->verdict == Verdict::holds);
}

TEST_CASE("the combined obstruction criterion passes on the torus line") {
    HarnessConfig cfg;
    cfg.depth = 4;
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    const TheoremReport r = run_theorem("thm_final", tl, cfg);
    CHECK(r.verdict == TheoremVerdict::consistent);
}

TEST_CASE("systems outside the catalog yield inconclusive reports, not failures") {
    const SystemSpec custom =
        parse_system("name = decay\nspace = box(-1, 1)\ndx0 = 0 - x0\n");
    HarnessConfig cfg;
    const TheoremReport r = run_theorem("lem_nonempty", custom, cfg);
    CHECK(r.verdict == TheoremVerdict::inconclusive);
    CHECK(!r.notes.empty());
    // prop3 needs no catalog inputs and works on any parsed system
    const TheoremReport p = run_theorem("prop3", custom, cfg);
    CHECK(p.verdict == TheoremVerdict::consistent);
    CHECK(p.proper_attractors >= 1);  // single sink at the origin, walls repel
}

TEST_CASE("theorem reports serialize with stable fields") {
    HarnessConfig cfg;
    const TheoremReport r = run_theorem("prop3", builtin_system("pitchfork1d"), cfg);
    const Json doc = theorem_json(r);
    CHECK(doc.at("schema_version").get<std::string>() == kSchemaVersion);
    CHECK(doc.at("theorem").get<std::string>() == "prop3");
    CHECK(doc.at("system").get<std::string>() == "pitchfork1d");
    CHECK(doc.at("verdict").get<std::string>() == "consistent");
    CHECK(doc.at("chain_transitive").get<bool>() == false);
    CHECK(doc.at("proper_attractors").get<int>() == 2);
    CHECK(doc.contains("attractors"));
    CHECK(doc.contains("notes"));
}

}  // TEST_SUITE
