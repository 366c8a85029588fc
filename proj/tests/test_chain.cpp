#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>
#include <vector>

#include "orbitcert/chain.hpp"

using namespace orbitcert;

namespace {

// Reachability-based component partition used as an independent check of the
// Tarjan pass: u and v share a component iff each reaches the other.
struct BruteScc {
    std::vector<int> component;
    std::vector<char> recurrent;
    std::set<std::pair<int, int>> dag;
    int count = 0;
};

BruteScc brute_scc(const std::vector<std::vector<int>>& edges) {
    const int n = static_cast<int>(edges.size());
    std::vector<std::vector<char>> reach(static_cast<std::size_t>(n),
                                         std::vector<char>(static_cast<std::size_t>(n), 0));
    for (int s = 0; s < n; ++s) {
        std::vector<int> stack{s};
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : edges[static_cast<std::size_t>(u)])
                if (!reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)]) {
                    reach[static_cast<std::size_t>(s)][static_cast<std::size_t>(v)] = 1;
                    stack.push_back(v);
                }
        }
    }
    BruteScc out;
    out.component.assign(static_cast<std::size_t>(n), -1);
    for (int u = 0; u < n; ++u) {
        if (out.component[static_cast<std::size_t>(u)] >= 0) continue;
        const int id = out.count++;
        for (int v = u; v < n; ++v)
            if (v == u || (reach[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] &&
                           reach[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)]))
                if (out.component[static_cast<std::size_t>(v)] < 0)
                    out.component[static_cast<std::size_t>(v)] = id;
    }
    out.recurrent.assign(static_cast<std::size_t>(out.count), 0);
    std::vector<int> size(static_cast<std::size_t>(out.count), 0);
    for (int u = 0; u < n; ++u) ++size[static_cast<std::size_t>(out.component[static_cast<std::size_t>(u)])];
    for (int u = 0; u < n; ++u) {
        const int cu = out.component[static_cast<std::size_t>(u)];
        if (size[static_cast<std::size_t>(cu)] > 1) out.recurrent[static_cast<std::size_t>(cu)] = 1;
        for (int v : edges[static_cast<std::size_t>(u)]) {
            const int cv = out.component[static_cast<std::size_t>(v)];
            if (cu == cv) {
                if (u == v) out.recurrent[static_cast<std::size_t>(cu)] = 1;
            } else {
                out.dag.insert({cu, cv});
            }
        }
    }
    return out;
}

BoxGraph synthetic_graph(int n, std::vector<std::vector<int>> edges) {
    const SystemSpec pf = builtin_system("pitchfork1d");
    BoxGraph g;
    g.cover = build_cover(pf.space, pf.isolated_region, 6);
    REQUIRE(static_cast<int>(g.cover.box_count()) >= n);
    edges.resize(g.cover.box_count());
    g.edges = std::move(edges);
    for (auto& lst : g.edges) {
        std::sort(lst.begin(), lst.end());
        lst.erase(std::unique(lst.begin(), lst.end()), lst.end());
        g.edge_count += lst.size();
    }
    return g;
}

}  // namespace

TEST_SUITE("chain") {

TEST_CASE("uniform covers index boxes row-major with a closed last box") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    CHECK(cover.box_count() == 64);
    CHECK(cover.per_axis == 64);
    CHECK(cover.box_width[0] == 0.0625);
    CHECK(cover.locate({1.0}) == 48);
    CHECK(cover.locate({-1.0}) == 16);
    CHECK(cover.locate({-2.0}) == 0);
    CHECK(cover.locate({0.0}) == 32);
    CHECK(cover.locate({2.0}) == 63);  // the outer wall belongs to the last box
    CHECK(cover.locate({2.5}) == -1);
    std::vector<double> lo, hi;
    cover.box_bounds(48, lo, hi);
    CHECK(lo[0] == 1.0);
    CHECK(hi[0] == 1.0625);

    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.0}});
    const BoxCover tcover = build_cover(tl.space, tl.isolated_region, 2);
    CHECK(tcover.box_count() == 16);
    CHECK(tcover.locate({0.3, 0.8}) == 1 * 4 + 3);  // row-major: axis 0 major
}

TEST_CASE("box inflation clamps at walls and wraps on tori") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    CHECK(inflate_boxes(cover, {0}) == std::vector<int>{0, 1});
    CHECK(inflate_boxes(cover, {5}) == std::vector<int>{4, 5, 6});
    CHECK(inflate_boxes(cover, {63}) == std::vector<int>{62, 63});
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.0}});
    const BoxCover tcover = build_cover(tl.space, tl.isolated_region, 2);
    CHECK(inflate_boxes(tcover, {0}) == std::vector<int>{0, 1, 3, 4, 5, 7, 12, 13, 15});
}

TEST_CASE("the two-sink transition graph splits into two proper attractors") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    const BoxGraph g = transition_graph(pf, cover, 0.0, 2.0, 7, cfg, 0);
    CHECK(g.edge_count == 165);
    const SccResult comps = scc(g);
    CHECK(comps.count == 61);
    int recurrent = 0;
    for (char c : comps.recurrent) recurrent += c;
    CHECK(recurrent == 3);  // two sinks plus the unstable middle pair

    // component ids are a topological order of the condensation
    for (int u = 0; u < static_cast<int>(comps.component.size()); ++u)
        for (int v : g.edges[static_cast<std::size_t>(u)])
            if (comps.component[static_cast<std::size_t>(u)] !=
                comps.component[static_cast<std::size_t>(v)])
                CHECK(comps.component[static_cast<std::size_t>(u)] <
                      comps.component[static_cast<std::size_t>(v)]);

    const ChainTransitiveReport ct = chain_transitive(g);
    CHECK(!ct.transitive);
    CHECK(ct.witness_from == 15);
    CHECK(ct.witness_to == 47);

    const std::vector<AttractorCandidate> cands = find_attractors(g);
    REQUIRE(cands.size() == 2);
    CHECK(cands[0].boxes == std::vector<int>{47, 48});
    CHECK(cands[1].boxes == std::vector<int>{15, 16});
    for (const AttractorCandidate& cand : cands) {
        CHECK(cand.proper);
        CHECK(cand.basin.size() == 33);
        CHECK(cand.neighborhood.size() == 4);
        for (int b : cand.boxes) {
            CHECK(std::binary_search(cand.basin.begin(), cand.basin.end(), b));
            CHECK(std::binary_search(cand.neighborhood.begin(), cand.neighborhood.end(), b));
        }
    }
}

TEST_CASE("the circle system has one proper attractor whose basin is everything") {
    const SystemSpec ci = builtin_system("circle_ns");
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(ci.space, ci.isolated_region, 6);
    const BoxGraph g = transition_graph(ci, cover, 0.0, 2.0, 7, cfg, 0);
    const SccResult comps = scc(g);
    CHECK(comps.count == 62);
    const std::vector<AttractorCandidate> cands = find_attractors(g);
    REQUIRE(cands.size() == 1);
    CHECK(cands[0].boxes == std::vector<int>{31, 32});  // the sink at half the period
    CHECK(cands[0].proper);  // certified by the repelling class at zero, not the basin
    CHECK(cands[0].basin.size() == 64);
}

TEST_CASE("an irrational line on the torus is one non-proper component") {
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(tl.space, tl.isolated_region, 4);
    const BoxGraph g = transition_graph(tl, cover, 0.0, 2.0, 9, cfg, 0);
    const SccResult comps = scc(g);
    CHECK(comps.count == 1);
    CHECK(chain_transitive(g).transitive);
    const std::vector<AttractorCandidate> cands = find_attractors(g);
    REQUIRE(cands.size() == 1);
    CHECK(!cands[0].proper);
    CHECK(cands[0].boxes.size() == 256);
}

TEST_CASE("omega-limit sampling settles into the attracting boxes") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    // from 0.3 the orbit creeps up just below the rest point at one
    CHECK(omega_limit(pf, {0.3}, 20.0, 10.0, cover, cfg) == std::vector<int>{47});
    CHECK(omega_limit(pf, {-0.3}, 20.0, 10.0, cover, cfg) == std::vector<int>{16});
}

TEST_CASE("tarjan components match brute-force reachability on random graphs") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 64;
        const double density = trial % 3 == 0 ? 0.02 : (trial % 3 == 1 ? 0.05 : 0.12);
        std::bernoulli_distribution coin(density);
        std::vector<std::vector<int>> edges(static_cast<std::size_t>(n));
        for (int u = 0; u < n; ++u)
            for (int v = 0; v < n; ++v)
                if (coin(rng)) edges[static_cast<std::size_t>(u)].push_back(v);
        const BoxGraph g = synthetic_graph(n, edges);
        const SccResult got = scc(g);
        const BruteScc want = brute_scc(g.edges);
        REQUIRE(got.count == want.count);
        // identical partitions up to renaming: the label maps must be bijective
        std::vector<int> fwd(static_cast<std::size_t>(want.count), -1);
        std::vector<int> bwd(static_cast<std::size_t>(got.count), -1);
        for (int u = 0; u < n; ++u) {
            const int a = want.component[static_cast<std::size_t>(u)];
            const int b = got.component[static_cast<std::size_t>(u)];
            if (fwd[static_cast<std::size_t>(a)] < 0) fwd[static_cast<std::size_t>(a)] = b;
            if (bwd[static_cast<std::size_t>(b)] < 0) bwd[static_cast<std::size_t>(b)] = a;
            REQUIRE(fwd[static_cast<std::size_t>(a)] == b);
            REQUIRE(bwd[static_cast<std::size_t>(b)] == a);
        }
        // same recurrent flags and condensation edges through the relabeling
        for (int c = 0; c < want.count; ++c)
            CHECK(static_cast<bool>(want.recurrent[static_cast<std::size_t>(c)]) ==
                  static_cast<bool>(got.recurrent[static_cast<std::size_t>(fwd[static_cast<std::size_t>(c)])]));
        std::set<std::pair<int, int>> got_dag;
        for (int c = 0; c < got.count; ++c)
            for (int d : got.dag[static_cast<std::size_t>(c)]) got_dag.insert({c, d});
        std::set<std::pair<int, int>> want_dag;
        for (const auto& [a, b] : want.dag)
            want_dag.insert({fwd[static_cast<std::size_t>(a)], fwd[static_cast<std::size_t>(b)]});
        CHECK(got_dag == want_dag);
        // members lists are consistent with the labels
        for (int c = 0; c < got.count; ++c)
            for (int u : got.members[static_cast<std::size_t>(c)])
                CHECK(got.component[static_cast<std::size_t>(u)] == c);
    }
}

TEST_CASE("structured graphs exercise the component edge cases") {
    // no edges: 64 singleton components, none recurrent
    BoxGraph empty = synthetic_graph(64, {});
    const SccResult e = scc(empty);
    CHECK(e.count == 64);
    for (char c : e.recurrent) CHECK(!c);
    // one big cycle: a single recurrent component
    std::vector<std::vector<int>> ring(64);
    for (int u = 0; u < 64; ++u) ring[static_cast<std::size_t>(u)].push_back((u + 1) % 64);
    const SccResult r = scc(synthetic_graph(64, ring));
    CHECK(r.count == 1);
    CHECK(static_cast<bool>(r.recurrent[0]));
    // a self-loop is recurrent even as a singleton
    std::vector<std::vector<int>> loop(64);
    loop[7].push_back(7);
    const SccResult l = scc(synthetic_graph(64, loop));
    CHECK(l.count == 64);
    int rec = 0;
    for (char c : l.recurrent) rec += c;
    CHECK(rec == 1);
}

TEST_CASE("orbit probes certify or refute box-to-box reachability") {
    const SystemSpec pf = builtin_system("pitchfork1d");
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(pf.space, pf.isolated_region, 6);
    const BoxGraph g = transition_graph(pf, cover, 0.0, 2.0, 7, cfg, 0);

    // the positive sink cannot reach the negative one; the blocking set is the
    // forward-closed attractor pair
    const TransitivityPair blocked = transitivity_pair(pf, cover, g, 48, 16, 50.0, cfg);
    CHECK(blocked.outcome == PairOutcome::refuted);
    CHECK(blocked.blocking_set == std::vector<int>{47, 48});
    for (int b : blocked.blocking_set)
        for (int succ : g.edges[static_cast<std::size_t>(b)])
            CHECK(std::binary_search(blocked.blocking_set.begin(), blocked.blocking_set.end(),
                                     succ));

    // a basin point reaches its sink quickly
    const TransitivityPair hit = transitivity_pair(pf, cover, g, 40, 48, 50.0, cfg);
    CHECK(hit.outcome == PairOutcome::hit);
    CHECK(hit.hit_time > 0.0);
    CHECK_THROWS_AS(transitivity_pair(pf, cover, g, -1, 16, 50.0, cfg), std::invalid_argument);
    CHECK_THROWS_AS(transitivity_pair(pf, cover, g, 0, 64, 50.0, cfg), std::invalid_argument);
}

TEST_CASE("sampled transitivity holds on the torus line and is deterministic") {
    const SystemSpec tl = builtin_system("torus_linear", {{"alpha", 1.4142135623730951}});
    const IntegratorConfig cfg;
    const BoxCover cover = build_cover(tl.space, tl.isolated_region, 4);
    const TransitivityReport a = topologically_transitive(tl, cover, 4, 600.0, cfg, 5, 0);
    CHECK(a.verdict == Verdict::holds);
    CHECK(a.pairs.size() >= 4);
    for (const TransitivityPair& p : a.pairs) CHECK(p.outcome == PairOutcome::hit);
    const TransitivityReport b = topologically_transitive(tl, cover, 4, 600.0, cfg, 5, 0);
    REQUIRE(a.pairs.size() == b.pairs.size());
    for (std::size_t i = 0; i < a.pairs.size(); ++i) {
        CHECK(a.pairs[i].from_box == b.pairs[i].from_box);
        CHECK(a.pairs[i].hit_time == b.pairs[i].hit_time);
    }
}

}  // TEST_SUITE
