#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orbitcert/flow.hpp"
#include "orbitcert/pseudo.hpp"
#include "orbitcert/sysdef.hpp"

namespace orbitcert {

// ---------------------------------------------------------------------------
// Uniform box covers
// ---------------------------------------------------------------------------

// A uniform grid of 2^depth boxes per axis over a rectangular region, indexed
// row-major (axis 0 slowest, last axis fastest).  Membership is half-open per
// axis except that the last box of each axis also owns the closing face.
struct BoxCover {
    SpaceSpec space;
    Region region;
    int depth = 1;
    int per_axis = 2;
    std::vector<double> box_width;  // per axis

    std::size_t box_count() const;
    std::vector<int> coords_of(std::size_t index) const;
    std::size_t index_of(const std::vector<int>& coords) const;
    void box_bounds(std::size_t index, std::vector<double>& lo, std::vector<double>& hi) const;
    // Index of the box containing the (normalized) point, or -1 if it lies
    // outside the region by more than a 1e-9 slack.
    long long locate(const std::vector<double>& point) const;
};

BoxCover build_cover(const SpaceSpec& space, const Region& region, int depth);

// Distance from a point to a closed box, and between two closed boxes, in the
// space metric (torus axes compare all wrapped copies).
double box_point_distance(const SpaceSpec& space, const std::vector<double>& p,
                          const std::vector<double>& lo, const std::vector<double>& hi);
double box_box_distance(const SpaceSpec& space, const std::vector<double>& alo,
                        const std::vector<double>& ahi, const std::vector<double>& blo,
                        const std::vector<double>& bhi);

// Deterministic test points for a box: all corners, the center, then
// samples_per_box - 2^dim - 1 low-discrepancy interior points.
std::vector<std::vector<double>> box_test_points(const BoxCover& cover, std::size_t box,
                                                 int samples_per_box);

// ---------------------------------------------------------------------------
// Transition graphs
// ---------------------------------------------------------------------------

struct BoxGraph {
    BoxCover cover;
    double delta = 0.0;
    double t_edge = 2.0;
    int samples_per_box = 0;
    std::vector<double> t_samples;
    std::vector<std::vector<int>> edges;  // sorted unique successor lists
    std::size_t edge_count = 0;
};

// Edge (P, Q) is present iff some test point of P (corners, center, and
// low-discrepancy interior fill) has a flow image at some sample time whose
// distance to the closed box Q is <= delta.  Escaping samples contribute no
// edges.  Sample times are 1, 1.5, 2, ... up to t_edge.
BoxGraph transition_graph(const SystemSpec& spec, const BoxCover& cover, double delta,
                          double t_edge, int samples_per_box, const IntegratorConfig& cfg,
                          int jobs = 0);

// ---------------------------------------------------------------------------
// Strongly connected components & condensation
// ---------------------------------------------------------------------------

struct SccResult {
    int count = 0;
    std::vector<int> component;              // box index -> component id (topological order)
    std::vector<std::vector<int>> members;   // component id -> sorted box list
    std::vector<std::vector<int>> dag;       // condensation successors (sorted unique)
    std::vector<char> recurrent;             // size > 1 or has a self-edge
};

SccResult scc(const BoxGraph& graph);

struct ChainTransitiveReport {
    bool transitive = false;
    // On failure: an ordered box pair with no connecting path.
    int witness_from = -1;
    int witness_to = -1;
};

ChainTransitiveReport chain_transitive(const BoxGraph& graph);

// ---------------------------------------------------------------------------
// Attractor candidates
// ---------------------------------------------------------------------------

struct AttractorCandidate {
    int component = -1;
    std::vector<int> boxes;         // a terminal recurrent component of the condensation
    std::vector<int> neighborhood;  // one-box inflation of `boxes`
    std::vector<int> basin;         // boxes whose component reaches this one
    bool proper = false;            // some initial component is disjoint from `boxes`
};

std::vector<AttractorCandidate> find_attractors(const BoxGraph& graph);
std::vector<AttractorCandidate> find_attractors(const BoxGraph& graph, const SccResult& comps);

// One-box inflation of a box set (Chebyshev index neighbors, torus axes wrap).
std::vector<int> inflate_boxes(const BoxCover& cover, const std::vector<int>& boxes);

// Boxes visited by the trajectory of x on [burn_t, burn_t + obs_t], sampled at
// every integrator step.
std::vector<int> omega_limit(const SystemSpec& spec, const std::vector<double>& x, double burn_t,
                             double obs_t, const BoxCover& cover, const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------
// Topological transitivity probe
// ---------------------------------------------------------------------------

enum class PairOutcome { hit, refuted, inconclusive };

struct TransitivityPair {
    int from_box = -1;
    int to_box = -1;
    PairOutcome outcome = PairOutcome::inconclusive;
    double hit_time = 0.0;               // valid when outcome == hit
    std::vector<int> blocking_set;       // forward-closed box set, when refuted
};

struct TransitivityReport {
    Verdict verdict = Verdict::inconclusive;  // holds = verified for all sampled pairs
    std::uint64_t seed = 0;
    double t_max = 0.0;
    std::vector<TransitivityPair> pairs;
};

// One source -> target probe.  Hit when a test point of the source box enters
// the one-box inflation of the target within t_max; refuted when the
// graph-reachable set of the source box misses that inflation entirely (the
// reachable set is attached as the forward-closed blocking set).
TransitivityPair transitivity_pair(const SystemSpec& spec, const BoxCover& cover,
                                   const BoxGraph& graph, int from_box, int to_box, double t_max,
                                   const IntegratorConfig& cfg);

// Samples pair_budget seeded random box pairs plus every (attractor box,
// initial-component box) pair in both orientations, each probed with
// transitivity_pair.
TransitivityReport topologically_transitive(const SystemSpec& spec, const BoxCover& cover,
                                            int pair_budget, double t_max,
                                            const IntegratorConfig& cfg, std::uint64_t seed = 1,
                                            int jobs = 0);

// ---------------------------------------------------------------------------
// Stable/unstable witness check
// ---------------------------------------------------------------------------

struct WitnessCheck {
    double forward_rate = 0.0;   // fitted exponent of d(X_t(X_K(z)), X_t(x)); -1e9 when identically 0
    double backward_rate = 0.0;  // fitted exponent of d(X_{-t}(z), X_{-t}(y))
    double forward_final = 0.0;
    double backward_final = 0.0;
    bool forward_escaped = false;
    bool backward_escaped = false;
    Verdict verdict = Verdict::fails;
};

// Decision core shared with grid sweeps: feed the sampled error sequences.
WitnessCheck witness_from_samples(const std::vector<double>& forward_errors,
                                  const std::vector<double>& backward_errors,
                                  bool forward_escaped, bool backward_escaped,
                                  double sample_dt);

// Samples e_f(t) = d(X_t(X_K(z)), X_t(x)) and e_b(t) = d(X_{-t}(z), X_{-t}(y))
// at t = 0, 0.5, ..., T.  Verdict holds iff both finals fall below 1e-3 with
// fitted negative decay rates and no side escapes.
WitnessCheck stable_unstable_witness(const SystemSpec& spec, const std::vector<double>& x,
                                     const std::vector<double>& y, double gap_k,
                                     const std::vector<double>& z, double total_t,
                                     const IntegratorConfig& cfg);

}  // namespace orbitcert
