#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "orbitcert/chain.hpp"
#include "orbitcert/pseudo.hpp"
#include "orbitcert/shadow.hpp"

namespace orbitcert {

// ---------------------------------------------------------------------------
// Theorem harnesses: each classical implication between the orbit-tracking
// notions becomes a scripted pipeline over the other modules.  A harness never
// asserts the bare statement -- it reports exactly what was computed, attaches
// the artifacts, and grades the outcome:
//   consistent   every computed artifact agrees with the implication
//   refuted      a concrete computed counterexample is attached
//   inconclusive a hypothesis could not be established at this resolution
// ---------------------------------------------------------------------------

enum class TheoremVerdict { consistent, refuted, inconclusive };

std::string to_string(TheoremVerdict verdict);

// A gap-witness candidate that passed the two-sided convergence check.
struct WitnessHit {
    std::vector<double> z;
    double gap_k = 0.0;
    WitnessCheck check;
};

struct TheoremReport {
    std::string theorem;  // harness id, e.g. "prop3"
    std::string system;
    std::vector<std::pair<std::string, std::string>> parameters;  // ordered, rendered
    TheoremVerdict verdict = TheoremVerdict::inconclusive;
    std::vector<std::string> notes;  // reasoning trail, in pipeline order

    // Structured artifacts; populated when the pipeline produced them.
    std::optional<bool> chain_transitive;
    int proper_attractors = -1;  // -1 = attractor search not run
    std::vector<AttractorCandidate> attractors;
    std::optional<ClassificationReport> classification;
    std::optional<int> window_bound;  // ceil(d(a, X_1(b)) / delta) + 1
    std::optional<double> partial_average_deviation;
    std::optional<NonShadowCertificate> certificate;
    std::optional<double> search_minimum;  // grid minimum of the searched error
    std::optional<TransitivityReport> transitivity;
    std::vector<BoxFlowCheck> invariant_set_checks;  // separating-set certificate
    std::size_t witness_candidates = 0;              // (z, K) pairs swept
    std::optional<WitnessHit> witness;               // first passing pair, if any
    std::optional<double> functional_gap;  // lem_plsp: max |gap(K=0) - limit| over probes
};

// Shared knobs for every harness.  Depth and edge horizon control the box
// model; the integrator config is passed through to every flow call.
struct HarnessConfig {
    IntegratorConfig integ;
    int depth = 6;
    double t_edge = 2.0;
    std::uint64_t seed = 1;
    int jobs = 0;
};

// All nine harness ids, in report order.
const std::vector<std::string>& theorem_ids();

// Chain transitivity must coincide with the absence of a proper attractor on
// the box model.  Consistent iff the two independent computations agree;
// escape-dominated covers (region not forward-invariant) are inconclusive.
TheoremReport verify_prop3(const SystemSpec& spec, int depth, const HarnessConfig& cfg);

// Average-tracking obstruction pipeline: splice the constant chains of a and b
// into one two-sided pseudo-orbit, classify it as a delta-average pseudo-orbit
// with the predicted window bound, certify the box-level obstruction at
// epsilon0, and cross-check the searched average error against epsilon0/2.
TheoremReport verify_thm_asp(const SystemSpec& spec, const std::vector<double>& a,
                             const std::vector<double>& b, double epsilon0, double delta,
                             int half_len, const HarnessConfig& cfg);

// Asymptotic variant: the measured partial averages of the same splice must
// equal d(a, X_1(b)) / n, and the same certificate applies.
TheoremReport verify_thm_aasp(const SystemSpec& spec, const std::vector<double>& a,
                              const std::vector<double>& b, double epsilon0, int half_len,
                              const HarnessConfig& cfg);

// Two-sided witness existence: sweep (z, K) over grid x [-n_gap, n_gap] for a
// point whose shifted forward orbit tracks x's orbit and whose backward orbit
// tracks y's.  On systems with a separating attractor/repeller structure the
// contrapositive runs instead: no candidate may pass, and the forward-invariant
// separating box sets are certified to explain why.
TheoremReport verify_lemma_nonempty(const SystemSpec& spec, const std::vector<double>& x,
                                    const std::vector<double>& y, double n_gap,
                                    const std::vector<std::vector<double>>& grid, double total_t,
                                    const HarnessConfig& cfg);

// Gap-tracking forward error equals the one-sided limit error by construction:
// probes a sampled orbit window and records the largest functional deviation.
TheoremReport verify_lem_plsp(const SystemSpec& spec, const HarnessConfig& cfg);

// Gap tracking forces a trivial attractor landscape.  Contrapositive at desk
// scale: systems with a proper attractor must fail the witness sweep for the
// registered separating pair.
TheoremReport verify_thm_gap_noattractor(const SystemSpec& spec, const HarnessConfig& cfg);

// Chain transitivity plus tracked-orbit evidence yields sampled topological
// transitivity; never refutable here because the tracking hypothesis is not
// certifiable at desk scale.
TheoremReport verify_lem_tt(const SystemSpec& spec, double t_max, int pair_budget,
                            const HarnessConfig& cfg);

// Chain transitivity plus vanishing-defect tracking: builds a shrinking-defect
// concatenation, classifies its positive-limit behaviour, and reports searched
// tracking upper bounds as supporting evidence.
TheoremReport verify_prop_chain_limit_shadow(const SystemSpec& spec, const HarnessConfig& cfg);

// Composite implication chain over the catalog configuration of the system:
// attractor landscape, witness sweep contrapositive, and (on chain-transitive
// systems) sampled transitivity.
TheoremReport verify_thm_final(const SystemSpec& spec, const HarnessConfig& cfg);

// Registered desk-scale inputs for catalog systems (tracking pair a/b, witness
// pair x/y, tolerances).  Systems without a registered configuration yield
// std::nullopt and the composite harnesses report inconclusive for the parts
// that need them.
struct CatalogInputs {
    std::vector<double> a, b;  // attractor point / outside point
    std::vector<double> x, y;  // witness pair (forward target, backward target)
    double epsilon0 = 0.5;
    double delta = 0.1;
    int half_len = 33;
    double n_gap = 4.0;
    int grid_points = 4001;
    double witness_t = 40.0;
};
std::optional<CatalogInputs> catalog_inputs(const std::string& system_name);

// Dispatcher used by the command line: runs the harness named by `id` with
// catalog inputs.  Throws std::invalid_argument for unknown ids; systems
// without the inputs a harness requires yield an inconclusive report.
TheoremReport run_theorem(const std::string& id, const SystemSpec& spec,
                          const HarnessConfig& cfg);

// Forward-invariant separating sets: connected components of the cover left
// after removing every initial recurrent component's boxes.  Each component is
// checked box-by-box (time-1 images inside the component with margin).
struct InvariantSplit {
    std::string name;        // rendered description of the set
    std::vector<int> boxes;  // sorted
    std::vector<BoxFlowCheck> checks;
    bool pass = false;
};
std::vector<InvariantSplit> separating_sets(const SystemSpec& spec, const BoxCover& cover,
                                            const BoxGraph& graph, const SccResult& comps,
                                            const IntegratorConfig& cfg, int jobs = 0);

// Sweep kernel shared by the witness harnesses: evaluates every (z, K) pair on
// a shared sample lattice; identical verdicts to stable_unstable_witness.
struct WitnessSweep {
    std::size_t candidates = 0;
    std::optional<WitnessHit> first_hit;
};
WitnessSweep sweep_witnesses(const SystemSpec& spec, const std::vector<double>& x,
                             const std::vector<double>& y, double n_gap,
                             const std::vector<std::vector<double>>& grid, double total_t,
                             const IntegratorConfig& cfg, int jobs = 0);

}  // namespace orbitcert
