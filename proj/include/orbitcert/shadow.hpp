#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orbitcert/chain.hpp"
#include "orbitcert/flow.hpp"
#include "orbitcert/pseudo_orbit.hpp"

namespace orbitcert {

// ---------------------------------------------------------------------------
// Time reparameterizations
// ---------------------------------------------------------------------------

// Orientation-preserving piecewise-linear time change with h(0) = 0, extended
// with slope 1 outside the knot range.
struct Reparameterization {
    std::vector<double> knots_t;  // strictly increasing, contains 0
    std::vector<double> knots_h;  // strictly increasing, value 0 at t = 0

    static Reparameterization identity();
    double operator()(double t) const;
    bool is_identity() const;
};

void validate_reparameterization(const Reparameterization& h);

// ---------------------------------------------------------------------------
// Error functionals
// ---------------------------------------------------------------------------

enum class ShadowMode { uniform, average, asymptotic_average, limit, gap };
std::string to_string(ShadowMode mode);
std::optional<ShadowMode> shadow_mode_from_string(const std::string& name);

enum class OrbitSide { forward, backward };

// One tracked segment [s(index), s(index+1)] of the pseudo-orbit window.
struct SegmentCheck {
    int index = 0;
    double length = 0.0;
    double integral = 0.0;  // trapezoid value of the tracking distance
    double sup = 0.0;       // largest sampled tracking distance
};

struct ShadowCheck {
    ShadowMode mode = ShadowMode::uniform;
    std::vector<double> z;
    Reparameterization reparam;  // identity in gap mode
    double gap_k = 0.0;          // used by gap mode only
    std::vector<SegmentCheck> segments;  // ordered by window index
    bool forward_escaped = false;
    bool backward_escaped = false;
    std::optional<double> forward_statistic;
    std::optional<double> backward_statistic;
    double value = 0.0;  // worst side statistic; +inf when a needed side escaped
};

// Desk-scale window statistic of a per-segment sequence (ordered outward from
// the window center):
//   uniform            -> max entry
//   average            -> max running mean over the last half of window sizes
//   asymptotic_average -> final running mean plus the fitted tail slope (if positive)
//   limit / gap        -> max over the last quarter of the entries
double error_statistic(const std::vector<double>& per_segment, ShadowMode mode);

// Composite-trapezoid tracking integrals for one side of the window, one value
// per segment (forward: indices 0, 1, ...; backward: -1, -2, ...).  In gap
// mode pass gap_k and the identity reparameterization: the tracked orbit is
// X_{t+K}(z) forward and X_t(z) backward.
std::vector<double> segment_integrals(const PseudoOrbit& po, const std::vector<double>& z,
                                      const Reparameterization& h, double gap_k, OrbitSide side,
                                      const IntegratorConfig& cfg);

// Full evaluation of one candidate: every segment, side statistics, and the
// combined value for the requested mode.
ShadowCheck evaluate_shadowing(const PseudoOrbit& po, const std::vector<double>& z,
                               ShadowMode mode, const Reparameterization& h, double gap_k,
                               const IntegratorConfig& cfg);

// Recompute a ShadowCheck's side statistics and value from its segment list.
double statistic_from_segments(const std::vector<SegmentCheck>& segments, ShadowMode mode,
                               bool forward_escaped, bool backward_escaped,
                               std::optional<double>* forward_out = nullptr,
                               std::optional<double>* backward_out = nullptr);

// ---------------------------------------------------------------------------
// Witness search
// ---------------------------------------------------------------------------

struct ShadowSearchOptions {
    double lambda = 1.0;     // slope bound of the searched reparameterizations
    double n_gap = 4.0;      // gap mode: |K| <= n_gap
    double gap_step = 0.05;  // gap mode: K grid spacing
    IntegratorConfig integ;
    int jobs = 0;
};

struct ShadowResult {
    ShadowCheck best;
    int z_index = -1;              // index into the candidate grid
    std::size_t evaluated = 0;     // candidate evaluations performed
    std::size_t escaped = 0;       // evaluations discarded because the orbit left the region
};

// Exact minimizer over the finite candidate set: every grid point z, the
// identity time change plus (for lambda > 1) one dynamic-programming proposal
// on a 0.1-quantum monotone lattice, and in gap mode every K on the gap grid.
// Ties break lexicographically on (value, z index, K).
ShadowResult search_shadowing(const PseudoOrbit& po, ShadowMode mode,
                              const std::vector<std::vector<double>>& candidate_grid,
                              const ShadowSearchOptions& opts);

// Uniform per-axis grid over a region, endpoints included.
std::vector<std::vector<double>> uniform_grid(const Region& region, int per_axis);

// ---------------------------------------------------------------------------
// Structural non-shadowing certificate
// ---------------------------------------------------------------------------

// Record of one box-level forward-invariance check: the time-1 images of the
// box's sample points must stay inside the named set with clearance >= margin.
struct BoxFlowCheck {
    int box = -1;
    char set = 'U';          // 'U' = attracting neighborhood, 'C' = complement side
    double worst_clearance = 0.0;
    bool pass = false;
};

// Runs the forward-invariance check for every listed box against the set
// formed by the list itself: all time-1 images of the box's test points
// (corners, center, four interior fills) must land inside the set with signed
// clearance >= margin.  Clearance is negative when an image leaves the set.
// Pass corner_samples = false to sample only the center and interior points —
// needed when the set boundary is itself invariant, so that corner points
// sitting exactly on it are not counted against the set.
std::vector<BoxFlowCheck> invariance_checks(const SystemSpec& spec, const BoxCover& cover,
                                            const std::vector<int>& boxes, char set_label,
                                            double margin, const IntegratorConfig& cfg,
                                            int jobs = 0, bool corner_samples = true);

struct NonShadowCertificate {
    std::string system_name;
    int depth = 0;
    double epsilon0 = 0.0;
    std::vector<double> point_b;
    std::vector<int> attractor_boxes;     // A: terminal recurrent component
    std::vector<int> neighborhood_boxes;  // U: boxes within epsilon0/2 of A
    std::vector<int> complement_boxes;    // C: inflated forward closure of b's box
    std::vector<int> basin_boxes;         // graph ancestors of A's component
    double lipschitz = 0.0;
    double margin = 0.0;   // required image clearance, >= lipschitz * step
    double min_gap = 0.0;  // smallest gap between U and C boxes
    std::vector<BoxFlowCheck> checks;
    bool valid = false;
    std::string failure;  // first violated condition when invalid
    double implied_average_bound = 0.0;  // epsilon0 / 2 when valid
};

// Box-level rendition of the attractor obstruction: if the epsilon0/2
// neighborhood U of the attractor maps into itself and the forward closure C
// of b stays disjoint from U by at least epsilon0/2, then no orbit can track
// the two-sided splice of an attractor point with b to average error below
// epsilon0/2 on both sides.
NonShadowCertificate certify_average_nonshadowing(const SystemSpec& spec,
                                                  const std::vector<int>& attractor_boxes,
                                                  const std::vector<double>& b, double epsilon0,
                                                  int depth, const IntegratorConfig& cfg,
                                                  int jobs = 0);

// Independent re-verification from the embedded box lists alone; never re-runs
// the attractor search.  Returns false and fills `why` on the first mismatch.
bool recheck_certificate(const NonShadowCertificate& cert, const SystemSpec& spec,
                         const IntegratorConfig& cfg, std::string* why = nullptr, int jobs = 0);

}  // namespace orbitcert
