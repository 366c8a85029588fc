#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "orbitcert/flow.hpp"
#include "orbitcert/pseudo_orbit.hpp"

namespace orbitcert {

enum class PseudoKind { delta_pseudo, delta_average, asymptotic_average, limit, positive_limit };

enum class Verdict { holds, fails, inconclusive };

std::string to_string(PseudoKind kind);
std::string to_string(Verdict v);

struct ClassifyConfig {
    double tail_tol = 1e-3;      // ceiling for a tail to count as converged
    double tail_fraction = 0.25; // fraction of each side treated as the tail
};

struct SideDiagnostics {
    std::string side;            // "forward" or "backward"
    double tail_sup = 0.0;
    double tail_first_half_sup = 0.0;
    double tail_second_half_sup = 0.0;
    double fitted_c = 0.0;       // tail model value_j ~ c * j^(-p), 1-based side positions
    double fitted_p = 0.0;
    bool fit_valid = false;
    Verdict verdict = Verdict::inconclusive;
};

struct ClassificationReport {
    PseudoKind kind;
    Verdict verdict = Verdict::inconclusive;
    std::optional<double> delta;          // delta_pseudo / delta_average
    int window_N = 0;                     // least witnessing N for delta_average
    std::vector<double> defect_sequence;  // d_i for i = i_min .. i_max-1
    int defect_origin = 0;                // index of defect_sequence.front()
    std::vector<double> partial_averages; // asymptotic_average: a_n for n = 1..n_max
    double tail_tol = 0.0;
    double tail_fraction = 0.0;
    std::vector<SideDiagnostics> sides;
    std::string note;
};

// d_i = distance(flow(x_i, t_i), x_{i+1}) for i = i_min .. i_max-1.
std::vector<double> defects(const PseudoOrbit& po, const IntegratorConfig& cfg);

// Evaluates the named pseudo-orbit kind on the finite window. delta is required for the two
// delta kinds. Limit/average kinds require a window of at least 8 points; asymptotic_average
// additionally requires a two-sided window.
ClassificationReport classify(const PseudoOrbit& po, PseudoKind kind,
                              std::optional<double> delta, const IntegratorConfig& cfg,
                              const ClassifyConfig& ccfg = {});

// The splice used by the attractor arguments: x_i = flow_i(a) for i <= 0, x_i = flow_i(b)
// for i > 0, unit durations, window [-half_len, half_len].
PseudoOrbit make_concat_ab(const SystemSpec& spec, const std::vector<double>& a,
                           const std::vector<double>& b, int half_len,
                           const IntegratorConfig& cfg);

struct ConcatInfo {
    std::vector<int> junction_indices;    // defect indices where segments meet
    std::vector<double> junction_defects;
};

// Concatenates finite segments into one forward window (origin 0), recording junctions.
// All segments must share the system and have matching dimensions.
PseudoOrbit make_alpha_beta(const std::vector<PseudoOrbit>& segments,
                            const IntegratorConfig& cfg, ConcatInfo* info = nullptr);

// x_{i+1} = flow(x_i, 1) + uniform perturbation of radius sigma[i], projected into the
// space. Deterministic in seed. sigma.size() == n_steps; the window has n_steps+1 points.
PseudoOrbit perturb_orbit(const SystemSpec& spec, const std::vector<double>& x0,
                          const std::vector<double>& sigma, std::uint64_t seed,
                          const IntegratorConfig& cfg);

}  // namespace orbitcert
