#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "orbitcert/pseudo_orbit.hpp"
#include "orbitcert/sysdef.hpp"

namespace orbitcert {

enum class IntegratorMethod { rk4 };

struct IntegratorConfig {
    IntegratorMethod method = IntegratorMethod::rk4;
    double step = 1e-3;   // maximum internal step, in (0, 1]
    bool clamp = false;   // box spaces: project onto the box instead of reporting escape
};

struct EscapeError : std::runtime_error {
    double exit_time;  // signed flow time at which the trajectory left the box
    explicit EscapeError(double t)
        : std::runtime_error("trajectory escaped the space at t = " + std::to_string(t)),
          exit_time(t) {}
};

struct Trajectory {
    std::vector<double> times;                 // strictly increasing in |t|, gaps <= step
    std::vector<std::vector<double>> points;   // normalized into the space
};

// Distance in the space metric: Euclidean on boxes, per-axis wrap-minimizing on tori.
double distance(const SpaceSpec& space, const std::vector<double>& p,
                const std::vector<double>& q);

// Distance from a point to an axis-aligned box [lo, hi] (0 inside), with torus wrapping.
double distance_to_box(const SpaceSpec& space, const std::vector<double>& p,
                       const std::vector<double>& lo, const std::vector<double>& hi);

// Flows x by signed time t (negative t integrates the reversed field). Fixed-step RK4 with
// substeps of size |t|/ceil(|t|/step) <= step. Throws EscapeError when a box-space trajectory
// leaves the bounds and clamp is off. |t| must be <= 1e6.
std::vector<double> flow_to(const SystemSpec& spec, const std::vector<double>& x, double t,
                            const IntegratorConfig& cfg);

// Same flow, recording every internal step (first entry is (0, x) normalized).
Trajectory flow_trace(const SystemSpec& spec, const std::vector<double>& x, double t,
                      const IntegratorConfig& cfg);

// Samples the true orbit from x0 with the given hop durations into a pseudo-orbit window
// (origin 0). Durations must each be >= 1.
PseudoOrbit sample_orbit(const SystemSpec& spec, const std::vector<double>& x0,
                         const std::vector<double>& durations, const IntegratorConfig& cfg);

// 1.5 x the maximum Jacobian operator norm over a uniform grid on the region
// (grid_per_axis points per axis, endpoints included; central differences, h = 1e-5).
double lipschitz_estimate(const SystemSpec& spec, const Region& region, int grid_per_axis);

// Incremental flow driver used by the heavier modules: keeps integrating one state forward
// or backward in pieces without re-walking from the start.
class FlowWalker {
public:
    FlowWalker(const SystemSpec& spec, std::vector<double> start, const IntegratorConfig& cfg);

    // Advances by signed dt and returns the current point.
    const std::vector<double>& advance(double dt);
    const std::vector<double>& state() const { return state_; }
    double time() const { return time_; }

private:
    const SystemSpec& spec_;
    IntegratorConfig cfg_;
    std::vector<double> state_;
    std::vector<double> k1_, k2_, k3_, k4_, tmp_, stack_;
    double time_ = 0.0;

    void rk4_step(double h);
    void check_bounds();
    friend std::vector<double> flow_to(const SystemSpec&, const std::vector<double>&, double,
                                       const IntegratorConfig&);
};

}  // namespace orbitcert
