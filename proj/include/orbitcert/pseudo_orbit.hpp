#pragma once

#include <stdexcept>
#include <vector>

#include "orbitcert/sysdef.hpp"

namespace orbitcert {

// A finite window of a bi-infinite pseudo-orbit: points x_i and hop durations t_i >= 1 for
// i = origin .. origin + size - 1. Index 0 anchors the cumulative-time origin (s(0) = 0), so
// origin must be <= 0; a one-sided forward window has origin == 0.
struct PseudoOrbit {
    SystemPtr system;
    int origin = 0;
    std::vector<std::vector<double>> points;
    std::vector<double> durations;

    int size() const { return static_cast<int>(points.size()); }
    int i_min() const { return origin; }
    int i_max() const { return origin + size() - 1; }

    const std::vector<double>& point(int index) const {
        return points[static_cast<std::size_t>(index - origin)];
    }
    double duration(int index) const {
        return durations[static_cast<std::size_t>(index - origin)];
    }

    // Cumulative time s(i): s(0) = 0, s(i) = sum of durations of indices [0, i) for i > 0,
    // s(i) = -sum over [i, 0) for i < 0.
    double s_at(int index) const {
        double acc = 0.0;
        if (index >= 0)
            for (int j = 0; j < index; ++j) acc += duration(j);
        else
            for (int j = index; j < 0; ++j) acc -= duration(j);
        return acc;
    }
};

// Validates the window invariants shared by every pseudo-orbit kind.
inline void validate_pseudo_orbit(const PseudoOrbit& po) {
    if (!po.system) throw std::invalid_argument("pseudo-orbit: missing system");
    if (po.points.empty()) throw std::invalid_argument("pseudo-orbit: empty window");
    if (po.points.size() != po.durations.size())
        throw std::invalid_argument("pseudo-orbit: points/durations size mismatch");
    if (po.origin > 0)
        throw std::invalid_argument("pseudo-orbit: origin must be <= 0");
    if (po.origin + static_cast<int>(po.points.size()) - 1 < 0)
        throw std::invalid_argument("pseudo-orbit: window must contain index 0");
    const int dim = po.system->space.dim;
    for (const auto& p : po.points)
        if (static_cast<int>(p.size()) != dim)
            throw std::invalid_argument("pseudo-orbit: point dimension mismatch");
    for (double t : po.durations)
        if (!(t >= 1.0))
            throw std::invalid_argument("pseudo-orbit: durations must be >= 1");
    const Region& region = po.system->isolated_region;
    if (po.system->space.kind == SpaceKind::box) {
        for (const auto& p : po.points)
            for (int k = 0; k < dim; ++k)
                if (p[static_cast<std::size_t>(k)] < region.lo[static_cast<std::size_t>(k)] - 1e-9 ||
                    p[static_cast<std::size_t>(k)] > region.hi[static_cast<std::size_t>(k)] + 1e-9)
                    throw std::invalid_argument("pseudo-orbit: point outside the isolated region");
    }
}

}  // namespace orbitcert
