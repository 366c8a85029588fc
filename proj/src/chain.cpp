#include "orbitcert/chain.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

#include "orbitcert/util.hpp"

namespace orbitcert {

// ---------------------------------------------------------------------------
// BoxCover
// ---------------------------------------------------------------------------

std::size_t BoxCover::box_count() const {
    std::size_t n = 1;
    for (int k = 0; k < space.dim; ++k) n *= static_cast<std::size_t>(per_axis);
    return n;
}

std::vector<int> BoxCover::coords_of(std::size_t index) const {
    std::vector<int> c(static_cast<std::size_t>(space.dim), 0);
    for (int k = space.dim - 1; k >= 0; --k) {
        c[static_cast<std::size_t>(k)] = static_cast<int>(index % static_cast<std::size_t>(per_axis));
        index /= static_cast<std::size_t>(per_axis);
    }
    return c;
}

std::size_t BoxCover::index_of(const std::vector<int>& coords) const {
    std::size_t idx = 0;
    for (int k = 0; k < space.dim; ++k)
        idx = idx * static_cast<std::size_t>(per_axis) +
              static_cast<std::size_t>(coords[static_cast<std::size_t>(k)]);
    return idx;
}

void BoxCover::box_bounds(std::size_t index, std::vector<double>& lo, std::vector<double>& hi) const {
    const std::vector<int> c = coords_of(index);
    lo.resize(static_cast<std::size_t>(space.dim));
    hi.resize(static_cast<std::size_t>(space.dim));
    for (int k = 0; k < space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        lo[a] = region.lo[a] + box_width[a] * static_cast<double>(c[a]);
        hi[a] = (c[a] == per_axis - 1) ? region.hi[a] : lo[a] + box_width[a];
    }
}

long long BoxCover::locate(const std::vector<double>& point) const {
    const std::vector<double> p = normalize_point(space, point);
    std::size_t idx = 0;
    for (int k = 0; k < space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        const double u = p[a];
        if (u < region.lo[a] - 1e-9 || u > region.hi[a] + 1e-9) return -1;
        int c = static_cast<int>(std::floor((u - region.lo[a]) / box_width[a]));
        c = std::clamp(c, 0, per_axis - 1);
        idx = idx * static_cast<std::size_t>(per_axis) + static_cast<std::size_t>(c);
    }
    return static_cast<long long>(idx);
}

BoxCover build_cover(const SpaceSpec& space, const Region& region, int depth) {
    if (depth < 1 || depth > 12) throw std::invalid_argument("build_cover: depth must be in [1, 12]");
    if (space.kind == SpaceKind::torus) {
        for (int k = 0; k < space.dim; ++k) {
            const std::size_t a = static_cast<std::size_t>(k);
            if (region.lo[a] != space.lo[a] || region.hi[a] != space.hi[a])
                throw std::invalid_argument("build_cover: torus covers must span the full torus");
        }
    }
    BoxCover cover;
    cover.space = space;
    cover.region = region;
    cover.depth = depth;
    cover.per_axis = 1 << depth;
    double total = 1.0;
    for (int k = 0; k < space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        if (!(region.hi[a] > region.lo[a]))
            throw std::invalid_argument("build_cover: empty region axis");
        cover.box_width.push_back((region.hi[a] - region.lo[a]) / static_cast<double>(cover.per_axis));
        total *= static_cast<double>(cover.per_axis);
        if (total > static_cast<double>(1 << 20))
            throw std::invalid_argument("build_cover: box budget exceeded (> 2^20 boxes)");
    }
    return cover;
}

// ---------------------------------------------------------------------------
// Box distances
// ---------------------------------------------------------------------------

double box_point_distance(const SpaceSpec& space, const std::vector<double>& p,
                          const std::vector<double>& lo, const std::vector<double>& hi) {
    return distance_to_box(space, p, lo, hi);
}

double box_box_distance(const SpaceSpec& space, const std::vector<double>& alo,
                        const std::vector<double>& ahi, const std::vector<double>& blo,
                        const std::vector<double>& bhi) {
    double acc = 0.0;
    for (int k = 0; k < space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        double best = std::numeric_limits<double>::infinity();
        const bool wrap = space.kind == SpaceKind::torus;
        const double period = wrap ? space.hi[a] - space.lo[a] : 0.0;
        for (int shift = wrap ? -1 : 0; shift <= (wrap ? 1 : 0); ++shift) {
            const double s = static_cast<double>(shift) * period;
            const double gap = std::max({0.0, (blo[a] + s) - ahi[a], alo[a] - (bhi[a] + s)});
            best = std::min(best, gap);
        }
        acc += best * best;
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Transition graph
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> box_test_points(const BoxCover& cover, std::size_t box,
                                                 int samples_per_box) {
    const int dim = cover.space.dim;
    std::vector<double> lo, hi;
    cover.box_bounds(box, lo, hi);
    std::vector<std::vector<double>> pts;
    const int corners = 1 << dim;
    for (int mask = 0; mask < corners; ++mask) {
        std::vector<double> p(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k)
            p[static_cast<std::size_t>(k)] =
                (mask >> k & 1) ? hi[static_cast<std::size_t>(k)] : lo[static_cast<std::size_t>(k)];
        pts.push_back(std::move(p));
    }
    std::vector<double> center(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        center[a] = 0.5 * (lo[a] + hi[a]);
    }
    pts.push_back(std::move(center));
    const int interior = samples_per_box - corners - 1;
    for (int j = 0; j < interior; ++j) {
        const std::size_t h_index = box * static_cast<std::size_t>(interior) +
                                    static_cast<std::size_t>(j) + 1;
        std::vector<double> p(static_cast<std::size_t>(dim));
        for (int k = 0; k < dim; ++k) {
            const std::size_t a = static_cast<std::size_t>(k);
            p[a] = lo[a] + halton(h_index, halton_base(k)) * (hi[a] - lo[a]);
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

namespace {

// Enumerate boxes whose closed bounds come within `delta` of point q and
// append the hits to `out` (unsorted, may contain duplicates).
void append_nearby_boxes(const BoxCover& cover, const std::vector<double>& q, double delta,
                         std::vector<int>& out) {
    const int dim = cover.space.dim;
    const std::vector<double> p = normalize_point(cover.space, q);
    std::vector<std::vector<int>> axis_candidates(static_cast<std::size_t>(dim));
    for (int k = 0; k < dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        const double w = cover.box_width[a];
        const long long lo_i =
            static_cast<long long>(std::floor((p[a] - delta - cover.region.lo[a]) / w)) - 1;
        const long long hi_i =
            static_cast<long long>(std::floor((p[a] + delta - cover.region.lo[a]) / w)) + 1;
        std::vector<int>& cand = axis_candidates[a];
        if (hi_i - lo_i + 1 >= cover.per_axis) {
            for (int c = 0; c < cover.per_axis; ++c) cand.push_back(c);
        } else if (cover.space.kind == SpaceKind::torus) {
            for (long long c = lo_i; c <= hi_i; ++c) {
                long long m = c % cover.per_axis;
                if (m < 0) m += cover.per_axis;
                cand.push_back(static_cast<int>(m));
            }
            std::sort(cand.begin(), cand.end());
            cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
        } else {
            for (long long c = std::max<long long>(lo_i, 0);
                 c <= std::min<long long>(hi_i, cover.per_axis - 1); ++c)
                cand.push_back(static_cast<int>(c));
        }
        if (cand.empty()) return;
    }
    std::vector<int> coords(static_cast<std::size_t>(dim), 0);
    std::vector<std::size_t> pos(static_cast<std::size_t>(dim), 0);
    std::vector<double> blo, bhi;
    while (true) {
        for (int k = 0; k < dim; ++k)
            coords[static_cast<std::size_t>(k)] =
                axis_candidates[static_cast<std::size_t>(k)][pos[static_cast<std::size_t>(k)]];
        const std::size_t idx = cover.index_of(coords);
        cover.box_bounds(idx, blo, bhi);
        if (box_point_distance(cover.space, p, blo, bhi) <= delta)
            out.push_back(static_cast<int>(idx));
        int k = dim - 1;
        while (k >= 0) {
            const std::size_t a = static_cast<std::size_t>(k);
            if (++pos[a] < axis_candidates[a].size()) break;
            pos[a] = 0;
            --k;
        }
        if (k < 0) break;
    }
}

}  // namespace

BoxGraph transition_graph(const SystemSpec& spec, const BoxCover& cover, double delta,
                          double t_edge, int samples_per_box, const IntegratorConfig& cfg,
                          int jobs) {
    if (delta < 0.0) throw std::invalid_argument("transition_graph: delta must be >= 0");
    if (t_edge < 1.0) throw std::invalid_argument("transition_graph: t_edge must be >= 1");
    const int corners = 1 << cover.space.dim;
    if (samples_per_box < corners + 1)
        throw std::invalid_argument("transition_graph: samples_per_box must cover corners + center");

    BoxGraph graph;
    graph.cover = cover;
    graph.delta = delta;
    graph.t_edge = t_edge;
    graph.samples_per_box = samples_per_box;
    for (double t = 1.0; t <= t_edge + 1e-9; t += 0.5) graph.t_samples.push_back(t);

    const std::size_t n = cover.box_count();
    graph.edges.assign(n, {});
    parallel_for(n, jobs, [&](std::size_t box) {
        std::vector<int> targets;
        for (const std::vector<double>& p : box_test_points(cover, box, samples_per_box)) {
            try {
                FlowWalker walker(spec, p, cfg);
                double reached = 0.0;
                for (double t : graph.t_samples) {
                    const std::vector<double>& image = walker.advance(t - reached);
                    reached = t;
                    append_nearby_boxes(cover, image, delta, targets);
                }
            } catch (const EscapeError&) {
                // escaping samples contribute no further edges
            }
        }
        std::sort(targets.begin(), targets.end());
        targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
        graph.edges[box] = std::move(targets);
    });
    for (const std::vector<int>& succ : graph.edges) graph.edge_count += succ.size();
    return graph;
}

// ---------------------------------------------------------------------------
// Tarjan SCC (iterative) and condensation
// ---------------------------------------------------------------------------

SccResult scc(const BoxGraph& graph) {
    const std::size_t n = graph.cover.box_count();
    SccResult res;
    res.component.assign(n, -1);
    std::vector<int> index(n, -1), lowlink(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    int next_index = 0;
    int next_comp = 0;  // Tarjan pop order: components reachable from C pop before C

    struct Frame {
        int v;
        std::size_t child;
    };
    std::vector<Frame> frames;
    for (std::size_t root = 0; root < n; ++root) {
        if (index[root] != -1) continue;
        frames.push_back({static_cast<int>(root), 0});
        while (!frames.empty()) {
            Frame& f = frames.back();
            const int v = f.v;
            if (f.child == 0) {
                index[static_cast<std::size_t>(v)] = lowlink[static_cast<std::size_t>(v)] = next_index++;
                stack.push_back(v);
                on_stack[static_cast<std::size_t>(v)] = 1;
            }
            bool descended = false;
            const std::vector<int>& succ = graph.edges[static_cast<std::size_t>(v)];
            while (f.child < succ.size()) {
                const int w = succ[f.child++];
                if (index[static_cast<std::size_t>(w)] == -1) {
                    frames.push_back({w, 0});
                    descended = true;
                    break;
                }
                if (on_stack[static_cast<std::size_t>(w)])
                    lowlink[static_cast<std::size_t>(v)] =
                        std::min(lowlink[static_cast<std::size_t>(v)], index[static_cast<std::size_t>(w)]);
            }
            if (descended) continue;
            if (lowlink[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
                while (true) {
                    const int w = stack.back();
                    stack.pop_back();
                    on_stack[static_cast<std::size_t>(w)] = 0;
                    res.component[static_cast<std::size_t>(w)] = next_comp;
                    if (w == v) break;
                }
                ++next_comp;
            }
            frames.pop_back();
            if (!frames.empty()) {
                Frame& parent = frames.back();
                lowlink[static_cast<std::size_t>(parent.v)] =
                    std::min(lowlink[static_cast<std::size_t>(parent.v)],
                             lowlink[static_cast<std::size_t>(v)]);
            }
        }
    }

    // Re-number so condensation edges run from lower to higher component ids.
    res.count = next_comp;
    for (std::size_t b = 0; b < n; ++b)
        res.component[b] = next_comp - 1 - res.component[b];
    res.members.assign(static_cast<std::size_t>(res.count), {});
    for (std::size_t b = 0; b < n; ++b)
        res.members[static_cast<std::size_t>(res.component[b])].push_back(static_cast<int>(b));
    res.dag.assign(static_cast<std::size_t>(res.count), {});
    res.recurrent.assign(static_cast<std::size_t>(res.count), 0);
    for (std::size_t b = 0; b < n; ++b) {
        const int cu = res.component[b];
        if (res.members[static_cast<std::size_t>(cu)].size() > 1) res.recurrent[static_cast<std::size_t>(cu)] = 1;
        for (int w : graph.edges[b]) {
            const int cv = res.component[static_cast<std::size_t>(w)];
            if (cv == cu) {
                if (w == static_cast<int>(b)) res.recurrent[static_cast<std::size_t>(cu)] = 1;
            } else {
                res.dag[static_cast<std::size_t>(cu)].push_back(cv);
            }
        }
    }
    for (std::vector<int>& succ : res.dag) {
        std::sort(succ.begin(), succ.end());
        succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    }
    return res;
}

ChainTransitiveReport chain_transitive(const BoxGraph& graph) {
    const SccResult comps = scc(graph);
    ChainTransitiveReport report;
    if (comps.count <= 1) {
        report.transitive = true;
        return report;
    }
    report.transitive = false;
    // The topologically last component has no outgoing edges, so it cannot
    // reach any other component.  Prefer another terminal component as the
    // unreachable target (an attractor pair when two exist).
    const int from_comp = comps.count - 1;
    int to_comp = 0;
    for (int c = comps.count - 2; c >= 0; --c) {
        if (comps.dag[static_cast<std::size_t>(c)].empty() && comps.recurrent[static_cast<std::size_t>(c)]) {
            to_comp = c;
            break;
        }
    }
    report.witness_from = comps.members[static_cast<std::size_t>(from_comp)].front();
    report.witness_to = comps.members[static_cast<std::size_t>(to_comp)].front();
    return report;
}

// ---------------------------------------------------------------------------
// Attractor candidates
// ---------------------------------------------------------------------------

std::vector<int> inflate_boxes(const BoxCover& cover, const std::vector<int>& boxes) {
    const int dim = cover.space.dim;
    std::vector<char> in(cover.box_count(), 0);
    std::vector<int> offsets(static_cast<std::size_t>(dim), -1);
    for (int b : boxes) {
        const std::vector<int> c = cover.coords_of(static_cast<std::size_t>(b));
        std::fill(offsets.begin(), offsets.end(), -1);
        while (true) {
            std::vector<int> nb(static_cast<std::size_t>(dim));
            bool ok = true;
            for (int k = 0; k < dim && ok; ++k) {
                const std::size_t a = static_cast<std::size_t>(k);
                int v = c[a] + offsets[a];
                if (cover.space.kind == SpaceKind::torus) {
                    v = (v % cover.per_axis + cover.per_axis) % cover.per_axis;
                } else if (v < 0 || v >= cover.per_axis) {
                    ok = false;
                }
                nb[a] = v;
            }
            if (ok) in[cover.index_of(nb)] = 1;
            int k = dim - 1;
            while (k >= 0) {
                const std::size_t a = static_cast<std::size_t>(k);
                if (++offsets[a] <= 1) break;
                offsets[a] = -1;
                --k;
            }
            if (k < 0) break;
        }
    }
    std::vector<int> out;
    for (std::size_t b = 0; b < in.size(); ++b)
        if (in[b]) out.push_back(static_cast<int>(b));
    return out;
}

std::vector<AttractorCandidate> find_attractors(const BoxGraph& graph) {
    return find_attractors(graph, scc(graph));
}

std::vector<AttractorCandidate> find_attractors(const BoxGraph& graph, const SccResult& comps) {
    const std::size_t nc = static_cast<std::size_t>(comps.count);
    std::vector<char> has_incoming(nc, 0);
    std::vector<std::vector<int>> reverse_dag(nc);
    for (std::size_t c = 0; c < nc; ++c)
        for (int d : comps.dag[c]) {
            has_incoming[static_cast<std::size_t>(d)] = 1;
            reverse_dag[static_cast<std::size_t>(d)].push_back(static_cast<int>(c));
        }
    std::vector<int> initial_comps;
    for (std::size_t c = 0; c < nc; ++c)
        if (!has_incoming[c]) initial_comps.push_back(static_cast<int>(c));

    std::vector<AttractorCandidate> out;
    for (std::size_t c = 0; c < nc; ++c) {
        if (!comps.dag[c].empty() || !comps.recurrent[c]) continue;
        AttractorCandidate cand;
        cand.component = static_cast<int>(c);
        cand.boxes = comps.members[c];
        cand.neighborhood = inflate_boxes(graph.cover, cand.boxes);
        // basin = boxes of every component that reaches this one (ancestors + self)
        std::vector<char> seen(nc, 0);
        std::vector<int> todo{static_cast<int>(c)};
        seen[c] = 1;
        while (!todo.empty()) {
            const int cur = todo.back();
            todo.pop_back();
            for (int b : comps.members[static_cast<std::size_t>(cur)]) cand.basin.push_back(b);
            for (int pred : reverse_dag[static_cast<std::size_t>(cur)])
                if (!seen[static_cast<std::size_t>(pred)]) {
                    seen[static_cast<std::size_t>(pred)] = 1;
                    todo.push_back(pred);
                }
        }
        std::sort(cand.basin.begin(), cand.basin.end());
        bool disjoint_initial = false;
        for (int ic : initial_comps)
            if (ic != static_cast<int>(c)) disjoint_initial = true;
        cand.proper = disjoint_initial && cand.boxes.size() != graph.cover.box_count();
        out.push_back(std::move(cand));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Omega limits
// ---------------------------------------------------------------------------

std::vector<int> omega_limit(const SystemSpec& spec, const std::vector<double>& x, double burn_t,
                             double obs_t, const BoxCover& cover, const IntegratorConfig& cfg) {
    if (burn_t < 1.0 || obs_t < 1.0)
        throw std::invalid_argument("omega_limit: burn and observation times must be >= 1");
    FlowWalker walker(spec, x, cfg);
    walker.advance(burn_t);
    std::vector<char> visited(cover.box_count(), 0);
    const long long b0 = cover.locate(walker.state());
    if (b0 >= 0) visited[static_cast<std::size_t>(b0)] = 1;
    double remaining = obs_t;
    while (remaining > 1e-12) {
        const double dt = std::min(cfg.step, remaining);
        const long long b = cover.locate(walker.advance(dt));
        if (b >= 0) visited[static_cast<std::size_t>(b)] = 1;
        remaining -= dt;
    }
    std::vector<int> out;
    for (std::size_t b = 0; b < visited.size(); ++b)
        if (visited[b]) out.push_back(static_cast<int>(b));
    return out;
}

// ---------------------------------------------------------------------------
// Topological transitivity probe
// ---------------------------------------------------------------------------

namespace {

bool in_inflated_box(const BoxCover& cover, const std::vector<double>& p,
                     const std::vector<double>& lo, const std::vector<double>& hi) {
    const std::vector<double> q = normalize_point(cover.space, p);
    for (int k = 0; k < cover.space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        const double ilo = lo[a] - cover.box_width[a];
        const double ihi = hi[a] + cover.box_width[a];
        bool inside = q[a] >= ilo && q[a] <= ihi;
        if (!inside && cover.space.kind == SpaceKind::torus) {
            const double period = cover.space.hi[a] - cover.space.lo[a];
            inside = (q[a] + period >= ilo && q[a] + period <= ihi) ||
                     (q[a] - period >= ilo && q[a] - period <= ihi);
        }
        if (!inside) return false;
    }
    return true;
}

}  // namespace

TransitivityPair transitivity_pair(const SystemSpec& spec, const BoxCover& cover,
                                   const BoxGraph& graph, int from_box, int to_box, double t_max,
                                   const IntegratorConfig& cfg) {
    const std::size_t n = cover.box_count();
    if (from_box < 0 || to_box < 0 || static_cast<std::size_t>(from_box) >= n ||
        static_cast<std::size_t>(to_box) >= n)
        throw std::invalid_argument("transitivity_pair: box index out of range");
    const int corners = 1 << cover.space.dim;
    TransitivityPair result;
    result.from_box = from_box;
    result.to_box = to_box;
    std::vector<double> tlo, thi;
    cover.box_bounds(static_cast<std::size_t>(to_box), tlo, thi);

    double best_hit = std::numeric_limits<double>::infinity();
    for (const std::vector<double>& p :
         box_test_points(cover, static_cast<std::size_t>(from_box), corners + 1)) {
        try {
            FlowWalker walker(spec, p, cfg);
            double t = 0.0;
            while (t < t_max - 1e-12) {
                const double dt = std::min(cfg.step, t_max - t);
                const std::vector<double>& q = walker.advance(dt);
                t += dt;
                if (in_inflated_box(cover, q, tlo, thi)) {
                    best_hit = std::min(best_hit, t);
                    break;
                }
            }
        } catch (const EscapeError&) {
        }
    }
    if (best_hit < std::numeric_limits<double>::infinity()) {
        result.outcome = PairOutcome::hit;
        result.hit_time = best_hit;
        return result;
    }
    // refutation attempt: forward-closed reachable set vs inflated target
    std::vector<char> reach(n, 0);
    std::vector<int> todo{from_box};
    reach[static_cast<std::size_t>(from_box)] = 1;
    while (!todo.empty()) {
        const int cur = todo.back();
        todo.pop_back();
        for (int w : graph.edges[static_cast<std::size_t>(cur)])
            if (!reach[static_cast<std::size_t>(w)]) {
                reach[static_cast<std::size_t>(w)] = 1;
                todo.push_back(w);
            }
    }
    const std::vector<int> target_set = inflate_boxes(cover, std::vector<int>{to_box});
    bool disjoint = true;
    for (int b : target_set)
        if (reach[static_cast<std::size_t>(b)]) disjoint = false;
    if (disjoint) {
        result.outcome = PairOutcome::refuted;
        for (std::size_t b = 0; b < n; ++b)
            if (reach[b]) result.blocking_set.push_back(static_cast<int>(b));
    } else {
        result.outcome = PairOutcome::inconclusive;
    }
    return result;
}

TransitivityReport topologically_transitive(const SystemSpec& spec, const BoxCover& cover,
                                            int pair_budget, double t_max,
                                            const IntegratorConfig& cfg, std::uint64_t seed,
                                            int jobs) {
    if (pair_budget < 1) throw std::invalid_argument("topologically_transitive: pair_budget >= 1");
    TransitivityReport report;
    report.seed = seed;
    report.t_max = t_max;

    const std::size_t n = cover.box_count();
    const int corners = 1 << cover.space.dim;
    const BoxGraph graph = transition_graph(spec, cover, 0.0, 2.0, corners + 1, cfg, jobs);
    const SccResult comps = scc(graph);

    SplitMix64 rng(seed);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < pair_budget; ++i) {
        const int u = static_cast<int>(rng.next_below(n));
        const int v = static_cast<int>(rng.next_below(n));
        pairs.emplace_back(u, v);
    }
    // attractor boxes x initial-component boxes, both orientations
    const std::vector<AttractorCandidate> attractors = find_attractors(graph, comps);
    std::vector<char> has_incoming(static_cast<std::size_t>(comps.count), 0);
    for (int c = 0; c < comps.count; ++c)
        for (int d : comps.dag[static_cast<std::size_t>(c)]) has_incoming[static_cast<std::size_t>(d)] = 1;
    std::vector<int> initial_boxes;
    for (int c = 0; c < comps.count; ++c)
        if (!has_incoming[static_cast<std::size_t>(c)])
            for (int b : comps.members[static_cast<std::size_t>(c)]) initial_boxes.push_back(b);
    std::size_t product = 0;
    for (const AttractorCandidate& cand : attractors) product += cand.boxes.size() * initial_boxes.size();
    for (const AttractorCandidate& cand : attractors) {
        if (product <= 32) {
            for (int a : cand.boxes)
                for (int r : initial_boxes) {
                    pairs.emplace_back(a, r);
                    pairs.emplace_back(r, a);
                }
        } else if (!cand.boxes.empty() && !initial_boxes.empty()) {
            pairs.emplace_back(cand.boxes.front(), initial_boxes.front());
            pairs.emplace_back(initial_boxes.front(), cand.boxes.front());
        }
    }
    std::sort(pairs.begin() + pair_budget, pairs.end());
    pairs.erase(std::unique(pairs.begin() + pair_budget, pairs.end()), pairs.end());

    report.pairs.assign(pairs.size(), {});
    parallel_for(pairs.size(), jobs, [&](std::size_t pi) {
        report.pairs[pi] =
            transitivity_pair(spec, cover, graph, pairs[pi].first, pairs[pi].second, t_max, cfg);
    });

    bool any_refuted = false, all_hit = true;
    for (const TransitivityPair& p : report.pairs) {
        if (p.outcome == PairOutcome::refuted) any_refuted = true;
        if (p.outcome != PairOutcome::hit) all_hit = false;
    }
    report.verdict = any_refuted ? Verdict::fails : (all_hit ? Verdict::holds : Verdict::inconclusive);
    return report;
}

// ---------------------------------------------------------------------------
// Stable/unstable witness
// ---------------------------------------------------------------------------

WitnessCheck witness_from_samples(const std::vector<double>& forward_errors,
                                  const std::vector<double>& backward_errors,
                                  bool forward_escaped, bool backward_escaped,
                                  double sample_dt) {
    auto fit_rate = [&](const std::vector<double>& e) {
        std::vector<double> ts, logs;
        for (std::size_t j = 0; j < e.size(); ++j)
            if (e[j] > 1e-15) {
                ts.push_back(static_cast<double>(j) * sample_dt);
                logs.push_back(std::log(e[j]));
            }
        if (ts.empty()) return -1e9;  // identically zero: decayed as fast as representable
        if (ts.size() == 1) return 0.0;
        return fit_linear(ts, logs).slope;
    };
    WitnessCheck check;
    check.forward_escaped = forward_escaped;
    check.backward_escaped = backward_escaped;
    check.forward_final = forward_errors.empty() ? std::numeric_limits<double>::infinity()
                                                 : forward_errors.back();
    check.backward_final = backward_errors.empty() ? std::numeric_limits<double>::infinity()
                                                   : backward_errors.back();
    check.forward_rate = fit_rate(forward_errors);
    check.backward_rate = fit_rate(backward_errors);
    const bool ok = !forward_escaped && !backward_escaped && check.forward_final <= 1e-3 &&
                    check.backward_final <= 1e-3 && check.forward_rate < 0.0 &&
                    check.backward_rate < 0.0;
    check.verdict = ok ? Verdict::holds : Verdict::fails;
    return check;
}

WitnessCheck stable_unstable_witness(const SystemSpec& spec, const std::vector<double>& x,
                                     const std::vector<double>& y, double gap_k,
                                     const std::vector<double>& z, double total_t,
                                     const IntegratorConfig& cfg) {
    if (total_t < 10.0)
        throw std::invalid_argument("stable_unstable_witness: total time must be >= 10");
    const double dt = 0.5;
    const int n = static_cast<int>(std::floor(total_t / dt + 1e-9));

    std::vector<double> ef, eb;
    bool fesc = false, besc = false;
    try {
        const std::vector<double> zk = flow_to(spec, z, gap_k, cfg);
        FlowWalker wa(spec, zk, cfg), wb(spec, x, cfg);
        ef.push_back(distance(spec.space, wa.state(), wb.state()));
        for (int j = 1; j <= n; ++j) {
            const std::vector<double>& a = wa.advance(dt);
            const std::vector<double>& b = wb.advance(dt);
            ef.push_back(distance(spec.space, a, b));
        }
    } catch (const EscapeError&) {
        fesc = true;
    }
    try {
        FlowWalker wa(spec, z, cfg), wb(spec, y, cfg);
        eb.push_back(distance(spec.space, wa.state(), wb.state()));
        for (int j = 1; j <= n; ++j) {
            const std::vector<double>& a = wa.advance(-dt);
            const std::vector<double>& b = wb.advance(-dt);
            eb.push_back(distance(spec.space, a, b));
        }
    } catch (const EscapeError&) {
        besc = true;
    }
    return witness_from_samples(ef, eb, fesc, besc, dt);
}

}  // namespace orbitcert
