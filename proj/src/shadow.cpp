#include "orbitcert/shadow.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>

#include "orbitcert/util.hpp"

namespace orbitcert {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// Reparameterization
// ---------------------------------------------------------------------------

Reparameterization Reparameterization::identity() {
    Reparameterization h;
    h.knots_t = {0.0};
    h.knots_h = {0.0};
    return h;
}

double Reparameterization::operator()(double t) const {
    if (t <= knots_t.front()) return knots_h.front() + (t - knots_t.front());
    if (t >= knots_t.back()) return knots_h.back() + (t - knots_t.back());
    const std::size_t hi = static_cast<std::size_t>(
        std::upper_bound(knots_t.begin(), knots_t.end(), t) - knots_t.begin());
    const std::size_t lo = hi - 1;
    const double w = (t - knots_t[lo]) / (knots_t[hi] - knots_t[lo]);
    return knots_h[lo] + w * (knots_h[hi] - knots_h[lo]);
}

bool Reparameterization::is_identity() const {
    for (std::size_t i = 0; i < knots_t.size(); ++i)
        if (knots_t[i] != knots_h[i]) return false;
    return true;
}

void validate_reparameterization(const Reparameterization& h) {
    if (h.knots_t.empty() || h.knots_t.size() != h.knots_h.size())
        throw std::invalid_argument("reparameterization: empty or mismatched knot lists");
    bool has_origin = false;
    for (std::size_t i = 0; i < h.knots_t.size(); ++i) {
        if (i > 0 && !(h.knots_t[i] > h.knots_t[i - 1] && h.knots_h[i] > h.knots_h[i - 1]))
            throw std::invalid_argument("reparameterization: knots must increase strictly");
        if (h.knots_t[i] == 0.0) {
            if (h.knots_h[i] != 0.0)
                throw std::invalid_argument("reparameterization: must fix the time origin");
            has_origin = true;
        }
    }
    if (!has_origin) throw std::invalid_argument("reparameterization: knot (0, 0) is required");
}

// ---------------------------------------------------------------------------
// Modes and statistics
// ---------------------------------------------------------------------------

std::string to_string(ShadowMode mode) {
    switch (mode) {
        case ShadowMode::uniform: return "uniform";
        case ShadowMode::average: return "average";
        case ShadowMode::asymptotic_average: return "asymptotic_average";
        case ShadowMode::limit: return "limit";
        case ShadowMode::gap: return "gap";
    }
    return "?";
}

std::optional<ShadowMode> shadow_mode_from_string(const std::string& name) {
    if (name == "uniform") return ShadowMode::uniform;
    if (name == "average") return ShadowMode::average;
    if (name == "asymptotic_average") return ShadowMode::asymptotic_average;
    if (name == "limit") return ShadowMode::limit;
    if (name == "gap") return ShadowMode::gap;
    return std::nullopt;
}

double error_statistic(const std::vector<double>& per_segment, ShadowMode mode) {
    if (per_segment.empty())
        throw std::invalid_argument("error_statistic: empty per-segment sequence");
    const std::size_t m = per_segment.size();
    switch (mode) {
        case ShadowMode::uniform:
            return *std::max_element(per_segment.begin(), per_segment.end());
        case ShadowMode::average: {
            double acc = 0.0, best = -kInf;
            const std::size_t n0 = (m + 1) / 2;
            for (std::size_t n = 1; n <= m; ++n) {
                acc += per_segment[n - 1];
                if (n >= n0) best = std::max(best, acc / static_cast<double>(n));
            }
            return best;
        }
        case ShadowMode::asymptotic_average: {
            std::vector<double> running(m);
            double acc = 0.0;
            for (std::size_t n = 1; n <= m; ++n) {
                acc += per_segment[n - 1];
                running[n - 1] = acc / static_cast<double>(n);
            }
            double beta = 0.0;
            const std::size_t start = m / 2;
            if (m - start >= 2) {
                std::vector<double> xs, ys;
                for (std::size_t j = start; j < m; ++j) {
                    xs.push_back(static_cast<double>(j + 1));
                    ys.push_back(running[j]);
                }
                beta = fit_linear(xs, ys).slope;
            }
            return running.back() + std::max(0.0, beta);
        }
        case ShadowMode::limit:
        case ShadowMode::gap: {
            const std::size_t q = (m + 3) / 4;
            double best = 0.0;
            for (std::size_t j = m - q; j < m; ++j) best = std::max(best, per_segment[j]);
            return best;
        }
    }
    return 0.0;
}

double statistic_from_segments(const std::vector<SegmentCheck>& segments, ShadowMode mode,
                               bool forward_escaped, bool backward_escaped,
                               std::optional<double>* forward_out,
                               std::optional<double>* backward_out) {
    std::vector<double> fwd, bwd;  // ordered outward from the window center
    for (const SegmentCheck& s : segments) {
        const double entry = mode == ShadowMode::uniform ? s.sup : s.integral;
        if (s.index >= 0) fwd.push_back(entry);
    }
    for (auto it = segments.rbegin(); it != segments.rend(); ++it)
        if (it->index < 0) bwd.push_back(mode == ShadowMode::uniform ? it->sup : it->integral);
    // reverse iteration over the index-sorted list already yields -1, -2, ...

    if (mode == ShadowMode::average && !fwd.empty())
        fwd.erase(fwd.begin());  // the forward running means start at the second segment

    std::optional<double> fstat, bstat;
    if (forward_escaped)
        fstat = kInf;
    else if (!fwd.empty())
        fstat = error_statistic(fwd, mode);
    if (backward_escaped)
        bstat = kInf;
    else if (!bwd.empty())
        bstat = error_statistic(bwd, mode);
    if (forward_out) *forward_out = fstat;
    if (backward_out) *backward_out = bstat;
    if (!fstat && !bstat)
        throw std::invalid_argument("statistic_from_segments: no tracked segments");
    double value = -kInf;
    if (fstat) value = std::max(value, *fstat);
    if (bstat) value = std::max(value, *bstat);
    return value;
}

// ---------------------------------------------------------------------------
// Reference tables: each segment's comparison orbit at trapezoid nodes
// ---------------------------------------------------------------------------

namespace {

struct SegmentTable {
    int index = 0;
    double s_lo = 0.0;
    double len = 0.0;
    int n_sub = 1;
    long long id_lo = 0;  // node id on the sub-step lattice (valid when lattice)
    std::vector<std::vector<double>> ref;  // n_sub + 1 states
};

struct RefTables {
    double sub = 0.0;
    bool lattice = true;  // all node times are integer multiples of sub
    std::vector<SegmentTable> segments;
};

RefTables build_ref_tables(const PseudoOrbit& po, const IntegratorConfig& cfg) {
    RefTables tables;
    tables.sub = cfg.step * 10.0;
    const SystemSpec& spec = *po.system;
    double s_acc_fwd = 0.0;
    long long id_acc_fwd = 0;
    // backward prefix: s_at(i) for i < 0
    double s_acc_bwd = 0.0;
    long long id_acc_bwd = 0;

    for (int i = po.i_min(); i < po.i_max(); ++i) {
        SegmentTable seg;
        seg.index = i;
        seg.len = po.duration(i);
        const long long ticks = std::llround(seg.len / tables.sub);
        if (ticks < 1 || std::abs(seg.len - static_cast<double>(ticks) * tables.sub) > 1e-9)
            tables.lattice = false;
        seg.n_sub = std::max(1, static_cast<int>(std::ceil(seg.len / tables.sub - 1e-9)));
        if (tables.lattice) seg.n_sub = static_cast<int>(ticks);
        tables.segments.push_back(std::move(seg));
    }
    // cumulative start times / lattice ids
    for (SegmentTable& seg : tables.segments) {
        if (seg.index >= 0) continue;
        (void)seg;
    }
    // forward side ascending
    for (SegmentTable& seg : tables.segments)
        if (seg.index >= 0) {
            seg.s_lo = s_acc_fwd;
            seg.id_lo = id_acc_fwd;
            s_acc_fwd += seg.len;
            id_acc_fwd += seg.n_sub;
        }
    // backward side: walk indices -1 down to i_min
    for (auto it = tables.segments.rbegin(); it != tables.segments.rend(); ++it)
        if (it->index < 0) {
            s_acc_bwd -= it->len;
            id_acc_bwd -= it->n_sub;
            it->s_lo = s_acc_bwd;
            it->id_lo = id_acc_bwd;
        }
    for (SegmentTable& seg : tables.segments) {
        FlowWalker walker(spec, po.point(seg.index), cfg);
        seg.ref.reserve(static_cast<std::size_t>(seg.n_sub) + 1);
        seg.ref.push_back(walker.state());
        const double dt = seg.len / static_cast<double>(seg.n_sub);
        for (int j = 1; j <= seg.n_sub; ++j) seg.ref.push_back(walker.advance(dt));
    }
    return tables;
}

// Orbit of z sampled on a sub-step lattice; escape truncates the valid range.
struct ZTable {
    double sub = 0.0;
    long long lo = 0, hi = 0;
    long long valid_lo = 0, valid_hi = 0;
    std::vector<std::vector<double>> values;

    const std::vector<double>* at(long long id) const {
        if (id < valid_lo || id > valid_hi) return nullptr;
        return &values[static_cast<std::size_t>(id - lo)];
    }
};

ZTable build_ztable(const SystemSpec& spec, const std::vector<double>& z, double sub, long long lo,
                    long long hi, const IntegratorConfig& cfg) {
    ZTable tab;
    tab.sub = sub;
    tab.lo = std::min(lo, 0LL);
    tab.hi = std::max(hi, 0LL);
    tab.values.assign(static_cast<std::size_t>(tab.hi - tab.lo + 1), {});
    tab.values[static_cast<std::size_t>(-tab.lo)] = normalize_point(spec.space, z);
    tab.valid_lo = tab.valid_hi = 0;
    try {
        FlowWalker walker(spec, z, cfg);
        for (long long id = 1; id <= tab.hi; ++id) {
            tab.values[static_cast<std::size_t>(id - tab.lo)] = walker.advance(sub);
            tab.valid_hi = id;
        }
    } catch (const EscapeError&) {
    }
    try {
        FlowWalker walker(spec, z, cfg);
        for (long long id = -1; id >= tab.lo; --id) {
            tab.values[static_cast<std::size_t>(id - tab.lo)] = walker.advance(-sub);
            tab.valid_lo = id;
        }
    } catch (const EscapeError&) {
    }
    return tab;
}

struct SweepOutcome {
    std::vector<SegmentCheck> segments;
    bool forward_escaped = false;
    bool backward_escaped = false;
};

SegmentCheck finish_segment(const SegmentTable& seg, const std::vector<double>& node_d) {
    SegmentCheck check;
    check.index = seg.index;
    check.length = seg.len;
    const double dt = seg.len / static_cast<double>(seg.n_sub);
    double integral = 0.0, sup = 0.0;
    for (int j = 0; j <= seg.n_sub; ++j) {
        const double d = node_d[static_cast<std::size_t>(j)];
        sup = std::max(sup, d);
        if (j > 0) integral += 0.5 * (node_d[static_cast<std::size_t>(j - 1)] + d) * dt;
    }
    check.integral = integral;
    check.sup = sup;
    return check;
}

// Tracked-orbit sweep against prebuilt lattice tables (time changes restricted
// to lattice shifts: forward h(t) = t + K, backward h(t) = t).
SweepOutcome sweep_with_table(const SpaceSpec& space, const RefTables& tables, const ZTable& ztab,
                              long long koff) {
    SweepOutcome out;
    std::vector<double> node_d;
    for (const SegmentTable& seg : tables.segments) {
        if (seg.index < 0) continue;
        node_d.assign(static_cast<std::size_t>(seg.n_sub) + 1, 0.0);
        bool ok = true;
        for (int j = 0; j <= seg.n_sub && ok; ++j) {
            const std::vector<double>* zv = ztab.at(seg.id_lo + j + koff);
            if (!zv) {
                ok = false;
                break;
            }
            node_d[static_cast<std::size_t>(j)] = distance(space, *zv, seg.ref[static_cast<std::size_t>(j)]);
        }
        if (!ok) {
            out.forward_escaped = true;
            break;
        }
        out.segments.push_back(finish_segment(seg, node_d));
    }
    for (auto it = tables.segments.rbegin(); it != tables.segments.rend(); ++it) {
        const SegmentTable& seg = *it;
        if (seg.index >= 0) continue;
        node_d.assign(static_cast<std::size_t>(seg.n_sub) + 1, 0.0);
        bool ok = true;
        for (int j = 0; j <= seg.n_sub && ok; ++j) {
            const std::vector<double>* zv = ztab.at(seg.id_lo + j);
            if (!zv) {
                ok = false;
                break;
            }
            node_d[static_cast<std::size_t>(j)] = distance(space, *zv, seg.ref[static_cast<std::size_t>(j)]);
        }
        if (!ok) {
            out.backward_escaped = true;
            break;
        }
        out.segments.push_back(finish_segment(seg, node_d));
    }
    std::sort(out.segments.begin(), out.segments.end(),
              [](const SegmentCheck& a, const SegmentCheck& b) { return a.index < b.index; });
    return out;
}

// Generic tracked-orbit sweep: walks the orbit of z along the requested time
// change, one side at a time.
SweepOutcome sweep_generic(const SystemSpec& spec, const RefTables& tables,
                           const std::vector<double>& z,
                           const std::function<double(double)>& fwd_h,
                           const std::function<double(double)>& bwd_h,
                           const IntegratorConfig& cfg) {
    SweepOutcome out;
    std::vector<double> node_d;
    bool have_fwd = false, have_bwd = false;
    for (const SegmentTable& seg : tables.segments) (seg.index >= 0 ? have_fwd : have_bwd) = true;

    if (have_fwd) {
        try {
            FlowWalker walker(spec, z, cfg);
            double hcur = 0.0;
            auto walk_to = [&](double target) -> const std::vector<double>& {
                if (std::abs(target - hcur) > 1e-15) {
                    const std::vector<double>& s = walker.advance(target - hcur);
                    hcur = target;
                    return s;
                }
                return walker.state();
            };
            for (const SegmentTable& seg : tables.segments) {
                if (seg.index < 0) continue;
                node_d.assign(static_cast<std::size_t>(seg.n_sub) + 1, 0.0);
                const double dt = seg.len / static_cast<double>(seg.n_sub);
                for (int j = 0; j <= seg.n_sub; ++j) {
                    const double tau = seg.s_lo + dt * static_cast<double>(j);
                    const std::vector<double>& zv = walk_to(fwd_h(tau));
                    node_d[static_cast<std::size_t>(j)] =
                        distance(spec.space, zv, seg.ref[static_cast<std::size_t>(j)]);
                }
                out.segments.push_back(finish_segment(seg, node_d));
            }
        } catch (const EscapeError&) {
            out.forward_escaped = true;
        }
    }
    if (have_bwd) {
        try {
            FlowWalker walker(spec, z, cfg);
            double hcur = 0.0;
            auto walk_to = [&](double target) -> const std::vector<double>& {
                if (std::abs(target - hcur) > 1e-15) {
                    const std::vector<double>& s = walker.advance(target - hcur);
                    hcur = target;
                    return s;
                }
                return walker.state();
            };
            for (auto it = tables.segments.rbegin(); it != tables.segments.rend(); ++it) {
                const SegmentTable& seg = *it;
                if (seg.index >= 0) continue;
                node_d.assign(static_cast<std::size_t>(seg.n_sub) + 1, 0.0);
                const double dt = seg.len / static_cast<double>(seg.n_sub);
                for (int j = seg.n_sub; j >= 0; --j) {
                    const double tau = seg.s_lo + dt * static_cast<double>(j);
                    const std::vector<double>& zv = walk_to(bwd_h(tau));
                    node_d[static_cast<std::size_t>(j)] =
                        distance(spec.space, zv, seg.ref[static_cast<std::size_t>(j)]);
                }
                out.segments.push_back(finish_segment(seg, node_d));
            }
        } catch (const EscapeError&) {
            out.backward_escaped = true;
        }
    }
    std::sort(out.segments.begin(), out.segments.end(),
              [](const SegmentCheck& a, const SegmentCheck& b) { return a.index < b.index; });
    return out;
}

SweepOutcome sweep_candidate(const SystemSpec& spec, const RefTables& tables,
                             const std::vector<double>& z, ShadowMode mode,
                             const Reparameterization& h, double gap_k,
                             const IntegratorConfig& cfg) {
    if (mode == ShadowMode::gap)
        return sweep_generic(
            spec, tables, z, [gap_k](double t) { return t + gap_k; },
            [](double t) { return t; }, cfg);
    return sweep_generic(
        spec, tables, z, [&h](double t) { return h(t); }, [&h](double t) { return h(t); }, cfg);
}

ShadowCheck make_check(const PseudoOrbit& po, const std::vector<double>& z, ShadowMode mode,
                       const Reparameterization& h, double gap_k, SweepOutcome&& sweep) {
    ShadowCheck check;
    check.mode = mode;
    check.z = normalize_point(po.system->space, z);
    check.reparam = h;
    check.gap_k = mode == ShadowMode::gap ? gap_k : 0.0;
    check.segments = std::move(sweep.segments);
    check.forward_escaped = sweep.forward_escaped;
    check.backward_escaped = sweep.backward_escaped;
    check.value = statistic_from_segments(check.segments, mode, check.forward_escaped,
                                          check.backward_escaped, &check.forward_statistic,
                                          &check.backward_statistic);
    return check;
}

}  // namespace

std::vector<double> segment_integrals(const PseudoOrbit& po, const std::vector<double>& z,
                                      const Reparameterization& h, double gap_k, OrbitSide side,
                                      const IntegratorConfig& cfg) {
    validate_pseudo_orbit(po);
    validate_reparameterization(h);
    if (side == OrbitSide::forward && po.i_max() < 1)
        throw std::invalid_argument("segment_integrals: window has no forward segments");
    if (side == OrbitSide::backward && po.i_min() >= 0)
        throw std::invalid_argument("segment_integrals: window has no backward segments");
    const RefTables tables = build_ref_tables(po, cfg);
    const ShadowMode mode = gap_k != 0.0 ? ShadowMode::gap : ShadowMode::limit;
    const SweepOutcome sweep = sweep_candidate(*po.system, tables, z, mode, h, gap_k, cfg);
    if (side == OrbitSide::forward && sweep.forward_escaped) throw EscapeError(0.0);
    if (side == OrbitSide::backward && sweep.backward_escaped) throw EscapeError(0.0);
    std::vector<double> out;
    if (side == OrbitSide::forward) {
        for (const SegmentCheck& s : sweep.segments)
            if (s.index >= 0) out.push_back(s.integral);
    } else {
        // ordered outward: -1, -2, ...
        for (auto it = sweep.segments.rbegin(); it != sweep.segments.rend(); ++it)
            if (it->index < 0) out.push_back(it->integral);
    }
    return out;
}

ShadowCheck evaluate_shadowing(const PseudoOrbit& po, const std::vector<double>& z,
                               ShadowMode mode, const Reparameterization& h, double gap_k,
                               const IntegratorConfig& cfg) {
    validate_pseudo_orbit(po);
    validate_reparameterization(h);
    if (po.size() < 2) throw std::invalid_argument("evaluate_shadowing: window has no segments");
    const RefTables tables = build_ref_tables(po, cfg);
    SweepOutcome sweep = sweep_candidate(*po.system, tables, z, mode, h, gap_k, cfg);
    return make_check(po, z, mode, h, gap_k, std::move(sweep));
}

// ---------------------------------------------------------------------------
// Dynamic-programming proposal for a bounded-slope time change
// ---------------------------------------------------------------------------

namespace {

constexpr double kKnotQuantum = 0.1;

struct DpSide {
    std::vector<long long> v;  // chosen lattice value at each knot (absolute, signed side applies)
    bool ok = false;
};

// Minimize the summed endpoint-rule tracking cost over monotone lattice paths
// h(u_j) = v_j * q_h with v_0 = 0 and v_{j+1} - v_j in [dv_min, dv_max].
DpSide dp_one_side(const std::vector<const std::vector<double>*>& knot_ref,
                   const SpaceSpec& space, const ZTable& ztab, long long sgn, int knots,
                   long long dv_min, long long dv_max) {
    DpSide side;
    if (knots == 0) {
        side.ok = true;
        side.v = {0};
        return side;
    }
    const long long vmax = dv_max * knots;
    const std::size_t width = static_cast<std::size_t>(vmax + 1);
    std::vector<double> cur(width, kInf), next(width, kInf);
    std::vector<std::vector<int>> parent(static_cast<std::size_t>(knots),
                                         std::vector<int>(width, -1));
    cur[0] = 0.0;
    std::vector<double> dist(width, kInf);
    for (int j = 0; j < knots; ++j) {
        // distances of every candidate lattice value against the two knot refs
        const std::vector<double>* ref_l = knot_ref[static_cast<std::size_t>(2 * j)];
        const std::vector<double>* ref_r = knot_ref[static_cast<std::size_t>(2 * j + 1)];
        std::vector<double> dl(width, kInf), dr(width, kInf);
        for (long long v = 0; v <= vmax; ++v) {
            const std::vector<double>* zv = ztab.at(sgn * v);
            if (!zv) continue;
            dl[static_cast<std::size_t>(v)] = distance(space, *zv, *ref_l);
            dr[static_cast<std::size_t>(v)] = distance(space, *zv, *ref_r);
        }
        std::fill(next.begin(), next.end(), kInf);
        for (long long v = 0; v <= vmax; ++v) {
            const double base = cur[static_cast<std::size_t>(v)];
            if (base == kInf) continue;
            for (long long dv = dv_min; dv <= dv_max; ++dv) {
                const long long v2 = v + dv;
                if (v2 > vmax) break;
                const double cost = base + 0.5 * kKnotQuantum *
                                               (dl[static_cast<std::size_t>(v)] +
                                                dr[static_cast<std::size_t>(v2)]);
                if (cost < next[static_cast<std::size_t>(v2)]) {
                    next[static_cast<std::size_t>(v2)] = cost;
                    parent[static_cast<std::size_t>(j)][static_cast<std::size_t>(v2)] =
                        static_cast<int>(dv);
                }
            }
        }
        cur.swap(next);
    }
    long long best_v = -1;
    double best = kInf;
    for (long long v = 0; v <= vmax; ++v)
        if (cur[static_cast<std::size_t>(v)] < best) {
            best = cur[static_cast<std::size_t>(v)];
            best_v = v;
        }
    if (best_v < 0) return side;
    side.v.assign(static_cast<std::size_t>(knots) + 1, 0);
    long long v = best_v;
    for (int j = knots - 1; j >= 0; --j) {
        side.v[static_cast<std::size_t>(j + 1)] = v;
        v -= parent[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)];
    }
    side.v[0] = 0;
    side.ok = true;
    return side;
}

std::optional<Reparameterization> dp_propose(const SystemSpec& spec, const RefTables& tables,
                                             const std::vector<double>& z, double lambda,
                                             const IntegratorConfig& cfg) {
    if (lambda <= 1.0) return std::nullopt;
    const long long per_knot = std::llround(kKnotQuantum / tables.sub);
    if (per_knot < 1 || std::abs(kKnotQuantum - static_cast<double>(per_knot) * tables.sub) > 1e-9)
        return std::nullopt;
    long long fwd_tenths = 0, bwd_tenths = 0;
    for (const SegmentTable& seg : tables.segments) {
        const long long t = std::llround(seg.len / kKnotQuantum);
        if (t < 1 || std::abs(seg.len - static_cast<double>(t) * kKnotQuantum) > 1e-9)
            return std::nullopt;
        (seg.index >= 0 ? fwd_tenths : bwd_tenths) += t;
    }
    const long long cl = static_cast<long long>(std::ceil(lambda - 1e-12));
    const double q_h = kKnotQuantum / static_cast<double>(cl);
    const long long dv_min =
        std::max<long long>(1, static_cast<long long>(std::ceil(static_cast<double>(cl) / lambda - 1e-9)));
    const long long dv_max = static_cast<long long>(std::floor(lambda * static_cast<double>(cl) + 1e-9));
    if (dv_max < dv_min) return std::nullopt;
    const long long states =
        (fwd_tenths + bwd_tenths + 2) * (dv_max * std::max(fwd_tenths, bwd_tenths) + 1);
    if (states > 4'000'000) return std::nullopt;

    // knot-interval reference points (left and right endpoint per interval, owner segment)
    auto side_refs = [&](bool forward) {
        std::vector<const std::vector<double>*> refs;
        if (forward) {
            for (const SegmentTable& seg : tables.segments) {
                if (seg.index < 0) continue;
                const long long t = std::llround(seg.len / kKnotQuantum);
                for (long long j = 0; j < t; ++j) {
                    refs.push_back(&seg.ref[static_cast<std::size_t>(j * per_knot)]);
                    refs.push_back(&seg.ref[static_cast<std::size_t>((j + 1) * per_knot)]);
                }
            }
        } else {
            for (auto it = tables.segments.rbegin(); it != tables.segments.rend(); ++it) {
                const SegmentTable& seg = *it;
                if (seg.index >= 0) continue;
                const long long t = std::llround(seg.len / kKnotQuantum);
                for (long long j = t; j > 0; --j) {
                    refs.push_back(&seg.ref[static_cast<std::size_t>(j * per_knot)]);
                    refs.push_back(&seg.ref[static_cast<std::size_t>((j - 1) * per_knot)]);
                }
            }
        }
        return refs;
    };
    const std::vector<const std::vector<double>*> fwd_refs = side_refs(true);
    const std::vector<const std::vector<double>*> bwd_refs = side_refs(false);

    const ZTable ztab = build_ztable(spec, z, q_h, -dv_max * bwd_tenths, dv_max * fwd_tenths, cfg);
    const DpSide fwd = dp_one_side(fwd_refs, spec.space, ztab, +1,
                                   static_cast<int>(fwd_tenths), dv_min, dv_max);
    const DpSide bwd = dp_one_side(bwd_refs, spec.space, ztab, -1,
                                   static_cast<int>(bwd_tenths), dv_min, dv_max);
    if (!fwd.ok || !bwd.ok) return std::nullopt;

    Reparameterization h;
    for (long long j = bwd_tenths; j >= 1; --j) {
        h.knots_t.push_back(-static_cast<double>(j) * kKnotQuantum);
        h.knots_h.push_back(-static_cast<double>(bwd.v[static_cast<std::size_t>(j)]) * q_h);
    }
    h.knots_t.push_back(0.0);
    h.knots_h.push_back(0.0);
    for (long long j = 1; j <= fwd_tenths; ++j) {
        h.knots_t.push_back(static_cast<double>(j) * kKnotQuantum);
        h.knots_h.push_back(static_cast<double>(fwd.v[static_cast<std::size_t>(j)]) * q_h);
    }
    validate_reparameterization(h);
    return h;
}

}  // namespace

// ---------------------------------------------------------------------------
// Search
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> uniform_grid(const Region& region, int per_axis) {
    if (per_axis < 2) throw std::invalid_argument("uniform_grid: need at least 2 points per axis");
    const std::size_t dim = region.lo.size();
    double total = 1.0;
    for (std::size_t k = 0; k < dim; ++k) total *= static_cast<double>(per_axis);
    if (total > 2e6) throw std::invalid_argument("uniform_grid: grid budget exceeded");
    std::vector<std::vector<double>> points;
    std::vector<int> idx(dim, 0);
    while (true) {
        std::vector<double> p(dim);
        for (std::size_t k = 0; k < dim; ++k)
            p[k] = region.lo[k] + (region.hi[k] - region.lo[k]) *
                                      (static_cast<double>(idx[k]) / static_cast<double>(per_axis - 1));
        points.push_back(std::move(p));
        std::size_t k = dim;
        while (k > 0) {
            if (++idx[k - 1] < per_axis) break;
            idx[k - 1] = 0;
            --k;
        }
        if (k == 0) break;
    }
    return points;
}

ShadowResult search_shadowing(const PseudoOrbit& po, ShadowMode mode,
                              const std::vector<std::vector<double>>& candidate_grid,
                              const ShadowSearchOptions& opts) {
    validate_pseudo_orbit(po);
    if (candidate_grid.empty()) throw std::invalid_argument("search_shadowing: empty grid");
    if (po.size() < 2) throw std::invalid_argument("search_shadowing: window has no segments");
    if (opts.lambda < 1.0) throw std::invalid_argument("search_shadowing: lambda must be >= 1");
    if (mode == ShadowMode::gap && (opts.n_gap < 0.0 || opts.gap_step <= 0.0))
        throw std::invalid_argument("search_shadowing: bad gap grid");

    const SystemSpec& spec = *po.system;
    const RefTables tables = build_ref_tables(po, opts.integ);

    std::vector<double> k_values{0.0};
    if (mode == ShadowMode::gap) {
        k_values.clear();
        const long long m = static_cast<long long>(std::floor(opts.n_gap / opts.gap_step + 1e-9));
        for (long long i = -m; i <= m; ++i)
            k_values.push_back(static_cast<double>(i) * opts.gap_step);
    }
    bool k_lattice = tables.lattice;
    std::vector<long long> k_offsets(k_values.size(), 0);
    for (std::size_t i = 0; i < k_values.size() && k_lattice; ++i) {
        k_offsets[i] = std::llround(k_values[i] / tables.sub);
        if (std::abs(k_values[i] - static_cast<double>(k_offsets[i]) * tables.sub) > 1e-9)
            k_lattice = false;
    }
    long long id_min = 0, id_max = 0;
    for (const SegmentTable& seg : tables.segments) {
        id_min = std::min(id_min, seg.id_lo);
        id_max = std::max(id_max, seg.id_lo + seg.n_sub);
    }
    long long koff_min = 0, koff_max = 0;
    for (long long k : k_offsets) {
        koff_min = std::min(koff_min, k);
        koff_max = std::max(koff_max, k);
    }

    struct PerZ {
        double value = kInf;
        double gap_k = 0.0;
        bool has_dp = false;
        Reparameterization h;
        std::size_t evaluated = 0;
        std::size_t escaped = 0;
    };
    std::vector<PerZ> best_per_z(candidate_grid.size());

    parallel_for(candidate_grid.size(), opts.jobs, [&](std::size_t zi) {
        const std::vector<double>& z = candidate_grid[zi];
        PerZ best;
        best.h = Reparameterization::identity();
        auto consider = [&](double value, double gap_k, bool has_dp, const Reparameterization& h,
                            bool escaped) {
            ++best.evaluated;
            if (escaped) ++best.escaped;
            if (value < best.value) {
                best.value = value;
                best.gap_k = gap_k;
                best.has_dp = has_dp;
                if (has_dp) best.h = h;
            }
        };
        if (k_lattice) {
            ZTable ztab = build_ztable(spec, z, tables.sub, id_min + koff_min, id_max + koff_max,
                                       opts.integ);
            for (std::size_t ki = 0; ki < k_values.size(); ++ki) {
                SweepOutcome sweep = sweep_with_table(spec.space, tables, ztab, k_offsets[ki]);
                const bool escaped = sweep.forward_escaped || sweep.backward_escaped;
                double value;
                try {
                    value = statistic_from_segments(sweep.segments, mode, sweep.forward_escaped,
                                                    sweep.backward_escaped, nullptr, nullptr);
                } catch (const std::invalid_argument&) {
                    value = kInf;
                }
                consider(value, k_values[ki], false, Reparameterization::identity(), escaped);
            }
        } else {
            for (double k : k_values) {
                SweepOutcome sweep = sweep_candidate(spec, tables, z, mode,
                                                     Reparameterization::identity(), k, opts.integ);
                const bool escaped = sweep.forward_escaped || sweep.backward_escaped;
                double value;
                try {
                    value = statistic_from_segments(sweep.segments, mode, sweep.forward_escaped,
                                                    sweep.backward_escaped, nullptr, nullptr);
                } catch (const std::invalid_argument&) {
                    value = kInf;
                }
                consider(value, k, false, Reparameterization::identity(), escaped);
            }
        }
        if (mode != ShadowMode::gap && opts.lambda > 1.0) {
            const std::optional<Reparameterization> h =
                dp_propose(spec, tables, z, opts.lambda, opts.integ);
            if (h) {
                SweepOutcome sweep = sweep_candidate(spec, tables, z, mode, *h, 0.0, opts.integ);
                const bool escaped = sweep.forward_escaped || sweep.backward_escaped;
                double value;
                try {
                    value = statistic_from_segments(sweep.segments, mode, sweep.forward_escaped,
                                                    sweep.backward_escaped, nullptr, nullptr);
                } catch (const std::invalid_argument&) {
                    value = kInf;
                }
                consider(value, 0.0, true, *h, escaped);
            }
        }
        best_per_z[zi] = std::move(best);
    });

    ShadowResult result;
    std::size_t best_zi = 0;
    for (std::size_t zi = 0; zi < best_per_z.size(); ++zi) {
        result.evaluated += best_per_z[zi].evaluated;
        result.escaped += best_per_z[zi].escaped;
        if (best_per_z[zi].value < best_per_z[best_zi].value) best_zi = zi;
    }
    const PerZ& winner = best_per_z[best_zi];
    result.z_index = static_cast<int>(best_zi);
    const Reparameterization h = winner.has_dp ? winner.h : Reparameterization::identity();
    result.best = evaluate_shadowing(po, candidate_grid[best_zi], mode, h,
                                     mode == ShadowMode::gap ? winner.gap_k : 0.0, opts.integ);
    return result;
}

// ---------------------------------------------------------------------------
// Structural non-shadowing certificate
// ---------------------------------------------------------------------------

namespace {

// signed clearance: distance to the complement of the box set (negative when
// the point lies outside the set, by its distance to the set)
double set_clearance(const BoxCover& cover, const std::vector<double>& p,
                     const std::vector<char>& in_set) {
    double to_set = kInf, to_complement = kInf;
    std::vector<double> lo, hi;
    for (std::size_t b = 0; b < in_set.size(); ++b) {
        cover.box_bounds(b, lo, hi);
        const double d = box_point_distance(cover.space, p, lo, hi);
        (in_set[b] ? to_set : to_complement) = std::min(in_set[b] ? to_set : to_complement, d);
    }
    if (to_set > 0.0) return -to_set;
    return to_complement;
}

}  // namespace

std::vector<BoxFlowCheck> invariance_checks(const SystemSpec& spec, const BoxCover& cover,
                                            const std::vector<int>& boxes, char set_label,
                                            double margin, const IntegratorConfig& cfg, int jobs,
                                            bool corner_samples) {
    std::vector<char> in_set(cover.box_count(), 0);
    for (int b : boxes) in_set[static_cast<std::size_t>(b)] = 1;
    const int corners = 1 << spec.space.dim;
    std::vector<BoxFlowCheck> checks(boxes.size());
    parallel_for(boxes.size(), jobs, [&](std::size_t wi) {
        BoxFlowCheck check;
        check.box = boxes[wi];
        check.set = set_label;
        const std::vector<std::vector<double>> pts =
            box_test_points(cover, static_cast<std::size_t>(check.box), corners + 5);
        double worst = kInf;
        for (std::size_t pi = corner_samples ? 0 : static_cast<std::size_t>(corners);
             pi < pts.size(); ++pi) {
            try {
                const std::vector<double> image = flow_to(spec, pts[pi], 1.0, cfg);
                worst = std::min(worst, set_clearance(cover, image, in_set));
            } catch (const EscapeError&) {
                worst = -kInf;
            }
        }
        check.worst_clearance = worst;
        check.pass = worst >= margin;
        checks[wi] = check;
    });
    return checks;
}

NonShadowCertificate certify_average_nonshadowing(const SystemSpec& spec,
                                                  const std::vector<int>& attractor_boxes,
                                                  const std::vector<double>& b, double epsilon0,
                                                  int depth, const IntegratorConfig& cfg,
                                                  int jobs) {
    NonShadowCertificate cert;
    cert.system_name = spec.name;
    cert.depth = depth;
    cert.epsilon0 = epsilon0;
    cert.point_b = normalize_point(spec.space, b);
    cert.attractor_boxes = attractor_boxes;
    std::sort(cert.attractor_boxes.begin(), cert.attractor_boxes.end());
    auto fail = [&](std::string why) {
        cert.valid = false;
        cert.failure = std::move(why);
        return cert;
    };
    if (!(epsilon0 > 0.0)) return fail("epsilon0 must be positive");
    if (cert.attractor_boxes.empty()) return fail("empty attractor box set");

    const BoxCover cover = build_cover(spec.space, spec.isolated_region, depth);
    const int corners = 1 << spec.space.dim;
    const BoxGraph graph = transition_graph(spec, cover, 0.0, 2.0, corners + 5, cfg, jobs);
    const SccResult comps = scc(graph);
    const std::vector<AttractorCandidate> candidates = find_attractors(graph, comps);
    const AttractorCandidate* match = nullptr;
    for (const AttractorCandidate& cand : candidates)
        if (cand.boxes == cert.attractor_boxes) match = &cand;
    if (!match) return fail("attractor boxes are not a terminal recurrent component");
    cert.basin_boxes = match->basin;

    const long long b_box = cover.locate(cert.point_b);
    if (b_box < 0) return fail("point b lies outside the covered region");
    if (std::binary_search(cert.basin_boxes.begin(), cert.basin_boxes.end(),
                           static_cast<int>(b_box)))
        return fail("point b lies inside the box basin of the attractor");

    // metric inflations of the attractor boxes
    const std::size_t n = cover.box_count();
    std::vector<double> alo, ahi, lo, hi;
    std::vector<char> in_u(n, 0);
    std::vector<int> eps_inflation;
    for (std::size_t box = 0; box < n; ++box) {
        cover.box_bounds(box, lo, hi);
        double dist_a = kInf;
        for (int a : cert.attractor_boxes) {
            cover.box_bounds(static_cast<std::size_t>(a), alo, ahi);
            dist_a = std::min(dist_a, box_box_distance(cover.space, lo, hi, alo, ahi));
        }
        if (dist_a <= 0.5 * epsilon0) {
            in_u[box] = 1;
            cert.neighborhood_boxes.push_back(static_cast<int>(box));
        }
        if (dist_a <= epsilon0) eps_inflation.push_back(static_cast<int>(box));
    }
    for (int e : eps_inflation)
        if (!std::binary_search(cert.basin_boxes.begin(), cert.basin_boxes.end(), e))
            return fail("epsilon0 inflation of the attractor leaves its box basin");

    // forward closure of b's box, inflated by one box
    std::vector<char> reach(n, 0);
    std::vector<int> todo{static_cast<int>(b_box)};
    reach[static_cast<std::size_t>(b_box)] = 1;
    while (!todo.empty()) {
        const int cur = todo.back();
        todo.pop_back();
        for (int w : graph.edges[static_cast<std::size_t>(cur)])
            if (!reach[static_cast<std::size_t>(w)]) {
                reach[static_cast<std::size_t>(w)] = 1;
                todo.push_back(w);
            }
    }
    std::vector<int> reach_list;
    for (std::size_t box = 0; box < n; ++box)
        if (reach[box]) reach_list.push_back(static_cast<int>(box));
    cert.complement_boxes = inflate_boxes(cover, reach_list);
    for (int c : cert.complement_boxes)
        if (in_u[static_cast<std::size_t>(c)])
            return fail("attracting neighborhood intersects the complement side");
    cert.min_gap = kInf;
    std::vector<double> clo, chi;
    for (int u : cert.neighborhood_boxes) {
        cover.box_bounds(static_cast<std::size_t>(u), lo, hi);
        for (int c : cert.complement_boxes) {
            cover.box_bounds(static_cast<std::size_t>(c), clo, chi);
            cert.min_gap = std::min(cert.min_gap, box_box_distance(cover.space, lo, hi, clo, chi));
        }
    }
    if (!(cert.min_gap >= 0.5 * epsilon0 - 1e-12))
        return fail("gap between the neighborhood and the complement side is below epsilon0/2");

    cert.lipschitz = lipschitz_estimate(spec, spec.isolated_region, spec.space.dim == 1 ? 201 : 65);
    cert.margin = cert.lipschitz * cfg.step;

    // per-box forward-invariance checks with clearance margin
    cert.checks = invariance_checks(spec, cover, cert.neighborhood_boxes, 'U', cert.margin, cfg, jobs);
    const std::vector<BoxFlowCheck> c_checks =
        invariance_checks(spec, cover, cert.complement_boxes, 'C', cert.margin, cfg, jobs);
    cert.checks.insert(cert.checks.end(), c_checks.begin(), c_checks.end());
    for (const BoxFlowCheck& check : cert.checks)
        if (!check.pass)
            return fail("box " + std::to_string(check.box) + " (" + std::string(1, check.set) +
                        ") image clearance " + std::to_string(check.worst_clearance) +
                        " is below the margin");

    cert.valid = true;
    cert.implied_average_bound = 0.5 * epsilon0;
    return cert;
}

bool recheck_certificate(const NonShadowCertificate& cert, const SystemSpec& spec,
                         const IntegratorConfig& cfg, std::string* why, int jobs) {
    auto reject = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };
    if (!cert.valid) return reject("certificate is not marked valid");
    if (cert.system_name != spec.name) return reject("certificate names a different system");
    BoxCover cover;
    try {
        cover = build_cover(spec.space, spec.isolated_region, cert.depth);
    } catch (const std::exception& e) {
        return reject(e.what());
    }
    const std::size_t n = cover.box_count();
    auto in_range = [&](const std::vector<int>& v) {
        for (int b : v)
            if (b < 0 || static_cast<std::size_t>(b) >= n) return false;
        return true;
    };
    if (!in_range(cert.attractor_boxes) || !in_range(cert.neighborhood_boxes) ||
        !in_range(cert.complement_boxes) || !in_range(cert.basin_boxes))
        return reject("box index out of range");

    std::vector<char> in_u(n, 0), in_c(n, 0);
    for (int u : cert.neighborhood_boxes) in_u[static_cast<std::size_t>(u)] = 1;
    for (int c : cert.complement_boxes) in_c[static_cast<std::size_t>(c)] = 1;
    for (std::size_t b = 0; b < n; ++b)
        if (in_u[b] && in_c[b]) return reject("neighborhood and complement sets intersect");

    // neighborhood must contain the half-epsilon0 inflation; the full inflation
    // must stay inside the recorded basin boxes
    std::vector<double> alo, ahi, lo, hi;
    for (std::size_t box = 0; box < n; ++box) {
        cover.box_bounds(box, lo, hi);
        double dist_a = std::numeric_limits<double>::infinity();
        for (int a : cert.attractor_boxes) {
            cover.box_bounds(static_cast<std::size_t>(a), alo, ahi);
            dist_a = std::min(dist_a, box_box_distance(cover.space, lo, hi, alo, ahi));
        }
        if (dist_a <= 0.5 * cert.epsilon0 && !in_u[box])
            return reject("neighborhood misses part of the epsilon0/2 inflation");
        if (dist_a <= cert.epsilon0 &&
            !std::binary_search(cert.basin_boxes.begin(), cert.basin_boxes.end(),
                                static_cast<int>(box)))
            return reject("epsilon0 inflation leaves the recorded basin");
    }

    const long long b_box = cover.locate(cert.point_b);
    if (b_box < 0) return reject("point b lies outside the covered region");
    if (!in_c[static_cast<std::size_t>(b_box)]) return reject("point b is not in the complement set");
    if (std::binary_search(cert.basin_boxes.begin(), cert.basin_boxes.end(),
                           static_cast<int>(b_box)))
        return reject("point b lies inside the recorded basin");

    double min_gap = std::numeric_limits<double>::infinity();
    std::vector<double> clo, chi;
    for (int u : cert.neighborhood_boxes) {
        cover.box_bounds(static_cast<std::size_t>(u), lo, hi);
        for (int c : cert.complement_boxes) {
            cover.box_bounds(static_cast<std::size_t>(c), clo, chi);
            min_gap = std::min(min_gap, box_box_distance(cover.space, lo, hi, clo, chi));
        }
    }
    if (!(min_gap >= 0.5 * cert.epsilon0 - 1e-12))
        return reject("recomputed gap is below epsilon0/2");

    const double lip =
        lipschitz_estimate(spec, spec.isolated_region, spec.space.dim == 1 ? 201 : 65);
    if (!(cert.margin >= lip * cfg.step - 1e-12))
        return reject("recorded margin is below the Lipschitz step bound");

    std::vector<BoxFlowCheck> checks =
        invariance_checks(spec, cover, cert.neighborhood_boxes, 'U', cert.margin, cfg, jobs);
    const std::vector<BoxFlowCheck> c_checks =
        invariance_checks(spec, cover, cert.complement_boxes, 'C', cert.margin, cfg, jobs);
    checks.insert(checks.end(), c_checks.begin(), c_checks.end());
    for (const BoxFlowCheck& check : checks)
        if (!check.pass)
            return reject("box " + std::to_string(check.box) +
                          " fails the forward-invariance margin on recheck");
    return true;
}

}  // namespace orbitcert
