#include "orbitcert/pseudo.hpp"

#include <algorithm>
#include <cmath>

#include "orbitcert/util.hpp"

namespace orbitcert {

std::string to_string(PseudoKind kind) {
    switch (kind) {
        case PseudoKind::delta_pseudo: return "delta_pseudo";
        case PseudoKind::delta_average: return "delta_average";
        case PseudoKind::asymptotic_average: return "asymptotic_average";
        case PseudoKind::limit: return "limit";
        case PseudoKind::positive_limit: return "positive_limit";
    }
    return "?";
}

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::fails: return "fails";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::vector<double> defects(const PseudoOrbit& po, const IntegratorConfig& cfg) {
    validate_pseudo_orbit(po);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(std::max(po.size() - 1, 0)));
    for (int i = po.i_min(); i < po.i_max(); ++i) {
        const std::vector<double> image = flow_to(*po.system, po.point(i), po.duration(i), cfg);
        out.push_back(distance(po.system->space, image, po.point(i + 1)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tail analysis shared by the limit kinds
// ---------------------------------------------------------------------------

namespace {

Verdict worst(Verdict a, Verdict b) {
    auto rank = [](Verdict v) {
        return v == Verdict::fails ? 0 : (v == Verdict::inconclusive ? 1 : 2);
    };
    return rank(a) <= rank(b) ? a : b;
}

// `values` is ordered outward (position j+1 is one step further from the window center).
SideDiagnostics analyze_side(std::string side, const std::vector<double>& values,
                             const ClassifyConfig& ccfg) {
    SideDiagnostics diag;
    diag.side = std::move(side);
    if (values.size() < 2) {
        diag.verdict = Verdict::inconclusive;
        return diag;
    }
    const std::size_t tail_len = std::max<std::size_t>(
        2, static_cast<std::size_t>(
               std::ceil(ccfg.tail_fraction * static_cast<double>(values.size()))));
    const std::size_t tail_begin = values.size() - std::min(tail_len, values.size());
    double tail_sup = 0.0;
    for (std::size_t j = tail_begin; j < values.size(); ++j)
        tail_sup = std::max(tail_sup, values[j]);
    const std::size_t mid = tail_begin + (values.size() - tail_begin) / 2;
    double e1 = 0.0, e2 = 0.0;
    for (std::size_t j = tail_begin; j < mid; ++j) e1 = std::max(e1, values[j]);
    for (std::size_t j = mid; j < values.size(); ++j) e2 = std::max(e2, values[j]);
    diag.tail_sup = tail_sup;
    diag.tail_first_half_sup = e1;
    diag.tail_second_half_sup = e2;

    const PowerFit fit = fit_power_decay(values);
    diag.fitted_c = fit.c;
    diag.fitted_p = fit.p;
    diag.fit_valid = fit.valid;

    if (tail_sup <= ccfg.tail_tol && e2 <= e1 + 1e-12) {
        diag.verdict = Verdict::holds;
    } else if (fit.valid && fit.p >= 0.2) {
        // Decreasing trend, not yet below the tolerance at this window length.
        diag.verdict = Verdict::inconclusive;
    } else {
        diag.verdict = Verdict::fails;
    }
    return diag;
}

}  // namespace

// ---------------------------------------------------------------------------
// classify
// ---------------------------------------------------------------------------

ClassificationReport classify(const PseudoOrbit& po, PseudoKind kind, std::optional<double> delta,
                              const IntegratorConfig& cfg, const ClassifyConfig& ccfg) {
    validate_pseudo_orbit(po);
    const bool needs_delta =
        kind == PseudoKind::delta_pseudo || kind == PseudoKind::delta_average;
    if (needs_delta && (!delta || !(*delta > 0.0)))
        throw std::invalid_argument("classify: this kind requires delta > 0");
    if (kind != PseudoKind::delta_pseudo && po.size() < 8)
        throw std::invalid_argument("classify: window too short (< 8) for limit/average kinds");
    if (kind == PseudoKind::asymptotic_average && (po.i_min() >= 0 || po.i_max() < 1))
        throw std::invalid_argument("classify: asymptotic_average needs a two-sided window");

    ClassificationReport report;
    report.kind = kind;
    report.tail_tol = ccfg.tail_tol;
    report.tail_fraction = ccfg.tail_fraction;
    if (needs_delta) report.delta = *delta;
    report.defect_sequence = defects(po, cfg);
    report.defect_origin = po.i_min();
    const std::vector<double>& d = report.defect_sequence;
    const std::size_t m = d.size();

    switch (kind) {
        case PseudoKind::delta_pseudo: {
            bool ok = true;
            for (double v : d)
                if (!(v < *delta)) ok = false;
            report.verdict = ok ? Verdict::holds : Verdict::fails;
            break;
        }
        case PseudoKind::delta_average: {
            // M_n = worst mean over every in-window contiguous block of n defects; the kind
            // holds when every n >= N stays below delta for some N.
            std::vector<double> prefix(m + 1, 0.0);
            for (std::size_t j = 0; j < m; ++j) prefix[j + 1] = prefix[j] + d[j];
            std::vector<double> worst_mean(m + 1, 0.0);
            for (std::size_t n = 1; n <= m; ++n) {
                double w = 0.0;
                for (std::size_t start = 0; start + n <= m; ++start)
                    w = std::max(w, (prefix[start + n] - prefix[start]) / static_cast<double>(n));
                worst_mean[n] = w;
            }
            int least = 0;
            for (std::size_t n = m;; --n) {
                if (worst_mean[n] < *delta) {
                    least = static_cast<int>(n);
                    if (n == 1) break;
                } else {
                    break;
                }
                if (n == 1) break;
            }
            if (least == 0) {
                report.verdict = Verdict::fails;
            } else {
                report.verdict = Verdict::holds;
                report.window_N = least;
            }
            break;
        }
        case PseudoKind::asymptotic_average: {
            const int n_max = std::min(-po.i_min(), po.i_max() - 1);
            if (n_max < 1)
                throw std::invalid_argument("classify: window too short for asymptotic_average");
            double acc = d[static_cast<std::size_t>(0 - po.i_min())];  // i = 0 term
            for (int n = 1; n <= n_max; ++n) {
                acc += d[static_cast<std::size_t>(n - po.i_min())];
                acc += d[static_cast<std::size_t>(-n - po.i_min())];
                report.partial_averages.push_back(acc / static_cast<double>(n));
            }
            report.sides.push_back(analyze_side("partial_averages", report.partial_averages, ccfg));
            report.verdict = report.sides.back().verdict;
            break;
        }
        case PseudoKind::limit:
        case PseudoKind::positive_limit: {
            std::vector<double> forward;
            for (int i = std::max(po.i_min(), 0); i < po.i_max(); ++i)
                forward.push_back(d[static_cast<std::size_t>(i - po.i_min())]);
            report.sides.push_back(analyze_side("forward", forward, ccfg));
            Verdict v = report.sides.back().verdict;
            if (kind == PseudoKind::limit) {
                if (po.i_min() < 0) {
                    std::vector<double> backward;
                    for (int i = -1; i >= po.i_min(); --i)
                        backward.push_back(d[static_cast<std::size_t>(i - po.i_min())]);
                    report.sides.push_back(analyze_side("backward", backward, ccfg));
                    v = worst(v, report.sides.back().verdict);
                } else {
                    report.note = "one-sided window: forward side only";
                }
            }
            report.verdict = v;
            break;
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Constructions
// ---------------------------------------------------------------------------

PseudoOrbit make_concat_ab(const SystemSpec& spec, const std::vector<double>& a,
                           const std::vector<double>& b, int half_len,
                           const IntegratorConfig& cfg) {
    if (half_len < 1) throw std::invalid_argument("make_concat_ab: half_len must be >= 1");
    PseudoOrbit po;
    po.system = std::make_shared<SystemSpec>(spec);
    po.origin = -half_len;
    const std::size_t total = static_cast<std::size_t>(2 * half_len + 1);
    po.points.assign(total, {});
    po.durations.assign(total, 1.0);

    std::vector<double> cur = normalize_point(spec.space, a);
    po.points[static_cast<std::size_t>(half_len)] = cur;
    for (int k = 1; k <= half_len; ++k) {
        cur = flow_to(spec, cur, -1.0, cfg);
        po.points[static_cast<std::size_t>(half_len - k)] = cur;
    }
    cur = normalize_point(spec.space, b);
    for (int k = 1; k <= half_len; ++k) {
        cur = flow_to(spec, cur, 1.0, cfg);
        po.points[static_cast<std::size_t>(half_len + k)] = cur;
    }
    validate_pseudo_orbit(po);
    return po;
}

PseudoOrbit make_alpha_beta(const std::vector<PseudoOrbit>& segments, const IntegratorConfig& cfg,
                            ConcatInfo* info) {
    if (segments.empty()) throw std::invalid_argument("make_alpha_beta: no segments");
    for (const PseudoOrbit& seg : segments) {
        validate_pseudo_orbit(seg);
        if (seg.system->name != segments.front().system->name ||
            seg.system->space.dim != segments.front().system->space.dim)
            throw std::invalid_argument("make_alpha_beta: segments disagree about the system");
    }
    PseudoOrbit po;
    po.system = segments.front().system;
    po.origin = 0;
    for (const PseudoOrbit& seg : segments) {
        po.points.insert(po.points.end(), seg.points.begin(), seg.points.end());
        po.durations.insert(po.durations.end(), seg.durations.begin(), seg.durations.end());
    }
    validate_pseudo_orbit(po);
    if (info) {
        info->junction_indices.clear();
        info->junction_defects.clear();
        int offset = 0;
        for (std::size_t s = 0; s + 1 < segments.size(); ++s) {
            offset += segments[s].size();
            const int junction = offset - 1;  // defect between last point of s, first of s+1
            info->junction_indices.push_back(junction);
            const std::vector<double> image =
                flow_to(*po.system, po.point(junction), po.duration(junction), cfg);
            info->junction_defects.push_back(
                distance(po.system->space, image, po.point(junction + 1)));
        }
    }
    return po;
}

PseudoOrbit perturb_orbit(const SystemSpec& spec, const std::vector<double>& x0,
                          const std::vector<double>& sigma, std::uint64_t seed,
                          const IntegratorConfig& cfg) {
    if (sigma.empty()) throw std::invalid_argument("perturb_orbit: empty sigma schedule");
    for (double s : sigma)
        if (!(s >= 0.0)) throw std::invalid_argument("perturb_orbit: sigma must be >= 0");
    const int dim = spec.space.dim;
    SplitMix64 rng(seed);
    auto ball_offset = [&](double radius) {
        std::vector<double> off(static_cast<std::size_t>(dim), 0.0);
        if (radius == 0.0) return off;
        while (true) {  // rejection sample the L2 ball so the defect stays <= radius
            double norm2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                off[static_cast<std::size_t>(k)] = rng.next_in(-radius, radius);
                norm2 += off[static_cast<std::size_t>(k)] * off[static_cast<std::size_t>(k)];
            }
            if (norm2 <= radius * radius) return off;
        }
    };
    auto project = [&](std::vector<double> p) {
        if (spec.space.kind == SpaceKind::torus) return normalize_point(spec.space, std::move(p));
        for (int k = 0; k < dim; ++k) {
            const std::size_t a = static_cast<std::size_t>(k);
            p[a] = std::clamp(p[a], spec.isolated_region.lo[a], spec.isolated_region.hi[a]);
        }
        return p;
    };

    PseudoOrbit po;
    po.system = std::make_shared<SystemSpec>(spec);
    po.origin = 0;
    po.points.push_back(project(normalize_point(spec.space, x0)));
    po.durations.assign(sigma.size() + 1, 1.0);
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        std::vector<double> next = flow_to(spec, po.points.back(), 1.0, cfg);
        const std::vector<double> off = ball_offset(sigma[i]);
        for (int k = 0; k < dim; ++k) next[static_cast<std::size_t>(k)] += off[static_cast<std::size_t>(k)];
        po.points.push_back(project(std::move(next)));
    }
    validate_pseudo_orbit(po);
    return po;
}

}  // namespace orbitcert
