#include "orbitcert/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace orbitcert {

// ---------------------------------------------------------------------------
// Metric
// ---------------------------------------------------------------------------

double distance(const SpaceSpec& space, const std::vector<double>& p,
                const std::vector<double>& q) {
    double acc = 0.0;
    if (space.kind == SpaceKind::torus) {
        for (int k = 0; k < space.dim; ++k) {
            const double period = space.hi[static_cast<std::size_t>(k)];
            double d = std::fabs(p[static_cast<std::size_t>(k)] - q[static_cast<std::size_t>(k)]);
            d = std::fmod(d, period);
            d = std::min(d, period - d);
            acc += d * d;
        }
    } else {
        for (int k = 0; k < space.dim; ++k) {
            const double d = p[static_cast<std::size_t>(k)] - q[static_cast<std::size_t>(k)];
            acc += d * d;
        }
    }
    return std::sqrt(acc);
}

double distance_to_box(const SpaceSpec& space, const std::vector<double>& p,
                       const std::vector<double>& lo, const std::vector<double>& hi) {
    double acc = 0.0;
    for (int k = 0; k < space.dim; ++k) {
        const std::size_t a = static_cast<std::size_t>(k);
        double d = 0.0;
        if (space.kind == SpaceKind::torus) {
            const double period = space.hi[a];
            double v = std::fmod(p[a], period);
            if (v < 0.0) v += period;
            // The box may be any sub-interval of the fundamental domain; check the three
            // unwrapped copies around it.
            double best = std::numeric_limits<double>::infinity();
            for (int shift = -1; shift <= 1; ++shift) {
                const double w = v + shift * period;
                double g = 0.0;
                if (w < lo[a]) g = lo[a] - w;
                else if (w > hi[a]) g = w - hi[a];
                best = std::min(best, g);
            }
            d = best;
        } else {
            if (p[a] < lo[a]) d = lo[a] - p[a];
            else if (p[a] > hi[a]) d = p[a] - hi[a];
        }
        acc += d * d;
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

namespace {

void validate_config(const IntegratorConfig& cfg) {
    if (!(cfg.step > 0.0) || cfg.step > 1.0)
        throw std::invalid_argument("integrator step must lie in (0, 1]");
}

}  // namespace

FlowWalker::FlowWalker(const SystemSpec& spec, std::vector<double> start,
                       const IntegratorConfig& cfg)
    : spec_(spec), cfg_(cfg), state_(std::move(start)) {
    validate_config(cfg_);
    if (static_cast<int>(state_.size()) != spec_.space.dim)
        throw std::invalid_argument("flow: point dimension mismatch");
    state_ = normalize_point(spec_.space, state_);
    const std::size_t d = static_cast<std::size_t>(spec_.space.dim);
    k1_.resize(d);
    k2_.resize(d);
    k3_.resize(d);
    k4_.resize(d);
    tmp_.resize(d);
    stack_.resize(static_cast<std::size_t>(std::max(spec_.compiled.max_stack, 1)));
    check_bounds();
}

void FlowWalker::rk4_step(double h) {
    const std::size_t d = state_.size();
    auto eval = [&](const std::vector<double>& at, std::vector<double>& out) {
        const int bad = spec_.compiled.eval(at.data(), out.data(), stack_.data());
        if (bad >= 0)
            throw EvalDomainError("domain error while integrating the field",
                                  spec_.compiled.texts[static_cast<std::size_t>(bad)]);
    };
    eval(state_, k1_);
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = state_[i] + 0.5 * h * k1_[i];
    eval(tmp_, k2_);
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = state_[i] + 0.5 * h * k2_[i];
    eval(tmp_, k3_);
    for (std::size_t i = 0; i < d; ++i) tmp_[i] = state_[i] + h * k3_[i];
    eval(tmp_, k4_);
    for (std::size_t i = 0; i < d; ++i)
        state_[i] += (h / 6.0) * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    if (spec_.space.kind == SpaceKind::torus) state_ = normalize_point(spec_.space, state_);
}

void FlowWalker::check_bounds() {
    if (spec_.space.kind != SpaceKind::box) return;
    bool outside = false;
    for (std::size_t k = 0; k < state_.size(); ++k) {
        if (state_[k] < spec_.space.lo[k]) {
            if (cfg_.clamp) state_[k] = spec_.space.lo[k];
            else outside = true;
        } else if (state_[k] > spec_.space.hi[k]) {
            if (cfg_.clamp) state_[k] = spec_.space.hi[k];
            else outside = true;
        }
    }
    if (outside) throw EscapeError(time_);
}

const std::vector<double>& FlowWalker::advance(double dt) {
    if (dt == 0.0) return state_;
    const double total = std::fabs(dt);
    const double sign = dt > 0.0 ? 1.0 : -1.0;
    const long n = static_cast<long>(std::ceil(total / cfg_.step - 1e-12));
    const double h = total / static_cast<double>(std::max(n, 1L));
    for (long i = 0; i < std::max(n, 1L); ++i) {
        rk4_step(sign * h);
        time_ += sign * h;
        check_bounds();
    }
    return state_;
}

std::vector<double> flow_to(const SystemSpec& spec, const std::vector<double>& x, double t,
                            const IntegratorConfig& cfg) {
    if (std::fabs(t) > 1e6) throw std::invalid_argument("flow_to: |t| must be <= 1e6");
    FlowWalker walker(spec, x, cfg);
    if (t == 0.0) return walker.state();
    walker.advance(t);
    return walker.state();
}

Trajectory flow_trace(const SystemSpec& spec, const std::vector<double>& x, double t,
                      const IntegratorConfig& cfg) {
    if (std::fabs(t) > 1e6) throw std::invalid_argument("flow_trace: |t| must be <= 1e6");
    FlowWalker walker(spec, x, cfg);
    Trajectory out;
    out.times.push_back(0.0);
    out.points.push_back(walker.state());
    if (t == 0.0) return out;
    const double total = std::fabs(t);
    const double sign = t > 0.0 ? 1.0 : -1.0;
    const long n = std::max(static_cast<long>(std::ceil(total / cfg.step - 1e-12)), 1L);
    const double h = total / static_cast<double>(n);
    for (long i = 1; i <= n; ++i) {
        walker.advance(sign * h);
        out.times.push_back(sign * h * static_cast<double>(i));
        out.points.push_back(walker.state());
    }
    return out;
}

PseudoOrbit sample_orbit(const SystemSpec& spec, const std::vector<double>& x0,
                         const std::vector<double>& durations, const IntegratorConfig& cfg) {
    if (durations.empty()) throw std::invalid_argument("sample_orbit: no durations");
    for (double t : durations)
        if (!(t >= 1.0)) throw std::invalid_argument("sample_orbit: durations must be >= 1");
    PseudoOrbit po;
    po.system = std::make_shared<SystemSpec>(spec);
    po.origin = 0;
    FlowWalker walker(spec, x0, cfg);
    po.points.push_back(walker.state());
    po.durations = durations;
    for (std::size_t i = 0; i + 1 < durations.size(); ++i)
        po.points.push_back(walker.advance(durations[i]));
    validate_pseudo_orbit(po);
    return po;
}

// ---------------------------------------------------------------------------
// Lipschitz estimate
// ---------------------------------------------------------------------------

namespace {

// Largest singular value of an n x n matrix via power iteration on J^T J.
double operator_norm(const std::vector<std::vector<double>>& jac) {
    const std::size_t n = jac.size();
    if (n == 1) return std::fabs(jac[0][0]);
    std::vector<std::vector<double>> gram(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) acc += jac[r][i] * jac[r][j];
            gram[i][j] = acc;
        }
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    std::vector<double> w(n, 0.0);
    double lambda = 0.0;
    for (int iter = 0; iter < 256; ++iter) {
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += gram[i][j] * v[j];
            w[i] = acc;
        }
        double norm = 0.0;
        for (double c : w) norm += c * c;
        norm = std::sqrt(norm);
        if (norm < 1e-300) return 0.0;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / norm;
        lambda = norm;
    }
    return std::sqrt(lambda);
}

}  // namespace

double lipschitz_estimate(const SystemSpec& spec, const Region& region, int grid_per_axis) {
    if (grid_per_axis < 2) throw std::invalid_argument("lipschitz_estimate: grid must be >= 2");
    const int dim = spec.space.dim;
    if (region.dim() != dim)
        throw std::invalid_argument("lipschitz_estimate: region dimension mismatch");
    const double h = 1e-5;
    std::vector<std::size_t> index(static_cast<std::size_t>(dim), 0);
    std::vector<double> point(static_cast<std::size_t>(dim));
    std::vector<std::vector<double>> jac(static_cast<std::size_t>(dim),
                                         std::vector<double>(static_cast<std::size_t>(dim)));
    double worst = 0.0;
    while (true) {
        for (int k = 0; k < dim; ++k) {
            const std::size_t a = static_cast<std::size_t>(k);
            point[a] = region.lo[a] + (region.hi[a] - region.lo[a]) *
                                          static_cast<double>(index[a]) /
                                          static_cast<double>(grid_per_axis - 1);
        }
        for (int c = 0; c < dim; ++c) {
            std::vector<double> plus = point, minus = point;
            plus[static_cast<std::size_t>(c)] += h;
            minus[static_cast<std::size_t>(c)] -= h;
            const std::vector<double> fp = eval_field(spec, plus);
            const std::vector<double> fm = eval_field(spec, minus);
            for (int r = 0; r < dim; ++r)
                jac[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                    (fp[static_cast<std::size_t>(r)] - fm[static_cast<std::size_t>(r)]) / (2.0 * h);
        }
        worst = std::max(worst, operator_norm(jac));
        // Advance the multi-index.
        int axis = 0;
        while (axis < dim) {
            if (++index[static_cast<std::size_t>(axis)] <
                static_cast<std::size_t>(grid_per_axis))
                break;
            index[static_cast<std::size_t>(axis)] = 0;
            ++axis;
        }
        if (axis == dim) break;
    }
    return 1.5 * worst;
}

}  // namespace orbitcert
