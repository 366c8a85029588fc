#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace orbitcert {

// Deterministic 64-bit mixer (splitmix64). Used instead of <random> distributions so that
// seeded runs produce identical bytes on every platform we build on.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1).
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) { return n == 0 ? 0 : next_u64() % n; }

private:
    std::uint64_t state_;
};

// Halton low-discrepancy sequence, 1-based index, prime bases per axis.
inline double halton(std::uint64_t index, std::uint64_t base) {
    double f = 1.0;
    double r = 0.0;
    while (index > 0) {
        f /= static_cast<double>(base);
        r += f * static_cast<double>(index % base);
        index /= base;
    }
    return r;
}

inline std::uint64_t halton_base(int axis) {
    static constexpr std::uint64_t primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    return primes[axis % 8];
}

// Runs fn(i) for i in [0, n) across `jobs` threads. Each index writes only its own slot in
// caller-owned storage, so results are identical for any job count.
inline void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

inline int default_jobs() {
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

struct LinearFit {
    double intercept = 0.0;
    double slope = 0.0;
};

// Ordinary least squares y ≈ intercept + slope * x. Degenerate inputs give slope 0.
inline LinearFit fit_linear(const std::vector<double>& xs, const std::vector<double>& ys) {
    LinearFit out;
    const std::size_t n = std::min(xs.size(), ys.size());
    if (n < 2) {
        if (n == 1) out.intercept = ys[0];
        return out;
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    const double den = static_cast<double>(n) * sxx - sx * sx;
    if (den == 0.0) {
        out.intercept = sy / static_cast<double>(n);
        return out;
    }
    out.slope = (static_cast<double>(n) * sxy - sx * sy) / den;
    out.intercept = (sy - out.slope * sx) / static_cast<double>(n);
    return out;
}

struct PowerFit {
    double c = 0.0;  // amplitude
    double p = 0.0;  // decay exponent, v_j ≈ c * j^(-p)
    bool valid = false;
};

// Fits v_j ≈ c * j^(-p) over 1-based positions by log-log least squares, ignoring entries
// below `floor` (treated as already-converged).
inline PowerFit fit_power_decay(const std::vector<double>& values, double floor = 1e-15) {
    std::vector<double> lx, ly;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (values[j] > floor) {
            lx.push_back(std::log(static_cast<double>(j + 1)));
            ly.push_back(std::log(values[j]));
        }
    }
    PowerFit out;
    if (lx.size() < 2) return out;
    const LinearFit lin = fit_linear(lx, ly);
    out.c = std::exp(lin.intercept);
    out.p = -lin.slope;
    out.valid = true;
    return out;
}

}  // namespace orbitcert
