#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "jobval/common.hpp"

namespace jobval {

// Deterministic splitmix64 generator. std::mt19937 + std distributions
// are not bit-stable across standard libraries, so all simulation
// randomness flows through this generator and the hand-rolled
// transformations below. Sub-streams are derived by hashing
// (seed, stream_id), which keeps per-worker trajectories independent
// of iteration order.
class Rng {
   public:
    explicit Rng(uint64_t seed) : state_(seed ^ 0x9e3779b97f4a7c15ULL) {}

    static Rng stream(uint64_t seed, uint64_t stream_id) {
        Rng r(mix(seed + 0x632be59bd9b4e019ULL * (stream_id + 1)));
        r.next_u64();
        return r;
    }

    uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // Uniform on [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1); safe as log() input.
    double uniform_pos() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Integer in [lo, hi] inclusive.
    int64_t uniform_int(int64_t lo, int64_t hi) {
        uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
        return lo + static_cast<int64_t>(next_u64() % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, no spare caching so the draw count per event is fixed.
    double normal() {
        double u1 = uniform_pos();
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
    }

    double normal(double mean, double sd) { return mean + sd * normal(); }

    // Standard Gumbel (location 0, scale 1); mean kEulerGamma.
    double gumbel() { return -std::log(-std::log(uniform_pos())); }

    // Index draw from an unnormalized non-negative weight vector.
    size_t discrete(const std::vector<double>& weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        require(total > 0.0, "Rng::discrete: weights sum to zero");
        double u = uniform() * total;
        double acc = 0.0;
        for (size_t i = 0; i < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.size() - 1;
    }

    // Marsaglia-Tsang gamma; shape > 0, scale 1.
    double gamma(double shape) {
        if (shape < 1.0) {
            double u = uniform_pos();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        double d = shape - 1.0 / 3.0;
        double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double v = 1.0 + c * x;
            if (v <= 0.0) continue;
            v = v * v * v;
            double u = uniform_pos();
            if (std::log(u) < 0.5 * x * x + d - d * v + d * std::log(v)) return d * v;
        }
    }

    std::vector<double> dirichlet(size_t n, double concentration) {
        std::vector<double> out(n);
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            out[i] = gamma(concentration);
            total += out[i];
        }
        for (double& x : out) x /= total;
        return out;
    }

   private:
    static uint64_t mix(uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    uint64_t state_;
};

}  // namespace jobval
