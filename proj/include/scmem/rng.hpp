#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "scmem/errors.hpp"

namespace scmem {

// Counter-based pseudo-random stream.
//
// A stream is identified by a 64-bit key; output word i is a strong mix of
// (key, i).  Child streams are derived from (key, index) pairs, never from
// mutable state, so the same entity (stroke mu, concept alpha, trial k)
// always sees the same stream no matter which order entities are visited in.
// That is what makes serial and multi-threaded runs byte-identical.
class Rng {
  public:
    explicit Rng(std::uint64_t key) : key_(key), ctr_(0) {}

    // Stream identity; never advanced by draws.
    std::uint64_t key() const { return key_; }

    std::uint64_t next_u64() { return mix(key_ + kGamma * ++ctr_); }

    // Uniform double in [0, 1), 53 usable bits.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) {
        if (p <= 0.0) return false;
        if (p >= 1.0) return true;
        return next_unit() < p;
    }

    // Unbiased uniform integer in [0, n) by rejection.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw contract_error("Rng::below: n must be positive");
        if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
        const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Child stream for entity `index`; an optional tag separates families of
    // children (dictionary vs book vs noise) hanging off the same parent.
    Rng fork(std::uint64_t index) const { return Rng(derive(key_, index)); }
    Rng fork(std::uint64_t tag, std::uint64_t index) const {
        return Rng(derive(derive(key_, tag), index));
    }

    // Exact Bin(n, p) sample by pmf inversion, walking outward from the mode.
    // Cost is O(sqrt(n p)) expected, so it stays cheap for any (n, p).
    std::uint64_t binomial(std::uint64_t n, double p) {
        if (n == 0 || p <= 0.0) return 0;
        if (p >= 1.0) return n;
        const double u = next_unit();
        const double np1 = static_cast<double>(n + 1) * p;
        std::uint64_t mode = static_cast<std::uint64_t>(np1);
        if (mode > n) mode = n;
        const double logp = std::log(p);
        const double log1mp = std::log1p(-p);
        double pm = std::exp(log_binom_(n, mode) + static_cast<double>(mode) * logp +
                             static_cast<double>(n - mode) * log1mp);
        double cum = pm;
        if (u < cum) return mode;
        std::uint64_t lo = mode, hi = mode;
        double plo = pm, phi = pm;
        const double ratio = p / (1.0 - p);
        while (lo > 0 || hi < n) {
            if (hi < n) {
                phi *= static_cast<double>(n - hi) / static_cast<double>(hi + 1) * ratio;
                ++hi;
                cum += phi;
                if (u < cum) return hi;
            }
            if (lo > 0) {
                plo *= static_cast<double>(lo) / (static_cast<double>(n - lo + 1) * ratio);
                --lo;
                cum += plo;
                if (u < cum) return lo;
            }
        }
        return hi; // u fell into the last ulp of lost mass
    }

    // Poisson(lambda) conditioned on being >= 1, same inversion scheme.
    std::uint64_t poisson_conditioned(double lambda) {
        if (!(lambda > 0.0)) throw invalid_parameter("poisson_conditioned: lambda must be > 0");
        const double u = next_unit();
        const double norm = -std::expm1(-lambda); // 1 - e^-lambda
        std::uint64_t mode = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(lambda));
        double pm = std::exp(static_cast<double>(mode) * std::log(lambda) - lambda -
                             std::lgamma(static_cast<double>(mode) + 1.0)) /
                    norm;
        double cum = pm;
        if (u < cum) return mode;
        std::uint64_t lo = mode, hi = mode;
        double plo = pm, phi = pm;
        for (;;) {
            phi *= lambda / static_cast<double>(hi + 1);
            ++hi;
            cum += phi;
            if (u < cum) return hi;
            if (lo > 1) {
                plo *= static_cast<double>(lo) / lambda;
                --lo;
                cum += plo;
                if (u < cum) return lo;
            }
            if (hi > 64 + static_cast<std::uint64_t>(8.0 * lambda)) return hi; // lost mass
        }
    }

    // Uniform l-subset of {0, ..., m-1}, returned sorted (Floyd's method).
    std::vector<std::uint32_t> subset(std::uint64_t m, std::uint64_t l) {
        if (l > m) throw contract_error("Rng::subset: l must be <= m");
        std::vector<std::uint32_t> out;
        out.reserve(l);
        for (std::uint64_t j = m - l; j < m; ++j) {
            const std::uint32_t t = static_cast<std::uint32_t>(below(j + 1));
            const auto it = std::lower_bound(out.begin(), out.end(), t);
            if (it != out.end() && *it == t)
                out.push_back(static_cast<std::uint32_t>(j)); // j exceeds everything so far
            else
                out.insert(it, t);
        }
        return out;
    }

  private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    static std::uint64_t derive(std::uint64_t key, std::uint64_t index) {
        return mix(key ^ (mix(index + kGamma) + kGamma + (key << 6) + (key >> 2)));
    }

    static double log_binom_(std::uint64_t n, std::uint64_t k) {
        return std::lgamma(static_cast<double>(n) + 1.0) -
               std::lgamma(static_cast<double>(k) + 1.0) -
               std::lgamma(static_cast<double>(n - k) + 1.0);
    }

    std::uint64_t key_;
    std::uint64_t ctr_;
};

} // namespace scmem
