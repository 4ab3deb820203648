#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "qflip/rational.hpp"
#include "qflip/rng.hpp"

namespace qflip {

struct NonTermination : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// One exact Bernoulli(p) draw: compare a lazily revealed uniform variate
// against the binary expansion of p, bit by bit.  Decides after 2 bits in
// expectation; no rounding bias.
inline bool bernoulli_exact(Rational p, BitStream& bits) {
    if (!(p > 0 && p < 1)) throw std::invalid_argument("bernoulli_exact needs 0 < p < 1");
    while (true) {
        p *= 2;
        int digit = p >= 1 ? 1 : 0;
        p -= digit;
        int b = bits.next_bit() ? 1 : 0;
        if (b != digit) return b < digit;  // variate provably below/above p
        if (p == 0) return false;          // variate == p from here on has measure 0 side: U < p fails
    }
}

struct SimOutcome {
    bool heads = false;
    std::uint64_t flips = 0;  // number of biased-coin draws, always >= 1
};

constexpr std::uint64_t kSimIterationGuard = 1000000;

// One run of the rejection scheme simulating a bias-q coin from a bias-p
// coin.  The three variants differ only in the case split on the state;
// every rescaling matches the corresponding recurrence map exactly.
//   variant 0: two cases (q > p, q <= p)
//   variant 1: adds a top case q >= 1-p
//   variant 2: additionally splits (1/2, 1-p) off the middle case
inline SimOutcome run_qflip(int variant, const Rational& p, Rational q, BitStream& bits) {
    if (variant < 0 || variant > 2) throw std::invalid_argument("variant must be 0, 1 or 2");
    if (!(p > 0 && p <= Rational(1, 2))) throw std::invalid_argument("need 0 < p <= 1/2");
    if (q < 0 || q > 1) throw std::invalid_argument("need 0 <= q <= 1");
    const Rational q1p = 1 - p;

    SimOutcome out;
    for (std::uint64_t it = 0; it < kSimIterationGuard; ++it) {
        bool heads = bernoulli_exact(p, bits);
        ++out.flips;
        if (variant >= 1 && q >= q1p) {
            if (heads) {
                q = (q - q1p) / p;
                continue;
            }
            out.heads = true;
            return out;
        }
        if (variant == 2 && q > Rational(1, 2)) {
            if (heads) {
                out.heads = false;
                return out;
            }
            q = q / q1p;
            continue;
        }
        if (q > p) {
            if (heads) {
                out.heads = true;
                return out;
            }
            q = (q - p) / q1p;
            continue;
        }
        if (heads) {
            q = q / p;
            continue;
        }
        out.heads = false;
        return out;
    }
    throw NonTermination("simulation exceeded the iteration guard (implementation bug)");
}

struct MCEstimate {
    double mean = 0;
    double stderr_ = 0;  // sample standard deviation / sqrt(trials)
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline MCEstimate finish_estimate(double sum, double sumsq, std::uint64_t trials, std::uint64_t seed) {
    MCEstimate est;
    est.trials = trials;
    est.seed = seed;
    est.mean = sum / static_cast<double>(trials);
    double var = (sumsq - sum * est.mean) / static_cast<double>(trials - 1);
    if (var < 0) var = 0;
    est.stderr_ = std::sqrt(var / static_cast<double>(trials));
    return est;
}

}  // namespace detail

// Each trial gets its own stream index, so estimates are reproducible and
// order-insensitive even if trials were partitioned across workers.
inline MCEstimate estimate_heads(int variant, const Rational& p, const Rational& q,
                                 std::uint64_t trials, std::uint64_t seed) {
    if (trials < 100) throw std::invalid_argument("need at least 100 trials");
    double sum = 0, sumsq = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        BitStream bits(seed, t);
        double x = run_qflip(variant, p, q, bits).heads ? 1.0 : 0.0;
        sum += x;
        sumsq += x * x;
    }
    return detail::finish_estimate(sum, sumsq, trials, seed);
}

inline MCEstimate estimate_flips(int variant, const Rational& p, const Rational& q,
                                 std::uint64_t trials, std::uint64_t seed) {
    if (trials < 100) throw std::invalid_argument("need at least 100 trials");
    double sum = 0, sumsq = 0;
    for (std::uint64_t t = 0; t < trials; ++t) {
        BitStream bits(seed, t);
        double x = static_cast<double>(run_qflip(variant, p, q, bits).flips);
        sum += x;
        sumsq += x * x;
    }
    return detail::finish_estimate(sum, sumsq, trials, seed);
}

}  // namespace qflip
