#pragma once

#include <vector>

#include "walshkit/chrestenson.hpp"

namespace walshkit {

// Coefficients with modulus at or below this are treated as numerically
// zero and excluded from greedy support.
inline constexpr double kHardZero = 1e-14;

/**
 * Spectrum support ranked by decreasing |c_n|, ties broken by ascending
 * index so orderings (and the certificates built on them) are reproducible.
 */
struct GreedyOrdering {
    std::vector<std::int64_t> ranked;
    std::vector<double> magnitudes;  // non-increasing, parallel to ranked
};

GreedyOrdering greedy_order(const Spectrum& spectrum, double hard_zero = kHardZero);

// G_m: synthesis of the m largest-modulus terms; m past the support size
// yields the full synthesis.
StepFunction greedy_approximant(const Spectrum& spectrum, std::int64_t m, int level,
                                double hard_zero = kHardZero);

struct GreedyCurvePoint {
    std::int64_t m;
    double error;             // ||G_m(f) - f||_p against the level-J representation
    double partial_sum_norm;  // ||G_m(f)||_1, the quantity the 12||f||_1 bound watches
};

// Error curve for m = 0..m_max at p in {1, 2}, built incrementally.
std::vector<GreedyCurvePoint> greedy_error_curve(const StepFunction& f, std::int64_t m_max,
                                                 NormKind p,
                                                 TransformMethod method = TransformMethod::Fast);

} // namespace walshkit
