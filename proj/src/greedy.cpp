#include "walshkit/greedy.hpp"

#include <algorithm>
#include <cmath>

namespace walshkit {

GreedyOrdering greedy_order(const Spectrum& spectrum, double hard_zero) {
    std::vector<std::pair<double, std::int64_t>> entries;
    entries.reserve(spectrum.coefficients().size());
    for (const auto& [n, c] : spectrum.coefficients()) {
        const double mag = std::abs(c);
        if (mag > hard_zero) entries.emplace_back(mag, n);
    }
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    GreedyOrdering out;
    out.ranked.reserve(entries.size());
    out.magnitudes.reserve(entries.size());
    for (const auto& [mag, n] : entries) {
        out.ranked.push_back(n);
        out.magnitudes.push_back(mag);
    }
    return out;
}

StepFunction greedy_approximant(const Spectrum& spectrum, std::int64_t m, int level,
                                double hard_zero) {
    if (m < 0) throw std::invalid_argument("greedy_approximant: m must be >= 0");
    const GreedyOrdering order = greedy_order(spectrum, hard_zero);
    Spectrum kept(spectrum.order(), spectrum.source_level());
    const std::int64_t take = std::min<std::int64_t>(m, std::int64_t(order.ranked.size()));
    for (std::int64_t i = 0; i < take; ++i)
        kept.set(order.ranked[size_t(i)], spectrum.at(order.ranked[size_t(i)]));
    return synthesize(kept, level);
}

std::vector<GreedyCurvePoint> greedy_error_curve(const StepFunction& f, std::int64_t m_max,
                                                 NormKind p, TransformMethod method) {
    if (p != NormKind::L1 && p != NormKind::L2)
        throw std::invalid_argument("greedy_error_curve: p must be 1 or 2");
    const Spectrum spec = analyze(f, method);
    const GreedyOrdering order = greedy_order(spec);

    const std::int64_t cells = f.cells();
    std::vector<Complex> partial(size_t(cells), Complex(0.0));
    const double weight = 1.0 / double(cells);

    auto measure = [&](std::vector<GreedyCurvePoint>& curve, std::int64_t m) {
        double err = 0.0, norm1 = 0.0;
        for (std::int64_t t = 0; t < cells; ++t) {
            const Complex d = partial[size_t(t)] - f.value(t);
            err += (p == NormKind::L1) ? std::abs(d) : std::norm(d);
            norm1 += std::abs(partial[size_t(t)]);
        }
        err *= weight;
        if (p == NormKind::L2) err = std::sqrt(err);
        curve.push_back(GreedyCurvePoint{m, err, norm1 * weight});
    };

    std::vector<GreedyCurvePoint> curve;
    curve.reserve(size_t(m_max) + 1);
    std::vector<Complex> row;
    measure(curve, 0);
    for (std::int64_t m = 1; m <= m_max; ++m) {
        if (m <= std::int64_t(order.ranked.size())) {
            const std::int64_t n = order.ranked[size_t(m - 1)];
            const Complex c = spec.at(n);
            walsh_on_grid_into(f.order(), n, f.level(), row);
            for (std::int64_t t = 0; t < cells; ++t) partial[size_t(t)] += c * row[size_t(t)];
        }
        measure(curve, m);
    }
    return curve;
}

} // namespace walshkit
