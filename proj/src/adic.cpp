#include "walshkit/adic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace walshkit {

int default_max_level(int order) {
    int level = 0;
    std::int64_t cells = 1;
    while (cells * order <= 2097152) {
        cells *= order;
        ++level;
    }
    return level;
}

void check_level(int order, int level, int max_level) {
    if (level < 0) throw ResolutionError("negative level");
    if (level > max_level)
        throw ResolutionError("level " + std::to_string(level) + " exceeds configured maximum " +
                              std::to_string(max_level));
    std::int64_t cells = 1;
    for (int i = 0; i < level; ++i) {
        if (__builtin_mul_overflow(cells, std::int64_t(order), &cells) ||
            cells > kAbsoluteCellCeiling)
            throw ResolutionError("grid of " + std::to_string(order) + "^" +
                                  std::to_string(level) + " cells exceeds the memory ceiling");
    }
}

AdicInterval::AdicInterval(int order, int level, std::int64_t index)
    : order(order), level(level), index(index) {
    if (order < 2) throw std::invalid_argument("AdicInterval: order must be >= 2");
    if (level < 0) throw std::invalid_argument("AdicInterval: level must be >= 0");
    const std::int64_t cells = checked_ipow(order, level);
    if (index < 1 || index > cells)
        throw std::invalid_argument("AdicInterval: index " + std::to_string(index) +
                                    " outside [1, " + std::to_string(cells) + "]");
}

std::int64_t AdicInterval::first_cell(int grid_level) const {
    if (grid_level < level)
        throw ResolutionError("grid level below interval level");
    return (index - 1) * checked_ipow(order, grid_level - level);
}

std::int64_t AdicInterval::cell_count(int grid_level) const {
    if (grid_level < level)
        throw ResolutionError("grid level below interval level");
    return checked_ipow(order, grid_level - level);
}

StepFunction::StepFunction(int order, int level, std::vector<Complex> values)
    : order_(order), level_(level), values_(std::move(values)) {
    if (order_ < 2) throw std::invalid_argument("StepFunction: order must be >= 2");
    if (level_ < 0) throw std::invalid_argument("StepFunction: level must be >= 0");
    const std::int64_t expected = checked_ipow(order_, level_);
    if (std::int64_t(values_.size()) != expected)
        throw std::invalid_argument("StepFunction: expected " + std::to_string(expected) +
                                    " values, got " + std::to_string(values_.size()));
}

StepFunction StepFunction::zero(int order, int level) {
    return StepFunction(order, level,
                        std::vector<Complex>(size_t(checked_ipow(order, level)), Complex(0.0)));
}

StepFunction StepFunction::refined(int to_level) const {
    if (to_level < level_) throw ResolutionError("refinement cannot coarsen");
    if (to_level == level_) return *this;
    const std::int64_t copies = checked_ipow(order_, to_level - level_);
    if (__int128(copies) * values_.size() > kAbsoluteCellCeiling)
        throw ResolutionError("refinement exceeds the memory ceiling");
    std::vector<Complex> out;
    out.reserve(values_.size() * size_t(copies));
    for (const Complex& v : values_)
        out.insert(out.end(), size_t(copies), v);
    return StepFunction(order_, to_level, std::move(out));
}

namespace {

std::pair<StepFunction, StepFunction> reconciled(const StepFunction& f, const StepFunction& g) {
    if (f.order() != g.order())
        throw std::invalid_argument("mixed orders: " + std::to_string(f.order()) + " vs " +
                                    std::to_string(g.order()));
    const int level = std::max(f.level(), g.level());
    return {f.refined(level), g.refined(level)};
}

} // namespace

int common_level(const StepFunction& f, const StepFunction& g) {
    if (f.order() != g.order()) throw std::invalid_argument("mixed orders");
    return std::max(f.level(), g.level());
}

StepFunction StepFunction::operator+(const StepFunction& o) const {
    auto [a, b] = reconciled(*this, o);
    std::vector<Complex> out(a.values());
    for (size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
    return StepFunction(a.order(), a.level(), std::move(out));
}

StepFunction StepFunction::operator-(const StepFunction& o) const {
    auto [a, b] = reconciled(*this, o);
    std::vector<Complex> out(a.values());
    for (size_t i = 0; i < out.size(); ++i) out[i] -= b.values()[i];
    return StepFunction(a.order(), a.level(), std::move(out));
}

StepFunction StepFunction::scaled(Complex factor) const {
    std::vector<Complex> out(values_);
    for (Complex& v : out) v *= factor;
    return StepFunction(order_, level_, std::move(out));
}

CellSet::CellSet(int order, int level, std::vector<std::int64_t> members)
    : order(order), level(level), members(std::move(members)) {
    const std::int64_t cells = checked_ipow(order, level);
    std::sort(this->members.begin(), this->members.end());
    this->members.erase(std::unique(this->members.begin(), this->members.end()),
                        this->members.end());
    if (!this->members.empty() &&
        (this->members.front() < 0 || this->members.back() >= cells))
        throw std::invalid_argument("CellSet: member outside the level-" + std::to_string(level) +
                                    " grid");
}

CellSet CellSet::full(int order, int level) {
    std::vector<std::int64_t> all(static_cast<size_t>(checked_ipow(order, level)));
    for (size_t i = 0; i < all.size(); ++i) all[i] = std::int64_t(i);
    return CellSet(order, level, std::move(all));
}

bool CellSet::contains(std::int64_t cell) const {
    return std::binary_search(members.begin(), members.end(), cell);
}

CellSet CellSet::refined(int to_level) const {
    if (to_level < level) throw ResolutionError("refinement cannot coarsen");
    if (to_level == level) return *this;
    const std::int64_t copies = checked_ipow(order, to_level - level);
    std::vector<std::int64_t> out;
    out.reserve(members.size() * size_t(copies));
    for (std::int64_t m : members)
        for (std::int64_t j = 0; j < copies; ++j) out.push_back(m * copies + j);
    return CellSet(order, to_level, std::move(out));
}

CellSet set_union(const CellSet& x, const CellSet& y) {
    if (x.order != y.order) throw std::invalid_argument("mixed orders");
    const int level = std::max(x.level, y.level);
    CellSet a = x.refined(level), b = y.refined(level);
    std::vector<std::int64_t> out;
    out.reserve(a.members.size() + b.members.size());
    std::set_union(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                   std::back_inserter(out));
    return CellSet(x.order, level, std::move(out));
}

CellSet set_intersection(const CellSet& x, const CellSet& y) {
    if (x.order != y.order) throw std::invalid_argument("mixed orders");
    const int level = std::max(x.level, y.level);
    CellSet a = x.refined(level), b = y.refined(level);
    std::vector<std::int64_t> out;
    std::set_intersection(a.members.begin(), a.members.end(), b.members.begin(), b.members.end(),
                          std::back_inserter(out));
    return CellSet(x.order, level, std::move(out));
}

StepFunction indicator(const AdicInterval& interval, int grid_level) {
    if (grid_level < interval.level)
        throw ResolutionError("indicator: grid level " + std::to_string(grid_level) +
                              " below interval level " + std::to_string(interval.level));
    StepFunction out = StepFunction::zero(interval.order, grid_level);
    std::vector<Complex> v = out.values();
    const std::int64_t first = interval.first_cell(grid_level);
    const std::int64_t count = interval.cell_count(grid_level);
    for (std::int64_t c = first; c < first + count; ++c) v[size_t(c)] = Complex(1.0);
    return StepFunction(interval.order, grid_level, std::move(v));
}

StepFunction menshov_kernel(const AdicInterval& interval, int grid_level) {
    if (grid_level < interval.level)
        throw ResolutionError("menshov_kernel: grid level below interval level");
    const double on_value = 1.0 - double(checked_ipow(interval.order, interval.level));
    std::vector<Complex> v(size_t(checked_ipow(interval.order, grid_level)), Complex(1.0));
    const std::int64_t first = interval.first_cell(grid_level);
    const std::int64_t count = interval.cell_count(grid_level);
    for (std::int64_t c = first; c < first + count; ++c) v[size_t(c)] = Complex(on_value);
    return StepFunction(interval.order, grid_level, std::move(v));
}

StepFunction dilate(const StepFunction& f, int s, int max_level) {
    if (s < 0) throw std::invalid_argument("dilate: s must be >= 0");
    if (s == 0) return f;
    check_level(f.order(), f.level() + s, max_level);
    const std::int64_t tiles = checked_ipow(f.order(), s);
    std::vector<Complex> out;
    out.reserve(f.values().size() * size_t(tiles));
    for (std::int64_t t = 0; t < tiles; ++t)
        out.insert(out.end(), f.values().begin(), f.values().end());
    return StepFunction(f.order(), f.level() + s, std::move(out));
}

namespace {

// Largest a-power block size on which the values are constant. Summing on
// that grid makes norms exactly invariant under refinement.
size_t coarsest_block(const std::vector<Complex>& v, int order) {
    size_t block = 1;
    while (v.size() / block >= size_t(order)) {
        bool mergeable = true;
        for (size_t g = 0; g < v.size() && mergeable; g += block * size_t(order)) {
            const Complex ref = v[g];
            for (size_t i = g + block; i < g + block * size_t(order); i += block)
                if (v[i] != ref) {
                    mergeable = false;
                    break;
                }
        }
        if (!mergeable) break;
        block *= size_t(order);
    }
    return block;
}

} // namespace

double lp_norm(const StepFunction& f, NormKind p) {
    const std::vector<Complex>& v = f.values();
    const size_t block = coarsest_block(v, f.order());
    const double weight = double(block) / double(f.cells());
    double acc = 0.0;
    switch (p) {
        case NormKind::L1:
            for (size_t g = 0; g < v.size(); g += block) acc += std::abs(v[g]);
            return acc * weight;
        case NormKind::L2:
            for (size_t g = 0; g < v.size(); g += block) acc += std::norm(v[g]);
            return std::sqrt(acc * weight);
        case NormKind::Linf:
            for (size_t g = 0; g < v.size(); g += block) acc = std::max(acc, std::abs(v[g]));
            return acc;
    }
    return 0.0;
}

double l1_distance(const StepFunction& f, const StepFunction& g) {
    auto [a, b] = reconciled(f, g);
    double acc = 0.0;
    for (size_t i = 0; i < a.values().size(); ++i) acc += std::abs(a.values()[i] - b.values()[i]);
    return acc / double(a.cells());
}

double l1_norm_on(const StepFunction& f, const CellSet& where) {
    if (f.order() != where.order) throw std::invalid_argument("mixed orders");
    const int level = std::max(f.level(), where.level);
    const StepFunction g = f.refined(level);
    const CellSet s = where.refined(level);
    double acc = 0.0;
    for (std::int64_t c : s.members) acc += std::abs(g.value(c));
    return acc / double(g.cells());
}

Disagreement disagreement_measure(const StepFunction& f, const StepFunction& g, double tol) {
    auto [a, b] = reconciled(f, g);
    std::vector<std::int64_t> bad;
    for (std::int64_t c = 0; c < a.cells(); ++c)
        if (std::abs(a.value(c) - b.value(c)) > tol) bad.push_back(c);
    CellSet cells(a.order(), a.level(), std::move(bad));
    return Disagreement{cells.measure(), std::move(cells)};
}

// ---------------------------------------------------------------------------
// dictionary enumeration

namespace {

// Reduced rationals p/q with |p| <= D, 1 <= q <= D whose rank
// max(|p|, q) equals exactly D, ordered by (q, p). Rank 1 lists 0 first so
// that index 1 of the dictionary is the zero function.
std::vector<Rational> rationals_of_rank(int rank) {
    std::vector<Rational> out;
    if (rank == 1) {
        out.emplace_back(0);
        out.emplace_back(-1);
        out.emplace_back(1);
        return out;
    }
    for (int q = 1; q <= rank; ++q)
        for (int p = -rank; p <= rank; ++p) {
            if (std::gcd(std::abs(p), q) != 1 && !(p == 0 && q == 1)) continue;
            if (p == 0) continue;  // zero has rank 1
            if (std::max(std::abs(p), q) != rank) continue;
            out.emplace_back(p, q);
        }
    return out;
}

constexpr std::uint64_t kSaturated = ~std::uint64_t(0);

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
    if (a == kSaturated || b == kSaturated) return kSaturated;
    std::uint64_t r;
    if (__builtin_mul_overflow(a, b, &r)) return kSaturated;
    return r;
}

std::uint64_t sat_pow(std::uint64_t base, std::int64_t exp) {
    std::uint64_t r = 1;
    for (std::int64_t i = 0; i < exp; ++i) r = sat_mul(r, base);
    return r;
}

std::uint64_t sat_sub(std::uint64_t a, std::uint64_t b) {
    if (a == kSaturated) return kSaturated;
    return a - b;
}

} // namespace

StepFunction dictionary_step(std::int64_t n, int order) {
    if (n < 1) throw std::invalid_argument("dictionary_step: index is 1-based");
    // Shell t holds blocks (J, D) with J + D - 1 = t. Block (J, D) holds the
    // value vectors over rationals of rank <= D that use rank D at least once.
    std::uint64_t remaining = std::uint64_t(n - 1);
    for (int shell = 0;; ++shell) {
        for (int level = 0; level <= shell; ++level) {
            const int rank = shell - level + 1;
            const std::int64_t cells = checked_ipow(order, level);
            std::uint64_t all = 1, prev = 1;
            int full_count = 0;
            for (int r = 1; r <= rank; ++r) full_count += int(rationals_of_rank(r).size());
            const int prev_count = full_count - int(rationals_of_rank(rank).size());
            all = sat_pow(std::uint64_t(full_count), cells);
            prev = sat_pow(std::uint64_t(prev_count), cells);
            const std::uint64_t block = sat_sub(all, prev);
            if (remaining >= block && block != kSaturated) {
                remaining -= block;
                continue;
            }
            // Unrank `remaining` among vectors with at least one rank-`rank`
            // entry, lexicographic from cell 0, value order = concatenated
            // rank lists.
            std::vector<Rational> palette;
            for (int r = 1; r <= rank; ++r) {
                auto part = rationals_of_rank(r);
                palette.insert(palette.end(), part.begin(), part.end());
            }
            std::vector<Complex> values(static_cast<size_t>(cells));
            bool used_new = false;
            for (std::int64_t c = 0; c < cells; ++c) {
                const std::int64_t tail = cells - 1 - c;
                for (size_t vi = 0; vi < palette.size(); ++vi) {
                    const bool new_here = used_new || vi >= size_t(prev_count);
                    const std::uint64_t completions =
                        new_here ? sat_pow(std::uint64_t(full_count), tail)
                                 : sat_sub(sat_pow(std::uint64_t(full_count), tail),
                                           sat_pow(std::uint64_t(prev_count), tail));
                    if (remaining >= completions && completions != kSaturated) {
                        remaining -= completions;
                        continue;
                    }
                    values[size_t(c)] = Complex(palette[vi].to_double());
                    used_new = new_here;
                    break;
                }
            }
            return StepFunction(order, level, std::move(values));
        }
    }
}

std::vector<ValueRun> value_runs(const StepFunction& f) {
    // Recursive: an interval is a run if all a children are runs of the same
    // constant; assemble bottom-up over the cell tree.
    std::vector<ValueRun> runs;
    const int order = f.order();
    std::function<void(int, std::int64_t)> visit = [&](int level, std::int64_t k) {
        const AdicInterval iv(order, level, k);
        const std::int64_t first = iv.first_cell(f.level());
        const std::int64_t count = iv.cell_count(f.level());
        const Complex v0 = f.value(first);
        bool uniform = true;
        for (std::int64_t c = first + 1; c < first + count && uniform; ++c)
            uniform = (f.value(c) == v0);
        if (uniform) {
            runs.push_back(ValueRun{iv, v0});
            return;
        }
        for (int child = 0; child < order; ++child)
            visit(level + 1, (k - 1) * order + child + 1);
    };
    visit(0, 1);
    return runs;
}

} // namespace walshkit
