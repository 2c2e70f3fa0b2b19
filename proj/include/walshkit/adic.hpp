#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "walshkit/errors.hpp"
#include "walshkit/rational.hpp"

namespace walshkit {

using Complex = std::complex<double>;

// Hard ceiling on grid size regardless of configuration: one value array at
// this size is 2 GiB, past which dense level-J arithmetic stops being a
// desk-scale representation.
inline constexpr std::int64_t kAbsoluteCellCeiling = std::int64_t(1) << 27;

// Default maximum level for order a: the largest J with a^J <= ~2e6 cells
// (J = 21 for a = 2).
int default_max_level(int order);

// Throws ResolutionError unless a^level is an addressable, in-budget grid.
void check_level(int order, int level, int max_level);

/**
 * The a-adic interval [(k-1)/a^m, k/a^m), 1 <= k <= a^m. The basic
 * geometric unit: every function this library constructs is constant on
 * some level of these.
 */
struct AdicInterval {
    AdicInterval(int order, int level, std::int64_t index);

    int order;
    int level;           // m >= 0
    std::int64_t index;  // k, 1-based

    Rational measure() const { return Rational::power_of(order, -level); }

    // First zero-based cell covered at grid level j >= level.
    std::int64_t first_cell(int grid_level) const;
    // Number of cells covered at grid level j >= level.
    std::int64_t cell_count(int grid_level) const;
};

/**
 * A function on [0,1) constant on every level-J a-adic cell, stored as the
 * a^J cell values. Immutable after construction; all arithmetic reconciles
 * levels by exact refinement.
 */
class StepFunction {
public:
    StepFunction(int order, int level, std::vector<Complex> values);

    static StepFunction zero(int order, int level);
    static StepFunction constant(int order, Complex value) {
        return StepFunction(order, 0, {value});
    }

    int order() const { return order_; }
    int level() const { return level_; }
    std::int64_t cells() const { return std::int64_t(values_.size()); }
    const std::vector<Complex>& values() const { return values_; }
    Complex value(std::int64_t cell) const { return values_[size_t(cell)]; }

    // Exact refinement: each cell splits into a^(to_level - level) copies.
    StepFunction refined(int to_level) const;

    StepFunction operator+(const StepFunction& o) const;
    StepFunction operator-(const StepFunction& o) const;
    StepFunction scaled(Complex factor) const;

private:
    int order_;
    int level_;
    std::vector<Complex> values_;
};

/**
 * A finite union of level-J cells, as a sorted set of zero-based cell
 * indices. Its measure |members| / a^J is exact.
 */
struct CellSet {
    CellSet(int order, int level, std::vector<std::int64_t> members);

    static CellSet empty(int order, int level) { return CellSet(order, level, {}); }
    static CellSet full(int order, int level);

    int order;
    int level;
    std::vector<std::int64_t> members;  // sorted, unique

    Rational measure() const {
        return Rational(std::int64_t(members.size())) * Rational::power_of(order, -level);
    }
    bool contains(std::int64_t cell) const;

    CellSet refined(int to_level) const;
    // Set algebra after refining both operands to the common (finer) level.
    friend CellSet set_union(const CellSet& x, const CellSet& y);
    friend CellSet set_intersection(const CellSet& x, const CellSet& y);
};

// chi_Delta sampled at grid level J >= interval.level.
StepFunction indicator(const AdicInterval& interval, int grid_level);

// The spreading kernel: 1 off the interval, 1 - a^m on it. Satisfies
// I = psi_0 - a^m * chi cellwise and integrates to zero exactly.
StepFunction menshov_kernel(const AdicInterval& interval, int grid_level);

// x -> f(a^s x mod 1), the period-1 dilation; raises the level by s.
StepFunction dilate(const StepFunction& f, int s, int max_level);

enum class NormKind { L1, L2, Linf };

// Exact Riemann sum: a^-J * sum |v|^p, then the p-th root (max for Linf).
double lp_norm(const StepFunction& f, NormKind p);

double l1_distance(const StepFunction& f, const StepFunction& g);

// Integral of |f| restricted to the cells of `where`.
double l1_norm_on(const StepFunction& f, const CellSet& where);

struct Disagreement {
    Rational measure;
    CellSet cells;
};

// Cells where |f - g| > tol, with exact measure.
Disagreement disagreement_measure(const StepFunction& f, const StepFunction& g, double tol);

// Greatest common refinement of two functions (order must match).
int common_level(const StepFunction& f, const StepFunction& g);

/**
 * Deterministic enumeration (1-based) of all step functions with rational
 * values and rational a-adic constancy intervals: shells diagonal over
 * (level J, denominator bound D); within a shell, value vectors that use at
 * least one rank-D rational, in lexicographic order. Injective over
 * (level, value vector) pairs and dense in L^1 on any fixed grid as the
 * index grows.
 */
StepFunction dictionary_step(std::int64_t n, int order);

// Maximal a-adic intervals on which f is constant, in left-to-right order.
// Every cell belongs to exactly one run.
struct ValueRun {
    AdicInterval interval;
    Complex value;
};
std::vector<ValueRun> value_runs(const StepFunction& f);

} // namespace walshkit
