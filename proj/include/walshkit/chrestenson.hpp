#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <vector>

#include "walshkit/adic.hpp"

namespace walshkit {

/**
 * An a-th root of unity omega_a^exponent, carried as its exact integer
 * exponent mod a. All Rademacher/Walsh values live here; conversion to
 * complex goes through one precomputed a-entry table so no transcendental
 * error accumulates in phase arithmetic.
 */
struct UnitPhase {
    int order;
    int exponent;  // in [0, order)

    UnitPhase(int order, std::int64_t raw_exponent);

    UnitPhase operator*(const UnitPhase& o) const;
    UnitPhase pow(std::int64_t k) const;
    UnitPhase conj() const;
    bool operator==(const UnitPhase& o) const {
        return order == o.order && exponent == o.exponent;
    }

    Complex value() const;
};

// omega_a^k for k in [0, a); cached per order.
const std::vector<Complex>& phase_table(int order);

/**
 * A point of [0,1) held exactly as a reduced rational, so a-adic digits of
 * any depth come out of integer arithmetic. Doubles convert exactly (they
 * are dyadic rationals); digit strings convert exactly for their own order.
 */
class AdicPoint {
public:
    static AdicPoint from_rational(std::int64_t num, std::int64_t den);
    static AdicPoint from_double(double x);
    static AdicPoint from_digits(int order, const std::vector<int>& digits);

    // The pos-th fractional a-adic digit (pos >= 1) of x, exactly.
    int digit(int order, int pos) const;

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

private:
    AdicPoint(std::int64_t num, std::int64_t den) : num_(num), den_(den) {}
    std::int64_t num_;  // 0 <= num < den, reduced
    std::int64_t den_;
};

// phi_n(x) = omega_a^(xi_{n+1}) where xi are the a-adic digits of x.
UnitPhase rademacher_eval(int order, int n, const AdicPoint& x);
UnitPhase rademacher_eval(int order, int n, double x);

// psi_n(x) = omega_a^(sum_j beta_j * xi_{j+1} mod a) with beta the base-a
// digits of n; psi_0 = 1.
UnitPhase walsh_eval(int order, std::int64_t n, const AdicPoint& x);
UnitPhase walsh_eval(int order, std::int64_t n, double x);

// psi_n evaluated on every cell of the level-J grid (cell midpoint digits,
// i.e. the constant value the function takes on the cell).
std::vector<Complex> walsh_on_grid(int order, std::int64_t n, int grid_level);
void walsh_on_grid_into(int order, std::int64_t n, int grid_level, std::vector<Complex>& out);

/**
 * Fourier–Walsh coefficients c_n = integral of f * conj(psi_n); indices
 * absent from the map are zero. source_level bounds the support: n < a^J.
 */
class Spectrum {
public:
    Spectrum(int order, int source_level) : order_(order), source_level_(source_level) {}

    int order() const { return order_; }
    int source_level() const { return source_level_; }
    const std::map<std::int64_t, Complex>& coefficients() const { return coeffs_; }

    void set(std::int64_t n, Complex c);
    Complex at(std::int64_t n) const;

private:
    int order_;
    int source_level_;
    std::map<std::int64_t, Complex> coeffs_;
};

enum class TransformMethod { Naive, Fast };

// Dense transforms, coefficient n at position n. The fast path runs J
// stages of a-point butterflies over the digit structure (O(N J a)); the
// naive path evaluates psi_n cellwise (O(N^2)) and is refused above J = 8.
std::vector<Complex> analyze_dense(const StepFunction& f, TransformMethod method);
StepFunction synthesize_dense(int order, int level, const std::vector<Complex>& coefficients);

// Single coefficient by direct cellwise integration; the O(N) oracle row.
Complex analyze_coefficient(const StepFunction& f, std::int64_t n);

Spectrum analyze(const StepFunction& f, TransformMethod method);

// Pointwise sum of c_n psi_n on the level-J grid; exact inverse of analyze
// for level-J functions. Indices must satisfy n < a^J.
StepFunction synthesize(const Spectrum& spectrum, int level);

} // namespace walshkit
