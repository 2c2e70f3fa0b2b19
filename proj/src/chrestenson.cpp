#include "walshkit/chrestenson.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

namespace walshkit {

UnitPhase::UnitPhase(int order, std::int64_t raw_exponent) : order(order) {
    if (order < 2) throw std::invalid_argument("UnitPhase: order must be >= 2");
    exponent = int(((raw_exponent % order) + order) % order);
}

UnitPhase UnitPhase::operator*(const UnitPhase& o) const {
    if (order != o.order) throw std::invalid_argument("UnitPhase: mixed orders");
    return UnitPhase(order, std::int64_t(exponent) + o.exponent);
}

UnitPhase UnitPhase::pow(std::int64_t k) const {
    // (omega^e)^k = omega^(e*k mod a); k reduces mod a first.
    const std::int64_t km = ((k % order) + order) % order;
    return UnitPhase(order, std::int64_t(exponent) * km);
}

UnitPhase UnitPhase::conj() const { return UnitPhase(order, order - exponent); }

const std::vector<Complex>& phase_table(int order) {
    static std::mutex mu;
    static std::map<int, std::vector<Complex>> tables;
    std::lock_guard<std::mutex> lock(mu);
    auto it = tables.find(order);
    if (it == tables.end()) {
        std::vector<Complex> t(static_cast<size_t>(order));
        for (int k = 0; k < order; ++k) {
            const double angle = 2.0 * std::numbers::pi * double(k) / double(order);
            t[size_t(k)] = Complex(std::cos(angle), std::sin(angle));
        }
        // Pin the exactly representable values.
        t[0] = Complex(1.0, 0.0);
        if (order % 2 == 0) t[size_t(order / 2)] = Complex(-1.0, 0.0);
        if (order % 4 == 0) {
            t[size_t(order / 4)] = Complex(0.0, 1.0);
            t[size_t(3 * order / 4)] = Complex(0.0, -1.0);
        }
        it = tables.emplace(order, std::move(t)).first;
    }
    return it->second;
}

Complex UnitPhase::value() const { return phase_table(order)[size_t(exponent)]; }

AdicPoint AdicPoint::from_rational(std::int64_t num, std::int64_t den) {
    if (den <= 0) throw std::invalid_argument("AdicPoint: denominator must be positive");
    num = ((num % den) + den) % den;  // reduce into [0,1)
    const std::int64_t g = std::gcd(num, den);
    return AdicPoint(num / g, den / g);
}

AdicPoint AdicPoint::from_double(double x) {
    if (!std::isfinite(x)) throw PrecisionError("AdicPoint: non-finite input");
    x -= std::floor(x);
    if (x == 0.0) return AdicPoint(0, 1);
    int exp = 0;
    const double mant = std::frexp(x, &exp);  // x = mant * 2^exp, mant in [0.5, 1)
    const double scaled = std::ldexp(mant, 53);
    const std::int64_t p = std::int64_t(scaled);
    if (double(p) != scaled) throw PrecisionError("AdicPoint: mantissa extraction failed");
    const int shift = 53 - exp;
    if (shift > 62) {
        // Denormally tiny x; not representable in 64-bit rational form.
        throw PrecisionError("AdicPoint: value too small to hold exactly");
    }
    return from_rational(p, std::int64_t(1) << shift);
}

AdicPoint AdicPoint::from_digits(int order, const std::vector<int>& digits) {
    std::int64_t num = 0, den = 1;
    for (int d : digits) {
        if (d < 0 || d >= order) throw std::invalid_argument("AdicPoint: digit out of range");
        if (__builtin_mul_overflow(den, std::int64_t(order), &den))
            throw PrecisionError("AdicPoint: digit string too deep for 64-bit arithmetic");
        num = num * order + d;
    }
    return from_rational(num, den);
}

int AdicPoint::digit(int order, int pos) const {
    // Walk pos steps of p -> a*p mod q; the digit is floor(a*p/q).
    std::int64_t p = num_;
    int d = 0;
    for (int i = 0; i < pos; ++i) {
        const __int128 ap = __int128(p) * order;
        d = int(ap / den_);
        p = std::int64_t(ap % den_);
    }
    return d;
}

UnitPhase rademacher_eval(int order, int n, const AdicPoint& x) {
    if (n < 0) throw std::invalid_argument("rademacher_eval: n must be >= 0");
    return UnitPhase(order, x.digit(order, n + 1));
}

UnitPhase rademacher_eval(int order, int n, double x) {
    return rademacher_eval(order, n, AdicPoint::from_double(x));
}

UnitPhase walsh_eval(int order, std::int64_t n, const AdicPoint& x) {
    if (n < 0) throw std::invalid_argument("walsh_eval: n must be >= 0");
    std::int64_t e = 0;
    int pos = 1;
    for (std::int64_t rest = n; rest != 0; rest /= order, ++pos) {
        const int beta = int(rest % order);
        if (beta != 0) e += std::int64_t(beta) * x.digit(order, pos);
    }
    return UnitPhase(order, e);
}

UnitPhase walsh_eval(int order, std::int64_t n, double x) {
    return walsh_eval(order, n, AdicPoint::from_double(x));
}

void walsh_on_grid_into(int order, std::int64_t n, int grid_level, std::vector<Complex>& out) {
    const std::int64_t cells = checked_ipow(order, grid_level);
    if (n >= cells)
        throw ResolutionError("walsh_on_grid: index " + std::to_string(n) +
                              " not constant on a level-" + std::to_string(grid_level) + " grid");
    if (order > 255) throw std::invalid_argument("walsh_on_grid: order too large");
    // Build by digit tiling over exact integer exponents: appending digit
    // xi_{p+1} adds beta_p * xi_{p+1} mod a. Digit beta_p of n pairs with
    // the p+1-th spatial digit, i.e. the base-a digit of the cell counted
    // from the front. Expansion runs backwards to stay in one buffer; the
    // phase table is consulted once per cell at the end.
    std::vector<std::uint8_t> expo(size_t(cells), 0);
    std::vector<int> beta(size_t(grid_level), 0);
    {
        std::int64_t rest = n;
        for (int j = 0; j < grid_level && rest != 0; ++j, rest /= order)
            beta[size_t(j)] = int(rest % order);
    }
    std::int64_t size = 1;
    for (int pos = 0; pos < grid_level; ++pos) {
        const int b = beta[size_t(pos)];
        for (std::int64_t t = size - 1; t >= 0; --t) {
            const int base = expo[size_t(t)];
            for (int d = order - 1; d >= 0; --d)
                expo[size_t(t * order + d)] = std::uint8_t((base + b * d) % order);
        }
        size *= order;
    }
    const auto& table = phase_table(order);
    out.resize(size_t(cells));
    for (std::int64_t t = 0; t < cells; ++t) out[size_t(t)] = table[expo[size_t(t)]];
}

std::vector<Complex> walsh_on_grid(int order, std::int64_t n, int grid_level) {
    std::vector<Complex> out;
    walsh_on_grid_into(order, n, grid_level, out);
    return out;
}

namespace {

// In-place a-point butterflies along every digit axis. `sign` is -1 for
// analysis (conjugate kernel) and +1 for synthesis.
void butterfly_passes(std::vector<Complex>& x, int order, int level, int sign) {
    const std::int64_t n = std::int64_t(x.size());
    const auto& table = phase_table(order);
    if (order == 2) {
        for (std::int64_t h = 1; h < n; h <<= 1)
            for (std::int64_t base = 0; base < n; base += (h << 1))
                for (std::int64_t off = base; off < base + h; ++off) {
                    const Complex a = x[size_t(off)];
                    const Complex b = x[size_t(off + h)];
                    x[size_t(off)] = a + b;
                    x[size_t(off + h)] = a - b;
                }
        return;
    }
    std::vector<Complex> scratch(static_cast<size_t>(order));
    std::int64_t h = 1;
    for (int pass = 0; pass < level; ++pass, h *= order) {
        for (std::int64_t base = 0; base < n; base += h * order) {
            for (std::int64_t off = base; off < base + h; ++off) {
                for (int d = 0; d < order; ++d) {
                    Complex acc(0.0);
                    for (int e = 0; e < order; ++e) {
                        int exp = (d * e) % order;
                        if (sign < 0 && exp != 0) exp = order - exp;
                        acc += x[size_t(off + e * h)] * table[size_t(exp)];
                    }
                    scratch[size_t(d)] = acc;
                }
                for (int d = 0; d < order; ++d) x[size_t(off + d * h)] = scratch[size_t(d)];
            }
        }
    }
}

std::int64_t digit_reverse(std::int64_t v, int order, int level) {
    std::int64_t r = 0;
    for (int i = 0; i < level; ++i) {
        r = r * order + v % order;
        v /= order;
    }
    return r;
}

} // namespace

std::vector<Complex> analyze_dense(const StepFunction& f, TransformMethod method) {
    const int order = f.order();
    const int level = f.level();
    const std::int64_t n = f.cells();
    if (method == TransformMethod::Naive) {
        if (level > 8)
            throw ResolutionError("naive transform is limited to level <= 8");
        std::vector<Complex> out(static_cast<size_t>(n));
        for (std::int64_t k = 0; k < n; ++k) out[size_t(k)] = analyze_coefficient(f, k);
        return out;
    }
    std::vector<Complex> work(f.values());
    butterfly_passes(work, order, level, -1);
    const double scale = 1.0 / double(n);
    std::vector<Complex> out(static_cast<size_t>(n));
    for (std::int64_t k = 0; k < n; ++k)
        out[size_t(k)] = work[size_t(digit_reverse(k, order, level))] * scale;
    return out;
}

StepFunction synthesize_dense(int order, int level, const std::vector<Complex>& coefficients) {
    const std::int64_t n = checked_ipow(order, level);
    if (std::int64_t(coefficients.size()) != n)
        throw std::invalid_argument("synthesize_dense: wrong coefficient count");
    std::vector<Complex> work(static_cast<size_t>(n));
    for (std::int64_t k = 0; k < n; ++k)
        work[size_t(digit_reverse(k, order, level))] = coefficients[size_t(k)];
    butterfly_passes(work, order, level, +1);
    return StepFunction(order, level, std::move(work));
}

Complex analyze_coefficient(const StepFunction& f, std::int64_t n) {
    const std::vector<Complex> row = walsh_on_grid(f.order(), n, f.level());
    Complex acc(0.0);
    for (size_t t = 0; t < row.size(); ++t) acc += f.values()[t] * std::conj(row[t]);
    return acc / double(f.cells());
}

void Spectrum::set(std::int64_t n, Complex c) {
    if (n < 0) throw std::invalid_argument("Spectrum: negative index");
    if (n >= checked_ipow(order_, source_level_))
        throw ResolutionError("Spectrum: index " + std::to_string(n) +
                              " outside level-" + std::to_string(source_level_) + " range");
    coeffs_[n] = c;
}

Complex Spectrum::at(std::int64_t n) const {
    auto it = coeffs_.find(n);
    return it == coeffs_.end() ? Complex(0.0) : it->second;
}

Spectrum analyze(const StepFunction& f, TransformMethod method) {
    const std::vector<Complex> dense = analyze_dense(f, method);
    Spectrum s(f.order(), f.level());
    for (std::int64_t k = 0; k < std::int64_t(dense.size()); ++k) s.set(k, dense[size_t(k)]);
    return s;
}

StepFunction synthesize(const Spectrum& spectrum, int level) {
    const int order = spectrum.order();
    const std::int64_t cells = checked_ipow(order, level);
    for (const auto& [n, c] : spectrum.coefficients())
        if (n >= cells)
            throw ResolutionError("synthesize: index " + std::to_string(n) +
                                  " needs more than level " + std::to_string(level));
    // Sparse direct sum when the support is small, dense inverse otherwise.
    const std::int64_t support = std::int64_t(spectrum.coefficients().size());
    if (support * 4 < std::int64_t(level) * order || support < 16) {
        std::vector<Complex> acc(size_t(cells), Complex(0.0));
        for (const auto& [n, c] : spectrum.coefficients()) {
            const std::vector<Complex> row = walsh_on_grid(order, n, level);
            for (size_t t = 0; t < acc.size(); ++t) acc[t] += c * row[t];
        }
        return StepFunction(order, level, std::move(acc));
    }
    std::vector<Complex> dense(size_t(cells), Complex(0.0));
    for (const auto& [n, c] : spectrum.coefficients()) dense[size_t(n)] = c;
    return synthesize_dense(order, level, dense);
}

} // namespace walshkit
