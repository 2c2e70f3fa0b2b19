#include <doctest.h>

#include <random>

#include "walshkit/chrestenson.hpp"

using namespace walshkit;

namespace {

StepFunction random_step(int order, int level, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Complex> v(size_t(checked_ipow(order, level)));
    for (Complex& x : v) x = Complex(dist(rng), dist(rng));
    return StepFunction(order, level, std::move(v));
}

} // namespace

TEST_CASE("rademacher digit evaluation") {
    CHECK(rademacher_eval(2, 0, 0.75) == UnitPhase(2, 1));
    CHECK(rademacher_eval(2, 0, 0.75).value() == Complex(-1.0));
    CHECK(rademacher_eval(4, 0, 0.3) == UnitPhase(4, 1));
    CHECK(rademacher_eval(4, 0, 0.3).value() == Complex(0.0, 1.0));
    CHECK(rademacher_eval(3, 1, AdicPoint::from_rational(4, 9)) == UnitPhase(3, 1));
    // Period-1 extension: digits of x and x+1 agree.
    CHECK(rademacher_eval(2, 3, 0.3125 + 1.0) == rademacher_eval(2, 3, 0.3125));
}

TEST_CASE("walsh evaluation from base-a digits of the index") {
    for (int a : {2, 3, 4, 5})
        for (double x : {0.0, 0.25, 0.7, 0.99})
            CHECK(walsh_eval(a, 0, x) == UnitPhase(a, 0));

    CHECK(walsh_eval(2, 3, 0.25) == UnitPhase(2, 1));
    CHECK(walsh_eval(2, 3, 0.25).value() == Complex(-1.0));
    CHECK(walsh_eval(3, 5, AdicPoint::from_rational(4, 9)) == UnitPhase(3, 0));
}

TEST_CASE("power reduction mod a") {
    const UnitPhase p(5, 3);
    for (int k = 0; k <= 12; ++k) CHECK(p.pow(k) == p.pow(k % 5));
}

TEST_CASE("root-of-unity sums vanish except on multiples of a") {
    for (int a : {2, 3, 4, 5}) {
        const auto& table = phase_table(a);
        for (int m = 0; m <= 2 * a; ++m) {
            Complex sum(0.0);
            for (int k = 0; k < a; ++k) sum += table[size_t((k * m) % a)];
            const Complex expected(m % a == 0 ? double(a) : 0.0);
            CHECK(std::abs(sum - expected) < 1e-12);
        }
    }
}

TEST_CASE("walsh_on_grid matches pointwise evaluation at cell points") {
    for (int a : {2, 3, 5}) {
        const int level = 3;
        const std::int64_t cells = checked_ipow(a, level);
        for (std::int64_t n : {std::int64_t(0), std::int64_t(1), std::int64_t(a),
                               cells / 2, cells - 1}) {
            const auto grid = walsh_on_grid(a, n, level);
            for (std::int64_t t = 0; t < cells; ++t) {
                const AdicPoint x = AdicPoint::from_rational(t, cells);
                CHECK(grid[size_t(t)] == walsh_eval(a, n, x).value());
            }
        }
    }
}

TEST_CASE("analyze reproduces the worked coefficient examples") {
    SUBCASE("indicator of the first half interval") {
        const StepFunction f(2, 1, {Complex(1.0), Complex(0.0)});
        const auto c = analyze_dense(f, TransformMethod::Fast);
        CHECK(c[0] == Complex(0.5));
        CHECK(c[1] == Complex(0.5));
    }
    SUBCASE("constant function concentrates on psi_0") {
        for (int a : {2, 3, 4}) {
            const StepFunction f(a, 2, std::vector<Complex>(size_t(a * a), Complex(1.0)));
            const auto c = analyze_dense(f, TransformMethod::Fast);
            CHECK(std::abs(c[0] - Complex(1.0)) < 1e-14);
            for (size_t n = 1; n < c.size(); ++n) CHECK(std::abs(c[n]) < 1e-14);
        }
    }
    SUBCASE("menshov kernel of the first half interval") {
        const StepFunction f(2, 1, {Complex(-1.0), Complex(1.0)});
        const auto c = analyze_dense(f, TransformMethod::Fast);
        CHECK(c[0] == Complex(0.0));
        CHECK(c[1] == Complex(-1.0));
    }
}

TEST_CASE("synthesize inverts analyze and handles sparse spectra") {
    SUBCASE("pure dc") {
        Spectrum s(3, 2);
        s.set(0, Complex(1.0));
        const StepFunction f = synthesize(s, 2);
        for (std::int64_t c = 0; c < 9; ++c) CHECK(f.value(c) == Complex(1.0));
    }
    SUBCASE("half plus half reproduces the indicator") {
        Spectrum s(2, 1);
        s.set(0, Complex(0.5));
        s.set(1, Complex(0.5));
        const StepFunction f = synthesize(s, 1);
        CHECK(f.value(0) == Complex(1.0));
        CHECK(f.value(1) == Complex(0.0));
    }
    SUBCASE("round trip on random input") {
        for (int a : {2, 3, 5}) {
            const StepFunction f = random_step(a, 4, 1234 + std::uint64_t(a));
            const StepFunction back = synthesize(analyze(f, TransformMethod::Fast), 4);
            for (std::int64_t c = 0; c < f.cells(); ++c)
                CHECK(std::abs(back.value(c) - f.value(c)) < 1e-10);
        }
    }
    SUBCASE("index past the grid is refused") {
        Spectrum s(2, 3);
        s.set(7, Complex(1.0));
        CHECK_THROWS_AS(synthesize(s, 2), ResolutionError);
    }
}

TEST_CASE("fast and naive transforms agree") {
    for (int a : {2, 3, 4, 5}) {
        for (int level = 1; level <= 3; ++level) {
            const StepFunction f = random_step(a, level, 99 * std::uint64_t(a) + level);
            const auto fast = analyze_dense(f, TransformMethod::Fast);
            const auto naive = analyze_dense(f, TransformMethod::Naive);
            for (size_t n = 0; n < fast.size(); ++n)
                CHECK(std::abs(fast[n] - naive[n]) < 1e-12);
        }
    }
    CHECK_THROWS_AS(analyze_dense(StepFunction::zero(2, 9), TransformMethod::Naive),
                    ResolutionError);
}

TEST_CASE("parseval holds for analyzed spectra") {
    for (int a : {2, 3}) {
        const StepFunction f = random_step(a, 4, 7 * std::uint64_t(a));
        const auto c = analyze_dense(f, TransformMethod::Fast);
        double coeff_energy = 0.0;
        for (const Complex& v : c) coeff_energy += std::norm(v);
        double cell_energy = 0.0;
        for (const Complex& v : f.values()) cell_energy += std::norm(v);
        cell_energy /= double(f.cells());
        CHECK(std::abs(coeff_energy - cell_energy) <
              1e-10 * std::max(1.0, cell_energy));
    }
}

TEST_CASE("orthonormality on small grids") {
    for (int a : {2, 3, 5}) {
        const int level = 2;
        const std::int64_t cells = checked_ipow(a, level);
        for (std::int64_t n = 0; n < cells; ++n) {
            const auto rn = walsh_on_grid(a, n, level);
            for (std::int64_t k = 0; k < cells; ++k) {
                const auto rk = walsh_on_grid(a, k, level);
                Complex dot(0.0);
                for (std::int64_t t = 0; t < cells; ++t)
                    dot += rn[size_t(t)] * std::conj(rk[size_t(t)]);
                dot /= double(cells);
                CHECK(std::abs(dot - Complex(n == k ? 1.0 : 0.0)) < 1e-12);
            }
        }
    }
}

TEST_CASE("index multiplicativity under dilation") {
    // psi_i(x) psi_j(a^s x) = psi_{j a^s + i}(x) on exact phase exponents.
    for (int a : {2, 3}) {
        for (int s = 1; s <= 3; ++s) {
            const std::int64_t as = checked_ipow(a, s);
            const int grid = 2 * s + 2;
            const std::int64_t cells = checked_ipow(a, grid);
            for (std::int64_t i = 0; i < as; ++i)
                for (std::int64_t j = 0; j < as; ++j)
                    for (std::int64_t t = 0; t < cells; t += 5) {
                        const AdicPoint x = AdicPoint::from_rational(t, cells);
                        const AdicPoint xs = AdicPoint::from_rational(
                            (t * as) % cells, cells);
                        const UnitPhase lhs = walsh_eval(a, i, x) * walsh_eval(a, j, xs);
                        const UnitPhase rhs = walsh_eval(a, j * as + i, x);
                        CHECK(lhs == rhs);
                    }
        }
    }
}

TEST_CASE("rademacher factor splits off the top digit block") {
    // psi_{a^k + j} = phi_k psi_j for 0 <= j <= a^k - 1, exact exponents.
    for (int a : {2, 3}) {
        for (int k = 0; k <= 3; ++k) {
            const std::int64_t ak = checked_ipow(a, k);
            const int grid = k + 2;
            const std::int64_t cells = checked_ipow(a, grid);
            for (std::int64_t j = 0; j < ak; ++j)
                for (std::int64_t t = 0; t < cells; ++t) {
                    const AdicPoint x = AdicPoint::from_rational(t, cells);
                    const UnitPhase lhs = walsh_eval(a, ak + j, x);
                    const UnitPhase rhs = rademacher_eval(a, k, x) * walsh_eval(a, j, x);
                    CHECK(lhs == rhs);
                }
        }
    }
}

TEST_CASE("spectrum type guards its index range") {
    Spectrum s(2, 2);
    CHECK_THROWS_AS(s.set(4, Complex(1.0)), ResolutionError);
    s.set(3, Complex(0.5));
    CHECK(s.at(3) == Complex(0.5));
    CHECK(s.at(2) == Complex(0.0));
}

TEST_CASE("adic points reject what 64-bit rationals cannot hold") {
    CHECK_THROWS_AS(AdicPoint::from_double(1e-300), PrecisionError);
    const AdicPoint x = AdicPoint::from_digits(3, {1, 0, 2});
    CHECK(x.digit(3, 1) == 1);
    CHECK(x.digit(3, 2) == 0);
    CHECK(x.digit(3, 3) == 2);
    CHECK(x.digit(3, 4) == 0);
}
