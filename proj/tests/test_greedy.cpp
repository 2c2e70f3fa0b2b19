#include <doctest.h>

#include <random>

#include "walshkit/greedy.hpp"

using namespace walshkit;

TEST_CASE("greedy order sorts by modulus with index tie-break") {
    Spectrum s(2, 2);
    s.set(1, Complex(0.5));
    s.set(2, Complex(-0.9));
    s.set(3, Complex(0.2));
    const GreedyOrdering g = greedy_order(s);
    CHECK(g.ranked == std::vector<std::int64_t>{2, 1, 3});
    CHECK(g.magnitudes[0] == 0.9);

    Spectrum tie(2, 2);
    tie.set(1, Complex(0.5));
    tie.set(2, Complex(0.5));
    CHECK(greedy_order(tie).ranked == std::vector<std::int64_t>{1, 2});

    CHECK(greedy_order(Spectrum(2, 2)).ranked.empty());
}

TEST_CASE("greedy order ignores numerically zero coefficients") {
    Spectrum s(2, 3);
    s.set(0, Complex(1.0));
    s.set(5, Complex(1e-15));
    CHECK(greedy_order(s).ranked == std::vector<std::int64_t>{0});
}

TEST_CASE("greedy order is insertion-order invariant") {
    std::mt19937_64 rng(42);
    std::vector<std::pair<std::int64_t, Complex>> entries;
    for (std::int64_t n = 0; n < 16; ++n)
        entries.emplace_back(n, Complex(std::uniform_real_distribution<double>(-1, 1)(rng),
                                        std::uniform_real_distribution<double>(-1, 1)(rng)));
    Spectrum forward(2, 4), backward(2, 4);
    for (const auto& [n, c] : entries) forward.set(n, c);
    for (auto it = entries.rbegin(); it != entries.rend(); ++it) backward.set(it->first, it->second);
    CHECK(greedy_order(forward).ranked == greedy_order(backward).ranked);
}

TEST_CASE("greedy approximant keeps the m largest terms") {
    Spectrum s(2, 1);
    s.set(0, Complex(1.0));
    s.set(1, Complex(-2.0));
    SUBCASE("m = 0 gives zero") {
        const StepFunction f = greedy_approximant(s, 0, 1);
        CHECK(f.value(0) == Complex(0.0));
        CHECK(f.value(1) == Complex(0.0));
    }
    SUBCASE("m = 1 keeps the larger coefficient") {
        const StepFunction f = greedy_approximant(s, 1, 1);
        CHECK(f.value(0) == Complex(-2.0));
        CHECK(f.value(1) == Complex(2.0));
    }
    SUBCASE("m past the support is the full synthesis") {
        const StepFunction full = greedy_approximant(s, 99, 1);
        const StepFunction direct = synthesize(s, 1);
        CHECK(full.value(0) == direct.value(0));
        CHECK(full.value(1) == direct.value(1));
    }
}

TEST_CASE("error curve hits zero at full support") {
    Spectrum s(2, 2);
    s.set(2, Complex(0.75));
    const StepFunction f = synthesize(s, 2);
    const auto curve = greedy_error_curve(f, 1, NormKind::L1);
    REQUIRE(curve.size() == 2);
    CHECK(curve[0].m == 0);
    CHECK(curve[0].error == doctest::Approx(0.75));
    CHECK(curve[1].error < 1e-12);

    std::mt19937_64 rng(7);
    std::vector<Complex> v(8);
    for (Complex& x : v)
        x = Complex(std::uniform_real_distribution<double>(-1, 1)(rng), 0.0);
    const StepFunction h(2, 3, std::move(v));
    const auto full = greedy_error_curve(h, 8, NormKind::L1);
    CHECK(full.back().error < 1e-12);
}

TEST_CASE("l2 greedy error is non-increasing in m") {
    std::mt19937_64 rng(11);
    for (int a : {2, 3}) {
        std::vector<Complex> v(size_t(checked_ipow(a, 3)));
        for (Complex& x : v)
            x = Complex(std::uniform_real_distribution<double>(-1, 1)(rng),
                        std::uniform_real_distribution<double>(-1, 1)(rng));
        const StepFunction f(a, 3, std::move(v));
        const auto curve = greedy_error_curve(f, f.cells(), NormKind::L2);
        for (size_t i = 1; i < curve.size(); ++i)
            CHECK(curve[i].error <= curve[i - 1].error + 1e-12);
    }
}

TEST_CASE("strictly decreasing magnitudes make greedy the natural partial sum") {
    Spectrum s(2, 3);
    s.set(1, Complex(0.9));
    s.set(3, Complex(0.5));
    s.set(6, Complex(0.25));
    const GreedyOrdering g = greedy_order(s);
    CHECK(g.ranked == std::vector<std::int64_t>{1, 3, 6});
    for (size_t i = 1; i < g.magnitudes.size(); ++i)
        CHECK(g.magnitudes[i] < g.magnitudes[i - 1]);
}
