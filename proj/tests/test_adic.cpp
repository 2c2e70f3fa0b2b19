#include <doctest.h>

#include <set>

#include "walshkit/adic.hpp"

using namespace walshkit;

namespace {

std::vector<Complex> real_values(std::initializer_list<double> xs) {
    std::vector<Complex> out;
    for (double x : xs) out.emplace_back(x);
    return out;
}

} // namespace

TEST_CASE("indicator samples the interval at the requested level") {
    CHECK(indicator(AdicInterval(2, 1, 1), 1).values() == real_values({1, 0}));
    CHECK(indicator(AdicInterval(2, 1, 1), 2).values() == real_values({1, 1, 0, 0}));

    const StepFunction f = indicator(AdicInterval(3, 2, 5), 2);
    for (std::int64_t c = 0; c < 9; ++c)
        CHECK(f.value(c) == Complex(c == 4 ? 1.0 : 0.0));

    CHECK_THROWS_AS(indicator(AdicInterval(2, 2, 1), 1), ResolutionError);
}

TEST_CASE("menshov kernel values and identities") {
    CHECK(menshov_kernel(AdicInterval(2, 1, 1), 1).values() == real_values({-1, 1}));
    CHECK(menshov_kernel(AdicInterval(3, 1, 2), 1).values() == real_values({1, -2, 1}));
    CHECK(menshov_kernel(AdicInterval(2, 2, 1), 2).values() == real_values({-3, 1, 1, 1}));

    // I = psi_0 - a^m chi, cellwise exact, and integral zero, for a few draws.
    for (int a : {2, 3, 5}) {
        for (int m : {1, 2}) {
            for (std::int64_t k = 1; k <= checked_ipow(a, m); ++k) {
                const AdicInterval iv(a, m, k);
                const int level = m + 1;
                const StepFunction kern = menshov_kernel(iv, level);
                const StepFunction chi = indicator(iv, level);
                const double am = double(checked_ipow(a, m));
                Complex integral(0.0);
                for (std::int64_t c = 0; c < kern.cells(); ++c) {
                    CHECK(kern.value(c) == Complex(1.0) - am * chi.value(c));
                    integral += kern.value(c);
                }
                CHECK(integral == Complex(0.0));
            }
        }
    }
}

TEST_CASE("dilate tiles with period one") {
    const StepFunction i2(2, 1, real_values({-1, 1}));
    CHECK(dilate(i2, 1, 20).values() == real_values({-1, 1, -1, 1}));
    CHECK(dilate(i2, 0, 20).values() == i2.values());

    const StepFunction i3(3, 1, real_values({1, -2, 1}));
    CHECK(dilate(i3, 1, 20).values() ==
          real_values({1, -2, 1, 1, -2, 1, 1, -2, 1}));

    CHECK_THROWS_AS(dilate(i2, 25, 20), ResolutionError);
}

TEST_CASE("norms are exact Riemann sums") {
    CHECK(lp_norm(StepFunction(2, 1, real_values({1, 0})), NormKind::L1) == 0.5);
    CHECK(lp_norm(StepFunction(2, 1, real_values({-1, 1})), NormKind::L2) == 1.0);
    CHECK(lp_norm(StepFunction(2, 2, real_values({-3, 1, 1, 1})), NormKind::L1) == 1.5);
    CHECK(lp_norm(StepFunction(2, 2, real_values({-3, 1, 1, 1})), NormKind::Linf) == 3.0);
}

TEST_CASE("refinement preserves norms exactly; dilation to rounding") {
    const StepFunction f(3, 1, {Complex(0.25, -1.0), Complex(-2.0, 0.5), Complex(0.0, 1.0)});
    for (NormKind p : {NormKind::L1, NormKind::L2, NormKind::Linf}) {
        CHECK(lp_norm(f.refined(3), p) == lp_norm(f, p));
        CHECK(lp_norm(dilate(f, 2, 20), p) ==
              doctest::Approx(lp_norm(f, p)).epsilon(1e-15));
    }
    CHECK(lp_norm(dilate(f, 2, 20), NormKind::Linf) == lp_norm(f, NormKind::Linf));
}

TEST_CASE("disagreement measure is exact") {
    const StepFunction f(2, 1, real_values({1, 0}));
    SUBCASE("identical functions") {
        const Disagreement d = disagreement_measure(f, f, 1e-12);
        CHECK(d.measure == Rational(0));
        CHECK(d.cells.members.empty());
    }
    SUBCASE("half-interval difference") {
        const StepFunction g(2, 1, real_values({1, 1}));
        const Disagreement d = disagreement_measure(f, g, 1e-12);
        CHECK(d.measure == Rational(1, 2));
    }
    SUBCASE("global constant shift") {
        const StepFunction g(2, 1, real_values({1.5, 0.5}));
        CHECK(disagreement_measure(f, g, 1e-12).measure == Rational(1));
        CHECK(disagreement_measure(f, g, 0.7).measure == Rational(0));
    }
    SUBCASE("levels reconcile by refinement") {
        const StepFunction g(2, 2, real_values({1, 1, 0, 0}));
        CHECK(disagreement_measure(f, g, 1e-12).measure == Rational(0));
    }
}

TEST_CASE("disagreement zero iff cellwise equal within tol") {
    const StepFunction f(2, 2, real_values({0.5, -0.25, 0, 1}));
    const StepFunction g(2, 2, real_values({0.5 + 1e-13, -0.25, 0, 1}));
    CHECK(disagreement_measure(f, g, 1e-12).measure == Rational(0));
    CHECK(disagreement_measure(f, g, 1e-14).measure == Rational(1, 4));
}

TEST_CASE("cell sets carry exact rational measure") {
    const CellSet s(3, 2, {0, 4, 7});
    CHECK(s.measure() == Rational(3, 9));
    CHECK(s.measure() == Rational(1, 3));

    const CellSet t(3, 1, {0});
    CHECK(set_intersection(s, t).members == std::vector<std::int64_t>{0});
    CHECK(set_union(s, t).measure() == Rational(5, 9));
    CHECK(CellSet::full(3, 2).measure() == Rational(1));
}

TEST_CASE("dictionary enumeration is deterministic, rational and injective") {
    const StepFunction first = dictionary_step(1, 2);
    CHECK(first.level() == 0);
    CHECK(first.value(0) == Complex(0.0));

    // Injectivity over (level, value vector) pairs for the first thousand.
    std::set<std::pair<int, std::vector<std::pair<double, double>>>> seen;
    for (std::int64_t n = 1; n <= 1000; ++n) {
        const StepFunction f = dictionary_step(n, 2);
        CHECK(dictionary_step(n, 2).values() == f.values());  // deterministic
        std::vector<std::pair<double, double>> key;
        for (const Complex& v : f.values()) key.emplace_back(v.real(), v.imag());
        CHECK(seen.emplace(f.level(), std::move(key)).second);
    }
}

TEST_CASE("value runs are maximal uniform a-adic intervals") {
    const StepFunction f(2, 2, real_values({2, 2, 0, 1}));
    const auto runs = value_runs(f);
    REQUIRE(runs.size() == 3);
    CHECK(runs[0].interval.level == 1);
    CHECK(runs[0].interval.index == 1);
    CHECK(runs[0].value == Complex(2.0));
    CHECK(runs[1].interval.level == 2);
    CHECK(runs[1].interval.index == 3);
    CHECK(runs[1].value == Complex(0.0));
    CHECK(runs[2].interval.level == 2);
    CHECK(runs[2].interval.index == 4);

    const auto whole = value_runs(StepFunction(3, 2, std::vector<Complex>(9, Complex(7.0))));
    REQUIRE(whole.size() == 1);
    CHECK(whole[0].interval.level == 0);
}

TEST_CASE("rational arithmetic stays exact") {
    CHECK(Rational(1, 3) + Rational(1, 6) == Rational(1, 2));
    CHECK(Rational(3, 8) * Rational(4, 9) == Rational(1, 6));
    CHECK(Rational::power_of(2, -3) == Rational(1, 8));
    CHECK(Rational(7, 8) > Rational(6, 7));
    CHECK_THROWS_AS(Rational(1, 0), std::domain_error);
}
