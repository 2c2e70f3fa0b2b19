#include <doctest.h>

#include <random>

#include "walshkit/correction.hpp"
#include "walshkit/greedy.hpp"

using namespace walshkit;

TEST_CASE("kernel depth and floor log use exact integer comparisons") {
    CHECK(kernel_depth(2, 0.4) == 2);
    CHECK(kernel_depth(2, 0.25) == 3);   // boundary: 2^-2 is not < 0.25
    CHECK(kernel_depth(2, 0.2500001) == 2);
    CHECK(kernel_depth(3, 0.4) == 1);
    CHECK(kernel_depth(5, 0.05) == 2);
    CHECK_THROWS_AS(kernel_depth(2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(kernel_depth(2, 1.0), std::invalid_argument);

    CHECK(floor_log(2, 2) == 1);
    CHECK(floor_log(2, 50) == 5);
    CHECK(floor_log(3, 50) == 3);
    CHECK(floor_log(5, 4) == 0);
}

TEST_CASE("worked single-interval construction: a=2, gamma=1, eps=0.4, first half") {
    const Lemma1Result r =
        lemma1_construct(Complex(1.0), 2, 0.4, AdicInterval(2, 1, 1), 20);

    CHECK(r.nu0 == 2);
    CHECK(r.s == 2);
    CHECK(r.last_index == 13);
    CHECK(r.coeff_magnitude == 0.5);

    std::vector<std::int64_t> indices;
    for (const WalshTerm& t : r.polynomial.terms) {
        indices.push_back(t.index);
        CHECK(std::abs(std::abs(t.coefficient) - 0.5) < 1e-12);
    }
    CHECK(indices == std::vector<std::int64_t>{4, 5, 8, 9, 12, 13});

    CHECK(r.kept_measure == Rational(3, 8));
    CHECK(r.patch_l1 == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(r.prefix_max_l1 < 2.0 * std::sqrt(1.25));
    CHECK(r.certificate.all_pass());

    // Exact proof-internal values: |E| = a^-m (1 - a^-nu0), integral
    // |P| = 2 |gamma| |Delta| (1 - a^-nu0).
    CHECK(r.kept_measure == Rational(1, 2) * (Rational(1) - Rational(1, 4)));
}

TEST_CASE("patch matches the defining product of indicator and dilated kernel") {
    for (int a : {2, 3}) {
        const AdicInterval iv(a, 1, a == 2 ? 2 : 3);
        const Lemma1Result r = lemma1_construct(Complex(1.5, -0.5), 3, 0.3, iv, 20);
        const StepFunction chi = indicator(iv, r.working_level);
        const StepFunction kern =
            dilate(menshov_kernel(AdicInterval(a, r.nu0, 1), r.nu0), r.s, 25);
        for (std::int64_t c = 0; c < r.patch.cells(); ++c) {
            const Complex expect =
                Complex(1.5, -0.5) * chi.value(c) * kern.value(c);
            CHECK(r.patch.value(c) == expect);
        }
    }
}

TEST_CASE("single-interval construction rejects bad parameters distinctly") {
    const AdicInterval iv(2, 1, 1);
    CHECK_THROWS_WITH_AS(lemma1_construct(Complex(0.0), 2, 0.4, iv, 20),
                         "gamma must be nonzero", std::invalid_argument);
    CHECK_THROWS_AS(lemma1_construct(Complex(1.0), 2, 1.4, iv, 20), std::invalid_argument);
    CHECK_THROWS_AS(lemma1_construct(Complex(1.0), 1, 0.4, iv, 20), std::invalid_argument);
    CHECK_THROWS_AS(lemma1_construct(Complex(1.0), 1 << 20, 0.01, iv, 20), ResolutionError);
}

TEST_CASE("patch vanishes off the interval for random draws") {
    std::mt19937_64 rng(2024);
    for (int draw = 0; draw < 12; ++draw) {
        const int a = std::uniform_int_distribution<int>(0, 1)(rng) ? 2 : 3;
        const int m = std::uniform_int_distribution<int>(1, 2)(rng);
        const std::int64_t k =
            std::uniform_int_distribution<std::int64_t>(1, checked_ipow(a, m))(rng);
        const double eps = std::uniform_real_distribution<double>(0.1, 0.9)(rng);
        const double mag = std::uniform_real_distribution<double>(0.1, 4.0)(rng);
        const Lemma1Result r =
            lemma1_construct(Complex(mag), 2, eps, AdicInterval(a, m, k), 20);
        const std::int64_t first = r.params.interval.first_cell(r.working_level);
        const std::int64_t count = r.params.interval.cell_count(r.working_level);
        for (std::int64_t c = 0; c < r.patch.cells(); ++c)
            if (c < first || c >= first + count) CHECK(r.patch.value(c) == Complex(0.0));
        CHECK(r.certificate.all_pass());
    }
}

TEST_CASE("scaling gamma scales the coefficients and nothing else") {
    const AdicInterval iv(2, 1, 1);
    const Lemma1Result base = lemma1_construct(Complex(1.0), 2, 0.4, iv, 20);
    const Lemma1Result scaled = lemma1_construct(Complex(-2.0), 2, 0.4, iv, 20);
    REQUIRE(base.polynomial.terms.size() == scaled.polynomial.terms.size());
    CHECK(base.kept_set.members == scaled.kept_set.members);
    for (size_t i = 0; i < base.polynomial.terms.size(); ++i) {
        CHECK(base.polynomial.terms[i].index == scaled.polynomial.terms[i].index);
        CHECK(std::abs(scaled.polynomial.terms[i].coefficient -
                       Complex(-2.0) * base.polynomial.terms[i].coefficient) < 1e-12);
    }
    CHECK(scaled.patch_l1 == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("step approximation tiles, orders and respects budgets") {
    SUBCASE("single-interval input splits into compliant pieces") {
        const StepFunction f(2, 1, {Complex(2.0), Complex(0.0)});
        const StepApproximation sa = step_approximate(f, 0.3, 1.0, {});
        CHECK(sa.certificate.all_pass());
        double prev = 1e300;
        Rational cover(0);
        for (const StepBlock& b : sa.blocks) {
            CHECK(b.product() < 0.3);
            CHECK(b.product() <= prev);
            prev = b.product();
            cover = cover + b.interval.measure();
        }
        CHECK(cover == Rational(1));
        CHECK(sa.residual_l1 < sa.residual_budget);
    }
    SUBCASE("constant input") {
        const StepFunction f(2, 1, {Complex(1.0), Complex(1.0)});
        const StepApproximation sa = step_approximate(f, 0.5, 1.0, {});
        CHECK(sa.certificate.all_pass());
        CHECK(sa.residual_l1 == 0.0);  // no zero runs, values exact
        for (const StepBlock& b : sa.blocks) CHECK(std::abs(b.gamma) == 1.0);
    }
    SUBCASE("zero-norm input is rejected") {
        const StepFunction f = StepFunction::zero(2, 1);
        CHECK_THROWS_AS(step_approximate(f, 0.3, 0.0, {}), std::invalid_argument);
    }
}

TEST_CASE("whole-function corrector on the worked two-cell input") {
    const StepFunction f(2, 1, {Complex(2.0), Complex(0.0)});
    const Lemma2Result r = lemma2_construct(f, 2, 0.3);
    CHECK(r.certificate.all_pass());
    CHECK(r.kept_set.measure().to_double() > 0.7);
    // ||P - g|| equals the step-approximation residual exactly.
    const CertificateEntry* close = r.certificate.find("series_close_to_g");
    REQUIRE(close != nullptr);
    CHECK(close->achieved == doctest::Approx(r.step_approx.residual_l1).epsilon(1e-10));
    // Coefficient magnitudes across blocks equal the block products.
    size_t at = 0;
    for (size_t b = 0; b < r.blocks.size(); ++b) {
        const double expect = r.blocks[b].coeff_magnitude;
        for (size_t i = 0; i < r.blocks[b].polynomial.terms.size(); ++i, ++at)
            CHECK(std::abs(std::abs(r.polynomial.terms[at].coefficient) - expect) < 1e-12);
    }
}

TEST_CASE("corrector rejects zero-norm input") {
    CHECK_THROWS_AS(lemma2_construct(StepFunction::zero(2, 2), 2, 0.3),
                    std::invalid_argument);
}

TEST_CASE("driver terminates immediately on a constant") {
    const StepFunction f = StepFunction::constant(2, Complex(1.0)).refined(2);
    DriverConfig cfg;
    cfg.eps = 0.5;
    cfg.tol = 1e-6;
    const CorrectionResult r = correct_function(f, cfg);
    CHECK(r.iterations == 1);
    CHECK(r.converged);
    CHECK(r.certificate.all_pass());
    CHECK(disagreement_measure(r.input, r.g, 0.0).measure.to_double() < 0.5);
    CHECK(r.prefix_sup_l1 <= 12.0 * r.input_l1);
}

TEST_CASE("verifier accepts untampered results and flags tampering") {
    const Lemma1Result r = lemma1_construct(Complex(1.0), 2, 0.4, AdicInterval(2, 1, 1), 20);
    CHECK(verify_certificate(r).all_pass());

    Lemma1Result tampered = r;
    tampered.polynomial.terms[2].coefficient = Complex(0.0, 0.0);
    const VerifyReport report = verify_certificate(tampered);
    CHECK_FALSE(report.all_pass());
    bool reconstruction_failed = false;
    for (const VerifyItem& item : report.items)
        if (!item.pass &&
            (item.name == "equals_gamma_on_kept" || item.name == "coefficients_flat"))
            reconstruction_failed = true;
    CHECK(reconstruction_failed);
}

TEST_CASE("verifier passes the two-cell corrector end to end") {
    const StepFunction f(2, 1, {Complex(2.0), Complex(0.0)});
    const Lemma2Result r = lemma2_construct(f, 2, 0.3);
    CHECK(verify_certificate(r).all_pass());
}

TEST_CASE("universal series skeleton over the first dictionary entries") {
    UniversalConfig cfg;
    cfg.eps = 0.8;
    cfg.n_max = 2;
    cfg.order = 2;
    const UniversalSeries u = universal_series(cfg);
    CHECK(u.skipped == std::vector<std::int64_t>{1});  // the zero function
    REQUIRE(u.blocks.size() == 1);
    CHECK(u.certificate.all_pass());
    CHECK(u.kept_truncated.measure().to_double() > 1.0 - 0.8);
    CHECK_THROWS_AS(universal_series(UniversalConfig{0.5, 0, 2}), std::invalid_argument);
}
