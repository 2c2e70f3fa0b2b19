#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "walshkit/greedy.hpp"
#include "walshkit/serialize.hpp"

using namespace walshkit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCertificateFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResolution = 3;

std::string out_path(const std::string& path) {
    // Environment override for the output directory only.
    const char* dir = std::getenv("WALSHKIT_OUTDIR");
    if (dir == nullptr || path.empty() || path.front() == '/') return path;
    return std::string(dir) + "/" + path;
}

Complex parse_complex(const std::string& text) {
    const auto comma = text.find(',');
    if (comma == std::string::npos) return Complex(std::stod(text), 0.0);
    return Complex(std::stod(text.substr(0, comma)), std::stod(text.substr(comma + 1)));
}

AdicInterval parse_interval(int order, const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("interval must be given as m:k");
    return AdicInterval(order, std::stoi(text.substr(0, colon)),
                        std::stoll(text.substr(colon + 1)));
}

StepFunction generate(const std::string& kind, int order, int level, double shift, double cut,
                      std::uint64_t seed) {
    const std::int64_t cells = checked_ipow(order, level);
    std::vector<Complex> v(static_cast<size_t>(cells));
    if (kind == "linear") {
        for (std::int64_t c = 0; c < cells; ++c)
            v[size_t(c)] = Complex((double(c) + 0.5) / double(cells) - shift);
    } else if (kind == "sign") {
        for (std::int64_t c = 0; c < cells; ++c) {
            const double lo = double(c) / double(cells);
            const double hi = double(c + 1) / double(cells);
            if (hi <= cut)
                v[size_t(c)] = Complex(-1.0);
            else if (lo >= cut)
                v[size_t(c)] = Complex(1.0);
            else
                v[size_t(c)] = Complex(((cut - lo) * -1.0 + (hi - cut)) / (hi - lo));
        }
    } else if (kind == "rand") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (Complex& x : v) x = Complex(dist(rng));
    } else {
        throw std::invalid_argument("unknown generator: " + kind);
    }
    return StepFunction(order, level, std::move(v));
}

StepFunction load_or_generate(const std::string& in, const std::string& gen, int order,
                              int level, double shift, double cut, std::uint64_t seed) {
    if (!in.empty()) return step_function_from_json(read_json_file(in));
    if (gen.empty())
        throw std::invalid_argument("either --in or --gen is required");
    return generate(gen, order, level, shift, cut, seed);
}

int run_transform(const std::string& in, const std::string& out, const std::string& method,
                  bool inverse, int level) {
    const TransformMethod m =
        method == "naive" ? TransformMethod::Naive : TransformMethod::Fast;
    if (inverse) {
        const Spectrum s = spectrum_from_json(read_json_file(in));
        const int target = level > 0 ? level : s.source_level();
        write_json_file(out_path(out), to_json(synthesize(s, target)));
    } else {
        const StepFunction f = step_function_from_json(read_json_file(in));
        write_json_file(out_path(out), to_json(analyze(f, m)));
    }
    return kExitOk;
}

int run_verify(const std::string& in) {
    const Json j = read_json_file(in);
    const std::string kind = j.at("kind").get<std::string>();
    VerifyReport report;
    if (kind == "lemma1")
        report = verify_certificate(lemma1_from_json(j));
    else if (kind == "lemma2")
        report = verify_certificate(lemma2_from_json(j));
    else if (kind == "correction")
        report = verify_certificate(correction_from_json(j));
    else
        throw std::invalid_argument("unknown certificate kind: " + kind);
    for (const VerifyItem& item : report.items)
        std::cout << (item.pass ? "pass  " : "FAIL  ") << item.name
                  << " (slack " << item.slack << ")\n";
    std::cout << (report.all_pass() ? "verified" : "verification failed") << "\n";
    return report.all_pass() ? kExitOk : kExitCertificateFailure;
}

int run_bench(int order, int level) {
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<Complex> v(static_cast<size_t>(checked_ipow(order, level)));
    for (Complex& x : v) x = Complex(dist(rng), dist(rng));
    const StepFunction f(order, level, std::move(v));

    const auto t0 = std::chrono::steady_clock::now();
    const auto coeffs = analyze_dense(f, TransformMethod::Fast);
    const auto t1 = std::chrono::steady_clock::now();
    const StepFunction back = synthesize_dense(order, level, coeffs);
    const auto t2 = std::chrono::steady_clock::now();

    double err = 0.0;
    for (std::int64_t c = 0; c < f.cells(); ++c)
        err = std::max(err, std::abs(back.value(c) - f.value(c)));
    const double ms_a = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const double ms_s = std::chrono::duration<double, std::milli>(t2 - t1).count();
    std::cout << "analyze  order=" << order << " level=" << level << " cells=" << f.cells()
              << ": " << ms_a << " ms\n";
    std::cout << "synthesize: " << ms_s << " ms, round-trip max error " << err << "\n";
    return kExitOk;
}

// Compact in-binary property suite; exits nonzero on any failure.
int run_selftest(std::uint64_t seed) {
    int failures = 0;
    auto suite = [&](const std::string& name, bool ok) {
        std::cout << (ok ? "pass  " : "FAIL  ") << name << "\n";
        if (!ok) ++failures;
    };
    std::mt19937_64 rng(seed);

    {
        bool ok = true;
        for (int a : {2, 3, 4, 5}) {
            const int level = 2;
            const std::int64_t cells = checked_ipow(a, level);
            for (std::int64_t d = 0; d < cells && ok; ++d) {
                const auto row = walsh_on_grid(a, d, level);
                Complex mean(0.0);
                for (const Complex& x : row) mean += x;
                mean /= double(cells);
                ok = std::abs(mean - Complex(d == 0 ? 1.0 : 0.0)) < 1e-12;
            }
        }
        suite("orthonormality (small grids)", ok);
    }
    {
        bool ok = true;
        for (int a : {2, 3, 5}) {
            std::vector<Complex> v(static_cast<size_t>(checked_ipow(a, 3)));
            std::uniform_real_distribution<double> dist(-1.0, 1.0);
            for (Complex& x : v) x = Complex(dist(rng), dist(rng));
            const StepFunction f(a, 3, std::move(v));
            const auto fast = analyze_dense(f, TransformMethod::Fast);
            const auto naive = analyze_dense(f, TransformMethod::Naive);
            for (size_t n = 0; n < fast.size(); ++n)
                ok = ok && std::abs(fast[n] - naive[n]) < 1e-9;
            const StepFunction back = synthesize_dense(a, 3, fast);
            for (std::int64_t c = 0; c < f.cells(); ++c)
                ok = ok && std::abs(back.value(c) - f.value(c)) < 1e-10;
        }
        suite("fast/naive agreement and round trip", ok);
    }
    {
        bool ok = true;
        for (int a : {2, 3}) {
            for (int s = 1; s <= 2 && ok; ++s) {
                const std::int64_t as = checked_ipow(a, s);
                const std::int64_t cells = checked_ipow(a, 2 * s + 1);
                for (std::int64_t i = 0; i < as && ok; ++i)
                    for (std::int64_t j = 0; j < as && ok; ++j)
                        for (std::int64_t t = 0; t < cells; t += 3) {
                            const AdicPoint x = AdicPoint::from_rational(t, cells);
                            const AdicPoint xs =
                                AdicPoint::from_rational((t * as) % cells, cells);
                            ok = walsh_eval(a, i, x) * walsh_eval(a, j, xs) ==
                                 walsh_eval(a, j * as + i, x);
                            if (!ok) break;
                        }
            }
        }
        suite("index multiplicativity (exact exponents)", ok);
    }
    {
        const Lemma1Result r =
            lemma1_construct(Complex(1.0), 2, 0.4, AdicInterval(2, 1, 1), 21);
        const bool ok = r.nu0 == 2 && r.s == 2 && r.last_index == 13 &&
                        r.kept_measure == Rational(3, 8) && r.certificate.all_pass() &&
                        verify_certificate(r).all_pass();
        suite("single-interval polynomial (worked instance)", ok);
    }
    {
        const StepFunction f(2, 1, {Complex(2.0), Complex(0.0)});
        const Lemma2Result r = lemma2_construct(f, 2, 0.3);
        suite("whole-function corrector (two-cell input)",
              r.certificate.all_pass() && verify_certificate(r).all_pass());
    }
    {
        DriverConfig cfg;
        cfg.eps = 0.5;
        cfg.tol = 1e-6;
        const CorrectionResult r =
            correct_function(StepFunction::constant(2, Complex(1.0)).refined(2), cfg);
        suite("correction driver (constant input)",
              r.converged && r.certificate.all_pass() && verify_certificate(r).all_pass());
    }
    std::cout << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? kExitOk : kExitCertificateFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"generalized Walsh transforms, greedy approximation and L1 correction"};
    app.require_subcommand(1);

    // transform
    auto* transform = app.add_subcommand("transform", "analyze or synthesize a step function");
    std::string t_in, t_out, t_method = "fast";
    bool t_inverse = false;
    int t_order = 0, t_level = 0;
    transform->add_option("--in", t_in)->required();
    transform->add_option("--out", t_out)->required();
    transform->add_option("--method", t_method)->check(CLI::IsMember({"fast", "naive"}));
    transform->add_flag("--inverse", t_inverse);
    transform->add_option("--order", t_order);
    transform->add_option("--level", t_level);

    // greedy
    auto* greedy = app.add_subcommand("greedy", "emit a greedy error curve as CSV");
    std::string g_in, g_out;
    std::int64_t g_mmax = -1;
    int g_p = 1;
    greedy->add_option("--in", g_in)->required();
    greedy->add_option("--out", g_out)->required();
    greedy->add_option("--m-max", g_mmax);
    greedy->add_option("--p", g_p)->check(CLI::IsMember({1, 2}));

    // lemma1
    auto* lemma1 = app.add_subcommand("lemma1", "single-interval polynomial certificate");
    std::string l1_gamma = "1", l1_interval = "1:1", l1_out;
    int l1_order = 2, l1_maxlevel = 0;
    std::int64_t l1_n0 = 2;
    double l1_eps = 0.4;
    lemma1->add_option("--order", l1_order);
    lemma1->add_option("--gamma", l1_gamma);
    lemma1->add_option("--n0", l1_n0);
    lemma1->add_option("--eps", l1_eps);
    lemma1->add_option("--interval", l1_interval);
    lemma1->add_option("--max-level", l1_maxlevel);
    lemma1->add_option("--out", l1_out)->required();

    // lemma2
    auto* lemma2 = app.add_subcommand("lemma2", "whole-function corrector certificate");
    std::string l2_in, l2_gen, l2_out;
    int l2_order = 2, l2_level = 3, l2_maxlevel = 0;
    std::int64_t l2_n0 = 2;
    double l2_eps = 0.3, l2_shift = 0.0, l2_cut = 1.0 / 3.0;
    std::uint64_t l2_seed = 1;
    lemma2->add_option("--in", l2_in);
    lemma2->add_option("--gen", l2_gen)->check(CLI::IsMember({"linear", "sign", "rand"}));
    lemma2->add_option("--order", l2_order);
    lemma2->add_option("--level", l2_level);
    lemma2->add_option("--shift", l2_shift);
    lemma2->add_option("--cut", l2_cut);
    lemma2->add_option("--seed", l2_seed);
    lemma2->add_option("--n0", l2_n0);
    lemma2->add_option("--eps", l2_eps);
    lemma2->add_option("--max-level", l2_maxlevel);
    lemma2->add_option("--out", l2_out)->required();

    // correct
    auto* correct = app.add_subcommand("correct", "run the correction driver");
    std::string c_in, c_gen, c_out, c_curve, c_profile = "verbatim";
    int c_order = 2, c_level = 2, c_qmax = 8, c_maxlevel = 0;
    double c_eps = 0.25, c_tol = 1e-3, c_shift = 0.0, c_cut = 1.0 / 3.0;
    std::uint64_t c_seed = 1;
    bool c_dict = false;
    correct->add_option("--in", c_in);
    correct->add_option("--gen", c_gen)->check(CLI::IsMember({"linear", "sign", "rand"}));
    correct->add_option("--order", c_order);
    correct->add_option("--level", c_level);
    correct->add_option("--shift", c_shift);
    correct->add_option("--cut", c_cut);
    correct->add_option("--seed", c_seed);
    correct->add_option("--eps", c_eps);
    correct->add_option("--tol", c_tol);
    correct->add_option("--qmax", c_qmax);
    correct->add_option("--profile", c_profile)->check(CLI::IsMember({"verbatim", "relaxed"}));
    correct->add_flag("--dictionary", c_dict);
    correct->add_option("--max-level", c_maxlevel);
    correct->add_option("--out", c_out)->required();
    correct->add_option("--curve", c_curve);

    // verify
    auto* verify = app.add_subcommand("verify", "re-derive a certificate from its file");
    std::string v_in;
    verify->add_option("--in", v_in)->required();

    // bench
    auto* bench = app.add_subcommand("bench", "time the fast transform");
    int b_order = 2, b_level = 20;
    bench->add_option("--order", b_order);
    bench->add_option("--level", b_level);

    // selftest
    auto* selftest = app.add_subcommand("selftest", "run the built-in property suites");
    std::uint64_t s_seed = 1;
    selftest->add_option("--seed", s_seed);

    try {
        app.parse(argc, argv);

        if (transform->parsed()) {
            if (t_order > 0 && !t_inverse) {
                const StepFunction f = step_function_from_json(read_json_file(t_in));
                if (f.order() != t_order)
                    throw std::invalid_argument("--order disagrees with the input file");
            }
            return run_transform(t_in, t_out, t_method, t_inverse, t_level);
        }
        if (greedy->parsed()) {
            const StepFunction f = step_function_from_json(read_json_file(g_in));
            const std::int64_t mmax = g_mmax >= 0 ? g_mmax : f.cells();
            const auto curve =
                greedy_error_curve(f, mmax, g_p == 1 ? NormKind::L1 : NormKind::L2);
            std::ofstream out(out_path(g_out));
            if (!out) throw std::runtime_error("cannot open " + g_out);
            out << curve_to_csv(curve);
            return kExitOk;
        }
        if (lemma1->parsed()) {
            const Lemma1Result r =
                lemma1_construct(parse_complex(l1_gamma), l1_n0, l1_eps,
                                 parse_interval(l1_order, l1_interval), l1_maxlevel);
            write_json_file(out_path(l1_out), to_json(r));
            std::cout << "nu0=" << r.nu0 << " s=" << r.s << " N=" << r.last_index
                      << " terms=" << r.polynomial.terms.size() << " |E|="
                      << r.kept_measure.str() << "\n";
            return r.certificate.all_pass() ? kExitOk : kExitCertificateFailure;
        }
        if (lemma2->parsed()) {
            const StepFunction f =
                load_or_generate(l2_in, l2_gen, l2_order, l2_level, l2_shift, l2_cut, l2_seed);
            CorrectionConfig cfg;
            cfg.n0 = l2_n0;
            cfg.max_level = l2_maxlevel;
            const Lemma2Result r = lemma2_construct(f, l2_n0, l2_eps, cfg);
            write_json_file(out_path(l2_out), to_json(r));
            std::cout << "blocks=" << r.blocks.size() << " terms="
                      << r.polynomial.terms.size() << " level=" << r.working_level << " |E|="
                      << r.kept_set.measure().str() << "\n";
            return r.certificate.all_pass() ? kExitOk : kExitCertificateFailure;
        }
        if (correct->parsed()) {
            const StepFunction f =
                load_or_generate(c_in, c_gen, c_order, c_level, c_shift, c_cut, c_seed);
            DriverConfig cfg;
            cfg.eps = c_eps;
            cfg.tol = c_tol;
            cfg.q_max = c_qmax;
            cfg.profile = c_profile == "relaxed" ? BudgetProfile::Relaxed
                                                 : BudgetProfile::Verbatim;
            cfg.dictionary_mode = c_dict;
            cfg.max_level = c_maxlevel;
            const CorrectionResult r = correct_function(f, cfg);
            write_json_file(out_path(c_out), to_json(r));
            if (!c_curve.empty()) {
                const auto curve = greedy_error_curve(
                    r.g, std::int64_t(r.series.terms.size()) + 8, NormKind::L1);
                std::ofstream out(out_path(c_curve));
                if (!out) throw std::runtime_error("cannot open " + c_curve);
                out << curve_to_csv(curve);
            }
            std::cout << "iterations=" << r.iterations << " terms="
                      << r.series.terms.size() << " level=" << r.g.level()
                      << " residual=" << r.kept_side_residual << "\n";
            return r.certificate.all_pass() ? kExitOk : kExitCertificateFailure;
        }
        if (verify->parsed()) return run_verify(v_in);
        if (bench->parsed()) return run_bench(b_order, b_level);
        if (selftest->parsed()) return run_selftest(s_seed);
        return kExitUsage;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    } catch (const ResolutionError& e) {
        std::cerr << "resolution error: " << e.what() << "\n";
        return kExitResolution;
    } catch (const FeasibilityError& e) {
        std::cerr << "feasibility error: " << e.what() << "\n";
        return kExitResolution;
    } catch (const PrecisionError& e) {
        std::cerr << "precision error: " << e.what() << "\n";
        return kExitResolution;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
