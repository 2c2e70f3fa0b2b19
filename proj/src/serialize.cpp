#include "walshkit/serialize.hpp"

#include <fstream>

namespace walshkit {

namespace {

Json complex_to_json(const Complex& c) { return Json::array({c.real(), c.imag()}); }

Complex complex_from_json(const Json& j) {
    return Complex(j.at(0).get<double>(), j.at(1).get<double>());
}

Json interval_to_json(const AdicInterval& iv) {
    return Json{{"level", iv.level}, {"index", iv.index}};
}

AdicInterval interval_from_json(int order, const Json& j) {
    return AdicInterval(order, j.at("level").get<int>(), j.at("index").get<std::int64_t>());
}

} // namespace

Json to_json(const StepFunction& f) {
    Json values = Json::array();
    for (const Complex& v : f.values()) values.push_back(complex_to_json(v));
    return Json{{"order", f.order()}, {"level", f.level()}, {"values", std::move(values)}};
}

StepFunction step_function_from_json(const Json& j) {
    std::vector<Complex> values;
    for (const Json& v : j.at("values")) values.push_back(complex_from_json(v));
    return StepFunction(j.at("order").get<int>(), j.at("level").get<int>(), std::move(values));
}

Json to_json(const CellSet& s) {
    return Json{{"order", s.order}, {"level", s.level}, {"members", s.members}};
}

CellSet cell_set_from_json(const Json& j) {
    return CellSet(j.at("order").get<int>(), j.at("level").get<int>(),
                   j.at("members").get<std::vector<std::int64_t>>());
}

Json to_json(const Spectrum& s) {
    Json coeffs = Json::array();
    for (const auto& [n, c] : s.coefficients())
        coeffs.push_back(Json{{"n", n}, {"re", c.real()}, {"im", c.imag()}});
    return Json{{"order", s.order()},
                {"source_level", s.source_level()},
                {"coefficients", std::move(coeffs)}};
}

Spectrum spectrum_from_json(const Json& j) {
    Spectrum s(j.at("order").get<int>(), j.at("source_level").get<int>());
    for (const Json& c : j.at("coefficients"))
        s.set(c.at("n").get<std::int64_t>(),
              Complex(c.at("re").get<double>(), c.at("im").get<double>()));
    return s;
}

Json to_json(const WalshPolynomial& p) {
    Json terms = Json::array();
    for (const WalshTerm& t : p.terms)
        terms.push_back(Json::array({t.index, t.coefficient.real(), t.coefficient.imag()}));
    return Json{{"order", p.order}, {"terms", std::move(terms)}};
}

WalshPolynomial polynomial_from_json(const Json& j) {
    WalshPolynomial p{j.at("order").get<int>(), {}};
    for (const Json& t : j.at("terms"))
        p.append(t.at(0).get<std::int64_t>(),
                 Complex(t.at(1).get<double>(), t.at(2).get<double>()));
    return p;
}

Json to_json(const Certificate& c) {
    Json entries = Json::array();
    for (const CertificateEntry& e : c.entries)
        entries.push_back(Json{{"name", e.name},
                               {"claimed_bound", e.claimed},
                               {"achieved_value", e.achieved},
                               {"pass", e.pass},
                               {"exact", e.exact},
                               {"required", e.required}});
    return Json{{"conclusions", std::move(entries)}};
}

Certificate certificate_from_json(const Json& j) {
    Certificate c;
    for (const Json& e : j.at("conclusions"))
        c.entries.push_back(CertificateEntry{e.at("name").get<std::string>(),
                                             e.at("claimed_bound").get<double>(),
                                             e.at("achieved_value").get<double>(),
                                             e.at("pass").get<bool>(),
                                             e.value("exact", false),
                                             e.value("required", true)});
    return c;
}

Json to_json(const VerifyReport& r) {
    Json items = Json::array();
    for (const VerifyItem& i : r.items)
        items.push_back(Json{{"name", i.name},
                             {"pass", i.pass},
                             {"slack", i.slack},
                             {"detail", i.detail}});
    return Json{{"items", std::move(items)}, {"all_pass", r.all_pass()}};
}

// ---------------------------------------------------------------------------

namespace {

Json lemma1_params_to_json(const Lemma1Params& p) {
    return Json{{"order", p.order},
                {"gamma", complex_to_json(p.gamma)},
                {"n0", p.n0},
                {"eps", p.eps},
                {"interval", interval_to_json(p.interval)}};
}

Lemma1Params lemma1_params_from_json(const Json& j) {
    const int order = j.at("order").get<int>();
    return Lemma1Params{order, complex_from_json(j.at("gamma")),
                        j.at("n0").get<std::int64_t>(), j.at("eps").get<double>(),
                        interval_from_json(order, j.at("interval"))};
}

} // namespace

Json to_json(const Lemma1Result& r) {
    return Json{{"kind", "lemma1"},
                {"params", lemma1_params_to_json(r.params)},
                {"derived",
                 Json{{"nu0", r.nu0},
                      {"s", r.s},
                      {"last_index", r.last_index},
                      {"working_level", r.working_level},
                      {"coeff_magnitude", r.coeff_magnitude},
                      {"kept_measure", r.kept_measure.str()},
                      {"patch_l1", r.patch_l1},
                      {"prefix_max_l1", r.prefix_max_l1}}},
                {"polynomial", to_json(r.polynomial)},
                {"certificate", to_json(r.certificate)}};
}

Lemma1Result lemma1_from_json(const Json& j, int max_level) {
    const Lemma1Params params = lemma1_params_from_json(j.at("params"));
    if (max_level <= 0) max_level = default_max_level(params.order);
    PatchGeometry geo = build_patch_geometry(params, max_level);
    const Json& d = j.at("derived");
    const Rational kept_measure = geo.kept.measure();
    return Lemma1Result{params,
                        geo.nu0,
                        geo.s,
                        geo.last_index,
                        geo.working_level,
                        d.at("coeff_magnitude").get<double>(),
                        polynomial_from_json(j.at("polynomial")),
                        std::move(geo.kept),
                        std::move(geo.patch),
                        kept_measure,
                        d.at("patch_l1").get<double>(),
                        d.at("prefix_max_l1").get<double>(),
                        certificate_from_json(j.at("certificate"))};
}

Json to_json(const Lemma2Result& r) {
    Json blocks = Json::array();
    for (const Lemma1Result& b : r.blocks) blocks.push_back(to_json(b));
    Json step_blocks = Json::array();
    for (const StepBlock& b : r.step_approx.blocks)
        step_blocks.push_back(Json{{"interval", interval_to_json(b.interval)},
                                   {"gamma", complex_to_json(b.gamma)}});
    return Json{{"kind", "lemma2"},
                {"order", r.input.order()},
                {"n0", r.n0},
                {"eps", r.eps},
                {"input", to_json(r.input)},
                {"blocks", std::move(blocks)},
                {"step_approx",
                 Json{{"blocks", std::move(step_blocks)},
                      {"residual_l1", r.step_approx.residual_l1},
                      {"residual_budget", r.step_approx.residual_budget},
                      {"planned_final_level", r.step_approx.planned_final_level},
                      {"zero_run_level", r.step_approx.zero_run_level},
                      {"certificate", to_json(r.step_approx.certificate)}}},
                {"polynomial", to_json(r.polynomial)},
                {"derived",
                 Json{{"working_level", r.working_level},
                      {"input_l1", r.input_l1},
                      {"g_l1", r.g_l1},
                      {"prefix_max_l1", r.prefix_max_l1}}},
                {"certificate", to_json(r.certificate)}};
}

Lemma2Result lemma2_from_json(const Json& j, int max_level) {
    const int order = j.at("order").get<int>();
    if (max_level <= 0) max_level = default_max_level(order);
    StepFunction input = step_function_from_json(j.at("input"));

    std::vector<Lemma1Result> blocks;
    for (const Json& b : j.at("blocks")) blocks.push_back(lemma1_from_json(b, max_level));

    StepApproximation sa{{}, 0.0, 0.0, 0, 0, {}};
    const Json& sj = j.at("step_approx");
    for (const Json& b : sj.at("blocks"))
        sa.blocks.push_back(StepBlock{interval_from_json(order, b.at("interval")),
                                      complex_from_json(b.at("gamma"))});
    sa.residual_l1 = sj.at("residual_l1").get<double>();
    sa.residual_budget = sj.at("residual_budget").get<double>();
    sa.planned_final_level = sj.at("planned_final_level").get<int>();
    sa.zero_run_level = sj.at("zero_run_level").get<int>();
    sa.certificate = certificate_from_json(sj.at("certificate"));

    CorrectorAssembly assembly = assemble_corrector(input, sa.blocks, blocks);
    const Json& d = j.at("derived");
    return Lemma2Result{std::move(input),
                        std::move(assembly.g),
                        std::move(assembly.kept),
                        polynomial_from_json(j.at("polynomial")),
                        std::move(blocks),
                        std::move(sa),
                        j.at("n0").get<std::int64_t>(),
                        j.at("eps").get<double>(),
                        assembly.working_level,
                        d.at("input_l1").get<double>(),
                        d.at("g_l1").get<double>(),
                        d.at("prefix_max_l1").get<double>(),
                        certificate_from_json(j.at("certificate"))};
}

Json to_json(const CorrectionResult& r) {
    Json trace = Json::array();
    for (const DriverTraceEntry& t : r.trace)
        trace.push_back(Json{{"iteration", t.iteration},
                             {"eps_step", t.eps_step},
                             {"eps_step_raw", t.eps_step_raw},
                             {"pick_residual", t.pick_residual},
                             {"block_first", t.block_first},
                             {"block_last", t.block_last},
                             {"block_magnitude", t.block_magnitude},
                             {"partial_sum_sup_l1", t.partial_sum_sup_l1}});
    return Json{{"kind", "correction"},
                {"input", to_json(r.input)},
                {"g", to_json(r.g)},
                {"kept_set", to_json(r.kept_set)},
                {"series", to_json(r.series)},
                {"trace", std::move(trace)},
                {"profile", r.profile == BudgetProfile::Verbatim ? "verbatim" : "relaxed"},
                {"eps", r.eps},
                {"tol", r.tol},
                {"derived",
                 Json{{"input_l1", r.input_l1},
                      {"g_l1", r.g_l1},
                      {"kept_side_residual", r.kept_side_residual},
                      {"iterations", r.iterations},
                      {"converged", r.converged},
                      {"prefix_sup_l1", r.prefix_sup_l1}}},
                {"certificate", to_json(r.certificate)}};
}

CorrectionResult correction_from_json(const Json& j, int) {
    const Json& d = j.at("derived");
    return CorrectionResult{step_function_from_json(j.at("input")),
                            step_function_from_json(j.at("g")),
                            cell_set_from_json(j.at("kept_set")),
                            polynomial_from_json(j.at("series")),
                            [&] {
                                std::vector<DriverTraceEntry> trace;
                                for (const Json& t : j.at("trace"))
                                    trace.push_back(DriverTraceEntry{
                                        t.at("iteration").get<int>(),
                                        t.at("eps_step").get<double>(),
                                        t.at("eps_step_raw").get<double>(),
                                        t.at("pick_residual").get<double>(),
                                        t.at("block_first").get<std::int64_t>(),
                                        t.at("block_last").get<std::int64_t>(),
                                        t.at("block_magnitude").get<double>(),
                                        t.at("partial_sum_sup_l1").get<double>()});
                                return trace;
                            }(),
                            j.at("profile").get<std::string>() == "verbatim"
                                ? BudgetProfile::Verbatim
                                : BudgetProfile::Relaxed,
                            j.at("eps").get<double>(),
                            j.at("tol").get<double>(),
                            d.at("input_l1").get<double>(),
                            d.at("g_l1").get<double>(),
                            d.at("kept_side_residual").get<double>(),
                            d.at("iterations").get<int>(),
                            d.at("converged").get<bool>(),
                            d.at("prefix_sup_l1").get<double>(),
                            certificate_from_json(j.at("certificate"))};
}

std::string curve_to_csv(const std::vector<GreedyCurvePoint>& curve) {
    std::string out = "m,error_p,partial_sum_norm_1\n";
    char line[96];
    for (const GreedyCurvePoint& p : curve) {
        std::snprintf(line, sizeof(line), "%lld,%.17g,%.17g\n", (long long)p.m, p.error,
                      p.partial_sum_norm);
        out += line;
    }
    return out;
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    Json j;
    in >> j;
    return j;
}

} // namespace walshkit
