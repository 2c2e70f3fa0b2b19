#include "walshkit/correction.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "walshkit/greedy.hpp"

namespace walshkit {

void WalshPolynomial::append(std::int64_t index, Complex coefficient) {
    if (coefficient == Complex(0.0)) return;
    if (!terms.empty() && index <= terms.back().index)
        throw std::invalid_argument("WalshPolynomial: indices must be strictly increasing");
    terms.push_back(WalshTerm{index, coefficient});
}

StepFunction WalshPolynomial::synthesize_direct(int level) const {
    const std::int64_t cells = checked_ipow(order, level);
    std::vector<Complex> acc(size_t(cells), Complex(0.0));
    std::vector<Complex> row;
    for (const WalshTerm& t : terms) {
        walsh_on_grid_into(order, t.index, level, row);
        for (std::int64_t c = 0; c < cells; ++c) acc[size_t(c)] += t.coefficient * row[size_t(c)];
    }
    return StepFunction(order, level, std::move(acc));
}

double max_prefix_l1(int order, int level, const std::vector<WalshTerm>& terms) {
    const std::int64_t cells = checked_ipow(order, level);
    std::vector<Complex> acc(size_t(cells), Complex(0.0));
    std::vector<Complex> row;
    const double weight = 1.0 / double(cells);
    double best = 0.0;
    for (const WalshTerm& t : terms) {
        walsh_on_grid_into(order, t.index, level, row);
        double sum = 0.0;
        for (std::int64_t c = 0; c < cells; ++c) {
            const Complex v = acc[size_t(c)] + t.coefficient * row[size_t(c)];
            acc[size_t(c)] = v;
            sum += std::sqrt(v.real() * v.real() + v.imag() * v.imag());
        }
        best = std::max(best, sum * weight);
    }
    return best;
}

int kernel_depth(int order, double eps) {
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("eps must lie in (0,1)");
    // eps = m53 * 2^(e-53) exactly; a^v * eps > 1 iff a^v * m53 > 2^(53-e).
    int e = 0;
    const double mant = std::frexp(eps, &e);
    const auto m53 = std::uint64_t(std::ldexp(mant, 53));
    const int shift = 53 - e;
    if (shift >= 127)
        throw ResolutionError("eps is below any representable kernel depth");
    const unsigned __int128 rhs = (unsigned __int128)(1) << shift;
    unsigned __int128 lhs = m53;
    for (int v = 1; v <= 126; ++v) {
        if (lhs > rhs / (unsigned __int128)(order)) return v;  // next multiply would exceed
        lhs *= (unsigned __int128)(order);
        if (lhs > rhs) return v;
    }
    throw ResolutionError("eps is below any representable kernel depth");
}

int floor_log(int order, std::int64_t n) {
    if (n < 1) throw std::invalid_argument("floor_log: n must be >= 1");
    int t = 0;
    std::int64_t p = 1;
    while (p <= n / order) {
        p *= order;
        ++t;
    }
    return t;
}

// ---------------------------------------------------------------------------
// lemma1_construct

PatchGeometry build_patch_geometry(const Lemma1Params& params, int max_level) {
    const int order = params.order;
    const int m = params.interval.level;
    const int nu0 = kernel_depth(order, params.eps);
    const int s = floor_log(order, params.n0) + m;
    const int working = s + nu0;
    check_level(order, working, max_level);

    const std::int64_t cells = checked_ipow(order, working);
    const std::int64_t first = params.interval.first_cell(working);
    const std::int64_t count = params.interval.cell_count(working);
    const std::int64_t kernel_period = checked_ipow(order, nu0);
    const std::int64_t last_index =
        cells + checked_ipow(order, m) - checked_ipow(order, s) - 1;

    // P = gamma on the kept part of Delta, gamma * (1 - a^nu0) on the
    // removed 1/a^nu0 share, 0 elsewhere.
    const Complex deep = params.gamma * (1.0 - double(kernel_period));
    std::vector<Complex> pv(size_t(cells), Complex(0.0));
    std::vector<std::int64_t> kept;
    kept.reserve(size_t(count - count / kernel_period));
    for (std::int64_t c = first; c < first + count; ++c) {
        if ((c - first) % kernel_period == 0) {
            pv[size_t(c)] = deep;
        } else {
            pv[size_t(c)] = params.gamma;
            kept.push_back(c);
        }
    }
    return PatchGeometry{nu0,
                         s,
                         working,
                         last_index,
                         StepFunction(order, working, std::move(pv)),
                         CellSet(order, working, std::move(kept))};
}

Lemma1Result lemma1_construct(Complex gamma, std::int64_t n0, double eps,
                              const AdicInterval& interval, int max_level) {
    const int order = interval.order;
    if (gamma == Complex(0.0)) throw std::invalid_argument("gamma must be nonzero");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    if (n0 <= 1) throw std::invalid_argument("n0 must exceed 1");
    if (max_level <= 0) max_level = default_max_level(order);

    const Lemma1Params params{order, gamma, n0, eps, interval};
    PatchGeometry geo = build_patch_geometry(params, max_level);
    const int m = interval.level;
    const int nu0 = geo.nu0;
    const int s = geo.s;
    const int working = geo.working_level;
    const std::int64_t cells = geo.patch.cells();
    const std::int64_t first = interval.first_cell(working);
    const std::int64_t count = interval.cell_count(working);
    const std::int64_t kernel_period = checked_ipow(order, nu0);
    const std::int64_t last_index = geo.last_index;
    StepFunction patch = std::move(geo.patch);
    CellSet kept_set = std::move(geo.kept);

    const double interval_measure = 1.0 / double(checked_ipow(order, m));
    const double coeff_magnitude = std::abs(gamma) * interval_measure;

    // Coefficients by exact transform of the constructed function, not from
    // the closed form; the closed form is cross-checked below.
    const std::vector<Complex> dense = analyze_dense(patch, TransformMethod::Fast);
    WalshPolynomial poly{order, {}};
    double flat_deviation = 0.0;
    double stray = 0.0;
    for (std::int64_t n = 0; n < cells; ++n) {
        const double mag = std::abs(dense[size_t(n)]);
        if (mag > 0.5 * coeff_magnitude) {
            poly.append(n, dense[size_t(n)]);
            flat_deviation = std::max(flat_deviation,
                                      std::abs(mag - coeff_magnitude) / coeff_magnitude);
        } else {
            stray = std::max(stray, mag);
        }
    }

    // Expected support {j a^s + i : 1 <= j < a^nu0, 0 <= i < a^m}.
    bool support_ok =
        std::int64_t(poly.terms.size()) == (kernel_period - 1) * checked_ipow(order, m);
    if (support_ok) {
        size_t at = 0;
        const std::int64_t as = checked_ipow(order, s);
        const std::int64_t am = checked_ipow(order, m);
        for (std::int64_t j = 1; j < kernel_period && support_ok; ++j)
            for (std::int64_t i = 0; i < am && support_ok; ++i)
                support_ok = poly.terms[at++].index == j * as + i;
    }

    const Rational kept_measure = Rational(std::int64_t(kept_set.members.size())) *
                                  Rational::power_of(order, -working);
    const double patch_l1 = lp_norm(patch, NormKind::L1);
    const double prefix_max = max_prefix_l1(order, working, poly.terms);

    Certificate cert;
    cert.add("coefficients_flat", 1e-10, flat_deviation, flat_deviation < 1e-10);
    cert.add("support_pattern", coeff_magnitude * 1e-9, stray,
             support_ok && stray < coeff_magnitude * 1e-9);
    {
        const double claimed = (1.0 - eps) * interval_measure;
        cert.add("kept_measure", claimed, kept_measure.to_double(),
                 kept_measure.to_double() > claimed);
        const Rational identity = Rational(kernel_period - 1) *
                                  Rational::power_of(order, -(m + nu0));
        cert.add("kept_measure_identity", identity.to_double(), kept_measure.to_double(),
                 kept_measure == identity, /*exact=*/true);
    }
    {
        double on_kept = 0.0;
        for (std::int64_t c : kept_set.members)
            on_kept = std::max(on_kept, std::abs(patch.value(c) - gamma));
        double off_interval = 0.0;
        for (std::int64_t c = 0; c < cells; ++c)
            if (c < first || c >= first + count)
                off_interval = std::max(off_interval, std::abs(patch.value(c)));
        cert.add("values_on_kept", 0.0, on_kept, on_kept == 0.0, /*exact=*/true);
        cert.add("values_off_interval", 0.0, off_interval, off_interval == 0.0, /*exact=*/true);
    }
    {
        const double lo = 0.5 * std::abs(gamma) * interval_measure;
        const double hi = 2.0 * std::abs(gamma) * interval_measure;
        cert.add("l1_above_half", lo, patch_l1, patch_l1 > lo);
        cert.add("l1_below_double", hi, patch_l1, patch_l1 < hi);
        const double identity =
            2.0 * std::abs(gamma) * interval_measure * (1.0 - 1.0 / double(kernel_period));
        const double rel = std::abs(patch_l1 - identity) / identity;
        cert.add("l1_identity", 1e-10, rel, rel < 1e-10);
    }
    {
        const double bound =
            order * std::abs(gamma) * std::sqrt(interval_measure / eps);
        cert.add("prefix_bound", bound, prefix_max, prefix_max < bound);
    }

    return Lemma1Result{params,
                        nu0,
                        s,
                        last_index,
                        working,
                        coeff_magnitude,
                        std::move(poly),
                        std::move(kept_set),
                        std::move(patch),
                        kept_measure,
                        patch_l1,
                        prefix_max,
                        std::move(cert)};
}

// ---------------------------------------------------------------------------
// step_approximate

namespace {

struct ChainPlan {
    bool feasible = false;
    int final_level = 0;
};

// Simulate the spectral chain the corrector will build over these blocks:
// each block consumes indices up to a^(s+nu0) + a^m - a^s - 1 with
// s = floor_log(chain) + m, and the next block starts past that.
ChainPlan plan_chain(int order, const std::vector<StepBlock>& blocks, std::int64_t chain_start,
                     int nu0, int max_level) {
    ChainPlan plan;
    std::int64_t chain = chain_start;
    for (const StepBlock& b : blocks) {
        const int s = floor_log(order, chain) + b.interval.level;
        const int working = s + nu0;
        if (working > max_level) return plan;
        std::int64_t top = 0, as = 0, am = 0;
        try {
            top = checked_ipow(order, working);
            as = checked_ipow(order, s);
            am = checked_ipow(order, b.interval.level);
        } catch (const std::overflow_error&) {
            return plan;
        }
        if (top > kAbsoluteCellCeiling) return plan;
        chain = top + am - as - 1 + 1;
        plan.final_level = std::max(plan.final_level, working);
    }
    plan.feasible = true;
    return plan;
}

bool product_greater(const StepBlock& x, const StepBlock& y) {
    const double px = x.product(), py = y.product();
    if (px != py) return px > py;
    if (x.interval.level != y.interval.level) return x.interval.level < y.interval.level;
    return x.interval.index < y.interval.index;
}

} // namespace

StepApproximation step_approximate(const StepFunction& f, double eps, double norm_f,
                                   const StepPlanOptions& opts) {
    const int order = f.order();
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    if (!(norm_f > 0.0)) throw std::invalid_argument("step_approximate: zero-norm input");
    const int max_level = opts.max_level > 0 ? opts.max_level : default_max_level(order);
    const int nu0 = kernel_depth(order, eps);
    const double budget = std::min(eps / 4.0, eps / 4.0 * norm_f);

    double hard_cap = eps;
    if (opts.magnitude_cap > 0.0) hard_cap = std::min(hard_cap, opts.magnitude_cap);

    std::vector<ValueRun> runs = value_runs(f);
    std::vector<StepBlock> real_runs;
    std::vector<AdicInterval> zero_runs;
    int zero_level = 0;
    for (const ValueRun& r : runs) {
        if (r.value == Complex(0.0)) {
            zero_runs.push_back(r.interval);
            zero_level = std::max(zero_level, r.interval.level);
        } else {
            real_runs.push_back(StepBlock{r.interval, r.value});
        }
    }

    const std::int64_t chain_start =
        zero_runs.empty() ? opts.n0_start
                          : std::max(opts.n0_start, checked_ipow(order, zero_level));

    // Split real runs until every product |gamma| |Delta| is strictly under
    // the cap; then place tiny strictly-decreasing values on the zero runs.
    auto build = [&](double cap) -> std::pair<std::vector<StepBlock>, double> {
        std::deque<StepBlock> queue(real_runs.begin(), real_runs.end());
        std::vector<StepBlock> blocks;
        while (!queue.empty()) {
            StepBlock b = queue.front();
            queue.pop_front();
            if (b.product() < cap) {
                blocks.push_back(b);
                continue;
            }
            if (b.interval.level + 1 > max_level)
                throw FeasibilityError(
                    "step approximation needs blocks finer than the level budget", norm_f);
            for (int child = 0; child < order; ++child)
                queue.push_back(StepBlock{
                    AdicInterval(order, b.interval.level + 1,
                                 (b.interval.index - 1) * order + child + 1),
                    b.gamma});
        }
        std::sort(blocks.begin(), blocks.end(), product_greater);
        double residual = 0.0;
        if (!zero_runs.empty()) {
            const double min_real = blocks.back().product();
            const double base = std::min({min_real * 0.5,
                                          budget * 0.25 / double(zero_runs.size()),
                                          cap * 0.5});
            double q = base;
            for (const AdicInterval& iv : zero_runs) {
                blocks.push_back(StepBlock{iv, Complex(q / iv.measure().to_double())});
                residual += q;
                q *= 0.5;
            }
        }
        return {std::move(blocks), residual};
    };

    // Prefer the half-eps product bound; fall back to just-below-eps when the
    // finer blocks do not fit the level budget.
    std::vector<double> caps;
    if (eps / 2.0 < hard_cap) caps.push_back(eps / 2.0);
    caps.push_back(hard_cap * (1.0 - 0x1p-20));

    std::vector<StepBlock> blocks;
    double residual = 0.0;
    ChainPlan plan;
    double cap_used = 0.0;
    std::string failure;
    for (double cap : caps) {
        try {
            auto [candidate, cand_residual] = build(cap);
            const ChainPlan cand_plan =
                plan_chain(order, candidate, chain_start, nu0, max_level);
            if (!cand_plan.feasible) {
                failure = "spectral chain exceeds the level budget";
                continue;
            }
            blocks = std::move(candidate);
            residual = cand_residual;
            plan = cand_plan;
            cap_used = cap;
            break;
        } catch (const FeasibilityError& e) {
            failure = e.what();
        }
    }
    if (!plan.feasible)
        throw FeasibilityError("step_approximate: " + failure + " (order " +
                                   std::to_string(order) + ", eps " + std::to_string(eps) + ")",
                               0.0);

    Certificate cert;
    cert.add("residual_below_budget", budget, residual, residual < budget);
    double max_product = 0.0, min_product = blocks.empty() ? 0.0 : blocks.front().product();
    bool nonincreasing = true, strict = true, positive = true;
    Rational coverage(0);
    double prev = -1.0;
    for (const StepBlock& b : blocks) {
        const double p = b.product();
        max_product = std::max(max_product, p);
        min_product = std::min(min_product, p);
        positive = positive && p > 0.0;
        if (prev >= 0.0) {
            nonincreasing = nonincreasing && p <= prev;
            strict = strict && p < prev;
        }
        prev = p;
        coverage = coverage + b.interval.measure();
    }
    cert.add("products_below_eps", eps, max_product, max_product < eps && positive);
    cert.add("products_nonincreasing", 1.0, nonincreasing ? 1.0 : 0.0, nonincreasing);
    cert.add("blocks_tile_interval", 1.0, coverage.to_double(), coverage == Rational(1),
             /*exact=*/true);
    // Per-block power bound eps^3/(16 a^2) ||f||^2 and the strictly
    // decreasing chain under eps/2: bounds the unbounded-resolution
    // construction uses internally. Recorded, not required (see README).
    {
        double power_worst = 0.0;
        for (const StepBlock& b : blocks)
            power_worst = std::max(power_worst, std::abs(b.gamma) * std::abs(b.gamma) *
                                                    b.interval.measure().to_double());
        const double power_bound =
            eps * eps * eps / (16.0 * order * order) * norm_f * norm_f;
        cert.observe("block_power_bound", power_bound, power_worst, power_worst < power_bound);
        cert.observe("strict_chain_under_half_eps", eps / 2.0, max_product,
                     strict && max_product < eps / 2.0);
    }

    StepApproximation out{std::move(blocks), residual, budget, plan.final_level, zero_level,
                          std::move(cert)};
    return out;
}

// ---------------------------------------------------------------------------
// lemma2_construct

CorrectorAssembly assemble_corrector(const StepFunction& f,
                                     const std::vector<StepBlock>& step_blocks,
                                     const std::vector<Lemma1Result>& blocks) {
    const int order = f.order();
    int working = f.level();
    for (const Lemma1Result& b : blocks) working = std::max(working, b.working_level);

    // Assemble P as one dense function (block supports are disjoint).
    const std::int64_t cells = checked_ipow(order, working);
    std::vector<Complex> pv(size_t(cells), Complex(0.0));
    for (const Lemma1Result& b : blocks) {
        const std::int64_t stride = checked_ipow(order, working - b.working_level);
        const std::int64_t first = b.params.interval.first_cell(b.working_level);
        const std::int64_t count = b.params.interval.cell_count(b.working_level);
        for (std::int64_t c = first; c < first + count; ++c) {
            const Complex v = b.patch.value(c);
            for (std::int64_t j = 0; j < stride; ++j) pv[size_t(c * stride + j)] = v;
        }
    }

    // phi at the coarsest level that holds every block value.
    int phi_level = 0;
    for (const StepBlock& b : step_blocks) phi_level = std::max(phi_level, b.interval.level);
    std::vector<Complex> phiv(size_t(checked_ipow(order, phi_level)), Complex(0.0));
    for (const StepBlock& b : step_blocks) {
        const std::int64_t first = b.interval.first_cell(phi_level);
        const std::int64_t count = b.interval.cell_count(phi_level);
        for (std::int64_t c = first; c < first + count; ++c) phiv[size_t(c)] = b.gamma;
    }

    // g = P + (f - phi); grouping (f - phi) first keeps g = f exact on the
    // kept set, where P carries the block value and phi cancels it.
    const std::int64_t stride_f = checked_ipow(order, working - f.level());
    const std::int64_t stride_phi = checked_ipow(order, working - phi_level);
    std::vector<Complex> gv(static_cast<size_t>(cells));
    for (std::int64_t t = 0; t < cells; ++t)
        gv[size_t(t)] = pv[size_t(t)] +
                        (f.value(t / stride_f) - phiv[size_t(t / stride_phi)]);

    // E = union of the per-block kept sets, refined to the common level.
    std::vector<std::int64_t> members;
    for (const Lemma1Result& b : blocks) {
        const std::int64_t stride = checked_ipow(order, working - b.working_level);
        for (std::int64_t c : b.kept_set.members)
            for (std::int64_t j = 0; j < stride; ++j) members.push_back(c * stride + j);
    }
    return CorrectorAssembly{StepFunction(order, working, std::move(pv)),
                             StepFunction(order, working, std::move(gv)),
                             CellSet(order, working, std::move(members)), working};
}

Lemma2Result lemma2_construct(const StepFunction& f, std::int64_t n0, double eps,
                              const CorrectionConfig& cfg) {
    const int order = f.order();
    if (n0 <= 1) throw std::invalid_argument("n0 must exceed 1");
    if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    const int max_level = cfg.max_level > 0 ? cfg.max_level : default_max_level(order);
    const double input_l1 = lp_norm(f, NormKind::L1);
    if (!(input_l1 > 0.0)) throw std::invalid_argument("lemma2_construct: zero-norm input");

    StepPlanOptions plan_opts;
    plan_opts.n0_start = n0;
    plan_opts.magnitude_cap = cfg.magnitude_cap;
    plan_opts.max_level = max_level;
    StepApproximation sa = step_approximate(f, eps, input_l1, plan_opts);

    std::int64_t chain = sa.zero_run_level > 0
                             ? std::max(n0, checked_ipow(order, sa.zero_run_level))
                             : n0;
    std::vector<Lemma1Result> blocks;
    blocks.reserve(sa.blocks.size());
    for (const StepBlock& b : sa.blocks) {
        blocks.push_back(lemma1_construct(b.gamma, chain, eps, b.interval, max_level));
        chain = blocks.back().last_index + 1;
    }

    CorrectorAssembly asm_result = assemble_corrector(f, sa.blocks, blocks);
    const int working = asm_result.working_level;
    StepFunction patch_total = std::move(asm_result.patch_total);
    StepFunction g = std::move(asm_result.g);
    CellSet kept = std::move(asm_result.kept);
    const std::int64_t stride_f = checked_ipow(order, working - f.level());

    WalshPolynomial poly{order, {}};
    for (const Lemma1Result& b : blocks)
        for (const WalshTerm& t : b.polynomial.terms) poly.append(t.index, t.coefficient);

    const double g_l1 = lp_norm(g, NormKind::L1);
    const double prefix_max = max_prefix_l1(order, working, poly.terms);

    Certificate cert;
    {
        const Rational kept_measure = kept.measure();
        cert.add("kept_measure", 1.0 - eps, kept_measure.to_double(),
                 kept_measure.to_double() > 1.0 - eps);
    }
    {
        double dev = 0.0;
        for (std::int64_t c : kept.members)
            dev = std::max(dev, std::abs(g.value(c) - f.value(c / stride_f)));
        cert.add("equal_on_kept", 0.0, dev, dev == 0.0, /*exact=*/true);
    }
    cert.add("l1_above_half_input", 0.5 * input_l1, g_l1, g_l1 > 0.5 * input_l1);
    cert.add("l1_below_triple_input", 3.0 * input_l1, g_l1, g_l1 < 3.0 * input_l1);
    {
        const double dist = l1_distance(patch_total, g);
        cert.add("series_close_to_g", eps, dist, dist < eps);
    }
    {
        bool positive = true, below = true, nonincr = true;
        double prev = -1.0;
        for (const WalshTerm& t : poly.terms) {
            const double mag = std::abs(t.coefficient);
            positive = positive && mag > 0.0;
            below = below && mag < eps;
            if (prev >= 0.0) nonincr = nonincr && mag <= prev + prev * 1e-12;
            prev = mag;
        }
        cert.add("magnitudes_positive", 0.0, positive ? 1.0 : 0.0, positive);
        cert.add("magnitudes_below_eps", eps, 1.0, below);
        cert.add("magnitudes_nonincreasing", 1.0, nonincr ? 1.0 : 0.0, nonincr);
    }
    cert.add("prefix_below_triple_input", 3.0 * input_l1, prefix_max,
             prefix_max < 3.0 * input_l1);

    return Lemma2Result{f,
                        std::move(g),
                        std::move(kept),
                        std::move(poly),
                        std::move(blocks),
                        std::move(sa),
                        n0,
                        eps,
                        working,
                        input_l1,
                        g_l1,
                        prefix_max,
                        std::move(cert)};
}

// ---------------------------------------------------------------------------
// correct_function

namespace {

double profile_ratio(BudgetProfile profile, int q) {
    switch (profile) {
        case BudgetProfile::Verbatim: return std::pow(4.0, -8.0 * (q + 2));
        case BudgetProfile::Relaxed: return std::pow(4.0, -double(q + 2));
    }
    return 0.0;
}

// The nominal per-step ratios vanish faster than any grid can follow, so the
// driver runs a geometric schedule with the same role (summable under eps,
// decaying per step) and records both values per step.
double schedule_ratio(int q) { return 0.9 * std::pow(8.0, -double(q - 1)); }

} // namespace

CorrectionResult correct_function(const StepFunction& f, const DriverConfig& cfg) {
    const int order = f.order();
    if (!(cfg.eps > 0.0 && cfg.eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
    if (!(cfg.tol > 0.0)) throw std::invalid_argument("tol must be positive");
    if (cfg.q_max < 1) throw std::invalid_argument("q_max must be >= 1");
    const int max_level = cfg.max_level > 0 ? cfg.max_level : default_max_level(order);
    const double input_l1 = lp_norm(f, NormKind::L1);
    if (!(input_l1 > 0.0)) throw std::invalid_argument("correct_function: zero-norm input");

    const double eps_cap = cfg.eps * (1.0 - 0x1p-10);
    double eps_used = 0.0;

    StepFunction g_acc = StepFunction::zero(order, f.level());
    StepFunction residual = f;
    CellSet kept = CellSet::full(order, 0);
    WalshPolynomial series{order, {}};
    std::vector<DriverTraceEntry> trace;
    std::vector<double> step_prefix_max;
    std::int64_t chain = cfg.n0;
    double min_magnitude = 0.0;  // 0 = unset
    double first_block_magnitude = 0.0;
    double kept_side_residual = input_l1;
    bool converged = false;
    int iterations = 0;

    for (int q = 1; q <= cfg.q_max; ++q) {
        const double raw = cfg.eps * profile_ratio(cfg.profile, q);
        double eps_q = cfg.eps * schedule_ratio(q);
        eps_q = std::max(eps_q, raw);
        eps_q = std::min(eps_q, eps_cap - eps_used);
        if (!(eps_q > 0.0)) break;

        // Target for this step: the residual itself, or its nearest
        // dictionary element in strict mode.
        StepFunction target = residual;
        double pick_residual = 0.0;
        if (cfg.dictionary_mode) {
            double best = -1.0;
            std::int64_t best_n = -1;
            for (std::int64_t n = 1; n <= cfg.dictionary_cap; ++n) {
                const StepFunction cand = dictionary_step(n, order);
                if (cand.level() > residual.level()) continue;
                const double d = l1_distance(residual, cand);
                if (best < 0.0 || d < best) {
                    best = d;
                    best_n = n;
                }
            }
            target = dictionary_step(best_n, order);
            pick_residual = best;
        }
        if (!(lp_norm(target, NormKind::L1) > 0.0)) break;  // nothing left to correct

        CorrectionConfig step_cfg;
        step_cfg.n0 = chain;
        step_cfg.max_level = max_level;
        step_cfg.magnitude_cap = min_magnitude > 0.0 ? min_magnitude * (1.0 - 0x1p-20) : 0.0;
        if (first_block_magnitude > 0.0)
            step_cfg.magnitude_cap =
                std::min(step_cfg.magnitude_cap,
                         first_block_magnitude * std::pow(0.25, q - 1));
        Lemma2Result step = lemma2_construct(target, chain, eps_q, step_cfg);

        g_acc = g_acc + step.g;
        kept = set_intersection(kept, step.kept_set);
        for (const WalshTerm& t : step.polynomial.terms) series.append(t.index, t.coefficient);
        chain = step.polynomial.last_index() + 1;
        const double block_mag = std::abs(step.polynomial.terms.front().coefficient);
        if (first_block_magnitude == 0.0) first_block_magnitude = block_mag;
        min_magnitude = std::abs(step.polynomial.terms.back().coefficient);
        eps_used += eps_q;
        ++iterations;

        trace.push_back(DriverTraceEntry{q, eps_q, raw, pick_residual,
                                         step.polynomial.first_index(),
                                         step.polynomial.last_index(), block_mag,
                                         step.prefix_max_l1});
        step_prefix_max.push_back(step.prefix_max_l1);

        residual = residual - step.g;
        kept_side_residual = l1_norm_on(g_acc - f, kept);
        if (kept_side_residual <= cfg.tol) {
            converged = true;
            break;
        }
    }

    const int working = g_acc.level();
    const double g_l1 = lp_norm(g_acc, NormKind::L1);
    const double prefix_sup = max_prefix_l1(order, working, series.terms);

    Certificate cert;
    {
        const Disagreement dis = disagreement_measure(f, g_acc, 0.0);
        cert.add("disagreement_below_eps", cfg.eps, dis.measure.to_double(),
                 dis.measure.to_double() < cfg.eps);
    }
    cert.add("kept_measure", 1.0 - cfg.eps, kept.measure().to_double(),
             kept.measure().to_double() > 1.0 - cfg.eps);
    cert.add("l1_above_half_input", 0.5 * input_l1, g_l1, g_l1 > 0.5 * input_l1);
    cert.add("l1_below_quadruple_input", 4.0 * input_l1, g_l1, g_l1 < 4.0 * input_l1);
    {
        bool nonincr = true;
        double prev = -1.0;
        for (const WalshTerm& t : series.terms) {
            const double mag = std::abs(t.coefficient);
            if (prev >= 0.0) nonincr = nonincr && mag <= prev + prev * 1e-12;
            prev = mag;
        }
        cert.add("magnitudes_nonincreasing", 1.0, nonincr ? 1.0 : 0.0, nonincr);
    }
    {
        // Tail decay across iteration blocks; vacuous when the driver
        // terminated in one step.
        const double last_block = trace.empty() ? 0.0 : trace.back().block_magnitude;
        if (iterations <= 1) {
            cert.add("tail_decay", last_block, last_block, true);
        } else {
            cert.add("tail_decay", 0.25 * first_block_magnitude, last_block,
                     last_block < 0.25 * first_block_magnitude);
        }
    }
    cert.add("prefix_sup_within_12", 12.0 * input_l1, prefix_sup,
             prefix_sup <= 12.0 * input_l1);
    {
        const auto curve =
            greedy_error_curve(g_acc, std::int64_t(series.terms.size()) + 8, NormKind::L1);
        const double final_err = curve.back().error;
        cert.add("greedy_l1_reaches_tol", cfg.tol, final_err, final_err <= cfg.tol);
    }
    cert.add("converged", cfg.tol, kept_side_residual, converged);

    return CorrectionResult{f,
                            std::move(g_acc),
                            std::move(kept),
                            std::move(series),
                            std::move(trace),
                            cfg.profile,
                            cfg.eps,
                            cfg.tol,
                            input_l1,
                            g_l1,
                            kept_side_residual,
                            iterations,
                            converged,
                            prefix_sup,
                            std::move(cert)};
}

// ---------------------------------------------------------------------------
// universal_series

UniversalSeries universal_series(const UniversalConfig& cfg) {
    if (cfg.n_max < 1) throw std::invalid_argument("n_max must be >= 1");
    const int order = cfg.order;
    const int max_level = cfg.max_level > 0 ? cfg.max_level : default_max_level(order);
    const double eps_cap = cfg.eps * (1.0 - 0x1p-10);

    UniversalSeries out{{}, {}, CellSet::full(order, 0), {}};
    std::int64_t chain = cfg.n0;
    double min_magnitude = 0.0;
    double eps_used = 0.0;
    double eps_sum_claimed = 0.0;
    int step = 0;
    for (std::int64_t n = 1; n <= cfg.n_max; ++n) {
        const StepFunction f_n = dictionary_step(n, order);
        if (!(lp_norm(f_n, NormKind::L1) > 0.0)) {
            out.skipped.push_back(n);
            continue;
        }
        ++step;
        const double raw = cfg.eps * profile_ratio(cfg.profile, step);
        double eps_n = std::max(cfg.eps * schedule_ratio(step), raw);
        eps_n = std::min(eps_n, eps_cap - eps_used);
        if (!(eps_n > 0.0)) break;
        CorrectionConfig step_cfg;
        step_cfg.n0 = chain;
        step_cfg.max_level = max_level;
        step_cfg.magnitude_cap = min_magnitude > 0.0 ? min_magnitude * (1.0 - 0x1p-20) : 0.0;
        Lemma2Result block = lemma2_construct(f_n, chain, eps_n, step_cfg);
        chain = block.polynomial.last_index() + 1;
        min_magnitude = std::abs(block.polynomial.terms.back().coefficient);
        out.kept_truncated = set_intersection(out.kept_truncated, block.kept_set);
        out.blocks.push_back(std::move(block));
        eps_used += eps_n;
        eps_sum_claimed += eps_n;
    }

    out.certificate.add("kept_measure", 1.0 - eps_sum_claimed,
                        out.kept_truncated.measure().to_double(),
                        out.kept_truncated.measure().to_double() > 1.0 - eps_sum_claimed);
    out.certificate.add("kept_measure_within_eps", 1.0 - cfg.eps,
                        out.kept_truncated.measure().to_double(),
                        out.kept_truncated.measure().to_double() > 1.0 - cfg.eps);
    {
        bool nonincr = true;
        double prev = -1.0;
        for (const Lemma2Result& b : out.blocks)
            for (const WalshTerm& t : b.polynomial.terms) {
                const double mag = std::abs(t.coefficient);
                if (prev >= 0.0) nonincr = nonincr && mag <= prev + prev * 1e-12;
                prev = mag;
            }
        out.certificate.add("magnitudes_nonincreasing", 1.0, nonincr ? 1.0 : 0.0, nonincr);
    }
    return out;
}

// ---------------------------------------------------------------------------
// verify_certificate: re-derives every conclusion from the result payload by
// direct summation/counting, independent of how the payload was built.

namespace {

void push(VerifyReport& r, const std::string& name, bool pass, double slack,
          const std::string& detail = "") {
    r.items.push_back(VerifyItem{name, pass, slack, detail});
}

} // namespace

VerifyReport verify_certificate(const Lemma1Result& result) {
    VerifyReport report;
    const Lemma1Params& p = result.params;
    const int order = p.order;
    const int m = p.interval.level;

    const int nu0 = kernel_depth(order, p.eps);
    const int s = floor_log(order, p.n0) + m;
    const std::int64_t expected_last = checked_ipow(order, s + nu0) + checked_ipow(order, m) -
                                       checked_ipow(order, s) - 1;
    push(report, "derived_parameters",
         nu0 == result.nu0 && s == result.s && expected_last == result.last_index, 0.0,
         "nu0/s/N from exact integer arithmetic");

    const double interval_measure = p.interval.measure().to_double();
    const double mag = std::abs(p.gamma) * interval_measure;
    double flat = 0.0;
    bool in_range = true;
    for (const WalshTerm& t : result.polynomial.terms) {
        flat = std::max(flat, std::abs(std::abs(t.coefficient) - mag) / mag);
        in_range = in_range && t.index >= p.n0 && t.index <= result.last_index;
    }
    push(report, "coefficients_flat", flat < 1e-9 && in_range, 1e-9 - flat);

    const Rational measure = result.kept_set.measure();
    const Rational identity = Rational(checked_ipow(order, nu0) - 1) *
                              Rational::power_of(order, -(m + nu0));
    push(report, "kept_measure", measure.to_double() > (1.0 - p.eps) * interval_measure,
         measure.to_double() - (1.0 - p.eps) * interval_measure);
    push(report, "kept_measure_identity", measure == identity, 0.0, "exact rational equality");

    // Brute-force reconstruction from the coefficients alone.
    const StepFunction rebuilt = result.polynomial.synthesize_direct(result.working_level);
    const double scale = std::max(1.0, std::abs(p.gamma) * double(checked_ipow(order, nu0)));
    const double tol = 1e-8 * scale;
    double on_kept = 0.0, off_interval = 0.0;
    const std::int64_t first = p.interval.first_cell(result.working_level);
    const std::int64_t count = p.interval.cell_count(result.working_level);
    for (std::int64_t c : result.kept_set.members)
        on_kept = std::max(on_kept, std::abs(rebuilt.value(c) - p.gamma));
    for (std::int64_t c = 0; c < rebuilt.cells(); ++c)
        if (c < first || c >= first + count)
            off_interval = std::max(off_interval, std::abs(rebuilt.value(c)));
    push(report, "equals_gamma_on_kept", on_kept < tol, tol - on_kept);
    push(report, "vanishes_off_interval", off_interval < tol, tol - off_interval);

    const double l1 = lp_norm(rebuilt, NormKind::L1);
    const double lo = 0.5 * std::abs(p.gamma) * interval_measure;
    const double hi = 2.0 * std::abs(p.gamma) * interval_measure;
    push(report, "l1_above_half", l1 > lo, l1 - lo);
    push(report, "l1_below_double", l1 < hi, hi - l1);
    const double l1_identity = 2.0 * std::abs(p.gamma) * interval_measure *
                               (1.0 - 1.0 / double(checked_ipow(order, nu0)));
    push(report, "l1_identity", std::abs(l1 - l1_identity) / l1_identity < 1e-8,
         1e-8 - std::abs(l1 - l1_identity) / l1_identity);

    const double prefix = max_prefix_l1(order, result.working_level, result.polynomial.terms);
    const double bound = order * std::abs(p.gamma) * std::sqrt(interval_measure / p.eps);
    push(report, "prefix_bound", prefix < bound, bound - prefix);
    return report;
}

VerifyReport verify_certificate(const Lemma2Result& result) {
    VerifyReport report;
    const int order = result.input.order();
    const double input_l1 = lp_norm(result.input, NormKind::L1);
    const int working = result.working_level;

    push(report, "kept_measure", result.kept_set.measure().to_double() > 1.0 - result.eps,
         result.kept_set.measure().to_double() - (1.0 - result.eps));

    const std::int64_t stride_f = checked_ipow(order, working - result.input.level());
    double dev = 0.0;
    for (std::int64_t c : result.kept_set.members)
        dev = std::max(dev, std::abs(result.g.value(c) - result.input.value(c / stride_f)));
    push(report, "equal_on_kept", dev == 0.0, -dev, "exact cellwise equality");

    const double g_l1 = lp_norm(result.g, NormKind::L1);
    push(report, "l1_above_half_input", g_l1 > 0.5 * input_l1, g_l1 - 0.5 * input_l1);
    push(report, "l1_below_triple_input", g_l1 < 3.0 * input_l1, 3.0 * input_l1 - g_l1);

    const StepFunction rebuilt = result.polynomial.synthesize_direct(working);
    const double dist = l1_distance(rebuilt, result.g);
    push(report, "series_close_to_g", dist < result.eps, result.eps - dist);

    bool positive = true, below = true, nonincr = true, increasing = true;
    double prev = -1.0;
    std::int64_t prev_index = -1;
    for (const WalshTerm& t : result.polynomial.terms) {
        const double mag = std::abs(t.coefficient);
        positive = positive && mag > 0.0;
        below = below && mag < result.eps;
        if (prev >= 0.0) nonincr = nonincr && mag <= prev + prev * 1e-12;
        increasing = increasing && t.index > prev_index;
        prev = mag;
        prev_index = t.index;
    }
    push(report, "magnitudes_in_range", positive && below, 0.0, "0 < |c_k| < eps");
    push(report, "magnitudes_nonincreasing", nonincr, 0.0);
    push(report, "indices_strictly_increasing", increasing, 0.0);

    const double prefix = max_prefix_l1(order, working, result.polynomial.terms);
    push(report, "prefix_below_triple_input", prefix < 3.0 * input_l1,
         3.0 * input_l1 - prefix);
    return report;
}

VerifyReport verify_certificate(const CorrectionResult& result) {
    VerifyReport report;
    const int order = result.input.order();
    const double input_l1 = lp_norm(result.input, NormKind::L1);
    const int working = result.g.level();

    const Disagreement dis = disagreement_measure(result.input, result.g, 0.0);
    push(report, "disagreement_below_eps", dis.measure.to_double() < result.eps,
         result.eps - dis.measure.to_double());
    push(report, "kept_measure", result.kept_set.measure().to_double() > 1.0 - result.eps,
         result.kept_set.measure().to_double() - (1.0 - result.eps));

    const std::int64_t stride_f = checked_ipow(order, working - result.input.level());
    double dev = 0.0;
    for (std::int64_t c : result.kept_set.members)
        dev = std::max(dev, std::abs(result.g.value(c) - result.input.value(c / stride_f)));
    push(report, "equal_on_kept", dev == 0.0, -dev, "exact cellwise equality");

    const double g_l1 = lp_norm(result.g, NormKind::L1);
    push(report, "l1_above_half_input", g_l1 > 0.5 * input_l1, g_l1 - 0.5 * input_l1);
    push(report, "l1_below_quadruple_input", g_l1 < 4.0 * input_l1, 4.0 * input_l1 - g_l1);

    bool nonincr = true;
    double prev = -1.0;
    for (const WalshTerm& t : result.series.terms) {
        const double mag = std::abs(t.coefficient);
        if (prev >= 0.0) nonincr = nonincr && mag <= prev + prev * 1e-12;
        prev = mag;
    }
    push(report, "magnitudes_nonincreasing", nonincr, 0.0);

    const double prefix = max_prefix_l1(order, working, result.series.terms);
    push(report, "prefix_sup_within_12", prefix <= 12.0 * input_l1,
         12.0 * input_l1 - prefix);

    // The emitted series must be the Fourier–Walsh spectrum of g on its
    // support.
    const std::vector<Complex> dense = analyze_dense(result.g, TransformMethod::Fast);
    double coeff_dev = 0.0;
    for (const WalshTerm& t : result.series.terms)
        coeff_dev = std::max(coeff_dev, std::abs(dense[size_t(t.index)] - t.coefficient));
    push(report, "series_matches_spectrum", coeff_dev < 1e-9, 1e-9 - coeff_dev);

    const auto curve = greedy_error_curve(result.g, std::int64_t(result.series.terms.size()) + 8,
                                          NormKind::L1);
    push(report, "greedy_l1_reaches_tol", curve.back().error <= result.tol,
         result.tol - curve.back().error);
    return report;
}

} // namespace walshkit
