#pragma once

#include <optional>
#include <string>
#include <vector>

#include "walshkit/adic.hpp"
#include "walshkit/chrestenson.hpp"

namespace walshkit {

struct WalshTerm {
    std::int64_t index;
    Complex coefficient;
};

/**
 * Sparse finite sum of Walsh functions with strictly increasing spectral
 * indices and no stored zero coefficients.
 */
struct WalshPolynomial {
    int order;
    std::vector<WalshTerm> terms;

    void append(std::int64_t index, Complex coefficient);
    std::int64_t first_index() const { return terms.empty() ? -1 : terms.front().index; }
    std::int64_t last_index() const { return terms.empty() ? -1 : terms.back().index; }

    // Direct pointwise summation on the level-J grid (no fast transform).
    StepFunction synthesize_direct(int level) const;
};

// One certified inequality or identity: the bound the construction claims
// and the value actually achieved. `exact` marks claims settled in rational
// arithmetic rather than floating point. Entries with `required` false are
// recorded observations (bounds the source construction used internally at
// unbounded resolution) and do not gate the certificate.
struct CertificateEntry {
    std::string name;
    double claimed;
    double achieved;
    bool pass;
    bool exact = false;
    bool required = true;
};

struct Certificate {
    std::vector<CertificateEntry> entries;

    void add(const std::string& name, double claimed, double achieved, bool pass,
             bool exact = false) {
        entries.push_back(CertificateEntry{name, claimed, achieved, pass, exact, true});
    }
    void observe(const std::string& name, double claimed, double achieved, bool pass) {
        entries.push_back(CertificateEntry{name, claimed, achieved, pass, false, false});
    }
    bool all_pass() const {
        for (const auto& e : entries)
            if (e.required && !e.pass) return false;
        return true;
    }
    const CertificateEntry* find(const std::string& name) const {
        for (const auto& e : entries)
            if (e.name == name) return &e;
        return nullptr;
    }
};

// Max over all prefixes of the term sequence of the L1 norm of the partial
// sum, evaluated densely at `level`.
double max_prefix_l1(int order, int level, const std::vector<WalshTerm>& terms);

// nu0 = floor(log_a(1/eps)) + 1 via exact dyadic comparison: the smallest
// v >= 1 with a^-v < eps.
int kernel_depth(int order, double eps);

// Largest t with a^t <= n, for n >= 1.
int floor_log(int order, std::int64_t n);

// ---------------------------------------------------------------------------
// Single-interval polynomial (CLI subcommand `lemma1`)

struct Lemma1Params {
    int order;
    Complex gamma;       // != 0
    std::int64_t n0;     // > 1
    double eps;          // in (0,1)
    AdicInterval interval;
};

/**
 * A Walsh polynomial with indices in [N0, N] and flat coefficient modulus
 * |gamma| * |Delta| that equals gamma on most of Delta and vanishes off it,
 * together with the exact kept set and the certified conclusions.
 */
struct Lemma1Result {
    Lemma1Params params;
    int nu0;
    int s;
    std::int64_t last_index;   // N = a^(s+nu0) + a^m - a^s - 1
    int working_level;         // s + nu0
    double coeff_magnitude;    // |gamma| * a^-m
    WalshPolynomial polynomial;
    CellSet kept_set;          // E, at working_level
    StepFunction patch;        // P, dense at working_level
    Rational kept_measure;
    double patch_l1;
    double prefix_max_l1;
    Certificate certificate;
};

Lemma1Result lemma1_construct(Complex gamma, std::int64_t n0, double eps,
                              const AdicInterval& interval, int max_level);

// The purely geometric part of the construction: P and E filled directly
// from the parameters. Deserialization rebuilds results through this, so
// certificate files carry parameters and coefficients, not dense grids.
struct PatchGeometry {
    int nu0;
    int s;
    int working_level;
    std::int64_t last_index;
    StepFunction patch;
    CellSet kept;
};
PatchGeometry build_patch_geometry(const Lemma1Params& params, int max_level);

// ---------------------------------------------------------------------------
// Step approximation feeding the whole-function corrector

struct StepBlock {
    AdicInterval interval;
    Complex gamma;

    double product() const {
        return std::abs(gamma) * interval.measure().to_double();
    }
};

struct StepPlanOptions {
    std::int64_t n0_start = 2;
    double magnitude_cap = 0.0;  // 0 = no cap beyond eps
    int max_level = 0;           // 0 = default for the order
};

/**
 * Disjoint a-adic blocks (sorted by decreasing |gamma_nu| * |Delta_nu|)
 * tiling [0,1), with residual ||f - phi||_1 under min{eps/4, eps/4 * ||f||_1}.
 * Zero regions of f are covered by blocks with tiny distinct values so the
 * kept set can span the whole interval. Block products stay strictly below
 * min(eps, magnitude_cap); the chain of blocks is planned against the level
 * budget before anything is built.
 */
struct StepApproximation {
    std::vector<StepBlock> blocks;
    double residual_l1;
    double residual_budget;
    int planned_final_level;
    int zero_run_level;  // resolution of f - phi (0 when phi = f exactly)
    Certificate certificate;
};

StepApproximation step_approximate(const StepFunction& f, double eps, double norm_f,
                                   const StepPlanOptions& opts);

// ---------------------------------------------------------------------------
// Whole-function corrector (CLI subcommand `lemma2`)

struct CorrectionConfig {
    std::int64_t n0 = 2;
    int max_level = 0;           // 0 = default for the order
    double magnitude_cap = 0.0;  // 0 = eps
};

/**
 * g = P + f - phi with f = g on the kept set E, |E| > 1 - eps, norm bounds
 * (1/2)||f|| < ||g|| < 3||f||, ||P - g|| < eps, coefficient magnitudes in
 * (0, eps) non-increasing, and every prefix of P below 3||f|| in L1.
 */
struct Lemma2Result {
    StepFunction input;
    StepFunction g;
    CellSet kept_set;
    WalshPolynomial polynomial;
    std::vector<Lemma1Result> blocks;
    StepApproximation step_approx;
    std::int64_t n0;
    double eps;
    int working_level;
    double input_l1;
    double g_l1;
    double prefix_max_l1;
    Certificate certificate;
};

Lemma2Result lemma2_construct(const StepFunction& f, std::int64_t n0, double eps,
                              const CorrectionConfig& cfg = {});

// Assembly of P, g = P + (f - phi) and E from finished blocks; shared by
// the constructor and by deserialization.
struct CorrectorAssembly {
    StepFunction patch_total;
    StepFunction g;
    CellSet kept;
    int working_level;
};
CorrectorAssembly assemble_corrector(const StepFunction& f,
                                     const std::vector<StepBlock>& step_blocks,
                                     const std::vector<Lemma1Result>& blocks);

// ---------------------------------------------------------------------------
// Correction driver (CLI subcommand `correct`)

enum class BudgetProfile { Verbatim, Relaxed };

struct DriverConfig {
    double eps = 0.25;
    double tol = 1e-3;
    int q_max = 8;
    BudgetProfile profile = BudgetProfile::Verbatim;
    bool dictionary_mode = false;      // pick correction targets from the
                                       // rational step dictionary instead of
                                       // the residual itself
    std::int64_t dictionary_cap = 4096;
    std::int64_t n0 = 2;
    int max_level = 0;
};

struct DriverTraceEntry {
    int iteration;
    double eps_step;        // measure budget actually used
    double eps_step_raw;    // the profile's nominal 4^-8(q+2) (or relaxed) value
    double pick_residual;   // ||r_q - f_sel||_1 for the chosen target
    std::int64_t block_first;
    std::int64_t block_last;
    double block_magnitude; // leading coefficient modulus of the block
    double partial_sum_sup_l1;
};

struct CorrectionResult {
    StepFunction input;
    StepFunction g;
    CellSet kept_set;          // truncated intersection of per-step kept sets
    WalshPolynomial series;    // the selected (delta = 1) terms
    std::vector<DriverTraceEntry> trace;
    BudgetProfile profile;
    double eps;
    double tol;
    double input_l1;
    double g_l1;
    double kept_side_residual; // ||(g - f) restricted to E||_1 at stop
    int iterations;
    bool converged;
    double prefix_sup_l1;
    Certificate certificate;
};

CorrectionResult correct_function(const StepFunction& f, const DriverConfig& cfg);

// ---------------------------------------------------------------------------
// Truncated universal series over the rational step dictionary

struct UniversalConfig {
    double eps = 0.5;
    int n_max = 2;
    std::int64_t n0 = 2;
    BudgetProfile profile = BudgetProfile::Verbatim;
    int max_level = 0;
    int order = 2;
};

struct UniversalSeries {
    std::vector<Lemma2Result> blocks;
    std::vector<std::int64_t> skipped;  // zero-norm dictionary indices
    CellSet kept_truncated;
    Certificate certificate;
};

UniversalSeries universal_series(const UniversalConfig& cfg);

// ---------------------------------------------------------------------------
// Independent re-derivation of every certified conclusion from result data

struct VerifyItem {
    std::string name;
    bool pass;
    double slack;  // claimed bound minus achieved value (sign-adjusted > 0 on pass)
    std::string detail;
};

struct VerifyReport {
    std::vector<VerifyItem> items;
    bool all_pass() const {
        for (const auto& i : items)
            if (!i.pass) return false;
        return true;
    }
};

VerifyReport verify_certificate(const Lemma1Result& result);
VerifyReport verify_certificate(const Lemma2Result& result);
VerifyReport verify_certificate(const CorrectionResult& result);

} // namespace walshkit
