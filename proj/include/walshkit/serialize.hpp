#pragma once

#include <string>

#include <json.hpp>

#include "walshkit/correction.hpp"
#include "walshkit/greedy.hpp"

namespace walshkit {

using Json = nlohmann::json;

// StepFunction <-> {order, level, values: [[re, im], ...]}
Json to_json(const StepFunction& f);
StepFunction step_function_from_json(const Json& j);

// CellSet <-> {order, level, members: [int]}
Json to_json(const CellSet& s);
CellSet cell_set_from_json(const Json& j);

// Spectrum <-> {order, source_level, coefficients: [{n, re, im}]} sorted by n
Json to_json(const Spectrum& s);
Spectrum spectrum_from_json(const Json& j);

// WalshPolynomial <-> sorted (n, re, im) triples
Json to_json(const WalshPolynomial& p);
WalshPolynomial polynomial_from_json(const Json& j);

Json to_json(const Certificate& c);
Certificate certificate_from_json(const Json& j);

Json to_json(const VerifyReport& r);

// Certificate files: parameters, coefficients and conclusions; dense grids
// are rebuilt from the parameters on load so files stay small.
Json to_json(const Lemma1Result& r);
Lemma1Result lemma1_from_json(const Json& j, int max_level = 0);

Json to_json(const Lemma2Result& r);
Lemma2Result lemma2_from_json(const Json& j, int max_level = 0);

Json to_json(const CorrectionResult& r);
CorrectionResult correction_from_json(const Json& j, int max_level = 0);

// Greedy curves as CSV with header m,error_p,partial_sum_norm_1.
std::string curve_to_csv(const std::vector<GreedyCurvePoint>& curve);

// Byte-stable file I/O: sorted keys, deterministic float formatting.
void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

} // namespace walshkit
