#pragma once

#include <json.hpp>

#include <string>

#include "vbx/classify.hpp"
#include "vbx/coframe.hpp"
#include "vbx/conslaw.hpp"

namespace vbx {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

json to_json(const Expr& e);
json to_json(const ZeroVerdict& v);
json to_json(const FormVerdict& v);
// [{"monomial": ["s1", "th:1^2"], "coeff": "..."}], in canonical monomial order.
json to_json(const BiForm& w);
json to_json(const ConservationLaw& law);
json to_json(const CheckRow& row);
json to_json(const LaplaceIndex& idx);
json to_json(const ClassificationResult& res);
json to_json(const SymbolData& data);

// "exact" or "probabilistic".
std::string certainty(const ZeroVerdict& v);

// Inverse of to_json(BiForm); monomials are wedged in the order listed. type = [r, s] fixes an empty form.
BiForm biform_from_json(const json& j, int n, std::optional<std::pair<int, int>> type = std::nullopt);

// Either a serialized BiForm or {"dV": expr}.
BiForm factor_from_json(const json& j, const SystemSpec& sys);

// {"rho12": expr or form, ...}; functions give s = 1.
RhoTriple rho_from_json(const json& j, int n);

// {"pair_fields": [..], "other_fields": [..], "I", "I_t", "J", "J_t", "K"?, "K_t"?}.
InvariantBundle bundle_from_json(const json& j, int n);

// {"l": 1, "blocks": [{"coefficient": expr, "factors": [...]}]} for 1s, {"i", "j", "blocks"} for 2s,
// or {"sequence": {"I", "I_t", "field", "m"}, "k", "eta"} for a 1s law from an invariant sequence.
GeneratorInput generator_from_json(const json& j, LawKind kind, const SystemSpec& sys, const ZeroPolicy& policy);

// {"M": [A1, A2, A3], "relations"?: [[l1, l2, l3], [m1, m2, m3]]}, each A a 3 x 3 array and each l^k a 3-array.
SymbolData symbol_from_json(const json& j, const ZeroPolicy& policy);

// Indented key: value rendering of a report.
std::string render_text(const json& report);

}  // namespace vbx
