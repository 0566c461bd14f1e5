#include "vbx/report.hpp"

#include <sstream>

namespace vbx {

namespace {

Expr expr_of(const json& j, int n, const std::string& what) {
    if (j.is_number_integer()) return Expr(j.get<long>());
    if (!j.is_string()) throw InputError(what + " must be an expression string");
    try {
        return Expr::parse(j.get<std::string>(), n);
    } catch (const ParseError& e) {
        throw InputError(what + ": " + e.what());
    }
}

const json& field(const json& j, const std::string& key, const std::string& what) {
    if (!j.is_object() || !j.contains(key)) throw InputError(what + " needs field \"" + key + "\"");
    return j.at(key);
}

int int_of(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw InputError(what + " must be an integer");
    return j.get<int>();
}

std::vector<int> ints_of(const json& j, const std::string& what) {
    if (!j.is_array()) throw InputError(what + " must be an array of integers");
    std::vector<int> out;
    for (const auto& v : j) out.push_back(int_of(v, what));
    return out;
}

BiForm label_form(const std::string& label, int n) {
    auto bad = [&] { return InputError("unknown monomial label \"" + label + "\""); };
    if (label.size() == 2 && label[0] == 's' && label[1] >= '1' && label[1] <= '0' + n)
        return BiForm::sigma(n, label[1] - '0');
    if (label.rfind("th", 0) != 0) throw bad();
    if (label == "th") return BiForm::theta(n);
    if (label.size() < 4 || label[2] != ':' || label[3] < '1' || label[3] > '0' + n) throw bad();
    Contact c{label[3] - '0', 1};
    if (label.size() > 4) {
        if (label[4] != '^' || label.size() == 5) throw bad();
        std::string k = label.substr(5);
        if (k.find_first_not_of("0123456789") != std::string::npos || k.size() > 3) throw bad();
        c.order = std::stoi(k);
        if (c.order < 1) throw bad();
    }
    return BiForm::contact(n, c);
}

std::map<std::string, std::string> string_map(const json& j) {
    std::map<std::string, std::string> out;
    for (const auto& [k, v] : j.items()) out[k] = v.is_string() ? v.get<std::string>() : v.dump();
    return out;
}

}  // namespace

json to_json(const Expr& e) { return e.str(); }

std::string certainty(const ZeroVerdict& v) {
    return v.kind == ZeroVerdict::Kind::ProbablyZero ? "probabilistic" : "exact";
}

json to_json(const ZeroVerdict& v) {
    json j{{"verdict", v.label()}, {"certainty", certainty(v)}};
    if (v.kind == ZeroVerdict::Kind::ProbablyZero) {
        j["samples"] = v.samples;
        j["tol"] = v.tol;
    }
    if (!v.witness.empty()) j["witness"] = v.witness;
    return j;
}

json to_json(const FormVerdict& v) {
    json j = to_json(v.verdict);
    if (!v.monomial.empty()) j["monomial"] = v.monomial;
    return j;
}

json to_json(const BiForm& w) {
    json out = json::array();
    for (const auto& [m, c] : w.terms) out.push_back({{"monomial", m.labels()}, {"coeff", c.str()}});
    return out;
}

json to_json(const ConservationLaw& law) {
    json j{{"type", {law.form.r, law.form.s}},
           {"form", to_json(law.form)},
           {"closure", law.closure_label()},
           {"closure_verdict", to_json(law.closure)},
           {"adapted_order", law.adapted_order},
           {"provenance", law.provenance}};
    if (law.adjoint_sum) j["adjoint_sum"] = to_json(*law.adjoint_sum);
    return j;
}

json to_json(const CheckRow& row) {
    json j = to_json(row.verdict);
    j["label"] = row.label;
    j["expect"] = row.expect_zero ? "zero" : "nonzero";
    j["holds"] = row.holds;
    return j;
}

json to_json(const LaplaceIndex& idx) {
    json j;
    switch (idx.kind) {
        case LaplaceIndex::Kind::Finite:
            j["p"] = idx.p;
            j["certainty"] = idx.probabilistic ? "probabilistic" : "exact";
            break;
        case LaplaceIndex::Kind::AtLeast:
            j["p"] = idx.str();
            j["certainty"] = "lower-bound";
            break;
        case LaplaceIndex::Kind::Blocked:
            j["p"] = idx.str();
            j["certainty"] = "blocked";
            j["blocked_by"] = idx.blocked_by;
            j["step"] = idx.p;
            break;
    }
    json h = json::array();
    for (const auto& e : idx.h) h.push_back(e.str());
    j["H"] = h;
    return j;
}

json to_json(const ClassificationResult& res) {
    json cubic = json::array();
    for (const auto& c : res.cubic) cubic.push_back(c.str());
    json roots = json::array();
    for (const auto& [r, m] : res.roots) roots.push_back({{"root", r}, {"multiplicity", m}});
    return {{"cubic", cubic},
            {"case", res.case_label()},
            {"multiplicities", res.multiplicities},
            {"infinity_multiplicity", res.infinity_multiplicity},
            {"roots", roots},
            {"method", res.exact ? "gcd" : "invariants"},
            {"certainty", res.probabilistic ? "probabilistic" : "exact"}};
}

json to_json(const SymbolData& data) {
    json rels = json::array();
    for (const auto& rel : data.relations) {
        json r = json::array();
        for (const auto& lk : rel) r.push_back({lk[0].str(), lk[1].str(), lk[2].str()});
        rels.push_back(r);
    }
    return {{"kernel_dim", data.kernel_dim},
            {"degenerate", data.degenerate},
            {"relations", rels},
            {"certainty", data.probabilistic ? "probabilistic" : "exact"}};
}

BiForm biform_from_json(const json& j, int n, std::optional<std::pair<int, int>> type) {
    const json* terms = &j;
    if (j.is_object()) {
        terms = &field(j, "form", "form document");
        if (j.contains("type")) {
            auto t = ints_of(j.at("type"), "type");
            if (t.size() != 2) throw InputError("type must be [r, s]");
            type = std::pair{t[0], t[1]};
        }
    }
    if (!terms->is_array()) throw InputError("form must be a list of {monomial, coeff} terms");
    std::optional<BiForm> acc;
    if (type) {
        if (type->first < 0 || type->first > n || type->second < 0) throw InputError("type out of range");
        acc = BiForm::zero(n, type->first, type->second);
    }
    for (const auto& t : *terms) {
        const json& mono = field(t, "monomial", "form term");
        if (!mono.is_array()) throw InputError("monomial must be a list of labels");
        BiForm w = BiForm::function(n, expr_of(field(t, "coeff", "form term"), n, "coeff"));
        for (const auto& l : mono) {
            if (!l.is_string()) throw InputError("monomial labels must be strings");
            w = wedge(w, label_form(l.get<std::string>(), n));
        }
        if (acc && (acc->r != w.r || acc->s != w.s))
            throw InputError("form terms have mixed bidegree (" + std::to_string(acc->r) + "," + std::to_string(acc->s) +
                             ") and (" + std::to_string(w.r) + "," + std::to_string(w.s) + ")");
        acc = acc ? *acc + w : w;
    }
    if (!acc) throw InputError("empty form needs an explicit type [r, s]");
    return *acc;
}

BiForm factor_from_json(const json& j, const SystemSpec& sys) {
    if (j.is_object() && j.contains("dV")) return d_V(expr_of(j.at("dV"), sys.n, "dV"), sys);
    BiForm w = biform_from_json(j, sys.n);
    if (w.r != 0 || w.s != 1) throw InputError("generator factors must be (0,1) forms");
    return w;
}

RhoTriple rho_from_json(const json& j, int n) {
    if (!j.is_object()) throw InputError("rho document must be a JSON object");
    RhoTriple t;
    std::optional<int> s;
    for (const auto& [key, val] : j.items()) {
        if (key.size() != 5 || key.rfind("rho", 0) != 0) throw InputError("unexpected rho key \"" + key + "\"");
        int i = key[3] - '0', k = key[4] - '0';
        if (i < 1 || k > n || i >= k) throw InputError("rho key \"" + key + "\" must name a pair i < j");
        BiForm w = val.is_array() || val.is_object() ? biform_from_json(val, n) : BiForm::function(n, expr_of(val, n, key));
        if (w.r != 0) throw InputError(key + " must be a contact form");
        if (s && *s != w.s + 1) throw InputError("rho entries differ in contact degree");
        s = w.s + 1;
        t.rho[{i, k}] = w;
    }
    t.s = s.value_or(1);
    return t;
}

InvariantBundle bundle_from_json(const json& j, int n) {
    InvariantBundle b;
    b.pair_fields = ints_of(field(j, "pair_fields", "bundle"), "pair_fields");
    b.other_fields = ints_of(field(j, "other_fields", "bundle"), "other_fields");
    b.I = expr_of(field(j, "I", "bundle"), n, "I");
    b.I_t = expr_of(field(j, "I_t", "bundle"), n, "I_t");
    b.J = expr_of(field(j, "J", "bundle"), n, "J");
    b.J_t = expr_of(field(j, "J_t", "bundle"), n, "J_t");
    if (j.contains("K")) b.K = expr_of(j.at("K"), n, "K");
    if (j.contains("K_t")) b.K_t = expr_of(j.at("K_t"), n, "K_t");
    return b;
}

GeneratorInput generator_from_json(const json& j, LawKind kind, const SystemSpec& sys, const ZeroPolicy& policy) {
    if (!j.is_object()) throw InputError("generator inputs must be a JSON object");
    int n = sys.n;
    if (j.contains("sequence")) {
        if (kind != LawKind::OneS) throw InputError("sequence laws are of kind 1s");
        const json& sq = j.at("sequence");
        TotalVectorField X;
        const json& f = field(sq, "field", "sequence");
        if (f.is_object()) {
            X.index = int_of(field(f, "index", "field"), "field index");
            if (f.contains("factor")) X.factor = expr_of(f.at("factor"), n, "field factor");
        } else {
            X.index = int_of(f, "field");
        }
        if (X.index < 1 || X.index > n) throw InputError("sequence field index out of range");
        int m = int_of(field(sq, "m", "sequence"), "m");
        if (m < 1 || m > 6) throw InputError("sequence length m must lie in 1..6");
        auto seq = invariant_sequence(sys, expr_of(field(sq, "I", "sequence"), n, "I"),
                                      expr_of(field(sq, "I_t", "sequence"), n, "I_t"), X, m, policy);
        std::vector<int> eta = j.contains("eta") ? ints_of(j.at("eta"), "eta") : std::vector<int>{};
        GeneratorInput in = sequence_law(seq, int_of(field(j, "l", "generator"), "l"), int_of(field(j, "k", "generator"), "k"), eta);
        in.provenance["sequence_pass"] = seq.pass ? "true" : "false";
        return in;
    }
    GeneratorInput in;
    in.kind = kind;
    if (kind == LawKind::OneS) {
        in.l = int_of(field(j, "l", "generator"), "l");
    } else {
        in.i = int_of(field(j, "i", "generator"), "i");
        in.j = int_of(field(j, "j", "generator"), "j");
    }
    const json& blocks = field(j, "blocks", "generator");
    if (!blocks.is_array()) throw InputError("blocks must be an array");
    for (const auto& b : blocks) {
        LawBlock blk;
        if (b.contains("coefficient")) blk.coefficient = expr_of(b.at("coefficient"), n, "coefficient");
        const json& fs = field(b, "factors", "block");
        if (!fs.is_array()) throw InputError("factors must be an array");
        for (const auto& f : fs) blk.factors.push_back(factor_from_json(f, sys));
        in.blocks.push_back(std::move(blk));
    }
    if (j.contains("provenance")) in.provenance = string_map(j.at("provenance"));
    return in;
}

SymbolData symbol_from_json(const json& j, const ZeroPolicy& policy) {
    const json& M = field(j, "M", "symbol document");
    if (!M.is_array() || M.size() != 3) throw InputError("M must list three 3 x 3 coefficient arrays");
    std::array<QuadraticForm, 3> forms;
    for (int k = 0; k < 3; ++k) {
        if (!M[k].is_array() || M[k].size() != 3) throw InputError("each M entry must be a 3 x 3 array");
        for (int a = 0; a < 3; ++a) {
            if (!M[k][a].is_array() || M[k][a].size() != 3) throw InputError("each M entry must be a 3 x 3 array");
            for (int b = 0; b < 3; ++b) {
                Expr e = expr_of(M[k][a][b], 3, "M coefficient");
                for (const auto& c : e.coordinates())
                    if (c.kind != Coordinate::Kind::Independent)
                        throw InputError("M coefficients may depend on x only, found " + c.name());
                forms[k][a][b] = e;
            }
        }
    }
    if (!j.contains("relations")) return symbol_relations(forms, policy);

    const json& rels = j.at("relations");
    if (!rels.is_array() || rels.size() != 2) throw InputError("relations must list two triples of linear forms");
    SymbolData data;
    data.M = forms;
    data.kernel_dim = 2;
    for (const auto& r : rels) {
        if (!r.is_array() || r.size() != 3) throw InputError("a relation is three linear forms");
        Relation rel;
        for (int k = 0; k < 3; ++k) {
            if (!r[k].is_array() || r[k].size() != 3) throw InputError("a linear form is three coefficients");
            for (int a = 0; a < 3; ++a) rel[k][a] = expr_of(r[k][a], 3, "relation coefficient");
        }
        ZeroVerdict v = relation_holds(forms, rel, policy);
        if (!v.vanishes()) throw InputError("supplied relation does not annihilate M");
        data.probabilistic = data.probabilistic || v.kind == ZeroVerdict::Kind::ProbablyZero;
        data.relations.push_back(rel);
    }
    return data;
}

namespace {

void render(std::ostringstream& os, const json& j, int indent) {
    std::string pad(indent, ' ');
    auto scalar = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    auto flat = [](const json& v) {
        if (!v.is_array()) return false;
        for (const auto& e : v)
            if (e.is_structured()) return false;
        return true;
    };
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) {
            if (v.is_structured() && !flat(v)) {
                os << pad << k << ":\n";
                render(os, v, indent + 2);
            } else if (flat(v)) {
                os << pad << k << ": [";
                for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << scalar(v[i]);
                os << "]\n";
            } else {
                os << pad << k << ": " << scalar(v) << "\n";
            }
        }
    } else if (j.is_array()) {
        for (const auto& v : j) {
            if (v.is_structured() && !flat(v)) {
                os << pad << "-\n";
                render(os, v, indent + 2);
            } else {
                os << pad << "- " << (flat(v) ? v.dump() : scalar(v)) << "\n";
            }
        }
    } else {
        os << pad << scalar(j) << "\n";
    }
}

}  // namespace

std::string render_text(const json& report) {
    std::ostringstream os;
    render(os, report, 0);
    return os.str();
}

}  // namespace vbx
