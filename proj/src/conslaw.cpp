#include "vbx/conslaw.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <set>

namespace vbx {

namespace {

Expr X(const SystemSpec& sys, int i, const Expr& e) { return total_derivative(e, i, sys); }

// nu_m = d/dx^m -| sigma_1 ^ ... ^ sigma_n
BiForm nu(int n, int m) {
    BiForm out = BiForm::function(n, Expr(1));
    int sign = 1, seen = 0;
    for (int k = 1; k <= n; ++k) {
        if (k == m) {
            sign = seen % 2 ? -1 : 1;
            continue;
        }
        out = wedge(out, BiForm::sigma(n, k));
        ++seen;
    }
    return Expr(sign) * out;
}

CheckRow zero_row(std::string label, const Expr& e, const ZeroPolicy& policy) {
    CheckRow r{std::move(label), is_zero(e, policy), true, true};
    r.holds = r.verdict.vanishes();
    return r;
}

CheckRow nonzero_row(std::string label, const Expr& e, const ZeroPolicy& policy) {
    CheckRow r{std::move(label), is_zero(e, policy), false, true};
    r.holds = !r.verdict.vanishes();
    return r;
}

CheckRow form_row(std::string label, const BiForm& w, const ZeroPolicy& policy) {
    FormVerdict v = is_zero(w, policy);
    CheckRow r{std::move(label), v.verdict, true, v.vanishes()};
    return r;
}

std::string field(int i) { return "X" + std::to_string(i); }

bool valid_field(const SystemSpec& sys, int i) { return i >= 1 && i <= sys.n; }

}  // namespace

RhoTriple RhoTriple::functions(const std::map<std::pair<int, int>, Expr>& f, int n) {
    RhoTriple t;
    t.s = 1;
    for (auto& [k, v] : f) t.rho[k] = BiForm::function(n, v);
    return t;
}

BiForm RhoTriple::at(int i, int j, int n) const {
    auto it = rho.find({std::min(i, j), std::max(i, j)});
    if (it == rho.end()) return BiForm::zero(n, 0, s - 1);
    return it->second;
}

std::string ConservationLaw::closure_label() const {
    switch (closure.verdict.kind) {
        case ZeroVerdict::Kind::Zero: return "zero";
        case ZeroVerdict::Kind::ProbablyZero: return "probable";
        case ZeroVerdict::Kind::NonZero: return "failed";
    }
    return "failed";
}

BiForm first_level(const LinearizedSystem& lin, int j, int i) {
    return lie(j, lin.theta, lin.sys) + lin.a(i, j) * lin.theta;
}

BiForm psi_component(const LinearizedSystem& lin, const BiForm& rho, int i, int j, int k) {
    if (k == i) return lie(i, rho, lin.sys) - lin.a(j, i) * rho;
    if (k == j) return lin.a(i, j) * rho - lie(j, rho, lin.sys);
    throw Error("psi component index must belong to the pair");
}

BiForm psi(const LinearizedSystem& lin, const BiForm& rho, int i, int j, PsiConvention convention) {
    if (lin.n != 3) throw Error("the Psi map needs three independent variables");
    if (rho.r != 0) throw Error("rho must be a contact form of type (0, s-1)");
    if (i > j) std::swap(i, j);
    int n = lin.n;
    BiForm out = BiForm::zero(n, 2, rho.s + 1);
    if (rho.is_zero()) return out;
    const BiForm& Th = lin.theta;
    BiForm psi_i = psi_component(lin, rho, i, j, i);
    BiForm psi_j = psi_component(lin, rho, i, j, j);
    Expr half(mpq_class(1, 2));
    if (convention == PsiConvention::Balanced) {
        BiForm xi_i = first_level(lin, i, j), xi_j = first_level(lin, j, i);
        out += half * wedge(nu(n, i), wedge(xi_j, rho) + wedge(Th, psi_j));
        out += half * wedge(nu(n, j), wedge(xi_i, rho) - wedge(Th, psi_i));
        return out;
    }
    // literal pattern with the default-partner adapted elements
    auto partner = [](int m) { return m == 1 ? 2 : 1; };
    int k = third_index(i, j);
    BiForm xi_i = first_level(lin, i, partner(i)), xi_j = first_level(lin, j, partner(j));
    BiForm si = BiForm::sigma(n, i), sj = BiForm::sigma(n, j), sk = BiForm::sigma(n, k);
    out += half * wedge({si, sk, wedge(Th, psi_i) + wedge(xi_i, rho)});
    out -= half * wedge({sj, sk, wedge(Th, psi_j) - wedge(xi_j, rho)});
    return out;
}

FormVerdict verify_closed(const BiForm& w, const SystemSpec& sys, const ZeroPolicy& policy) {
    if (w.r == 0 || w.r >= sys.n)
        throw Error("closure is only meaningful for horizontal degree 1.." + std::to_string(sys.n - 1));
    return is_zero(d_H(w, sys), policy);
}

ConservationLaw conslaw_from_rho(const LinearizedSystem& lin, const RhoTriple& rho, const ZeroPolicy& policy,
                                 PsiConvention convention) {
    if (rho.s < 1) throw Error("rho triple needs s >= 1");
    ConservationLaw law;
    law.form = BiForm::zero(lin.n, 2, rho.s);
    BiForm adj_sum = BiForm::zero(lin.n, 0, rho.s - 1);
    auto adj = adjoint(lin);
    for (auto [i, j] : lin.pairs()) {
        BiForm r = rho.at(i, j, lin.n);
        if (r.s != rho.s - 1 || r.r != 0) throw Error("rho_" + pair_label(i, j) + " has the wrong bidegree");
        law.form += psi(lin, r, i, j, convention);
        adj_sum += apply(adj, i, j, r);
    }
    law.adjoint_sum = is_zero(adj_sum, policy);
    law.closure = verify_closed(law.form, lin.sys, policy);
    law.adapted_order = std::max(0, law.form.max_contact_order());
    law.provenance["generator"] = "psi";
    law.provenance["convention"] = convention == PsiConvention::Balanced ? "balanced" : "printed";
    for (auto [i, j] : lin.pairs()) law.provenance["rho" + pair_label(i, j)] = rho.at(i, j, lin.n).str();
    return law;
}

std::optional<Expr> is_relative_invariant(const BiForm& w, const TotalVectorField& X, const SystemSpec& sys,
                                          const ZeroPolicy& policy) {
    if (w.r != 0) throw Error("relative invariance is defined for (0,s) forms");
    BiForm xw = lie(X, w, sys);
    if (w.is_zero()) return Expr();
    if (xw.is_zero()) return Expr();
    const auto& [mono, c] = *w.terms.begin();
    Expr lambda = xw.coefficient(mono) / c;
    if (!is_zero(xw - lambda * w, policy).vanishes()) return std::nullopt;
    return lambda;
}

DarbouxReport darboux_check(const SystemSpec& sys, const InvariantBundle& b, const ZeroPolicy& policy) {
    auto check_fields = [&](const std::vector<int>& f) {
        std::set<int> s(f.begin(), f.end());
        if (s.size() != f.size() || f.empty()) return false;
        return std::all_of(f.begin(), f.end(), [&](int i) { return valid_field(sys, i); });
    };
    if (!check_fields(b.pair_fields) || !check_fields(b.other_fields))
        throw InputError("bundle fields must be distinct characteristic indices");
    for (int i : b.pair_fields)
        if (std::count(b.other_fields.begin(), b.other_fields.end(), i))
            throw InputError("bundle field groups overlap");
    if (b.pair_fields.size() + b.other_fields.size() != static_cast<std::size_t>(sys.n))
        throw InputError("bundle field groups must cover every characteristic field");
    if (sys.n == 3 && (b.pair_fields.size() != 2 || !b.K || !b.K_t))
        throw InputError("a three-variable bundle needs I, I~ under two fields and J, J~, K, K~ under the third");
    if (sys.n == 2 && (b.K || b.K_t)) throw InputError("a two-variable bundle has no K, K~");

    DarbouxReport rep;
    std::vector<std::pair<std::string, Expr>> first{{"I", b.I}, {"I~", b.I_t}};
    std::vector<std::pair<std::string, Expr>> second{{"J", b.J}, {"J~", b.J_t}};
    if (b.K) second.emplace_back("K", *b.K);
    if (b.K_t) second.emplace_back("K~", *b.K_t);
    for (auto& [name, f] : first)
        for (int i : b.pair_fields) rep.invariance.push_back(zero_row(field(i) + "(" + name + ")", X(sys, i, f), policy));
    for (auto& [name, f] : second)
        for (int i : b.other_fields)
            rep.invariance.push_back(zero_row(field(i) + "(" + name + ")", X(sys, i, f), policy));

    auto independence = [&](const std::vector<std::pair<std::string, Expr>>& fs) {
        IndependenceRow row;
        for (auto& [name, f] : fs) row.label += (row.label.empty() ? "d" : "^d") + name;
        row.functions = static_cast<int>(fs.size());
        std::vector<Expr> red;
        std::set<Coordinate> coords;
        int order = 0;
        for (auto& [name, f] : fs) {
            red.push_back(reduce(f, sys));
            for (auto& c : red.back().coordinates()) coords.insert(c);
            order = std::max(order, red.back().order());
        }
        std::vector<Coordinate> cols(coords.begin(), coords.end());
        std::vector<std::vector<Expr>> jac(red.size());
        for (std::size_t r = 0; r < red.size(); ++r)
            for (auto& c : cols) jac[r].push_back(derive(red[r], c));
        int ok = 0, seen = 0;
        for (int t = 0; t < policy.samples; ++t) {
            JetPoint p = sample_point(sys, std::max(order, 1), policy.seed + 7919u * static_cast<unsigned>(t));
            Eigen::MatrixXd m(red.size(), cols.size());
            bool finite = true;
            try {
                for (std::size_t r = 0; r < red.size(); ++r)
                    for (std::size_t c = 0; c < cols.size(); ++c) {
                        m(r, c) = eval(jac[r][c], p.values);
                        finite = finite && std::isfinite(m(r, c));
                    }
            } catch (const Error&) {
                finite = false;
            }
            if (!finite) continue;
            ++seen;
            if (cols.size() < red.size()) continue;
            Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
            lu.setThreshold(1e-8);
            if (lu.rank() == static_cast<int>(red.size())) ++ok;
        }
        row.points = seen;
        row.full_rank_points = ok;
        row.holds = seen > 0 && ok == seen;
        return row;
    };
    rep.independence.push_back(independence(first));
    rep.independence.push_back(independence(second));
    for (auto& r : rep.invariance) rep.pass = rep.pass && r.holds;
    for (auto& r : rep.independence) rep.pass = rep.pass && r.holds;
    return rep;
}

RescaledFields rescale_characteristics(const SystemSpec& sys, const std::array<TotalVectorField, 4>& Xs, const Expr& I,
                                       const Expr& K, int i, int j, int l, const ZeroPolicy& policy) {
    if (sys.n != 3) throw Error("rescaling needs three characteristic fields");
    std::set<int> idx{i, j, l};
    if (idx != std::set<int>{1, 2, 3}) throw InputError("i, j, l must be a permutation of 1, 2, 3");
    auto apply = [&](const TotalVectorField& F, const Expr& e) { return total_derivative(e, F, sys); };
    RescaledFields out;
    Expr xiK = apply(Xs[i], K), xlI = apply(Xs[l], I), xjK = apply(Xs[j], K);
    out.hypotheses.push_back(zero_row(field(i) + "(I)", apply(Xs[i], I), policy));
    out.hypotheses.push_back(zero_row(field(j) + "(I)", apply(Xs[j], I), policy));
    out.hypotheses.push_back(zero_row(field(l) + "(K)", apply(Xs[l], K), policy));
    out.hypotheses.push_back(nonzero_row(field(i) + "(K)", xiK, policy));
    out.hypotheses.push_back(nonzero_row(field(l) + "(I)", xlI, policy));
    out.hypotheses.push_back(nonzero_row(field(j) + "(K)", xjK, policy));
    for (std::size_t r = 3; r < out.hypotheses.size(); ++r)
        if (!out.hypotheses[r].holds)
            throw HypothesisError(out.hypotheses[r].label, "rescaling denominator " + out.hypotheses[r].label + " vanishes");
    auto scaled = [&](const TotalVectorField& F, const Expr& d) {
        TotalVectorField g = F;
        Expr f = (F.factor ? *F.factor : Expr(1)) / d;
        g.factor = f.is_one() ? std::nullopt : std::optional<Expr>(f);
        return g;
    };
    out.fields[i] = scaled(Xs[i], xiK);
    out.fields[l] = scaled(Xs[l], xlI);
    out.fields[j] = scaled(Xs[j], xjK);
    // every field is a multiple of some D_m, so the coordinates x^m detect the whole commutator
    auto commutator = [&](int a, int b) {
        Expr worst;
        ZeroVerdict v;
        for (int m = 1; m <= 3; ++m) {
            Expr xm = Expr::coord(Coordinate::x(m));
            Expr c = apply(out.fields[a], apply(out.fields[b], xm)) - apply(out.fields[b], apply(out.fields[a], xm));
            v = combine(v, is_zero(c, policy));
        }
        CheckRow r{"[X~" + std::to_string(a) + ",X~" + std::to_string(b) + "]", v, true, v.vanishes()};
        return r;
    };
    out.commutators.push_back(commutator(i, l));
    out.commutators.push_back(commutator(j, l));
    for (auto& r : out.hypotheses) out.pass = out.pass && r.holds;
    for (auto& r : out.commutators) out.pass = out.pass && r.holds;
    return out;
}

InvariantForm invariant_contact_form(const SystemSpec& sys, const ContactFormSpec& spec, const ZeroPolicy& policy) {
    if (!valid_field(sys, spec.l)) throw InputError("field index out of range");
    InvariantForm out;
    std::vector<int> others;
    for (int m = 1; m <= sys.n; ++m)
        if (m != spec.l) others.push_back(m);
    auto fail_on = [&](const std::vector<CheckRow>& rows) {
        for (auto& r : rows)
            if (!r.holds) throw HypothesisError(r.label, "hypothesis " + r.label + " fails");
    };
    if (spec.kind == ContactFormKind::ThreeFunction) {
        if (sys.n != 3 || !spec.K) throw InputError("the three-function form needs n = 3 and I, J, K");
        int i = others[0], j = others[1];
        const Expr& K = *spec.K;
        for (auto& [name, f] : std::vector<std::pair<std::string, Expr>>{{"I", spec.I}, {"J", spec.J}, {"K", K}})
            out.hypotheses.push_back(zero_row(field(spec.l) + "(" + name + ")", X(sys, spec.l, f), policy));
        out.hypotheses.push_back(zero_row(field(i) + "(I)-1", X(sys, i, spec.I) - Expr(1), policy));
        out.hypotheses.push_back(zero_row(field(j) + "(I)", X(sys, j, spec.I), policy));
        out.hypotheses.push_back(zero_row(field(i) + "(J)", X(sys, i, spec.J), policy));
        out.hypotheses.push_back(zero_row(field(j) + "(J)-1", X(sys, j, spec.J) - Expr(1), policy));
        fail_on(out.hypotheses);
        Expr k1 = X(sys, i, K), k2 = X(sys, j, K);
        out.form = d_V(K, sys) - k1 * d_V(spec.I, sys) - k2 * d_V(spec.J, sys);
        out.invariant_under = {spec.l};
    } else {
        for (int m : others) {
            out.hypotheses.push_back(zero_row(field(m) + "(I)", X(sys, m, spec.I), policy));
            out.hypotheses.push_back(zero_row(field(m) + "(J)", X(sys, m, spec.J), policy));
        }
        out.hypotheses.push_back(zero_row(field(spec.l) + "(J)-1", X(sys, spec.l, spec.J) - Expr(1), policy));
        fail_on(out.hypotheses);
        out.form = d_V(spec.I, sys) - X(sys, spec.l, spec.I) * d_V(spec.J, sys);
        out.invariant_under = others;
    }
    for (int m : out.invariant_under)
        out.invariance.push_back(form_row(field(m) + "(omega)", lie(m, out.form, sys), policy));
    for (auto& r : out.invariance) out.pass = out.pass && r.holds;
    return out;
}

InvariantSequence invariant_sequence(const SystemSpec& sys, const Expr& I1, const Expr& It1, const TotalVectorField& Xf,
                                     int m, const ZeroPolicy& policy) {
    if (m < 1) throw InputError("sequence length must be positive");
    auto D = [&](const Expr& e) { return total_derivative(e, Xf, sys); };
    ZeroVerdict norm = is_zero(D(It1) - Expr(1), policy);
    if (!norm.vanishes()) throw HypothesisError("X(I~)-1", "the sequence needs X(I~) = 1");
    InvariantSequence out;
    out.I.push_back(I1);
    for (int k = 0; k < m + 1; ++k) out.I.push_back(D(out.I.back()));
    BiForm dvt = d_V(It1, sys);
    for (int k = 0; k <= m; ++k) out.alpha.push_back(d_V(out.I[k], sys) - out.I[k + 1] * dvt);
    BiForm dht = d_H(It1, sys);
    for (int k = 0; k + 1 < m; ++k) {
        const BiForm& a = out.alpha[k];
        const BiForm& b = out.alpha[k + 1];
        FormVerdict h = is_zero(d_H(a, sys) - wedge(dht, b), policy);
        FormVerdict v = is_zero(d_V(a, sys) - wedge(dvt, b), policy);
        FormVerdict r = h.vanishes() ? v : h;
        r.verdict = combine(h.verdict, v.verdict);
        out.residuals.push_back(r);
        out.pass = out.pass && r.vanishes();
    }
    out.I.resize(m + 1);
    out.alpha.resize(m);
    return out;
}

GeneratorInput sequence_law(const InvariantSequence& seq, int l, int k, const std::vector<int>& eta) {
    auto alpha = [&](int q) -> const BiForm& {
        if (q < 1 || q > static_cast<int>(seq.alpha.size()))
            throw InputError("alpha_" + std::to_string(q) + " lies outside the computed sequence");
        return seq.alpha[q - 1];
    };
    GeneratorInput in;
    in.kind = LawKind::OneS;
    in.l = l;
    LawBlock b;
    b.factors = {alpha(k + 1), alpha(k)};
    for (int e : eta) {
        if (e >= k) throw InputError("eta factors must have adapted order below k");
        b.factors.push_back(alpha(e));
    }
    in.blocks.push_back(std::move(b));
    in.provenance["generator"] = "sequence";
    in.provenance["k"] = std::to_string(k);
    return in;
}

ConservationLaw generate_cl(const SystemSpec& sys, const GeneratorInput& in, const ZeroPolicy& policy) {
    int n = sys.n;
    BiForm head = BiForm::function(n, Expr(1));
    std::vector<int> invariant_under;
    if (in.kind == LawKind::OneS) {
        if (!valid_field(sys, in.l)) throw InputError("field index out of range");
        head = BiForm::sigma(n, in.l);
        for (int m = 1; m <= n; ++m)
            if (m != in.l) invariant_under.push_back(m);
    } else {
        if (n != 3) throw InputError("(2,s) generators need three independent variables");
        if (!valid_field(sys, in.i) || !valid_field(sys, in.j) || in.i == in.j)
            throw InputError("horizontal pair must be two distinct fields");
        head = wedge(BiForm::sigma(n, in.i), BiForm::sigma(n, in.j));
        invariant_under.push_back(third_index(in.i, in.j));
    }
    if (in.blocks.empty()) throw InputError("generator needs at least one block");
    int s = static_cast<int>(in.blocks.front().factors.size());
    BiForm body = BiForm::zero(n, 0, s);
    for (std::size_t b = 0; b < in.blocks.size(); ++b) {
        const auto& blk = in.blocks[b];
        if (static_cast<int>(blk.factors.size()) != s) throw InputError("generator blocks differ in degree");
        std::string tag = "block" + std::to_string(b + 1);
        for (int m : invariant_under) {
            auto v = is_zero(X(sys, m, blk.coefficient), policy);
            if (!v.vanishes())
                throw HypothesisError(field(m) + "(" + tag + ".coefficient)", "generator coefficient is not invariant");
        }
        BiForm w = BiForm::function(n, blk.coefficient);
        for (std::size_t f = 0; f < blk.factors.size(); ++f) {
            const BiForm& fac = blk.factors[f];
            if (fac.r != 0 || fac.s != 1) throw InputError("generator factors must be (0,1) forms");
            for (int m : invariant_under)
                if (!is_zero(lie(m, fac, sys), policy).vanishes())
                    throw HypothesisError(field(m) + "(" + tag + ".factor" + std::to_string(f + 1) + ")",
                                          "generator factor is not invariant");
            w = wedge(w, fac);
        }
        body += w;
    }
    ConservationLaw law;
    law.form = wedge(head, body);
    law.closure = verify_closed(law.form, sys, policy);
    law.adapted_order = std::max(0, law.form.max_contact_order());
    law.provenance = in.provenance;
    law.provenance["kind"] = in.kind == LawKind::OneS ? "1s" : "2s";
    return law;
}

}  // namespace vbx
