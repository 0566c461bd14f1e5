#include "vbx/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "vbx/report.hpp"

namespace vbx {

namespace {

constexpr std::uint64_t kDefaultSeed = 0x5eed;

// A verdict failure that still produces a report.
struct Failed {
    json report;
};

struct Common {
    std::string path;
    bool json_out = false;
    std::uint64_t seed = kDefaultSeed;
    int samples = 20;
    double tol = 1e-9;
    int order_budget = 0;  // 0 keeps the system's own budget
};

struct Options {
    Common common;
    std::string mu;
    std::string dir;
    int times = 1;
    int cap = 10;
    int order = 2;
    bool verify = false;
    std::string partners;
    std::string rho, form, bundle, inputs;
    std::string convention = "balanced";
    std::string kind;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json load_json(const std::string& path) {
    try {
        return json::parse(slurp(path));
    } catch (const json::parse_error& e) {
        throw InputError(path + ": malformed JSON: " + e.what());
    }
}

std::vector<int> index_list(const std::string& text, const std::string& what) {
    std::vector<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.size() != 1 || item[0] < '1' || item[0] > '3') throw InputError(what + " must list indices in 1..3");
        out.push_back(item[0] - '0');
    }
    return out;
}

std::pair<int, int> direction(const std::string& text, int n) {
    auto d = index_list(text, "--dir");
    if (d.size() != 2 || d[0] == d[1] || d[0] > n || d[1] > n)
        throw InputError("--dir needs two distinct indices i,j in 1.." + std::to_string(n));
    return {d[0], d[1]};
}

struct Context {
    SystemSpec sys;
    ZeroPolicy policy;
    json report;
};

Context open_system(const Common& c, const std::string& command) {
    Context ctx;
    ctx.sys = load_system(slurp(c.path));
    if (c.order_budget > 0) ctx.sys.order_budget = c.order_budget;
    ctx.policy = system_policy(ctx.sys, c.seed, c.samples, c.tol);
    ctx.report = {{"tool", "vbx"},   {"version", kVersion}, {"command", command},
                  {"system", ctx.sys.name}, {"n", ctx.sys.n},    {"seed", c.seed},
                  {"tolerance", c.tol},     {"samples", c.samples}};
    return ctx;
}

Expr parse_mu(const Options& o, int n) {
    if (o.mu.empty()) return Expr(1);
    try {
        return Expr::parse(o.mu, n);
    } catch (const ParseError& e) {
        throw InputError(std::string("--mu: ") + e.what());
    }
}

json coefficients(const LinearizedSystem& lin) {
    json A = json::object(), C = json::object();
    for (auto [i, j] : lin.pairs()) {
        std::string p = pair_label(i, j);
        A["A^" + std::to_string(i) + "_" + p] = lin.a(i, j).str();
        A["A^" + std::to_string(j) + "_" + p] = lin.a(j, i).str();
        C["C_" + p] = lin.c(i, j).str();
    }
    return {{"A", A}, {"C", C}};
}

json invariant_map(const LinearizedSystem& lin) {
    auto inv = invariants(lin);
    json out = json::object();
    for (const auto& [k, h] : inv.pair) out["H_" + pair_label(k.first, k.second)] = h.str();
    for (const auto& [k, h] : inv.triple)
        out["H_" + triple_label(std::get<0>(k), std::get<1>(k), std::get<2>(k))] = h.str();
    return out;
}

json provenance(const LinearizedSystem& lin) {
    json p = json::array();
    for (auto [i, j] : lin.provenance) p.push_back(pair_label(i, j));
    return p;
}

bool finish(json& report, bool pass) {
    report["pass"] = pass;
    if (!pass) throw Failed{report};
    return pass;
}

json cmd_check(const Options& o) {
    auto ctx = open_system(o.common, "check");
    auto rep = check_involutive(ctx.sys, ctx.policy);
    json rows = json::array();
    for (const auto& ic : rep.identities) {
        json r = to_json(ic.verdict);
        r["label"] = ic.label;
        r["residual"] = ic.residual.str();
        rows.push_back(r);
        if (!ic.verdict.vanishes() && !ctx.report.contains("witness"))
            ctx.report["witness"] = {{"relation", ic.label}, {"residual", ic.residual.str()}};
    }
    ctx.report["identities"] = rows;
    finish(ctx.report, rep.pass);
    return ctx.report;
}

json cmd_linearize(const Options& o) {
    auto ctx = open_system(o.common, "linearize");
    Expr mu = parse_mu(o, ctx.sys.n);
    auto lin = linearize(ctx.sys, mu, &ctx.policy);
    ctx.report["mu"] = mu.str();
    ctx.report["coefficients"] = coefficients(lin);
    ctx.report["theta"] = to_json(lin.theta);
    bool pass = true;
    if (ctx.sys.n == 3) {
        auto comp = compatibility(lin, ctx.policy);
        json rows = json::array();
        for (const auto& rc : comp.relations) {
            json r = to_json(rc.verdict);
            r["label"] = rc.label;
            rows.push_back(r);
        }
        ctx.report["compatibility"] = rows;
        pass = comp.pass;
    }
    finish(ctx.report, pass);
    return ctx.report;
}

json cmd_invariants(const Options& o) {
    auto ctx = open_system(o.common, "invariants");
    Expr mu = parse_mu(o, ctx.sys.n);
    auto lin = linearize(ctx.sys, mu, &ctx.policy);
    ctx.report["mu"] = mu.str();
    ctx.report["invariants"] = invariant_map(lin);
    json verdicts = json::object();
    auto inv = invariants(lin);
    for (const auto& [k, h] : inv.pair) verdicts["H_" + pair_label(k.first, k.second)] = to_json(is_zero(h, ctx.policy));
    for (const auto& [k, h] : inv.triple)
        verdicts["H_" + triple_label(std::get<0>(k), std::get<1>(k), std::get<2>(k))] = to_json(is_zero(h, ctx.policy));
    ctx.report["vanishing"] = verdicts;
    finish(ctx.report, true);
    return ctx.report;
}

json cmd_transform(const Options& o) {
    auto ctx = open_system(o.common, "transform");
    auto [i, j] = direction(o.dir, ctx.sys.n);
    auto lin = linearize(ctx.sys, parse_mu(o, ctx.sys.n), &ctx.policy);
    ctx.report["direction"] = pair_label(i, j);
    ctx.report["times"] = o.times;
    for (int t = 0; t < o.times; ++t) {
        try {
            lin = transform(lin, i, j, ctx.policy);
        } catch (const InvariantVanishes& e) {
            ctx.report["error"] = {{"type", "InvariantVanishes"}, {"which", e.which}, {"step", t}, {"message", e.what()}};
            ctx.report["provenance"] = provenance(lin);
            finish(ctx.report, false);
        }
    }
    ctx.report["coefficients"] = coefficients(lin);
    ctx.report["invariants"] = invariant_map(lin);
    ctx.report["provenance"] = provenance(lin);
    ctx.report["theta"] = to_json(lin.theta);
    auto ann = annihilation_check(lin, ctx.policy);
    json rows = json::array();
    for (const auto& [label, v] : ann.pairs) {
        json r = to_json(v);
        r["label"] = label;
        rows.push_back(r);
    }
    ctx.report["annihilation"] = rows;
    finish(ctx.report, ann.pass);
    return ctx.report;
}

json cmd_indices(const Options& o) {
    auto ctx = open_system(o.common, "indices");
    auto lin = linearize(ctx.sys, parse_mu(o, ctx.sys.n), &ctx.policy);
    ctx.report["cap"] = o.cap;
    json p = json::object(), detail = json::object();
    for (int i = 1; i <= ctx.sys.n; ++i)
        for (int j = 1; j <= ctx.sys.n; ++j) {
            if (i == j) continue;
            auto idx = index(lin, i, j, o.cap, ctx.policy);
            json d = to_json(idx);
            p[pair_label(i, j)] = d["p"];
            detail[pair_label(i, j)] = d;
        }
    ctx.report["p"] = p;
    ctx.report["indices"] = detail;
    finish(ctx.report, true);
    return ctx.report;
}

json cmd_adjoint(const Options& o) {
    auto ctx = open_system(o.common, "adjoint");
    auto lin = linearize(ctx.sys, parse_mu(o, ctx.sys.n), &ctx.policy);
    auto adj = adjoint(lin);
    json A = json::object(), C = json::object();
    for (auto [i, j] : adj.pairs()) {
        std::string p = pair_label(i, j);
        A["A*^" + std::to_string(i) + "_" + p] = adj.a(i, j).str();
        A["A*^" + std::to_string(j) + "_" + p] = adj.a(j, i).str();
        C["C*_" + p] = adj.c(i, j).str();
    }
    ctx.report["adjoint"] = {{"A", A}, {"C", C}};
    auto back = adjoint(adj);
    ZeroVerdict inv;
    for (auto [i, j] : lin.pairs()) {
        inv = combine(inv, is_zero(back.a(i, j) - lin.a(i, j), ctx.policy));
        inv = combine(inv, is_zero(back.a(j, i) - lin.a(j, i), ctx.policy));
        inv = combine(inv, is_zero(back.c(i, j) - lin.c(i, j), ctx.policy));
    }
    ctx.report["involution"] = to_json(inv);
    finish(ctx.report, inv.vanishes());
    return ctx.report;
}

json cmd_coframe(const Options& o) {
    auto ctx = open_system(o.common, "coframe");
    auto lin = linearize(ctx.sys, parse_mu(o, ctx.sys.n), &ctx.policy);
    std::optional<std::array<int, 4>> partners;
    if (!o.partners.empty()) {
        auto p = index_list(o.partners, "--partners");
        if (static_cast<int>(p.size()) != ctx.sys.n) throw InputError("--partners needs one index per branch");
        std::array<int, 4> arr{};
        for (int j = 1; j <= ctx.sys.n; ++j) {
            if (p[j - 1] == j || p[j - 1] > ctx.sys.n) throw InputError("--partners: branch partner must differ from the branch");
            arr[j] = p[j - 1];
        }
        partners = arr;
    }
    // Structure rows at level m involve level m + 1.
    auto cf = build_coframe(lin, o.order + (o.verify ? 1 : 0), ctx.policy, partners);
    ctx.report["order"] = o.order;
    json part = json::object();
    for (int j = 1; j <= cf.n; ++j) part[std::to_string(j)] = cf.partner[j];
    ctx.report["partners"] = part;
    json elems = json::array();
    elems.push_back({{"label", AdaptedCoframe::label(0, 0)}, {"expansion", to_json(cf.theta)}});
    for (int j = 1; j <= cf.n; ++j)
        for (int m = 1; m <= o.order; ++m)
            elems.push_back({{"label", AdaptedCoframe::label(j, m)},
                             {"branch", j},
                             {"level", m},
                             {"expansion", to_json(cf.element(j, m))}});
    ctx.report["elements"] = elems;
    bool pass = true;
    if (o.verify) {
        auto st = structure_check(cf, lin, o.order, ctx.policy);
        json rows = json::array();
        for (const auto& r : st.rows) {
            json row = to_json(r.verdict);
            row["element"] = r.element;
            row["sigma"] = r.sigma;
            row["congruence"] = r.congruence;
            if (!r.modulo.empty()) row["modulo"] = r.modulo;
            if (!r.component.empty()) row["component"] = r.component;
            rows.push_back(row);
        }
        std::vector<int> fields;
        for (int k = 1; k <= cf.n; ++k) fields.push_back(k);
        auto br = bracket_check(cf, lin, fields, ctx.policy);
        json brows = json::array();
        for (const auto& r : br.rows) {
            json row = to_json(r.verdict);
            row["label"] = r.label;
            if (!r.component.empty()) row["component"] = r.component;
            brows.push_back(row);
        }
        ctx.report["structure"] = rows;
        ctx.report["brackets"] = brows;
        pass = st.pass && br.pass;
    }
    finish(ctx.report, pass);
    return ctx.report;
}

void merge(json& into, const json& from) {
    for (const auto& [k, v] : from.items()) into[k] = v;
}

json cmd_conslaw(const Options& o) {
    auto ctx = open_system(o.common, "conslaw");
    auto rho = rho_from_json(load_json(o.rho), ctx.sys.n);
    PsiConvention conv = o.convention == "printed" ? PsiConvention::Printed : PsiConvention::Balanced;
    auto lin = linearize(ctx.sys, parse_mu(o, ctx.sys.n), &ctx.policy);
    auto law = conslaw_from_rho(lin, rho, ctx.policy, conv);
    merge(ctx.report, to_json(law));
    finish(ctx.report, law.closed());
    return ctx.report;
}

json cmd_verify(const Options& o) {
    auto ctx = open_system(o.common, "verify");
    BiForm w = biform_from_json(load_json(o.form), ctx.sys.n);
    auto v = verify_closed(w, ctx.sys, ctx.policy);
    ctx.report["type"] = {w.r, w.s};
    ctx.report["form"] = to_json(w);
    ctx.report["closure"] = v.verdict.kind == ZeroVerdict::Kind::Zero           ? "zero"
                            : v.verdict.kind == ZeroVerdict::Kind::ProbablyZero ? "probable"
                                                                                : "failed";
    ctx.report["closure_verdict"] = to_json(v);
    ctx.report["adapted_order"] = w.max_contact_order();
    finish(ctx.report, v.vanishes());
    return ctx.report;
}

json cmd_darboux(const Options& o) {
    auto ctx = open_system(o.common, "darboux");
    auto bundle = bundle_from_json(load_json(o.bundle), ctx.sys.n);
    auto rep = darboux_check(ctx.sys, bundle, ctx.policy);
    json inv = json::array(), ind = json::array();
    for (const auto& r : rep.invariance) inv.push_back(to_json(r));
    for (const auto& r : rep.independence)
        ind.push_back({{"label", r.label},
                       {"functions", r.functions},
                       {"full_rank_points", r.full_rank_points},
                       {"points", r.points},
                       {"holds", r.holds}});
    ctx.report["invariance"] = inv;
    ctx.report["independence"] = ind;
    finish(ctx.report, rep.pass);
    return ctx.report;
}

json cmd_generate(const Options& o) {
    auto ctx = open_system(o.common, "generate");
    LawKind kind = o.kind == "2s" ? LawKind::TwoS : LawKind::OneS;
    auto in = generator_from_json(load_json(o.inputs), kind, ctx.sys, ctx.policy);
    auto law = generate_cl(ctx.sys, in, ctx.policy);
    merge(ctx.report, to_json(law));
    finish(ctx.report, law.closed());
    return ctx.report;
}

json cmd_classify(const Options& o) {
    json doc = load_json(o.common.path);
    if (!doc.is_object()) throw InputError("classify input must be a JSON object");
    json report;
    SymbolData data;
    if (doc.contains("n")) {
        auto ctx = open_system(o.common, "classify");
        report = ctx.report;
        try {
            data = symbol_relations(ctx.sys, ctx.policy);
        } catch (const NonInvolutiveSymbol& e) {
            report["error"] = {{"type", "NonInvolutiveSymbol"}, {"kernel_dim", e.kernel_dim}, {"message", e.what()}};
            finish(report, false);
        }
    } else {
        ZeroPolicy policy;
        policy.seed = o.common.seed;
        policy.samples = o.common.samples;
        policy.tol = o.common.tol;
        report = {{"tool", "vbx"},           {"version", kVersion},    {"command", "classify"},
                  {"seed", o.common.seed},   {"tolerance", o.common.tol}, {"samples", o.common.samples}};
        try {
            data = symbol_from_json(doc, policy);
        } catch (const NonInvolutiveSymbol& e) {
            report["error"] = {{"type", "NonInvolutiveSymbol"}, {"kernel_dim", e.kernel_dim}, {"message", e.what()}};
            finish(report, false);
        }
    }
    report["symbol"] = to_json(data);
    if (data.relations.size() != 2) {
        report["error"] = {{"type", "DegenerateSymbol"},
                           {"message", "relation kernel has dimension " + std::to_string(data.kernel_dim) +
                                           "; the pencil needs exactly two relations"}};
        finish(report, false);
    }
    ZeroPolicy policy;
    policy.seed = o.common.seed;
    policy.samples = o.common.samples;
    policy.tol = o.common.tol;
    merge(report, to_json(classify(data, policy)));
    finish(report, true);
    return report;
}

void emit(const json& report, bool as_json, std::ostream& out) {
    if (as_json)
        out << report.dump(2) << "\n";
    else
        out << render_text(report);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"vbx: conservation laws and Laplace invariants of u_ij = f_ij systems", "vbx"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    Options o;
    std::function<json(const Options&)> action;

    auto sub = [&](const std::string& name, const std::string& desc, json (*fn)(const Options&)) {
        CLI::App* s = app.add_subcommand(name, desc);
        s->add_option("spec", o.common.path, "system spec JSON")->required();
        s->add_flag("--json", o.common.json_out, "emit JSON");
        s->add_option("--seed", o.common.seed, "sampling seed (VBX_SEED overrides)");
        s->add_option("--samples", o.common.samples, "sample points per zero test")->check(CLI::Range(1, 10000));
        s->add_option("--tol", o.common.tol, "relative zero-test tolerance")->check(CLI::PositiveNumber);
        s->add_option("--order-budget", o.common.order_budget, "maximum jet order")->check(CLI::Range(2, 64));
        s->callback([&action, fn] { action = fn; });
        return s;
    };

    auto mu_opt = [&](CLI::App* s) { s->add_option("--mu", o.mu, "rescaling of theta"); };

    mu_opt(sub("check", "compatibility identities of the system", cmd_check));
    mu_opt(sub("linearize", "linearized operators and their compatibility", cmd_linearize));
    mu_opt(sub("invariants", "generalized Laplace invariants", cmd_invariants));
    auto* tr = sub("transform", "iterate the (i,j) Laplace transform", cmd_transform);
    tr->add_option("--dir", o.dir, "direction i,j")->required();
    tr->add_option("--times", o.times, "number of transforms")->check(CLI::Range(1, 50));
    mu_opt(tr);
    auto* ix = sub("indices", "Laplace indices in every direction", cmd_indices);
    ix->add_option("--cap", o.cap, "transform cap")->check(CLI::Range(0, 100));
    mu_opt(ix);
    mu_opt(sub("adjoint", "formal adjoint operators", cmd_adjoint));
    auto* cf = sub("coframe", "Laplace-adapted coframe", cmd_coframe);
    cf->add_option("--order", o.order, "coframe order")->check(CLI::Range(1, 8));
    cf->add_flag("--verify", o.verify, "check structure equations and brackets");
    cf->add_option("--partners", o.partners, "partner index per branch, e.g. 2,1,1");
    mu_opt(cf);
    auto* cl = sub("conslaw", "(2,s) law from an adjoint-kernel rho triple", cmd_conslaw);
    cl->add_option("--rho", o.rho, "rho triple JSON")->required();
    cl->add_option("--convention", o.convention, "Psi sign pattern")->check(CLI::IsMember({"balanced", "printed"}));
    mu_opt(cl);
    auto* vf = sub("verify", "d_H closure of a form", cmd_verify);
    vf->add_option("--form", o.form, "form JSON")->required();
    auto* db = sub("darboux", "invariance and independence of a Darboux bundle", cmd_darboux);
    db->add_option("--bundle", o.bundle, "bundle JSON")->required();
    auto* gn = sub("generate", "law from invariant forms", cmd_generate);
    gn->add_option("--kind", o.kind, "1s or 2s")->required()->check(CLI::IsMember({"1s", "2s"}));
    gn->add_option("--inputs", o.inputs, "generator inputs JSON")->required();
    sub("classify", "symbol classification", cmd_classify);

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    if (const char* env = std::getenv("VBX_SEED")) {
        try {
            std::size_t used = 0;
            std::string s(env);
            o.common.seed = std::stoull(s, &used, 0);
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            err << "vbx: error: VBX_SEED must be an unsigned integer\n";
            return kExitInput;
        }
    }

    try {
        emit(action(o), o.common.json_out, out);
        return kExitOk;
    } catch (const Failed& f) {
        emit(f.report, o.common.json_out, out);
        return kExitFailed;
    } catch (const InputError& e) {
        err << "vbx: input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const ParseError& e) {
        err << "vbx: input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const HypothesisError& e) {
        json r{{"tool", "vbx"}, {"version", kVersion}, {"seed", o.common.seed}, {"tolerance", o.common.tol},
               {"pass", false}, {"error", {{"type", "HypothesisError"}, {"label", e.label}, {"message", e.what()}}}};
        emit(r, o.common.json_out, out);
        return kExitFailed;
    } catch (const OrderBudgetExceeded& e) {
        err << "vbx: order budget exceeded: " << e.what() << "\n";
        return kExitFailed;
    } catch (const IndeterminateError& e) {
        err << "vbx: zero test indeterminate: " << e.what() << "\n";
        return kExitFailed;
    } catch (const Error& e) {
        err << "vbx: error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        err << "vbx: internal error: " << e.what() << "\n";
        return kExitInput;
    }
}

int run(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int k = 1; k < argc; ++k) args.emplace_back(argv[k]);
    return run(args, std::cout, std::cerr);
}

}  // namespace vbx
