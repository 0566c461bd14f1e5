#include "vbx/coframe.hpp"

#include <set>

namespace vbx {

namespace {

Expr X(const LinearizedSystem& lin, int i, const Expr& e) { return total_derivative(e, i, lin.sys); }

// alpha(m) of the recursion: the cascade coefficient while the index is not exceeded, then 0.
Expr cascade_alpha(const PairCascade& pc, int m) {
    if (pc.p && m > *pc.p) return Expr();
    if (m >= static_cast<int>(pc.a_i.size())) throw Error("pair cascade too short for coframe level " + std::to_string(m));
    return pc.a_i[m];
}

Expr coefficient_of(const BiForm& w, Contact c) { return w.coefficient({0, {c}}); }

std::string dual_label(int j, int m) {
    if (m == 0) return "U";
    return "V" + std::to_string(j) + "^" + std::to_string(m);
}

}  // namespace

PairCascade pair_cascade(const LinearizedSystem& lin, int i, int j, int steps, const ZeroPolicy& policy) {
    PairCascade pc;
    pc.i = i;
    pc.j = j;
    Expr ai = lin.a(i, j), aj = lin.a(j, i), c = lin.c(i, j);
    for (int m = 0; m <= steps; ++m) {
        Expr h = X(lin, i, ai) + ai * aj - c;
        pc.a_i.push_back(ai);
        pc.a_j.push_back(aj);
        pc.c.push_back(c);
        pc.h.push_back(h);
        ZeroVerdict v = is_zero(h, policy);
        if (v.vanishes()) {
            pc.p = m;
            pc.probabilistic = v.kind == ZeroVerdict::Kind::ProbablyZero;
            break;
        }
        if (m == steps) break;
        Expr next_c = aj * ai + h * (X(lin, j, aj / h) - Expr(1));
        ai = ai - X(lin, j, h) / h;
        c = next_c;
    }
    return pc;
}

const BiForm& AdaptedCoframe::element(int j, int m) const {
    if (m == 0) return theta;
    auto it = xi.find(j);
    if (it == xi.end() || m < 1 || m > static_cast<int>(it->second.size()))
        throw Error("coframe has no element " + label(j, m));
    return it->second[m - 1];
}

std::string AdaptedCoframe::label(int j, int m) {
    if (m == 0) return "Th";
    return "xi:" + std::to_string(j) + "^" + std::to_string(m);
}

AdaptedCoframe build_coframe(const LinearizedSystem& lin, int order, const ZeroPolicy& policy,
                             std::optional<std::array<int, 4>> partners) {
    if (order < 1) throw Error("coframe order must be at least 1");
    if (order > lin.sys.order_budget)
        throw OrderBudgetExceeded("coframe order " + std::to_string(order) + " exceeds the order budget " +
                                  std::to_string(lin.sys.order_budget));
    AdaptedCoframe cf;
    cf.n = lin.n;
    cf.order = order;
    cf.mu = lin.mu;
    cf.theta = lin.theta;
    for (int j = 1; j <= lin.n; ++j) {
        int i = j == 1 ? 2 : 1;
        if (partners) i = (*partners)[j];
        if (i < 1 || i > lin.n || i == j) throw Error("invalid partner index for branch " + std::to_string(j));
        cf.partner[j] = i;
        PairCascade pc = pair_cascade(lin, i, j, order - 1, policy);
        auto& alpha = cf.alpha[j];
        for (int m = 0; m < order; ++m) alpha.push_back(cascade_alpha(pc, m));
        cf.cascade[j] = std::move(pc);
        auto& branch = cf.xi[j];
        BiForm prev = cf.theta;
        for (int m = 0; m < order; ++m) {
            BiForm next = lie(j, prev, lin.sys) + alpha[m] * prev;
            branch.push_back(next);
            prev = std::move(next);
        }
        // triangular with leading coefficient mu on theta_{j^m}
        for (int m = 1; m <= order; ++m) {
            const BiForm& e = branch[m - 1];
            for (auto& [mono, coeff] : e.terms) {
                const Contact& k = mono.c.at(0);
                if (k.order != 0 && (k.branch != j || k.order > m))
                    throw Error("coframe element " + AdaptedCoframe::label(j, m) + " is not triangular");
            }
            if (!is_zero(coefficient_of(e, {j, m}) - cf.mu, policy).vanishes())
                throw Error("coframe element " + AdaptedCoframe::label(j, m) + " has the wrong leading coefficient");
        }
    }
    return cf;
}

std::map<int, std::vector<BiForm>> characteristic_coframe(const LinearizedSystem& lin, int order) {
    std::map<int, std::vector<BiForm>> out;
    for (int i = 1; i <= lin.n; ++i) {
        BiForm prev = lin.theta;
        for (int k = 1; k <= order; ++k) {
            prev = lie(i, prev, lin.sys);
            out[i].push_back(prev);
        }
    }
    return out;
}

std::map<std::pair<int, int>, Expr> to_adapted(const BiForm& w, const AdaptedCoframe& cf) {
    std::map<std::pair<int, int>, Expr> out;
    if (w.is_zero()) return out;
    if (w.r != 0 || w.s != 1) throw Error("adapted expansion needs a (0,1) form");
    if (w.max_contact_order() > cf.order)
        throw Error("coframe order " + std::to_string(cf.order) + " does not cover contact order " +
                    std::to_string(w.max_contact_order()));
    BiForm rest = w;
    for (int j = 1; j <= cf.n; ++j)
        for (int m = cf.order; m >= 1; --m) {
            Expr c = coefficient_of(rest, {j, m});
            if (c.is_zero()) continue;
            const BiForm& e = cf.element(j, m);
            Expr a = c / coefficient_of(e, {j, m});
            rest -= a * e;
            out[{j, m}] = a;
        }
    for (auto& [mono, coeff] : rest.terms)
        if (mono.c.at(0).order != 0) throw Error("adapted expansion left a residual contact term");
    Expr t = coefficient_of(rest, {});
    if (!t.is_zero()) out[{0, 0}] = t / cf.mu;
    return out;
}

int adapted_order(const BiForm& w, const AdaptedCoframe& cf) {
    int o = w.max_contact_order();
    if (o > cf.order) throw Error("coframe order " + std::to_string(cf.order) + " is insufficient");
    return std::max(o, 0);
}

namespace {

// Components v_m on theta_{j^m} solving xi^m_j(V) = target(m) given the theta component v0.
std::vector<Expr> solve_branch(const AdaptedCoframe& cf, int j, const Expr& v0, int l) {
    std::vector<Expr> v(cf.order + 1);
    for (int m = 1; m <= cf.order; ++m) {
        const BiForm& e = cf.element(j, m);
        Expr s = coefficient_of(e, {}) * v0;
        for (int q = 1; q < m; ++q) s += coefficient_of(e, {j, q}) * v[q];
        Expr target = m == l ? Expr(1) : Expr();
        v[m] = (target - s) / coefficient_of(e, {j, m});
    }
    return v;
}

}  // namespace

VerticalVectorField dual_U(const AdaptedCoframe& cf) {
    VerticalVectorField V;
    V.label = "U";
    Expr v0 = Expr(1) / cf.mu;
    V.components[{}] = v0;
    for (int j = 1; j <= cf.n; ++j) {
        auto v = solve_branch(cf, j, v0, 0);
        for (int m = 1; m <= cf.order; ++m)
            if (!v[m].is_zero()) V.components[{j, m}] = v[m];
    }
    return V;
}

VerticalVectorField dual_V(const AdaptedCoframe& cf, int k, int l) {
    if (k < 1 || k > cf.n || l < 1 || l > cf.order) throw Error("no dual field " + dual_label(k, l));
    VerticalVectorField V;
    V.label = dual_label(k, l);
    auto v = solve_branch(cf, k, Expr(), l);
    for (int m = 1; m <= cf.order; ++m)
        if (!v[m].is_zero()) V.components[{k, m}] = v[m];
    return V;
}

namespace {

struct Checker {
    const AdaptedCoframe& cf;
    const ZeroPolicy& policy;

    // Verdict over adapted components outside the ignored span.
    std::pair<ZeroVerdict, std::string> judge(const BiForm& residual, const std::set<std::pair<int, int>>& ignore) const {
        ZeroVerdict acc;
        for (auto& [key, c] : to_adapted(residual, cf)) {
            if (ignore.count(key)) continue;
            ZeroVerdict v = is_zero(c, policy);
            acc = combine(acc, v);
            if (!v.vanishes()) return {acc, AdaptedCoframe::label(key.first, key.second)};
        }
        return {acc, ""};
    }
};

}  // namespace

StructureReport structure_check(const AdaptedCoframe& cf, const LinearizedSystem& lin, int upto,
                                const ZeroPolicy& policy) {
    if (upto + 1 > cf.order)
        throw Error("structure rows up to level " + std::to_string(upto) + " need coframe order " +
                    std::to_string(upto + 1));
    StructureReport rep;
    Checker chk{cf, policy};
    const auto& sys = lin.sys;
    std::map<std::pair<int, int>, PairCascade> casc;
    for (int k = 1; k <= lin.n; ++k)
        for (int j = 1; j <= lin.n; ++j)
            if (k != j) casc[{k, j}] = pair_cascade(lin, k, j, upto, policy);

    auto push = [&](const std::string& element, int k, const BiForm& actual, const BiForm& expected,
                    std::set<std::pair<int, int>> ignore) {
        StructureRow row;
        row.element = element;
        row.sigma = k;
        row.congruence = !ignore.empty();
        for (auto& [j, m] : ignore) row.modulo.push_back(AdaptedCoframe::label(j, m));
        std::tie(row.verdict, row.component) = chk.judge(actual - expected, ignore);
        rep.pass = rep.pass && row.verdict.vanishes();
        rep.rows.push_back(std::move(row));
    };

    for (int k = 1; k <= lin.n; ++k) {
        BiForm expected = cf.element(k, 1) - lin.a(cf.partner[k], k) * cf.theta;
        push("Th", k, lie(k, cf.theta, sys), expected, {});
    }
    for (int j = 1; j <= lin.n; ++j) {
        const PairCascade& own = casc.at({cf.partner[j], j});
        for (int m = 1; m <= upto; ++m) {
            const BiForm& e = cf.element(j, m);
            for (int k = 1; k <= lin.n; ++k) {
                BiForm actual = lie(k, e, sys);
                if (k == j) {
                    push(AdaptedCoframe::label(j, m), k, actual,
                         cf.element(j, m + 1) - cascade_alpha(own, m) * e, {});
                    continue;
                }
                const PairCascade& pc = casc.at({k, j});
                const Expr& akj = lin.a(j, k);
                if (!pc.p || m <= *pc.p + 1) {
                    Expr h = m - 1 < static_cast<int>(pc.h.size()) ? pc.h[m - 1] : Expr();
                    push(AdaptedCoframe::label(j, m), k, actual, h * cf.element(j, m - 1) - akj * e, {});
                } else {
                    std::set<std::pair<int, int>> ignore;
                    for (int q = *pc.p + 1; q < m; ++q) ignore.insert({j, q});
                    push(AdaptedCoframe::label(j, m), k, actual, -akj * e, ignore);
                }
            }
        }
    }
    return rep;
}

BracketReport bracket_check(const AdaptedCoframe& cf, const LinearizedSystem& lin, const std::vector<int>& fields,
                            const ZeroPolicy& policy) {
    BracketReport rep;
    const auto& sys = lin.sys;
    std::vector<std::pair<int, int>> elements{{0, 0}};
    for (int j = 1; j <= cf.n; ++j)
        for (int m = 1; m < cf.order; ++m) elements.push_back({j, m});

    for (int k : fields) {
        std::map<std::pair<int, int>, std::map<std::pair<int, int>, Expr>> images;
        for (auto& [j, m] : elements) images[{j, m}] = to_adapted(lie(k, cf.element(j, m), sys), cf);
        PairCascade own = pair_cascade(lin, cf.partner[k], k, 1, policy);

        // component of [X_k, V] on the dual of E is -(X_k E)(V)
        auto run = [&](const std::string& label, std::pair<int, int> dual, auto expected) {
            BracketRow row;
            row.label = label;
            for (auto& key : elements) {
                auto& img = images[key];
                auto it = img.find(dual);
                Expr comp = it == img.end() ? Expr() : -it->second;
                std::string name = dual_label(key.first, key.second);
                row.components[name] = comp;
                ZeroVerdict v = is_zero(comp - expected(key), policy);
                row.verdict = combine(row.verdict, v);
                if (!v.vanishes() && row.component.empty()) row.component = name;
            }
            rep.pass = rep.pass && row.verdict.vanishes();
            rep.rows.push_back(std::move(row));
        };
        std::string ks = std::to_string(k);
        run("[X" + ks + ",U]", {0, 0}, [&](std::pair<int, int> key) -> Expr {
            if (key == std::pair{0, 0}) return lin.a(cf.partner[k], k);
            if (key.second == 1 && key.first != k) return -H(lin, k, key.first);
            return Expr();
        });
        run("[X" + ks + ",V" + ks + "^1]", {k, 1}, [&](std::pair<int, int> key) -> Expr {
            if (key == std::pair{0, 0}) return Expr(-1);
            if (key == std::pair{k, 1}) return cascade_alpha(own, 1);
            return Expr();
        });
    }
    return rep;
}

}  // namespace vbx
