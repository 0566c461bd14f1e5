#include "vbx/laplace.hpp"

#include <algorithm>

namespace vbx {

namespace {

std::pair<int, int> ordered(int i, int j) { return {std::min(i, j), std::max(i, j)}; }

Expr X(const LinearizedSystem& lin, int i, const Expr& e) { return total_derivative(e, i, lin.sys); }

}  // namespace

const Expr& LinearizedSystem::a(int upper, int other) const {
    auto it = A.find({upper, other});
    if (it == A.end()) throw Error("no coefficient A^" + std::to_string(upper) + "_" + pair_label(upper, other));
    return it->second;
}

const Expr& LinearizedSystem::c(int i, int j) const {
    auto it = C.find(ordered(i, j));
    if (it == C.end()) throw Error("no coefficient C_" + pair_label(i, j));
    return it->second;
}

Expr& LinearizedSystem::a(int upper, int other) { return A[{upper, other}]; }
Expr& LinearizedSystem::c(int i, int j) { return C[ordered(i, j)]; }

std::vector<std::pair<int, int>> LinearizedSystem::pairs() const {
    if (n == 2) return {{1, 2}};
    return {{1, 2}, {1, 3}, {2, 3}};
}

std::string pair_label(int i, int j) { return std::to_string(i) + std::to_string(j); }
std::string triple_label(int i, int j, int k) { return pair_label(i, j) + std::to_string(k); }

int third_index(int i, int j) { return 6 - i - j; }

LinearizedSystem linearize(const SystemSpec& sys, const Expr& mu, const ZeroPolicy* policy) {
    ZeroPolicy pol = policy ? *policy : system_policy(sys, 0x5eed);
    if (is_zero(mu, pol).vanishes()) throw Error("rescaling mu vanishes");
    LinearizedSystem lin;
    lin.sys = sys;
    lin.n = sys.n;
    lin.mu = mu;
    for (auto [i, j] : lin.pairs()) {
        const Expr& f = sys.rhs(i, j);
        Expr ai = -derive(f, Coordinate::pure(i, 1));
        Expr aj = -derive(f, Coordinate::pure(j, 1));
        Expr c = -derive(f, Coordinate::u());
        if (mu.is_one()) {
            lin.a(i, j) = ai;
            lin.a(j, i) = aj;
            lin.c(i, j) = c;
            continue;
        }
        Expr mi = X(lin, i, mu) / mu, mj = X(lin, j, mu) / mu;
        Expr mij = X(lin, i, X(lin, j, mu)) / mu;
        lin.a(i, j) = ai - mj;
        lin.a(j, i) = aj - mi;
        lin.c(i, j) = c - ai * mi - aj * mj - mij + Expr(2) * mi * mj;
    }
    lin.theta = mu * BiForm::theta(sys.n);
    return lin;
}

CompatibilityReport compatibility(const LinearizedSystem& lin, const ZeroPolicy& policy) {
    CompatibilityReport rep;
    if (lin.n != 3) return rep;
    auto push = [&](std::string label, Expr r) {
        RelationCheck rc{std::move(label), std::move(r), {}};
        rc.verdict = is_zero(rc.residual, policy);
        rep.pass = rep.pass && rc.verdict.vanishes();
        rep.relations.push_back(std::move(rc));
    };
    auto& L = lin;
    for (int l = 1; l <= 3; ++l) {
        int j = l == 1 ? 2 : 1, k = third_index(l, j);
        push("F1(" + triple_label(l, j, k) + ")", X(L, j, L.a(l, k)) - X(L, k, L.a(l, j)));
    }
    for (int l = 1; l <= 3; ++l)
        for (int j = 1; j <= 3; ++j) {
            if (j == l) continue;
            int k = third_index(l, j);
            push("F2(" + triple_label(l, j, k) + ")",
                 X(L, j, L.a(k, l)) - L.a(k, l) * L.a(k, j) + L.a(l, j) * L.a(k, l) + L.a(j, l) * L.a(k, j) - L.c(l, j));
        }
    for (int l = 1; l <= 3; ++l) {
        int j = l == 1 ? 2 : 1, k = third_index(l, j);
        push("F3(" + triple_label(l, j, k) + ")", X(L, j, L.c(l, k)) - X(L, k, L.c(l, j)) + L.a(l, j) * L.c(l, k) +
                                                     (L.a(j, l) - L.a(k, l)) * L.c(k, j) - L.a(l, k) * L.c(l, j));
    }
    return rep;
}

Expr H(const LinearizedSystem& lin, int i, int j) {
    return X(lin, i, lin.a(i, j)) + lin.a(i, j) * lin.a(j, i) - lin.c(i, j);
}

Expr H(const LinearizedSystem& lin, int i, int j, int k) { return lin.a(k, j) - lin.a(i, j); }

LaplaceInvariants invariants(const LinearizedSystem& lin) {
    LaplaceInvariants out;
    for (auto [i, j] : lin.pairs()) {
        out.pair[{i, j}] = H(lin, i, j);
        out.pair[{j, i}] = H(lin, j, i);
    }
    if (lin.n == 3)
        for (int i = 1; i <= 3; ++i)
            for (int j = 1; j <= 3; ++j) {
                if (i == j) continue;
                int k = third_index(i, j);
                out.triple[{i, j, k}] = H(lin, i, j, k);
            }
    return out;
}

LinearizedSystem transform(const LinearizedSystem& lin, int i, int j, const ZeroPolicy& policy) {
    Expr h = H(lin, i, j);
    if (is_zero(h, policy).vanishes())
        throw InvariantVanishes("H" + pair_label(i, j), "Laplace invariant H" + pair_label(i, j) + " vanishes");
    LinearizedSystem out = lin;
    out.provenance.push_back({i, j});
    auto& L = lin;
    out.a(i, j) = L.a(i, j) - X(L, j, h) / h;
    out.a(j, i) = L.a(j, i);
    out.c(i, j) = L.a(j, i) * L.a(i, j) + h * (X(L, j, L.a(j, i) / h) - Expr(1));
    if (lin.n == 3) {
        int k = third_index(i, j);
        Expr hk = H(lin, i, j, k);
        if (is_zero(hk, policy).vanishes())
            throw InvariantVanishes("H" + triple_label(i, j, k),
                                    "Laplace invariant H" + triple_label(i, j, k) + " vanishes");
        out.a(i, k) = L.a(i, k) - X(L, k, h) / h;
        out.a(k, i) = L.a(j, i) + h / hk;
        out.c(i, k) = h * (X(L, k, L.a(j, i) / h) + L.a(j, k) / hk) + L.a(j, i) * L.a(i, k);
        out.a(j, k) = L.a(j, k);
        out.a(k, j) = L.a(k, j) - X(L, j, hk) / hk;
        out.c(j, k) = L.c(j, k) - X(L, k, L.a(i, j)) + X(L, j, L.a(j, k)) - L.a(j, k) * X(L, j, hk) / hk;
    }
    out.theta = lie(j, lin.theta, lin.sys) + lin.a(i, j) * lin.theta;
    return out;
}

std::string LaplaceIndex::str() const {
    switch (kind) {
        case Kind::Finite: return std::to_string(p);
        case Kind::AtLeast: return ">=" + std::to_string(p);
        case Kind::Blocked: return "blocked(" + blocked_by + "," + std::to_string(p) + ")";
    }
    return "";
}

LaplaceIndex index(const LinearizedSystem& lin, int i, int j, int cap, const ZeroPolicy& policy) {
    if (cap < 0) throw Error("index cap must be nonnegative");
    LaplaceIndex out;
    LinearizedSystem cur = lin;
    for (int step = 0;; ++step) {
        Expr h = H(cur, i, j);
        out.h.push_back(h);
        ZeroVerdict v = is_zero(h, policy);
        if (v.vanishes()) {
            out.kind = LaplaceIndex::Kind::Finite;
            out.p = step;
            out.probabilistic = v.kind == ZeroVerdict::Kind::ProbablyZero;
            return out;
        }
        if (step == cap) {
            out.kind = LaplaceIndex::Kind::AtLeast;
            out.p = cap;
            return out;
        }
        try {
            cur = transform(cur, i, j, policy);
        } catch (const InvariantVanishes& e) {
            out.kind = LaplaceIndex::Kind::Blocked;
            out.p = step;
            out.blocked_by = e.which;
            return out;
        }
    }
}

AdjointSystem adjoint(const LinearizedSystem& lin) {
    AdjointSystem out = lin;
    out.adjoint = !lin.adjoint;
    out.theta = BiForm::zero(lin.n, 0, 1);
    for (auto [i, j] : lin.pairs()) {
        out.a(i, j) = -lin.a(i, j);
        out.a(j, i) = -lin.a(j, i);
        out.c(i, j) = lin.c(i, j) - X(lin, i, lin.a(i, j)) - X(lin, j, lin.a(j, i));
    }
    return out;
}

Expr apply(const LinearizedSystem& op, int i, int j, const Expr& t) {
    Expr tj = X(op, j, t);
    return X(op, i, tj) + op.a(i, j) * X(op, i, t) + op.a(j, i) * tj + op.c(i, j) * t;
}

BiForm apply(const LinearizedSystem& op, int i, int j, const BiForm& t) {
    BiForm tj = lie(j, t, op.sys);
    return lie(i, tj, op.sys) + op.a(i, j) * lie(i, t, op.sys) + op.a(j, i) * tj + op.c(i, j) * t;
}

AnnihilationReport annihilation_check(const LinearizedSystem& lin, const ZeroPolicy& policy) {
    AnnihilationReport rep;
    for (auto [i, j] : lin.pairs()) {
        FormVerdict v = is_zero(apply(lin, i, j, lin.theta), policy);
        rep.pass = rep.pass && v.vanishes();
        rep.pairs.emplace_back("L" + pair_label(i, j), v);
    }
    return rep;
}

ZeroVerdict inverse_check(const LinearizedSystem& lin, int i, int j, const ZeroPolicy& policy) {
    Expr h = H(lin, i, j);
    if (is_zero(h, policy).vanishes())
        throw InvariantVanishes("H" + pair_label(i, j), "inverse transform needs H" + pair_label(i, j) + " nonzero");
    const BiForm& th = lin.theta;
    BiForm xi = lie(j, th, lin.sys) + lin.a(i, j) * th;
    BiForm back = (Expr(1) / h) * (lie(i, xi, lin.sys) + lin.a(j, i) * xi);
    return is_zero(back - th, policy).verdict;
}

TransformRelations transform_relations(const LinearizedSystem& lin, int i, int j, const ZeroPolicy& policy) {
    TransformRelations rep;
    const auto& sys = lin.sys;
    const BiForm& th = lin.theta;
    BiForm thj = lie(j, th, sys);
    BiForm xi = thj + lin.a(i, j) * th;
    auto push = [&](const std::string& label, const BiForm& r) {
        FormVerdict v = is_zero(r, policy);
        rep.pass = rep.pass && v.vanishes();
        rep.relations.emplace_back(label, v);
    };
    Expr h = H(lin, i, j);
    push("X" + std::to_string(i) + "(xi)",
         lie(i, xi, sys) - ((-lin.a(j, i)) * thj + (h - lin.a(i, j) * lin.a(j, i)) * th));
    push("X" + std::to_string(j) + "(xi)",
         lie(j, xi, sys) - (X(lin, j, lin.a(i, j)) * th + lin.a(i, j) * thj + lie(j, thj, sys)));
    if (lin.n == 3) {
        int k = third_index(i, j);
        BiForm thk = lie(k, th, sys);
        // Theta_k carries -H_ijk; the Theta coefficient is X_k(A^i_ij) - C_kj
        push("X" + std::to_string(k) + "(xi)",
             lie(k, xi, sys) - ((X(lin, k, lin.a(i, j)) - lin.c(k, j)) * th + (-H(lin, i, j, k)) * thk +
                                (-lin.a(j, k)) * thj));
    }
    return rep;
}

}  // namespace vbx
