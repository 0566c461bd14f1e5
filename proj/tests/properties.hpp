#pragma once

// Seed-pinned randomized properties, shared by the unit suite and the acceptance binary.

#include <random>
#include <sstream>
#include <string>

#include "common.hpp"
#include "vbx/conslaw.hpp"

namespace props {

using namespace vbx;

struct Outcome {
    std::string name;
    int cases = 0;
    int failures = 0;
    int probabilistic = 0;  // cases decided by ProbablyZero
    std::string first_failure;

    bool pass() const { return cases > 0 && failures == 0; }

    void record(bool ok, const ZeroVerdict& v, const std::string& what) {
        ++cases;
        if (v.kind == ZeroVerdict::Kind::ProbablyZero) ++probabilistic;
        if (!ok) {
            if (failures == 0) first_failure = what;
            ++failures;
        }
    }
    void record(const ZeroVerdict& v, const std::string& what) { record(v.vanishes(), v, what); }

    std::string summary() const {
        std::ostringstream os;
        os << cases - failures << "/" << cases << " hold";
        if (probabilistic) os << " (" << probabilistic << " probabilistic)";
        if (failures) os << "; first failure: " << first_failure;
        return os.str();
    }
};

inline int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

inline mpq_class small_q(std::mt19937_64& rng) {
    int num = pick(rng, -4, 4);
    if (num == 0) num = 1;
    mpq_class q(num, pick(rng, 1, 3));
    q.canonicalize();
    return q;
}

// A restricted coordinate of order <= max_order.
inline Expr random_coordinate(std::mt19937_64& rng, int n, int max_order) {
    int kind = pick(rng, 0, 2);
    if (kind == 0) return Expr::coord(Coordinate::x(pick(rng, 1, n)));
    if (kind == 1) return Expr::coord(Coordinate::u());
    return Expr::coord(Coordinate::pure(pick(rng, 1, n), pick(rng, 1, max_order)));
}

// Sum of one to three monomials in restricted coordinates, sometimes with an exp factor.
inline Expr random_coefficient(std::mt19937_64& rng, int n, int max_order = 2) {
    Expr out;
    int terms = pick(rng, 1, 3);
    for (int t = 0; t < terms; ++t) {
        Expr m = Expr(small_q(rng));
        int deg = pick(rng, 0, 2);
        for (int d = 0; d < deg; ++d) m *= random_coordinate(rng, n, max_order);
        if (pick(rng, 0, 4) == 0) m *= exp(Expr::coord(Coordinate::x(pick(rng, 1, n))));
        out += m;
    }
    return out;
}

inline BiForm random_form(std::mt19937_64& rng, int n, int r, int s) {
    BiForm w = BiForm::zero(n, r, s);
    int terms = pick(rng, 1, 3);
    for (int t = 0; t < terms; ++t) {
        BiForm term = BiForm::function(n, random_coefficient(rng, n));
        std::vector<int> sig;
        for (int i = 1; i <= n; ++i) sig.push_back(i);
        std::shuffle(sig.begin(), sig.end(), rng);
        for (int k = 0; k < r; ++k) term = wedge(term, BiForm::sigma(n, sig[k]));
        for (int k = 0; k < s; ++k) {
            int order = pick(rng, 0, 2);
            Contact c = order == 0 ? Contact{} : Contact{pick(rng, 1, n), order};
            term = wedge(term, BiForm::contact(n, c));
        }
        if (term.r == r && term.s == s) w += term;
    }
    return w;
}

inline std::vector<SystemSpec> family() {
    return {testutil::example("cubic"), testutil::example("kt"), testutil::example("linear314"),
            testutil::example("exp_linearizable"), testutil::example("liouville")};
}

// d_H^2 = 0 and d_H d_V + d_V d_H = 0, each on `count` random forms.
inline std::pair<Outcome, Outcome> differentials(std::uint64_t seed, int count = 50) {
    Outcome sq{"d_H^2 = 0"}, anti{"d_H d_V = -d_V d_H"};
    std::mt19937_64 rng(seed);
    auto systems = family();
    for (int t = 0; t < count; ++t) {
        const auto& sys = systems[t % systems.size()];
        // r <= n - 2 keeps d_H^2 from vanishing by degree alone
        int r = pick(rng, 0, sys.n - 2), s = pick(rng, 0, 2);
        BiForm w = random_form(rng, sys.n, r, s);
        while (w.is_zero()) w = random_form(rng, sys.n, r, s);
        auto pol = system_policy(sys, seed + t);
        std::string tag = sys.name + " " + w.str();
        sq.record(is_zero(d_H(d_H(w, sys), sys), pol).verdict, tag);
        anti.record(is_zero(d_H(d_V(w, sys), sys) + d_V(d_H(w, sys), sys), pol).verdict, tag);
    }
    return {sq, anti};
}

// Every route through a mixed multi-index of order <= max_order reduces to the same function.
inline Outcome reduce_independence(std::uint64_t seed, int max_order = 5) {
    Outcome out{"reduce pair-independence"};
    for (auto name : {"cubic", "kt", "linear314", "exp_linearizable"}) {
        auto sys = testutil::example(name);
        auto pol = system_policy(sys, seed);
        for (int ord = 2; ord <= max_order; ++ord)
            for (int a = 0; a <= ord; ++a)
                for (int b = 0; a + b <= ord; ++b) {
                    std::array<std::uint8_t, 3> cnt{std::uint8_t(a), std::uint8_t(b), std::uint8_t(ord - a - b)};
                    int present = (a > 0) + (b > 0) + (ord - a - b > 0);
                    if (present < 2) continue;
                    auto c = Coordinate::from_counts(cnt);
                    std::vector<std::pair<int, int>> routes;
                    for (int i = 1; i <= 3; ++i)
                        for (int j = i + 1; j <= 3; ++j)
                            if (cnt[i - 1] && cnt[j - 1]) routes.emplace_back(i, j);
                    Expr base = reduce_via(c, routes[0].first, routes[0].second, sys);
                    for (std::size_t k = 1; k < routes.size(); ++k) {
                        Expr other = reduce_via(c, routes[k].first, routes[k].second, sys);
                        out.record(is_zero(base - other, pol), std::string(name) + " " + c.name());
                    }
                    out.record(is_zero(base - reduce_coordinate(c, sys), pol), std::string(name) + " " + c.name());
                }
    }
    return out;
}

// Nonzero rescalings: exp(a.x) * (q + u^2) with q > 0.
inline Expr random_mu(std::mt19937_64& rng, int n) {
    Expr lin;
    for (int i = 1; i <= n; ++i) lin += Expr(small_q(rng)) * Expr::coord(Coordinate::x(i));
    mpq_class q = abs(small_q(rng));
    return exp(lin) * (Expr(q) + Expr::coord(Coordinate::u()).pow(2));
}

inline Outcome mu_invariance(std::uint64_t seed, int count = 5) {
    Outcome out{"mu-invariance of H"};
    std::mt19937_64 rng(seed);
    for (auto name : {"cubic", "kt", "liouville", "linear314"}) {
        auto sys = testutil::example(name);
        auto pol = system_policy(sys, seed);
        auto base = invariants(linearize(sys));
        for (int t = 0; t < count; ++t) {
            Expr mu = random_mu(rng, sys.n);
            auto inv = invariants(linearize(sys, mu, &pol));
            for (const auto& [k, h] : base.pair) {
                auto d = is_zero(inv.pair.at(k) - h, pol);
                // the verdict on H itself must not move either
                bool same = is_zero(inv.pair.at(k), pol).vanishes() == is_zero(h, pol).vanishes();
                out.record(d.vanishes() && same, d, std::string(name) + " H" + pair_label(k.first, k.second) + " mu=" + mu.str());
            }
            for (const auto& [k, h] : base.triple) {
                auto d = is_zero(inv.triple.at(k) - h, pol);
                out.record(d, std::string(name) + " H" + triple_label(std::get<0>(k), std::get<1>(k), std::get<2>(k)));
            }
        }
    }
    return out;
}

inline Outcome adjoint_involution(std::uint64_t seed) {
    Outcome out{"(L*)* = L"};
    std::mt19937_64 rng(seed);
    for (const auto& sys : family()) {
        auto pol = system_policy(sys, seed);
        for (int t = 0; t < 3; ++t) {
            Expr mu = t == 0 ? Expr(1) : random_mu(rng, sys.n);
            auto lin = linearize(sys, mu, &pol);
            auto back = adjoint(adjoint(lin));
            for (auto [i, j] : lin.pairs()) {
                std::string tag = sys.name + " L" + pair_label(i, j) + " mu=" + mu.str();
                out.record(is_zero(back.a(i, j) - lin.a(i, j), pol), tag);
                out.record(is_zero(back.a(j, i) - lin.a(j, i), pol), tag);
                out.record(is_zero(back.c(i, j) - lin.c(i, j), pol), tag);
            }
        }
    }
    return out;
}

// One transform step of the linear314 system in every direction: defining relations and annihilation.
inline Outcome transform_consistency(std::uint64_t seed) {
    Outcome out{"transform consistency (linear314)"};
    auto sys = testutil::example("linear314");
    auto lin = linearize(sys);
    auto pol = system_policy(sys, seed, 20, 1e-9);
    for (int i = 1; i <= 3; ++i)
        for (int j = 1; j <= 3; ++j) {
            if (i == j) continue;
            std::string dir = pair_label(i, j);
            for (const auto& [label, v] : transform_relations(lin, i, j, pol).relations)
                out.record(v.verdict, dir + " " + label);
            auto t = transform(lin, i, j, pol);
            for (const auto& [label, v] : annihilation_check(t, pol).pairs) out.record(v.verdict, dir + " " + label);
            out.record(inverse_check(lin, i, j, pol), dir + " inverse");
        }
    return out;
}

// A function of the single variable x^l.
inline Expr random_profile(std::mt19937_64& rng, int l) {
    Expr x = Expr::coord(Coordinate::x(l));
    switch (pick(rng, 0, 3)) {
        case 0: return Expr(small_q(rng)) + Expr(small_q(rng)) * x.pow(pick(rng, 1, 3));
        case 1: return sin(Expr(small_q(rng)) * x);
        case 2: return exp(Expr(small_q(rng)) * x);
        default: return Expr(small_q(rng)) * x * cos(x);
    }
}

// rho_ij in span{e^{x^i} h(x^l), e^{x^j} g(x^l), e^{x^i + x^j}} for the KT adjoint (D_i - 1)(D_j - 1).
inline RhoTriple random_kt_triple(std::mt19937_64& rng) {
    RhoTriple rho;
    for (auto [i, j] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
        int l = third_index(i, j);
        Expr xi = Expr::coord(Coordinate::x(i)), xj = Expr::coord(Coordinate::x(j));
        Expr f = Expr(pick(rng, 0, 2)) * exp(xi) * random_profile(rng, l) +
                 Expr(pick(rng, 0, 2)) * exp(xj) * random_profile(rng, l) + Expr(small_q(rng)) * exp(xi + xj);
        rho.rho[{i, j}] = BiForm::function(3, f);
    }
    return rho;
}

// Forward construction: certified adjoint-kernel triples give d_H-closed (2,1) forms.
inline Outcome forward_construction(std::uint64_t seed, int count = 10) {
    Outcome out{"forward (2,1) construction on KT"};
    std::mt19937_64 rng(seed);
    auto sys = testutil::example("kt");
    auto lin = linearize(sys);
    auto adj = adjoint(lin);
    auto pol = system_policy(sys, seed, 100, 1e-9);
    int made = 0;
    for (int attempt = 0; made < count && attempt < 10 * count; ++attempt) {
        RhoTriple rho = random_kt_triple(rng);
        BiForm sum = BiForm::zero(3, 0, 0);
        for (auto [k, r] : rho.rho) sum += apply(adj, k.first, k.second, r);
        // certify before use
        if (is_zero(sum, pol).verdict.kind != ZeroVerdict::Kind::Zero) continue;
        ++made;
        auto law = conslaw_from_rho(lin, rho, pol);
        std::string tag = "rho12=" + rho.at(1, 2).str();
        out.record(law.closure.verdict, tag);
        out.record(law.form.r == 2 && law.form.s == 1, law.closure.verdict, tag + " bidegree");
    }
    if (made < count) out.record(false, {}, "only " + std::to_string(made) + " certified triples");
    return out;
}

// parse(print(e)) == e on random canonical expressions.
inline Outcome parse_round_trip(std::uint64_t seed, int count = 100) {
    Outcome out{"parse/print round trip"};
    std::mt19937_64 rng(seed);
    for (int t = 0; t < count; ++t) {
        Expr e = random_coefficient(rng, 3, 3);
        switch (pick(rng, 0, 5)) {
            case 0: e = e / (random_coefficient(rng, 3) + Expr(3)); break;
            case 1: e = e * exp(random_coefficient(rng, 3)); break;
            case 2: e = e + log(Expr(2) + Expr::coord(Coordinate::u()).pow(2)); break;
            case 3: e = e * sqrt(Expr(1) + Expr::coord(Coordinate::x(pick(rng, 1, 3))).pow(2)); break;
            case 4: e = e - sin(random_coefficient(rng, 3)) * cos(Expr::coord(Coordinate::u())); break;
            default: e = e.pow(mpq_class(pick(rng, -2, 3)));
        }
        bool ok = false;
        std::string text = e.str();
        try {
            ok = Expr::parse(text) == e;
        } catch (const Error&) {
            ok = false;
        }
        out.record(ok, {}, text);
    }
    return out;
}

}  // namespace props
