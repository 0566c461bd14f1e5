#include <gtest/gtest.h>

#include <map>
#include <random>

#include "common.hpp"
#include "vbx/classify.hpp"

using namespace vbx;
using testutil::P;

namespace {

LinearForm lf(int a, int b, int c) { return {Expr(a), Expr(b), Expr(c)}; }

// The pair symbol's relations as written by hand.
Relation hand_l() { return {lf(0, 0, 1), lf(-1, 0, 0), lf(0, 0, 0)}; }
Relation hand_m() { return {lf(0, 0, 1), lf(1, 0, 0), lf(0, -2, 0)}; }

using Cubic = std::map<std::array<int, 3>, mpq_class>;

// Brute-force expansion of sum l^k M^k, independent of the library's monomial table.
Cubic expand(const std::array<QuadraticForm, 3>& M, const Relation& rel) {
    Cubic out;
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 3; ++a)
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    std::array<int, 3> e{};
                    ++e[a];
                    ++e[i];
                    ++e[j];
                    out[e] += *rel[k][a].constant() * *M[k][i][j].constant();
                }
    std::erase_if(out, [](const auto& kv) { return kv.second == 0; });
    return out;
}

// Rank of the 9 cubics xi^a M^k over Q, by plain elimination on dense rows.
int oracle_rank(const std::array<QuadraticForm, 3>& M) {
    std::vector<std::vector<mpq_class>> rows;
    std::map<std::array<int, 3>, int> col;
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 3; ++a) {
            Relation r;
            for (auto& lk : r) lk = lf(0, 0, 0);
            r[k][a] = Expr(1);
            std::vector<mpq_class> row(10);
            for (const auto& [e, c] : expand(M, r)) {
                if (!col.count(e)) col.emplace(e, static_cast<int>(col.size()));
                row[col[e]] = c;
            }
            rows.push_back(row);
        }
    int rank = 0;
    for (int c = 0; c < 10 && rank < 9; ++c) {
        int p = -1;
        for (int r = rank; r < 9; ++r)
            if (rows[r][c] != 0) p = r;
        if (p < 0) continue;
        std::swap(rows[rank], rows[p]);
        for (int r = 0; r < 9; ++r) {
            if (r == rank || rows[r][c] == 0) continue;
            mpq_class f = rows[r][c] / rows[rank][c];
            for (int q = 0; q < 10; ++q) rows[r][q] -= f * rows[rank][q];
        }
        ++rank;
    }
    return rank;
}

// Multiplicity pattern from the binary cubic's discriminant and Hessian.
std::vector<int> oracle_pattern(const std::array<Expr, 4>& cubic) {
    mpq_class d = *cubic[0].constant(), c = *cubic[1].constant(), b = *cubic[2].constant(), a = *cubic[3].constant();
    if (a == 0 && b == 0 && c == 0 && d == 0) return {};
    if (b * b - 3 * a * c == 0 && b * c - 9 * a * d == 0 && c * c - 3 * b * d == 0) return {3};
    mpq_class disc = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d;
    return disc == 0 ? std::vector<int>{2, 1} : std::vector<int>{1, 1, 1};
}

mpq_class small_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-5, 5), den(1, 3);
    mpq_class q(num(rng), den(rng));
    q.canonicalize();
    return q;
}

Relation combine(const Relation& l, const Relation& m, const mpq_class& a, const mpq_class& b) {
    Relation out;
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i) out[k][i] = Expr(a) * l[k][i] + Expr(b) * m[k][i];
    return out;
}

// xi -> S xi in every M^k, then M^k -> sum_j T[k][j] M^j.
std::array<QuadraticForm, 3> transform(const std::array<QuadraticForm, 3>& M, const std::array<std::array<mpq_class, 3>, 3>& S,
                                       const std::array<std::array<mpq_class, 3>, 3>& T) {
    std::array<QuadraticForm, 3> sub;
    for (int k = 0; k < 3; ++k)
        for (int p = 0; p < 3; ++p)
            for (int q = 0; q < 3; ++q) {
                mpq_class acc = 0;
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) acc += *M[k][i][j].constant() * S[i][p] * S[j][q];
                sub[k][p][q] = Expr(acc);
            }
    std::array<QuadraticForm, 3> out;
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j)
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q) out[k][p][q] += Expr(T[k][j]) * sub[j][p][q];
    return out;
}

mpq_class det3(const std::array<std::array<mpq_class, 3>, 3>& m) {
    return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
           m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

std::array<std::array<mpq_class, 3>, 3> random_invertible(std::mt19937_64& rng) {
    for (;;) {
        std::array<std::array<mpq_class, 3>, 3> m;
        for (auto& row : m)
            for (auto& x : row) x = small_rational(rng);
        if (det3(m) != 0) return m;
    }
}

}  // namespace

TEST(Symbol, PairSymbolRelations) {
    auto data = symbol_relations(pair_symbol());
    EXPECT_EQ(data.kernel_dim, 2);
    EXPECT_FALSE(data.degenerate);
    ASSERT_EQ(data.relations.size(), 2u);
    for (const auto& r : data.relations) EXPECT_TRUE(expand(data.M, r).empty());
    EXPECT_EQ(9 - oracle_rank(pair_symbol()), 2);
    // (xi3, -xi1, 0) lies in the span of the computed basis.
    EXPECT_EQ(relation_holds(pair_symbol(), hand_l(), {}).kind, ZeroVerdict::Kind::Zero);
    EXPECT_EQ(relation_holds(pair_symbol(), hand_m(), {}).kind, ZeroVerdict::Kind::Zero);
    auto sys = testutil::example("cubic");
    EXPECT_EQ(symbol_relations(sys).kernel_dim, 2);
    EXPECT_THROW(symbol_relations(testutil::example("liouville")), InputError);
}

TEST(Symbol, DependentFormsAreDegenerate) {
    std::array<QuadraticForm, 3> M{quadratic_monomial(1, 1), quadratic_monomial(1, 1), quadratic_monomial(1, 1)};
    auto data = symbol_relations(M);
    EXPECT_EQ(data.kernel_dim, 6);
    EXPECT_EQ(9 - oracle_rank(M), 6);
    EXPECT_TRUE(data.degenerate);
    for (const auto& r : data.relations) EXPECT_TRUE(expand(M, r).empty());
    EXPECT_THROW(classify(data), DomainError);
}

TEST(Symbol, GenericTripleHasNoRelations) {
    std::mt19937_64 rng(11);
    std::array<QuadraticForm, 3> M;
    for (auto& A : M)
        for (auto& row : A)
            for (auto& x : row) x = Expr(small_rational(rng));
    EXPECT_EQ(oracle_rank(M), 9);
    try {
        symbol_relations(M);
        FAIL() << "expected NonInvolutiveSymbol";
    } catch (const NonInvolutiveSymbol& e) {
        EXPECT_EQ(e.kernel_dim, 0);
    }
}

TEST(Symbol, TransformedPairSymbolsKeepTwoRelations) {
    std::mt19937_64 rng(23);
    for (int t = 0; t < 8; ++t) {
        auto M = transform(pair_symbol(), random_invertible(rng), random_invertible(rng));
        auto data = symbol_relations(M);
        EXPECT_EQ(data.kernel_dim, 2);
        EXPECT_EQ(9 - oracle_rank(M), 2);
        for (const auto& r : data.relations) EXPECT_TRUE(expand(M, r).empty());
        EXPECT_EQ(classify(data).kind, SymbolCase::ThreeSimple) << t;
    }
}

TEST(Symbol, ExprCoefficients) {
    // x-dependent rescaling of the pair symbol
    std::array<QuadraticForm, 3> M = pair_symbol();
    M[0][0][1] = P("1+x1^2");
    M[2][0][2] = P("exp(x2)");
    auto data = symbol_relations(M);
    EXPECT_EQ(data.kernel_dim, 2);
    for (const auto& r : data.relations) EXPECT_TRUE(relation_holds(M, r, {}).vanishes());
    auto res = classify(data);
    EXPECT_FALSE(res.exact);
    EXPECT_EQ(res.kind, SymbolCase::ThreeSimple);
}

TEST(Classify, PairSymbolIsCaseOne) {
    auto res = classify_pencil(hand_l(), hand_m());
    // det = (1+z)(z-1)(-2z) up to sign, i.e. 2z - 2z^3
    auto c = res.cubic;
    mpq_class k = *c[1].constant() / 2;
    EXPECT_NE(k, 0);
    EXPECT_EQ(*c[0].constant(), 0);
    EXPECT_EQ(*c[2].constant(), 0);
    EXPECT_EQ(*c[3].constant(), -2 * k);
    EXPECT_EQ(res.kind, SymbolCase::ThreeSimple);
    EXPECT_EQ(res.case_label(), "i");
    EXPECT_TRUE(res.exact);
    EXPECT_EQ(res.infinity_multiplicity, 0);
    std::vector<std::pair<std::string, int>> roots = res.roots;
    std::sort(roots.begin(), roots.end());
    EXPECT_EQ(roots, (std::vector<std::pair<std::string, int>>{{"-1", 1}, {"0", 1}, {"1", 1}}));
    EXPECT_EQ(res.multiplicities, oracle_pattern(res.cubic));
}

TEST(Classify, ComputedBasisAgrees) {
    auto res = classify(symbol_relations(pair_symbol()));
    EXPECT_EQ(res.kind, SymbolCase::ThreeSimple);
    EXPECT_EQ(res.multiplicities, oracle_pattern(res.cubic));
}

TEST(Classify, TripleRoot) {
    // l = nilpotent shift, m = identity: det(N + z I) = z^3
    Relation l{lf(0, 1, 0), lf(0, 0, 1), lf(0, 0, 0)};
    Relation m{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 1)};
    auto res = classify_pencil(l, m);
    EXPECT_EQ(*res.cubic[3].constant(), 1);
    EXPECT_EQ(*res.cubic[0].constant(), 0);
    EXPECT_EQ(res.kind, SymbolCase::Triple);
    EXPECT_EQ(res.case_label(), "iii");
    EXPECT_EQ(res.roots, (std::vector<std::pair<std::string, int>>{{"0", 3}}));
    // The same pencil read with l and m swapped puts the triple root at infinity.
    auto swapped = classify_pencil(m, l);
    EXPECT_EQ(swapped.infinity_multiplicity, 3);
    EXPECT_EQ(swapped.kind, SymbolCase::Triple);
}

TEST(Classify, DoubleRootAndInfinity) {
    // diag(1, 1, 0) + z diag(0, 1, 1) = z(1+z): roots 0, -1, inf
    Relation l{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 0)};
    Relation m{lf(0, 0, 0), lf(0, 1, 0), lf(0, 0, 1)};
    auto res = classify_pencil(l, m);
    EXPECT_EQ(res.infinity_multiplicity, 1);
    EXPECT_EQ(res.kind, SymbolCase::ThreeSimple);
    // diag(1, 1, 0) + z diag(0, 0, 1) = z: double root at infinity
    Relation m2{lf(0, 0, 0), lf(0, 0, 0), lf(0, 0, 1)};
    auto res2 = classify_pencil(l, m2);
    EXPECT_EQ(res2.infinity_multiplicity, 2);
    EXPECT_EQ(res2.kind, SymbolCase::DoubleSimple);
    EXPECT_EQ(res2.multiplicities, oracle_pattern(res2.cubic));
    // (1 + z)^2 (2 + z)
    Relation l3{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 2)};
    auto res3 = classify_pencil(l3, {lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 1)});
    EXPECT_EQ(res3.kind, SymbolCase::DoubleSimple);
    auto roots = res3.roots;
    std::sort(roots.begin(), roots.end());
    EXPECT_EQ(roots, (std::vector<std::pair<std::string, int>>{{"-1", 2}, {"-2", 1}}));
}

TEST(Classify, VanishingDeterminant) {
    Relation l{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 0)};
    Relation m{lf(0, 1, 0), lf(1, 0, 0), lf(0, 0, 0)};
    auto res = classify_pencil(l, m);
    EXPECT_EQ(res.kind, SymbolCase::Degenerate);
    EXPECT_EQ(res.case_label(), "iv-v");
    EXPECT_TRUE(res.multiplicities.empty());
}

TEST(Classify, ExprPencil) {
    // (1 + x1 z)^2 (1 + z) has a double root for x1 != 1.
    Relation l{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 1)};
    Relation m{LinearForm{P("x1"), Expr(0), Expr(0)}, LinearForm{Expr(0), P("x1"), Expr(0)}, lf(0, 0, 1)};
    auto res = classify_pencil(l, m);
    EXPECT_FALSE(res.exact);
    EXPECT_EQ(res.kind, SymbolCase::DoubleSimple);
    Relation m3{LinearForm{P("x1"), Expr(0), Expr(0)}, LinearForm{Expr(0), P("x1"), Expr(0)}, LinearForm{Expr(0), Expr(0), P("x1")}};
    EXPECT_EQ(classify_pencil(l, m3).kind, SymbolCase::Triple);
}

TEST(Classify, BasisChangeStability) {
    std::mt19937_64 rng(5);
    std::vector<std::pair<Relation, Relation>> pencils{
        {hand_l(), hand_m()},
        {{lf(0, 1, 0), lf(0, 0, 1), lf(0, 0, 0)}, {lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 1)}},
        {{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 2)}, {lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 1)}},
        {{lf(1, 0, 0), lf(0, 1, 0), lf(0, 0, 0)}, {lf(0, 1, 0), lf(1, 0, 0), lf(0, 0, 0)}},
    };
    for (const auto& [l, m] : pencils) {
        auto base = classify_pencil(l, m);
        for (int t = 0; t < 10; ++t) {
            mpq_class a, b, c, d;
            do {
                a = small_rational(rng), b = small_rational(rng), c = small_rational(rng), d = small_rational(rng);
            } while (a * d - b * c == 0);
            auto res = classify_pencil(combine(l, m, a, b), combine(l, m, c, d));
            EXPECT_EQ(res.kind, base.kind);
            EXPECT_EQ(res.multiplicities, base.multiplicities);
            EXPECT_EQ(res.multiplicities, oracle_pattern(res.cubic));
        }
    }
}
