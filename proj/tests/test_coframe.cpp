#include <gtest/gtest.h>

#include "common.hpp"
#include "vbx/coframe.hpp"

using namespace vbx;
using testutil::P;

namespace {

BiForm T(int b = 0, int o = 0) { return BiForm::contact(3, {b, o}); }

const StructureRow& row(const StructureReport& rep, const std::string& element, int sigma) {
    for (auto& r : rep.rows)
        if (r.element == element && r.sigma == sigma) return r;
    throw std::runtime_error("missing row " + element);
}

SystemSpec flat() { return make_system(3, {{{1, 2}, "0"}, {{1, 3}, "0"}, {{2, 3}, "0"}}); }

}  // namespace

TEST(Coframe, KTFirstLevel) {
    auto sys = testutil::example("kt");
    auto cf = build_coframe(linearize(sys), 3, system_policy(sys, 1));
    for (int i = 1; i <= 3; ++i) EXPECT_EQ(cf.element(i, 1).str(), (T(i, 1) + T()).str());
    int count = 0;
    for (auto& [j, b] : cf.xi) count += static_cast<int>(b.size());
    EXPECT_EQ(count, 9);
    EXPECT_EQ(cf.element(2, 0).str(), T().str());
}

TEST(Coframe, CubicBranchThree) {
    auto sys = testutil::example("cubic");
    auto cf = build_coframe(linearize(sys), 2, system_policy(sys, 1));
    EXPECT_EQ(cf.partner[3], 1);
    EXPECT_EQ(cf.element(3, 1).str(), (T(3, 1) + P("-u3/(u+1)") * T()).str());
    // partner 2 shifts the level-one element by H_213 * Theta inside span{Theta}
    auto alt = build_coframe(linearize(sys), 2, system_policy(sys, 1), std::array<int, 4>{0, 2, 1, 2});
    auto diff = to_adapted(alt.element(3, 1) - cf.element(3, 1), cf);
    ASSERT_EQ(diff.size(), 1u);
    EXPECT_EQ(diff.begin()->first, std::make_pair(0, 0));
}

TEST(Coframe, Triangular) {
    for (auto name : {"kt", "cubic", "linear314"}) {
        auto sys = testutil::example(name);
        auto lin = linearize(sys, P("exp(x2)*(1+u^2)"));
        auto cf = build_coframe(lin, 3, system_policy(sys, 1));
        for (int j = 1; j <= 3; ++j)
            for (int m = 1; m <= 3; ++m) {
                EXPECT_EQ(cf.element(j, m).coefficient({0, {{j, m}}}), lin.mu) << name << j << m;
                EXPECT_EQ(adapted_order(cf.element(j, m), cf), m);
            }
    }
}

TEST(Coframe, CharacteristicCoframe) {
    auto sys = testutil::example("kt");
    auto lin = linearize(sys);
    auto ch = characteristic_coframe(lin, 2);
    EXPECT_EQ(ch[1][0].str(), T(1, 1).str());
    BiForm s = BiForm::zero(3, 1, 1);
    for (int i = 1; i <= 3; ++i) s += wedge(BiForm::sigma(3, i), ch[i][0]);
    EXPECT_TRUE((d_H(lin.theta, sys) - s).is_zero());

    auto fl = flat();
    auto lr = linearize(fl, P("exp(x1)"));
    EXPECT_EQ(characteristic_coframe(lr, 1)[1][0].str(), (P("exp(x1)") * (T(1, 1) + T())).str());
}

TEST(Coframe, AdaptedOrder) {
    auto sys = testutil::example("kt");
    auto cf = build_coframe(linearize(sys), 3, system_policy(sys, 1));
    EXPECT_EQ(adapted_order(cf.theta, cf), 0);
    EXPECT_EQ(adapted_order(cf.element(1, 2), cf), 2);
    EXPECT_EQ(adapted_order(wedge(T(), cf.element(3, 1)), cf), 1);
    EXPECT_THROW(adapted_order(T(1, 5), cf), Error);
}

TEST(Coframe, Duals) {
    auto sys = testutil::example("cubic");
    auto cf = build_coframe(linearize(sys, P("u1+2")), 3, system_policy(sys, 1));
    auto U = dual_U(cf);
    EXPECT_EQ(pairing(cf.theta, U), Expr(1));
    auto V = dual_V(cf, 3, 1);
    EXPECT_TRUE(pairing(cf.theta, V).is_zero());
    EXPECT_EQ(interior(V, wedge(T(), cf.element(3, 1))).str(), (-T()).str());
    for (int j = 1; j <= 3; ++j)
        for (int m = 1; m <= 3; ++m) {
            EXPECT_TRUE(pairing(cf.element(j, m), U).is_zero());
            for (int k = 1; k <= 3; ++k)
                for (int l = 1; l <= 3; ++l)
                    EXPECT_EQ(pairing(cf.element(j, m), dual_V(cf, k, l)), Expr(j == k && m == l ? 1 : 0));
        }
    // the dual pairing agrees with the adapted expansion
    BiForm w = P("u2") * T(1, 2) + P("x3") * T(3, 1) + T();
    auto ad = to_adapted(w, cf);
    EXPECT_EQ(pairing(w, dual_V(cf, 1, 2)), (ad[std::pair{1, 2}]));
    EXPECT_EQ(pairing(w, U), (ad[std::pair{0, 0}]));
}

TEST(Structure, KT) {
    auto sys = testutil::example("kt");
    auto lin = linearize(sys);
    auto pol = system_policy(sys, 3);
    auto cf = build_coframe(lin, 4, pol);
    auto rep = structure_check(cf, lin, 3, pol);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(row(rep, "Th", 1).verdict.kind, ZeroVerdict::Kind::Zero);
    EXPECT_TRUE(row(rep, "xi:2^3", 1).congruence);

    auto bumped = lin;
    bumped.c(1, 2) = lin.c(1, 2) - Expr(1);  // H_21 + 1
    auto bad = structure_check(cf, bumped, 3, pol);
    EXPECT_FALSE(row(bad, "xi:1^1", 2).verdict.vanishes());
}

TEST(Structure, CubicPartnerRowsOnly) {
    auto sys = testutil::example("cubic");
    auto lin = linearize(sys);
    auto pol = system_policy(sys, 3);
    for (auto partners : {std::array<int, 4>{0, 2, 1, 1}, std::array<int, 4>{0, 3, 3, 2}}) {
        auto cf = build_coframe(lin, 4, pol, partners);
        auto rep = structure_check(cf, lin, 3, pol);
        EXPECT_FALSE(rep.pass);
        for (auto& r : rep.rows) {
            if (r.element == "Th") {
                EXPECT_TRUE(r.verdict.vanishes());
                continue;
            }
            int j = r.element[3] - '0';
            bool expected = r.sigma == j || r.sigma == partners[j];
            EXPECT_EQ(r.verdict.vanishes(), expected) << r.element << " s" << r.sigma;
        }
    }
}

TEST(Brackets, KT) {
    auto sys = testutil::example("kt");
    auto lin = linearize(sys);
    auto pol = system_policy(sys, 3);
    auto cf = build_coframe(lin, 3, pol);
    auto rep = bracket_check(cf, lin, {1, 2, 3}, pol);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.rows[1].label, "[X1,V1^1]");
    EXPECT_EQ(rep.rows[1].components.at("U"), Expr(-1));
}

TEST(Brackets, CubicFirstField) {
    auto sys = testutil::example("cubic");
    auto lin = linearize(sys);
    auto pol = system_policy(sys, 3);
    auto cf = build_coframe(lin, 3, pol);
    auto rep = bracket_check(cf, lin, {1}, pol);
    EXPECT_TRUE(rep.pass);
    EXPECT_EQ(rep.rows[0].components.at("U"), lin.a(2, 1));
}

TEST(Brackets, TotalDerivativesCommute) {
    auto sys = testutil::example("cubic");
    std::mt19937_64 rng(42);
    const char* atoms[] = {"u", "u1", "u2", "u3", "x1", "x2", "u11", "u33", "exp(x3)", "u22"};
    for (int t = 0; t < 20; ++t) {
        std::string s = "1";
        for (int f = 0; f < 3; ++f) s += "+" + std::to_string(rng() % 5 + 1) + "*" + atoms[rng() % 10] + "*" + atoms[rng() % 10];
        Expr e = P(s);
        for (auto [i, j] : {std::pair{1, 2}, std::pair{1, 3}, std::pair{2, 3}}) {
            Expr c = total_derivative(total_derivative(e, j, sys), i, sys) - total_derivative(total_derivative(e, i, sys), j, sys);
            EXPECT_TRUE(is_zero(c, system_policy(sys, 5)).vanishes()) << s;
        }
    }
}
