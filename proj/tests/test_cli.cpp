#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "common.hpp"
#include "vbx/cli.hpp"
#include "vbx/report.hpp"

using namespace vbx;
using testutil::example_path;

namespace {

struct Result {
    int code;
    std::string out, err;
    json doc() const { return json::parse(out); }
};

Result vbx_run(std::vector<std::string> args) {
    std::ostringstream out, err;
    int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string ex(const std::string& name) { return example_path(name); }

std::string temp_file(const std::string& name, const std::string& content) {
    auto dir = std::filesystem::temp_directory_path() / "vbx_cli_test";
    std::filesystem::create_directories(dir);
    auto p = dir / name;
    std::ofstream(p) << content;
    return p.string();
}

}  // namespace

TEST(Cli, CubicInvariants) {
    auto r = vbx_run({"invariants", ex("cubic.json"), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    auto d = r.doc();
    EXPECT_EQ(d["invariants"]["H_123"], "u2/(u+1)");
    EXPECT_EQ(d["invariants"]["H_213"], "u1/u");
    for (auto k : {"H_12", "H_21", "H_13", "H_31", "H_23", "H_32"}) EXPECT_EQ(d["invariants"][k], "0") << k;
    EXPECT_EQ(d["vanishing"]["H_123"]["verdict"], "NonZero");
}

TEST(Cli, LiouvilleIndices) {
    auto r = vbx_run({"indices", ex("liouville.json"), "--cap", "5", "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_EQ(r.doc()["p"], json::parse(R"({"12": 1, "21": 1})"));
    EXPECT_EQ(r.doc()["indices"]["12"]["certainty"], "exact");
}

TEST(Cli, CheckExitCodes) {
    auto bad = vbx_run({"check", ex("noninvolutive.json"), "--json"});
    EXPECT_EQ(bad.code, 1);
    auto d = bad.doc();
    EXPECT_FALSE(d["pass"].get<bool>());
    EXPECT_EQ(d["witness"]["relation"], "D3f12-D1f23");
    EXPECT_EQ(d["witness"]["residual"], "u*u2");

    EXPECT_EQ(vbx_run({"check", ex("cubic.json")}).code, 0);
    // f12 = u1 u2 with f13 = f23 = 0 is involutive.
    auto spec = temp_file("split.json", R"({"n": 3, "f12": "u1*u2", "f13": "0", "f23": "0"})");
    EXPECT_EQ(vbx_run({"check", spec}).code, 0);
}

TEST(Cli, ReportsCarryRunParameters) {
    auto r = vbx_run({"check", ex("kt.json"), "--json", "--seed", "17", "--samples", "7", "--tol", "1e-8"});
    ASSERT_EQ(r.code, 0);
    auto d = r.doc();
    EXPECT_EQ(d["version"], kVersion);
    EXPECT_EQ(d["seed"], 17);
    EXPECT_EQ(d["samples"], 7);
    EXPECT_DOUBLE_EQ(d["tolerance"].get<double>(), 1e-8);
    EXPECT_EQ(d["identities"][0]["certainty"], "exact");
}

TEST(Cli, Determinism) {
    std::vector<std::string> args{"conslaw", ex("kt.json"), "--rho", ex("kt_rho.json"), "--json", "--seed", "3"};
    auto a = vbx_run(args), b = vbx_run(args);
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, SeedEnvironmentOverride) {
    setenv("VBX_SEED", "99", 1);
    auto r = vbx_run({"check", ex("kt.json"), "--json", "--seed", "5"});
    unsetenv("VBX_SEED");
    EXPECT_EQ(r.doc()["seed"], 99);
    setenv("VBX_SEED", "abc", 1);
    auto bad = vbx_run({"check", ex("kt.json")});
    unsetenv("VBX_SEED");
    EXPECT_EQ(bad.code, 2);
}

TEST(Cli, InputErrors) {
    auto missing = vbx_run({"check", "/nonexistent/spec.json"});
    EXPECT_EQ(missing.code, 2);
    EXPECT_NE(missing.err.find("vbx:"), std::string::npos);
    EXPECT_EQ(vbx_run({"check", temp_file("broken.json", "{\"n\": 3,")}).code, 2);
    EXPECT_EQ(vbx_run({"check", temp_file("badexpr.json", R"({"n": 2, "f12": "u1*"})")}).code, 2);
    EXPECT_EQ(vbx_run({"check", temp_file("forbidden.json", R"({"n": 2, "f12": "u11"})")}).code, 2);
    EXPECT_EQ(vbx_run({"frobnicate", ex("kt.json")}).code, 2);
    EXPECT_EQ(vbx_run({}).code, 2);
    EXPECT_EQ(vbx_run({"transform", ex("kt.json"), "--dir", "1,1"}).code, 2);
    EXPECT_EQ(vbx_run({"transform", ex("liouville.json"), "--dir", "1,3"}).code, 2);
    EXPECT_EQ(vbx_run({"transform", ex("kt.json")}).code, 2);
    EXPECT_EQ(vbx_run({"indices", ex("kt.json"), "--cap", "-1"}).code, 2);
    EXPECT_EQ(vbx_run({"check", ex("kt.json"), "--samples", "0"}).code, 2);
    EXPECT_EQ(vbx_run({"generate", ex("kt.json"), "--kind", "3s", "--inputs", ex("kt_rho.json")}).code, 2);
    EXPECT_EQ(vbx_run({"invariants", ex("kt.json"), "--mu", "exp("}).code, 2);
    EXPECT_EQ(vbx_run({"conslaw", ex("kt.json"), "--rho", temp_file("rho.json", R"({"rho21": "x1"})")}).code, 2);
    EXPECT_EQ(vbx_run({"--help"}).code, 0);
}

TEST(Cli, TransformOutcomes) {
    auto cu = vbx_run({"transform", ex("cubic.json"), "--dir", "1,2", "--json"});
    EXPECT_EQ(cu.code, 1);
    EXPECT_EQ(cu.doc()["error"]["type"], "InvariantVanishes");
    EXPECT_EQ(cu.doc()["error"]["which"], "H12");

    auto li = vbx_run({"transform", ex("liouville.json"), "--dir", "1,2", "--json"});
    ASSERT_EQ(li.code, 0) << li.out;
    EXPECT_EQ(li.doc()["provenance"], json::parse(R"(["12"])"));
    EXPECT_EQ(li.doc()["invariants"]["H_12"], "0");

    auto l2 = vbx_run({"transform", ex("linear314.json"), "--dir", "1,2", "--json"});
    EXPECT_EQ(l2.code, 0);
    auto twice = vbx_run({"transform", ex("liouville.json"), "--dir", "1,2", "--times", "2", "--json"});
    EXPECT_EQ(twice.code, 1);
    EXPECT_EQ(twice.doc()["error"]["step"], 1);
}

TEST(Cli, LinearizeAndAdjoint) {
    auto lin = vbx_run({"linearize", ex("kt.json"), "--json"});
    ASSERT_EQ(lin.code, 0);
    EXPECT_EQ(lin.doc()["coefficients"]["A"]["A^1_12"], "1");
    EXPECT_EQ(lin.doc()["coefficients"]["C"]["C_23"], "1");
    auto adj = vbx_run({"adjoint", ex("kt.json"), "--json"});
    ASSERT_EQ(adj.code, 0);
    EXPECT_EQ(adj.doc()["adjoint"]["A"]["A*^2_12"], "-1");
    EXPECT_EQ(adj.doc()["adjoint"]["C"]["C*_13"], "1");
    EXPECT_EQ(adj.doc()["involution"]["verdict"], "Zero");
    auto mu = vbx_run({"linearize", ex("liouville.json"), "--mu", "exp(x1)", "--json"});
    EXPECT_EQ(mu.doc()["mu"], "exp(x1)");
}

TEST(Cli, ConservationLaws) {
    auto kt = vbx_run({"conslaw", ex("kt.json"), "--rho", ex("kt_rho.json"), "--json"});
    ASSERT_EQ(kt.code, 0) << kt.err;
    auto d = kt.doc();
    EXPECT_EQ(d["type"], json::parse("[2, 1]"));
    EXPECT_EQ(d["closure"], "zero");
    EXPECT_EQ(d["adjoint_sum"]["verdict"], "Zero");
    EXPECT_EQ(d["provenance"]["generator"], "psi");
    EXPECT_TRUE(d["form"].is_array());
    EXPECT_TRUE(d["form"][0]["monomial"].is_array());

    // rho12 = x1 alone leaves a nonzero adjoint sum and an unclosed law.
    auto broken = vbx_run({"conslaw", ex("kt.json"), "--rho", temp_file("x1.json", R"({"rho12": "x1"})"), "--json"});
    EXPECT_EQ(broken.code, 1);
    EXPECT_EQ(broken.doc()["closure"], "failed");
    auto printed = vbx_run({"conslaw", ex("kt.json"), "--rho", temp_file("x1p.json", R"({"rho12": "x1"})"), "--json",
                            "--convention", "printed"});
    EXPECT_EQ(printed.code, 0);
}

TEST(Cli, VerifyForms) {
    auto cl = vbx_run({"verify", ex("liouville.json"), "--form", ex("liouville_classical.json"), "--json"});
    EXPECT_EQ(cl.code, 0);
    EXPECT_EQ(cl.doc()["closure"], "zero");
    auto ct = vbx_run({"verify", ex("liouville.json"), "--form", ex("liouville_contact.json"), "--json"});
    EXPECT_EQ(ct.code, 0);
    EXPECT_EQ(ct.doc()["type"], json::parse("[1, 1]"));
    EXPECT_EQ(ct.doc()["adapted_order"], 2);

    auto open = temp_file("open.json", R"([{"monomial": ["s1"], "coeff": "u11"}])");
    EXPECT_EQ(vbx_run({"verify", ex("liouville.json"), "--form", open}).code, 1);
    auto mixed = temp_file("mixed.json", R"([{"monomial": ["s1"], "coeff": "1"}, {"monomial": ["th"], "coeff": "1"}])");
    EXPECT_EQ(vbx_run({"verify", ex("liouville.json"), "--form", mixed}).code, 2);
    auto label = temp_file("label.json", R"([{"monomial": ["s3"], "coeff": "1"}])");
    EXPECT_EQ(vbx_run({"verify", ex("liouville.json"), "--form", label}).code, 2);
    auto top = temp_file("top.json", R"([{"monomial": ["s1", "s2"], "coeff": "u"}])");
    EXPECT_EQ(vbx_run({"verify", ex("liouville.json"), "--form", top}).code, 2);
}

TEST(Cli, Darboux) {
    EXPECT_EQ(vbx_run({"darboux", ex("liouville.json"), "--bundle", ex("liouville_bundle.json")}).code, 0);
    auto dep = vbx_run({"darboux", ex("liouville.json"), "--bundle", ex("liouville_bundle_dependent.json"), "--json"});
    EXPECT_EQ(dep.code, 1);
    EXPECT_FALSE(dep.doc()["independence"][0]["holds"].get<bool>());
}

TEST(Cli, Generate) {
    auto one = vbx_run({"generate", ex("liouville.json"), "--kind", "1s", "--inputs", ex("liouville_1s.json"), "--json"});
    ASSERT_EQ(one.code, 0) << one.err;
    EXPECT_EQ(one.doc()["type"], json::parse("[1, 1]"));
    auto seq = vbx_run({"generate", ex("exp_linearizable.json"), "--kind", "1s", "--inputs",
                        ex("exp_linearizable_sequence.json"), "--json"});
    ASSERT_EQ(seq.code, 0) << seq.err;
    EXPECT_EQ(seq.doc()["type"], json::parse("[1, 3]"));
    EXPECT_EQ(seq.doc()["adapted_order"], 3);
    auto two = vbx_run({"generate", ex("exp_linearizable.json"), "--kind", "2s", "--inputs",
                        ex("exp_linearizable_2s.json"), "--json"});
    ASSERT_EQ(two.code, 0) << two.err;
    EXPECT_EQ(two.doc()["closure"], "zero");

    auto wrong = temp_file("wrong.json", R"({"l": 1, "blocks": [{"factors": [{"dV": "u22"}]}]})");
    auto hyp = vbx_run({"generate", ex("liouville.json"), "--kind", "1s", "--inputs", wrong, "--json"});
    EXPECT_EQ(hyp.code, 1);
    EXPECT_EQ(hyp.doc()["error"]["type"], "HypothesisError");
}

TEST(Cli, Classify) {
    auto pair = vbx_run({"classify", ex("pair_symbol.json"), "--json"});
    ASSERT_EQ(pair.code, 0) << pair.err;
    auto d = pair.doc();
    EXPECT_EQ(d["case"], "i");
    EXPECT_EQ(d["cubic"].size(), 4u);
    EXPECT_EQ(d["multiplicities"], json::parse("[1, 1, 1]"));

    auto sys = vbx_run({"classify", ex("cubic.json"), "--json"});
    EXPECT_EQ(sys.code, 0);
    EXPECT_EQ(sys.doc()["case"], "i");
    EXPECT_EQ(sys.doc()["symbol"]["kernel_dim"], 2);

    EXPECT_EQ(vbx_run({"classify", ex("degenerate_symbol.json")}).code, 1);
    auto generic = temp_file("generic.json", R"({"M": [[[1,2,0],[0,3,1],[1,0,1]], [[2,0,1],[1,1,0],[0,2,3]], [[0,1,1],[3,0,2],[1,1,1]]]})");
    auto g = vbx_run({"classify", generic, "--json"});
    EXPECT_EQ(g.code, 1);
    EXPECT_EQ(g.doc()["error"]["type"], "NonInvolutiveSymbol");
    auto wrong_rel = temp_file("wrong_rel.json", R"({"M": [[[0,1,0],[0,0,0],[0,0,0]], [[0,0,0],[0,0,1],[0,0,0]], [[0,0,1],[0,0,0],[0,0,0]]],
        "relations": [[[1,0,0],[0,0,0],[0,0,0]], [[0,0,1],[1,0,0],[0,-2,0]]]})");
    EXPECT_EQ(vbx_run({"classify", wrong_rel}).code, 2);
    auto u_dep = temp_file("udep.json", R"({"M": [[["u",1,0],[0,0,0],[0,0,0]], [[0,0,0],[0,0,1],[0,0,0]], [[0,0,1],[0,0,0],[0,0,0]]]})");
    EXPECT_EQ(vbx_run({"classify", u_dep}).code, 2);
}

TEST(Cli, Coframe) {
    auto kt = vbx_run({"coframe", ex("kt.json"), "--order", "2", "--verify", "--json"});
    ASSERT_EQ(kt.code, 0) << kt.err;
    auto d = kt.doc();
    EXPECT_EQ(d["elements"].size(), 7u);
    EXPECT_EQ(d["elements"][0]["label"], "Th");
    EXPECT_EQ(d["brackets"][0]["label"], "[X1,U]");
    EXPECT_EQ(vbx_run({"coframe", ex("kt.json"), "--partners", "1,1,1"}).code, 2);
    EXPECT_EQ(vbx_run({"coframe", ex("kt.json"), "--partners", "3,3,1"}).code, 0);
}

TEST(Cli, TextOutput) {
    auto r = vbx_run({"invariants", ex("cubic.json")});
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("H_123: u2/(u+1)"), std::string::npos);
    EXPECT_FALSE(json::accept(r.out));
}
