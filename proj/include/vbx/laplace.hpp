#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "vbx/biform.hpp"

namespace vbx {

class InvariantVanishes : public Error {
public:
    InvariantVanishes(std::string which, const std::string& msg) : Error(msg), which(std::move(which)) {}
    std::string which;  // "H12", "H123", ...
};

// Operators L_ij = X_i X_j + A^i_ij X_i + A^j_ij X_j + C_ij, one per unordered pair.
struct LinearizedSystem {
    SystemSpec sys;
    int n = 3;
    std::map<std::pair<int, int>, Expr> A;  // (i, j) -> A^i_ij, the coefficient of X_i in L_ij
    std::map<std::pair<int, int>, Expr> C;  // keyed with i < j
    Expr mu = Expr(1);
    std::vector<std::pair<int, int>> provenance;
    BiForm theta;  // the contact form annihilated by every L_ij
    bool adjoint = false;

    const Expr& a(int upper, int other) const;
    const Expr& c(int i, int j) const;
    Expr& a(int upper, int other);
    Expr& c(int i, int j);
    std::vector<std::pair<int, int>> pairs() const;  // unordered, i < j
};

using AdjointSystem = LinearizedSystem;

std::string pair_label(int i, int j);
std::string triple_label(int i, int j, int k);

LinearizedSystem linearize(const SystemSpec& sys, const Expr& mu = Expr(1), const ZeroPolicy* policy = nullptr);

struct RelationCheck {
    std::string label;  // "F1(l,j,k)" etc.
    Expr residual;
    ZeroVerdict verdict;
};

struct CompatibilityReport {
    std::vector<RelationCheck> relations;
    bool pass = true;
};

CompatibilityReport compatibility(const LinearizedSystem& lin, const ZeroPolicy& policy);

Expr H(const LinearizedSystem& lin, int i, int j);
Expr H(const LinearizedSystem& lin, int i, int j, int k);

struct LaplaceInvariants {
    std::map<std::pair<int, int>, Expr> pair;               // ordered (i, j)
    std::map<std::tuple<int, int, int>, Expr> triple;       // ordered (i, j, k), k outside {i, j}
};

LaplaceInvariants invariants(const LinearizedSystem& lin);

int third_index(int i, int j);

// The (i,j) transform; throws InvariantVanishes when H_ij or H_ijk vanishes under policy.
LinearizedSystem transform(const LinearizedSystem& lin, int i, int j, const ZeroPolicy& policy);

struct LaplaceIndex {
    enum class Kind { Finite, AtLeast, Blocked } kind = Kind::Finite;
    int p = 0;                 // Finite: index; AtLeast: cap; Blocked: step reached
    bool probabilistic = false;
    std::string blocked_by;    // Blocked only
    std::vector<Expr> h;       // H_ij at each step
    std::string str() const;
};

LaplaceIndex index(const LinearizedSystem& lin, int i, int j, int cap, const ZeroPolicy& policy);

AdjointSystem adjoint(const LinearizedSystem& lin);

Expr apply(const LinearizedSystem& op, int i, int j, const Expr& t);
BiForm apply(const LinearizedSystem& op, int i, int j, const BiForm& t);

// Every operator of the system annihilates its own theta.
struct AnnihilationReport {
    std::vector<std::pair<std::string, FormVerdict>> pairs;
    bool pass = true;
};
AnnihilationReport annihilation_check(const LinearizedSystem& lin, const ZeroPolicy& policy);

ZeroVerdict inverse_check(const LinearizedSystem& lin, int i, int j, const ZeroPolicy& policy);

// Expansions of X_i, X_j, X_k applied to xi_ij = X_j(Theta) + A^i_ij Theta; k is absent for n = 2.
struct TransformRelations {
    std::vector<std::pair<std::string, FormVerdict>> relations;
    bool pass = true;
};
TransformRelations transform_relations(const LinearizedSystem& lin, int i, int j, const ZeroPolicy& policy);

}  // namespace vbx
