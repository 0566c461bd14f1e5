#pragma once

#include <gmpxx.h>

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "vbx/jet.hpp"

namespace vbx {

// Relation kernel of dimension below 2: the symbol cannot belong to an involutive system.
class NonInvolutiveSymbol : public Error {
public:
    NonInvolutiveSymbol(int kernel_dim, const std::string& msg) : Error(msg), kernel_dim(kernel_dim) {}
    int kernel_dim;
};

// a[0] xi^1 + a[1] xi^2 + a[2] xi^3.
using LinearForm = std::array<Expr, 3>;
// sum A[i][j] xi^i xi^j; A need not be symmetric.
using QuadraticForm = std::array<std::array<Expr, 3>, 3>;

// (l^1, l^2, l^3) with sum l^k M^k = 0.
using Relation = std::array<LinearForm, 3>;

struct SymbolData {
    std::array<QuadraticForm, 3> M;
    std::vector<Relation> relations;
    int kernel_dim = 0;
    bool degenerate = false;     // kernel_dim > 2
    bool probabilistic = false;  // some pivot decision was sampled
};

// Exponent triples of the ten cubic monomials, in a fixed order.
const std::array<std::array<int, 3>, 10>& cubic_monomials();

// Coefficients of sum_k l^k M^k on cubic_monomials().
std::array<Expr, 10> relation_residual(const std::array<QuadraticForm, 3>& M, const Relation& rel);
ZeroVerdict relation_holds(const std::array<QuadraticForm, 3>& M, const Relation& rel, const ZeroPolicy& policy);

// M^1 = xi^1 xi^2, M^2 = xi^2 xi^3, M^3 = xi^1 xi^3, the symbol of every u_ij = f_ij system with n = 3.
std::array<QuadraticForm, 3> pair_symbol();
QuadraticForm quadratic_monomial(int i, int j);  // xi^i xi^j, 1-based

// Kernel of the 10 x 9 map (l^k coefficients) -> sum l^k M^k; throws NonInvolutiveSymbol below dimension 2.
SymbolData symbol_relations(const std::array<QuadraticForm, 3>& M, const ZeroPolicy& policy = {});
SymbolData symbol_relations(const SystemSpec& sys, const ZeroPolicy& policy = {});

enum class SymbolCase { ThreeSimple, DoubleSimple, Triple, Degenerate };

struct ClassificationResult {
    std::array<Expr, 4> cubic;         // coefficient of z^0 .. z^3 in det(l + z m)
    std::vector<int> multiplicities;   // on the projective line, descending; empty when degenerate
    int infinity_multiplicity = 0;     // 3 - degree
    std::vector<std::pair<std::string, int>> roots;  // rational roots and "inf", when resolved
    bool exact = true;                 // rational cubic, decided by gcd with the derivative
    bool probabilistic = false;
    SymbolCase kind = SymbolCase::Degenerate;

    std::string case_label() const;    // "i", "ii", "iii", "iv-v"
};

// 3 x 3 matrix whose row k holds the coefficients of l^k + z m^k; entries are (constant, z) pairs.
std::array<std::array<std::array<Expr, 2>, 3>, 3> pencil_matrix(const Relation& l, const Relation& m);

ClassificationResult classify_pencil(const Relation& l, const Relation& m, const ZeroPolicy& policy = {});
// Requires exactly two relations.
ClassificationResult classify(const SymbolData& data, const ZeroPolicy& policy = {});

}  // namespace vbx
