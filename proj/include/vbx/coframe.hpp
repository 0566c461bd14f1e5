#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbx/laplace.hpp"

namespace vbx {

// Iterates (i,j) transforms on the single operator L_ij; the other pairs never enter.
struct PairCascade {
    int i = 0, j = 0;
    std::vector<Expr> a_i;  // A^i_ij after m transforms
    std::vector<Expr> a_j;  // A^j_ij, invariant along the cascade
    std::vector<Expr> c;
    std::vector<Expr> h;    // H_ij after m transforms
    std::optional<int> p;   // first m with vanishing H, if reached
    bool probabilistic = false;
};

PairCascade pair_cascade(const LinearizedSystem& lin, int i, int j, int steps, const ZeroPolicy& policy);

struct AdaptedCoframe {
    int n = 3;
    int order = 0;
    Expr mu = Expr(1);
    BiForm theta;                                    // Theta = mu * theta
    std::array<int, 4> partner{};                    // i(j) for branch j
    std::map<int, std::vector<BiForm>> xi;           // xi[j][m - 1] is xi^m_j
    std::map<int, std::vector<Expr>> alpha;          // xi^{m+1}_j = X_j xi^m_j + alpha[j][m] xi^m_j
    std::map<int, PairCascade> cascade;              // the (i(j), j) cascade

    const BiForm& element(int j, int m) const;       // m = 0 gives Theta
    static std::string label(int j, int m);          // "Th", "xi:2^3"
};

// Default partner is the smallest index different from j.
AdaptedCoframe build_coframe(const LinearizedSystem& lin, int order, const ZeroPolicy& policy,
                             std::optional<std::array<int, 4>> partners = std::nullopt);

// xi^k_i = X_i^k(Theta); result[i][k - 1].
std::map<int, std::vector<BiForm>> characteristic_coframe(const LinearizedSystem& lin, int order);

// Coefficients of a (0,1) form on Theta (key (0,0)) and xi^m_j (key (j,m)).
std::map<std::pair<int, int>, Expr> to_adapted(const BiForm& w, const AdaptedCoframe& cf);

int adapted_order(const BiForm& w, const AdaptedCoframe& cf);

VerticalVectorField dual_U(const AdaptedCoframe& cf);
VerticalVectorField dual_V(const AdaptedCoframe& cf, int k, int l);

struct StructureRow {
    std::string element;               // "Th", "xi:1^2"
    int sigma = 0;                     // component sigma_k of d_H(element)
    bool congruence = false;
    std::vector<std::string> modulo;   // span ignored in a congruence row
    ZeroVerdict verdict;
    std::string component;             // first failing adapted component
};

struct StructureReport {
    std::vector<StructureRow> rows;
    bool pass = true;
};

StructureReport structure_check(const AdaptedCoframe& cf, const LinearizedSystem& lin, int upto,
                                const ZeroPolicy& policy);

struct BracketRow {
    std::string label;                 // "[X1,U]", "[X1,V1^1]"
    ZeroVerdict verdict;
    std::string component;
    std::map<std::string, Expr> components;  // computed vertical components
};

struct BracketReport {
    std::vector<BracketRow> rows;
    bool pass = true;
};

BracketReport bracket_check(const AdaptedCoframe& cf, const LinearizedSystem& lin, const std::vector<int>& fields,
                            const ZeroPolicy& policy);

}  // namespace vbx
