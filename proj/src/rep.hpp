#pragma once

#include "poly.hpp"
#include "vbx/expr.hpp"

namespace vbx::detail {

// Canonical N/D: gcd-reduced (conservatively across exp factors), D integer-primitive with
// positive leading coefficient and free of exp monomial factors, D = 1 for polynomials.
struct RatFun {
    Poly num;
    Poly den;
    std::size_t h = 0;
};

struct KernelInfo {
    VarKind fn;
    Expr arg;
    int q = 0;  // root index for Root
};

const KernelInfo& kernel(Var v);
Expr from_poly(Poly p);
Expr make_ratfun(Poly num, Poly den);
Expr make_reduced(Poly num, Poly den);  // caller guarantees gcd(num, den) = 1
std::string var_name(Var v);

}  // namespace vbx::detail
