#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <map>
#include <utility>
#include <vector>

namespace vbx::detail {

// Variable ids: coordinates live below 1<<24, kernels carry their kind in the top byte.
using Var = std::uint32_t;

enum class VarKind : std::uint32_t { Coord = 0, Exp = 1, Log = 2, Sin = 3, Cos = 4, Root = 5 };

inline VarKind var_kind(Var v) { return static_cast<VarKind>(v >> 24); }
inline std::uint32_t var_index(Var v) { return v & 0xFFFFFFu; }
inline Var make_kernel_var(VarKind k, std::uint32_t idx) { return (static_cast<Var>(k) << 24) | idx; }

struct Mono {
    std::vector<std::pair<Var, int>> f;  // sorted by var, exponents > 0

    bool empty() const { return f.empty(); }
    int degree() const;
    int exponent(Var v) const;
    bool has_exp() const;
    bool operator==(const Mono&) const = default;
};

// Lex order, smaller var id is more significant. Returns -1, 0, 1.
int mono_cmp(const Mono& a, const Mono& b);
Mono mono_mul(const Mono& a, const Mono& b);
bool mono_divides(const Mono& d, const Mono& m);
Mono mono_div(const Mono& m, const Mono& d);
Mono mono_gcd(const Mono& a, const Mono& b);

// Collapses every exp factor of a monomial into a single exp(sum). Defined with the kernel table.
void merge_exp_factors(Mono& m);

struct Term {
    Mono m;
    mpq_class c;
};

class Poly {
public:
    std::vector<Term> t;  // strictly descending in mono_cmp, nonzero coefficients

    Poly() = default;
    explicit Poly(const mpq_class& c);
    static Poly var(Var v, int e = 1);
    static Poly mono(const Mono& m, const mpq_class& c);

    bool is_zero() const { return t.empty(); }
    bool is_const() const { return t.empty() || (t.size() == 1 && t[0].m.empty()); }
    mpq_class const_value() const { return t.empty() ? mpq_class(0) : t[0].c; }
    bool is_one() const { return t.size() == 1 && t[0].m.empty() && t[0].c == 1; }
    bool has_exp() const;
    bool has_kind(VarKind k) const;
    bool has_kernels() const;

    void normalize();
    std::vector<Var> vars() const;
    int degree(Var v) const;
    int total_degree() const;
    std::map<int, Poly> coeffs(Var v) const;
    Poly diff(Var v) const;
    Mono mono_content() const;
    mpq_class content() const;  // positive rational content

    bool operator==(const Poly& o) const;
    std::size_t hash() const;
};

Poly operator+(const Poly& a, const Poly& b);
Poly operator-(const Poly& a, const Poly& b);
Poly operator-(const Poly& a);
Poly operator*(const Poly& a, const Poly& b);
Poly operator*(const Poly& a, const mpq_class& c);
Poly mul_mono(const Poly& a, const Mono& m);
Poly div_mono(const Poly& a, const Mono& m);
Poly pow(const Poly& a, int e);

// Exact division, throws std::logic_error when b does not divide a.
Poly divexact(const Poly& a, const Poly& b);

// Integer-primitive, positive leading coefficient. Zero stays zero.
Poly primitive(const Poly& a);

// Greatest common divisor up to a rational unit, returned primitive. Conservative on exp factors.
Poly gcd(const Poly& a, const Poly& b);

}  // namespace vbx::detail
