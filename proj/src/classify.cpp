#include "vbx/classify.hpp"

#include <algorithm>
#include <stdexcept>

namespace vbx {

namespace {

using QPoly = std::vector<mpq_class>;  // ascending powers, no trailing zeros

void trim(QPoly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

int deg(const QPoly& p) { return static_cast<int>(p.size()) - 1; }

QPoly derivative(const QPoly& p) {
    QPoly d;
    for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * static_cast<long>(k));
    trim(d);
    return d;
}

// Remainder of a by b, b nonzero.
QPoly rem(QPoly a, const QPoly& b) {
    while (deg(a) >= deg(b)) {
        mpq_class q = a.back() / b.back();
        int shift = deg(a) - deg(b);
        for (std::size_t k = 0; k < b.size(); ++k) a[k + shift] -= q * b[k];
        trim(a);
    }
    return a;
}

QPoly divide(QPoly a, const QPoly& b) {
    QPoly q(std::max(0, deg(a) - deg(b) + 1));
    while (!a.empty() && deg(a) >= deg(b)) {
        mpq_class c = a.back() / b.back();
        int shift = deg(a) - deg(b);
        q[shift] = c;
        for (std::size_t k = 0; k < b.size(); ++k) a[k + shift] -= c * b[k];
        trim(a);
    }
    trim(q);
    return q;
}

QPoly monic(QPoly p) {
    mpq_class lc = p.back();
    for (auto& c : p) c /= lc;
    return p;
}

QPoly gcd(QPoly a, QPoly b) {
    while (!b.empty()) {
        QPoly r = rem(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return a.empty() ? a : monic(a);
}

std::optional<mpq_class> rational_sqrt(const mpq_class& q) {
    if (q < 0) return std::nullopt;
    mpz_class n = q.get_num(), d = q.get_den();
    if (!mpz_perfect_square_p(n.get_mpz_t()) || !mpz_perfect_square_p(d.get_mpz_t())) return std::nullopt;
    mpz_class rn, rd;
    mpz_sqrt(rn.get_mpz_t(), n.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), d.get_mpz_t());
    return mpq_class(rn, rd);
}

std::vector<mpz_class> divisors(mpz_class n) {
    n = abs(n);
    std::vector<mpz_class> out;
    if (n == 0 || n > mpz_class("1000000000000")) return out;
    for (mpz_class k = 1; k * k <= n; ++k) {
        if (n % k != 0) continue;
        out.push_back(k);
        if (k * k != n) out.push_back(n / k);
    }
    return out;
}

mpq_class evaluate(const QPoly& p, const mpq_class& z) {
    mpq_class acc = 0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * z + *it;
    return acc;
}

// Rational roots of a squarefree polynomial of degree <= 3 with p(0) != 0; may be partial.
std::vector<mpq_class> rational_roots(QPoly p) {
    std::vector<mpq_class> out;
    if (deg(p) == 3) {
        mpz_class den = 1;
        for (auto& c : p) den = lcm(den, c.get_den());
        std::vector<mpz_class> num_div = divisors(mpz_class(p[0] * den)), lc_div = divisors(mpz_class(p[3] * den));
        for (const auto& a : num_div) {
            for (const auto& b : lc_div) {
                for (int sign : {1, -1}) {
                    mpq_class z(a * sign, b);
                    z.canonicalize();
                    if (evaluate(p, z) == 0) {
                        out.push_back(z);
                        p = divide(p, {-z, 1});
                        goto deflated;
                    }
                }
            }
        }
        return out;
    }
deflated:
    if (deg(p) == 1) {
        out.push_back(-p[0] / p[1]);
    } else if (deg(p) == 2) {
        mpq_class disc = p[1] * p[1] - 4 * p[0] * p[2];
        if (auto r = rational_sqrt(disc)) {
            out.push_back((-p[1] + *r) / (2 * p[2]));
            out.push_back((-p[1] - *r) / (2 * p[2]));
        }
    }
    return out;
}

std::string qstr(const mpq_class& q) { return q.get_str(); }

// Shared verdict bookkeeping for the sampled branch.
struct Decider {
    const ZeroPolicy& policy;
    bool probabilistic = false;

    bool zero(const Expr& e) {
        if (e.is_zero()) return true;
        ZeroVerdict v = is_zero(e, policy);
        if (v.kind == ZeroVerdict::Kind::ProbablyZero) probabilistic = true;
        return v.vanishes();
    }
};

Expr poly_coefficient(const QuadraticForm& A, int i, int j) {
    return i == j ? A[i][i] : A[i][j] + A[j][i];
}

int monomial_index(const std::array<int, 3>& e) {
    const auto& mons = cubic_monomials();
    for (int k = 0; k < 10; ++k)
        if (mons[k] == e) return k;
    throw std::logic_error("not a cubic monomial");
}

// Column 3k + a carries the coefficient of xi^{a+1} in l^{k+1}.
std::array<std::array<Expr, 9>, 10> relation_matrix(const std::array<QuadraticForm, 3>& M) {
    std::array<std::array<Expr, 9>, 10> T;
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 3; ++a)
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    Expr c = poly_coefficient(M[k], i, j);
                    if (c.is_zero()) continue;
                    std::array<int, 3> e{};
                    ++e[a];
                    ++e[i];
                    ++e[j];
                    T[monomial_index(e)][3 * k + a] += c;
                }
    return T;
}

}  // namespace

const std::array<std::array<int, 3>, 10>& cubic_monomials() {
    static const std::array<std::array<int, 3>, 10> mons = [] {
        std::array<std::array<int, 3>, 10> m{};
        int k = 0;
        for (int a = 3; a >= 0; --a)
            for (int b = 3 - a; b >= 0; --b) m[k++] = {a, b, 3 - a - b};
        return m;
    }();
    return mons;
}

std::array<Expr, 10> relation_residual(const std::array<QuadraticForm, 3>& M, const Relation& rel) {
    std::array<Expr, 10> out;
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 3; ++a) {
            if (rel[k][a].is_zero()) continue;
            for (int i = 0; i < 3; ++i)
                for (int j = i; j < 3; ++j) {
                    Expr c = poly_coefficient(M[k], i, j);
                    if (c.is_zero()) continue;
                    std::array<int, 3> e{};
                    ++e[a];
                    ++e[i];
                    ++e[j];
                    out[monomial_index(e)] += rel[k][a] * c;
                }
        }
    return out;
}

ZeroVerdict relation_holds(const std::array<QuadraticForm, 3>& M, const Relation& rel, const ZeroPolicy& policy) {
    ZeroVerdict acc;
    for (const auto& c : relation_residual(M, rel)) acc = combine(acc, is_zero(c, policy));
    return acc;
}

QuadraticForm quadratic_monomial(int i, int j) {
    QuadraticForm A;
    A[i - 1][j - 1] = Expr(1);
    return A;
}

std::array<QuadraticForm, 3> pair_symbol() {
    return {quadratic_monomial(1, 2), quadratic_monomial(2, 3), quadratic_monomial(1, 3)};
}

SymbolData symbol_relations(const std::array<QuadraticForm, 3>& M, const ZeroPolicy& policy) {
    auto T = relation_matrix(M);
    Decider dec{policy};

    // Reduced row echelon form over the coefficient field.
    std::vector<int> pivot_col;
    int row = 0;
    for (int col = 0; col < 9 && row < 10; ++col) {
        int p = -1;
        for (int r = row; r < 10; ++r)
            if (!dec.zero(T[r][col])) {
                p = r;
                break;
            }
        if (p < 0) continue;
        std::swap(T[row], T[p]);
        Expr inv = Expr(1) / T[row][col];
        for (int c = col; c < 9; ++c) T[row][c] *= inv;
        for (int r = 0; r < 10; ++r) {
            if (r == row || T[r][col].is_zero()) continue;
            Expr f = T[r][col];
            for (int c = col; c < 9; ++c) T[r][c] -= f * T[row][c];
        }
        pivot_col.push_back(col);
        ++row;
    }

    SymbolData out;
    out.M = M;
    out.kernel_dim = 9 - static_cast<int>(pivot_col.size());
    out.degenerate = out.kernel_dim > 2;
    out.probabilistic = dec.probabilistic;
    if (out.kernel_dim < 2)
        throw NonInvolutiveSymbol(out.kernel_dim, "relation kernel has dimension " + std::to_string(out.kernel_dim) +
                                                      ", an involutive symbol needs at least 2");

    for (int f = 0; f < 9; ++f) {
        if (std::find(pivot_col.begin(), pivot_col.end(), f) != pivot_col.end()) continue;
        std::array<Expr, 9> v;
        v[f] = Expr(1);
        for (std::size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -T[r][f];
        Relation rel;
        for (int k = 0; k < 3; ++k)
            for (int a = 0; a < 3; ++a) rel[k][a] = v[3 * k + a];
        // Recomputed from M, not trusted from the elimination.
        if (!relation_holds(M, rel, policy).vanishes()) throw std::logic_error("kernel vector fails its relation");
        out.relations.push_back(rel);
    }
    return out;
}

SymbolData symbol_relations(const SystemSpec& sys, const ZeroPolicy& policy) {
    if (sys.n != 3) throw InputError("symbol classification needs n = 3");
    return symbol_relations(pair_symbol(), policy);
}

std::string ClassificationResult::case_label() const {
    switch (kind) {
        case SymbolCase::ThreeSimple: return "i";
        case SymbolCase::DoubleSimple: return "ii";
        case SymbolCase::Triple: return "iii";
        case SymbolCase::Degenerate: return "iv-v";
    }
    return "iv-v";
}

std::array<std::array<std::array<Expr, 2>, 3>, 3> pencil_matrix(const Relation& l, const Relation& m) {
    std::array<std::array<std::array<Expr, 2>, 3>, 3> P;
    for (int k = 0; k < 3; ++k)
        for (int a = 0; a < 3; ++a) P[k][a] = {l[k][a], m[k][a]};
    return P;
}

ClassificationResult classify_pencil(const Relation& l, const Relation& m, const ZeroPolicy& policy) {
    auto P = pencil_matrix(l, m);
    ClassificationResult out;

    static const int perms[6][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}, {0, 2, 1}, {2, 1, 0}, {1, 0, 2}};
    for (int s = 0; s < 6; ++s) {
        std::array<Expr, 4> prod{Expr(s < 3 ? 1 : -1), Expr(0), Expr(0), Expr(0)};
        for (int k = 0; k < 3; ++k) {
            const auto& e = P[k][perms[s][k]];
            std::array<Expr, 4> next;
            for (int d = 0; d < 3; ++d) {
                if (prod[d].is_zero()) continue;
                next[d] += prod[d] * e[0];
                next[d + 1] += prod[d] * e[1];
            }
            prod = next;
        }
        for (int d = 0; d < 4; ++d) out.cubic[d] += prod[d];
    }

    bool rational = std::all_of(out.cubic.begin(), out.cubic.end(), [](const Expr& c) { return c.is_constant(); });
    auto assign = [&](std::vector<int> mult) {
        std::sort(mult.rbegin(), mult.rend());
        out.multiplicities = mult;
        if (mult == std::vector<int>{1, 1, 1})
            out.kind = SymbolCase::ThreeSimple;
        else if (mult == std::vector<int>{2, 1})
            out.kind = SymbolCase::DoubleSimple;
        else
            out.kind = SymbolCase::Triple;
    };

    if (rational) {
        QPoly p;
        for (const auto& c : out.cubic) p.push_back(*c.constant());
        trim(p);
        if (p.empty()) return out;
        out.infinity_multiplicity = 3 - deg(p);

        // Split off z = 0, then square-free decomposition of the rest via gcd with the derivative.
        int zero_mult = 0;
        while (p[0] == 0) {
            p.erase(p.begin());
            ++zero_mult;
        }
        std::vector<int> mult;
        if (out.infinity_multiplicity > 0) {
            mult.push_back(out.infinity_multiplicity);
            out.roots.emplace_back("inf", out.infinity_multiplicity);
        }
        if (zero_mult > 0) {
            mult.push_back(zero_mult);
            out.roots.emplace_back("0", zero_mult);
        }
        if (deg(p) >= 1) {
            QPoly g = gcd(p, derivative(p));
            if (deg(g) == 0) {
                for (int k = 0; k < deg(p); ++k) mult.push_back(1);
                for (const auto& r : rational_roots(p)) out.roots.emplace_back(qstr(r), 1);
            } else if (deg(g) == 1) {
                // p = c (z - r)^2 (z - s)^e
                mpq_class r = -g[0];
                mult.push_back(2);
                out.roots.emplace_back(qstr(r), 2);
                QPoly rest = divide(p, {r * r, -2 * r, 1});
                if (deg(rest) == 1) {
                    mult.push_back(1);
                    out.roots.emplace_back(qstr(-rest[0] / rest[1]), 1);
                }
            } else {
                // g = (z - r)^2 and p = c (z - r)^3
                mpq_class r = -g[1] / 2;
                mult.push_back(3);
                out.roots.emplace_back(qstr(r), 3);
            }
        }
        assign(mult);
        return out;
    }

    // Expr coefficients: invariants of the binary cubic a z^3 + b z^2 + c z + d.
    out.exact = false;
    Decider dec{policy};
    const Expr &d = out.cubic[0], &c = out.cubic[1], &b = out.cubic[2], &a = out.cubic[3];
    if (dec.zero(a) && dec.zero(b) && dec.zero(c) && dec.zero(d)) {
        out.probabilistic = dec.probabilistic;
        return out;
    }
    for (int k = 3; k >= 0 && dec.zero(out.cubic[k]); --k) ++out.infinity_multiplicity;
    if (out.infinity_multiplicity > 0) out.roots.emplace_back("inf", out.infinity_multiplicity);
    bool triple = dec.zero(b * b - 3 * a * c) && dec.zero(b * c - 9 * a * d) && dec.zero(c * c - 3 * b * d);
    if (triple) {
        assign({3});
    } else {
        Expr disc = b * b * c * c - 4 * a * c * c * c - 4 * b * b * b * d - 27 * a * a * d * d + 18 * a * b * c * d;
        assign(dec.zero(disc) ? std::vector<int>{2, 1} : std::vector<int>{1, 1, 1});
    }
    out.probabilistic = dec.probabilistic;
    return out;
}

ClassificationResult classify(const SymbolData& data, const ZeroPolicy& policy) {
    if (data.relations.size() != 2)
        throw DomainError("classification needs a relation basis of rank 2, got " +
                          std::to_string(data.relations.size()));
    ClassificationResult r = classify_pencil(data.relations[0], data.relations[1], policy);
    r.probabilistic = r.probabilistic || data.probabilistic;
    return r;
}

}  // namespace vbx
