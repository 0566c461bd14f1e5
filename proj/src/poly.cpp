#include "poly.hpp"

#include <algorithm>
#include <functional>
#include <stdexcept>

namespace vbx::detail {

int Mono::degree() const {
    int d = 0;
    for (auto& [v, e] : f) d += e;
    return d;
}

int Mono::exponent(Var v) const {
    for (auto& [w, e] : f)
        if (w == v) return e;
    return 0;
}

bool Mono::has_exp() const {
    for (auto& [v, e] : f)
        if (var_kind(v) == VarKind::Exp) return true;
    return false;
}

int mono_cmp(const Mono& a, const Mono& b) {
    std::size_t n = std::min(a.f.size(), b.f.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.f[i].first != b.f[i].first) return a.f[i].first < b.f[i].first ? 1 : -1;
        if (a.f[i].second != b.f[i].second) return a.f[i].second > b.f[i].second ? 1 : -1;
    }
    if (a.f.size() == b.f.size()) return 0;
    return a.f.size() > b.f.size() ? 1 : -1;
}

Mono mono_mul(const Mono& a, const Mono& b) {
    Mono r;
    r.f.reserve(a.f.size() + b.f.size());
    std::size_t i = 0, j = 0;
    int exps = 0;
    bool stacked = false;
    while (i < a.f.size() || j < b.f.size()) {
        if (j == b.f.size() || (i < a.f.size() && a.f[i].first < b.f[j].first)) {
            r.f.push_back(a.f[i++]);
        } else if (i == a.f.size() || b.f[j].first < a.f[i].first) {
            r.f.push_back(b.f[j++]);
        } else {
            r.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
            ++i;
            ++j;
        }
        if (var_kind(r.f.back().first) == VarKind::Exp) {
            ++exps;
            if (r.f.back().second > 1) stacked = true;
        }
    }
    if (exps > 1 || stacked) merge_exp_factors(r);
    return r;
}

bool mono_divides(const Mono& d, const Mono& m) {
    std::size_t j = 0;
    for (auto& [v, e] : d.f) {
        while (j < m.f.size() && m.f[j].first < v) ++j;
        if (j == m.f.size() || m.f[j].first != v || m.f[j].second < e) return false;
    }
    return true;
}

Mono mono_div(const Mono& m, const Mono& d) {
    Mono r;
    std::size_t j = 0;
    for (auto& [v, e] : m.f) {
        int k = e;
        if (j < d.f.size() && d.f[j].first == v) k -= d.f[j++].second;
        if (k < 0) throw std::logic_error("monomial division is not exact");
        if (k > 0) r.f.emplace_back(v, k);
    }
    if (j != d.f.size()) throw std::logic_error("monomial division is not exact");
    return r;
}

Mono mono_gcd(const Mono& a, const Mono& b) {
    Mono r;
    std::size_t j = 0;
    for (auto& [v, e] : a.f) {
        while (j < b.f.size() && b.f[j].first < v) ++j;
        if (j < b.f.size() && b.f[j].first == v) r.f.emplace_back(v, std::min(e, b.f[j].second));
    }
    return r;
}

Poly::Poly(const mpq_class& c) {
    if (c != 0) t.push_back({Mono{}, c});
}

Poly Poly::var(Var v, int e) {
    Poly p;
    Mono m;
    if (e > 0) m.f.emplace_back(v, e);
    p.t.push_back({std::move(m), mpq_class(1)});
    return p;
}

Poly Poly::mono(const Mono& m, const mpq_class& c) {
    Poly p;
    if (c != 0) p.t.push_back({m, c});
    return p;
}

bool Poly::has_exp() const {
    for (auto& term : t)
        if (term.m.has_exp()) return true;
    return false;
}

bool Poly::has_kind(VarKind k) const {
    for (auto& term : t)
        for (auto& [v, e] : term.m.f)
            if (var_kind(v) == k) return true;
    return false;
}

bool Poly::has_kernels() const {
    for (auto& term : t)
        for (auto& [v, e] : term.m.f)
            if (var_kind(v) != VarKind::Coord) return true;
    return false;
}

void Poly::normalize() {
    std::sort(t.begin(), t.end(), [](const Term& a, const Term& b) { return mono_cmp(a.m, b.m) > 0; });
    std::vector<Term> out;
    out.reserve(t.size());
    for (auto& term : t) {
        if (!out.empty() && out.back().m == term.m) {
            out.back().c += term.c;
        } else {
            if (!out.empty() && out.back().c == 0) out.pop_back();
            out.push_back(std::move(term));
        }
    }
    if (!out.empty() && out.back().c == 0) out.pop_back();
    t = std::move(out);
}

std::vector<Var> Poly::vars() const {
    std::vector<Var> vs;
    for (auto& term : t)
        for (auto& [v, e] : term.m.f) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
}

int Poly::degree(Var v) const {
    int d = 0;
    for (auto& term : t) d = std::max(d, term.m.exponent(v));
    return d;
}

int Poly::total_degree() const {
    int d = 0;
    for (auto& term : t) d = std::max(d, term.m.degree());
    return d;
}

std::map<int, Poly> Poly::coeffs(Var v) const {
    std::map<int, Poly> out;
    for (auto& term : t) {
        Mono m;
        int k = 0;
        for (auto& [w, e] : term.m.f) {
            if (w == v)
                k = e;
            else
                m.f.emplace_back(w, e);
        }
        out[k].t.push_back({std::move(m), term.c});
    }
    for (auto& [k, p] : out) p.normalize();
    return out;
}

Poly Poly::diff(Var v) const {
    Poly r;
    for (auto& term : t) {
        Mono m;
        int k = 0;
        for (auto& [w, e] : term.m.f) {
            if (w == v) {
                k = e;
                if (e > 1) m.f.emplace_back(w, e - 1);
            } else {
                m.f.emplace_back(w, e);
            }
        }
        if (k > 0) r.t.push_back({std::move(m), term.c * k});
    }
    r.normalize();
    return r;
}

Mono Poly::mono_content() const {
    if (t.empty()) return {};
    Mono g = t[0].m;
    for (std::size_t i = 1; i < t.size() && !g.empty(); ++i) g = mono_gcd(g, t[i].m);
    return g;
}

mpq_class Poly::content() const {
    if (t.empty()) return 0;
    mpz_class num = 0, den = 1;
    for (auto& term : t) {
        mpz_class a = abs(term.c.get_num());
        mpz_gcd(num.get_mpz_t(), num.get_mpz_t(), a.get_mpz_t());
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), term.c.get_den_mpz_t());
    }
    mpq_class r(num, den);
    r.canonicalize();
    return r;
}

bool Poly::operator==(const Poly& o) const {
    if (t.size() != o.t.size()) return false;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i].c != o.t[i].c || !(t[i].m == o.t[i].m)) return false;
    return true;
}

std::size_t Poly::hash() const {
    std::size_t h = 0x9e3779b97f4a7c15ull;
    auto mix = [&h](std::size_t x) { h ^= x + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2); };
    for (auto& term : t) {
        for (auto& [v, e] : term.m.f) {
            mix(v);
            mix(static_cast<std::size_t>(e));
        }
        mix(std::hash<std::string>{}(term.c.get_str()));
    }
    return h;
}

Poly operator+(const Poly& a, const Poly& b) {
    Poly r;
    r.t.reserve(a.t.size() + b.t.size());
    std::size_t i = 0, j = 0;
    while (i < a.t.size() || j < b.t.size()) {
        int c = (i == a.t.size()) ? -1 : (j == b.t.size()) ? 1 : mono_cmp(a.t[i].m, b.t[j].m);
        if (c > 0) {
            r.t.push_back(a.t[i++]);
        } else if (c < 0) {
            r.t.push_back(b.t[j++]);
        } else {
            mpq_class s = a.t[i].c + b.t[j].c;
            if (s != 0) r.t.push_back({a.t[i].m, s});
            ++i;
            ++j;
        }
    }
    return r;
}

Poly operator-(const Poly& a) {
    Poly r = a;
    for (auto& term : r.t) term.c = -term.c;
    return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return {};
    if (a.is_const()) return b * a.t[0].c;
    if (b.is_const()) return a * b.t[0].c;
    Poly r;
    r.t.reserve(a.t.size() * b.t.size());
    for (auto& x : a.t)
        for (auto& y : b.t) r.t.push_back({mono_mul(x.m, y.m), x.c * y.c});
    r.normalize();
    return r;
}

Poly operator*(const Poly& a, const mpq_class& c) {
    if (c == 0) return {};
    Poly r = a;
    for (auto& term : r.t) term.c *= c;
    return r;
}

Poly mul_mono(const Poly& a, const Mono& m) {
    if (m.empty()) return a;
    Poly r;
    r.t.reserve(a.t.size());
    for (auto& term : a.t) r.t.push_back({mono_mul(term.m, m), term.c});
    r.normalize();
    return r;
}

Poly div_mono(const Poly& a, const Mono& m) {
    if (m.empty()) return a;
    Poly r;
    r.t.reserve(a.t.size());
    for (auto& term : a.t) r.t.push_back({mono_div(term.m, m), term.c});
    r.normalize();
    return r;
}

Poly pow(const Poly& a, int e) {
    Poly r(mpq_class(1)), b = a;
    while (e > 0) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

Poly divexact(const Poly& a, const Poly& b) {
    if (b.is_zero()) throw std::logic_error("division by zero polynomial");
    if (b.is_const()) return a * (1 / b.t[0].c);
    if (b.t.size() == 1) return div_mono(a, b.t[0].m) * (1 / b.t[0].c);
    Poly q, r = a;
    const Term& lb = b.t[0];
    while (!r.is_zero()) {
        const Term& lr = r.t[0];
        if (!mono_divides(lb.m, lr.m)) throw std::logic_error("polynomial division is not exact");
        Mono m = mono_div(lr.m, lb.m);
        mpq_class c = lr.c / lb.c;
        q.t.push_back({m, c});
        r = r - mul_mono(b, m) * c;
    }
    q.normalize();
    return q;
}

Poly primitive(const Poly& a) {
    if (a.is_zero()) return a;
    mpq_class c = a.content();
    if (a.t[0].c < 0) c = -c;
    return a * (1 / c);
}

namespace {

Poly gcd_rec(const Poly& a, const Poly& b);

Poly content_in(const Poly& p, Var v) {
    Poly g;
    for (auto& [k, c] : p.coeffs(v)) {
        g = g.is_zero() ? primitive(c) : gcd_rec(g, c);
        if (g.is_const()) return Poly(mpq_class(1));
    }
    return g;
}

// Pseudo-remainder of a by b in v, one leading-coefficient multiplication per step.
Poly prem(Poly a, const Poly& b, Var v) {
    int db = b.degree(v);
    auto cb = b.coeffs(v);
    const Poly& lb = cb[db];
    while (!a.is_zero()) {
        int da = a.degree(v);
        if (da < db) break;
        Poly la = a.coeffs(v)[da];
        Poly shift = la;
        if (da > db) shift = mul_mono(la, Mono{{{v, da - db}}});
        a = lb * a - shift * b;
    }
    return a;
}

Poly prs(Poly a, Poly b, Var v) {
    if (a.degree(v) < b.degree(v)) std::swap(a, b);
    for (;;) {
        if (b.degree(v) == 0) return Poly(mpq_class(1));
        Poly r = prem(a, b, v);
        if (r.is_zero()) {
            Poly c = content_in(b, v);
            return primitive(divexact(b, c));
        }
        a = std::move(b);
        Poly c = content_in(r, v);
        b = primitive(divexact(r, c));
    }
}

// gcd of a against every coefficient of b viewed as a polynomial in the vars selected by pick.
Poly gcd_with_coeffs(const Poly& a, const Poly& b, const std::function<bool(Var)>& pick) {
    std::map<std::vector<std::pair<Var, int>>, Poly> buckets;
    for (auto& term : b.t) {
        std::vector<std::pair<Var, int>> key;
        Mono rest;
        for (auto& f : term.m.f) {
            if (pick(f.first))
                key.push_back(f);
            else
                rest.f.push_back(f);
        }
        buckets[key].t.push_back({std::move(rest), term.c});
    }
    Poly g = primitive(a);
    for (auto& [k, c] : buckets) {
        c.normalize();
        g = gcd_rec(g, c);
        if (g.is_const()) return Poly(mpq_class(1));
    }
    return g;
}

Poly gcd_rec(const Poly& a, const Poly& b) {
    if (a.is_zero()) return primitive(b);
    if (b.is_zero()) return primitive(a);
    if (a.is_const() || b.is_const()) return Poly(mpq_class(1));
    Mono ma = a.mono_content(), mb = b.mono_content();
    Mono gm = mono_gcd(ma, mb);
    Poly A = div_mono(a, ma), B = div_mono(b, mb);
    Poly unit = Poly::mono(gm, 1);
    if (A.is_const() || B.is_const()) return unit;
    A = primitive(A);
    B = primitive(B);
    if (A == B) return mul_mono(A, gm);

    bool ea = A.has_exp(), eb = B.has_exp();
    auto is_exp = [](Var v) { return var_kind(v) == VarKind::Exp; };
    if (ea && eb) return unit;
    if (ea) return mul_mono(gcd_with_coeffs(B, A, is_exp), gm);
    if (eb) return mul_mono(gcd_with_coeffs(A, B, is_exp), gm);

    auto va = A.vars(), vb = B.vars();
    std::vector<Var> only_a, only_b, common;
    std::set_difference(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(only_a));
    std::set_difference(vb.begin(), vb.end(), va.begin(), va.end(), std::back_inserter(only_b));
    if (!only_a.empty()) {
        auto pick = [&](Var v) { return std::binary_search(only_a.begin(), only_a.end(), v); };
        return mul_mono(gcd_with_coeffs(B, A, pick), gm);
    }
    if (!only_b.empty()) {
        auto pick = [&](Var v) { return std::binary_search(only_b.begin(), only_b.end(), v); };
        return mul_mono(gcd_with_coeffs(A, B, pick), gm);
    }

    Var main = va[0];
    int best = 1 << 30;
    for (Var v : va) {
        int d = A.degree(v) + B.degree(v);
        if (d < best) {
            best = d;
            main = v;
        }
    }
    Poly ca = content_in(A, main), cb = content_in(B, main);
    Poly pa = primitive(divexact(A, ca)), pb = primitive(divexact(B, cb));
    Poly gc = gcd_rec(ca, cb);
    Poly g = prs(pa, pb, main);
    return primitive(mul_mono(gc * g, gm));
}

}  // namespace

Poly gcd(const Poly& a, const Poly& b) { return primitive(gcd_rec(a, b)); }

}  // namespace vbx::detail
