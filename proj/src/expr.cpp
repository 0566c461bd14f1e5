#include <algorithm>
#include <cmath>
#include <deque>
#include <mutex>
#include <ostream>
#include <set>
#include <shared_mutex>
#include <sstream>

#include "rep.hpp"

namespace vbx {

using detail::KernelInfo;
using detail::Mono;
using detail::Poly;
using detail::RatFun;
using detail::Var;
using detail::VarKind;
using detail::var_kind;

// ---------------------------------------------------------------- coordinates

Coordinate Coordinate::x(int i) {
    if (i < 1 || i > 3) throw Error("independent coordinate index out of range: " + std::to_string(i));
    Coordinate c;
    c.kind = Kind::Independent;
    c.index = i;
    return c;
}

Coordinate Coordinate::u() { return Coordinate{}; }

Coordinate Coordinate::deriv(const std::vector<int>& multi) {
    std::array<std::uint8_t, 3> cnt{};
    for (int k : multi) {
        if (k < 1 || k > 3) throw Error("derivative index out of range: " + std::to_string(k));
        ++cnt[k - 1];
    }
    return from_counts(cnt);
}

Coordinate Coordinate::from_counts(std::array<std::uint8_t, 3> cnt) {
    Coordinate c;
    if (cnt[0] + cnt[1] + cnt[2] == 0) return c;
    for (auto k : cnt)
        if (k > 15) throw Error("derivative order exceeds representable range");
    c.kind = Kind::Derivative;
    c.counts = cnt;
    return c;
}

Coordinate Coordinate::pure(int branch, int order) {
    if (order == 0) return u();
    std::array<std::uint8_t, 3> cnt{};
    cnt.at(branch - 1) = static_cast<std::uint8_t>(order);
    return from_counts(cnt);
}

std::vector<int> Coordinate::multi() const {
    std::vector<int> m;
    for (int k = 0; k < 3; ++k)
        for (int r = 0; r < counts[k]; ++r) m.push_back(k + 1);
    return m;
}

int Coordinate::order() const {
    if (kind == Kind::Independent) return -1;
    return counts[0] + counts[1] + counts[2];
}

bool Coordinate::is_pure() const {
    if (kind != Kind::Derivative) return kind == Kind::Dependent;
    int nz = 0;
    for (auto k : counts) nz += k > 0;
    return nz == 1;
}

int Coordinate::branch() const {
    for (int k = 0; k < 3; ++k)
        if (counts[k]) return k + 1;
    return 0;
}

std::string Coordinate::name() const {
    switch (kind) {
        case Kind::Independent: return "x" + std::to_string(index);
        case Kind::Dependent: return "u";
        default: break;
    }
    std::string s = "u";
    for (int k : multi()) s += static_cast<char>('0' + k);
    return s;
}

std::uint32_t Coordinate::id() const {
    switch (kind) {
        case Kind::Independent: return static_cast<std::uint32_t>(index);
        case Kind::Dependent: return 4;
        default: break;
    }
    return 16u + counts[0] + (static_cast<std::uint32_t>(counts[1]) << 4) +
           (static_cast<std::uint32_t>(counts[2]) << 8);
}

Coordinate Coordinate::from_id(std::uint32_t id) {
    if (id >= 1 && id <= 3) return x(static_cast<int>(id));
    if (id == 4) return u();
    std::uint32_t k = id - 16;
    return from_counts({static_cast<std::uint8_t>(k & 15), static_cast<std::uint8_t>((k >> 4) & 15),
                        static_cast<std::uint8_t>((k >> 8) & 15)});
}

std::strong_ordering Coordinate::operator<=>(const Coordinate& o) const {
    if (kind != o.kind) return kind <=> o.kind;
    if (kind == Kind::Independent) return index <=> o.index;
    if (kind == Kind::Dependent) return std::strong_ordering::equal;
    if (auto c = order() <=> o.order(); c != 0) return c;
    auto a = multi(), b = o.multi();
    return a <=> b;
}

// ---------------------------------------------------------------- kernel table

namespace detail {

namespace {

struct KernelTable {
    std::shared_mutex mu;
    std::deque<KernelInfo> items;
    std::unordered_multimap<std::size_t, std::uint32_t> index;
};

KernelTable& table() {
    static KernelTable t;
    return t;
}

std::size_t kernel_key(VarKind fn, const Expr& arg, int q) {
    return arg.hash() * 31 + static_cast<std::size_t>(fn) * 7919 + static_cast<std::size_t>(q);
}

Var intern(VarKind fn, const Expr& arg, int q = 0) {
    auto& t = table();
    std::size_t key = kernel_key(fn, arg, q);
    {
        std::shared_lock lk(t.mu);
        auto [lo, hi] = t.index.equal_range(key);
        for (auto it = lo; it != hi; ++it) {
            const auto& k = t.items[it->second];
            if (k.fn == fn && k.q == q && k.arg == arg) return make_kernel_var(fn, it->second);
        }
    }
    std::unique_lock lk(t.mu);
    auto [lo, hi] = t.index.equal_range(key);
    for (auto it = lo; it != hi; ++it) {
        const auto& k = t.items[it->second];
        if (k.fn == fn && k.q == q && k.arg == arg) return make_kernel_var(fn, it->second);
    }
    auto idx = static_cast<std::uint32_t>(t.items.size());
    t.items.push_back(KernelInfo{fn, arg, q});
    t.index.emplace(key, idx);
    return make_kernel_var(fn, idx);
}

}  // namespace

const KernelInfo& kernel(Var v) {
    auto& t = table();
    std::shared_lock lk(t.mu);
    return t.items.at(var_index(v));
}

void merge_exp_factors(Mono& m) {
    Expr sum;
    Mono rest;
    for (auto& [v, e] : m.f) {
        if (var_kind(v) == VarKind::Exp)
            sum += kernel(v).arg * Expr(e);
        else
            rest.f.emplace_back(v, e);
    }
    if (!sum.is_zero()) {
        Var v = intern(VarKind::Exp, sum);
        auto pos = std::lower_bound(rest.f.begin(), rest.f.end(), std::make_pair(v, 0));
        rest.f.insert(pos, {v, 1});
    }
    m = std::move(rest);
}

std::string var_name(Var v) {
    if (var_kind(v) == VarKind::Coord) return Coordinate::from_id(v).name();
    const auto& k = kernel(v);
    switch (k.fn) {
        case VarKind::Exp: return "exp(" + k.arg.str() + ")";
        case VarKind::Log: return "log(" + k.arg.str() + ")";
        case VarKind::Sin: return "sin(" + k.arg.str() + ")";
        case VarKind::Cos: return "cos(" + k.arg.str() + ")";
        case VarKind::Root:
            if (k.q == 2) return "sqrt(" + k.arg.str() + ")";
            return "(" + k.arg.str() + ")^(1/" + std::to_string(k.q) + ")";
        default: break;
    }
    return "?";
}

namespace {

std::size_t rf_hash(const Poly& n, const Poly& d) { return n.hash() * 1000003u ^ d.hash(); }

std::shared_ptr<const RatFun> raw(Poly num, Poly den) {
    auto r = std::make_shared<RatFun>();
    r->num = std::move(num);
    r->den = std::move(den);
    r->h = rf_hash(r->num, r->den);
    return r;
}

bool needs_root_reduction(const Poly& p) {
    for (auto& term : p.t)
        for (auto& [v, e] : term.m.f)
            if (var_kind(v) == VarKind::Root && e >= kernel(v).q) return true;
    return false;
}

Expr reduce_roots(const Poly& p) {
    Expr sum;
    for (auto& term : p.t) {
        Expr prod(term.c);
        Mono plain;
        for (auto& [v, e] : term.m.f) {
            if (var_kind(v) == VarKind::Root && e >= kernel(v).q) {
                const auto& k = kernel(v);
                int keep = e % k.q;
                prod *= k.arg.pow(e / k.q);
                if (keep) plain.f.emplace_back(v, keep);
            } else {
                plain.f.emplace_back(v, e);
            }
        }
        sum += prod * from_poly(Poly::mono(plain, 1));
    }
    return sum;
}

// Finishes a quotient whose common factors were already cancelled.
Expr finish(Poly num, Poly den, bool run_gcd) {
    if (num.is_zero()) return Expr();
    if (den.is_zero()) throw DomainError("division by zero");
    if (den.is_const()) {
        num = num * (1 / den.const_value());
        den = Poly(mpq_class(1));
    } else {
        Mono mc = den.mono_content();
        Mono exps, roots;
        for (auto& f : mc.f) {
            if (var_kind(f.first) == VarKind::Exp) exps.f.push_back(f);
            if (var_kind(f.first) == VarKind::Root) roots.f.emplace_back(f.first, kernel(f.first).q - f.second);
        }
        if (!roots.empty()) {
            // R^e in a monomial denominator is cleared by R^(q-e), after which R^q reduces.
            num = mul_mono(num, roots);
            den = mul_mono(den, roots);
            return reduce_roots(num) / reduce_roots(den);
        }
        if (!exps.empty()) {
            den = div_mono(den, exps);
            Expr neg;
            for (auto& [v, e] : exps.f) neg -= kernel(v).arg * Expr(e);
            num = num * exp(neg).rep().num;
        }
        if (run_gcd && !den.is_const()) {
            Poly g = gcd(num, den);
            if (!g.is_const()) {
                num = divexact(num, g);
                den = divexact(den, g);
            }
        }
        mpq_class c = den.content();
        if (den.t[0].c < 0) c = -c;
        num = num * (1 / c);
        den = den * (1 / c);
    }
    if (needs_root_reduction(num) || needs_root_reduction(den)) {
        Expr n = reduce_roots(num), d = reduce_roots(den);
        return n / d;
    }
    return Expr(raw(std::move(num), std::move(den)));
}

}  // namespace

Expr from_poly(Poly p) { return finish(std::move(p), Poly(mpq_class(1)), false); }

Expr make_ratfun(Poly num, Poly den) { return finish(std::move(num), std::move(den), true); }

Expr make_reduced(Poly num, Poly den) { return finish(std::move(num), std::move(den), false); }

}  // namespace detail

// ---------------------------------------------------------------- Expr basics

namespace {

const std::shared_ptr<const RatFun>& zero_rep() {
    static const auto z = [] {
        auto r = std::make_shared<RatFun>();
        r->den = Poly(mpq_class(1));
        r->h = r->num.hash() * 1000003u ^ r->den.hash();
        return std::shared_ptr<const RatFun>(r);
    }();
    return z;
}

}  // namespace

Expr::Expr() : p_(zero_rep()) {}
Expr::Expr(int v) : Expr(mpq_class(v)) {}
Expr::Expr(long v) : Expr(mpq_class(v)) {}
Expr::Expr(const mpq_class& q) : p_(zero_rep()) {
    if (q != 0) *this = detail::from_poly(Poly(q));
}

Expr Expr::coord(const Coordinate& c) { return detail::from_poly(Poly::var(c.id())); }

bool Expr::is_zero() const { return p_->num.is_zero(); }
bool Expr::is_one() const { return p_->num.is_one() && p_->den.is_one(); }
bool Expr::is_constant() const { return p_->num.is_const() && p_->den.is_const(); }

std::optional<mpq_class> Expr::constant() const {
    if (!is_constant()) return std::nullopt;
    return p_->num.const_value();
}

bool Expr::is_rational() const { return !p_->num.has_kernels() && !p_->den.has_kernels(); }

std::vector<Coordinate> Expr::coordinates() const {
    std::set<Coordinate> out;
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
        for (const Poly* p : {&e.rep().num, &e.rep().den})
            for (Var v : p->vars()) {
                if (var_kind(v) == VarKind::Coord)
                    out.insert(Coordinate::from_id(v));
                else
                    walk(detail::kernel(v).arg);
            }
    };
    walk(*this);
    return {out.begin(), out.end()};
}

int Expr::order() const {
    int o = -1;
    for (auto& c : coordinates()) o = std::max(o, c.order());
    return o;
}

std::size_t Expr::hash() const { return p_->h; }

bool Expr::operator==(const Expr& o) const {
    if (p_ == o.p_) return true;
    return p_->h == o.p_->h && p_->num == o.p_->num && p_->den == o.p_->den;
}

Expr operator+(const Expr& a, const Expr& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    const RatFun &x = a.rep(), &y = b.rep();
    if (x.den.is_one() && y.den.is_one()) return detail::from_poly(x.num + y.num);
    if (x.den == y.den) return detail::make_ratfun(x.num + y.num, x.den);
    Poly g = gcd(x.den, y.den);
    Poly xd = divexact(x.den, g), yd = divexact(y.den, g);
    Poly num = x.num * yd + y.num * xd;
    if (num.is_zero()) return Expr();
    Poly g2 = g.is_const() ? g : gcd(num, g);
    if (!g2.is_const()) {
        num = divexact(num, g2);
        g = divexact(g, g2);
    }
    return detail::make_reduced(std::move(num), xd * yd * g);
}

Expr operator-(const Expr& a) {
    if (a.is_zero()) return a;
    return detail::make_ratfun(-a.rep().num, a.rep().den);
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    const RatFun &x = a.rep(), &y = b.rep();
    if (x.den.is_one() && y.den.is_one()) return detail::from_poly(x.num * y.num);
    Poly g1 = y.den.is_one() ? Poly(mpq_class(1)) : gcd(x.num, y.den);
    Poly g2 = x.den.is_one() ? Poly(mpq_class(1)) : gcd(y.num, x.den);
    Poly n = divexact(x.num, g1) * divexact(y.num, g2);
    Poly d = divexact(x.den, g2) * divexact(y.den, g1);
    return detail::make_reduced(std::move(n), std::move(d));
}

Expr operator/(const Expr& a, const Expr& b) {
    if (b.is_zero()) throw DomainError("division by zero");
    const RatFun& y = b.rep();
    Expr inv = detail::make_ratfun(y.den, y.num);
    return a * inv;
}

Expr Expr::pow(const mpq_class& e) const {
    mpq_class q = e;
    q.canonicalize();
    if (q == 0) return Expr(1);
    if (is_zero()) {
        if (q < 0) throw DomainError("zero raised to a negative power");
        return Expr();
    }
    if (q.get_den() == 1) {
        long k = q.get_num().get_si();
        Expr base = k < 0 ? Expr(1) / *this : *this;
        k = std::labs(k);
        const RatFun& r = base.rep();
        return detail::make_ratfun(detail::pow(r.num, static_cast<int>(k)), detail::pow(r.den, static_cast<int>(k)));
    }
    long p = q.get_num().get_si();
    long d = q.get_den().get_si();
    if (auto c = constant(); c && *c > 0) {
        mpz_class rn, rd;
        bool ok = mpz_root(rn.get_mpz_t(), c->get_num_mpz_t(), static_cast<unsigned long>(d)) != 0;
        ok = ok && mpz_root(rd.get_mpz_t(), c->get_den_mpz_t(), static_cast<unsigned long>(d)) != 0;
        if (ok) return Expr(mpq_class(rn, rd)).pow(p);
    }
    if (is_one()) return *this;
    Var v = detail::intern(VarKind::Root, *this, static_cast<int>(d));
    Expr r = detail::from_poly(Poly::var(v));
    return r.pow(p);
}

Expr exp(const Expr& a) {
    if (a.is_zero()) return Expr(1);
    // log(b) inside exp stays opaque
    return detail::from_poly(Poly::var(detail::intern(VarKind::Exp, a)));
}

Expr log(const Expr& a) {
    if (a.is_one()) return Expr();
    if (a.is_zero()) throw DomainError("log of zero");
    const RatFun& r = a.rep();
    if (r.den.is_one() && r.num.t.size() == 1 && r.num.t[0].c == 1 && r.num.t[0].m.f.size() == 1) {
        auto [v, e] = r.num.t[0].m.f[0];
        if (var_kind(v) == VarKind::Exp && e == 1) return detail::kernel(v).arg;
    }
    return detail::from_poly(Poly::var(detail::intern(VarKind::Log, a)));
}

Expr sin(const Expr& a) {
    if (a.is_zero()) return Expr();
    return detail::from_poly(Poly::var(detail::intern(VarKind::Sin, a)));
}

Expr cos(const Expr& a) {
    if (a.is_zero()) return Expr(1);
    return detail::from_poly(Poly::var(detail::intern(VarKind::Cos, a)));
}

Expr sqrt(const Expr& a) { return a.pow(mpq_class(1, 2)); }

// ---------------------------------------------------------------- printing

namespace {

struct AtomOrder {
    bool operator()(Var a, Var b) const {
        bool ca = var_kind(a) == VarKind::Coord, cb = var_kind(b) == VarKind::Coord;
        if (ca != cb) return ca;
        if (ca) return Coordinate::from_id(a) < Coordinate::from_id(b);
        const auto &ka = detail::kernel(a), &kb = detail::kernel(b);
        if (ka.fn != kb.fn) return ka.fn < kb.fn;
        if (ka.q != kb.q) return ka.q < kb.q;
        return ka.arg.str() < kb.arg.str();
    }
};

std::string atom_power(Var v, int e) {
    std::string s = detail::var_name(v);
    if (e == 1) return s;
    if (var_kind(v) == VarKind::Root && detail::kernel(v).q != 2) s = "(" + s + ")";
    return s + "^" + std::to_string(e);
}

struct PrintedTerm {
    std::vector<std::pair<int, int>> key;  // (rank, exponent) ascending rank
    int degree = 0;
    std::string factors;
    mpq_class c;
};

std::vector<PrintedTerm> printed_terms(const Poly& p) {
    auto vars = p.vars();
    std::sort(vars.begin(), vars.end(), AtomOrder{});
    std::unordered_map<Var, int> rank;
    for (std::size_t i = 0; i < vars.size(); ++i) rank[vars[i]] = static_cast<int>(i);
    std::vector<PrintedTerm> out;
    for (auto& term : p.t) {
        PrintedTerm pt;
        pt.c = term.c;
        pt.degree = term.m.degree();
        std::vector<std::pair<int, Var>> fs;
        for (auto& [v, e] : term.m.f) {
            pt.key.emplace_back(rank[v], e);
            fs.emplace_back(rank[v], v);
        }
        std::sort(pt.key.begin(), pt.key.end());
        std::sort(fs.begin(), fs.end());
        for (auto& [r, v] : fs) {
            if (!pt.factors.empty()) pt.factors += "*";
            pt.factors += atom_power(v, term.m.exponent(v));
        }
        out.push_back(std::move(pt));
    }
    std::sort(out.begin(), out.end(), [](const PrintedTerm& a, const PrintedTerm& b) {
        if (a.degree != b.degree) return a.degree > b.degree;
        std::size_t n = std::min(a.key.size(), b.key.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (a.key[i].first != b.key[i].first) return a.key[i].first < b.key[i].first;
            if (a.key[i].second != b.key[i].second) return a.key[i].second > b.key[i].second;
        }
        return a.key.size() > b.key.size();
    });
    return out;
}

std::string poly_str(const Poly& p) {
    if (p.is_zero()) return "0";
    std::string s;
    for (auto& pt : printed_terms(p)) {
        std::string t;
        if (pt.factors.empty())
            t = pt.c.get_str();
        else if (pt.c == 1)
            t = pt.factors;
        else if (pt.c == -1)
            t = "-" + pt.factors;
        else
            t = pt.c.get_str() + "*" + pt.factors;
        if (!s.empty() && t[0] != '-') s += "+";
        s += t;
    }
    return s;
}

bool single_factor(const Poly& p) {
    return p.t.size() == 1 && p.t[0].c == 1 && p.t[0].m.f.size() == 1 &&
           !(var_kind(p.t[0].m.f[0].first) == VarKind::Root && detail::kernel(p.t[0].m.f[0].first).q != 2);
}

}  // namespace

std::string Expr::str() const {
    const RatFun& r = rep();
    std::string n = poly_str(r.num);
    if (r.den.is_one()) return n;
    if (r.num.t.size() > 1) n = "(" + n + ")";
    std::string d = poly_str(r.den);
    if (!single_factor(r.den)) d = "(" + d + ")";
    return n + "/" + d;
}

std::ostream& operator<<(std::ostream& os, const Expr& e) { return os << e.str(); }

// ---------------------------------------------------------------- calculus

Expr derivation(const Expr& e, const std::function<Expr(const Coordinate&)>& on_coord) {
    const RatFun& r = e.rep();
    if (r.num.is_const() && r.den.is_const()) return Expr();
    std::unordered_map<Var, Expr> memo;
    std::function<Expr(Var)> dvar = [&](Var v) -> Expr {
        if (auto it = memo.find(v); it != memo.end()) return it->second;
        Expr d;
        if (var_kind(v) == VarKind::Coord) {
            d = on_coord(Coordinate::from_id(v));
        } else {
            const KernelInfo k = detail::kernel(v);
            Expr da = derivation(k.arg, on_coord);
            if (!da.is_zero()) {
                Expr self = detail::from_poly(Poly::var(v));
                switch (k.fn) {
                    case VarKind::Exp: d = self * da; break;
                    case VarKind::Log: d = da / k.arg; break;
                    case VarKind::Sin: d = cos(k.arg) * da; break;
                    case VarKind::Cos: d = -(sin(k.arg) * da); break;
                    case VarKind::Root: d = Expr(mpq_class(1, k.q)) * self * da / k.arg; break;
                    default: break;
                }
            }
        }
        memo.emplace(v, d);
        return d;
    };
    auto dpoly = [&](const Poly& p) {
        Expr s;
        for (Var v : p.vars()) {
            Expr d = dvar(v);
            if (d.is_zero()) continue;
            s += detail::from_poly(p.diff(v)) * d;
        }
        return s;
    };
    if (r.den.is_one()) return dpoly(r.num);
    Expr dn = dpoly(r.num), dd = dpoly(r.den);
    if (dn.is_zero() && dd.is_zero()) return Expr();
    Expr N = detail::from_poly(r.num), D = detail::from_poly(r.den);
    return (dn * D - N * dd) / (D * D);
}

Expr derive(const Expr& e, const Coordinate& c) {
    return derivation(e, [&](const Coordinate& a) { return a == c ? Expr(1) : Expr(); });
}

Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const Coordinate&)>& f) {
    const RatFun& r = e.rep();
    std::unordered_map<Var, std::optional<Expr>> memo;
    bool changed = false;
    std::function<std::optional<Expr>(Var)> sub = [&](Var v) -> std::optional<Expr> {
        if (auto it = memo.find(v); it != memo.end()) return it->second;
        std::optional<Expr> out;
        if (var_kind(v) == VarKind::Coord) {
            out = f(Coordinate::from_id(v));
        } else {
            const KernelInfo k = detail::kernel(v);
            Expr a = substitute(k.arg, f);
            if (!(a == k.arg)) {
                switch (k.fn) {
                    case VarKind::Exp: out = exp(a); break;
                    case VarKind::Log: out = log(a); break;
                    case VarKind::Sin: out = sin(a); break;
                    case VarKind::Cos: out = cos(a); break;
                    case VarKind::Root: out = a.pow(mpq_class(1, k.q)); break;
                    default: break;
                }
            }
        }
        if (out) changed = true;
        memo.emplace(v, out);
        return out;
    };
    for (const Poly* p : {&r.num, &r.den})
        for (Var v : p->vars()) sub(v);
    if (!changed) return e;
    auto apply = [&](const Poly& p) {
        Expr s;
        for (auto& term : p.t) {
            Expr prod(term.c);
            Mono plain;
            for (auto& [v, ex] : term.m.f) {
                if (auto& val = memo[v]; val)
                    prod *= val->pow(ex);
                else
                    plain.f.emplace_back(v, ex);
            }
            s += prod * detail::from_poly(Poly::mono(plain, 1));
        }
        return s;
    };
    return apply(r.num) / apply(r.den);
}

// ---------------------------------------------------------------- evaluation

std::optional<double> Point::get(const Coordinate& c) const {
    auto it = values_.find(c.id());
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::pair<Coordinate, double>> Point::entries() const {
    std::vector<std::pair<Coordinate, double>> out;
    for (auto& [id, v] : values_) out.emplace_back(Coordinate::from_id(id), v);
    std::sort(out.begin(), out.end(), [](auto& a, auto& b) { return a.first < b.first; });
    return out;
}

namespace {

struct Evaluator {
    const Point& pt;
    std::unordered_map<Var, double> cache;

    double var(Var v) {
        if (auto it = cache.find(v); it != cache.end()) return it->second;
        double x = 0;
        if (var_kind(v) == VarKind::Coord) {
            auto c = Coordinate::from_id(v);
            auto val = pt.get(c);
            if (!val) throw Error("unassigned coordinate " + c.name());
            x = *val;
        } else {
            const KernelInfo& k = detail::kernel(v);
            double a = value(k.arg);
            switch (k.fn) {
                case VarKind::Exp: x = std::exp(a); break;
                case VarKind::Log:
                    if (!(a > 0)) throw DomainError("log of non-positive value");
                    x = std::log(a);
                    break;
                case VarKind::Sin: x = std::sin(a); break;
                case VarKind::Cos: x = std::cos(a); break;
                case VarKind::Root:
                    if (a < 0) {
                        if (k.q % 2 == 0) throw DomainError("even root of negative value");
                        x = -std::pow(-a, 1.0 / k.q);
                    } else {
                        x = std::pow(a, 1.0 / k.q);
                    }
                    break;
                default: break;
            }
        }
        if (!std::isfinite(x)) throw DomainError("non-finite intermediate value");
        cache.emplace(v, x);
        return x;
    }

    double poly(const Poly& p, double* scale = nullptr) {
        double s = 0, mag = 0;
        for (auto& term : p.t) {
            double t = term.c.get_d();
            for (auto& [v, e] : term.m.f) t *= std::pow(var(v), e);
            s += t;
            mag += std::fabs(t);
        }
        if (scale) *scale = mag;
        return s;
    }

    double value(const Expr& e) {
        const RatFun& r = e.rep();
        double n = poly(r.num);
        if (r.den.is_one()) return n;
        double dscale = 0;
        double d = poly(r.den, &dscale);
        if (d == 0 || std::fabs(d) <= 1e-14 * dscale) throw DomainError("division by zero");
        return n / d;
    }
};

}  // namespace

double eval(const Expr& e, const Point& p) {
    Evaluator ev{p, {}};
    double v = ev.value(e);
    if (!std::isfinite(v)) throw DomainError("non-finite value");
    return v;
}

// ---------------------------------------------------------------- tree view

namespace {

Tree atom_tree(Var v) {
    Tree t;
    if (var_kind(v) == VarKind::Coord) {
        t.kind = Tree::Kind::Coordinate;
        t.coord = Coordinate::from_id(v);
        return t;
    }
    const KernelInfo& k = detail::kernel(v);
    if (k.fn == VarKind::Root) {
        t.kind = Tree::Kind::Power;
        t.value = mpq_class(1, k.q);
        t.children.push_back(tree(k.arg));
        return t;
    }
    t.kind = Tree::Kind::Call;
    static const char* names[] = {"", "exp", "log", "sin", "cos"};
    t.fn = names[static_cast<int>(k.fn)];
    t.children.push_back(tree(k.arg));
    return t;
}

Tree poly_tree(const Poly& p) {
    Tree sum;
    sum.kind = Tree::Kind::Sum;
    for (auto& term : p.t) {
        Tree prod;
        prod.kind = Tree::Kind::Product;
        if (term.c != 1 || term.m.empty()) {
            Tree c;
            c.value = term.c;
            prod.children.push_back(c);
        }
        for (auto& [v, e] : term.m.f) {
            Tree a = atom_tree(v);
            if (e != 1) {
                Tree pw;
                pw.kind = Tree::Kind::Power;
                pw.value = e;
                pw.children.push_back(std::move(a));
                a = std::move(pw);
            }
            prod.children.push_back(std::move(a));
        }
        if (prod.children.size() == 1)
            sum.children.push_back(std::move(prod.children[0]));
        else
            sum.children.push_back(std::move(prod));
    }
    if (sum.children.empty()) return Tree{};
    if (sum.children.size() == 1) return std::move(sum.children[0]);
    return sum;
}

}  // namespace

Tree tree(const Expr& e) {
    const RatFun& r = e.rep();
    Tree n = poly_tree(r.num);
    if (r.den.is_one()) return n;
    Tree inv;
    inv.kind = Tree::Kind::Power;
    inv.value = -1;
    inv.children.push_back(poly_tree(r.den));
    Tree prod;
    prod.kind = Tree::Kind::Product;
    prod.children.push_back(std::move(n));
    prod.children.push_back(std::move(inv));
    return prod;
}

// ---------------------------------------------------------------- zero testing

double uniform_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::string ZeroVerdict::label() const {
    switch (kind) {
        case Kind::Zero: return "Zero";
        case Kind::NonZero: return "NonZero";
        case Kind::ProbablyZero: break;
    }
    std::ostringstream os;
    os << "ProbablyZero(" << samples << ", " << tol << ")";
    return os.str();
}

ZeroVerdict combine(const ZeroVerdict& a, const ZeroVerdict& b) {
    if (a.kind == ZeroVerdict::Kind::NonZero) return a;
    if (b.kind == ZeroVerdict::Kind::NonZero) return b;
    if (a.kind == ZeroVerdict::Kind::ProbablyZero) return a;
    return b;
}

namespace {

std::string describe(const Point& p) {
    std::ostringstream os;
    bool first = true;
    for (auto& [c, v] : p.entries()) {
        if (!first) os << ", ";
        first = false;
        os << c.name() << "=" << v;
    }
    return os.str();
}

}  // namespace

ZeroVerdict is_zero(const Expr& e, const ZeroPolicy& policy) {
    ZeroVerdict out;
    if (e.is_zero()) return out;
    auto coords = e.coordinates();
    std::mt19937_64 rng(policy.seed);
    Sampler sampler = policy.sampler ? policy.sampler
                                     : Sampler([](const Coordinate&, std::mt19937_64& g) { return 2 * uniform_unit(g) - 1; });
    const bool rational = e.is_rational();
    int valid = 0, rejected = 0;
    const int wanted = rational ? 3 : policy.samples;
    while (valid < wanted) {
        Point p;
        for (auto& c : coords) p.set(c, sampler(c, rng));
        double n = 0, scale = 0;
        try {
            Evaluator ev{p, {}};
            n = ev.poly(e.rep().num, &scale);
            if (!e.rep().den.is_one()) ev.value(e);
        } catch (const DomainError&) {
            if (++rejected > policy.resample_cap) break;
            continue;
        }
        ++valid;
        if (!std::isfinite(n) || std::fabs(n) > policy.tol * scale) {
            out.kind = ZeroVerdict::Kind::NonZero;
            out.witness = describe(p);
            out.samples = valid;
            return out;
        }
    }
    if (rational) {
        out.kind = ZeroVerdict::Kind::NonZero;
        return out;
    }
    if (policy.mode == ZeroPolicy::Mode::ExactOnly)
        throw IndeterminateError("exact zero test undecided for " + e.str());
    if (valid < policy.samples)
        throw IndeterminateError("resample cap reached after " + std::to_string(valid) + " valid samples");
    out.kind = ZeroVerdict::Kind::ProbablyZero;
    out.samples = valid;
    out.tol = policy.tol;
    return out;
}

}  // namespace vbx
