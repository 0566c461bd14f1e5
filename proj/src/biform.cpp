#include "vbx/biform.hpp"

#include <algorithm>
#include <sstream>

namespace vbx {

Contact Contact::of(const Coordinate& c) {
    if (c.kind == Coordinate::Kind::Dependent) return {};
    if (c.kind != Coordinate::Kind::Derivative || !c.is_pure())
        throw Error("no pure contact form for coordinate " + c.name());
    return {c.branch(), c.order()};
}

Coordinate Contact::coordinate() const { return Coordinate::pure(branch, order); }

std::string Contact::label() const {
    if (order == 0) return "th";
    if (order == 1) return "th:" + std::to_string(branch);
    return "th:" + std::to_string(branch) + "^" + std::to_string(order);
}

int BiMono::r() const { return __builtin_popcount(h); }

std::vector<int> BiMono::sigmas() const {
    std::vector<int> out;
    for (int i = 0; i < 3; ++i)
        if (h & (1u << i)) out.push_back(i + 1);
    return out;
}

std::vector<std::string> BiMono::labels() const {
    std::vector<std::string> out;
    for (int i : sigmas()) out.push_back("s" + std::to_string(i));
    for (auto& k : c) out.push_back(k.label());
    return out;
}

BiForm BiForm::zero(int n, int r, int s) {
    BiForm w;
    w.n = n;
    w.r = r;
    w.s = s;
    return w;
}

BiForm BiForm::function(int n, const Expr& f) {
    BiForm w = zero(n, 0, 0);
    w.add({}, f);
    return w;
}

BiForm BiForm::sigma(int n, int i) {
    if (i < 1 || i > n) throw Error("sigma index out of range");
    BiForm w = zero(n, 1, 0);
    w.add({static_cast<std::uint8_t>(1u << (i - 1)), {}}, Expr(1));
    return w;
}

BiForm BiForm::contact(int n, Contact c) {
    if (c.branch < 0 || c.branch > n || (c.order == 0) != (c.branch == 0)) throw Error("malformed contact index");
    BiForm w = zero(n, 0, 1);
    w.add({0, {c}}, Expr(1));
    return w;
}

Expr BiForm::coefficient(const BiMono& m) const {
    auto it = terms.find(m);
    return it == terms.end() ? Expr() : it->second;
}

void BiForm::add(const BiMono& m, const Expr& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second.is_zero()) terms.erase(it);
    }
}

int BiForm::max_contact_order() const {
    int o = -1;
    for (auto& [m, c] : terms)
        for (auto& k : m.c) o = std::max(o, k.order);
    return o;
}

BiForm BiForm::operator-() const {
    BiForm w = *this;
    for (auto& [m, c] : w.terms) c = -c;
    return w;
}

BiForm& BiForm::operator+=(const BiForm& o) {
    if (o.terms.empty()) return *this;
    if (terms.empty()) {
        r = o.r;
        s = o.s;
    } else if (r != o.r || s != o.s) {
        throw Error("adding forms of different bidegree");
    }
    for (auto& [m, c] : o.terms) add(m, c);
    return *this;
}

BiForm& BiForm::operator-=(const BiForm& o) { return *this += -o; }

BiForm operator*(const Expr& f, const BiForm& w) {
    BiForm out = BiForm::zero(w.n, w.r, w.s);
    if (f.is_zero()) return out;
    for (auto& [m, c] : w.terms) out.add(m, f * c);
    return out;
}

std::string BiForm::str() const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [m, c] : terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c.str() << ")";
        for (auto& l : m.labels()) os << "*" << l;
    }
    return os.str();
}

BiForm map_coefficients(const BiForm& w, const std::function<Expr(const Expr&)>& f) {
    BiForm out = BiForm::zero(w.n, w.r, w.s);
    for (auto& [m, c] : w.terms) out.add(m, f(c));
    return out;
}

namespace {

// Sign of merging two strictly sorted sequences; 0 on a repeated factor.
template <class T>
int merge_sign(const std::vector<T>& a, const std::vector<T>& b, std::vector<T>& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    std::size_t i = 0, j = 0;
    long inversions = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i] < b[j])) {
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j] < a[i]) {
            inversions += static_cast<long>(a.size() - i);
            out.push_back(b[j++]);
        } else {
            return 0;
        }
    }
    return inversions % 2 ? -1 : 1;
}

}  // namespace

BiForm wedge(const BiForm& a, const BiForm& b) {
    if (a.n != b.n) throw Error("wedge of forms over different base dimensions");
    BiForm out = BiForm::zero(a.n, a.r + b.r, a.s + b.s);
    if (a.r + b.r > a.n) return out;
    std::vector<int> hs;
    std::vector<Contact> cs;
    for (auto& [ma, ca] : a.terms) {
        auto ha = ma.sigmas();
        for (auto& [mb, cb] : b.terms) {
            if (ma.h & mb.h) continue;
            int sg = merge_sign(ha, mb.sigmas(), hs);
            int sc = merge_sign(ma.c, mb.c, cs);
            if (sc == 0) continue;
            // moving b's horizontal factors across a's contact factors
            int sign = sg * sc * ((ma.s() * mb.r()) % 2 ? -1 : 1);
            BiMono m{static_cast<std::uint8_t>(ma.h | mb.h), cs};
            Expr coeff = ca * cb;
            out.add(m, sign > 0 ? coeff : -coeff);
        }
    }
    return out;
}

BiForm wedge(std::initializer_list<BiForm> fs) {
    auto it = fs.begin();
    BiForm acc = *it;
    for (++it; it != fs.end(); ++it) acc = wedge(acc, *it);
    return acc;
}

BiForm d_V(const Expr& f, const SystemSpec& sys) {
    BiForm out = BiForm::zero(sys.n, 0, 1);
    Expr g = f;
    for (auto& c : f.coordinates())
        if (c.kind == Coordinate::Kind::Derivative && !c.is_pure()) {
            g = reduce(f, sys);
            break;
        }
    for (auto& c : g.coordinates()) {
        if (c.kind == Coordinate::Kind::Independent) continue;
        out.add({0, {Contact::of(c)}}, derive(g, c));
    }
    return out;
}

BiForm d_V(const BiForm& w, const SystemSpec& sys) {
    BiForm out = BiForm::zero(w.n, w.r, w.s + 1);
    for (auto& [m, c] : w.terms) {
        BiForm basis = BiForm::zero(w.n, w.r, w.s);
        basis.add(m, Expr(1));
        out += wedge(d_V(c, sys), basis);
    }
    return out;
}

BiForm lie_contact(int i, Contact c, const SystemSpec& sys) {
    if (c.order == 0) return BiForm::contact(sys.n, {i, 1});
    if (c.branch == i) return BiForm::contact(sys.n, {i, c.order + 1});
    return d_V(total_derivative(Expr::coord(c.coordinate()), i, sys), sys);
}

BiForm lie(int i, const BiForm& w, const SystemSpec& sys) {
    BiForm out = BiForm::zero(w.n, w.r, w.s);
    std::map<Contact, BiForm> memo;
    for (auto& [m, c] : w.terms) {
        BiMono plain = m;
        out.add(plain, total_derivative(c, i, sys));
        for (std::size_t k = 0; k < m.c.size(); ++k) {
            auto it = memo.find(m.c[k]);
            if (it == memo.end()) it = memo.emplace(m.c[k], lie_contact(i, m.c[k], sys)).first;
            BiForm prefix = BiForm::zero(w.n, m.r(), static_cast<int>(k));
            prefix.add({m.h, std::vector<Contact>(m.c.begin(), m.c.begin() + static_cast<long>(k))}, c);
            BiForm suffix = BiForm::zero(w.n, 0, static_cast<int>(m.c.size() - k - 1));
            suffix.add({0, std::vector<Contact>(m.c.begin() + static_cast<long>(k) + 1, m.c.end())}, Expr(1));
            out += wedge(wedge(prefix, it->second), suffix);
        }
    }
    return out;
}

BiForm lie(const TotalVectorField& X, const BiForm& w, const SystemSpec& sys) {
    BiForm base = lie(X.index, w, sys);
    if (!X.factor) return base;
    BiForm out = *X.factor * base;
    if (w.r > 0) out += wedge(d_H(*X.factor, sys), interior(TotalVectorField{X.index, std::nullopt}, w));
    return out;
}

BiForm d_H(const BiForm& w, const SystemSpec& sys) {
    BiForm out = BiForm::zero(w.n, w.r + 1, w.s);
    if (w.r >= w.n) return out;
    for (int i = 1; i <= w.n; ++i) out += wedge(BiForm::sigma(w.n, i), lie(i, w, sys));
    return out;
}

BiForm d_H(const Expr& f, const SystemSpec& sys) { return d_H(BiForm::function(sys.n, f), sys); }

BiForm interior(const TotalVectorField& X, const BiForm& w) {
    BiForm out = BiForm::zero(w.n, std::max(0, w.r - 1), w.s);
    if (w.r == 0) return out;
    auto bit = static_cast<std::uint8_t>(1u << (X.index - 1));
    for (auto& [m, c] : w.terms) {
        if (!(m.h & bit)) continue;
        int before = __builtin_popcount(m.h & (bit - 1));
        Expr coeff = X.factor ? *X.factor * c : c;
        out.add({static_cast<std::uint8_t>(m.h & ~bit), m.c}, before % 2 ? -coeff : coeff);
    }
    return out;
}

BiForm interior(const VerticalVectorField& V, const BiForm& w) {
    BiForm out = BiForm::zero(w.n, w.r, std::max(0, w.s - 1));
    if (w.s == 0) return out;
    for (auto& [m, c] : w.terms) {
        for (std::size_t k = 0; k < m.c.size(); ++k) {
            auto it = V.components.find(m.c[k]);
            if (it == V.components.end()) continue;
            std::vector<Contact> rest = m.c;
            rest.erase(rest.begin() + static_cast<long>(k));
            Expr coeff = it->second * c;
            out.add({m.h, rest}, (m.r() + static_cast<int>(k)) % 2 ? -coeff : coeff);
        }
    }
    return out;
}

Expr pairing(const BiForm& w, const VerticalVectorField& V) {
    if (w.r != 0 || w.s != 1) throw Error("pairing needs a (0,1) form");
    Expr s;
    for (auto& [m, c] : w.terms) {
        auto it = V.components.find(m.c[0]);
        if (it != V.components.end()) s += c * it->second;
    }
    return s;
}

void FormSum::add(const BiForm& w) {
    auto key = std::make_pair(w.r, w.s);
    auto it = pieces.find(key);
    if (it == pieces.end())
        pieces.emplace(key, w);
    else
        it->second += w;
}

bool FormSum::is_zero() const {
    for (auto& [k, w] : pieces)
        if (!w.is_zero()) return false;
    return true;
}

FormSum d_total(const FormSum& w, const SystemSpec& sys) {
    FormSum out;
    for (auto& [k, piece] : w.pieces) {
        out.add(d_H(piece, sys));
        out.add(d_V(piece, sys));
    }
    return out;
}

FormVerdict is_zero(const BiForm& w, const ZeroPolicy& policy) {
    FormVerdict out;
    for (auto& [m, c] : w.terms) {
        ZeroVerdict v = is_zero(c, policy);
        out.verdict = combine(out.verdict, v);
        if (!v.vanishes()) {
            std::string label;
            for (auto& l : m.labels()) label += (label.empty() ? "" : "^") + l;
            out.monomial = label.empty() ? "1" : label;
            return out;
        }
    }
    return out;
}

}  // namespace vbx
