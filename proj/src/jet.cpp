#include "vbx/jet.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace vbx {

namespace {

Coordinate bump(const Coordinate& c, int k) {
    if (c.kind == Coordinate::Kind::Independent) throw Error("cannot differentiate an independent coordinate index");
    auto cnt = c.counts;
    ++cnt[k - 1];
    return Coordinate::from_counts(cnt);
}

void check_budget(const Coordinate& c, const SystemSpec& sys) {
    if (c.order() > sys.order_budget)
        throw OrderBudgetExceeded("jet order " + std::to_string(c.order()) + " of " + c.name() +
                                  " exceeds the order budget " + std::to_string(sys.order_budget));
}

Expr coord_derivative(const Coordinate& c, int k, const SystemSpec& sys) {
    switch (c.kind) {
        case Coordinate::Kind::Independent: return c.index == k ? Expr(1) : Expr();
        case Coordinate::Kind::Dependent: return Expr::coord(Coordinate::pure(k, 1));
        default: break;
    }
    auto& cache = *sys.cache;
    {
        std::lock_guard lk(cache.mu);
        auto& m = cache.coord_derivative[k];
        if (auto it = m.find(c.id()); it != m.end()) return it->second;
    }
    Coordinate next = bump(c, k);
    check_budget(next, sys);
    Expr r = next.is_pure() ? Expr::coord(next) : reduce_coordinate(next, sys);
    std::lock_guard lk(cache.mu);
    cache.coord_derivative[k].emplace(c.id(), r);
    return r;
}

Expr route(const Coordinate& c, int i, int j, const SystemSpec& sys) {
    auto rest = c.counts;
    if (rest[i - 1] == 0 || rest[j - 1] == 0) throw Error("pair does not divide " + c.name());
    --rest[i - 1];
    --rest[j - 1];
    Expr e = sys.rhs(i, j);
    for (int k = 1; k <= 3; ++k)
        for (int r = 0; r < rest[k - 1]; ++r) e = total_derivative(e, k, sys);
    return e;
}

}  // namespace

Interval Box::range(const Coordinate& c) const {
    auto it = ranges.find(c);
    return it == ranges.end() ? Interval{} : it->second;
}

bool Box::admits(const Coordinate& c, double v) const {
    auto r = range(c);
    if (v < r.lo || v > r.hi) return false;
    for (double x : r.excluded)
        if (std::fabs(v - x) < exclusion_radius) return false;
    return true;
}

const Expr& SystemSpec::rhs(int i, int j) const {
    if (i > j) std::swap(i, j);
    auto it = f.find({i, j});
    if (it == f.end()) throw Error("system has no equation for pair " + std::to_string(i) + std::to_string(j));
    return it->second;
}

namespace {

void validate(SystemSpec& sys) {
    if (sys.n != 2 && sys.n != 3) throw InputError("n must be 2 or 3");
    std::vector<std::pair<int, int>> pairs = sys.n == 2 ? std::vector<std::pair<int, int>>{{1, 2}}
                                                        : std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}};
    if (sys.f.size() != pairs.size()) throw InputError("system must define exactly the pairs for n=" + std::to_string(sys.n));
    for (auto [i, j] : pairs) {
        auto it = sys.f.find({i, j});
        if (it == sys.f.end()) throw InputError("missing f" + std::to_string(i) + std::to_string(j));
        for (auto& c : it->second.coordinates()) {
            bool ok = c.kind != Coordinate::Kind::Derivative ||
                      (c.order() == 1 && (c.branch() == i || c.branch() == j));
            if (c.kind == Coordinate::Kind::Independent && c.index > sys.n) ok = false;
            if (!ok)
                throw InputError("f" + std::to_string(i) + std::to_string(j) + " depends on forbidden coordinate " +
                                 c.name());
        }
    }
}

}  // namespace

SystemSpec make_system(int n, const std::map<std::pair<int, int>, std::string>& f, const Box& box) {
    SystemSpec sys;
    sys.n = n;
    sys.box = box;
    for (auto& [k, text] : f) {
        try {
            sys.f[k] = Expr::parse(text, n);
        } catch (const ParseError& e) {
            throw InputError("f" + std::to_string(k.first) + std::to_string(k.second) + ": " + e.what());
        }
    }
    validate(sys);
    return sys;
}

SystemSpec load_system(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw InputError("system document must be a JSON object");
    if (!doc.contains("n") || !doc["n"].is_number_integer()) throw InputError("system document needs integer field n");
    int n = doc["n"].get<int>();
    if (n != 2 && n != 3) throw InputError("n must be 2 or 3");
    std::map<std::pair<int, int>, std::string> f;
    Box box;
    SystemSpec sys;
    for (auto& [key, val] : doc.items()) {
        if (key == "n" || key == "name" || key == "description") continue;
        if (key == "order_budget") {
            if (!val.is_number_integer() || val.get<int>() < 2) throw InputError("order_budget must be an integer >= 2");
            sys.order_budget = val.get<int>();
            continue;
        }
        if (key == "exclusion_radius") {
            if (!val.is_number() || val.get<double>() < 0) throw InputError("exclusion_radius must be a nonnegative number");
            box.exclusion_radius = val.get<double>();
            continue;
        }
        if (key == "box") {
            if (!val.is_object()) throw InputError("box must be an object");
            for (auto& [cname, spec] : val.items()) {
                Expr c;
                try {
                    c = Expr::parse(cname, n);
                } catch (const ParseError& e) {
                    throw InputError("box key " + cname + ": " + e.what());
                }
                auto cs = c.coordinates();
                if (cs.size() != 1 || !(Expr::coord(cs[0]) == c)) throw InputError("box key " + cname + " is not a coordinate");
                if (!spec.is_array() || spec.size() < 2) throw InputError("box entry " + cname + " must be [lo, hi, excluded...]");
                Interval iv;
                for (std::size_t k = 0; k < spec.size(); ++k)
                    if (!spec[k].is_number()) throw InputError("box entry " + cname + " must contain numbers");
                iv.lo = spec[0].get<double>();
                iv.hi = spec[1].get<double>();
                if (!(iv.lo < iv.hi)) throw InputError("box entry " + cname + " needs lo < hi");
                for (std::size_t k = 2; k < spec.size(); ++k) iv.excluded.push_back(spec[k].get<double>());
                box.ranges[cs[0]] = iv;
            }
            continue;
        }
        if (key.size() == 3 && key[0] == 'f' && key[1] >= '1' && key[2] > key[1] && key[2] - '0' <= n) {
            if (!val.is_string()) throw InputError(key + " must be an expression string");
            f[{key[1] - '0', key[2] - '0'}] = val.get<std::string>();
            continue;
        }
        throw InputError("unexpected field '" + key + "' in system document");
    }
    SystemSpec built = make_system(n, f, box);
    built.order_budget = sys.order_budget;
    if (doc.contains("name") && doc["name"].is_string()) built.name = doc["name"].get<std::string>();
    return built;
}

Expr reduce_coordinate(const Coordinate& c, const SystemSpec& sys) {
    if (c.kind != Coordinate::Kind::Derivative || c.is_pure()) return Expr::coord(c);
    check_budget(c, sys);
    auto& cache = *sys.cache;
    {
        std::lock_guard lk(cache.mu);
        if (auto it = cache.reduced.find(c.id()); it != cache.reduced.end()) return it->second;
    }
    int i = 0, j = 0;
    for (int k = 1; k <= 3; ++k) {
        if (!c.counts[k - 1]) continue;
        if (!i)
            i = k;
        else if (!j)
            j = k;
    }
    Expr r = route(c, i, j, sys);
    std::lock_guard lk(cache.mu);
    cache.reduced.emplace(c.id(), r);
    return r;
}

Expr reduce_via(const Coordinate& c, int i, int j, const SystemSpec& sys) { return route(c, i, j, sys); }

Expr reduce(const Expr& e, const SystemSpec& sys) {
    return substitute(e, [&](const Coordinate& c) -> std::optional<Expr> {
        if (c.kind == Coordinate::Kind::Derivative && !c.is_pure()) return reduce_coordinate(c, sys);
        return std::nullopt;
    });
}

Expr total_derivative(const Expr& e, int k, const SystemSpec& sys) {
    if (k < 1 || k > sys.n) throw Error("total derivative index out of range");
    if (e.is_constant()) return Expr();
    auto& cache = *sys.cache;
    {
        std::lock_guard lk(cache.mu);
        auto& m = cache.derivative[k];
        if (auto it = m.find(e); it != m.end()) return it->second;
    }
    Expr r = derivation(e, [&](const Coordinate& c) { return coord_derivative(c, k, sys); });
    std::lock_guard lk(cache.mu);
    cache.derivative[k].emplace(e, r);
    return r;
}

Expr total_derivative(const Expr& e, const TotalVectorField& X, const SystemSpec& sys) {
    Expr d = total_derivative(e, X.index, sys);
    return X.factor ? *X.factor * d : d;
}

InvolutivityReport check_involutive(const SystemSpec& sys, const ZeroPolicy& policy) {
    InvolutivityReport rep;
    if (sys.n == 2) return rep;
    // D_k f_ij - D_i f_kj for the three essentially distinct triples
    const int triples[3][3] = {{3, 1, 2}, {3, 2, 1}, {2, 1, 3}};
    for (auto& t : triples) {
        int k = t[0], i = t[1], j = t[2];
        auto name = [](int a, int b) { return std::to_string(std::min(a, b)) + std::to_string(std::max(a, b)); };
        IdentityCheck ic;
        ic.label = "D" + std::to_string(k) + "f" + name(i, j) + "-D" + std::to_string(i) + "f" + name(k, j);
        ic.residual = total_derivative(sys.rhs(i, j), k, sys) - total_derivative(sys.rhs(k, j), i, sys);
        ic.verdict = is_zero(ic.residual, policy);
        rep.pass = rep.pass && ic.verdict.vanishes();
        rep.identities.push_back(std::move(ic));
    }
    return rep;
}

std::vector<Coordinate> restricted_coordinates(int n, int order) {
    std::vector<Coordinate> out;
    for (int i = 1; i <= n; ++i) out.push_back(Coordinate::x(i));
    out.push_back(Coordinate::u());
    for (int k = 1; k <= order; ++k)
        for (int i = 1; i <= n; ++i) out.push_back(Coordinate::pure(i, k));
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

double draw(const Box& box, const Coordinate& c, std::mt19937_64& rng) {
    Interval iv = box.range(c);
    for (int attempt = 0; attempt < 1000; ++attempt) {
        double v = iv.lo + (iv.hi - iv.lo) * uniform_unit(rng);
        if (box.admits(c, v)) return v;
    }
    throw Error("box for " + c.name() + " leaves no admissible values");
}

}  // namespace

JetPoint sample_point(const SystemSpec& sys, int order, std::uint64_t seed, int resample_cap) {
    std::mt19937_64 rng(seed);
    JetPoint jp;
    jp.order = order;
    jp.seed = seed;
    jp.census = restricted_coordinates(sys.n, order);
    for (int attempt = 0; attempt <= resample_cap; ++attempt) {
        Point p;
        for (auto& c : jp.census) p.set(c, draw(sys.box, c, rng));
        try {
            for (auto& [k, f] : sys.f) eval(f, p);
        } catch (const DomainError&) {
            continue;
        }
        jp.values = p;
        return jp;
    }
    throw Error("resample cap exceeded while sampling a jet point");
}

ZeroPolicy system_policy(const SystemSpec& sys, std::uint64_t seed, int samples, double tol) {
    ZeroPolicy p;
    p.seed = seed;
    p.samples = samples;
    p.tol = tol;
    Box box = sys.box;
    p.sampler = [box](const Coordinate& c, std::mt19937_64& rng) { return draw(box, c, rng); };
    return p;
}

}  // namespace vbx
