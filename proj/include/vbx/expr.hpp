#pragma once

#include <gmpxx.h>

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace vbx {

namespace detail {
struct RatFun;
}

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& msg, std::size_t offset)
        : Error(msg + " at offset " + std::to_string(offset)), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class IndeterminateError : public Error {
public:
    using Error::Error;
};

// Jet coordinate: x_i, u, or u_I with I a sorted multi-index over {1,2,3}.
struct Coordinate {
    enum class Kind : std::uint8_t { Independent, Dependent, Derivative };

    Kind kind = Kind::Dependent;
    int index = 0;                     // for Independent
    std::array<std::uint8_t, 3> counts{};  // multiplicity of 1, 2, 3 in I

    static Coordinate x(int i);
    static Coordinate u();
    static Coordinate deriv(const std::vector<int>& multi);
    static Coordinate from_counts(std::array<std::uint8_t, 3> c);
    static Coordinate pure(int branch, int order);  // order 0 gives u

    std::vector<int> multi() const;
    int order() const;
    bool is_pure() const;
    int branch() const;  // pure derivatives only, 0 for u
    std::string name() const;

    std::uint32_t id() const;
    static Coordinate from_id(std::uint32_t id);

    std::strong_ordering operator<=>(const Coordinate& o) const;
    bool operator==(const Coordinate& o) const { return (*this <=> o) == 0; }
};

class Expr {
public:
    Expr();
    Expr(int v);
    Expr(long v);
    Expr(const mpq_class& q);
    explicit Expr(std::shared_ptr<const detail::RatFun> p) : p_(std::move(p)) {}

    static Expr coord(const Coordinate& c);
    static Expr parse(std::string_view text, int n = 3);

    Expr pow(const mpq_class& e) const;

    bool is_zero() const;  // structural
    bool is_one() const;
    bool is_constant() const;
    std::optional<mpq_class> constant() const;
    bool is_rational() const;  // no kernel calls anywhere
    std::vector<Coordinate> coordinates() const;
    int order() const;  // highest derivative order among coordinates, -1 if none

    std::string str() const;
    std::size_t hash() const;
    bool operator==(const Expr& o) const;

    const detail::RatFun& rep() const { return *p_; }

    friend Expr operator+(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a, const Expr& b);
    friend Expr operator*(const Expr& a, const Expr& b);
    friend Expr operator/(const Expr& a, const Expr& b);
    friend Expr operator-(const Expr& a);

    Expr& operator+=(const Expr& o) { return *this = *this + o; }
    Expr& operator-=(const Expr& o) { return *this = *this - o; }
    Expr& operator*=(const Expr& o) { return *this = *this * o; }
    Expr& operator/=(const Expr& o) { return *this = *this / o; }

private:
    std::shared_ptr<const detail::RatFun> p_;
};

Expr exp(const Expr& a);
Expr log(const Expr& a);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr sqrt(const Expr& a);

std::ostream& operator<<(std::ostream& os, const Expr& e);

// Derivation acting on coordinates as given, extended to kernels by the chain rule.
Expr derivation(const Expr& e, const std::function<Expr(const Coordinate&)>& on_coord);
Expr derive(const Expr& e, const Coordinate& c);
Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const Coordinate&)>& f);

class Point {
public:
    void set(const Coordinate& c, double v) { values_[c.id()] = v; }
    std::optional<double> get(const Coordinate& c) const;
    bool has(const Coordinate& c) const { return values_.count(c.id()) != 0; }
    std::vector<std::pair<Coordinate, double>> entries() const;

private:
    std::unordered_map<std::uint32_t, double> values_;
};

double eval(const Expr& e, const Point& p);

// Tree view of the canonical form.
struct Tree {
    enum class Kind { Rational, Coordinate, Sum, Product, Power, Call };
    Kind kind = Kind::Rational;
    mpq_class value;           // Rational, or exponent for Power
    vbx::Coordinate coord;     // Coordinate
    std::string fn;            // Call
    std::vector<Tree> children;
};
Tree tree(const Expr& e);

struct ZeroVerdict {
    enum class Kind { Zero, ProbablyZero, NonZero };
    Kind kind = Kind::Zero;
    int samples = 0;
    double tol = 0;
    std::string witness;  // sample point showing NonZero, if any

    bool vanishes() const { return kind != Kind::NonZero; }
    std::string label() const;
};

using Sampler = std::function<double(const Coordinate&, std::mt19937_64&)>;

struct ZeroPolicy {
    enum class Mode { ExactOnly, Sampled };
    Mode mode = Mode::Sampled;
    int samples = 20;
    double tol = 1e-9;
    int resample_cap = 100;
    std::uint64_t seed = 0x5eed;
    Sampler sampler;  // default: uniform on [-1, 1]
};

ZeroVerdict is_zero(const Expr& e, const ZeroPolicy& policy = {});

// Combines verdicts: NonZero dominates, then ProbablyZero.
ZeroVerdict combine(const ZeroVerdict& a, const ZeroVerdict& b);

double uniform_unit(std::mt19937_64& rng);  // deterministic in [0, 1)

}  // namespace vbx

template <>
struct std::hash<vbx::Expr> {
    std::size_t operator()(const vbx::Expr& e) const { return e.hash(); }
};
