#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vbx/expr.hpp"
#include "vbx/jet.hpp"

namespace vbx {

// Contact one-form theta_{branch^order}; (0, 0) is theta itself.
struct Contact {
    int branch = 0;
    int order = 0;

    static Contact of(const Coordinate& c);  // u -> theta, u_{i^k} -> theta_{i^k}
    Coordinate coordinate() const;
    std::string label() const;
    auto operator<=>(const Contact&) const = default;
};

// sigma_A ^ theta_B with A ascending (bit i-1 for sigma_i) and B strictly ascending.
struct BiMono {
    std::uint8_t h = 0;
    std::vector<Contact> c;

    int r() const;
    int s() const { return static_cast<int>(c.size()); }
    std::vector<int> sigmas() const;
    std::vector<std::string> labels() const;
    auto operator<=>(const BiMono&) const = default;
};

class BiForm {
public:
    int n = 3;
    int r = 0;
    int s = 0;
    std::map<BiMono, Expr> terms;  // nonzero coefficients only

    static BiForm zero(int n, int r, int s);
    static BiForm function(int n, const Expr& f);
    static BiForm sigma(int n, int i);
    static BiForm contact(int n, Contact c);
    static BiForm theta(int n) { return contact(n, {}); }

    bool is_zero() const { return terms.empty(); }
    Expr coefficient(const BiMono& m) const;
    void add(const BiMono& m, const Expr& c);
    int max_contact_order() const;

    BiForm operator-() const;
    BiForm& operator+=(const BiForm& o);
    BiForm& operator-=(const BiForm& o);
    friend BiForm operator+(BiForm a, const BiForm& b) { return a += b; }
    friend BiForm operator-(BiForm a, const BiForm& b) { return a -= b; }
    friend BiForm operator*(const Expr& f, const BiForm& w);

    std::string str() const;
};

BiForm map_coefficients(const BiForm& w, const std::function<Expr(const Expr&)>& f);

// Graded wedge; horizontal overflow yields the zero form of the summed bidegree.
BiForm wedge(const BiForm& a, const BiForm& b);
BiForm wedge(std::initializer_list<BiForm> fs);

BiForm d_V(const Expr& f, const SystemSpec& sys);
BiForm d_V(const BiForm& w, const SystemSpec& sys);
BiForm lie(int i, const BiForm& w, const SystemSpec& sys);
BiForm lie(const TotalVectorField& X, const BiForm& w, const SystemSpec& sys);
BiForm d_H(const BiForm& w, const SystemSpec& sys);
BiForm d_H(const Expr& f, const SystemSpec& sys);

// Action of X_i on a single contact one-form, expanded in the pure basis.
BiForm lie_contact(int i, Contact c, const SystemSpec& sys);

struct VerticalVectorField {
    std::map<Contact, Expr> components;  // v = sum components[K] d/d theta_K
    std::string label;
};

BiForm interior(const TotalVectorField& X, const BiForm& w);
BiForm interior(const VerticalVectorField& V, const BiForm& w);
// Value of a (0,1) form on a vertical field.
Expr pairing(const BiForm& w, const VerticalVectorField& V);

// Bidegree component selection for inhomogeneous results.
struct FormSum {
    std::map<std::pair<int, int>, BiForm> pieces;
    void add(const BiForm& w);
    bool is_zero() const;
};
FormSum d_total(const FormSum& w, const SystemSpec& sys);

struct FormVerdict {
    ZeroVerdict verdict;
    std::string monomial;  // first non-vanishing monomial
    bool vanishes() const { return verdict.vanishes(); }
};
FormVerdict is_zero(const BiForm& w, const ZeroPolicy& policy);

}  // namespace vbx
