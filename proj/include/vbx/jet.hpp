#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <string>
#include <utility>
#include <vector>

#include "vbx/expr.hpp"

namespace vbx {

class InputError : public Error {
public:
    using Error::Error;
};

class OrderBudgetExceeded : public Error {
public:
    using Error::Error;
};

struct Interval {
    double lo = -1;
    double hi = 1;
    std::vector<double> excluded;
};

struct Box {
    std::map<Coordinate, Interval> ranges;
    double exclusion_radius = 0.1;

    Interval range(const Coordinate& c) const;
    bool admits(const Coordinate& c, double v) const;
};

// Memo tables shared by copies of a SystemSpec; entries are pure functions of their keys.
struct JetCache {
    std::mutex mu;
    std::unordered_map<std::uint32_t, Expr> reduced;
    std::unordered_map<std::uint32_t, Expr> coord_derivative[4];
    std::unordered_map<Expr, Expr> derivative[4];
};

struct SystemSpec {
    int n = 3;
    std::map<std::pair<int, int>, Expr> f;  // keys (i, j) with i < j
    Box box;
    int order_budget = 8;
    std::string name;
    std::shared_ptr<JetCache> cache = std::make_shared<JetCache>();

    const Expr& rhs(int i, int j) const;  // unordered
};

SystemSpec load_system(const std::string& json_text);
SystemSpec make_system(int n, const std::map<std::pair<int, int>, std::string>& f, const Box& box = {});

struct TotalVectorField {
    int index = 1;
    std::optional<Expr> factor;
};

Expr reduce(const Expr& e, const SystemSpec& sys);
Expr reduce_coordinate(const Coordinate& c, const SystemSpec& sys);
// Reduction of a mixed coordinate through a chosen pair, used to cross-check routes.
Expr reduce_via(const Coordinate& c, int i, int j, const SystemSpec& sys);

Expr total_derivative(const Expr& e, int i, const SystemSpec& sys);
Expr total_derivative(const Expr& e, const TotalVectorField& X, const SystemSpec& sys);

struct IdentityCheck {
    std::string label;
    Expr residual;
    ZeroVerdict verdict;
};

struct InvolutivityReport {
    std::vector<IdentityCheck> identities;
    bool pass = true;
};

InvolutivityReport check_involutive(const SystemSpec& sys, const ZeroPolicy& policy);

struct JetPoint {
    int order = 0;
    std::uint64_t seed = 0;
    Point values;
    std::vector<Coordinate> census;
};

// Restricted coordinates x^i, u, u_{i^k} for k <= order.
std::vector<Coordinate> restricted_coordinates(int n, int order);
JetPoint sample_point(const SystemSpec& sys, int order, std::uint64_t seed, int resample_cap = 100);

// Zero-test policy whose sampler respects the system box.
ZeroPolicy system_policy(const SystemSpec& sys, std::uint64_t seed, int samples = 20, double tol = 1e-9);

}  // namespace vbx
