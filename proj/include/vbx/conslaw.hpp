#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vbx/laplace.hpp"

namespace vbx {

class HypothesisError : public Error {
public:
    HypothesisError(std::string label, const std::string& msg) : Error(msg), label(std::move(label)) {}
    std::string label;
};

// rho_ij of type (0, s-1), keyed by (i, j) with i < j; missing pairs are zero.
struct RhoTriple {
    int s = 1;
    std::map<std::pair<int, int>, BiForm> rho;

    static RhoTriple functions(const std::map<std::pair<int, int>, Expr>& f, int n = 3);
    BiForm at(int i, int j, int n = 3) const;
};

// Balanced: the symmetric Lagrange-identity form, d_H Psi = -sigma_123 ^ Theta ^ L*(rho).
// Printed: the literal sign pattern, which equals (1/2) d_H(sigma_k ^ Theta ^ rho) and is always exact.
enum class PsiConvention { Balanced, Printed };

// X_j Theta + A^i_ij Theta, the first adapted element of branch j with partner i.
BiForm first_level(const LinearizedSystem& lin, int j, int i);

// psi^ij_k for k in {i, j}.
BiForm psi_component(const LinearizedSystem& lin, const BiForm& rho, int i, int j, int k);

BiForm psi(const LinearizedSystem& lin, const BiForm& rho, int i, int j,
           PsiConvention convention = PsiConvention::Balanced);

struct ConservationLaw {
    BiForm form;
    FormVerdict closure;
    std::optional<FormVerdict> adjoint_sum;
    int adapted_order = 0;
    std::map<std::string, std::string> provenance;

    bool closed() const { return closure.vanishes(); }
    std::string closure_label() const;  // "zero", "probable", "failed"
};

ConservationLaw conslaw_from_rho(const LinearizedSystem& lin, const RhoTriple& rho, const ZeroPolicy& policy,
                                 PsiConvention convention = PsiConvention::Balanced);

// Rejects (0,s) and (n,s) candidates, which are closed for degree reasons.
FormVerdict verify_closed(const BiForm& w, const SystemSpec& sys, const ZeroPolicy& policy);

// lambda with X(w) = lambda w, if one exists.
std::optional<Expr> is_relative_invariant(const BiForm& w, const TotalVectorField& X, const SystemSpec& sys,
                                          const ZeroPolicy& policy);

struct CheckRow {
    std::string label;
    ZeroVerdict verdict;
    bool expect_zero = true;
    bool holds = true;
};

// I, I~ are annihilated by pair_fields; J, J~ (and K, K~ when n = 3) by other_fields.
struct InvariantBundle {
    std::vector<int> pair_fields;
    std::vector<int> other_fields;
    Expr I, I_t, J, J_t;
    std::optional<Expr> K, K_t;
};

struct IndependenceRow {
    std::string label;  // "dI^dI~"
    int functions = 0;
    int full_rank_points = 0;
    int points = 0;
    bool holds = false;
};

struct DarbouxReport {
    std::vector<CheckRow> invariance;
    std::vector<IndependenceRow> independence;
    bool pass = true;
};

DarbouxReport darboux_check(const SystemSpec& sys, const InvariantBundle& bundle, const ZeroPolicy& policy);

struct RescaledFields {
    std::array<TotalVectorField, 4> fields;  // fields[m] rescales X_m
    std::vector<CheckRow> hypotheses;
    std::vector<CheckRow> commutators;
    bool pass = true;
};

// I invariant under X_i, X_j and K under X_l; X_i / X_i(K), X_l / X_l(I), X_j / X_j(K).
RescaledFields rescale_characteristics(const SystemSpec& sys, const std::array<TotalVectorField, 4>& X, const Expr& I,
                                       const Expr& K, int i, int j, int l, const ZeroPolicy& policy);

enum class ContactFormKind { ThreeFunction, TwoFunction };

struct ContactFormSpec {
    ContactFormKind kind = ContactFormKind::TwoFunction;
    Expr I, J;
    std::optional<Expr> K;
    int l = 3;  // three-function: the annihilating field; two-function: X_l(J) = 1
};

struct InvariantForm {
    BiForm form;
    std::vector<int> invariant_under;
    std::vector<CheckRow> hypotheses;
    std::vector<CheckRow> invariance;
    bool pass = true;
};

// Throws HypothesisError when a recorded hypothesis fails.
InvariantForm invariant_contact_form(const SystemSpec& sys, const ContactFormSpec& spec, const ZeroPolicy& policy);

struct InvariantSequence {
    std::vector<Expr> I;        // I_1 .. I_{m+1}
    std::vector<BiForm> alpha;  // alpha_1 .. alpha_m
    std::vector<FormVerdict> residuals;  // d(alpha_i) - dI~ ^ alpha_{i+1}, i < m
    bool pass = true;
};

// alpha_i = d_V I_i - I_{i+1} d_V I~ with I_{k+1} = X(I_k); requires X(I~) = 1.
InvariantSequence invariant_sequence(const SystemSpec& sys, const Expr& I1, const Expr& It1, const TotalVectorField& X,
                                     int m, const ZeroPolicy& policy);

enum class LawKind { OneS, TwoS };

struct LawBlock {
    Expr coefficient = Expr(1);
    std::vector<BiForm> factors;  // invariant (0,1) forms, wedged in order
};

// OneS: sigma_l ^ sum(blocks), blocks invariant under every field but X_l.
// TwoS: sigma_i ^ sigma_j ^ sum(blocks), blocks invariant under the third field.
struct GeneratorInput {
    LawKind kind = LawKind::OneS;
    int l = 1;
    int i = 1, j = 2;
    std::vector<LawBlock> blocks;
    std::map<std::string, std::string> provenance;
};

// sigma_l ^ alpha_{k+1} ^ alpha_k ^ (alpha_e for e in eta), from an invariant sequence.
GeneratorInput sequence_law(const InvariantSequence& seq, int l, int k, const std::vector<int>& eta = {});

ConservationLaw generate_cl(const SystemSpec& sys, const GeneratorInput& in, const ZeroPolicy& policy);

}  // namespace vbx
