#pragma once

#include <complex>
#include <map>
#include <span>
#include <vector>

#include "dcl/errors.hpp"

namespace dcl {

using Complex = std::complex<double>;

// Structural tolerance used by canonicalization when no EvalConfig is in
// scope (like-term merging, delta pivot detection, zero pruning).
inline constexpr double kCanonTol = 1e-12;

inline bool is_finite(Complex z) {
    return std::isfinite(z.real()) && std::isfinite(z.imag());
}

// Evaluation parameters shared across the engine.
struct EvalConfig {
    double hbar = 1.0;
    double eq_tol = 1e-12;                    // equality tolerance for matching
    std::vector<double> interval_schedule;    // half-widths of the I_k sweep
    int max_degree = 16;                      // polynomial prefactor cap

    EvalConfig();
    void validate() const;
};

// Affine expression over term variables: sum coeffs[i]*x_i + constant.
// Zero-valued entries are never stored.
struct LinearForm {
    std::map<int, Complex> coeffs;
    Complex constant{0.0, 0.0};

    LinearForm() = default;
    explicit LinearForm(Complex c) : constant(c) {}

    Complex coeff(int var) const {
        auto it = coeffs.find(var);
        return it == coeffs.end() ? Complex(0.0) : it->second;
    }
    void set(int var, Complex c) {
        if (c == Complex(0.0)) {
            coeffs.erase(var);
        } else {
            coeffs[var] = c;
        }
    }
    void add(int var, Complex c) { set(var, coeff(var) + c); }
    bool depends_on(int var) const { return coeffs.count(var) > 0; }
    bool vars_empty(double tol) const;
    // Renumbers variables after `removed` was eliminated (indices above it
    // shift down by one). The form must not depend on `removed`.
    LinearForm drop_var(int removed) const;
    LinearForm scaled(Complex c) const;
    LinearForm plus(const LinearForm& other) const;
};

// Dirac delta of an affine argument. Variable coefficients are real.
struct DeltaFactor {
    LinearForm form;
};

// Monomial exponents per variable; length equals the owning term's arity.
using MultiIndex = std::vector<int>;

// Sparse polynomial in the term variables. Canonical: no zero coefficients.
struct PolyPrefactor {
    std::map<MultiIndex, Complex> monomials;

    static PolyPrefactor one(int arity);
    static PolyPrefactor constant(int arity, Complex c);
    static PolyPrefactor from_linear(const LinearForm& lf, int arity);

    bool is_zero() const { return monomials.empty(); }
    bool is_constant() const;
    Complex constant_value() const;  // coefficient of the all-zero monomial
    int total_degree() const;
    int degree_in(int var) const;
    void prune(double tol);

    PolyPrefactor plus(const PolyPrefactor& other) const;
    PolyPrefactor times(const PolyPrefactor& other, int max_degree) const;
    PolyPrefactor scaled(Complex c) const;
    Complex evaluate(std::span<const double> xs) const;
};

// (a0 + sum a_i x_i)^exponent expanded as a polynomial of the given arity.
PolyPrefactor poly_pow_linear(const LinearForm& lf, int exponent, int arity,
                              int max_degree);

// Quadratic phase F(x) = x^T A x + b.x + c; the term contributes exp(i F).
// A is stored dense row-major and kept symmetric; Im(A) must be PSD.
struct QuadExponent {
    int arity = 0;
    std::vector<Complex> a;  // arity*arity, row-major, symmetric
    std::vector<Complex> b;  // arity
    Complex c{0.0, 0.0};

    QuadExponent() = default;
    explicit QuadExponent(int n)
        : arity(n), a(static_cast<size_t>(n) * n, Complex(0.0)), b(n, Complex(0.0)) {}

    Complex at(int i, int j) const { return a[static_cast<size_t>(i) * arity + j]; }
    // Sets A[i][j] and A[j][i].
    void set(int i, int j, Complex v) {
        a[static_cast<size_t>(i) * arity + j] = v;
        a[static_cast<size_t>(j) * arity + i] = v;
    }
    void add_at(int i, int j, Complex v) { set(i, j, at(i, j) + v); }
    Complex evaluate(std::span<const double> xs) const;
};

// One symbolic term: coeff * prod(deltas) * poly * exp(i * exponent).
struct GaussTerm {
    Complex coeff{1.0, 0.0};
    std::vector<DeltaFactor> deltas;
    PolyPrefactor poly;
    QuadExponent exponent;
    int arity = 0;

    static GaussTerm unit(int arity);  // coeff 1, poly 1, zero exponent
};

enum class Rigging { Proper, Generalized };

// Finite linear combination of terms of fixed arity. Always canonical:
// construct through make_state.
struct State {
    int arity = 0;
    std::vector<GaussTerm> terms;
    Rigging rigging = Rigging::Proper;

    bool is_zero() const { return terms.empty(); }
};

// Result of a full inner product.
struct Amplitude {
    enum class Kind { Finite, DeltaNormalized };
    Kind kind = Kind::Finite;
    Complex value{0.0, 0.0};  // finite value, or the delta-normalized phase

    static Amplitude finite(Complex v) { return {Kind::Finite, v}; }
    static Amplitude delta_normalized(Complex phase) {
        return {Kind::DeltaNormalized, phase};
    }
    bool is_finite() const { return kind == Kind::Finite; }
};

// Canonicalizes a term in place. Returns false when the term is zero (and
// should be dropped). Throws DependentDeltas when delta forms coincide.
bool canonicalize_term(GaussTerm& term, double tol = kCanonTol);

// Builds a canonical State: per-term canonicalization, like-term merging,
// deterministic ordering, rigging classification.
State make_state(int arity, std::vector<GaussTerm> terms, double tol = kCanonTol);

State zero_state(int arity);

// --- closed algebraic operations -------------------------------------------

State conjugate(const State& s);
State add(const State& s1, const State& s2);
State scale(Complex c, const State& s);
State multiply_pointwise(const State& s1, const State& s2,
                         const EvalConfig& cfg = EvalConfig());
State tensor(const State& s1, const State& s2);

// s'(x) = s(M x + v) with M real invertible (row-major arity*arity).
State substitute_affine(const State& s, std::span<const double> m,
                        std::span<const double> v);

// Rescales a Proper state to unit norm. Defined with the quantifier code
// since it evaluates an inner product.
State normalize(const State& s, const EvalConfig& cfg = EvalConfig());

// --- helpers shared by other modules ----------------------------------------

// Reindexes variables through an injective map old->new inside a larger arity.
State embed(const State& s, int new_arity, std::span<const int> var_map);

// Pointwise value of a delta-free term/state at a real point.
Complex evaluate_term(const GaussTerm& term, std::span<const double> xs);
Complex evaluate_state(const State& s, std::span<const double> xs);

// Eigenvalues of a dense symmetric real matrix (row-major), ascending.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

// Structural comparison of canonical states within a tolerance.
bool states_close(const State& s1, const State& s2, double tol);

}  // namespace dcl
