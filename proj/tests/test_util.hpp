#pragma once

#include <complex>
#include <random>

#include "dcl/algebra.hpp"

namespace dcl::testing {

inline bool approx(Complex a, Complex b, double tol) {
    return std::abs(a - b) <= tol;
}

inline bool approx_rel(Complex a, Complex b, double tol) {
    double scale = std::max({std::abs(a), std::abs(b), 1.0});
    return std::abs(a - b) <= tol * scale;
}

// Random Proper arity-1 state: bounded Gaussian terms with polynomial
// prefactors of low degree.
inline State random_proper_state(std::mt19937& rng, int max_terms = 2,
                                 int max_poly_degree = 2) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::uniform_real_distribution<double> damping(0.3, 1.5);
    std::uniform_int_distribution<int> nterms(1, max_terms);
    std::uniform_int_distribution<int> degree(0, max_poly_degree);

    std::vector<GaussTerm> terms;
    int count = nterms(rng);
    for (int k = 0; k < count; ++k) {
        GaussTerm t = GaussTerm::unit(1);
        t.coeff = Complex(unit(rng) + 1.5, unit(rng));
        t.exponent.set(0, 0, Complex(unit(rng), damping(rng)));
        t.exponent.b[0] = Complex(unit(rng), unit(rng) * 0.5);
        int d = degree(rng);
        PolyPrefactor poly;
        for (int e = 0; e <= d; ++e) {
            poly.monomials[MultiIndex{e}] = Complex(unit(rng), unit(rng) * 0.3);
        }
        t.poly = poly;
        terms.push_back(std::move(t));
    }
    return make_state(1, std::move(terms));
}

// Random Proper state of the given arity with positive-definite Im(A).
inline State random_proper_state_n(std::mt19937& rng, int arity) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    GaussTerm t = GaussTerm::unit(arity);
    t.coeff = Complex(unit(rng) + 1.5, unit(rng));
    // Im A = R^T R + 0.3 I with small random R keeps the state integrable.
    std::vector<double> r(static_cast<size_t>(arity) * arity);
    for (auto& v : r) v = 0.5 * unit(rng);
    for (int i = 0; i < arity; ++i) {
        for (int j = i; j < arity; ++j) {
            double im = i == j ? 0.3 : 0.0;
            for (int k = 0; k < arity; ++k) {
                im += r[static_cast<size_t>(k) * arity + i] *
                      r[static_cast<size_t>(k) * arity + j];
            }
            t.exponent.set(i, j, Complex(0.4 * unit(rng), im));
        }
        t.exponent.b[i] = Complex(unit(rng), 0.3 * unit(rng));
    }
    return make_state(arity, {std::move(t)});
}

}  // namespace dcl::testing
