#pragma once

#include <span>

#include "dcl/algebra.hpp"

namespace dcl {

// Eliminates one variable from every term in closed form. Cases per term:
// a delta carrying the variable is solved exactly; a quadratic coefficient
// with positive imaginary part (or a nonzero real one) is completed to a
// square and reduced with the Gaussian/Fresnel formula; a purely linear
// dependence on other variables emits 2*pi times a new delta factor; a
// nonzero constant linear phase kills the term; a constant integrand is
// divergent here.
State integrate_var(const State& s, int var, const EvalConfig& cfg = EvalConfig());

// Folds integrate_var over all variables, choosing the order per term:
// deltas first, then damped quadratic coefficients, then oscillatory ones.
State integrate_all(const State& s, const EvalConfig& cfg = EvalConfig());

// Same, with a caller-fixed elimination order over the original indices.
State integrate_all(const State& s, const EvalConfig& cfg,
                    std::span<const int> order);

// <phi|psi> = integral of conj(phi) * psi over all variables. Constant
// integrands surviving full cancellation are read through the Kronecker
// agreement and reported as a delta-normalized amplitude.
Amplitude inner_product(const State& phi, const State& psi,
                        const EvalConfig& cfg = EvalConfig());

// sqrt(<s|s>) for Proper states.
double state_norm(const State& s, const EvalConfig& cfg = EvalConfig());

}  // namespace dcl
