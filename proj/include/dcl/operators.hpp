#pragma once

#include <vector>

#include "dcl/algebra.hpp"
#include "dcl/quantifier.hpp"

namespace dcl {

struct HamiltonianSpec {
    enum class Kind { Free, Harmonic };
    Kind kind = Kind::Free;
    double mass = 1.0;
    double omega = 0.0;

    static HamiltonianSpec free_particle(double mass);
    static HamiltonianSpec harmonic(double mass, double omega);
};

// Symbolic description of a linear map on states.
//
// Translate(a) shifts the first variable, x -> x + a, realizing
// exp(i a P / hbar); Modulate(b) multiplies by exp(i b x), realizing
// exp(i b Q). Kernel(alpha, k) maps phi(y, z) to the integral of
// alpha(y, x) phi(y, z) over the k shared leading variables. Compose applies
// right to left (operator-product order).
struct OperatorSpec {
    enum class Kind {
        Kernel,
        Translate,
        Modulate,
        Differentiate,
        MultiplyVar,
        Evolve,
        Compose,
        Sum
    };
    Kind kind = Kind::Translate;
    State kernel_alpha;
    int kernel_rank = 0;
    double amount = 0.0;
    int var = 0;
    HamiltonianSpec hamiltonian;
    double time = 0.0;
    std::vector<OperatorSpec> factors;
    std::vector<std::pair<Complex, OperatorSpec>> summands;

    static OperatorSpec kernel(State alpha, int k);
    static OperatorSpec translate(double a);
    static OperatorSpec modulate(double b);
    static OperatorSpec differentiate(int var);
    static OperatorSpec multiply_var(int var);
    static OperatorSpec evolve_op(HamiltonianSpec h, double t);
    static OperatorSpec compose(std::vector<OperatorSpec> factors);
    static OperatorSpec sum(std::vector<std::pair<Complex, OperatorSpec>> summands);
};

// |p> = (2 pi)^(-1/2) exp(i p x)
State momentum_state(double p);
// |x0> = delta(x - x0)
State position_state(double x0);
// pi^(-1/4) width^(-1/2) exp(-(x-center)^2/(2 width^2) + i momentum x)
State gaussian_state(double center, double width, double momentum);

State apply(const OperatorSpec& op, const State& s,
            const EvalConfig& cfg = EvalConfig());

// Scalar c with exp(iaP) exp(ibQ) = c exp(ibQ) exp(iaP), computed by applying
// both orders to a probe Gaussian. Equals exp(i a b hbar).
Complex weyl_commutator_phase(double a, double b,
                              const EvalConfig& cfg = EvalConfig());

// exp(-i H t / hbar) applied through the closed-form propagator. Harmonic
// evolution at omega*t in pi*Z degenerates to the parity map
// psi -> exp(-i k pi / 2) psi((-1)^k x).
State evolve(const HamiltonianSpec& h, double t, const State& s,
             const EvalConfig& cfg = EvalConfig());

// |<f|psi>|^2, clamped to [0, 1].
double probability(const State& f, const State& psi,
                   const EvalConfig& cfg = EvalConfig());

}  // namespace dcl
