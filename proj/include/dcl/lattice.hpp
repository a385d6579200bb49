#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dcl/algebra.hpp"
#include "dcl/operators.hpp"

namespace dcl {

using LatticeVector = Eigen::VectorXcd;
using LatticeOperator = Eigen::MatrixXcd;

// N-point configuration space with the self-dual scaling
// spacing^2 * N = 2*pi, centered so x_{N/2} = 0. Uniform measure weight
// `spacing` per point.
struct LatticeModel {
    int n = 0;
    double spacing = 0.0;

    static LatticeModel with_size(int n);
    double point(int j) const { return (j - n / 2) * spacing; }
};

// Samples an arity-1 state on the lattice. A delta factor becomes a scaled
// basis vector at the nearest point; ties break toward the lower index and
// set *ambiguous when provided.
LatticeVector interpret(const State& s, const LatticeModel& model,
                        bool* ambiguous = nullptr);

// sum_j conj(u_j) v_j * spacing
Complex discrete_inner(const LatticeVector& u, const LatticeVector& v,
                       const LatticeModel& model);

// Cyclic translation by a/spacing positions (a must be a lattice multiple).
LatticeOperator discrete_translation(const LatticeModel& model, double a);
// Diagonal modulation exp(i b x_j) (b must be a multiple of 2*pi/(N*spacing)).
LatticeOperator discrete_modulation(const LatticeModel& model, double b);
// exp(iaP) exp(ibQ) as one matrix.
LatticeOperator discrete_weyl(const LatticeModel& model, double a, double b);

struct SurjectionReport {
    struct Row {
        double momentum;       // continuum label of the matched eigenstate
        Complex eigenvalue;    // translation eigenvalue exp(i p a)
        double defect;         // norm of the unmatched component
    };
    std::vector<Row> rows;
    double max_defect = 0.0;
    bool surjective = false;
};

// Eigenbasis of the discrete translation against sampled momentum states.
SurjectionReport eig_surjection_check(const LatticeModel& model, double a);

// max(|sum_f f |f><f| - F|, |sum_f |f><f| - I|) in max-entry norm.
double spectral_resolution_check(const LatticeOperator& f);

// Hermitian Hamiltonian matrix: kinetic part from the DFT momentum grid,
// plus the quadratic potential for the harmonic case.
LatticeOperator discrete_hamiltonian(const LatticeModel& model,
                                     const HamiltonianSpec& h);

// Unitary exp(-i H t / hbar) through the spectral form.
LatticeOperator discrete_evolve(const LatticeModel& model,
                                const HamiltonianSpec& h, double t,
                                double hbar = 1.0);

// |<f|psi>|^2 under the lattice measure; psi must be normalized.
double discrete_probability(const LatticeVector& f, const LatticeVector& psi,
                            const LatticeModel& model);

// (eigenvalue, probability) rows of the Born distribution of F in psi.
std::vector<std::pair<double, double>> born_distribution(
    const LatticeOperator& f, const LatticeVector& psi,
    const LatticeModel& model);

struct ConvergenceRow {
    int n = 0;
    Complex discrete_value;
    Complex symbolic_value;
    double abs_error = 0.0;
    bool resolved = false;  // narrowest state width >= 4 * spacing
};

// Discrete inner products against the symbolic amplitude over a sweep of N.
std::vector<ConvergenceRow> convergence_report(const State& phi,
                                               const State& psi,
                                               std::span<const int> sizes,
                                               const EvalConfig& cfg = EvalConfig());

}  // namespace dcl
