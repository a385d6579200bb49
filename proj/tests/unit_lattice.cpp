#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dcl/lattice.hpp"
#include "dcl/quantifier.hpp"
#include "test_util.hpp"

using namespace dcl;
using dcl::testing::approx;

namespace {

const double kPi = std::numbers::pi;

LatticeVector normalized(LatticeVector v, const LatticeModel& m) {
    Complex n2 = discrete_inner(v, v, m);
    return v / std::sqrt(n2.real());
}

}  // namespace

TEST_CASE("lattice scaling is self dual") {
    LatticeModel m = LatticeModel::with_size(64);
    CHECK(m.spacing * m.spacing * m.n == doctest::Approx(2.0 * kPi).epsilon(1e-14));
    CHECK(m.point(m.n / 2) == 0.0);
    CHECK_THROWS_AS(LatticeModel::with_size(3), DimensionMismatch);
    CHECK_THROWS_AS(LatticeModel::with_size(0), DimensionMismatch);
}

TEST_CASE("interpreting the constant momentum state samples it everywhere") {
    LatticeModel m = LatticeModel::with_size(4);
    LatticeVector v = interpret(momentum_state(0.0), m);
    for (int j = 0; j < m.n; ++j) {
        CHECK(approx(v[j], Complex(1.0 / std::sqrt(2.0 * kPi)), 1e-15));
    }
}

TEST_CASE("interpreted gaussians converge to the symbolic normalization") {
    LatticeModel m = LatticeModel::with_size(1024);
    State g = gaussian_state(0.0, 1.0, 0.0);
    LatticeVector v = interpret(g, m);
    Complex n2 = discrete_inner(v, v, m);
    CHECK(approx(n2, Complex(1.0), 1e-6));
}

TEST_CASE("interpreted position states sample the wave function") {
    LatticeModel m = LatticeModel::with_size(512);
    State g = gaussian_state(0.3, 1.1, 0.6);
    // Pick a lattice point so no placement error enters.
    double x0 = m.point(300);
    LatticeVector d = interpret(position_state(x0), m);
    LatticeVector v = interpret(g, m);
    double xs[1] = {x0};
    CHECK(approx(discrete_inner(d, v, m), evaluate_state(g, xs), 1e-6));
}

TEST_CASE("interpret flags ambiguous delta placements") {
    LatticeModel m = LatticeModel::with_size(8);
    bool ambiguous = false;
    interpret(position_state(0.5 * m.spacing), m, &ambiguous);
    CHECK(ambiguous);
    ambiguous = false;
    interpret(position_state(m.spacing), m, &ambiguous);
    CHECK(!ambiguous);
}

TEST_CASE("interpret is linear") {
    LatticeModel m = LatticeModel::with_size(64);
    State a = gaussian_state(0.2, 1.0, 0.3);
    State b = gaussian_state(-0.4, 1.4, -0.1);
    Complex ca(0.3, 0.7);
    Complex cb(-1.1, 0.2);
    LatticeVector lhs = interpret(add(scale(ca, a), scale(cb, b)), m);
    LatticeVector rhs = ca * interpret(a, m) + cb * interpret(b, m);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("discrete inner product basics") {
    LatticeModel m = LatticeModel::with_size(16);
    LatticeVector e = LatticeVector::Zero(m.n);
    e[3] = 1.0 / std::sqrt(m.spacing);
    CHECK(approx(discrete_inner(e, e, m), Complex(1.0), 1e-14));

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    LatticeVector u(m.n), v(m.n);
    for (int j = 0; j < m.n; ++j) {
        u[j] = Complex(unit(rng), unit(rng));
        v[j] = Complex(unit(rng), unit(rng));
    }
    CHECK(approx(discrete_inner(u, v, m),
                 std::conj(discrete_inner(v, u, m)), 1e-14));

    LatticeModel other = LatticeModel::with_size(8);
    CHECK_THROWS_AS(discrete_inner(u, v, other), DimensionMismatch);
}

TEST_CASE("offset gaussians match the symbolic overlap") {
    LatticeModel m = LatticeModel::with_size(1024);
    State a = gaussian_state(0.0, 1.0, 0.0);
    State b = gaussian_state(1.0, 1.0, 0.0);
    Complex discrete =
        discrete_inner(interpret(a, m), interpret(b, m), m);
    Amplitude symbolic = inner_product(a, b);
    REQUIRE(symbolic.is_finite());
    CHECK(approx(discrete, symbolic.value, 1e-6));
    CHECK(approx(symbolic.value, Complex(std::exp(-0.25)), 1e-12));
}

TEST_CASE("clock and shift commutation") {
    LatticeModel m = LatticeModel::with_size(32);
    double a = 2.0 * m.spacing;  // shift by two positions
    double b = 3.0 * m.spacing;  // three dual-grid steps
    LatticeOperator u = discrete_translation(m, a);
    LatticeOperator v = discrete_modulation(m, b);
    LatticeOperator uv = u * v;
    LatticeOperator vu = v * u;
    // UV = omega^{6} VU with omega = exp(2 pi i / N).
    Complex omega = std::exp(Complex(0.0, 2.0 * kPi / m.n));
    Complex expected = std::pow(omega, 6);
    CHECK((uv - expected * vu).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("discrete weyl operators are unitary") {
    LatticeModel m = LatticeModel::with_size(32);
    LatticeOperator w = discrete_weyl(m, 2.0 * m.spacing, 5.0 * m.spacing);
    LatticeOperator residue =
        w * w.adjoint() - LatticeOperator::Identity(m.n, m.n);
    CHECK(residue.cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(discrete_weyl(m, 0.4999 * m.spacing, 0.0),
                    IncommensurateParameter);
}

TEST_CASE("shift eigenvalues are the roots of unity") {
    LatticeModel m = LatticeModel::with_size(16);
    LatticeOperator u = discrete_translation(m, m.spacing);
    Eigen::ComplexEigenSolver<LatticeOperator> solver(u);
    REQUIRE(solver.info() == Eigen::Success);
    for (int k = 0; k < m.n; ++k) {
        Complex lambda = solver.eigenvalues()[k];
        CHECK(std::abs(std::pow(lambda, m.n) - Complex(1.0)) < 1e-10);
    }
}

TEST_CASE("translation eigenbasis maps onto momentum states") {
    for (int n : {8, 64}) {
        LatticeModel m = LatticeModel::with_size(n);
        SurjectionReport report = eig_surjection_check(m, m.spacing);
        CHECK(report.surjective);
        CHECK(report.max_defect < 1e-10);
        CHECK(static_cast<int>(report.rows.size()) == n);
        // The constant mode matches p = 0.
        bool found_zero = false;
        for (const auto& row : report.rows) {
            found_zero = found_zero || std::abs(row.momentum) < 1e-14;
        }
        CHECK(found_zero);
    }
}

TEST_CASE("spectral resolution of the position observable") {
    LatticeModel m = LatticeModel::with_size(16);
    LatticeOperator x = LatticeOperator::Zero(m.n, m.n);
    for (int j = 0; j < m.n; ++j) x(j, j) = m.point(j);
    CHECK(spectral_resolution_check(x) < 1e-10);
    CHECK(spectral_resolution_check(LatticeOperator::Identity(m.n, m.n)) <
          1e-12);
}

TEST_CASE("spectral resolution rejects non-hermitian input") {
    LatticeModel m = LatticeModel::with_size(4);
    LatticeOperator f = LatticeOperator::Zero(m.n, m.n);
    f(0, 1) = 1.0;
    CHECK_THROWS_AS(spectral_resolution_check(f), NotHermitian);
}

TEST_CASE("discrete evolution basics") {
    LatticeModel m = LatticeModel::with_size(256);
    HamiltonianSpec h = HamiltonianSpec::harmonic(1.0, 1.0);
    LatticeOperator k0 = discrete_evolve(m, h, 0.0);
    CHECK((k0 - LatticeOperator::Identity(m.n, m.n)).cwiseAbs().maxCoeff() <
          1e-12);
    LatticeOperator kt = discrete_evolve(m, h, 0.7);
    LatticeOperator residue =
        kt.adjoint() * kt - LatticeOperator::Identity(m.n, m.n);
    CHECK(residue.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("discrete harmonic evolution reproduces the ground state phase") {
    // Reference for the closed-form harmonic propagator: evolve the sampled
    // ground state with the matrix exponential and compare against
    // exp(-i t/2) times the same samples.
    LatticeModel m = LatticeModel::with_size(512);
    HamiltonianSpec h = HamiltonianSpec::harmonic(1.0, 1.0);
    double t = 0.5;
    LatticeVector g = interpret(gaussian_state(0.0, 1.0, 0.0), m);
    LatticeVector evolved = discrete_evolve(m, h, t) * g;
    LatticeVector expected = std::exp(Complex(0.0, -t / 2.0)) * g;
    CHECK((evolved - expected).cwiseAbs().maxCoeff() < 1e-4);
}

TEST_CASE("born distribution properties") {
    LatticeModel m = LatticeModel::with_size(256);
    HamiltonianSpec h = HamiltonianSpec::harmonic(1.0, 1.0);
    // Assemble the discrete Hamiltonian through a short evolution step is
    // indirect; use the position observable plus a random state instead.
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    LatticeVector psi(m.n);
    for (int j = 0; j < m.n; ++j) psi[j] = Complex(unit(rng), unit(rng));
    psi = normalized(psi, m);

    LatticeOperator x = LatticeOperator::Zero(m.n, m.n);
    for (int j = 0; j < m.n; ++j) x(j, j) = m.point(j);
    auto rows = born_distribution(x, psi, m);
    double total = 0.0;
    for (const auto& [eigenvalue, p] : rows) {
        (void)eigenvalue;
        CHECK(p >= -1e-15);
        CHECK(p <= 1.0 + 1e-12);
        total += p;
    }
    CHECK(std::abs(total - 1.0) < 1e-9);

    // An eigenvector concentrates the distribution.
    LatticeVector e = LatticeVector::Zero(m.n);
    e[10] = 1.0 / std::sqrt(m.spacing);
    auto concentrated = born_distribution(x, e, m);
    double best = 0.0;
    double at = 0.0;
    for (const auto& [eigenvalue, p] : concentrated) {
        if (p > best) {
            best = p;
            at = eigenvalue;
        }
    }
    CHECK(best == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(at == doctest::Approx(m.point(10)).epsilon(1e-12));

    (void)h;
    LatticeVector unnorm = 2.0 * psi;
    CHECK_THROWS_AS(born_distribution(x, unnorm, m), NotNormalized);
    CHECK_THROWS_AS(discrete_probability(e, unnorm, m), NotNormalized);
}

TEST_CASE("ground state dominates the harmonic born distribution") {
    LatticeModel m = LatticeModel::with_size(512);
    // Dense harmonic Hamiltonian assembled the same way discrete_evolve does.
    HamiltonianSpec h = HamiltonianSpec::harmonic(1.0, 1.0);
    // H = -log(K_t)/(i t) is unnecessary; recompute H directly through the
    // one-step trick exp(-iH*1) and compare distributions instead: use the
    // evolution eigenbasis by evolving the interpreted gaussian.
    LatticeVector g = interpret(gaussian_state(0.0, 1.0, 0.0), m);
    g = normalized(g, m);
    // The sampled ground state is an eigenvector of the discrete evolution;
    // its Born weight on itself is |<g|g>|^2 = 1 and the evolved overlap
    // keeps modulus 1.
    LatticeOperator kt = discrete_evolve(m, h, 0.9);
    Complex overlap = discrete_inner(g, LatticeVector(kt * g), m);
    CHECK(std::abs(std::abs(overlap) - 1.0) < 1e-6);
}

TEST_CASE("convergence report for gaussian pairs") {
    // Centers near the N=64 lattice edge make the truncation error visible
    // before it falls to the float noise floor.
    State a = gaussian_state(4.5, 1.4, 0.5);
    State b = gaussian_state(3.5, 1.6, -0.2);
    std::vector<int> sizes = {64, 256, 1024};
    auto rows = convergence_report(a, b, sizes);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0].abs_error > 1e-12);
    CHECK(rows[1].abs_error <= std::max(rows[0].abs_error, 1e-12));
    CHECK(rows[2].abs_error <= std::max(rows[1].abs_error, 1e-12));
    CHECK(rows[2].abs_error < 1e-6);
    for (const auto& r : rows) CHECK(r.resolved);
}

TEST_CASE("convergence report on identical normalized gaussians") {
    State g = gaussian_state(0.0, 1.0, 0.0);
    std::vector<int> sizes = {64, 256, 1024};
    auto rows = convergence_report(g, g, sizes);
    CHECK(std::abs(rows[2].discrete_value - Complex(1.0)) < 1e-6);
}

TEST_CASE("convergence report of the zero state is exact") {
    State z = zero_state(1);
    State g = gaussian_state(0.0, 1.0, 0.0);
    std::vector<int> sizes = {64, 256};
    for (const auto& row : convergence_report(z, g, sizes)) {
        CHECK(row.abs_error == 0.0);
    }
}

TEST_CASE("convergence report rejects generalized states") {
    State p = momentum_state(1.0);
    State g = gaussian_state(0.0, 1.0, 0.0);
    std::vector<int> sizes = {64};
    CHECK_THROWS_AS(convergence_report(p, g, sizes), NotNormalizable);
}

TEST_CASE("under-resolved widths are flagged") {
    State narrow = gaussian_state(0.0, 0.05, 0.0);
    std::vector<int> sizes = {64};
    auto rows = convergence_report(narrow, narrow, sizes);
    CHECK(!rows[0].resolved);
}

TEST_CASE("discrete weyl commutator phase approaches the continuum phase") {
    // exp(iab) for commensurate parameters; exact on the self-dual lattice.
    LatticeModel m = LatticeModel::with_size(1024);
    double a = 3.0 * m.spacing;
    double b = 5.0 * m.spacing;
    LatticeOperator u = discrete_translation(m, a);
    LatticeOperator v = discrete_modulation(m, b);
    LatticeOperator uv = u * v;
    LatticeOperator vu = v * u;
    Complex phase(0.0);
    double best = 0.0;
    for (int i = 0; i < m.n; ++i) {
        for (int j = 0; j < m.n; ++j) {
            if (std::abs(vu(i, j)) > best) {
                best = std::abs(vu(i, j));
                phase = uv(i, j) / vu(i, j);
            }
        }
    }
    CHECK(approx(phase, std::exp(Complex(0.0, a * b)), 1e-3));
}
