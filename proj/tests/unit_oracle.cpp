#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dcl/operators.hpp"
#include "dcl/oracle.hpp"
#include "dcl/quantifier.hpp"
#include "test_util.hpp"

using namespace dcl;
using dcl::testing::approx;
using dcl::testing::approx_rel;

namespace {

const double kPi = std::numbers::pi;

State quadratic_phase(Complex alpha, Complex beta = Complex(0.0)) {
    GaussTerm t = GaussTerm::unit(1);
    t.exponent.set(0, 0, alpha);
    t.exponent.b[0] = beta;
    return make_state(1, {std::move(t)});
}

}  // namespace

TEST_CASE("gaussian quadrature reaches 1e-8") {
    QuadratureResult r = numeric_integrate(quadratic_phase(Complex(0.0, 1.0)),
                                           EvalConfig());
    CHECK(approx(r.value, Complex(std::sqrt(kPi)), 1e-8));
    CHECK(r.error_estimate < 1e-9);
}

TEST_CASE("fresnel integral through the eps sweep") {
    EvalConfig cfg;
    State s = quadratic_phase(Complex(1.0, 0.0));
    std::vector<std::pair<double, Complex>> samples;
    for (double eps : {1e-2, 3e-3, 1e-3}) {
        samples.emplace_back(eps, numeric_integrate(s, cfg, eps).value);
    }
    Complex extrapolated = eps_extrapolate(samples);
    // sqrt(pi) exp(i pi/4)
    CHECK(approx(extrapolated,
                 Complex(1.2533141373155003, 1.2533141373155003), 1e-3));
}

TEST_CASE("constant integrand does not converge undamped") {
    State constant = make_state(1, {GaussTerm::unit(1)});
    CHECK_THROWS_AS(numeric_integrate(constant, EvalConfig(), 0.0),
                    NoConvergence);
}

TEST_CASE("pure fresnel does not converge undamped") {
    CHECK_THROWS_AS(
        numeric_integrate(quadratic_phase(Complex(0.7, 0.0)), EvalConfig(), 0.0),
        NoConvergence);
}

TEST_CASE("delta integrands are rejected") {
    State d = position_state(0.0);
    CHECK_THROWS_AS(numeric_integrate(d, EvalConfig()), UnsupportedOperation);
}

TEST_CASE("eps extrapolation recovers linear data exactly") {
    std::vector<std::pair<double, Complex>> samples = {
        {1e-1, Complex(2.0 + 3.0 * 1e-1, -1.0)},
        {1e-2, Complex(2.0 + 3.0 * 1e-2, -1.0)},
        {1e-3, Complex(2.0 + 3.0 * 1e-3, -1.0)},
    };
    CHECK(approx(eps_extrapolate(samples), Complex(2.0, -1.0), 1e-12));
}

TEST_CASE("eps extrapolation of a constant sequence") {
    std::vector<std::pair<double, Complex>> samples = {
        {1e-1, Complex(0.5, 0.25)},
        {1e-2, Complex(0.5, 0.25)},
        {1e-3, Complex(0.5, 0.25)},
    };
    CHECK(approx(eps_extrapolate(samples), Complex(0.5, 0.25), 1e-14));
}

TEST_CASE("eps extrapolation input validation") {
    std::vector<std::pair<double, Complex>> two = {{1e-1, Complex(1.0)},
                                                   {1e-2, Complex(1.0)}};
    CHECK_THROWS_AS(eps_extrapolate(two), InsufficientPoints);
    std::vector<std::pair<double, Complex>> unordered = {
        {1e-2, Complex(1.0)}, {1e-1, Complex(1.0)}, {1e-3, Complex(1.0)}};
    CHECK_THROWS_AS(eps_extrapolate(unordered), InsufficientPoints);
}

TEST_CASE("comparison report") {
    ComparisonReport ok =
        compare_amplitude(Amplitude::finite(Complex(1.0)), Complex(1.0 + 1e-9),
                          1e-6);
    CHECK(ok.pass);
    ComparisonReport bad =
        compare_amplitude(Amplitude::finite(Complex(0.0)), Complex(1e-3), 1e-6);
    CHECK(!bad.pass);
    CHECK(approx(Complex(bad.abs_deviation), Complex(1e-3), 1e-12));
    CHECK_THROWS_AS(
        compare_amplitude(Amplitude::delta_normalized(Complex(1.0)),
                          Complex(1.0), 1e-6),
        IncomparableDelta);
}

TEST_CASE("truncation increments shrink once the support is covered") {
    // Off-center Gaussian: the peak sits in the second strip, after which
    // the increments must fall monotonically.
    State g = gaussian_state(3.0, 1.0, 0.5);
    EvalConfig cfg;
    State integrand = multiply_pointwise(conjugate(g), g, cfg);
    QuadratureResult r = numeric_integrate(integrand, cfg);
    REQUIRE(r.increments.size() >= 3);
    size_t peak = 0;
    for (size_t i = 1; i < r.increments.size(); ++i) {
        if (r.increments[i] > r.increments[peak]) peak = i;
    }
    for (size_t i = peak + 1; i < r.increments.size(); ++i) {
        CHECK(r.increments[i] < r.increments[i - 1]);
    }
    CHECK(approx(r.value, Complex(1.0), 1e-9));
}

TEST_CASE("oracle matches closed forms for shifted complex gaussians") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    EvalConfig cfg;
    for (int i = 0; i < 25; ++i) {
        Complex alpha(unit(rng), 0.4 + 0.8 * std::abs(unit(rng)));
        Complex beta(unit(rng), 0.4 * unit(rng));
        State s = quadratic_phase(alpha, beta);
        Complex symbolic = evaluate_state(integrate_var(s, 0), {});
        Complex numeric = numeric_integrate(s, cfg).value;
        CHECK(approx_rel(symbolic, numeric, 1e-7));
    }
}
