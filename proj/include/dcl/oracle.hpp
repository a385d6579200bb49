#pragma once

#include <utility>
#include <vector>

#include "dcl/algebra.hpp"

namespace dcl {

struct QuadratureResult {
    Complex value{0.0, 0.0};
    double error_estimate = 0.0;
    std::vector<double> increments;  // per interval-schedule step
};

// Numerical integral of a delta-free arity-1 state over the real line,
// evaluated as a limit over the interval schedule. eps > 0 damps the
// integrand by exp(-eps x^2); oscillation-aware adaptive panels keep
// high-frequency quadratic phases resolved.
QuadratureResult numeric_integrate(const State& s, const EvalConfig& cfg,
                                   double eps = 0.0);

// Iterated 1-D quadrature for arity-2 states (outer variable 0).
QuadratureResult numeric_integrate_2d(const State& s, const EvalConfig& cfg,
                                      double eps = 0.0);

// Polynomial extrapolation of (eps, value) samples to eps = 0. The eps values
// must be strictly decreasing and at least three.
Complex eps_extrapolate(const std::vector<std::pair<double, Complex>>& values);

struct ComparisonReport {
    bool pass = false;
    double abs_deviation = 0.0;
    double rel_deviation = 0.0;
};

// Pass when either the absolute or the relative deviation is within tol.
ComparisonReport compare_amplitude(const Amplitude& symbolic, Complex numeric,
                                   double tol);

}  // namespace dcl
