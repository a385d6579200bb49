#include "dcl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace dcl {

namespace {

constexpr double kPanelTol = 1e-12;      // local Simpson error control
constexpr double kIncrementTol = 1e-10;  // schedule convergence threshold
constexpr double kEnvelopeCut = 1e-17;   // negligible-integrand threshold
constexpr long kEvalBudget = 8'000'000;  // resource guard per integral

struct Integrand1D {
    const State* s;
    double eps;
    long evals = 0;

    Complex operator()(double x) {
        ++evals;
        double xs[1] = {x};
        Complex v = evaluate_state(*s, std::span<const double>(xs, 1));
        if (eps > 0.0) v *= std::exp(-eps * x * x);
        return v;
    }

    // Upper bound on |integrand| at x (sum of term envelopes).
    double envelope(double x) const {
        double xs[1] = {x};
        double total = 0.0;
        for (const auto& t : s->terms) {
            double damp = -t.exponent.evaluate(std::span<const double>(xs, 1)).imag();
            if (eps > 0.0) damp -= eps * x * x;
            double p = std::abs(t.poly.evaluate(std::span<const double>(xs, 1)));
            total += std::abs(t.coeff) * p * std::exp(std::min(damp, 700.0));
        }
        return total;
    }

    // Largest local phase derivative |F'(x)| over the terms.
    double phase_rate(double x) const {
        double rate = 0.0;
        for (const auto& t : s->terms) {
            Complex d = 2.0 * t.exponent.at(0, 0) * x + t.exponent.b[0];
            rate = std::max(rate, std::abs(d.real()));
        }
        return rate;
    }
};

Complex simpson(Complex fa, Complex fm, Complex fb, double h) {
    return (fa + 4.0 * fm + fb) * (h / 6.0);
}

template <typename F>
Complex adaptive_simpson(F& f, double a, double b, Complex fa, Complex fm,
                         Complex fb, Complex whole, double tol, int depth) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    Complex flm = f(lm);
    Complex frm = f(rm);
    Complex left = simpson(fa, flm, fm, m - a);
    Complex right = simpson(fm, frm, fb, b - m);
    Complex delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1);
}

// Integral over [a, b] split into oscillation-aware panels.
Complex integrate_strip(Integrand1D& f, double a, double b) {
    Complex acc(0.0);
    double x = a;
    while (x < b) {
        if (f.evals > kEvalBudget) {
            throw NoConvergence("quadrature evaluation budget exhausted");
        }
        double rate = std::max(f.phase_rate(x), f.phase_rate(std::min(x + 1.0, b)));
        double width = rate > 1e-9 ? std::numbers::pi / (4.0 * rate / (2.0 * std::numbers::pi))
                                   : 1.0;
        width = std::clamp(width, 1e-8, 1.0);
        double hi = std::min(x + width, b);
        double mid = 0.5 * (x + hi);
        if (f.envelope(x) < kEnvelopeCut && f.envelope(mid) < kEnvelopeCut &&
            f.envelope(hi) < kEnvelopeCut) {
            x = hi;
            continue;
        }
        Complex fa = f(x);
        Complex fm = f(mid);
        Complex fb = f(hi);
        Complex whole = simpson(fa, fm, fb, hi - x);
        acc += adaptive_simpson(f, x, hi, fa, fm, fb, whole, kPanelTol, 24);
        x = hi;
    }
    return acc;
}

}  // namespace

QuadratureResult numeric_integrate(const State& s, const EvalConfig& cfg,
                                   double eps) {
    if (s.arity != 1) {
        throw UnsupportedArity("numeric_integrate expects an arity-1 state");
    }
    for (const auto& t : s.terms) {
        if (!t.deltas.empty()) {
            throw UnsupportedOperation("numeric_integrate on a delta-bearing state");
        }
    }
    if (s.is_zero()) return {Complex(0.0), 0.0, {}};

    Integrand1D f{&s, eps};
    QuadratureResult out;
    double prev_edge = 0.0;
    Complex acc(0.0);
    double increment = std::numeric_limits<double>::infinity();
    for (double w : cfg.interval_schedule) {
        Complex left = integrate_strip(f, -w, -prev_edge);
        Complex right = integrate_strip(f, prev_edge, w);
        Complex strip = left + right;
        acc += strip;
        increment = std::abs(strip);
        out.increments.push_back(increment);
        prev_edge = w;
        if (increment < kIncrementTol) {
            out.value = acc;
            out.error_estimate = increment;
            return out;
        }
    }
    throw NoConvergence("interval schedule exhausted with increment " +
                        std::to_string(increment));
}

QuadratureResult numeric_integrate_2d(const State& s, const EvalConfig& cfg,
                                      double eps) {
    if (s.arity != 2) {
        throw UnsupportedArity("numeric_integrate_2d expects an arity-2 state");
    }
    for (const auto& t : s.terms) {
        if (!t.deltas.empty()) {
            throw UnsupportedOperation("numeric_integrate_2d on a delta-bearing state");
        }
    }
    if (s.is_zero()) return {Complex(0.0), 0.0, {}};

    // Outer quadrature over variable 0; every sample pins the variable and
    // integrates the remaining arity-1 slice.
    struct Outer {
        const State* s;
        const EvalConfig* cfg;
        double eps;
        long evals = 0;
        double last_inner_error = 0.0;

        Complex operator()(double x) {
            ++evals;
            std::vector<GaussTerm> terms;
            for (const auto& t : s->terms) {
                GaussTerm slice = GaussTerm::unit(1);
                slice.coeff = t.coeff;
                Complex a00 = t.exponent.at(0, 0);
                slice.exponent.set(0, 0, t.exponent.at(1, 1));
                slice.exponent.b[0] = t.exponent.b[1] + 2.0 * t.exponent.at(0, 1) * x;
                slice.exponent.c = t.exponent.c + a00 * x * x + t.exponent.b[0] * x +
                                   (eps > 0.0 ? Complex(0.0, eps * x * x) : Complex(0.0));
                PolyPrefactor poly;
                for (const auto& [mi, c] : t.poly.monomials) {
                    double xr = 1.0;
                    for (int k = 0; k < mi[0]; ++k) xr *= x;
                    MultiIndex rest{mi[1]};
                    auto [it, inserted] = poly.monomials.emplace(rest, c * xr);
                    if (!inserted) it->second += c * xr;
                }
                slice.poly = std::move(poly);
                terms.push_back(std::move(slice));
            }
            State inner = make_state(1, std::move(terms));
            if (inner.is_zero()) return Complex(0.0);
            QuadratureResult r = numeric_integrate(inner, *cfg, eps);
            last_inner_error = std::max(last_inner_error, r.error_estimate);
            return r.value;
        }
    };

    Outer outer{&s, &cfg, eps};
    // Reuse the 1-D driver by wrapping the outer integrand.
    QuadratureResult out;
    double prev_edge = 0.0;
    Complex acc(0.0);
    for (double w : cfg.interval_schedule) {
        auto strip = [&](double a, double b) {
            Complex sacc(0.0);
            double x = a;
            while (x < b) {
                double hi = std::min(x + 0.25, b);
                Complex fa = outer(x);
                Complex fm = outer(0.5 * (x + hi));
                Complex fb = outer(hi);
                Complex whole = simpson(fa, fm, fb, hi - x);
                sacc += adaptive_simpson(outer, x, hi, fa, fm, fb, whole, 1e-10, 16);
                x = hi;
            }
            return sacc;
        };
        Complex inc = strip(-w, -prev_edge) + strip(prev_edge, w);
        acc += inc;
        prev_edge = w;
        if (std::abs(inc) < 1e-9) {
            out.value = acc;
            out.error_estimate = std::abs(inc) + outer.last_inner_error;
            return out;
        }
        if (outer.evals > 200'000) {
            throw NoConvergence("2-D quadrature evaluation budget exhausted");
        }
    }
    throw NoConvergence("2-D interval schedule exhausted");
}

Complex eps_extrapolate(const std::vector<std::pair<double, Complex>>& values) {
    if (values.size() < 3) {
        throw InsufficientPoints("eps extrapolation needs at least three samples");
    }
    for (size_t i = 0; i + 1 < values.size(); ++i) {
        if (!(values[i].first > values[i + 1].first)) {
            throw InsufficientPoints("eps samples must be strictly decreasing");
        }
    }
    // Neville's scheme evaluated at eps = 0.
    std::vector<Complex> p;
    p.reserve(values.size());
    for (const auto& [e, v] : values) {
        (void)e;
        p.push_back(v);
    }
    size_t n = p.size();
    for (size_t level = 1; level < n; ++level) {
        for (size_t i = 0; i + level < n; ++i) {
            double xi = values[i].first;
            double xj = values[i + level].first;
            p[i] = (Complex(-xj) * p[i] + Complex(xi) * p[i + 1]) / Complex(xi - xj);
        }
    }
    return p[0];
}

ComparisonReport compare_amplitude(const Amplitude& symbolic, Complex numeric,
                                   double tol) {
    if (!symbolic.is_finite()) {
        throw IncomparableDelta(
            "delta-normalized amplitudes have no numeric counterpart");
    }
    ComparisonReport r;
    r.abs_deviation = std::abs(symbolic.value - numeric);
    double scale = std::max(std::abs(symbolic.value), std::abs(numeric));
    r.rel_deviation = scale > 0.0 ? r.abs_deviation / scale : 0.0;
    r.pass = r.abs_deviation <= tol || r.rel_deviation <= tol;
    return r;
}

}  // namespace dcl
