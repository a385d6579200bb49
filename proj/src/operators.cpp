#include "dcl/operators.hpp"

#include <cmath>
#include <numbers>

namespace dcl {

namespace {

constexpr Complex kI(0.0, 1.0);
const double kPi = std::numbers::pi;

}  // namespace

HamiltonianSpec HamiltonianSpec::free_particle(double mass) {
    if (!(mass > 0.0)) throw InvalidState("mass must be positive");
    HamiltonianSpec h;
    h.kind = Kind::Free;
    h.mass = mass;
    return h;
}

HamiltonianSpec HamiltonianSpec::harmonic(double mass, double omega) {
    if (!(mass > 0.0)) throw InvalidState("mass must be positive");
    if (!(omega > 0.0)) throw InvalidState("omega must be positive");
    HamiltonianSpec h;
    h.kind = Kind::Harmonic;
    h.mass = mass;
    h.omega = omega;
    return h;
}

OperatorSpec OperatorSpec::kernel(State alpha, int k) {
    if (alpha.arity != 2 * k) {
        throw ArityMismatch("kernel state must have arity 2k");
    }
    OperatorSpec op;
    op.kind = Kind::Kernel;
    op.kernel_alpha = std::move(alpha);
    op.kernel_rank = k;
    return op;
}

OperatorSpec OperatorSpec::translate(double a) {
    OperatorSpec op;
    op.kind = Kind::Translate;
    op.amount = a;
    return op;
}

OperatorSpec OperatorSpec::modulate(double b) {
    OperatorSpec op;
    op.kind = Kind::Modulate;
    op.amount = b;
    return op;
}

OperatorSpec OperatorSpec::differentiate(int var) {
    OperatorSpec op;
    op.kind = Kind::Differentiate;
    op.var = var;
    return op;
}

OperatorSpec OperatorSpec::multiply_var(int var) {
    OperatorSpec op;
    op.kind = Kind::MultiplyVar;
    op.var = var;
    return op;
}

OperatorSpec OperatorSpec::evolve_op(HamiltonianSpec h, double t) {
    OperatorSpec op;
    op.kind = Kind::Evolve;
    op.hamiltonian = h;
    op.time = t;
    return op;
}

OperatorSpec OperatorSpec::compose(std::vector<OperatorSpec> factors) {
    if (factors.empty()) throw InvalidState("compose needs at least one factor");
    OperatorSpec op;
    op.kind = Kind::Compose;
    op.factors = std::move(factors);
    return op;
}

OperatorSpec OperatorSpec::sum(
    std::vector<std::pair<Complex, OperatorSpec>> summands) {
    OperatorSpec op;
    op.kind = Kind::Sum;
    op.summands = std::move(summands);
    return op;
}

State momentum_state(double p) {
    GaussTerm t = GaussTerm::unit(1);
    t.coeff = Complex(1.0 / std::sqrt(2.0 * kPi));
    t.exponent.b[0] = Complex(p);
    return make_state(1, {std::move(t)});
}

State position_state(double x0) {
    GaussTerm t = GaussTerm::unit(1);
    DeltaFactor d;
    d.form.set(0, Complex(1.0));
    d.form.constant = Complex(-x0);
    t.deltas.push_back(std::move(d));
    return make_state(1, {std::move(t)});
}

State gaussian_state(double center, double width, double momentum) {
    if (!(width > 0.0)) {
        throw NonpositiveWidth("gaussian width must be positive");
    }
    GaussTerm t = GaussTerm::unit(1);
    t.coeff = Complex(std::pow(kPi, -0.25) / std::sqrt(width));
    double w2 = width * width;
    // -(x-c)^2/(2 w^2) + i p x written as exp(i F)
    t.exponent.set(0, 0, kI / (2.0 * w2));
    t.exponent.b[0] = Complex(momentum) - kI * center / w2;
    t.exponent.c = kI * center * center / (2.0 * w2);
    return make_state(1, {std::move(t)});
}

namespace {

State apply_translate(const State& s, double a) {
    if (s.arity < 1) throw UnsupportedArity("translate needs arity >= 1");
    int n = s.arity;
    std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> v(n, 0.0);
    for (int i = 0; i < n; ++i) m[static_cast<size_t>(i) * n + i] = 1.0;
    v[0] = a;
    return substitute_affine(s, m, v);
}

State apply_modulate(const State& s, double b) {
    if (s.arity < 1) throw UnsupportedArity("modulate needs arity >= 1");
    std::vector<GaussTerm> terms = s.terms;
    for (auto& t : terms) t.exponent.b[0] += Complex(b);
    return make_state(s.arity, std::move(terms));
}

State apply_differentiate(const State& s, int var, const EvalConfig& cfg) {
    if (var < 0 || var >= s.arity) {
        throw UnsupportedArity("differentiate: variable out of range");
    }
    std::vector<GaussTerm> terms;
    for (const auto& t : s.terms) {
        if (!t.deltas.empty()) {
            throw DeltaDerivativeUnsupported(
                "derivative of a delta-bearing state");
        }
        // d/dx [P e^{iF}] = (dP/dx + i P dF/dx) e^{iF}
        GaussTerm dpoly = t;
        PolyPrefactor dp;
        for (const auto& [mi, c] : t.poly.monomials) {
            if (mi[var] == 0) continue;
            MultiIndex down = mi;
            down[var] -= 1;
            auto [it, inserted] = dp.monomials.emplace(down, c * double(mi[var]));
            if (!inserted) it->second += c * double(mi[var]);
        }
        dpoly.poly = std::move(dp);
        if (!dpoly.poly.is_zero()) terms.push_back(std::move(dpoly));

        LinearForm df;  // dF/dx = 2 A[var].x + b[var]
        df.constant = t.exponent.b[var];
        for (int j = 0; j < s.arity; ++j) {
            Complex c = 2.0 * t.exponent.at(var, j);
            if (c != Complex(0.0)) df.set(j, c);
        }
        GaussTerm phase = t;
        phase.coeff *= kI;
        phase.poly = t.poly.times(PolyPrefactor::from_linear(df, s.arity),
                                  cfg.max_degree);
        if (!phase.poly.is_zero()) terms.push_back(std::move(phase));
    }
    return make_state(s.arity, std::move(terms), cfg.eq_tol);
}

State apply_multiply_var(const State& s, int var, const EvalConfig& cfg) {
    if (var < 0 || var >= s.arity) {
        throw UnsupportedArity("multiply_var: variable out of range");
    }
    LinearForm x;
    x.set(var, Complex(1.0));
    std::vector<GaussTerm> terms = s.terms;
    for (auto& t : terms) {
        t.poly = t.poly.times(PolyPrefactor::from_linear(x, s.arity), cfg.max_degree);
    }
    return make_state(s.arity, std::move(terms), cfg.eq_tol);
}

State apply_kernel(const State& alpha, int k, const State& s,
                   const EvalConfig& cfg) {
    if (s.arity < k) {
        throw ArityMismatch("kernel rank exceeds state arity");
    }
    int m = s.arity;
    int big = m + k;  // [y_0..y_{k-1} | out_0..out_{k-1} | z_2 block]
    std::vector<int> alpha_map(2 * k);
    for (int i = 0; i < 2 * k; ++i) alpha_map[i] = i;
    std::vector<int> s_map(m);
    for (int i = 0; i < k; ++i) s_map[i] = i;
    for (int i = k; i < m; ++i) s_map[i] = i + k;
    State lifted = multiply_pointwise(embed(alpha, big, alpha_map),
                                      embed(s, big, s_map), cfg);
    for (int i = 0; i < k; ++i) {
        lifted = integrate_var(lifted, 0, cfg);
    }
    return lifted;
}

// Closed-form propagator states on (y, x) = (vars 0, 1).
State free_kernel(double mass, double t, const EvalConfig& cfg) {
    GaussTerm kt = GaussTerm::unit(2);
    double ht = cfg.hbar * t;
    kt.coeff = std::sqrt(Complex(0.0, -mass / (2.0 * kPi * ht)));
    Complex q = Complex(mass / (2.0 * ht));
    kt.exponent.set(0, 0, q);
    kt.exponent.set(1, 1, q);
    kt.exponent.set(0, 1, -q);
    return make_state(2, {std::move(kt)});
}

State harmonic_kernel(double mass, double omega, double t, const EvalConfig& cfg) {
    double wt = omega * t;
    double sine = std::sin(wt);
    GaussTerm kt = GaussTerm::unit(2);
    double modulus = std::sqrt(mass * omega / (2.0 * kPi * cfg.hbar * std::abs(sine)));
    // Branch continued from t = 0+: each caustic crossing adds exp(-i pi/2).
    double crossings = std::floor(wt / kPi);
    kt.coeff = modulus * std::exp(-kI * kPi * (0.25 + 0.5 * crossings));
    Complex q = Complex(mass * omega / (2.0 * cfg.hbar * sine));
    kt.exponent.set(0, 0, q * std::cos(wt));
    kt.exponent.set(1, 1, q * std::cos(wt));
    kt.exponent.set(0, 1, -q);
    return make_state(2, {std::move(kt)});
}

State parity_caustic(const State& s, long k) {
    // omega t = k pi: psi -> exp(-i k pi / 2) psi((-1)^k x)
    State out = s;
    if (k % 2 != 0) {
        std::vector<double> m{-1.0};
        std::vector<double> v{0.0};
        out = substitute_affine(out, m, v);
    }
    long phase = ((k % 4) + 4) % 4;
    static const Complex quarter[4] = {Complex(1.0), Complex(0.0, -1.0),
                                       Complex(-1.0), Complex(0.0, 1.0)};
    return scale(quarter[phase], out);
}

}  // namespace

State evolve(const HamiltonianSpec& h, double t, const State& s,
             const EvalConfig& cfg) {
    if (s.arity != 1) {
        throw UnsupportedArity("evolution is implemented for arity-1 states");
    }
    if (t == 0.0) return s;
    if (h.kind == HamiltonianSpec::Kind::Free) {
        return apply_kernel(free_kernel(h.mass, t, cfg), 1, s, cfg);
    }
    double wt = h.omega * t;
    double nearest = std::round(wt / kPi);
    if (std::abs(wt - nearest * kPi) <= 1e-12 * std::max(1.0, std::abs(wt))) {
        return parity_caustic(s, static_cast<long>(nearest));
    }
    return apply_kernel(harmonic_kernel(h.mass, h.omega, t, cfg), 1, s, cfg);
}

State apply(const OperatorSpec& op, const State& s, const EvalConfig& cfg) {
    switch (op.kind) {
        case OperatorSpec::Kind::Translate:
            return apply_translate(s, op.amount);
        case OperatorSpec::Kind::Modulate:
            return apply_modulate(s, op.amount);
        case OperatorSpec::Kind::Differentiate:
            return apply_differentiate(s, op.var, cfg);
        case OperatorSpec::Kind::MultiplyVar:
            return apply_multiply_var(s, op.var, cfg);
        case OperatorSpec::Kind::Kernel:
            return apply_kernel(op.kernel_alpha, op.kernel_rank, s, cfg);
        case OperatorSpec::Kind::Evolve:
            return evolve(op.hamiltonian, op.time, s, cfg);
        case OperatorSpec::Kind::Compose: {
            State cur = s;
            for (auto it = op.factors.rbegin(); it != op.factors.rend(); ++it) {
                cur = apply(*it, cur, cfg);
            }
            return cur;
        }
        case OperatorSpec::Kind::Sum: {
            State acc = zero_state(s.arity);
            for (const auto& [c, child] : op.summands) {
                acc = add(acc, scale(c, apply(child, s, cfg)));
            }
            return acc;
        }
    }
    throw InvalidState("unknown operator kind");
}

Complex weyl_commutator_phase(double a, double b, const EvalConfig& cfg) {
    State probe = gaussian_state(0.0, 1.0, 0.0);
    // exp(iaP) = translate by a*hbar under P = -i hbar d/dx.
    OperatorSpec shift = OperatorSpec::translate(a * cfg.hbar);
    OperatorSpec mod = OperatorSpec::modulate(b);
    State pq = apply(OperatorSpec::compose({shift, mod}), probe, cfg);
    State qp = apply(OperatorSpec::compose({mod, shift}), probe, cfg);
    if (pq.terms.size() != 1 || qp.terms.size() != 1) {
        throw InvalidState("weyl probe did not stay a single term");
    }
    return pq.terms.front().coeff / qp.terms.front().coeff;
}

double probability(const State& f, const State& psi, const EvalConfig& cfg) {
    Amplitude amp = inner_product(f, psi, cfg);
    if (!amp.is_finite()) {
        throw NotFinite("probability of a delta-normalized overlap");
    }
    double p = std::norm(amp.value);
    if (p > 1.0 + std::max(cfg.eq_tol, 1e-9)) {
        throw NotNormalized("overlap exceeds 1; arguments are not normalized");
    }
    return std::min(p, 1.0);
}

}  // namespace dcl
