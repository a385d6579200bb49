#include "dcl/quantifier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>

namespace dcl {

namespace {

constexpr Complex kI(0.0, 1.0);

enum class Policy { Throw, Kronecker };

struct StepResult {
    std::optional<GaussTerm> term;  // empty when the contribution vanishes
    int kronecker_events = 0;
};

// Extracts the z-decomposition of a term exponent with z = x_var:
// F = alpha z^2 + B(x_rest) z + C(x_rest), already renumbered to arity-1.
struct VarSplit {
    Complex alpha;
    LinearForm b_form;      // over remaining variables
    QuadExponent rest;      // over remaining variables
};

VarSplit split_exponent(const QuadExponent& q, int var) {
    int n = q.arity;
    VarSplit out;
    out.alpha = q.at(var, var);
    out.b_form.constant = q.b[var];
    out.rest = QuadExponent(n - 1);
    auto idx = [var](int i) { return i > var ? i - 1 : i; };
    for (int i = 0; i < n; ++i) {
        if (i == var) continue;
        out.b_form.set(idx(i), 2.0 * q.at(var, i));
        out.rest.b[idx(i)] = q.b[i];
        for (int j = i; j < n; ++j) {
            if (j == var) continue;
            out.rest.set(idx(i), idx(j), q.at(i, j));
        }
    }
    out.rest.c = q.c;
    return out;
}

// Substitutes x_var := lf (a form over the other variables) into the term and
// renumbers. Used by the delta elimination route.
GaussTerm substitute_var(const GaussTerm& t, int var, const LinearForm& lf,
                         const EvalConfig& cfg) {
    int n = t.arity;
    GaussTerm out = GaussTerm::unit(n - 1);
    out.coeff = t.coeff;

    // exponent
    VarSplit sp = split_exponent(t.exponent, var);
    QuadExponent q = sp.rest;
    // alpha * lf^2; the symmetric store carries half of each cross monomial.
    for (const auto& [i, ci] : lf.coeffs) {
        for (const auto& [j, cj] : lf.coeffs) {
            if (j < i) continue;
            q.add_at(i, j, sp.alpha * ci * cj);
        }
    }
    for (const auto& [i, ci] : lf.coeffs) {
        q.b[i] += 2.0 * sp.alpha * ci * lf.constant;
    }
    q.c += sp.alpha * lf.constant * lf.constant;
    // B * lf
    for (const auto& [i, ci] : sp.b_form.coeffs) {
        for (const auto& [j, cj] : lf.coeffs) {
            if (i == j) {
                q.add_at(i, j, ci * cj);
            } else if (i < j) {
                q.add_at(i, j, ci * cj / 2.0);
            } else {
                q.add_at(j, i, ci * cj / 2.0);
            }
        }
        q.b[i] += ci * lf.constant;
    }
    for (const auto& [j, cj] : lf.coeffs) {
        q.b[j] += sp.b_form.constant * cj;
    }
    q.c += sp.b_form.constant * lf.constant;
    out.exponent = std::move(q);

    // poly: group by the degree in var, expand lf^d.
    PolyPrefactor poly;
    for (const auto& [mi, c] : t.poly.monomials) {
        MultiIndex rest(n - 1, 0);
        for (int i = 0; i < n; ++i) {
            if (i == var) continue;
            rest[i > var ? i - 1 : i] = mi[i];
        }
        PolyPrefactor mono;
        mono.monomials[rest] = c;
        if (mi[var] > 0) {
            mono = mono.times(poly_pow_linear(lf, mi[var], n - 1, cfg.max_degree),
                              cfg.max_degree);
        }
        poly = poly.plus(mono);
    }
    out.poly = std::move(poly);

    // other deltas
    for (const auto& d : t.deltas) {
        Complex cv = d.form.coeff(var);
        LinearForm nf;
        nf.constant = d.form.constant;
        for (const auto& [v, c] : d.form.coeffs) {
            if (v == var) continue;
            nf.set(v > var ? v - 1 : v, c);
        }
        if (cv != Complex(0.0)) nf = nf.plus(lf.scaled(cv));
        out.deltas.push_back(DeltaFactor{std::move(nf)});
    }
    return out;
}

StepResult integrate_term_once(const GaussTerm& t, int var, const EvalConfig& cfg,
                               Policy policy) {
    const double tol = cfg.eq_tol;
    StepResult res;

    // (a) a delta factor carries the variable: solve and substitute.
    for (size_t d = 0; d < t.deltas.size(); ++d) {
        Complex cv = t.deltas[d].form.coeff(var);
        if (std::abs(cv) <= tol) continue;
        double cr = cv.real();  // delta variable coefficients are real
        LinearForm solved;
        solved.constant = -t.deltas[d].form.constant / cr;
        for (const auto& [v, c] : t.deltas[d].form.coeffs) {
            if (v == var) continue;
            solved.set(v > var ? v - 1 : v, -c / cr);
        }
        GaussTerm reduced = t;
        reduced.deltas.erase(reduced.deltas.begin() + static_cast<long>(d));
        GaussTerm out = substitute_var(reduced, var, solved, cfg);
        out.coeff /= std::abs(cr);
        res.term = std::move(out);
        return res;
    }

    VarSplit sp = split_exponent(t.exponent, var);
    double im_alpha = sp.alpha.imag();
    double re_alpha = sp.alpha.real();
    bool gaussian = im_alpha > tol;
    bool fresnel = !gaussian && std::abs(im_alpha) <= tol && std::abs(re_alpha) > tol;

    if (gaussian || fresnel) {
        // (b) complete the square: s = -i*alpha, mu = -B/(2 alpha).
        Complex s_param = fresnel ? Complex(std::max(im_alpha, 0.0), -re_alpha)
                                  : -kI * sp.alpha;
        Complex inv4a = 1.0 / (4.0 * sp.alpha);

        GaussTerm out = GaussTerm::unit(t.arity - 1);
        out.coeff = t.coeff * std::sqrt(std::numbers::pi / s_param);

        QuadExponent q = sp.rest;
        for (const auto& [i, ci] : sp.b_form.coeffs) {
            for (const auto& [j, cj] : sp.b_form.coeffs) {
                if (j < i) continue;
                q.add_at(i, j, -ci * cj * inv4a);
            }
        }
        for (const auto& [i, ci] : sp.b_form.coeffs) {
            q.b[i] += -2.0 * ci * sp.b_form.constant * inv4a;
        }
        q.c += -sp.b_form.constant * sp.b_form.constant * inv4a;
        out.exponent = std::move(q);

        // Moments: integral of w^j e^{-s w^2} = (j-1)!!/(2s)^(j/2) * sqrt(pi/s)
        // for even j, zero for odd j; z^d expands around mu = -B/(2 alpha).
        LinearForm mu = sp.b_form.scaled(-0.5 / sp.alpha);
        PolyPrefactor poly;
        for (const auto& [mi, c] : t.poly.monomials) {
            MultiIndex rest(t.arity - 1, 0);
            for (int i = 0; i < t.arity; ++i) {
                if (i == var) continue;
                rest[i > var ? i - 1 : i] = mi[i];
            }
            int d = mi[var];
            PolyPrefactor base;
            base.monomials[rest] = c;
            for (int j = 0; j <= d; j += 2) {
                // C(d, j) * (j-1)!!
                double factor = 1.0;
                for (int k = 0; k < j; ++k) factor *= double(d - k);
                for (int k = j; k >= 2; k -= 2) factor /= double(k);
                Complex moment = factor;
                for (int k = 0; k < j / 2; ++k) moment /= (2.0 * s_param);
                PolyPrefactor contrib =
                    base.scaled(moment).times(poly_pow_linear(mu, d - j, t.arity - 1,
                                                              cfg.max_degree),
                                              cfg.max_degree);
                poly = poly.plus(contrib);
            }
        }
        out.poly = std::move(poly);

        for (const auto& d : t.deltas) {
            out.deltas.push_back(DeltaFactor{d.form.drop_var(var)});
        }
        res.term = std::move(out);
        return res;
    }

    // alpha ~ 0 from here on.
    if (t.poly.degree_in(var) > 0) {
        throw DeltaDerivativeUnsupported(
            "polynomial prefactor on a linearly-integrated variable");
    }

    bool b_has_vars = !sp.b_form.vars_empty(tol);
    if (b_has_vars) {
        // (c) emit 2*pi * delta(B form).
        GaussTerm out = GaussTerm::unit(t.arity - 1);
        out.coeff = t.coeff * 2.0 * std::numbers::pi;
        out.exponent = sp.rest;
        PolyPrefactor poly;
        for (const auto& [mi, c] : t.poly.monomials) {
            MultiIndex rest(t.arity - 1, 0);
            for (int i = 0; i < t.arity; ++i) {
                if (i == var) continue;
                rest[i > var ? i - 1 : i] = mi[i];
            }
            poly.monomials[rest] = c;
        }
        out.poly = std::move(poly);
        for (const auto& d : t.deltas) {
            out.deltas.push_back(DeltaFactor{d.form.drop_var(var)});
        }
        LinearForm df;
        df.constant = sp.b_form.constant;
        for (const auto& [v, c] : sp.b_form.coeffs) {
            if (std::abs(c.imag()) > tol * std::max(std::abs(c), 1.0)) {
                throw DivergentIntegral(
                    "linear phase with complex variable coefficients");
            }
            if (std::abs(c) > tol) df.set(v, Complex(c.real()));
        }
        out.deltas.push_back(DeltaFactor{std::move(df)});
        res.term = std::move(out);
        return res;
    }

    Complex beta = sp.b_form.constant;
    if (std::abs(beta) > tol) {
        // (d) delta of a nonzero number: the term vanishes.
        if (std::abs(beta.imag()) > tol) {
            throw DivergentIntegral("unbounded integrand (complex linear phase)");
        }
        return res;
    }

    // (e) constant integrand.
    if (policy == Policy::Throw) {
        throw DivergentIntegral("constant integrand over an unbounded variable");
    }
    GaussTerm out = GaussTerm::unit(t.arity - 1);
    out.coeff = t.coeff * 2.0 * std::numbers::pi;
    out.exponent = sp.rest;
    PolyPrefactor poly;
    for (const auto& [mi, c] : t.poly.monomials) {
        MultiIndex rest(t.arity - 1, 0);
        for (int i = 0; i < t.arity; ++i) {
            if (i == var) continue;
            rest[i > var ? i - 1 : i] = mi[i];
        }
        poly.monomials[rest] = c;
    }
    out.poly = std::move(poly);
    for (const auto& d : t.deltas) {
        out.deltas.push_back(DeltaFactor{d.form.drop_var(var)});
    }
    res.term = std::move(out);
    res.kronecker_events = 1;
    return res;
}

// Elimination-order heuristic for one term: deltas first, then the variable
// with the strongest damping, then the strongest oscillation, then linear
// couplings.
int choose_var(const GaussTerm& t, const EvalConfig& cfg) {
    const double tol = cfg.eq_tol;
    for (const auto& d : t.deltas) {
        for (const auto& [v, c] : d.form.coeffs) {
            if (std::abs(c) > tol) return v;
        }
    }
    int best = -1;
    double best_im = tol;
    for (int v = 0; v < t.arity; ++v) {
        double im = t.exponent.at(v, v).imag();
        if (im > best_im) {
            best_im = im;
            best = v;
        }
    }
    if (best >= 0) return best;
    double best_re = tol;
    for (int v = 0; v < t.arity; ++v) {
        Complex alpha = t.exponent.at(v, v);
        if (std::abs(alpha.imag()) <= tol && std::abs(alpha.real()) > best_re) {
            best_re = std::abs(alpha.real());
            best = v;
        }
    }
    if (best >= 0) return best;
    for (int v = 0; v < t.arity; ++v) {
        VarSplit sp = split_exponent(t.exponent, v);
        if (std::abs(sp.alpha) <= tol && !sp.b_form.vars_empty(tol)) return v;
    }
    return 0;
}

struct Contribution {
    Complex value;
    int kronecker = 0;
};

// Fully eliminates every variable of a single term.
std::optional<Contribution> eliminate_term(GaussTerm t, const EvalConfig& cfg,
                                           Policy policy) {
    int kron = 0;
    while (t.arity > 0) {
        if (!canonicalize_term(t, cfg.eq_tol)) return std::nullopt;
        int var = choose_var(t, cfg);
        StepResult step = integrate_term_once(t, var, cfg, policy);
        kron += step.kronecker_events;
        if (!step.term) return std::nullopt;
        t = std::move(*step.term);
    }
    if (!canonicalize_term(t, cfg.eq_tol)) return std::nullopt;
    return Contribution{t.coeff * t.poly.constant_value(), kron};
}

}  // namespace

State integrate_var(const State& s, int var, const EvalConfig& cfg) {
    if (var < 0 || var >= s.arity) {
        throw ArityMismatch("integrate_var: variable index out of range");
    }
    std::vector<GaussTerm> terms;
    terms.reserve(s.terms.size());
    for (const auto& t : s.terms) {
        StepResult step = integrate_term_once(t, var, cfg, Policy::Throw);
        if (step.term) terms.push_back(std::move(*step.term));
    }
    return make_state(s.arity - 1, std::move(terms), cfg.eq_tol);
}

State integrate_all(const State& s, const EvalConfig& cfg) {
    std::vector<GaussTerm> finals;
    for (const auto& t : s.terms) {
        GaussTerm cur = t;
        while (cur.arity > 0) {
            if (!canonicalize_term(cur, cfg.eq_tol)) break;
            int var = choose_var(cur, cfg);
            StepResult step = integrate_term_once(cur, var, cfg, Policy::Throw);
            if (!step.term) break;
            cur = std::move(*step.term);
        }
        if (cur.arity == 0) finals.push_back(std::move(cur));
    }
    return make_state(0, std::move(finals), cfg.eq_tol);
}

State integrate_all(const State& s, const EvalConfig& cfg,
                    std::span<const int> order) {
    if (static_cast<int>(order.size()) != s.arity) {
        throw ArityMismatch("integrate_all: order must list every variable once");
    }
    // Translate original indices to the shrinking numbering as we fold.
    std::vector<int> remaining(s.arity);
    for (int i = 0; i < s.arity; ++i) remaining[i] = i;
    State cur = s;
    for (int orig : order) {
        auto it = std::find(remaining.begin(), remaining.end(), orig);
        if (it == remaining.end()) {
            throw ArityMismatch("integrate_all: order repeats a variable");
        }
        int pos = static_cast<int>(it - remaining.begin());
        cur = integrate_var(cur, pos, cfg);
        remaining.erase(it);
    }
    return cur;
}

Amplitude inner_product(const State& phi, const State& psi, const EvalConfig& cfg) {
    if (phi.arity != psi.arity) {
        throw ArityMismatch("inner_product: arity " + std::to_string(phi.arity) +
                            " vs " + std::to_string(psi.arity));
    }
    State integrand;
    try {
        integrand = multiply_pointwise(conjugate(phi), psi, cfg);
    } catch (const DependentDeltas&) {
        throw DivergentIntegral(
            "coincident generalized states; no finite or Kronecker reading");
    }

    Complex finite_sum(0.0);
    std::map<int, Complex> kron_sums;
    for (const auto& t : integrand.terms) {
        std::optional<Contribution> c;
        try {
            c = eliminate_term(t, cfg, Policy::Kronecker);
        } catch (const DependentDeltas&) {
            throw DivergentIntegral(
                "coincident generalized states; no finite or Kronecker reading");
        } catch (const DeltaDerivativeUnsupported&) {
            throw DivergentIntegral(
                "polynomial prefactor survives full phase cancellation; the "
                "Kronecker agreement does not apply");
        }
        if (!c) continue;
        if (c->kronecker == 0) {
            finite_sum += c->value;
        } else {
            kron_sums[c->kronecker] += c->value;
        }
    }

    Complex kron_total(0.0);
    int kron_levels = 0;
    for (const auto& [k, v] : kron_sums) {
        (void)k;
        if (std::abs(v) > cfg.eq_tol) {
            ++kron_levels;
            kron_total = v;
        }
    }
    if (kron_levels == 0) return Amplitude::finite(finite_sum);
    if (kron_levels > 1) {
        throw DivergentIntegral("contributions of different delta order");
    }
    if (std::abs(finite_sum) > cfg.eq_tol * std::max(1.0, std::abs(kron_total))) {
        throw DivergentIntegral(
            "mixed finite and delta-normalized contributions");
    }
    return Amplitude::delta_normalized(kron_total);
}

double state_norm(const State& s, const EvalConfig& cfg) {
    if (s.rigging != Rigging::Proper) {
        throw NotNormalizable("norm of a generalized state is not finite");
    }
    if (s.is_zero()) return 0.0;
    Amplitude amp = inner_product(s, s, cfg);
    double n2 = amp.value.real();
    return n2 > 0.0 ? std::sqrt(n2) : 0.0;
}

State normalize(const State& s, const EvalConfig& cfg) {
    if (s.rigging != Rigging::Proper) {
        throw NotNormalizable("cannot normalize a generalized state");
    }
    if (s.is_zero()) throw ZeroState("cannot normalize the zero state");
    Amplitude amp = inner_product(s, s, cfg);
    double n2 = amp.value.real();
    if (!(n2 > 0.0)) throw ZeroState("state has vanishing norm");
    return scale(Complex(1.0 / std::sqrt(n2)), s);
}

}  // namespace dcl
