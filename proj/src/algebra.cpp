#include "dcl/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace dcl {

namespace {

void check_finite(Complex z, const char* where) {
    if (!is_finite(z)) {
        throw InvalidState(std::string("non-finite value in ") + where);
    }
}

double magnitude_scale(const GaussTerm& t) {
    double s = std::abs(t.coeff);
    for (const auto& [mi, c] : t.poly.monomials) {
        (void)mi;
        s = std::max(s, std::abs(c));
    }
    for (const auto& z : t.exponent.a) s = std::max(s, std::abs(z));
    for (const auto& z : t.exponent.b) s = std::max(s, std::abs(z));
    return std::max(s, 1.0);
}

}  // namespace

// --- EvalConfig --------------------------------------------------------------

EvalConfig::EvalConfig() {
    interval_schedule.reserve(20);
    double w = 2.0;
    for (int k = 1; k <= 20; ++k) {
        interval_schedule.push_back(w);
        w *= 2.0;
    }
}

void EvalConfig::validate() const {
    if (!(hbar > 0.0)) throw InvalidState("hbar must be positive");
    if (!(eq_tol > 0.0)) throw InvalidState("eq_tol must be positive");
    if (max_degree < 1) throw InvalidState("max_degree must be at least 1");
    for (size_t i = 0; i + 1 < interval_schedule.size(); ++i) {
        if (!(interval_schedule[i] < interval_schedule[i + 1])) {
            throw InvalidState("interval_schedule must be strictly increasing");
        }
    }
}

// --- LinearForm ---------------------------------------------------------------

bool LinearForm::vars_empty(double tol) const {
    for (const auto& [v, c] : coeffs) {
        (void)v;
        if (std::abs(c) > tol) return false;
    }
    return true;
}

LinearForm LinearForm::drop_var(int removed) const {
    LinearForm out;
    out.constant = constant;
    for (const auto& [v, c] : coeffs) {
        if (v == removed) {
            throw InvalidState("drop_var on a dependent linear form");
        }
        out.set(v > removed ? v - 1 : v, c);
    }
    return out;
}

LinearForm LinearForm::scaled(Complex s) const {
    LinearForm out;
    out.constant = constant * s;
    for (const auto& [v, c] : coeffs) out.set(v, c * s);
    return out;
}

LinearForm LinearForm::plus(const LinearForm& other) const {
    LinearForm out = *this;
    out.constant += other.constant;
    for (const auto& [v, c] : other.coeffs) out.add(v, c);
    return out;
}

// --- PolyPrefactor ------------------------------------------------------------

PolyPrefactor PolyPrefactor::one(int arity) {
    return constant(arity, Complex(1.0));
}

PolyPrefactor PolyPrefactor::constant(int arity, Complex c) {
    PolyPrefactor p;
    if (c != Complex(0.0)) p.monomials[MultiIndex(arity, 0)] = c;
    return p;
}

PolyPrefactor PolyPrefactor::from_linear(const LinearForm& lf, int arity) {
    PolyPrefactor p;
    if (lf.constant != Complex(0.0)) {
        p.monomials[MultiIndex(arity, 0)] = lf.constant;
    }
    for (const auto& [v, c] : lf.coeffs) {
        MultiIndex mi(arity, 0);
        mi[v] = 1;
        p.monomials[mi] = c;
    }
    return p;
}

bool PolyPrefactor::is_constant() const {
    if (monomials.empty()) return true;
    if (monomials.size() > 1) return false;
    return total_degree() == 0;
}

Complex PolyPrefactor::constant_value() const {
    for (const auto& [mi, c] : monomials) {
        bool zero = true;
        for (int d : mi) zero = zero && d == 0;
        if (zero) return c;
    }
    return Complex(0.0);
}

int PolyPrefactor::total_degree() const {
    int deg = 0;
    for (const auto& [mi, c] : monomials) {
        (void)c;
        int d = 0;
        for (int e : mi) d += e;
        deg = std::max(deg, d);
    }
    return deg;
}

int PolyPrefactor::degree_in(int var) const {
    int deg = 0;
    for (const auto& [mi, c] : monomials) {
        (void)c;
        deg = std::max(deg, mi[var]);
    }
    return deg;
}

void PolyPrefactor::prune(double tol) {
    double top = 0.0;
    for (const auto& [mi, c] : monomials) {
        (void)mi;
        top = std::max(top, std::abs(c));
    }
    for (auto it = monomials.begin(); it != monomials.end();) {
        if (std::abs(it->second) <= tol * top) {
            it = monomials.erase(it);
        } else {
            ++it;
        }
    }
}

PolyPrefactor PolyPrefactor::plus(const PolyPrefactor& other) const {
    PolyPrefactor out = *this;
    for (const auto& [mi, c] : other.monomials) {
        auto [it, inserted] = out.monomials.emplace(mi, c);
        if (!inserted) {
            it->second += c;
            if (it->second == Complex(0.0)) out.monomials.erase(it);
        }
    }
    return out;
}

PolyPrefactor PolyPrefactor::times(const PolyPrefactor& other,
                                   int max_degree) const {
    PolyPrefactor out;
    for (const auto& [mi1, c1] : monomials) {
        for (const auto& [mi2, c2] : other.monomials) {
            MultiIndex mi = mi1;
            int total = 0;
            for (size_t i = 0; i < mi.size(); ++i) {
                mi[i] += mi2[i];
                total += mi[i];
            }
            if (total > max_degree) {
                throw DegreeOverflow("polynomial degree " + std::to_string(total) +
                                     " exceeds max_degree " +
                                     std::to_string(max_degree));
            }
            auto [it, inserted] = out.monomials.emplace(mi, c1 * c2);
            if (!inserted) it->second += c1 * c2;
        }
    }
    for (auto it = out.monomials.begin(); it != out.monomials.end();) {
        if (it->second == Complex(0.0)) {
            it = out.monomials.erase(it);
        } else {
            ++it;
        }
    }
    return out;
}

PolyPrefactor PolyPrefactor::scaled(Complex c) const {
    PolyPrefactor out;
    if (c == Complex(0.0)) return out;
    for (const auto& [mi, v] : monomials) out.monomials[mi] = v * c;
    return out;
}

Complex PolyPrefactor::evaluate(std::span<const double> xs) const {
    Complex sum(0.0);
    for (const auto& [mi, c] : monomials) {
        double mono = 1.0;
        for (size_t i = 0; i < mi.size(); ++i) {
            for (int k = 0; k < mi[i]; ++k) mono *= xs[i];
        }
        sum += c * mono;
    }
    return sum;
}

PolyPrefactor poly_pow_linear(const LinearForm& lf, int exponent, int arity,
                              int max_degree) {
    PolyPrefactor out = PolyPrefactor::one(arity);
    PolyPrefactor base = PolyPrefactor::from_linear(lf, arity);
    for (int k = 0; k < exponent; ++k) out = out.times(base, max_degree);
    return out;
}

// --- QuadExponent --------------------------------------------------------------

Complex QuadExponent::evaluate(std::span<const double> xs) const {
    Complex f = c;
    for (int i = 0; i < arity; ++i) {
        f += b[i] * xs[i];
        for (int j = 0; j < arity; ++j) {
            f += at(i, j) * xs[i] * xs[j];
        }
    }
    return f;
}

// --- symmetric eigenvalues (cyclic Jacobi) -------------------------------------

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
    auto at = [&](int i, int j) -> double& { return a[static_cast<size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        }
        if (off < 1e-300) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (apq == 0.0) continue;
                double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = at(k, p);
                    double akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = at(p, k);
                    double aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> eig(n);
    for (int i = 0; i < n; ++i) eig[i] = at(i, i);
    std::sort(eig.begin(), eig.end());
    return eig;
}

// --- term canonicalization ------------------------------------------------------

GaussTerm GaussTerm::unit(int arity) {
    GaussTerm t;
    t.arity = arity;
    t.poly = PolyPrefactor::one(arity);
    t.exponent = QuadExponent(arity);
    return t;
}

namespace {

// Reduced row echelon form of the delta system. Rows are (real variable
// coefficients | complex constant). Returns false when some row reduces to a
// nonzero constant (the term vanishes); throws DependentDeltas when a row
// reduces to exactly zero.
bool delta_rref(std::vector<DeltaFactor>& deltas, int arity, Complex& coeff,
                double tol) {
    if (deltas.empty()) return true;
    size_t rows = deltas.size();
    std::vector<std::vector<double>> m(rows, std::vector<double>(arity, 0.0));
    std::vector<Complex> konst(rows);
    for (size_t r = 0; r < rows; ++r) {
        double scale = 0.0;
        for (const auto& [v, c] : deltas[r].form.coeffs) {
            (void)v;
            scale = std::max(scale, std::abs(c));
        }
        for (const auto& [v, c] : deltas[r].form.coeffs) {
            if (std::abs(c.imag()) > tol * std::max(scale, 1.0)) {
                throw InvalidState("delta argument has complex variable part");
            }
            m[r][v] = c.real();
        }
        konst[r] = deltas[r].form.constant;
    }

    size_t pivot_row = 0;
    for (int col = 0; col < arity && pivot_row < rows; ++col) {
        size_t best = pivot_row;
        for (size_t r = pivot_row; r < rows; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[best][col])) best = r;
        }
        double row_scale = 0.0;
        for (int c = 0; c < arity; ++c) row_scale = std::max(row_scale, std::abs(m[best][c]));
        if (std::abs(m[best][col]) <= tol * std::max(row_scale, 1.0)) continue;
        std::swap(m[pivot_row], m[best]);
        std::swap(konst[pivot_row], konst[best]);
        double p = m[pivot_row][col];
        for (int c = 0; c < arity; ++c) m[pivot_row][c] /= p;
        m[pivot_row][col] = 1.0;
        konst[pivot_row] /= p;
        coeff /= std::abs(p);
        for (size_t r = 0; r < rows; ++r) {
            if (r == pivot_row) continue;
            double f = m[r][col];
            if (f == 0.0) continue;
            for (int c = 0; c < arity; ++c) m[r][c] -= f * m[pivot_row][c];
            m[r][col] = 0.0;
            konst[r] -= f * konst[pivot_row];
        }
        ++pivot_row;
    }

    for (size_t r = pivot_row; r < rows; ++r) {
        if (std::abs(konst[r]) > tol) return false;  // delta of a nonzero constant
        throw DependentDeltas("coincident delta factors in one term");
    }

    std::vector<DeltaFactor> out;
    out.reserve(pivot_row);
    for (size_t r = 0; r < pivot_row; ++r) {
        DeltaFactor d;
        double row_scale = 1.0;  // pivots are unit after reduction
        for (int c = 0; c < arity; ++c) row_scale = std::max(row_scale, std::abs(m[r][c]));
        for (int c = 0; c < arity; ++c) {
            if (std::abs(m[r][c]) > tol * row_scale) d.form.set(c, Complex(m[r][c]));
        }
        d.form.constant = konst[r];
        out.push_back(std::move(d));
    }
    deltas = std::move(out);
    return true;
}

void validate_psd(const QuadExponent& q) {
    int n = q.arity;
    if (n == 0) return;
    std::vector<double> im(static_cast<size_t>(n) * n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            im[static_cast<size_t>(i) * n + j] = q.at(i, j).imag();
            scale = std::max(scale, std::abs(q.at(i, j)));
        }
    }
    auto eig = symmetric_eigenvalues(im, n);
    if (eig.front() < -1e-9 * std::max(scale, 1.0)) {
        throw InvalidState("imaginary part of quadratic exponent is not PSD");
    }
}

bool imaginary_part_strictly_pd(const QuadExponent& q) {
    int n = q.arity;
    if (n == 0) return true;
    std::vector<double> im(static_cast<size_t>(n) * n);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            double v = q.at(i, j).imag();
            im[static_cast<size_t>(i) * n + j] = v;
            scale = std::max(scale, std::abs(v));
        }
    }
    auto eig = symmetric_eigenvalues(im, n);
    return eig.front() > 1e-13 * std::max(scale, 1.0);
}

int compare_complex(Complex a, Complex b) {
    if (a.real() != b.real()) return a.real() < b.real() ? -1 : 1;
    if (a.imag() != b.imag()) return a.imag() < b.imag() ? -1 : 1;
    return 0;
}

// Deterministic total order on canonical terms.
bool term_less(const GaussTerm& t1, const GaussTerm& t2) {
    if (t1.deltas.size() != t2.deltas.size()) {
        return t1.deltas.size() < t2.deltas.size();
    }
    for (size_t d = 0; d < t1.deltas.size(); ++d) {
        const auto& f1 = t1.deltas[d].form;
        const auto& f2 = t2.deltas[d].form;
        if (f1.coeffs.size() != f2.coeffs.size()) {
            return f1.coeffs.size() < f2.coeffs.size();
        }
        auto i1 = f1.coeffs.begin();
        auto i2 = f2.coeffs.begin();
        for (; i1 != f1.coeffs.end(); ++i1, ++i2) {
            if (i1->first != i2->first) return i1->first < i2->first;
            if (int c = compare_complex(i1->second, i2->second)) return c < 0;
        }
        if (int c = compare_complex(f1.constant, f2.constant)) return c < 0;
    }
    if (t1.poly.monomials.size() != t2.poly.monomials.size()) {
        return t1.poly.monomials.size() < t2.poly.monomials.size();
    }
    {
        auto i1 = t1.poly.monomials.begin();
        auto i2 = t2.poly.monomials.begin();
        for (; i1 != t1.poly.monomials.end(); ++i1, ++i2) {
            if (i1->first != i2->first) return i1->first < i2->first;
            if (int c = compare_complex(i1->second, i2->second)) return c < 0;
        }
    }
    for (size_t i = 0; i < t1.exponent.a.size(); ++i) {
        if (int c = compare_complex(t1.exponent.a[i], t2.exponent.a[i])) return c < 0;
    }
    for (size_t i = 0; i < t1.exponent.b.size(); ++i) {
        if (int c = compare_complex(t1.exponent.b[i], t2.exponent.b[i])) return c < 0;
    }
    return compare_complex(t1.coeff, t2.coeff) < 0;
}

bool close(Complex a, Complex b, double tol, double scale) {
    return std::abs(a - b) <= tol * scale;
}

// Same delta system and quadratic exponent: such terms combine exactly by
// adding their scaled polynomials.
bool terms_same_shape(const GaussTerm& t1, const GaussTerm& t2, double tol) {
    if (t1.deltas.size() != t2.deltas.size()) return false;
    double scale = std::max(magnitude_scale(t1), magnitude_scale(t2));
    for (size_t d = 0; d < t1.deltas.size(); ++d) {
        const auto& f1 = t1.deltas[d].form;
        const auto& f2 = t2.deltas[d].form;
        if (f1.coeffs.size() != f2.coeffs.size()) return false;
        auto i1 = f1.coeffs.begin();
        auto i2 = f2.coeffs.begin();
        for (; i1 != f1.coeffs.end(); ++i1, ++i2) {
            if (i1->first != i2->first) return false;
            if (!close(i1->second, i2->second, tol, scale)) return false;
        }
        if (!close(f1.constant, f2.constant, tol, scale)) return false;
    }
    for (size_t i = 0; i < t1.exponent.a.size(); ++i) {
        if (!close(t1.exponent.a[i], t2.exponent.a[i], tol, scale)) return false;
    }
    for (size_t i = 0; i < t1.exponent.b.size(); ++i) {
        if (!close(t1.exponent.b[i], t2.exponent.b[i], tol, scale)) return false;
    }
    return true;
}

bool polys_close(const PolyPrefactor& p1, const PolyPrefactor& p2, double tol,
                 double scale) {
    if (p1.monomials.size() != p2.monomials.size()) return false;
    auto i1 = p1.monomials.begin();
    auto i2 = p2.monomials.begin();
    for (; i1 != p1.monomials.end(); ++i1, ++i2) {
        if (i1->first != i2->first) return false;
        if (!close(i1->second, i2->second, tol, scale)) return false;
    }
    return true;
}

}  // namespace

bool canonicalize_term(GaussTerm& term, double tol) {
    check_finite(term.coeff, "term coefficient");
    for (const auto& z : term.exponent.a) check_finite(z, "exponent matrix");
    for (const auto& z : term.exponent.b) check_finite(z, "exponent vector");
    check_finite(term.exponent.c, "exponent constant");
    for (const auto& [mi, c] : term.poly.monomials) {
        (void)mi;
        check_finite(c, "polynomial coefficient");
    }
    if (static_cast<int>(term.exponent.arity) != term.arity) {
        throw InvalidState("exponent arity mismatch");
    }

    // Exact symmetry of A (constructors keep it; re-assert after arithmetic).
    for (int i = 0; i < term.arity; ++i) {
        for (int j = i + 1; j < term.arity; ++j) {
            Complex avg = (term.exponent.at(i, j) + term.exponent.at(j, i)) / 2.0;
            term.exponent.set(i, j, avg);
        }
    }

    // Fold the scalar phase into the coefficient.
    if (term.exponent.c != Complex(0.0)) {
        term.coeff *= std::exp(Complex(0.0, 1.0) * term.exponent.c);
        term.exponent.c = Complex(0.0);
        check_finite(term.coeff, "term coefficient after phase fold");
    }

    if (!delta_rref(term.deltas, term.arity, term.coeff, tol)) return false;

    term.poly.prune(tol);
    if (term.poly.is_zero()) return false;

    // Unit leading coefficient (largest monomial in the map order).
    Complex lead = term.poly.monomials.rbegin()->second;
    if (lead != Complex(1.0)) {
        term.coeff *= lead;
        for (auto& [mi, c] : term.poly.monomials) {
            (void)mi;
            c /= lead;
        }
        term.poly.monomials.rbegin()->second = Complex(1.0);
    }

    validate_psd(term.exponent);

    return term.coeff != Complex(0.0);
}

State make_state(int arity, std::vector<GaussTerm> terms, double tol) {
    State s;
    s.arity = arity;
    for (auto& t : terms) {
        if (t.arity != arity) throw ArityMismatch("term arity differs from state arity");
        if (!canonicalize_term(t, tol)) continue;
        bool merged = false;
        for (auto it = s.terms.begin(); it != s.terms.end(); ++it) {
            if (terms_same_shape(*it, t, tol)) {
                it->poly = it->poly.scaled(it->coeff).plus(t.poly.scaled(t.coeff));
                it->coeff = Complex(1.0);
                it->poly.prune(tol);
                if (it->poly.is_zero() || !canonicalize_term(*it, tol)) {
                    s.terms.erase(it);
                }
                merged = true;
                break;
            }
        }
        if (!merged) s.terms.push_back(std::move(t));
    }
    std::sort(s.terms.begin(), s.terms.end(), term_less);

    s.rigging = Rigging::Proper;
    for (const auto& t : s.terms) {
        if (!t.deltas.empty() || !imaginary_part_strictly_pd(t.exponent)) {
            s.rigging = Rigging::Generalized;
            break;
        }
    }
    return s;
}

State zero_state(int arity) {
    return make_state(arity, {});
}

// --- operations -----------------------------------------------------------------

State conjugate(const State& s) {
    std::vector<GaussTerm> terms;
    terms.reserve(s.terms.size());
    for (const auto& t : s.terms) {
        GaussTerm out = t;
        out.coeff = std::conj(t.coeff);
        for (auto& [mi, c] : out.poly.monomials) {
            (void)mi;
            c = std::conj(c);
        }
        // exp(iF) -> exp(-i conj(F)); Im A is preserved.
        for (auto& z : out.exponent.a) z = -std::conj(z);
        for (auto& z : out.exponent.b) z = -std::conj(z);
        out.exponent.c = -std::conj(out.exponent.c);
        for (auto& d : out.deltas) d.form.constant = std::conj(d.form.constant);
        terms.push_back(std::move(out));
    }
    return make_state(s.arity, std::move(terms));
}

State add(const State& s1, const State& s2) {
    if (s1.arity != s2.arity) {
        throw ArityMismatch("add: arity " + std::to_string(s1.arity) + " vs " +
                            std::to_string(s2.arity));
    }
    std::vector<GaussTerm> terms = s1.terms;
    terms.insert(terms.end(), s2.terms.begin(), s2.terms.end());
    return make_state(s1.arity, std::move(terms));
}

State scale(Complex c, const State& s) {
    check_finite(c, "scale factor");
    std::vector<GaussTerm> terms = s.terms;
    for (auto& t : terms) t.coeff *= c;
    return make_state(s.arity, std::move(terms));
}

State multiply_pointwise(const State& s1, const State& s2, const EvalConfig& cfg) {
    if (s1.arity != s2.arity) {
        throw ArityMismatch("multiply_pointwise: arity " + std::to_string(s1.arity) +
                            " vs " + std::to_string(s2.arity));
    }
    std::vector<GaussTerm> terms;
    terms.reserve(s1.terms.size() * s2.terms.size());
    for (const auto& t1 : s1.terms) {
        for (const auto& t2 : s2.terms) {
            GaussTerm t;
            t.arity = s1.arity;
            t.coeff = t1.coeff * t2.coeff;
            t.deltas = t1.deltas;
            t.deltas.insert(t.deltas.end(), t2.deltas.begin(), t2.deltas.end());
            t.poly = t1.poly.times(t2.poly, cfg.max_degree);
            t.exponent = t1.exponent;
            for (size_t i = 0; i < t.exponent.a.size(); ++i) {
                t.exponent.a[i] += t2.exponent.a[i];
            }
            for (size_t i = 0; i < t.exponent.b.size(); ++i) {
                t.exponent.b[i] += t2.exponent.b[i];
            }
            t.exponent.c += t2.exponent.c;
            terms.push_back(std::move(t));
        }
    }
    return make_state(s1.arity, std::move(terms), cfg.eq_tol);
}

State tensor(const State& s1, const State& s2) {
    int n1 = s1.arity;
    int n = n1 + s2.arity;
    std::vector<GaussTerm> terms;
    terms.reserve(s1.terms.size() * s2.terms.size());
    for (const auto& t1 : s1.terms) {
        for (const auto& t2 : s2.terms) {
            GaussTerm t = GaussTerm::unit(n);
            t.coeff = t1.coeff * t2.coeff;
            t.deltas = t1.deltas;
            for (const auto& d : t2.deltas) {
                DeltaFactor shifted;
                shifted.form.constant = d.form.constant;
                for (const auto& [v, c] : d.form.coeffs) shifted.form.set(v + n1, c);
                t.deltas.push_back(std::move(shifted));
            }
            t.poly.monomials.clear();
            for (const auto& [mi1, c1] : t1.poly.monomials) {
                for (const auto& [mi2, c2] : t2.poly.monomials) {
                    MultiIndex mi(n, 0);
                    std::copy(mi1.begin(), mi1.end(), mi.begin());
                    std::copy(mi2.begin(), mi2.end(), mi.begin() + n1);
                    t.poly.monomials[mi] = c1 * c2;
                }
            }
            for (int i = 0; i < n1; ++i) {
                t.exponent.b[i] = t1.exponent.b[i];
                for (int j = 0; j < n1; ++j) {
                    t.exponent.set(i, j, t1.exponent.at(i, j));
                }
            }
            for (int i = 0; i < s2.arity; ++i) {
                t.exponent.b[n1 + i] = t2.exponent.b[i];
                for (int j = 0; j < s2.arity; ++j) {
                    t.exponent.set(n1 + i, n1 + j, t2.exponent.at(i, j));
                }
            }
            t.exponent.c = t1.exponent.c + t2.exponent.c;
            terms.push_back(std::move(t));
        }
    }
    return make_state(n, std::move(terms));
}

namespace {

double det_real(std::vector<double> m, int n) {
    double det = 1.0;
    for (int col = 0; col < n; ++col) {
        int best = col;
        for (int r = col; r < n; ++r) {
            if (std::abs(m[static_cast<size_t>(r) * n + col]) >
                std::abs(m[static_cast<size_t>(best) * n + col])) {
                best = r;
            }
        }
        double p = m[static_cast<size_t>(best) * n + col];
        if (p == 0.0) return 0.0;
        if (best != col) {
            for (int c = 0; c < n; ++c) {
                std::swap(m[static_cast<size_t>(best) * n + c],
                          m[static_cast<size_t>(col) * n + c]);
            }
            det = -det;
        }
        det *= p;
        for (int r = col + 1; r < n; ++r) {
            double f = m[static_cast<size_t>(r) * n + col] / p;
            for (int c = col; c < n; ++c) {
                m[static_cast<size_t>(r) * n + c] -=
                    f * m[static_cast<size_t>(col) * n + c];
            }
        }
    }
    return det;
}

}  // namespace

State substitute_affine(const State& s, std::span<const double> m,
                        std::span<const double> v) {
    int n = s.arity;
    if (static_cast<int>(m.size()) != n * n || static_cast<int>(v.size()) != n) {
        throw ArityMismatch("substitute_affine: map size does not match arity");
    }
    std::vector<double> mat(m.begin(), m.end());
    if (n > 0 && std::abs(det_real(mat, n)) < 1e-12) {
        throw SingularSubstitution("affine substitution is singular");
    }
    auto mrow = [&](int i, int j) { return m[static_cast<size_t>(i) * n + j]; };

    std::vector<GaussTerm> terms;
    terms.reserve(s.terms.size());
    for (const auto& t : s.terms) {
        GaussTerm out = GaussTerm::unit(n);
        out.coeff = t.coeff;

        // exponent: A' = M^T A M, b' = M^T (b + 2 A v), c' = v^T A v + b.v + c
        QuadExponent q(n);
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                Complex sum(0.0);
                for (int k = 0; k < n; ++k) {
                    for (int l = 0; l < n; ++l) {
                        sum += mrow(k, i) * t.exponent.at(k, l) * mrow(l, j);
                    }
                }
                q.set(i, j, sum);
            }
        }
        for (int i = 0; i < n; ++i) {
            Complex sum(0.0);
            for (int k = 0; k < n; ++k) {
                Complex av(0.0);
                for (int l = 0; l < n; ++l) av += t.exponent.at(k, l) * v[l];
                sum += mrow(k, i) * (t.exponent.b[k] + 2.0 * av);
            }
            q.b[i] = sum;
        }
        Complex cc = t.exponent.c;
        for (int k = 0; k < n; ++k) {
            Complex av(0.0);
            for (int l = 0; l < n; ++l) av += t.exponent.at(k, l) * v[l];
            cc += v[k] * av + t.exponent.b[k] * v[k];
        }
        q.c = cc;
        out.exponent = std::move(q);

        // poly: substitute each variable by its affine image. Affine maps
        // preserve total degree, so the original degree bounds the result.
        int deg_cap = std::max(t.poly.total_degree(), 1);
        PolyPrefactor poly = PolyPrefactor::constant(n, Complex(0.0));
        for (const auto& [mi, c] : t.poly.monomials) {
            PolyPrefactor mono = PolyPrefactor::constant(n, c);
            for (int var = 0; var < n; ++var) {
                if (mi[var] == 0) continue;
                LinearForm lf;
                lf.constant = Complex(v[var]);
                for (int j = 0; j < n; ++j) lf.set(j, Complex(mrow(var, j)));
                mono = mono.times(poly_pow_linear(lf, mi[var], n, deg_cap), deg_cap);
            }
            poly = poly.plus(mono);
        }
        out.poly = std::move(poly);

        // deltas: compose the argument with the map.
        for (const auto& d : t.deltas) {
            DeltaFactor nd;
            Complex konst = d.form.constant;
            for (const auto& [var, c] : d.form.coeffs) {
                konst += c * v[var];
                for (int j = 0; j < n; ++j) {
                    Complex cur = nd.form.coeff(j);
                    nd.form.set(j, cur + c * mrow(var, j));
                }
            }
            nd.form.constant = konst;
            out.deltas.push_back(std::move(nd));
        }

        terms.push_back(std::move(out));
    }
    return make_state(n, std::move(terms));
}

State embed(const State& s, int new_arity, std::span<const int> var_map) {
    if (static_cast<int>(var_map.size()) != s.arity) {
        throw ArityMismatch("embed: variable map size does not match arity");
    }
    std::vector<GaussTerm> terms;
    terms.reserve(s.terms.size());
    for (const auto& t : s.terms) {
        GaussTerm out = GaussTerm::unit(new_arity);
        out.coeff = t.coeff;
        out.poly.monomials.clear();
        for (const auto& [mi, c] : t.poly.monomials) {
            MultiIndex nm(new_arity, 0);
            for (int i = 0; i < s.arity; ++i) nm[var_map[i]] = mi[i];
            out.poly.monomials[nm] = c;
        }
        for (int i = 0; i < s.arity; ++i) {
            out.exponent.b[var_map[i]] = t.exponent.b[i];
            for (int j = 0; j < s.arity; ++j) {
                out.exponent.set(var_map[i], var_map[j], t.exponent.at(i, j));
            }
        }
        out.exponent.c = t.exponent.c;
        for (const auto& d : t.deltas) {
            DeltaFactor nd;
            nd.form.constant = d.form.constant;
            for (const auto& [v, c] : d.form.coeffs) nd.form.set(var_map[v], c);
            out.deltas.push_back(std::move(nd));
        }
        terms.push_back(std::move(out));
    }
    return make_state(new_arity, std::move(terms));
}

Complex evaluate_term(const GaussTerm& term, std::span<const double> xs) {
    if (!term.deltas.empty()) {
        throw UnsupportedOperation("pointwise evaluation of a delta-bearing term");
    }
    Complex f = term.exponent.evaluate(xs);
    return term.coeff * term.poly.evaluate(xs) * std::exp(Complex(0.0, 1.0) * f);
}

Complex evaluate_state(const State& s, std::span<const double> xs) {
    Complex sum(0.0);
    for (const auto& t : s.terms) sum += evaluate_term(t, xs);
    return sum;
}

bool states_close(const State& s1, const State& s2, double tol) {
    if (s1.arity != s2.arity || s1.terms.size() != s2.terms.size()) return false;
    for (size_t i = 0; i < s1.terms.size(); ++i) {
        const GaussTerm& t1 = s1.terms[i];
        const GaussTerm& t2 = s2.terms[i];
        if (!terms_same_shape(t1, t2, tol)) return false;
        double scale = std::max({std::abs(t1.coeff), std::abs(t2.coeff), 1.0});
        if (!polys_close(t1.poly, t2.poly, tol, scale)) return false;
        if (std::abs(t1.coeff - t2.coeff) > tol * scale) return false;
    }
    return true;
}

}  // namespace dcl
