#include "dcl/lattice.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <numbers>

#include "dcl/quantifier.hpp"

namespace dcl {

namespace {

constexpr Complex kI(0.0, 1.0);
const double kPi = std::numbers::pi;

// Narrowest Gaussian length scale of a Proper state: 1/sqrt(2 max_eig(Im A)).
double narrowest_width(const State& s) {
    double width = std::numeric_limits<double>::infinity();
    for (const auto& t : s.terms) {
        int n = t.arity;
        std::vector<double> im(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                im[static_cast<size_t>(i) * n + j] = t.exponent.at(i, j).imag();
            }
        }
        auto eig = symmetric_eigenvalues(std::move(im), n);
        double top = eig.back();
        if (top > 0.0) width = std::min(width, 1.0 / std::sqrt(2.0 * top));
    }
    return width;
}

}  // namespace

LatticeModel LatticeModel::with_size(int n) {
    if (n < 2 || n % 2 != 0) {
        throw DimensionMismatch("lattice size must be an even integer >= 2");
    }
    LatticeModel m;
    m.n = n;
    m.spacing = std::sqrt(2.0 * kPi / n);
    return m;
}

LatticeVector interpret(const State& s, const LatticeModel& model,
                        bool* ambiguous) {
    if (s.arity != 1) {
        throw UnsupportedArity("interpret expects an arity-1 state");
    }
    if (ambiguous) *ambiguous = false;
    LatticeVector out = LatticeVector::Zero(model.n);
    for (const auto& t : s.terms) {
        if (t.deltas.empty()) {
            for (int j = 0; j < model.n; ++j) {
                double xs[1] = {model.point(j)};
                out[j] += evaluate_term(t, std::span<const double>(xs, 1));
            }
            continue;
        }
        // Canonical arity-1 delta: coefficient 1 on the variable.
        const LinearForm& form = t.deltas.front().form;
        Complex shift = form.constant;
        if (std::abs(shift.imag()) > 1e-9 * std::max(1.0, std::abs(shift))) {
            throw UnsupportedOperation("delta located at a complex point");
        }
        double x0 = -shift.real();
        double pos = x0 / model.spacing + model.n / 2;
        double frac = pos - std::floor(pos);
        if (std::abs(frac - 0.5) < 1e-12) {
            if (ambiguous) *ambiguous = true;
            pos = std::floor(pos);  // tie toward the lower index
        }
        long j = std::lround(pos);
        j = ((j % model.n) + model.n) % model.n;
        double xs[1] = {x0};
        GaussTerm bare = t;
        bare.deltas.clear();
        out[j] += evaluate_term(bare, std::span<const double>(xs, 1)) / model.spacing;
    }
    return out;
}

Complex discrete_inner(const LatticeVector& u, const LatticeVector& v,
                       const LatticeModel& model) {
    if (u.size() != model.n || v.size() != model.n) {
        throw DimensionMismatch("vector length does not match the lattice");
    }
    return u.dot(v) * model.spacing;  // Eigen's dot conjugates the left side
}

namespace {

long lattice_steps(const LatticeModel& model, double value, const char* what) {
    double steps = value / model.spacing;
    double rounded = std::round(steps);
    if (std::abs(steps - rounded) > 1e-9 * std::max(1.0, std::abs(steps))) {
        throw IncommensurateParameter(std::string(what) +
                                      " is not a lattice multiple");
    }
    return static_cast<long>(rounded);
}

}  // namespace

LatticeOperator discrete_translation(const LatticeModel& model, double a) {
    long s = lattice_steps(model, a, "translation step");
    LatticeOperator u = LatticeOperator::Zero(model.n, model.n);
    for (int j = 0; j < model.n; ++j) {
        int src = static_cast<int>(((j + s) % model.n + model.n) % model.n);
        u(j, src) = 1.0;  // (U psi)_j = psi_{j+s}
    }
    return u;
}

LatticeOperator discrete_modulation(const LatticeModel& model, double b) {
    // Dual grid step 2*pi/(N*spacing) equals the spacing itself.
    lattice_steps(model, b, "modulation step");
    LatticeOperator v = LatticeOperator::Zero(model.n, model.n);
    for (int j = 0; j < model.n; ++j) {
        v(j, j) = std::exp(kI * b * model.point(j));
    }
    return v;
}

LatticeOperator discrete_weyl(const LatticeModel& model, double a, double b) {
    return discrete_translation(model, a) * discrete_modulation(model, b);
}

SurjectionReport eig_surjection_check(const LatticeModel& model, double a) {
    LatticeOperator u = discrete_translation(model, a);
    Eigen::ComplexEigenSolver<LatticeOperator> solver(u);
    if (solver.info() != Eigen::Success) {
        throw InvalidState("translation eigendecomposition failed");
    }

    // Dual momentum grid: p_r = r * spacing for r in [-N/2, N/2).
    SurjectionReport report;
    report.max_defect = 0.0;
    std::vector<bool> hit(model.n, false);
    for (int r = 0; r < model.n; ++r) {
        double p = (r - model.n / 2) * model.spacing;
        Complex expected = std::exp(kI * p * a);
        // Projector onto the eigenspace with this eigenvalue.
        LatticeVector interp = interpret(momentum_state(p), model);
        Complex nrm2 = discrete_inner(interp, interp, model);
        interp /= std::sqrt(nrm2.real());
        LatticeVector projected = LatticeVector::Zero(model.n);
        bool matched = false;
        for (int k = 0; k < model.n; ++k) {
            if (std::abs(solver.eigenvalues()[k] - expected) < 1e-6) {
                LatticeVector v = solver.eigenvectors().col(k);
                projected += v * (v.adjoint() * interp)(0);
                matched = true;
            }
        }
        double defect = matched
                            ? std::sqrt(std::abs(discrete_inner(
                                  LatticeVector(interp - projected),
                                  LatticeVector(interp - projected), model)))
                            : 1.0;
        report.rows.push_back({p, expected, defect});
        report.max_defect = std::max(report.max_defect, defect);
        hit[r] = matched;
    }
    report.surjective = true;
    for (bool h : hit) report.surjective = report.surjective && h;
    return report;
}

double spectral_resolution_check(const LatticeOperator& f) {
    double herm = (f - f.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) {
        throw NotHermitian("operator is not Hermitian within 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<LatticeOperator> solver(f);
    if (solver.info() != Eigen::Success) {
        throw InvalidState("eigendecomposition failed");
    }
    const auto& v = solver.eigenvectors();
    LatticeOperator recomposed =
        v * solver.eigenvalues().asDiagonal() * v.adjoint();
    LatticeOperator completeness = v * v.adjoint();
    double r1 = (recomposed - f).cwiseAbs().maxCoeff();
    double r2 = (completeness -
                 LatticeOperator::Identity(f.rows(), f.cols()))
                    .cwiseAbs()
                    .maxCoeff();
    return std::max(r1, r2);
}

namespace {

// Unitary centered DFT and the matching momentum grid diag entries.
LatticeOperator dft_matrix(const LatticeModel& model) {
    LatticeOperator w(model.n, model.n);
    double norm = 1.0 / std::sqrt(double(model.n));
    for (int r = 0; r < model.n; ++r) {
        for (int j = 0; j < model.n; ++j) {
            w(r, j) = std::exp(-kI * (2.0 * kPi * r * j / model.n)) * norm;
        }
    }
    return w;
}

double momentum_entry(const LatticeModel& model, int r) {
    int centered = r < model.n / 2 ? r : r - model.n;
    return centered * model.spacing;
}

}  // namespace

LatticeOperator discrete_hamiltonian(const LatticeModel& model,
                                     const HamiltonianSpec& h) {
    LatticeOperator w = dft_matrix(model);
    LatticeVector p2(model.n);
    for (int r = 0; r < model.n; ++r) {
        double p = momentum_entry(model, r);
        p2[r] = p * p / (2.0 * h.mass);
    }
    LatticeOperator ham = w.adjoint() * p2.asDiagonal() * w;
    if (h.kind == HamiltonianSpec::Kind::Harmonic) {
        for (int j = 0; j < model.n; ++j) {
            double x = model.point(j);
            ham(j, j) += 0.5 * h.mass * h.omega * h.omega * x * x;
        }
    }
    return (ham + LatticeOperator(ham.adjoint())) / 2.0;
}

LatticeOperator discrete_evolve(const LatticeModel& model,
                                const HamiltonianSpec& h, double t,
                                double hbar) {
    LatticeOperator ham = discrete_hamiltonian(model, h);
    Eigen::SelfAdjointEigenSolver<LatticeOperator> solver(ham);
    if (solver.info() != Eigen::Success) {
        throw InvalidState("Hamiltonian eigendecomposition failed");
    }
    LatticeVector phases(model.n);
    for (int k = 0; k < model.n; ++k) {
        phases[k] = std::exp(-kI * solver.eigenvalues()[k] * t / hbar);
    }
    return solver.eigenvectors() * phases.asDiagonal() *
           solver.eigenvectors().adjoint();
}

double discrete_probability(const LatticeVector& f, const LatticeVector& psi,
                            const LatticeModel& model) {
    Complex nrm2 = discrete_inner(psi, psi, model);
    if (std::abs(nrm2 - Complex(1.0)) > 1e-8) {
        throw NotNormalized("state is not normalized under the lattice measure");
    }
    return std::norm(discrete_inner(f, psi, model));
}

std::vector<std::pair<double, double>> born_distribution(
    const LatticeOperator& f, const LatticeVector& psi,
    const LatticeModel& model) {
    Complex nrm2 = discrete_inner(psi, psi, model);
    if (std::abs(nrm2 - Complex(1.0)) > 1e-8) {
        throw NotNormalized("state is not normalized under the lattice measure");
    }
    double herm = (f - f.adjoint()).cwiseAbs().maxCoeff();
    if (herm > 1e-10) {
        throw NotHermitian("observable is not Hermitian within 1e-10");
    }
    Eigen::SelfAdjointEigenSolver<LatticeOperator> solver(f);
    std::vector<std::pair<double, double>> rows;
    rows.reserve(model.n);
    for (int k = 0; k < model.n; ++k) {
        // Eigenvectors are l2-normalized; rescale to unit lattice norm.
        LatticeVector fk = solver.eigenvectors().col(k) / std::sqrt(model.spacing);
        rows.emplace_back(solver.eigenvalues()[k],
                          std::norm(discrete_inner(fk, psi, model)));
    }
    return rows;
}

std::vector<ConvergenceRow> convergence_report(const State& phi,
                                               const State& psi,
                                               std::span<const int> sizes,
                                               const EvalConfig& cfg) {
    if (phi.rigging != Rigging::Proper || psi.rigging != Rigging::Proper) {
        throw NotNormalizable("convergence_report expects Proper states");
    }
    Amplitude symbolic = inner_product(phi, psi, cfg);
    double width = std::min(narrowest_width(phi), narrowest_width(psi));

    std::vector<ConvergenceRow> rows;
    rows.reserve(sizes.size());
    for (int n : sizes) {
        LatticeModel model = LatticeModel::with_size(n);
        ConvergenceRow row;
        row.n = n;
        if (phi.is_zero() || psi.is_zero()) {
            row.discrete_value = Complex(0.0);
        } else {
            LatticeVector u = interpret(phi, model);
            LatticeVector v = interpret(psi, model);
            row.discrete_value = discrete_inner(u, v, model);
        }
        row.symbolic_value = symbolic.value;
        row.abs_error = std::abs(row.discrete_value - row.symbolic_value);
        row.resolved = width >= 4.0 * model.spacing;
        rows.push_back(row);
    }
    return rows;
}

}  // namespace dcl
