// Command-line front end: evaluate scripts, verify bra-kets against the
// numerical oracle, and run lattice convergence sweeps.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "dcl/dsl.hpp"
#include "dcl/lattice.hpp"
#include "dcl/oracle.hpp"
#include "dcl/quantifier.hpp"
#include "dcl/serialize.hpp"

namespace {

using namespace dcl;

struct Options {
    std::string script;
    double hbar = 1.0;
    double eq_tol = 1e-12;
    int max_degree = 16;
    double tol = 1e-6;               // verify comparison tolerance
    std::vector<double> eps_sweep;   // damping values for oscillatory checks
    std::vector<int> lattice_sizes = {64, 256, 1024};
    bool json_output = false;
    bool csv_output = false;
    double perturb = 0.0;            // test hook: offsets symbolic values
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double d : parse_double_list(text)) out.push_back(static_cast<int>(d));
    return out;
}

void apply_config_file(const std::string& path, Options& opt, bool required) {
    std::ifstream in(path);
    if (!in) {
        if (required) {
            throw std::runtime_error("cannot open config file: " + path);
        }
        return;
    }
    std::string line;
    while (std::getline(in, line)) {
        size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        size_t eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            size_t b = s.find_first_not_of(" \t\r");
            size_t e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "hbar") opt.hbar = std::stod(value);
        else if (key == "eq_tol") opt.eq_tol = std::stod(value);
        else if (key == "max_degree") opt.max_degree = std::stoi(value);
        else if (key == "tol") opt.tol = std::stod(value);
        else if (key == "eps_sweep") opt.eps_sweep = parse_double_list(value);
        else if (key == "N") opt.lattice_sizes = parse_int_list(value);
    }
}

EvalConfig config_of(const Options& opt) {
    EvalConfig cfg;
    cfg.hbar = opt.hbar;
    cfg.eq_tol = opt.eq_tol;
    cfg.max_degree = opt.max_degree;
    cfg.validate();
    return cfg;
}

std::string read_script(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot read script file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

JsonValue error_object(const std::string& kind, const std::string& message,
                       int line = 0, int column = 0,
                       const std::string& path = {}) {
    JsonValue e = JsonValue::object();
    e.set("kind", JsonValue::string(kind));
    e.set("message", JsonValue::string(message));
    if (line > 0) {
        e.set("column", JsonValue::integer_value(column));
        e.set("line", JsonValue::integer_value(line));
    }
    if (!path.empty()) e.set("path", JsonValue::string(path));
    return e;
}

JsonValue report_shell() {
    JsonValue root = JsonValue::object();
    root.set("errors", JsonValue::array());
    root.set("results", JsonValue::array());
    root.set("version", JsonValue::integer_value(1));
    root.set("warnings", JsonValue::array());
    return root;
}

void emit(const JsonValue& root) { std::cout << root.dump() << "\n"; }

struct CapturedBraKet {
    State lhs;
    State rhs;
    Amplitude amplitude;
};

int with_script(const Options& opt,
                const std::function<int(const std::vector<ExprPtr>&)>& body) {
    JsonValue root = report_shell();
    std::string text;
    try {
        text = read_script(opt.script);
    } catch (const std::exception& err) {
        root.members["errors"].push(
            error_object("io_error", err.what(), 0, 0, opt.script));
        emit(root);
        return 2;
    }
    std::vector<ExprPtr> program;
    try {
        program = parse_text(text);
    } catch (const ScriptError& err) {
        root.members["errors"].push(
            error_object("parse_error", err.what(), err.line, err.column));
        emit(root);
        return 2;
    }
    return body(program);
}

int cmd_eval(const Options& opt) {
    return with_script(opt, [&](const std::vector<ExprPtr>& program) {
        JsonValue root = report_shell();
        EvalConfig cfg = config_of(opt);
        std::vector<EvalOutput> outputs;
        try {
            outputs = evaluate(program, cfg);
        } catch (const ScriptError& err) {
            root.members["errors"].push(
                error_object("engine_error", err.what(), err.line, err.column));
            emit(root);
            return 3;
        } catch (const EngineError& err) {
            root.members["errors"].push(error_object("engine_error", err.what()));
            emit(root);
            return 3;
        }
        for (const auto& out : outputs) {
            JsonValue entry = JsonValue::object();
            entry.set("result", json_of_result(out.result));
            entry.set("statement", JsonValue::integer_value(out.statement));
            root.members["results"].push(std::move(entry));
        }
        emit(root);
        return 0;
    });
}

int cmd_verify(const Options& opt) {
    return with_script(opt, [&](const std::vector<ExprPtr>& program) {
        JsonValue root = report_shell();
        EvalConfig cfg = config_of(opt);
        std::vector<CapturedBraKet> captures;
        try {
            evaluate(program, cfg,
                     [&](const State& lhs, const State& rhs, const Amplitude& amp) {
                         captures.push_back({lhs, rhs, amp});
                     });
        } catch (const ScriptError& err) {
            root.members["errors"].push(
                error_object("engine_error", err.what(), err.line, err.column));
            emit(root);
            return 3;
        } catch (const EngineError& err) {
            root.members["errors"].push(error_object("engine_error", err.what()));
            emit(root);
            return 3;
        }

        bool any_fail = false;
        for (size_t i = 0; i < captures.size(); ++i) {
            const auto& cap = captures[i];
            JsonValue entry = JsonValue::object();
            entry.set("index", JsonValue::integer_value(static_cast<long long>(i)));
            entry.set("tol", JsonValue::real(opt.tol));

            Amplitude symbolic = cap.amplitude;
            if (opt.perturb != 0.0 && symbolic.is_finite()) {
                symbolic.value += Complex(opt.perturb);
            }
            entry.set("symbolic", json_of_amplitude(symbolic));

            auto skip = [&](const std::string& status, const std::string& note) {
                entry.set("status", JsonValue::string(status));
                root.members["warnings"].push(JsonValue::string(
                    "check " + std::to_string(i) + ": " + note));
            };

            if (!symbolic.is_finite()) {
                skip("skipped-delta-normalized",
                     "delta-normalized amplitude has no numeric counterpart");
                root.members["results"].push(std::move(entry));
                continue;
            }

            State integrand = multiply_pointwise(conjugate(cap.lhs), cap.rhs, cfg);
            bool has_delta = false;
            for (const auto& t : integrand.terms) {
                has_delta = has_delta || !t.deltas.empty();
            }
            std::optional<Complex> numeric;
            std::string divergent_note;
            try {
                if (integrand.arity == 0) {
                    numeric = evaluate_state(integrand, {});
                } else if (has_delta) {
                    skip("skipped-delta-integrand",
                         "integrand carries a delta factor; quadrature does not "
                         "apply");
                } else if (integrand.arity == 1) {
                    numeric = numeric_integrate(integrand, cfg, 0.0).value;
                } else if (integrand.arity == 2) {
                    numeric = numeric_integrate_2d(integrand, cfg, 0.0).value;
                } else {
                    skip("skipped-arity",
                         "quadrature handles at most two variables");
                }
            } catch (const NoConvergence& err) {
                divergent_note = err.what();
            }

            if (!numeric && !divergent_note.empty() && !opt.eps_sweep.empty() &&
                !has_delta && integrand.arity >= 1 && integrand.arity <= 2) {
                try {
                    std::vector<std::pair<double, Complex>> samples;
                    for (double eps : opt.eps_sweep) {
                        Complex v = integrand.arity == 1
                                        ? numeric_integrate(integrand, cfg, eps).value
                                        : numeric_integrate_2d(integrand, cfg, eps)
                                              .value;
                        samples.emplace_back(eps, v);
                    }
                    numeric = eps_extrapolate(samples);
                    entry.set("eps_extrapolated", JsonValue::boolean_value(true));
                } catch (const EngineError& err) {
                    divergent_note = err.what();
                }
            }

            if (numeric) {
                ComparisonReport cmp = compare_amplitude(symbolic, *numeric, opt.tol);
                entry.set("abs_deviation", JsonValue::real(cmp.abs_deviation));
                entry.set("numeric", json_of_complex(*numeric));
                entry.set("rel_deviation", JsonValue::real(cmp.rel_deviation));
                entry.set("status", JsonValue::string(cmp.pass ? "pass" : "fail"));
                any_fail = any_fail || !cmp.pass;
            } else if (!divergent_note.empty()) {
                skip("skipped-divergent",
                     "no eps sweep given for an oscillatory-divergent integral (" +
                         divergent_note + ")");
            }
            root.members["results"].push(std::move(entry));
        }
        emit(root);
        return any_fail ? 1 : 0;
    });
}

int cmd_sweep(const Options& opt) {
    return with_script(opt, [&](const std::vector<ExprPtr>& program) {
        JsonValue root = report_shell();
        EvalConfig cfg = config_of(opt);
        std::vector<CapturedBraKet> captures;
        try {
            evaluate(program, cfg,
                     [&](const State& lhs, const State& rhs, const Amplitude& amp) {
                         captures.push_back({lhs, rhs, amp});
                     });
        } catch (const ScriptError& err) {
            if (opt.json_output) {
                root.members["errors"].push(
                    error_object("engine_error", err.what(), err.line, err.column));
                emit(root);
            } else {
                std::cerr << "error: " << err.what() << "\n";
            }
            return 3;
        } catch (const EngineError& err) {
            if (opt.json_output) {
                root.members["errors"].push(
                    error_object("engine_error", err.what()));
                emit(root);
            } else {
                std::cerr << "error: " << err.what() << "\n";
            }
            return 3;
        }

        std::vector<ConvergenceRow> rows;
        std::vector<std::string> warnings;
        for (size_t i = 0; i < captures.size(); ++i) {
            const auto& cap = captures[i];
            if (cap.lhs.rigging != Rigging::Proper ||
                cap.rhs.rigging != Rigging::Proper || cap.lhs.arity != 1 ||
                cap.rhs.arity != 1) {
                warnings.push_back("bra-ket " + std::to_string(i) +
                                   " skipped: needs Proper arity-1 states");
                continue;
            }
            auto report = convergence_report(cap.lhs, cap.rhs, opt.lattice_sizes,
                                             cfg);
            for (const auto& row : report) {
                if (!row.resolved) {
                    warnings.push_back("bra-ket " + std::to_string(i) + " at N=" +
                                       std::to_string(row.n) +
                                       " is under-resolved (width < 4*spacing)");
                }
                rows.push_back(row);
            }
        }

        if (opt.json_output) {
            for (const auto& row : rows) {
                JsonValue r = JsonValue::object();
                r.set("N", JsonValue::integer_value(row.n));
                r.set("abs_error", JsonValue::real(row.abs_error));
                r.set("discrete", json_of_complex(row.discrete_value));
                r.set("resolved", JsonValue::boolean_value(row.resolved));
                r.set("symbolic", json_of_complex(row.symbolic_value));
                root.members["results"].push(std::move(r));
            }
            for (const auto& w : warnings) {
                root.members["warnings"].push(JsonValue::string(w));
            }
            emit(root);
        } else {
            std::cout << csv_of_convergence(rows);
            for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
        }
        return 0;
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Symbolic bra-ket calculus over quadratic-phase states"};
    app.require_subcommand(1);

    Options opt;
    std::string config_path;
    std::string eps_text;
    std::string sizes_text;

    app.add_option("--hbar", opt.hbar, "Planck constant (default 1)");
    app.add_option("--eq-tol", opt.eq_tol, "structural equality tolerance");
    app.add_option("--max-degree", opt.max_degree, "polynomial degree cap");
    app.add_option("--tol", opt.tol, "verification tolerance (default 1e-6)");
    app.add_option("--eps-sweep", eps_text,
                   "comma list of damping eps values for oscillatory checks");
    app.add_option("--N", sizes_text, "comma list of lattice sizes");
    app.add_option("--config", config_path, "key=value config file");
    app.add_flag("--json", opt.json_output, "JSON output (sweep)");
    app.add_flag("--csv", opt.csv_output, "CSV output (sweep; default)");
    app.add_option("--perturb", opt.perturb, "offset symbolic values (testing)")
        ->group("");

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a script");
    auto* verify_cmd =
        app.add_subcommand("verify", "check bra-kets against the oracle");
    auto* sweep_cmd =
        app.add_subcommand("sweep", "lattice convergence of bra-kets");
    for (auto* cmd : {eval_cmd, verify_cmd, sweep_cmd}) {
        cmd->add_option("script", opt.script, "path to a .dcl script")
            ->required();
    }

    CLI11_PARSE(app, argc, argv);

    // Precedence: defaults < DCL_CONFIG < --config < explicit flags.
    Options from_flags = opt;
    try {
        if (const char* env = std::getenv("DCL_CONFIG")) {
            apply_config_file(env, opt, false);
        }
        if (!config_path.empty()) apply_config_file(config_path, opt, true);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    }
    if (app.count("--hbar")) opt.hbar = from_flags.hbar;
    if (app.count("--eq-tol")) opt.eq_tol = from_flags.eq_tol;
    if (app.count("--max-degree")) opt.max_degree = from_flags.max_degree;
    if (app.count("--tol")) opt.tol = from_flags.tol;
    if (!eps_text.empty()) opt.eps_sweep = parse_double_list(eps_text);
    if (!sizes_text.empty()) opt.lattice_sizes = parse_int_list(sizes_text);

    try {
        if (app.got_subcommand(eval_cmd)) return cmd_eval(opt);
        if (app.got_subcommand(verify_cmd)) return cmd_verify(opt);
        if (app.got_subcommand(sweep_cmd)) return cmd_sweep(opt);
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
    return 0;
}
