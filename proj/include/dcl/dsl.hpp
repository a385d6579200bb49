#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dcl/algebra.hpp"
#include "dcl/operators.hpp"

namespace dcl {

struct SourcePos {
    int line = 1;
    int column = 1;
};

enum class TokenKind {
    Ident,
    Number,
    KetOpen,
    BraOpen,
    AngleClose,
    Pipe,
    LParen,
    RParen,
    Comma,
    Dot,
    Equals,
    Keyword,
    Plus,
    Minus,
    Star,
    Slash,
    Semicolon,
    EndOfInput
};

struct Token {
    TokenKind kind = TokenKind::EndOfInput;
    std::string lexeme;
    double number = 0.0;
    SourcePos pos;
};

std::vector<Token> tokenize(const std::string& text);

// Operator syntax: W(a,b), P, Q, evolve(free(m)|harmonic(m,w), t).
struct OpExpr {
    enum class Kind { Weyl, MomentumOp, PositionOp, Evolve };
    Kind kind = Kind::MomentumOp;
    double a = 0.0;
    double b = 0.0;
    HamiltonianSpec hamiltonian;
    double time = 0.0;
    SourcePos pos;
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind {
        Ket,        // |name(args)>  or the bare constructor name(args)
        BraKet,     // <lhs|rhs>
        Apply,      // opexpr child
        Integrate,  // E var . child  (eliminates the last variable)
        Prob,       // prob(f, psi)
        Norm,       // norm(psi)
        Var,
        Scale,      // factor * child
        Add,        // lhs + rhs
        Let,        // let name = child
        Number
    };
    Kind kind = Kind::Number;
    SourcePos pos;
    std::string name;           // Ket constructor, Var, Integrate binder, Let
    std::vector<double> args;   // Ket arguments
    double number = 0.0;        // Number literal / Scale factor
    OpExpr op;                  // Apply
    std::vector<ExprPtr> children;
};

std::vector<ExprPtr> parse(std::vector<Token> tokens);
std::vector<ExprPtr> parse_text(const std::string& text);

std::string print_expr(const Expr& e);
std::string print_program(const std::vector<ExprPtr>& program);
bool expr_equal(const Expr& a, const Expr& b);

struct EvalResult {
    enum class Kind { StateV, AmplitudeV, RealV };
    Kind kind = Kind::RealV;
    State state;
    Amplitude amplitude;
    double real = 0.0;
};

struct EvalOutput {
    int statement = 0;  // index of the producing top-level statement
    EvalResult result;
};

// Called for every inner product the evaluator performs; verification
// commands capture the operand states through this hook.
using InnerProductObserver =
    std::function<void(const State&, const State&, const Amplitude&)>;

std::vector<EvalOutput> evaluate(const std::vector<ExprPtr>& program,
                                 const EvalConfig& cfg = EvalConfig(),
                                 const InnerProductObserver& observer = nullptr);

}  // namespace dcl
