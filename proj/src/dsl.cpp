#include "dcl/dsl.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>

#include "dcl/quantifier.hpp"

namespace dcl {

namespace {

const std::set<std::string> kKeywords = {"let",  "E",        "W",    "P",
                                         "Q",    "evolve",   "free", "harmonic",
                                         "prob", "norm"};

bool ends_expression(TokenKind k) {
    return k == TokenKind::Number || k == TokenKind::Ident ||
           k == TokenKind::RParen || k == TokenKind::AngleClose;
}

}  // namespace

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    int line = 1;
    int column = 1;
    size_t i = 0;
    auto prev_kind = [&]() {
        return out.empty() ? TokenKind::EndOfInput : out.back().kind;
    };
    while (i < text.size()) {
        char c = text[i];
        SourcePos pos{line, column};
        if (c == '\n') {
            ++line;
            column = 1;
            ++i;
            continue;
        }
        if (c == ' ' || c == '\t' || c == '\r') {
            ++column;
            ++i;
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') {
                ++i;
                ++column;
            }
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) ||
            (c == '.' && i + 1 < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[i + 1])))) {
            size_t start = i;
            bool seen_dot = false;
            bool seen_exp = false;
            while (i < text.size()) {
                char d = text[i];
                if (std::isdigit(static_cast<unsigned char>(d))) {
                    ++i;
                } else if (d == '.' && !seen_dot && !seen_exp) {
                    seen_dot = true;
                    ++i;
                } else if ((d == 'e' || d == 'E') && !seen_exp && i > start &&
                           i + 1 < text.size() &&
                           (std::isdigit(static_cast<unsigned char>(text[i + 1])) ||
                            ((text[i + 1] == '+' || text[i + 1] == '-') &&
                             i + 2 < text.size() &&
                             std::isdigit(
                                 static_cast<unsigned char>(text[i + 2]))))) {
                    seen_exp = true;
                    ++i;
                    if (text[i] == '+' || text[i] == '-') ++i;
                } else {
                    break;
                }
            }
            Token t;
            t.kind = TokenKind::Number;
            t.lexeme = text.substr(start, i - start);
            t.number = std::stod(t.lexeme);
            t.pos = pos;
            column += static_cast<int>(i - start);
            out.push_back(std::move(t));
            continue;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) ||
                    text[i] == '_')) {
                ++i;
            }
            Token t;
            t.lexeme = text.substr(start, i - start);
            t.kind = kKeywords.count(t.lexeme) ? TokenKind::Keyword
                                               : TokenKind::Ident;
            t.pos = pos;
            column += static_cast<int>(i - start);
            out.push_back(std::move(t));
            continue;
        }
        TokenKind kind;
        switch (c) {
            case '<': kind = TokenKind::BraOpen; break;
            case '>': kind = TokenKind::AngleClose; break;
            case '|':
                kind = ends_expression(prev_kind()) ? TokenKind::Pipe
                                                    : TokenKind::KetOpen;
                break;
            case '(': kind = TokenKind::LParen; break;
            case ')': kind = TokenKind::RParen; break;
            case ',': kind = TokenKind::Comma; break;
            case '.': kind = TokenKind::Dot; break;
            case '=': kind = TokenKind::Equals; break;
            case '+': kind = TokenKind::Plus; break;
            case '-': kind = TokenKind::Minus; break;
            case '*': kind = TokenKind::Star; break;
            case '/': kind = TokenKind::Slash; break;
            case ';': kind = TokenKind::Semicolon; break;
            default:
                throw LexError(std::string("unexpected character '") +
                                   (std::isprint(static_cast<unsigned char>(c))
                                        ? std::string(1, c)
                                        : "\\x" + std::to_string(int(
                                              static_cast<unsigned char>(c)))) +
                                   "'",
                               line, column);
        }
        Token t;
        t.kind = kind;
        t.lexeme = std::string(1, c);
        t.pos = pos;
        out.push_back(std::move(t));
        ++column;
        ++i;
    }
    Token end;
    end.kind = TokenKind::EndOfInput;
    end.pos = {line, column};
    out.push_back(std::move(end));
    return out;
}

// --- parser -----------------------------------------------------------------

namespace {

class Parser {
  public:
    explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    std::vector<ExprPtr> program() {
        std::vector<ExprPtr> stmts;
        if (peek().kind == TokenKind::EndOfInput) return stmts;
        stmts.push_back(statement());
        while (peek().kind == TokenKind::Semicolon) {
            advance();
            if (peek().kind == TokenKind::EndOfInput) break;  // trailing ';'
            stmts.push_back(statement());
        }
        expect(TokenKind::EndOfInput, "';' or end of script");
        return stmts;
    }

  private:
    const Token& peek(int ahead = 0) const {
        size_t i = std::min(pos_ + ahead, tokens_.size() - 1);
        return tokens_[i];
    }
    const Token& advance() { return tokens_[pos_++]; }
    bool match(TokenKind k) {
        if (peek().kind == k) {
            advance();
            return true;
        }
        return false;
    }
    bool match_keyword(const std::string& kw) {
        if (peek().kind == TokenKind::Keyword && peek().lexeme == kw) {
            advance();
            return true;
        }
        return false;
    }
    const Token& expect(TokenKind k, const std::string& what) {
        if (peek().kind != k) {
            throw ParseError("expected " + what + ", found '" + describe(peek()) +
                                 "'",
                             peek().pos.line, peek().pos.column);
        }
        return advance();
    }
    static std::string describe(const Token& t) {
        return t.kind == TokenKind::EndOfInput ? "end of script" : t.lexeme;
    }

    ExprPtr statement() {
        if (match_keyword("let")) {
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Let;
            e->pos = tokens_[pos_ - 1].pos;
            e->name = expect(TokenKind::Ident, "a binding name").lexeme;
            expect(TokenKind::Equals, "'='");
            e->children.push_back(expression());
            return e;
        }
        return expression();
    }

    ExprPtr expression() { return sum(); }

    ExprPtr sum() {
        SourcePos pos = peek().pos;
        // A leading minus negates the expression unless it opens a signed
        // numeric literal, which product() consumes whole.
        bool negated = false;
        if (peek().kind == TokenKind::Minus && !starts_number()) {
            advance();
            negated = true;
        }
        ExprPtr lhs = product();
        if (negated) lhs = make_scale(-1.0, std::move(lhs), pos);
        while (peek().kind == TokenKind::Plus || peek().kind == TokenKind::Minus) {
            bool minus = advance().kind == TokenKind::Minus;
            SourcePos rpos = peek().pos;
            ExprPtr rhs = product();
            if (minus) rhs = make_scale(-1.0, std::move(rhs), rpos);
            auto node = std::make_unique<Expr>();
            node->kind = Expr::Kind::Add;
            node->pos = pos;
            node->children.push_back(std::move(lhs));
            node->children.push_back(std::move(rhs));
            lhs = std::move(node);
        }
        return lhs;
    }

    // number-literal "*" product | number-literal | primary
    ExprPtr product() {
        if (starts_number()) {
            SourcePos pos = peek().pos;
            if (scan_past_number_is_star()) {
                double factor = number("a scale factor");
                expect(TokenKind::Star, "'*'");
                return make_scale(factor, product(), pos);
            }
            auto e = std::make_unique<Expr>();
            e->kind = Expr::Kind::Number;
            e->pos = pos;
            e->number = number("a number");
            return e;
        }
        return primary();
    }

    ExprPtr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case TokenKind::BraOpen: return braket();
            // A '|' in expression-start position opens a ket even when the
            // lexer classified it as a separator (e.g. right after an
            // operator's closing parenthesis).
            case TokenKind::KetOpen:
            case TokenKind::Pipe:
                return ket();
            case TokenKind::LParen: {
                advance();
                ExprPtr e = expression();
                expect(TokenKind::RParen, "')'");
                return e;
            }
            case TokenKind::Keyword: {
                if (t.lexeme == "E") return integrate();
                if (t.lexeme == "prob" || t.lexeme == "norm") return call();
                if (t.lexeme == "W" || t.lexeme == "P" || t.lexeme == "Q" ||
                    t.lexeme == "evolve") {
                    return apply();
                }
                throw ParseError("unexpected keyword '" + t.lexeme + "'",
                                 t.pos.line, t.pos.column);
            }
            case TokenKind::Ident: {
                advance();
                if (peek().kind == TokenKind::LParen) {
                    auto e = std::make_unique<Expr>();
                    e->kind = Expr::Kind::Ket;
                    e->pos = t.pos;
                    e->name = t.lexeme;
                    e->args = arg_list();
                    return e;
                }
                if (t.lexeme == "pi") {
                    auto e = std::make_unique<Expr>();
                    e->kind = Expr::Kind::Number;
                    e->pos = t.pos;
                    e->number = pi_suffix(std::numbers::pi);
                    return e;
                }
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::Var;
                e->pos = t.pos;
                e->name = t.lexeme;
                return e;
            }
            case TokenKind::Number: {
                auto e = std::make_unique<Expr>();
                e->kind = Expr::Kind::Number;
                e->pos = t.pos;
                e->number = number("a number");
                return e;
            }
            default:
                throw ParseError("expected an expression, found '" + describe(t) +
                                     "'",
                                 t.pos.line, t.pos.column);
        }
    }

    ExprPtr braket() {
        SourcePos pos = expect(TokenKind::BraOpen, "'<'").pos;
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::BraKet;
        e->pos = pos;
        e->children.push_back(expression());
        expect(TokenKind::Pipe, "'|'");
        e->children.push_back(expression());
        expect(TokenKind::AngleClose, "'>' closing the bra-ket");
        return e;
    }

    ExprPtr ket() {
        if (peek().kind != TokenKind::KetOpen && peek().kind != TokenKind::Pipe) {
            throw ParseError("expected '|' opening a ket, found '" +
                                 describe(peek()) + "'",
                             peek().pos.line, peek().pos.column);
        }
        SourcePos pos = advance().pos;
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Ket;
        e->pos = pos;
        e->name = expect(TokenKind::Ident, "a state constructor").lexeme;
        e->args = arg_list();
        expect(TokenKind::AngleClose, "'>' closing the ket");
        return e;
    }

    ExprPtr integrate() {
        SourcePos pos = peek().pos;
        advance();  // E
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Integrate;
        e->pos = pos;
        e->name = expect(TokenKind::Ident, "a quantifier variable").lexeme;
        expect(TokenKind::Dot, "'.'");
        e->children.push_back(expression());
        return e;
    }

    ExprPtr call() {
        const Token& kw = advance();
        auto e = std::make_unique<Expr>();
        e->pos = kw.pos;
        expect(TokenKind::LParen, "'('");
        if (kw.lexeme == "prob") {
            e->kind = Expr::Kind::Prob;
            e->children.push_back(expression());
            expect(TokenKind::Comma, "','");
            e->children.push_back(expression());
        } else {
            e->kind = Expr::Kind::Norm;
            e->children.push_back(expression());
        }
        expect(TokenKind::RParen, "')'");
        return e;
    }

    ExprPtr apply() {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Apply;
        e->op = opexpr();
        e->pos = e->op.pos;
        e->children.push_back(primary());
        return e;
    }

    OpExpr opexpr() {
        const Token& kw = advance();
        OpExpr op;
        op.pos = kw.pos;
        if (kw.lexeme == "P") {
            op.kind = OpExpr::Kind::MomentumOp;
            return op;
        }
        if (kw.lexeme == "Q") {
            op.kind = OpExpr::Kind::PositionOp;
            return op;
        }
        if (kw.lexeme == "W") {
            op.kind = OpExpr::Kind::Weyl;
            expect(TokenKind::LParen, "'('");
            op.a = number("the translation parameter");
            expect(TokenKind::Comma, "','");
            op.b = number("the modulation parameter");
            expect(TokenKind::RParen, "')'");
            return op;
        }
        op.kind = OpExpr::Kind::Evolve;
        expect(TokenKind::LParen, "'('");
        const Token& ham = peek();
        if (!(ham.kind == TokenKind::Keyword &&
              (ham.lexeme == "free" || ham.lexeme == "harmonic"))) {
            throw ParseError("expected 'free' or 'harmonic'", ham.pos.line,
                             ham.pos.column);
        }
        advance();
        std::vector<double> args = arg_list();
        if (ham.lexeme == "free") {
            if (args.size() != 1) {
                throw ParseError("free(m) takes one argument", ham.pos.line,
                                 ham.pos.column);
            }
            op.hamiltonian = HamiltonianSpec::free_particle(args[0]);
        } else {
            if (args.size() != 2) {
                throw ParseError("harmonic(m, w) takes two arguments",
                                 ham.pos.line, ham.pos.column);
            }
            op.hamiltonian = HamiltonianSpec::harmonic(args[0], args[1]);
        }
        expect(TokenKind::Comma, "','");
        op.time = number("the evolution time");
        expect(TokenKind::RParen, "')'");
        return op;
    }

    std::vector<double> arg_list() {
        expect(TokenKind::LParen, "'('");
        std::vector<double> args;
        if (peek().kind != TokenKind::RParen) {
            args.push_back(number("an argument"));
            while (match(TokenKind::Comma)) {
                args.push_back(number("an argument"));
            }
        }
        expect(TokenKind::RParen, "')'");
        return args;
    }

    bool starts_number() const {
        const Token& t = peek();
        if (t.kind == TokenKind::Number) return true;
        if (t.kind == TokenKind::Minus) {
            const Token& n = peek(1);
            return n.kind == TokenKind::Number ||
                   (n.kind == TokenKind::Ident && n.lexeme == "pi");
        }
        return t.kind == TokenKind::Ident && t.lexeme == "pi";
    }

    // Distinguishes "2 * expr" (a scale) from the number atom "2".
    bool scan_past_number_is_star() const {
        size_t i = pos_;
        auto kind_at = [&](size_t k) {
            return tokens_[std::min(k, tokens_.size() - 1)].kind;
        };
        auto is_pi = [&](size_t k) {
            const Token& t = tokens_[std::min(k, tokens_.size() - 1)];
            return t.kind == TokenKind::Ident && t.lexeme == "pi";
        };
        if (kind_at(i) == TokenKind::Minus) ++i;
        if (kind_at(i) == TokenKind::Number) {
            ++i;
            if (is_pi(i)) ++i;
        } else if (is_pi(i)) {
            ++i;
        } else {
            return false;
        }
        if (kind_at(i) == TokenKind::Slash && kind_at(i + 1) == TokenKind::Number) {
            i += 2;
        }
        return kind_at(i) == TokenKind::Star;
    }

    // num := ["-"] (number ["pi"] | "pi") ["/" number]
    double number(const std::string& what) {
        double sign = 1.0;
        if (match(TokenKind::Minus)) sign = -1.0;
        const Token& t = peek();
        double value;
        if (t.kind == TokenKind::Number) {
            advance();
            value = t.number;
            if (peek().kind == TokenKind::Ident && peek().lexeme == "pi") {
                advance();
                value *= std::numbers::pi;
            }
        } else if (t.kind == TokenKind::Ident && t.lexeme == "pi") {
            advance();
            value = std::numbers::pi;
        } else {
            throw ParseError("expected " + what, t.pos.line, t.pos.column);
        }
        return sign * pi_suffix(value);
    }

    // Shared "/ denominator" tail of numeric literals.
    double pi_suffix(double value) {
        if (peek().kind == TokenKind::Slash &&
            peek(1).kind == TokenKind::Number) {
            advance();
            const Token& d = advance();
            if (d.number == 0.0) {
                throw ParseError("division by zero in a numeric literal",
                                 d.pos.line, d.pos.column);
            }
            value /= d.number;
        }
        return value;
    }

    ExprPtr make_scale(double factor, ExprPtr child, SourcePos pos) {
        auto e = std::make_unique<Expr>();
        e->kind = Expr::Kind::Scale;
        e->pos = pos;
        e->number = factor;
        e->children.push_back(std::move(child));
        return e;
    }

    std::vector<Token> tokens_;
    size_t pos_ = 0;
};

}  // namespace

std::vector<ExprPtr> parse(std::vector<Token> tokens) {
    return Parser(std::move(tokens)).program();
}

std::vector<ExprPtr> parse_text(const std::string& text) {
    return parse(tokenize(text));
}

// --- printer -----------------------------------------------------------------

namespace {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool self_delimiting(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Ket:
        case Expr::Kind::BraKet:
        case Expr::Kind::Var:
        case Expr::Kind::Number:
        case Expr::Kind::Prob:
        case Expr::Kind::Norm:
            return true;
        default:
            return false;
    }
}

std::string print_atomish(const Expr& e) {
    if (self_delimiting(e)) return print_expr(e);
    return "(" + print_expr(e) + ")";
}

std::string print_op(const OpExpr& op) {
    switch (op.kind) {
        case OpExpr::Kind::MomentumOp: return "P";
        case OpExpr::Kind::PositionOp: return "Q";
        case OpExpr::Kind::Weyl:
            return "W(" + format_number(op.a) + ", " + format_number(op.b) + ")";
        case OpExpr::Kind::Evolve: {
            std::string ham =
                op.hamiltonian.kind == HamiltonianSpec::Kind::Free
                    ? "free(" + format_number(op.hamiltonian.mass) + ")"
                    : "harmonic(" + format_number(op.hamiltonian.mass) + ", " +
                          format_number(op.hamiltonian.omega) + ")";
            return "evolve(" + ham + ", " + format_number(op.time) + ")";
        }
    }
    return {};
}

}  // namespace

std::string print_expr(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Number:
            return format_number(e.number);
        case Expr::Kind::Var:
            return e.name;
        case Expr::Kind::Ket: {
            std::string out = "|" + e.name + "(";
            for (size_t i = 0; i < e.args.size(); ++i) {
                if (i) out += ", ";
                out += format_number(e.args[i]);
            }
            return out + ")>";
        }
        case Expr::Kind::BraKet:
            return "<" + print_expr(*e.children[0]) + "|" +
                   print_expr(*e.children[1]) + ">";
        case Expr::Kind::Apply:
            return print_op(e.op) + " " + print_atomish(*e.children[0]);
        case Expr::Kind::Integrate:
            return "E " + e.name + " . " + print_expr(*e.children[0]);
        case Expr::Kind::Prob:
            return "prob(" + print_expr(*e.children[0]) + ", " +
                   print_expr(*e.children[1]) + ")";
        case Expr::Kind::Norm:
            return "norm(" + print_expr(*e.children[0]) + ")";
        case Expr::Kind::Scale:
            return format_number(e.number) + " * " + print_atomish(*e.children[0]);
        case Expr::Kind::Add:
            return print_atomish(*e.children[0]) + " + " +
                   print_atomish(*e.children[1]);
        case Expr::Kind::Let:
            return "let " + e.name + " = " + print_expr(*e.children[0]);
    }
    return {};
}

std::string print_program(const std::vector<ExprPtr>& program) {
    std::string out;
    for (size_t i = 0; i < program.size(); ++i) {
        if (i) out += ";\n";
        out += print_expr(*program[i]);
    }
    out += "\n";
    return out;
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.name != b.name || a.args != b.args ||
        a.number != b.number || a.children.size() != b.children.size()) {
        return false;
    }
    if (a.kind == Expr::Kind::Apply) {
        if (a.op.kind != b.op.kind || a.op.a != b.op.a || a.op.b != b.op.b ||
            a.op.time != b.op.time ||
            a.op.hamiltonian.kind != b.op.hamiltonian.kind ||
            a.op.hamiltonian.mass != b.op.hamiltonian.mass ||
            a.op.hamiltonian.omega != b.op.hamiltonian.omega) {
            return false;
        }
    }
    for (size_t i = 0; i < a.children.size(); ++i) {
        if (!expr_equal(*a.children[i], *b.children[i])) return false;
    }
    return true;
}

// --- evaluator ----------------------------------------------------------------

namespace {

class Evaluator {
  public:
    Evaluator(const EvalConfig& cfg, const InnerProductObserver& observer)
        : cfg_(cfg), observer_(observer) {}

    EvalResult eval(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::Number: {
                EvalResult r;
                r.kind = EvalResult::Kind::RealV;
                r.real = e.number;
                return r;
            }
            case Expr::Kind::Var: {
                auto it = env_.find(e.name);
                if (it == env_.end()) {
                    throw EvalError("unbound name '" + e.name + "'", e.pos.line,
                                    e.pos.column);
                }
                return it->second;
            }
            case Expr::Kind::Ket: return make_ket(e);
            case Expr::Kind::BraKet: {
                State lhs = state_of(*e.children[0]);
                State rhs = state_of(*e.children[1]);
                Amplitude amp = engine([&] { return inner_product(lhs, rhs, cfg_); },
                                       e.pos);
                if (observer_) observer_(lhs, rhs, amp);
                EvalResult r;
                r.kind = EvalResult::Kind::AmplitudeV;
                r.amplitude = amp;
                return r;
            }
            case Expr::Kind::Apply: {
                State s = state_of(*e.children[0]);
                EvalResult r;
                r.kind = EvalResult::Kind::StateV;
                r.state = engine([&] { return apply(to_operator(e.op), s, cfg_); },
                                 e.pos);
                return r;
            }
            case Expr::Kind::Integrate: {
                State s = state_of(*e.children[0]);
                if (s.arity < 1) {
                    throw EvalError("cannot integrate an arity-0 state",
                                    e.pos.line, e.pos.column);
                }
                EvalResult r;
                r.kind = EvalResult::Kind::StateV;
                r.state = engine(
                    [&] { return integrate_var(s, s.arity - 1, cfg_); }, e.pos);
                return r;
            }
            case Expr::Kind::Prob: {
                State f = state_of(*e.children[0]);
                State psi = state_of(*e.children[1]);
                EvalResult r;
                r.kind = EvalResult::Kind::RealV;
                r.real = engine([&] { return probability(f, psi, cfg_); }, e.pos);
                return r;
            }
            case Expr::Kind::Norm: {
                State s = state_of(*e.children[0]);
                EvalResult r;
                r.kind = EvalResult::Kind::RealV;
                r.real = engine([&] { return state_norm(s, cfg_); }, e.pos);
                return r;
            }
            case Expr::Kind::Scale: {
                EvalResult child = eval(*e.children[0]);
                Complex c(e.number);
                switch (child.kind) {
                    case EvalResult::Kind::StateV:
                        child.state = engine([&] { return scale(c, child.state); },
                                             e.pos);
                        return child;
                    case EvalResult::Kind::AmplitudeV:
                        child.amplitude.value *= c;
                        return child;
                    case EvalResult::Kind::RealV:
                        child.real *= e.number;
                        return child;
                }
                break;
            }
            case Expr::Kind::Add: {
                EvalResult lhs = eval(*e.children[0]);
                EvalResult rhs = eval(*e.children[1]);
                if (lhs.kind != rhs.kind) {
                    throw EvalError("cannot add values of different kinds",
                                    e.pos.line, e.pos.column);
                }
                switch (lhs.kind) {
                    case EvalResult::Kind::StateV:
                        lhs.state =
                            engine([&] { return add(lhs.state, rhs.state); }, e.pos);
                        return lhs;
                    case EvalResult::Kind::AmplitudeV:
                        if (!lhs.amplitude.is_finite() ||
                            !rhs.amplitude.is_finite()) {
                            throw EvalError(
                                "cannot add delta-normalized amplitudes",
                                e.pos.line, e.pos.column);
                        }
                        lhs.amplitude.value += rhs.amplitude.value;
                        return lhs;
                    case EvalResult::Kind::RealV:
                        lhs.real += rhs.real;
                        return lhs;
                }
                break;
            }
            case Expr::Kind::Let: {
                env_[e.name] = eval(*e.children[0]);
                EvalResult r;
                r.kind = EvalResult::Kind::RealV;
                return r;  // placeholder; Let produces no output
            }
        }
        throw EvalError("unsupported expression", e.pos.line, e.pos.column);
    }

    std::map<std::string, EvalResult> env_;

  private:
    template <typename F>
    auto engine(F&& f, SourcePos pos) -> decltype(f()) {
        try {
            return f();
        } catch (const ScriptError&) {
            throw;
        } catch (const EngineError& err) {
            throw EvalError(err.what(), pos.line, pos.column);
        }
    }

    State state_of(const Expr& e) {
        EvalResult r = eval(e);
        if (r.kind != EvalResult::Kind::StateV) {
            throw EvalError("expected a state-valued expression", e.pos.line,
                            e.pos.column);
        }
        return r.state;
    }

    EvalResult make_ket(const Expr& e) {
        EvalResult r;
        r.kind = EvalResult::Kind::StateV;
        if (e.name == "p") {
            if (e.args.size() != 1) {
                throw EvalError("p(momentum) takes one argument", e.pos.line,
                                e.pos.column);
            }
            r.state = momentum_state(e.args[0]);
            return r;
        }
        if (e.name == "x") {
            if (e.args.size() != 1) {
                throw EvalError("x(position) takes one argument", e.pos.line,
                                e.pos.column);
            }
            r.state = position_state(e.args[0]);
            return r;
        }
        if (e.name == "gauss") {
            if (e.args.size() != 3) {
                throw EvalError("gauss(center, width, momentum) takes three "
                                "arguments",
                                e.pos.line, e.pos.column);
            }
            r.state = engine(
                [&] { return gaussian_state(e.args[0], e.args[1], e.args[2]); },
                e.pos);
            return r;
        }
        throw EvalError("unknown state constructor '" + e.name + "'", e.pos.line,
                        e.pos.column);
    }

    OperatorSpec to_operator(const OpExpr& op) {
        switch (op.kind) {
            case OpExpr::Kind::MomentumOp:
                // P = -i hbar d/dx
                return OperatorSpec::sum(
                    {{Complex(0.0, -cfg_.hbar), OperatorSpec::differentiate(0)}});
            case OpExpr::Kind::PositionOp:
                return OperatorSpec::multiply_var(0);
            case OpExpr::Kind::Weyl:
                // exp(iaP) exp(ibQ); exp(iaP) translates by a*hbar.
                return OperatorSpec::compose(
                    {OperatorSpec::translate(op.a * cfg_.hbar),
                     OperatorSpec::modulate(op.b)});
            case OpExpr::Kind::Evolve:
                return OperatorSpec::evolve_op(op.hamiltonian, op.time);
        }
        throw InvalidState("unknown operator expression");
    }

    EvalConfig cfg_;
    InnerProductObserver observer_;
};

}  // namespace

std::vector<EvalOutput> evaluate(const std::vector<ExprPtr>& program,
                                 const EvalConfig& cfg,
                                 const InnerProductObserver& observer) {
    Evaluator ev(cfg, observer);
    std::vector<EvalOutput> outputs;
    for (size_t i = 0; i < program.size(); ++i) {
        const Expr& stmt = *program[i];
        EvalResult r = ev.eval(stmt);
        if (stmt.kind != Expr::Kind::Let) {
            outputs.push_back({static_cast<int>(i), std::move(r)});
        }
    }
    return outputs;
}

}  // namespace dcl
