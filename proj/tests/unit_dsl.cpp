#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dcl/dsl.hpp"
#include "dcl/quantifier.hpp"
#include "dcl/serialize.hpp"
#include "test_util.hpp"

using namespace dcl;
using dcl::testing::approx;

namespace {

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string render(const std::vector<EvalOutput>& outputs) {
    JsonValue arr = JsonValue::array();
    for (const auto& out : outputs) arr.push(json_of_result(out.result));
    return arr.dump();
}

}  // namespace

TEST_CASE("tokenizing a bra-ket") {
    auto tokens = tokenize("<p(1)|p(2)>");
    std::vector<TokenKind> kinds;
    for (const auto& t : tokens) kinds.push_back(t.kind);
    std::vector<TokenKind> expected = {
        TokenKind::BraOpen, TokenKind::Ident,  TokenKind::LParen,
        TokenKind::Number,  TokenKind::RParen, TokenKind::Pipe,
        TokenKind::Ident,   TokenKind::LParen, TokenKind::Number,
        TokenKind::RParen,  TokenKind::AngleClose, TokenKind::EndOfInput};
    CHECK(kinds == expected);
    CHECK(tokens[1].lexeme == "p");
    CHECK(tokens[3].number == 1.0);
}

TEST_CASE("token positions increase strictly") {
    auto tokens = tokenize("let g = |gauss(0, 1, 0)>;\n<g|g>");
    for (size_t i = 1; i + 1 < tokens.size(); ++i) {
        bool later = tokens[i].pos.line > tokens[i - 1].pos.line ||
                     (tokens[i].pos.line == tokens[i - 1].pos.line &&
                      tokens[i].pos.column > tokens[i - 1].pos.column);
        CHECK(later);
    }
}

TEST_CASE("empty input tokenizes to the end marker only") {
    auto tokens = tokenize("");
    REQUIRE(tokens.size() == 1);
    CHECK(tokens[0].kind == TokenKind::EndOfInput);
}

TEST_CASE("a ket opens after an expression-start pipe") {
    auto tokens = tokenize("|p(1)>");
    CHECK(tokens[0].kind == TokenKind::KetOpen);
}

TEST_CASE("stray glyphs raise a positioned lex error") {
    try {
        tokenize("|p(1\xe2\x9f\xa9");  // non-ascii closing bracket
        FAIL("expected LexError");
    } catch (const LexError& err) {
        CHECK(err.line == 1);
        CHECK(err.column == 5);
    }
}

TEST_CASE("comments are skipped") {
    auto tokens = tokenize("# heading\n<g|g> # trailing\n");
    CHECK(tokens.front().kind == TokenKind::BraOpen);
    CHECK(tokens.front().pos.line == 2);
}

TEST_CASE("parsing a let and a bra-ket") {
    auto program = parse_text("let g = |gauss(0,1,0)> ; <g|g>");
    REQUIRE(program.size() == 2);
    CHECK(program[0]->kind == Expr::Kind::Let);
    CHECK(program[0]->name == "g");
    CHECK(program[0]->children[0]->kind == Expr::Kind::Ket);
    CHECK(program[1]->kind == Expr::Kind::BraKet);
    CHECK(program[1]->children[0]->kind == Expr::Kind::Var);
    CHECK(program[1]->children[1]->kind == Expr::Kind::Var);
}

TEST_CASE("parsing the quantifier") {
    auto program = parse_text("E x . |p(1)>");
    REQUIRE(program.size() == 1);
    CHECK(program[0]->kind == Expr::Kind::Integrate);
    CHECK(program[0]->name == "x");
    CHECK(program[0]->children[0]->kind == Expr::Kind::Ket);
    CHECK(program[0]->children[0]->name == "p");
}

TEST_CASE("a dangling bra is a parse error") {
    try {
        parse_text("<p(1)|");
        FAIL("expected ParseError");
    } catch (const ParseError& err) {
        CHECK(err.line == 1);
        CHECK(err.column == 7);
    }
}

TEST_CASE("kets may follow operator parentheses") {
    auto program = parse_text("evolve(harmonic(1,1), 0.5) |gauss(0,1,0)>");
    REQUIRE(program.size() == 1);
    CHECK(program[0]->kind == Expr::Kind::Apply);
    CHECK(program[0]->op.kind == OpExpr::Kind::Evolve);
    CHECK(program[0]->children[0]->kind == Expr::Kind::Ket);
}

TEST_CASE("pi literals") {
    auto program = parse_text("W(2pi, pi/4) |gauss(0,1,0)>; pi");
    REQUIRE(program.size() == 2);
    CHECK(program[0]->op.a == doctest::Approx(2.0 * std::numbers::pi));
    CHECK(program[0]->op.b == doctest::Approx(std::numbers::pi / 4.0));
    CHECK(program[1]->number == doctest::Approx(std::numbers::pi));
}

TEST_CASE("scales and sums parse into the expected nodes") {
    auto program = parse_text("let g = |gauss(0,1,0)>; 2 * g + -1 * g");
    REQUIRE(program.size() == 2);
    const Expr& addition = *program[1];
    CHECK(addition.kind == Expr::Kind::Add);
    CHECK(addition.children[0]->kind == Expr::Kind::Scale);
    CHECK(addition.children[0]->number == 2.0);
    CHECK(addition.children[1]->kind == Expr::Kind::Scale);
    CHECK(addition.children[1]->number == -1.0);
}

TEST_CASE("evaluating the kronecker pair") {
    auto outputs = evaluate(parse_text("<p(1)|p(2)>; <p(1)|p(1)>"));
    REQUIRE(outputs.size() == 2);
    REQUIRE(outputs[0].result.kind == EvalResult::Kind::AmplitudeV);
    CHECK(outputs[0].result.amplitude.is_finite());
    CHECK(outputs[0].result.amplitude.value == Complex(0.0));
    CHECK(outputs[1].result.amplitude.kind == Amplitude::Kind::DeltaNormalized);
}

TEST_CASE("evaluating probabilities and norms") {
    auto outputs =
        evaluate(parse_text("prob(|gauss(0,1,0)>, |gauss(0,1,0)>);"
                            "norm(|gauss(0,1,0)>)"));
    REQUIRE(outputs.size() == 2);
    CHECK(outputs[0].result.real == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(outputs[1].result.real == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluating a harmonic evolution") {
    auto outputs =
        evaluate(parse_text("evolve(harmonic(1,1), 0.5) |gauss(0,1,0)>"));
    REQUIRE(outputs.size() == 1);
    REQUIRE(outputs[0].result.kind == EvalResult::Kind::StateV);
    const State& s = outputs[0].result.state;
    State expected =
        scale(std::exp(Complex(0.0, -0.25)), gaussian_state(0.0, 1.0, 0.0));
    CHECK(states_close(s, expected, 1e-12));
}

TEST_CASE("unbound names carry their position") {
    try {
        evaluate(parse_text("let g = |gauss(0,1,0)>;\n<g|h>"));
        FAIL("expected EvalError");
    } catch (const EvalError& err) {
        CHECK(err.line == 2);
        CHECK(err.column == 4);
    }
}

TEST_CASE("engine errors are positioned") {
    try {
        evaluate(parse_text("norm(|p(1)>)"));
        FAIL("expected EvalError");
    } catch (const EvalError& err) {
        CHECK(err.line == 1);
        CHECK(err.column == 1);
    }
}

TEST_CASE("the inner product observer sees every bra-ket") {
    int count = 0;
    evaluate(parse_text("let g = |gauss(0,1,0)>; <g|g>; <g|g>; prob(g, g)"),
             EvalConfig(),
             [&](const State&, const State&, const Amplitude&) { ++count; });
    // prob() is not a bra-ket node; only the two explicit ones count.
    CHECK(count == 2);
}

TEST_CASE("script corpus round-trips and evaluates deterministically") {
    namespace fs = std::filesystem;
    fs::path dir(DCL_SCRIPTS_DIR);
    REQUIRE(fs::exists(dir));
    int script_count = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".dcl") continue;
        ++script_count;
        CAPTURE(entry.path().filename().string());
        std::string text = slurp(entry.path());

        auto first = parse_text(text);
        std::string printed = print_program(first);
        auto second = parse_text(printed);
        REQUIRE(first.size() == second.size());
        for (size_t i = 0; i < first.size(); ++i) {
            CHECK(expr_equal(*first[i], *second[i]));
        }

        std::string run1 = render(evaluate(first));
        std::string run2 = render(evaluate(parse_text(text)));
        CHECK(run1 == run2);
    }
    CHECK(script_count >= 20);
}
