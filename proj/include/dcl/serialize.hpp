#pragma once

#include <map>
#include <string>
#include <vector>

#include "dcl/algebra.hpp"
#include "dcl/dsl.hpp"
#include "dcl/lattice.hpp"

namespace dcl {

// Minimal JSON document with byte-stable output: keys are emitted in sorted
// order and every floating-point value is printed with 17 significant digits.
struct JsonValue {
    enum class Kind { Object, Array, String, Number, Integer, Bool, Null };
    Kind kind = Kind::Null;
    std::map<std::string, JsonValue> members;
    std::vector<JsonValue> elements;
    std::string text;
    double number = 0.0;
    long long integer = 0;
    bool boolean = false;

    static JsonValue object() { return with_kind(Kind::Object); }
    static JsonValue array() { return with_kind(Kind::Array); }
    static JsonValue string(std::string s) {
        JsonValue v = with_kind(Kind::String);
        v.text = std::move(s);
        return v;
    }
    static JsonValue real(double d) {
        JsonValue v = with_kind(Kind::Number);
        v.number = d;
        return v;
    }
    static JsonValue integer_value(long long i) {
        JsonValue v = with_kind(Kind::Integer);
        v.integer = i;
        return v;
    }
    static JsonValue boolean_value(bool b) {
        JsonValue v = with_kind(Kind::Bool);
        v.boolean = b;
        return v;
    }

    JsonValue& set(const std::string& key, JsonValue v) {
        members[key] = std::move(v);
        return *this;
    }
    JsonValue& push(JsonValue v) {
        elements.push_back(std::move(v));
        return *this;
    }
    std::string dump() const;

  private:
    static JsonValue with_kind(Kind k) {
        JsonValue v;
        v.kind = k;
        return v;
    }
};

std::string format_double(double v);  // %.17g

JsonValue json_of_complex(Complex z);
JsonValue json_of_state(const State& s);
JsonValue json_of_amplitude(const Amplitude& a);
JsonValue json_of_result(const EvalResult& r);

// CSV for convergence sweeps: fixed header, 17-significant-digit cells.
std::string csv_of_convergence(const std::vector<ConvergenceRow>& rows);

}  // namespace dcl
