#include "dcl/serialize.hpp"

#include <cstdio>

namespace dcl {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void escape_into(const std::string& s, std::string& out) {
    out += '"';
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void dump_into(const JsonValue& v, std::string& out) {
    switch (v.kind) {
        case JsonValue::Kind::Object: {
            out += '{';
            bool first = true;
            for (const auto& [key, member] : v.members) {
                if (!first) out += ',';
                first = false;
                escape_into(key, out);
                out += ':';
                dump_into(member, out);
            }
            out += '}';
            return;
        }
        case JsonValue::Kind::Array: {
            out += '[';
            for (size_t i = 0; i < v.elements.size(); ++i) {
                if (i) out += ',';
                dump_into(v.elements[i], out);
            }
            out += ']';
            return;
        }
        case JsonValue::Kind::String:
            escape_into(v.text, out);
            return;
        case JsonValue::Kind::Number:
            out += format_double(v.number);
            return;
        case JsonValue::Kind::Integer:
            out += std::to_string(v.integer);
            return;
        case JsonValue::Kind::Bool:
            out += v.boolean ? "true" : "false";
            return;
        case JsonValue::Kind::Null:
            out += "null";
            return;
    }
}

}  // namespace

std::string JsonValue::dump() const {
    std::string out;
    dump_into(*this, out);
    return out;
}

JsonValue json_of_complex(Complex z) {
    JsonValue v = JsonValue::object();
    v.set("im", JsonValue::real(z.imag()));
    v.set("re", JsonValue::real(z.real()));
    return v;
}

JsonValue json_of_state(const State& s) {
    JsonValue v = JsonValue::object();
    v.set("arity", JsonValue::integer_value(s.arity));
    v.set("kind", JsonValue::string("state"));
    v.set("rigging", JsonValue::string(s.rigging == Rigging::Proper
                                           ? "proper"
                                           : "generalized"));
    JsonValue terms = JsonValue::array();
    for (const auto& t : s.terms) {
        JsonValue term = JsonValue::object();
        JsonValue a = JsonValue::array();
        for (int i = 0; i < t.arity; ++i) {
            JsonValue row = JsonValue::array();
            for (int j = 0; j < t.arity; ++j) {
                row.push(json_of_complex(t.exponent.at(i, j)));
            }
            a.push(std::move(row));
        }
        term.set("A", std::move(a));
        JsonValue b = JsonValue::array();
        for (int i = 0; i < t.arity; ++i) b.push(json_of_complex(t.exponent.b[i]));
        term.set("b", std::move(b));
        term.set("c", json_of_complex(t.exponent.c));
        term.set("coeff", json_of_complex(t.coeff));
        JsonValue deltas = JsonValue::array();
        for (const auto& d : t.deltas) {
            JsonValue delta = JsonValue::object();
            JsonValue coeffs = JsonValue::object();
            for (const auto& [var, c] : d.form.coeffs) {
                coeffs.set(std::to_string(var), json_of_complex(c));
            }
            delta.set("coeffs", std::move(coeffs));
            delta.set("constant", json_of_complex(d.form.constant));
            deltas.push(std::move(delta));
        }
        term.set("deltas", std::move(deltas));
        JsonValue poly = JsonValue::array();
        for (const auto& [mi, c] : t.poly.monomials) {
            JsonValue mono = JsonValue::object();
            mono.set("coeff", json_of_complex(c));
            JsonValue degrees = JsonValue::array();
            for (int d : mi) degrees.push(JsonValue::integer_value(d));
            mono.set("degrees", std::move(degrees));
            poly.push(std::move(mono));
        }
        term.set("poly", std::move(poly));
        terms.push(std::move(term));
    }
    v.set("terms", std::move(terms));
    return v;
}

JsonValue json_of_amplitude(const Amplitude& a) {
    JsonValue v = JsonValue::object();
    v.set("im", JsonValue::real(a.value.imag()));
    v.set("kind", JsonValue::string("amplitude"));
    v.set("re", JsonValue::real(a.value.real()));
    v.set("variant", JsonValue::string(a.is_finite() ? "finite"
                                                     : "delta_normalized"));
    return v;
}

JsonValue json_of_result(const EvalResult& r) {
    switch (r.kind) {
        case EvalResult::Kind::StateV:
            return json_of_state(r.state);
        case EvalResult::Kind::AmplitudeV:
            return json_of_amplitude(r.amplitude);
        case EvalResult::Kind::RealV: {
            JsonValue v = JsonValue::object();
            v.set("kind", JsonValue::string("real"));
            v.set("value", JsonValue::real(r.real));
            return v;
        }
    }
    return JsonValue();
}

std::string csv_of_convergence(const std::vector<ConvergenceRow>& rows) {
    std::string out =
        "N,discrete_value_re,discrete_value_im,symbolic_value_re,"
        "symbolic_value_im,abs_error\n";
    for (const auto& r : rows) {
        out += std::to_string(r.n);
        out += ',';
        out += format_double(r.discrete_value.real());
        out += ',';
        out += format_double(r.discrete_value.imag());
        out += ',';
        out += format_double(r.symbolic_value.real());
        out += ',';
        out += format_double(r.symbolic_value.imag());
        out += ',';
        out += format_double(r.abs_error);
        out += '\n';
    }
    return out;
}

}  // namespace dcl
