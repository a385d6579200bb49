#pragma once

#include <stdexcept>
#include <string>

namespace dcl {

// Base for every failure the engine reports. Subtypes exist so callers can
// dispatch on the failure kind without parsing messages.
struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

#define DCL_ERROR_TYPE(Name)                                          \
    struct Name : EngineError {                                       \
        explicit Name(const std::string& msg) : EngineError(msg) {}   \
    }

DCL_ERROR_TYPE(ArityMismatch);
DCL_ERROR_TYPE(DegreeOverflow);
DCL_ERROR_TYPE(DependentDeltas);
DCL_ERROR_TYPE(SingularSubstitution);
DCL_ERROR_TYPE(NotNormalizable);
DCL_ERROR_TYPE(ZeroState);
DCL_ERROR_TYPE(DivergentIntegral);
DCL_ERROR_TYPE(DeltaDerivativeUnsupported);
DCL_ERROR_TYPE(NonpositiveWidth);
DCL_ERROR_TYPE(UnsupportedArity);
DCL_ERROR_TYPE(UnsupportedOperation);
DCL_ERROR_TYPE(NotFinite);
DCL_ERROR_TYPE(NotHermitian);
DCL_ERROR_TYPE(DimensionMismatch);
DCL_ERROR_TYPE(IncommensurateParameter);
DCL_ERROR_TYPE(NotNormalized);
DCL_ERROR_TYPE(NoConvergence);
DCL_ERROR_TYPE(InsufficientPoints);
DCL_ERROR_TYPE(IncomparableDelta);

// Construction-time invariant violations (non-finite numbers, broken
// symmetry, non-PSD imaginary part). These indicate misuse, not user input.
DCL_ERROR_TYPE(InvalidState);

#undef DCL_ERROR_TYPE

// Script-level errors carry a source position (1-based line/column).
struct ScriptError : EngineError {
    int line;
    int column;
    ScriptError(const std::string& msg, int line_, int column_)
        : EngineError(msg + " (line " + std::to_string(line_) + ", column " +
                      std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
};

struct LexError : ScriptError {
    using ScriptError::ScriptError;
};

struct ParseError : ScriptError {
    using ScriptError::ScriptError;
};

struct EvalError : ScriptError {
    using ScriptError::ScriptError;
};

}  // namespace dcl
