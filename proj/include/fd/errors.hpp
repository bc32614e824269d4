#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace fd {

// Error taxonomy. Every throwable condition carries a stable machine-readable
// code string; the CLI maps categories to exit codes (usage/config -> 2,
// mathematical finding -> 3, anything else -> 4).
class Error : public std::runtime_error {
public:
    enum class Category { usage, finding, internal };

    Error(Category cat, std::string code, const std::string& msg)
        : std::runtime_error(code + ": " + msg), cat_(cat), code_(std::move(code)) {}

    Category category() const { return cat_; }
    const std::string& code() const { return code_; }

private:
    Category cat_;
    std::string code_;
};

#define FD_DEFINE_ERROR(NAME, CATEGORY)                            \
    class NAME : public Error {                                    \
    public:                                                        \
        explicit NAME(const std::string& msg)                      \
            : Error(Category::CATEGORY, #NAME, msg) {}             \
    }

// structure
FD_DEFINE_ERROR(DisconnectedStructure, usage);
FD_DEFINE_ERROR(InvalidSymbolIndex, usage);
FD_DEFINE_ERROR(DuplicateGluing, usage);
FD_DEFINE_ERROR(LevelOverflow, usage);
FD_DEFINE_ERROR(EmbeddingIncomplete, usage);

// harmonic
FD_DEFINE_ERROR(AsymmetricInput, usage);
FD_DEFINE_ERROR(LevelMismatch, usage);
FD_DEFINE_ERROR(SingularInteriorBlock, usage);
FD_DEFINE_ERROR(NotProportional, finding);
FD_DEFINE_ERROR(MissingVertexValue, usage);
FD_DEFINE_ERROR(InvalidBoundaryForm, usage);

// measure
FD_DEFINE_ERROR(LevelTooShallow, usage);
FD_DEFINE_ERROR(NonpositiveCoefficient, usage);

// derivative
FD_DEFINE_ERROR(ConstantReference, usage);

// fractal_zoo
FD_DEFINE_ERROR(UnsupportedScale, usage);
FD_DEFINE_ERROR(ParamOutOfRange, usage);
FD_DEFINE_ERROR(NotAnchored, usage);
FD_DEFINE_ERROR(ConstantFunction, usage);

// cli / file formats
FD_DEFINE_ERROR(ConfigError, usage);

#undef FD_DEFINE_ERROR

} // namespace fd
