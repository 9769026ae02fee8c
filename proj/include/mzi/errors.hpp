#pragma once

#include <stdexcept>
#include <string>

namespace mzi {

// Base for every error raised by the library. name() is the stable identifier
// surfaced by the CLI.
class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

#define MZI_DEFINE_ERROR(Type)                                             \
    class Type : public Error {                                            \
    public:                                                                \
        explicit Type(const std::string& what) : Error(#Type, what) {}     \
    };

MZI_DEFINE_ERROR(IncompatiblePmc)
MZI_DEFINE_ERROR(ZeroDerivative)
MZI_DEFINE_ERROR(ZeroDerivativeEverywhere)
MZI_DEFINE_ERROR(WrongConvention)
MZI_DEFINE_ERROR(EmptyInput)
MZI_DEFINE_ERROR(DegenerateFisher)
MZI_DEFINE_ERROR(FlatObjective)
MZI_DEFINE_ERROR(CutoffExceeded)
MZI_DEFINE_ERROR(OracleUnreliable)

#undef MZI_DEFINE_ERROR

}  // namespace mzi
