#pragma once

#include <stdexcept>
#include <string>

namespace padyn {

// Every library failure carries a short machine-readable kind tag; the CLI
// copies it verbatim into its error documents.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}
    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define PADYN_ERROR(Name)                                                   \
    class Name : public Error {                                             \
    public:                                                                 \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    }

PADYN_ERROR(InvalidContext);
PADYN_ERROR(RadiusNotRepresentable);
PADYN_ERROR(PrecisionLoss);
PADYN_ERROR(DivisionByZero);
PADYN_ERROR(NotAUnit);
PADYN_ERROR(HenselPreconditionFailed);
PADYN_ERROR(NoRootAtRadius);
PADYN_ERROR(ResidueFieldTooSmall);
PADYN_ERROR(ConditionViolated);
PADYN_ERROR(AdmissionError);
PADYN_ERROR(ParseError);

#undef PADYN_ERROR

} // namespace padyn
