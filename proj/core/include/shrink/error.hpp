#pragma once

#include <stdexcept>
#include <string>

namespace shrink {

enum class ErrorKind {
    ConfigInvalid,
    InvalidInput,
    Precondition,
    PrecisionExhausted,
    BudgetTooLarge,
    Indeterminate,
    TolUnreachable,
    Singular,
    OutOfTable,
    InfiniteCoordinate,
    UnboundedU,
    SlopeTooSmall,
    RateNotVanishing,
    DegenerateF,
    AmbiguityBudget,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

// Thrown by orbit engines; carries the last step that completed cleanly.
class PrecisionExhausted : public Error {
public:
    PrecisionExhausted(long long step, const std::string& what)
        : Error(ErrorKind::PrecisionExhausted, what), step_(step) {}
    long long step() const noexcept { return step_; }

private:
    long long step_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace shrink
