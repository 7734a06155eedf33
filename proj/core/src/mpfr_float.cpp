#include "shrink/mpfr_float.hpp"
#include "shrink/error.hpp"

#include <vector>

namespace shrink {

std::string BigFloat::to_string(int digits) const {
    std::vector<char> buf(digits + 32);
    mpfr_snprintf(buf.data(), buf.size(), "%.*Rg", digits, v_);
    return std::string(buf.data());
}

const char* error_kind_name(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::ConfigInvalid: return "ConfigInvalid";
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::Precondition: return "Precondition";
        case ErrorKind::PrecisionExhausted: return "PrecisionExhausted";
        case ErrorKind::BudgetTooLarge: return "BudgetTooLarge";
        case ErrorKind::Indeterminate: return "Indeterminate";
        case ErrorKind::TolUnreachable: return "TolUnreachable";
        case ErrorKind::Singular: return "Singular";
        case ErrorKind::OutOfTable: return "OutOfTable";
        case ErrorKind::InfiniteCoordinate: return "InfiniteCoordinate";
        case ErrorKind::UnboundedU: return "UnboundedU";
        case ErrorKind::SlopeTooSmall: return "SlopeTooSmall";
        case ErrorKind::RateNotVanishing: return "RateNotVanishing";
        case ErrorKind::DegenerateF: return "DegenerateF";
        case ErrorKind::AmbiguityBudget: return "AmbiguityBudget";
    }
    return "Unknown";
}

}  // namespace shrink
