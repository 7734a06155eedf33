#pragma once

#include <gmpxx.h>

#include <string>

#include "shrink/mpfr_float.hpp"

namespace shrink {

// A real number that can be enclosed at any precision: an exact rational or a
// signed named constant (golden ratio, e, pi, square root of an integer) plus
// a rational offset.
class RealConstant {
public:
    enum class Kind { Rational, Golden, Euler, Pi, Sqrt };

    RealConstant() = default;

    static RealConstant rational(const mpq_class& q);
    static RealConstant integer(long k) { return rational(mpq_class(k)); }
    static RealConstant golden();
    static RealConstant euler();
    static RealConstant pi();
    static RealConstant sqrt(unsigned long n);
    // Accepts "g", "e", "pi", "sqrt(5)", "7/3", "2.5", "1e-3", each with an
    // optional leading '-', and named constants with an offset like "pi-3".
    static RealConstant parse(const std::string& text);

    RealConstant operator-() const;
    RealConstant plus(const mpq_class& offset) const;
    RealConstant abs() const;

    Kind kind() const { return kind_; }
    int sign() const;
    bool is_rational() const { return kind_ == Kind::Rational; }
    bool is_integer() const;
    long long as_integer() const;
    const mpq_class& rational_value() const { return q_; }

    // Directed-rounding enclosure lo <= value <= hi at the given precision.
    void enclose(mpfr_prec_t prec, BigFloat& lo, BigFloat& hi) const;
    double value() const;
    std::string to_string() const;

private:
    Kind kind_ = Kind::Rational;
    int sign_ = 1;
    mpq_class q_;
    unsigned long radicand_ = 0;
    mpq_class offset_;
};

}  // namespace shrink
