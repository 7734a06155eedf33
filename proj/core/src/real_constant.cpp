#include "shrink/real_constant.hpp"
#include "shrink/error.hpp"

#include <cctype>

namespace shrink {

RealConstant RealConstant::rational(const mpq_class& q) {
    RealConstant c;
    c.kind_ = Kind::Rational;
    c.q_ = q;
    c.q_.canonicalize();
    c.sign_ = sgn(c.q_) < 0 ? -1 : 1;
    return c;
}

RealConstant RealConstant::golden() {
    RealConstant c;
    c.kind_ = Kind::Golden;
    return c;
}

RealConstant RealConstant::euler() {
    RealConstant c;
    c.kind_ = Kind::Euler;
    return c;
}

RealConstant RealConstant::pi() {
    RealConstant c;
    c.kind_ = Kind::Pi;
    return c;
}

RealConstant RealConstant::sqrt(unsigned long n) {
    mpz_class r;
    mpz_sqrt(r.get_mpz_t(), mpz_class(n).get_mpz_t());
    if (r * r == n) return rational(mpq_class(r));
    RealConstant c;
    c.kind_ = Kind::Sqrt;
    c.radicand_ = n;
    return c;
}

namespace {

mpq_class parse_decimal(const std::string& s) {
    size_t i = 0;
    mpz_class mant = 0;
    long exp10 = 0;
    bool any = false;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
        mant = mant * 10 + (s[i] - '0');
        ++i;
        any = true;
    }
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
            mant = mant * 10 + (s[i] - '0');
            --exp10;
            ++i;
            any = true;
        }
    }
    if (!any) fail(ErrorKind::ConfigInvalid, "not a number: '" + s + "'");
    if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
        ++i;
        size_t used = 0;
        long e = 0;
        try {
            e = std::stol(s.substr(i), &used);
        } catch (...) {
            fail(ErrorKind::ConfigInvalid, "bad exponent in '" + s + "'");
        }
        i += used;
        exp10 += e;
    }
    if (i != s.size()) fail(ErrorKind::ConfigInvalid, "trailing characters in '" + s + "'");
    mpz_class p10;
    mpz_ui_pow_ui(p10.get_mpz_t(), 10, static_cast<unsigned long>(exp10 < 0 ? -exp10 : exp10));
    mpq_class q = exp10 < 0 ? mpq_class(mant, p10) : mpq_class(mant * p10);
    q.canonicalize();
    return q;
}

}  // namespace

RealConstant RealConstant::parse(const std::string& text) {
    std::string s;
    for (char ch : text)
        if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
    if (s.empty()) fail(ErrorKind::ConfigInvalid, "empty real constant");
    bool neg = false;
    if (s[0] == '-' || s[0] == '+') {
        neg = s[0] == '-';
        s = s.substr(1);
    }
    RealConstant c;
    if (std::isalpha(static_cast<unsigned char>(s[0]))) {
        size_t cut = s.find(')') != std::string::npos ? s.find(')') + 1 : 0;
        size_t op = s.find_first_of("+-", cut);
        if (op != std::string::npos && op > 0) {
            RealConstant base = parse(s.substr(0, op));
            mpq_class off = parse(s.substr(op + 1)).rational_value();
            if (!parse(s.substr(op + 1)).is_rational())
                fail(ErrorKind::ConfigInvalid, "offset must be rational in '" + text + "'");
            c = base.plus(s[op] == '-' ? mpq_class(-off) : off);
            return neg ? -c : c;
        }
    }
    if (s == "g" || s == "phi") {
        c = golden();
    } else if (s == "e") {
        c = euler();
    } else if (s == "pi") {
        c = pi();
    } else if (s.rfind("sqrt(", 0) == 0 && s.back() == ')') {
        c = sqrt(std::stoul(s.substr(5, s.size() - 6)));
    } else if (auto slash = s.find('/'); slash != std::string::npos) {
        mpq_class num = parse_decimal(s.substr(0, slash));
        mpq_class den = parse_decimal(s.substr(slash + 1));
        if (den == 0) fail(ErrorKind::ConfigInvalid, "zero denominator in '" + text + "'");
        c = rational(num / den);
    } else {
        c = rational(parse_decimal(s));
    }
    return neg ? -c : c;
}

RealConstant RealConstant::operator-() const {
    RealConstant c = *this;
    if (kind_ == Kind::Rational) {
        c.q_ = -q_;
        c.sign_ = sgn(c.q_) < 0 ? -1 : 1;
    } else {
        c.sign_ = -sign_;
        c.offset_ = -offset_;
    }
    return c;
}

RealConstant RealConstant::plus(const mpq_class& offset) const {
    if (kind_ == Kind::Rational) return rational(q_ + offset);
    RealConstant c = *this;
    c.offset_ += offset;
    c.offset_.canonicalize();
    return c;
}

int RealConstant::sign() const {
    if (kind_ == Kind::Rational || offset_ == 0) return sign_;
    return value() < 0 ? -1 : 1;
}

RealConstant RealConstant::abs() const { return sign() < 0 ? -*this : *this; }

bool RealConstant::is_integer() const { return kind_ == Kind::Rational && q_.get_den() == 1; }

long long RealConstant::as_integer() const {
    if (!is_integer() || !q_.get_num().fits_slong_p())
        fail(ErrorKind::InvalidInput, "not a machine integer: " + to_string());
    return q_.get_num().get_si();
}

void RealConstant::enclose(mpfr_prec_t prec, BigFloat& lo, BigFloat& hi) const {
    lo = BigFloat(prec);
    hi = BigFloat(prec);
    switch (kind_) {
        case Kind::Rational:
            mpfr_set_q(lo.get(), q_.get_mpq_t(), MPFR_RNDD);
            mpfr_set_q(hi.get(), q_.get_mpq_t(), MPFR_RNDU);
            return;
        case Kind::Golden:
            mpfr_sqrt_ui(lo.get(), 5, MPFR_RNDD);
            mpfr_add_ui(lo.get(), lo.get(), 1, MPFR_RNDD);
            mpfr_div_2ui(lo.get(), lo.get(), 1, MPFR_RNDD);
            mpfr_sqrt_ui(hi.get(), 5, MPFR_RNDU);
            mpfr_add_ui(hi.get(), hi.get(), 1, MPFR_RNDU);
            mpfr_div_2ui(hi.get(), hi.get(), 1, MPFR_RNDU);
            break;
        case Kind::Euler:
            mpfr_set_ui(lo.get(), 1, MPFR_RNDN);
            mpfr_exp(lo.get(), lo.get(), MPFR_RNDD);
            mpfr_set_ui(hi.get(), 1, MPFR_RNDN);
            mpfr_exp(hi.get(), hi.get(), MPFR_RNDU);
            break;
        case Kind::Pi:
            mpfr_const_pi(lo.get(), MPFR_RNDD);
            mpfr_const_pi(hi.get(), MPFR_RNDU);
            break;
        case Kind::Sqrt:
            mpfr_sqrt_ui(lo.get(), radicand_, MPFR_RNDD);
            mpfr_sqrt_ui(hi.get(), radicand_, MPFR_RNDU);
            break;
    }
    if (sign_ < 0) {
        mpfr_neg(lo.get(), lo.get(), MPFR_RNDN);
        mpfr_neg(hi.get(), hi.get(), MPFR_RNDN);
        mpfr_swap(lo.get(), hi.get());
    }
    if (offset_ != 0) {
        mpfr_add_q(lo.get(), lo.get(), offset_.get_mpq_t(), MPFR_RNDD);
        mpfr_add_q(hi.get(), hi.get(), offset_.get_mpq_t(), MPFR_RNDU);
    }
}

double RealConstant::value() const {
    if (kind_ == Kind::Rational) return q_.get_d();
    BigFloat lo, hi;
    enclose(128, lo, hi);
    return lo.to_double();
}

std::string RealConstant::to_string() const {
    if (kind_ == Kind::Rational) return q_.get_str();
    std::string s = sign_ < 0 ? "-" : "";
    switch (kind_) {
        case Kind::Golden: s += "g"; break;
        case Kind::Euler: s += "e"; break;
        case Kind::Pi: s += "pi"; break;
        case Kind::Sqrt: s += "sqrt(" + std::to_string(radicand_) + ")"; break;
        case Kind::Rational: break;
    }
    if (offset_ > 0) s += "+" + offset_.get_str();
    if (offset_ < 0) s += offset_.get_str();
    return s;
}

}  // namespace shrink
