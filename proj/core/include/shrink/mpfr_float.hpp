#pragma once

#include <mpfr.h>

#include <string>
#include <utility>

namespace shrink {

// Owning wrapper over mpfr_t. Arithmetic stays in free mpfr_* calls so the
// rounding direction is always explicit at the call site.
class BigFloat {
public:
    explicit BigFloat(mpfr_prec_t prec = 128) { mpfr_init2(v_, prec); mpfr_set_zero(v_, 1); }
    BigFloat(double x, mpfr_prec_t prec) { mpfr_init2(v_, prec); mpfr_set_d(v_, x, MPFR_RNDN); }
    BigFloat(const BigFloat& o) {
        mpfr_init2(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    BigFloat(BigFloat&& o) noexcept {
        mpfr_init2(v_, MPFR_PREC_MIN);
        mpfr_swap(v_, o.v_);
    }
    BigFloat& operator=(const BigFloat& o) {
        if (this != &o) {
            mpfr_set_prec(v_, mpfr_get_prec(o.v_));
            mpfr_set(v_, o.v_, MPFR_RNDN);
        }
        return *this;
    }
    BigFloat& operator=(BigFloat&& o) noexcept {
        mpfr_swap(v_, o.v_);
        return *this;
    }
    ~BigFloat() { mpfr_clear(v_); }

    mpfr_ptr get() { return v_; }
    mpfr_srcptr get() const { return v_; }
    mpfr_prec_t prec() const { return mpfr_get_prec(v_); }

    double to_double(mpfr_rnd_t rnd = MPFR_RNDN) const { return mpfr_get_d(v_, rnd); }
    std::string to_string(int digits = 20) const;

    // Change precision keeping the value rounded in the given direction.
    void round_to(mpfr_prec_t prec, mpfr_rnd_t rnd) { mpfr_prec_round(v_, prec, rnd); }

private:
    mpfr_t v_;
};

inline int cmp(const BigFloat& a, const BigFloat& b) { return mpfr_cmp(a.get(), b.get()); }

}  // namespace shrink
