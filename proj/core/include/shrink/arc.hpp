#pragma once

#include <gmpxx.h>

#include <cmath>

namespace shrink {

// Closed arc of the circle R/Z in lifted form: lo in [0,1), lo <= hi <= lo+1.
// Scalar is double (with outward padding done by the producer) or mpq_class.
template <class S>
struct Arc {
    S lo;
    S hi;
};

inline double floor_of(double x) { return std::floor(x); }
inline mpq_class floor_of(const mpq_class& x) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return mpq_class(f);
}

template <class S>
Arc<S> normalized_arc(S lo, S hi) {
    S f = floor_of(lo);
    lo -= f;
    hi -= f;
    return {lo, hi};
}

// Range of the wrap-aware distance ||y - a|| over y in the arc.
template <class S>
void distance_range(const Arc<S>& arc, const S& a, S& dmin, S& dmax) {
    const S half = S(1) / S(2);
    S width = arc.hi - arc.lo;
    if (width >= S(1)) {
        dmin = S(0);
        dmax = half;
        return;
    }
    // Offset of a (and of the antipode a+1/2) from arc.lo going forward.
    S off = a - arc.lo;
    off -= floor_of(off);
    S anti = off + half;
    anti -= floor_of(anti);
    auto dist = [&](const S& y) {
        S t = y - a;
        t -= floor_of(t);
        return t > half ? S(S(1) - t) : t;
    };
    S d_lo = dist(arc.lo);
    S d_hi = dist(arc.hi);
    dmin = off <= width ? S(0) : (d_lo < d_hi ? d_lo : d_hi);
    dmax = anti <= width ? half : (d_lo > d_hi ? d_lo : d_hi);
}

}  // namespace shrink
