#pragma once

#include <gmpxx.h>

#include <vector>

#include "shrink/orbit.hpp"

namespace shrink {

struct EigenModuli {
    std::vector<double> moduli;       // sorted ascending, with multiplicity
    std::vector<double> error_bound;  // certified bound on each modulus error
    std::vector<mpz_class> charpoly;  // coefficients, constant term first
};

// Characteristic polynomial det(lambda I - M), constant term first.
std::vector<mpz_class> characteristic_polynomial(const std::vector<std::vector<long long>>& m);

// Eigenvalue moduli from the exact characteristic polynomial: square-free
// factorization, then simultaneous root iteration with inclusion-disk bounds.
EigenModuli eigenvalue_moduli(const IntegerMatrixSystem& system);
EigenModuli eigenvalue_moduli(const std::vector<std::vector<long long>>& m);

}  // namespace shrink
