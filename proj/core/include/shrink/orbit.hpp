#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "shrink/arc.hpp"
#include "shrink/mpfr_float.hpp"
#include "shrink/real_constant.hpp"

namespace shrink {

// A point of [0,1) enclosed by [lo, hi]; hi < lo means the enclosure wraps
// through 0.
struct UnitRealInterval {
    BigFloat lo;
    BigFloat hi;
    mpfr_prec_t precision_bits = 128;

    // Encloses x mod 1 at the given precision.
    static UnitRealInterval from_constant(const RealConstant& x, mpfr_prec_t prec);
    static UnitRealInterval from_rational(const mpq_class& x, mpfr_prec_t prec);

    bool wraps() const { return cmp(hi, lo) < 0; }
    // Upper bound on the arc length.
    double width() const;
    // Outward-rounded double arc suitable for membership tests.
    Arc<double> to_arc() const;
    bool contains(const mpq_class& x) const;
};

struct DiagonalTorusSystem {
    std::vector<RealConstant> betas;
    bool degenerate = false;

    // Requires |beta_i| > 1 for every coordinate.
    static DiagonalTorusSystem make(std::vector<RealConstant> betas);
    // Admits |beta_i| <= 1; only the degenerate reduction accepts these.
    static DiagonalTorusSystem make_degenerate(std::vector<RealConstant> betas);

    size_t dim() const { return betas.size(); }
    bool all_integer() const;
};

struct IntegerMatrixSystem {
    std::vector<std::vector<long long>> matrix;

    // Requires a square matrix with nonzero determinant.
    static IntegerMatrixSystem make(std::vector<std::vector<long long>> m);

    size_t dim() const { return matrix.size(); }
    bool is_diagonal() const;
    mpz_class determinant() const;
    // Maximum absolute row sum; the per-step growth factor of interval widths.
    long long row_norm() const;
};

using TorusSystem = std::variant<DiagonalTorusSystem, IntegerMatrixSystem>;

// Enclosure of beta itself at a working precision.
struct BetaEnclosure {
    BigFloat lo;
    BigFloat hi;
    bool integer = false;
    long long int_value = 0;
    int sign = 1;
    double log2_abs = 0.0;

    BetaEnclosure(const RealConstant& beta, mpfr_prec_t prec);
};

struct StepResult {
    std::vector<UnitRealInterval> pieces;
    bool straddled = false;  // image crossed an integer, or input split at 0
};

// One application of x -> beta*x mod 1 in outward-rounded interval arithmetic.
StepResult beta_step(const BetaEnclosure& beta, const UnitRealInterval& x);
StepResult beta_step(const RealConstant& beta, const UnitRealInterval& x);

// Widest enclosure tolerated before PrecisionExhausted.
inline constexpr double kMaxEnclosureWidth = 1.0 / 256.0;
// Enclosure pieces kept per coordinate before falling back to the hull.
inline constexpr size_t kMaxPieces = 64;

// Precision cap in bits: SHRINK_PRECISION_CAP if set, else 2^20.
long long precision_cap();
void set_precision_cap(std::optional<long long> bits);

// ceil(N*log2(growth)) + 64, where growth is max|beta_i| or the matrix row norm.
long long required_precision(const TorusSystem& system, long long n_steps);

// Stepper for diagonal systems with real betas. Each coordinate is a list of
// enclosure pieces; precision shrinks as steps are consumed.
class DiagonalOrbit {
public:
    DiagonalOrbit(const DiagonalTorusSystem& system, std::vector<UnitRealInterval> x);
    void step();
    long long time() const { return time_; }
    const std::vector<std::vector<UnitRealInterval>>& state() const { return coords_; }
    // Hull of the pieces of one coordinate as a double arc.
    Arc<double> hull_arc(size_t coord) const;

private:
    std::vector<BetaEnclosure> betas_;
    std::vector<std::vector<UnitRealInterval>> coords_;
    mpfr_prec_t start_bits_;
    long long time_ = 0;
};

// Stepper for integer matrices on real points, carried as lifted intervals.
class MatrixOrbit {
public:
    MatrixOrbit(const IntegerMatrixSystem& system, std::vector<UnitRealInterval> x);
    void step();
    long long time() const { return time_; }
    std::vector<UnitRealInterval> state() const;
    Arc<double> arc(size_t coord) const;

private:
    IntegerMatrixSystem sys_;
    std::vector<BigFloat> lo_;
    std::vector<BigFloat> hi_;
    mpfr_prec_t start_bits_;
    long long time_ = 0;
};

// Exact orbit of a rational point under an integer matrix: x <- frac(Mx).
class RationalOrbit {
public:
    RationalOrbit(const IntegerMatrixSystem& system, std::vector<mpq_class> x);
    void step();
    long long time() const { return time_; }
    const std::vector<mpq_class>& state() const { return x_; }

private:
    IntegerMatrixSystem sys_;
    std::vector<mpq_class> x_;
    long long time_ = 0;
};

std::vector<std::vector<UnitRealInterval>> iterate(const DiagonalTorusSystem& system,
                                                   const std::vector<UnitRealInterval>& x,
                                                   long long n);
std::vector<UnitRealInterval> iterate(const IntegerMatrixSystem& system,
                                      const std::vector<UnitRealInterval>& x, long long n);
std::vector<mpq_class> iterate_exact(const IntegerMatrixSystem& system, std::vector<mpq_class> x,
                                     long long n);

// Integer diagonal entries as a matrix system; throws unless every beta is an integer.
IntegerMatrixSystem as_integer_matrix(const DiagonalTorusSystem& system);

mpq_class frac(const mpq_class& x);

}  // namespace shrink
