#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "shrink/real_constant.hpp"

namespace shrink {

using Interval = std::pair<double, double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kGolden = 1.6180339887498948482;

// Parry (beta > 1) or Yrrap (beta < -1) invariant measure, evaluated through
// the truncated series over the orbit of 1.
class ParryYrrapMeasure {
public:
    // tol bounds the truncated tail |beta|^{-N}/(|beta|-1).
    explicit ParryYrrapMeasure(const RealConstant& beta, double tol = 1e-12, int max_terms = 100000);

    double beta() const { return beta_; }
    const RealConstant& beta_constant() const { return beta_const_; }
    int truncation_order() const { return static_cast<int>(orbit_.size()); }
    double tail_bound() const { return tail_bound_; }
    double normalizer() const { return normalizer_; }
    const std::vector<double>& orbit_of_one() const { return orbit_; }

    double density(double x) const;
    double measure_interval(double a, double b) const;
    double cdf(double x) const { return measure_interval(0.0, x); }
    double inverse_cdf(double u) const;
    // Step density: breakpoints 0 = b_0 < ... < b_m = 1 with value on [b_i, b_{i+1}).
    const std::vector<double>& breakpoints() const { return breaks_; }
    const std::vector<double>& step_values() const { return values_; }
    double envelope() const { return envelope_; }

    // Rejection sample from uniform proposals; counts proposals when asked.
    double sample(std::mt19937_64& rng, uint64_t* proposals = nullptr) const;

private:
    RealConstant beta_const_;
    double beta_;
    double tail_bound_;
    double normalizer_;
    std::vector<double> orbit_;    // T^n(1), n = 0..N-1
    std::vector<double> weights_;  // beta^{-n}
    std::vector<double> breaks_;
    std::vector<double> values_;
    std::vector<double> cum_;      // measure of [0, breaks_[i])
    double envelope_;
};

// Uniform double in [0,1) from the top 53 bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Density bound constant for beta <= -g: C^{-1} <= h <= C.
double density_bound_constant(double beta);

struct SupportSet {
    std::vector<std::pair<double, double>> intervals;  // closed, sorted, disjoint
    double total_length() const;
    bool contains(double x, double slack = 0.0) const;
};

// [0,1] when beta <= -g or beta > 1; otherwise the closure of the positivity
// set of the truncated density, with gaps below merge_gap closed.
SupportSet support(const RealConstant& beta, double tol = 1e-9, double merge_gap = 1e-6);

class ProductMeasure {
public:
    explicit ProductMeasure(std::vector<ParryYrrapMeasure> factors) : factors_(std::move(factors)) {}
    const std::vector<ParryYrrapMeasure>& factors() const { return factors_; }
    size_t dim() const { return factors_.size(); }
    // Product of interval measures; err receives the propagated truncation bound.
    double rectangle(const std::vector<std::pair<double, double>>& rect, double* err = nullptr) const;
    std::vector<double> sample(std::mt19937_64& rng) const;

private:
    std::vector<ParryYrrapMeasure> factors_;
};

}  // namespace shrink
