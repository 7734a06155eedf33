#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "shrink/measures.hpp"
#include "shrink/real_constant.hpp"

namespace shrink {

using BoolMatrix = std::vector<std::vector<uint8_t>>;

// Map linear on each [breakpoints[i], breakpoints[i+1]] with
// T(x) = left_values[i] + slopes[i] (x - breakpoints[i]).
struct PiecewiseLinearMap {
    std::vector<double> breakpoints;
    std::vector<double> slopes;
    std::vector<double> left_values;
    double slope_modulus = 0.0;

    size_t pieces() const { return slopes.size(); }
    Interval piece(size_t i) const { return {breakpoints[i], breakpoints[i + 1]}; }
    Interval image(size_t i) const;
    // Image of [lo, hi] inside piece i.
    Interval image_of(size_t i, double lo, double hi) const;
    // Throws InvalidInput on mismatched slopes or images leaving [0,1].
    void validate() const;
};

PiecewiseLinearMap beta_map(const RealConstant& beta);
PiecewiseLinearMap power_map(const RealConstant& beta, int k);

// Split pieces so that every length lies in [kappa, 2 kappa].
PiecewiseLinearMap normalize_partition(const PiecewiseLinearMap& map);

struct MarkovCertificates {
    long long row_min = 0;
    long long row_bound = 0;  // [beta/2] - 2
    double entropy_lb = 0.0;  // log(beta/2 - 3)
    double dim_lb = 0.0;      // 1 - log 8 / log beta
};

struct MarkovSubsystem {
    PiecewiseLinearMap partition;  // normalized
    std::vector<Interval> pieces;  // P(i) inside partition piece i
    BoolMatrix a;
    double kappa = 0.0;
    MarkovCertificates certificates;
};

inline constexpr double kMarkovSlack = 0x1.0p-40;

MarkovSubsystem build_markov(const PiecewiseLinearMap& map);
// Interior-disjointness, pieces inside the partition, and the closure
// condition on actual intervals; returns the first violation or nullopt.
std::optional<std::string> check_markov_conditions(const MarkovSubsystem& sub);

mpz_class word_count(const BoolMatrix& a, int n);

struct Primitivity {
    bool primitive = false;
    int power = 0;  // smallest k with A^k > 0 when primitive
};
Primitivity is_primitive(const BoolMatrix& a);

struct EntropyEstimate {
    double h_top = 0.0;
    double h_lower = 0.0;  // rigorous: max of log min-row-sum and Collatz-Wielandt
    double h_upper = 0.0;
    double dim = 0.0;
    int iterations = 0;
};
EntropyEstimate entropy_and_dim(const BoolMatrix& a, double beta_modulus);

struct OntoResult {
    bool found = false;
    int k = 0;  // smallest k, or max_k when not found
    std::vector<Interval> image;
};
OntoResult eventually_onto_search(const PiecewiseLinearMap& map, Interval start, const SupportSet& target, int max_k);

}  // namespace shrink
