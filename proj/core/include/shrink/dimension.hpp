#pragma once

#include <string>
#include <utility>
#include <vector>

#include "shrink/targets.hpp"

namespace shrink {

// Index sets of the rectangle dimension formula for one coordinate i.
struct Partition {
    std::vector<size_t> k1;  // log b_k > log b_i + t_i
    std::vector<size_t> k2;  // log b_k + t_k <= log b_i + t_i
    std::vector<size_t> k3;
};

struct DimensionReport {
    double value = 0.0;
    size_t argmin = 0;
    std::vector<double> t;  // attaining point of U (empty for scalar methods)
    std::vector<Partition> partition;
    std::string method;
    double error_bound = 0.0;  // from clustered numeric U
    bool conjectural = false;
};

// Tie handling of the partition; the formula is insensitive to it.
struct Strictness {
    bool k1_strict = true;   // '>' versus '>='
    bool k2_strict = false;  // '<' versus '<='
};

Partition partition_of(size_t i, const std::vector<double>& moduli, const std::vector<double>& t,
                       Strictness s = {});
double theta_rect(size_t i, const std::vector<double>& moduli, const std::vector<double>& t, Strictness s = {});
double conjectured_theta_hat(size_t i, const std::vector<double>& moduli, const std::vector<double>& t,
                             const std::vector<double>& deltas);

DimensionReport dim_rect(const std::vector<double>& moduli, const AccumulationSet& u);
DimensionReport dim_hat(const std::vector<double>& moduli, const AccumulationSet& u,
                        const std::vector<double>& deltas);
DimensionReport dim_ball(const std::vector<double>& moduli, double lambda);
double dim_onedim(double beta_modulus, double lambda);
double dim_mult(const std::vector<double>& moduli, double lambda);

struct MtpInput {
    std::vector<double> deltas;
    std::vector<double> u;
    std::vector<double> v;
};
double mtp_s(const MtpInput& in, size_t i);
double mtp_dimension(const MtpInput& in);

struct MarkovBounds {
    double dim_lambda_lb = 0.0;
    double dim_lb = 0.0;
};
MarkovBounds markov_bounds(double beta_modulus, double lambda);

struct DimensionBounds {
    double lower = 0.0;
    double upper = 0.0;
    std::vector<double> t_lower;
    std::vector<double> t_upper;
};
DimensionBounds unbounded_bounds(const std::vector<double>& moduli, const AccumulationSet& u);

struct ReductionOutcome {
    enum class Kind { Empty, FixedSlice, IntervalSlice, ParitySplit, FullSlice, CountableSlice };
    Kind kind = Kind::Empty;
    size_t coordinate = 0;
    double tau = 0.0;                  // limsup psi(n) |b|^{-n}, may be +inf
    std::vector<double> points;        // FixedSlice, ParitySplit
    double lo = 0.0, hi = 0.0;         // IntervalSlice: open or closed, undetermined
    std::vector<double> reduced_betas;
    std::vector<double> reduced_center;
    bool squared_system = false;       // ParitySplit: reduced problems use T_*^2
    std::string describe() const;
};
const char* reduction_kind_name(ReductionOutcome::Kind k);

ReductionOutcome degenerate_reduction(const std::vector<double>& betas, const RateFunction& rate,
                                      const std::vector<double>& center);
double limsup_scaled_rate(const RateFunction& rate, double beta_modulus);

struct CoverCost {
    long long n = 0;
    double ell = 0.0;
    double h = 0.0;
};
std::vector<CoverCost> cover_cost_sequence(const std::vector<double>& moduli, const std::vector<RateFunction>& rates,
                                           size_t i, double s, long long n_first, long long n_last);

}  // namespace shrink
