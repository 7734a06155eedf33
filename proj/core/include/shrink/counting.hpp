#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <variant>
#include <vector>

#include "shrink/measures.hpp"
#include "shrink/orbit.hpp"
#include "shrink/targets.hpp"

namespace shrink {

uint64_t splitmix64(uint64_t x);
// Independent stream seed for one sample of a seeded run.
inline uint64_t sample_seed(uint64_t seed, uint64_t sample_id) { return splitmix64(seed ^ splitmix64(sample_id)); }

// Starting points for orbit walks.
struct ExactPoint {
    std::vector<mpq_class> x;
};
struct ConstantPoint {
    std::vector<RealConstant> x;
};
// Lebesgue-random point, or a draw from a product measure when one is given.
struct RandomPoint {
    uint64_t seed = 0;
    const ProductMeasure* measure = nullptr;
};
using StartPoint = std::variant<ExactPoint, ConstantPoint, RandomPoint>;

// Steps an orbit and answers three-valued membership at the current time.
class OrbitWalker {
public:
    virtual ~OrbitWalker() = default;
    virtual void advance() = 0;
    virtual Membership test(const TargetSpec& target, const std::vector<double>& radii) = 0;
    virtual const char* engine() const = 0;
    long long time() const { return time_; }

protected:
    long long time_ = 0;
};

// Digit engine for integer diagonals, exact rational orbits for integer
// matrices on rational points, interval engines otherwise.
// precision_bits = 0 selects required_precision(system, n_steps).
std::unique_ptr<OrbitWalker> make_walker(const TorusSystem& system, const StartPoint& x, long long n_steps,
                                         long long precision_bits = 0);

struct CountCheckpoint {
    long long n = 0;
    long long r_lo = 0;
    long long r_hi = 0;
    double phi = 0.0;
    double e = std::nan("");  // defined only when phi > e
};

struct CountingResult {
    uint64_t sample_id = 0;
    std::vector<CountCheckpoint> checkpoints;
    long long ambiguous_hits = 0;
    double epsilon = 0.5;
    const char* engine = "";
};

struct CountOptions {
    PhiOptions phi;  // measure used for Phi(N)
    double epsilon = 0.5;
    double ambiguity_budget = 1e-3;  // fraction of R_hi
    long long precision_bits = 0;
};

// (R_mid - Phi) / (Phi^{1/2} (log Phi)^{3/2+eps}); NaN unless Phi > e.
double normalized_error(double r_mid, double phi, double epsilon);

// Checkpoints are sorted and must be >= 0; Phi is computed when phi_values is empty.
CountingResult count_hits(const TorusSystem& system, const TargetSpec& target, const StartPoint& x,
                          const std::vector<long long>& checkpoints, const CountOptions& opt = {},
                          const std::vector<double>& phi_values = {});

struct MonteCarloSummary {
    std::vector<CountingResult> samples;
    std::vector<double> phi;    // Phi at each checkpoint
    double band_tol = 0.2;
    double fraction_in_band = 0.0;  // |R_mid/Phi - 1| <= band_tol at the last checkpoint
    double max_abs_e = 0.0;
};

// Samples are split statically over `jobs` threads; output is independent of jobs.
MonteCarloSummary monte_carlo_counting(const TorusSystem& system, const TargetSpec& target, uint64_t samples,
                                       const std::vector<long long>& checkpoints, uint64_t seed, unsigned jobs = 1,
                                       const CountOptions& opt = {}, double band_tol = 0.2);

struct CorrelationOptions {
    bool stratified = true;  // jittered inverse-CDF sampling of mu_beta
    unsigned jobs = 1;
};

struct CorrelationPoint {
    int n = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    bool exact = false;
};

// |mu(E n T^{-n}F)/mu(F) - mu(E)| for intervals E, F under mu_beta.
CorrelationPoint correlation_estimate(const ParryYrrapMeasure& mu, Interval e, Interval f, int n, uint64_t samples,
                                      uint64_t seed, const CorrelationOptions& opt = {});

struct ExpFit {
    double c = 0.0;
    double gamma = 0.0;
    double r2 = 0.0;
    bool converged = false;
};

// Least squares for y_n = C gamma^n on the raw scale, gamma in (0,1).
ExpFit fit_exponential(const std::vector<int>& n, const std::vector<double>& y);

struct CorrelationSeries {
    std::vector<CorrelationPoint> phi_hat;  // n = 0..n_max
    double kappa_hat = 0.0;
    ExpFit fit;
};

// One set of samples reused across lags; fit over [fit_lo, fit_hi];
// kappa_hat = sum_{n<=30} phi_hat(n) + C gamma^31/(1-gamma).
CorrelationSeries correlation_series(const ParryYrrapMeasure& mu, Interval e, Interval f, int n_max, uint64_t samples,
                                     uint64_t seed, int fit_lo, int fit_hi, const CorrelationOptions& opt = {});

struct VarianceReport {
    long long a = 0;
    long long b = 0;
    double mean = 0.0;
    double variance = 0.0;
    double variance_se = 0.0;
    double measure_sum = 0.0;  // sum_{a<=n<=b} mu(E_n)
    double kappa_hat = 0.0;
    double bound = 0.0;        // (2 kappa_hat + 1) measure_sum
    double ratio = 0.0;
    double ratio_se = 0.0;
    std::vector<long long> z;  // per-sample hit counts in the window
};

VarianceReport variance_check(const TorusSystem& system, const TargetSpec& target, long long a, long long b,
                              uint64_t samples, uint64_t seed, double kappa_hat, unsigned jobs = 1,
                              const CountOptions& opt = {});

struct PaleyZygmund {
    double lambda = 0.0;
    double fraction = 0.0;  // empirical P(Z > lambda E Z)
    double bound = 0.0;     // (1-lambda)^2 E[Z]^2 / E[Z^2]
    double std_error = 0.0;
};
PaleyZygmund paley_zygmund(const std::vector<long long>& z, double lambda);

// Runs f(i) for i in [0, count) on `jobs` threads with i assigned to i % jobs.
void parallel_for(uint64_t count, unsigned jobs, const std::function<void(uint64_t)>& f);

}  // namespace shrink
