#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <string>
#include <vector>

#include "shrink/arc.hpp"
#include "shrink/measures.hpp"
#include "shrink/orbit.hpp"

namespace shrink {

struct RateFunction {
    enum class Kind { Exponential, PowerLaw, SuperExponential, Table };
    enum class Extension { None, HoldLast, Geometric };

    Kind kind = Kind::Exponential;
    double t = 0.0;      // Exponential: psi(n) = c e^{-nt}
    double c = 1.0;      // Exponential prefactor, PowerLaw scale
    double kappa = 0.0;  // PowerLaw: psi(n) = c n^{-kappa}
    std::vector<double> table;  // psi(1), psi(2), ...
    Extension extension = Extension::None;
    bool monotone = true;

    static RateFunction exponential(double t, double c = 1.0);
    static RateFunction power_law(double c, double kappa);
    static RateFunction constant(double c) { return power_law(c, 0.0); }
    static RateFunction super_exponential();
    static RateFunction from_table(std::vector<double> values, Extension ext);
    // "exp:T[:C]", "pow:C:K", "const:C", "superexp", "table:v1,v2,...[;hold|geom]".
    static RateFunction parse(const std::string& text);
    std::string to_string() const;
};

double psi(const RateFunction& rate, long long n);
// log psi(n), accurate where psi itself underflows.
double log_psi(const RateFunction& rate, long long n);

struct LowerOrder {
    double value = 0.0;
    bool exact = true;       // closed form for symbolic kinds
    long long window_lo = 0;  // numeric liminf window for tables
    long long window_hi = 0;
};

LowerOrder lower_order(const RateFunction& rate, long long horizon = 1 << 20);
// liminf over n of -log psi(kn)/(kn).
LowerOrder subsampled_lower_order(const RateFunction& rate, long long k, long long horizon = 1 << 20);
bool rate_vanishes(const RateFunction& rate);

enum class Shape { Ball, Rectangle, Hyperboloid };
const char* shape_name(Shape s);

struct TargetSpec {
    Shape shape = Shape::Ball;
    std::vector<double> center;
    std::vector<RateFunction> rates;  // one entry, or d entries for rectangles
    double boundary_content_bound = 0.0;

    static TargetSpec ball(std::vector<double> center, RateFunction rate);
    static TargetSpec rectangle(std::vector<double> center, std::vector<RateFunction> rates);
    static TargetSpec hyperboloid(std::vector<double> center, RateFunction rate);

    size_t dim() const { return center.size(); }
    double radius(size_t coord, long long n) const;
};

// Lebesgue measure of {prod ||x_i|| < delta} in T^d.
double hyperboloid_volume(int d, double delta);
double lebesgue_volume(const TargetSpec& target, long long n);

struct PhiOptions {
    const ProductMeasure* measure = nullptr;  // nullptr: Lebesgue
    uint64_t mc_samples = 100000;             // hyperboloids under a product measure
    uint64_t seed = 1;
};

struct PhiSeries {
    std::vector<long long> checkpoints;
    std::vector<double> values;
    std::vector<double> std_error;
};

// mu(E_n) under the chosen measure; std_error is nonzero only for Monte Carlo.
double target_measure(const TargetSpec& target, long long n, const PhiOptions& opt, double* std_error = nullptr);
PhiSeries phi_sum(const TargetSpec& target, const std::vector<long long>& checkpoints,
                  const PhiOptions& opt = {});

enum class Membership { Yes, No, Ambiguous };

// Three-valued membership of an enclosed point in E_n. Arcs must already be
// outward padded; margin absorbs rounding in the distance arithmetic. radii holds
// one entry per coordinate for rectangles and a single entry otherwise.
template <class S>
Membership contains_arcs(const TargetSpec& target, const std::vector<S>& radii, const std::vector<Arc<S>>& x,
                         const S& margin);

Membership contains(const TargetSpec& target, long long n, const std::vector<Arc<double>>& x);
// Same test with radii precomputed by radii_into, for hot loops.
Membership contains_with_radii(const TargetSpec& target, const std::vector<double>& radii,
                               const std::vector<Arc<double>>& x);
void radii_into(const TargetSpec& target, long long n, std::vector<double>& out);
Membership contains_exact(const TargetSpec& target, long long n, const std::vector<Arc<mpq_class>>& x);
Membership contains(const TargetSpec& target, long long n, const std::vector<UnitRealInterval>& x);

struct AccumulationSet {
    std::vector<std::vector<double>> points;  // entries in [0, inf]
    double radius = 0.0;                      // cluster radius for numeric entries
    bool symbolic = true;
    bool bounded() const;
};

AccumulationSet accumulation_set(const std::vector<RateFunction>& rates, long long horizon = 1 << 16,
                                 double cluster_radius = 1e-2);

}  // namespace shrink
