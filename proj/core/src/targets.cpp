#include "shrink/targets.hpp"
#include "shrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace shrink {

RateFunction RateFunction::exponential(double t, double c) {
    if (!(t >= 0.0) || !(c > 0.0)) fail(ErrorKind::InvalidInput, "exponential rate needs t >= 0, c > 0");
    RateFunction r;
    r.kind = Kind::Exponential;
    r.t = t;
    r.c = c;
    return r;
}

RateFunction RateFunction::power_law(double c, double kappa) {
    if (!(c > 0.0) || !(kappa >= 0.0)) fail(ErrorKind::InvalidInput, "power law needs c > 0, kappa >= 0");
    RateFunction r;
    r.kind = Kind::PowerLaw;
    r.c = c;
    r.kappa = kappa;
    return r;
}

RateFunction RateFunction::super_exponential() {
    RateFunction r;
    r.kind = Kind::SuperExponential;
    return r;
}

RateFunction RateFunction::from_table(std::vector<double> values, Extension ext) {
    if (values.empty()) fail(ErrorKind::InvalidInput, "rate table is empty");
    for (double v : values)
        if (!(v > 0.0)) fail(ErrorKind::InvalidInput, "rate table entries must be positive");
    if (ext == Extension::Geometric && values.size() < 2)
        fail(ErrorKind::InvalidInput, "geometric extension needs two table entries");
    RateFunction r;
    r.kind = Kind::Table;
    r.table = std::move(values);
    r.extension = ext;
    r.monotone = std::is_sorted(r.table.rbegin(), r.table.rend());
    return r;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

double number(const std::string& s) { return RealConstant::parse(s).value(); }

}  // namespace

RateFunction RateFunction::parse(const std::string& text) {
    auto parts = split(text, ':');
    if (parts.empty()) fail(ErrorKind::ConfigInvalid, "empty rate");
    const std::string& k = parts[0];
    if (k == "exp" && (parts.size() == 2 || parts.size() == 3))
        return exponential(number(parts[1]), parts.size() == 3 ? number(parts[2]) : 1.0);
    if (k == "pow" && parts.size() == 3) return power_law(number(parts[1]), number(parts[2]));
    if (k == "const" && parts.size() == 2) return constant(number(parts[1]));
    if (k == "superexp" && parts.size() == 1) return super_exponential();
    if (k == "table" && parts.size() == 2) {
        auto body = split(parts[1], ';');
        Extension ext = Extension::None;
        if (body.size() == 2) {
            if (body[1] == "hold") ext = Extension::HoldLast;
            else if (body[1] == "geom") ext = Extension::Geometric;
            else if (body[1] != "none") fail(ErrorKind::ConfigInvalid, "unknown table extension '" + body[1] + "'");
        }
        std::vector<double> vals;
        for (const auto& v : split(body[0], ',')) vals.push_back(number(v));
        return from_table(std::move(vals), ext);
    }
    fail(ErrorKind::ConfigInvalid, "cannot parse rate '" + text + "'");
}

std::string RateFunction::to_string() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind) {
        case Kind::Exponential: os << "exp:" << t << ":" << c; break;
        case Kind::PowerLaw: os << "pow:" << c << ":" << kappa; break;
        case Kind::SuperExponential: os << "superexp"; break;
        case Kind::Table: {
            os << "table:";
            for (size_t i = 0; i < table.size(); ++i) os << (i ? "," : "") << table[i];
            if (extension == Extension::HoldLast) os << ";hold";
            if (extension == Extension::Geometric) os << ";geom";
            break;
        }
    }
    return os.str();
}

double log_psi(const RateFunction& rate, long long n) {
    if (n < 1) fail(ErrorKind::InvalidInput, "psi is defined for n >= 1");
    double dn = static_cast<double>(n);
    switch (rate.kind) {
        case RateFunction::Kind::Exponential: return std::log(rate.c) - dn * rate.t;
        case RateFunction::Kind::PowerLaw: return std::log(rate.c) - rate.kappa * std::log(dn);
        case RateFunction::Kind::SuperExponential: return -dn * dn;
        case RateFunction::Kind::Table: {
            auto len = static_cast<long long>(rate.table.size());
            if (n <= len) return std::log(rate.table[n - 1]);
            switch (rate.extension) {
                case RateFunction::Extension::None:
                    fail(ErrorKind::OutOfTable, "rate table has no entry for n=" + std::to_string(n));
                case RateFunction::Extension::HoldLast: return std::log(rate.table.back());
                case RateFunction::Extension::Geometric: {
                    double lr = std::log(rate.table[len - 1]) - std::log(rate.table[len - 2]);
                    return std::log(rate.table.back()) + lr * static_cast<double>(n - len);
                }
            }
        }
    }
    return 0.0;
}

double psi(const RateFunction& rate, long long n) {
    if (rate.kind == RateFunction::Kind::Table && n >= 1 && n <= static_cast<long long>(rate.table.size()))
        return rate.table[n - 1];
    if (rate.kind == RateFunction::Kind::PowerLaw) {
        if (n < 1) fail(ErrorKind::InvalidInput, "psi is defined for n >= 1");
        return rate.c * std::pow(static_cast<double>(n), -rate.kappa);
    }
    if (rate.kind == RateFunction::Kind::Exponential && rate.t == std::log(2.0)) {
        if (n < 1) fail(ErrorKind::InvalidInput, "psi is defined for n >= 1");
        // Keep dyadic rates exact.
        return std::ldexp(rate.c, static_cast<int>(std::max(-100000LL, -n)));
    }
    return std::exp(log_psi(rate, n));
}

namespace {

LowerOrder numeric_liminf(const RateFunction& rate, long long k, long long horizon) {
    long long hi = horizon;
    if (rate.kind == RateFunction::Kind::Table && rate.extension == RateFunction::Extension::None)
        hi = std::min<long long>(hi, static_cast<long long>(rate.table.size()));
    long long lo = std::max<long long>(1, hi / 2);
    LowerOrder out;
    out.exact = false;
    out.window_lo = lo;
    out.window_hi = hi;
    out.value = kInf;
    long long start = ((lo + k - 1) / k) * k;
    for (long long n = start; n <= hi; n += k)
        out.value = std::min(out.value, -log_psi(rate, n) / static_cast<double>(n));
    if (out.value == kInf) fail(ErrorKind::InvalidInput, "empty liminf window");
    return out;
}

}  // namespace

LowerOrder lower_order(const RateFunction& rate, long long horizon) {
    return subsampled_lower_order(rate, 1, horizon);
}

LowerOrder subsampled_lower_order(const RateFunction& rate, long long k, long long horizon) {
    if (k < 1) fail(ErrorKind::InvalidInput, "subsampling step must be >= 1");
    LowerOrder out;
    switch (rate.kind) {
        case RateFunction::Kind::Exponential: out.value = rate.t; return out;
        case RateFunction::Kind::PowerLaw: out.value = 0.0; return out;
        case RateFunction::Kind::SuperExponential: out.value = kInf; return out;
        case RateFunction::Kind::Table: return numeric_liminf(rate, k, horizon);
    }
    return out;
}

bool rate_vanishes(const RateFunction& rate) {
    switch (rate.kind) {
        case RateFunction::Kind::Exponential: return rate.t > 0.0;
        case RateFunction::Kind::PowerLaw: return rate.kappa > 0.0;
        case RateFunction::Kind::SuperExponential: return true;
        case RateFunction::Kind::Table:
            switch (rate.extension) {
                case RateFunction::Extension::HoldLast: return false;
                case RateFunction::Extension::Geometric:
                    return rate.table[rate.table.size() - 1] < rate.table[rate.table.size() - 2];
                case RateFunction::Extension::None: return rate.table.back() <= 1e-12;
            }
    }
    return false;
}

const char* shape_name(Shape s) {
    switch (s) {
        case Shape::Ball: return "ball";
        case Shape::Rectangle: return "rectangle";
        case Shape::Hyperboloid: return "hyperboloid";
    }
    return "?";
}

namespace {

void check_center(const std::vector<double>& c) {
    if (c.empty()) fail(ErrorKind::InvalidInput, "target center is empty");
    for (double v : c)
        if (!(v >= 0.0 && v < 1.0)) fail(ErrorKind::InvalidInput, "target center must lie in [0,1)^d");
}

}  // namespace

TargetSpec TargetSpec::ball(std::vector<double> center, RateFunction rate) {
    check_center(center);
    TargetSpec t;
    t.shape = Shape::Ball;
    t.boundary_content_bound = 2.0 * static_cast<double>(center.size());
    t.center = std::move(center);
    t.rates = {std::move(rate)};
    return t;
}

TargetSpec TargetSpec::rectangle(std::vector<double> center, std::vector<RateFunction> rates) {
    check_center(center);
    if (rates.size() != center.size()) fail(ErrorKind::InvalidInput, "rectangle needs one rate per coordinate");
    TargetSpec t;
    t.shape = Shape::Rectangle;
    t.boundary_content_bound = 2.0 * static_cast<double>(center.size());
    t.center = std::move(center);
    t.rates = std::move(rates);
    return t;
}

TargetSpec TargetSpec::hyperboloid(std::vector<double> center, RateFunction rate) {
    check_center(center);
    TargetSpec t;
    t.shape = Shape::Hyperboloid;
    // Documented bound d 2^d on the boundary content; not claimed sharp.
    t.boundary_content_bound = static_cast<double>(center.size()) * std::ldexp(1.0, static_cast<int>(center.size()));
    t.center = std::move(center);
    t.rates = {std::move(rate)};
    return t;
}

double TargetSpec::radius(size_t coord, long long n) const {
    return psi(shape == Shape::Rectangle ? rates.at(coord) : rates.at(0), n);
}

double hyperboloid_volume(int d, double delta) {
    if (d < 1 || !(delta > 0.0)) fail(ErrorKind::InvalidInput, "hyperboloid volume needs d >= 1, delta > 0");
    double scaled = std::ldexp(delta, d);
    if (scaled >= 1.0) return 1.0;
    double l = std::log(1.0 / scaled);
    double term = 1.0, sum = 0.0;
    for (int t = 0; t < d; ++t) {
        sum += term;
        term *= l / (t + 1);
    }
    return scaled * sum;
}

double lebesgue_volume(const TargetSpec& target, long long n) {
    size_t d = target.dim();
    switch (target.shape) {
        case Shape::Ball: return std::min(1.0, std::pow(2.0 * target.radius(0, n), static_cast<double>(d)));
        case Shape::Rectangle: {
            double v = 1.0;
            for (size_t i = 0; i < d; ++i) v *= std::min(1.0, 2.0 * target.radius(i, n));
            return v;
        }
        case Shape::Hyperboloid: return hyperboloid_volume(static_cast<int>(d), target.radius(0, n));
    }
    return 0.0;
}

namespace {

double arc_measure(const ParryYrrapMeasure& mu, double a, double r) {
    if (2.0 * r >= 1.0) return 1.0;
    double lo = a - r, hi = a + r;
    if (lo < 0.0) return mu.measure_interval(0.0, hi) + mu.measure_interval(lo + 1.0, 1.0);
    if (hi > 1.0) return mu.measure_interval(lo, 1.0) + mu.measure_interval(0.0, hi - 1.0);
    return mu.measure_interval(lo, hi);
}

double torus_distance(double x, double a) {
    double t = x - a;
    t -= std::floor(t);
    return t > 0.5 ? 1.0 - t : t;
}

}  // namespace

double target_measure(const TargetSpec& target, long long n, const PhiOptions& opt, double* std_error) {
    if (std_error) *std_error = 0.0;
    if (!opt.measure) return lebesgue_volume(target, n);
    const ProductMeasure& nu = *opt.measure;
    if (nu.dim() != target.dim()) fail(ErrorKind::InvalidInput, "measure dimension mismatch");
    if (target.shape != Shape::Hyperboloid) {
        double v = 1.0;
        for (size_t i = 0; i < target.dim(); ++i)
            v *= arc_measure(nu.factors()[i], target.center[i], target.radius(i, n));
        return v;
    }
    // No closed form for hyperboloids under a product measure: Monte Carlo.
    std::mt19937_64 rng(opt.seed ^ (static_cast<uint64_t>(n) * 0x9E3779B97F4A7C15ULL));
    double delta = target.radius(0, n);
    uint64_t hits = 0;
    for (uint64_t s = 0; s < opt.mc_samples; ++s) {
        auto x = nu.sample(rng);
        double p = 1.0;
        for (size_t i = 0; i < x.size(); ++i) p *= torus_distance(x[i], target.center[i]);
        if (p <= delta) ++hits;
    }
    double m = static_cast<double>(hits) / static_cast<double>(opt.mc_samples);
    if (std_error) *std_error = std::sqrt(m * (1.0 - m) / static_cast<double>(opt.mc_samples));
    return m;
}

PhiSeries phi_sum(const TargetSpec& target, const std::vector<long long>& checkpoints, const PhiOptions& opt) {
    PhiSeries out;
    out.checkpoints = checkpoints;
    std::sort(out.checkpoints.begin(), out.checkpoints.end());
    long double sum = 0.0L, var = 0.0L;
    long long n = 0;
    for (long long cp : out.checkpoints) {
        while (n < cp) {
            ++n;
            double se = 0.0;
            sum += target_measure(target, n, opt, &se);
            var += static_cast<long double>(se) * se;
        }
        out.values.push_back(static_cast<double>(sum));
        out.std_error.push_back(std::sqrt(static_cast<double>(var)));
    }
    return out;
}

template <class S>
Membership contains_arcs(const TargetSpec& target, const std::vector<S>& radii, const std::vector<Arc<S>>& x,
                         const S& margin) {
    size_t d = target.dim();
    if (x.size() != d) fail(ErrorKind::InvalidInput, "point dimension mismatch");
    const S zero(0);
    if (target.shape == Shape::Hyperboloid) {
        const S& delta = radii.at(0);
        S pmax(1), pmin(1);
        for (size_t i = 0; i < d; ++i) {
            S dmin, dmax;
            distance_range(x[i], S(target.center[i]), dmin, dmax);
            S down = dmin - margin;
            pmax *= dmax + margin;
            pmin *= down > zero ? down : zero;
        }
        if (pmax <= delta) return Membership::Yes;
        if (pmin > delta) return Membership::No;
        return Membership::Ambiguous;
    }
    bool all_in = true;
    for (size_t i = 0; i < d; ++i) {
        const S& r = radii.at(target.shape == Shape::Rectangle ? i : 0);
        S dmin, dmax;
        distance_range(x[i], S(target.center[i]), dmin, dmax);
        if (dmin - margin > r) return Membership::No;
        if (dmax + margin > r) all_in = false;
    }
    return all_in ? Membership::Yes : Membership::Ambiguous;
}

template Membership contains_arcs<double>(const TargetSpec&, const std::vector<double>&,
                                          const std::vector<Arc<double>>&, const double&);
template Membership contains_arcs<mpq_class>(const TargetSpec&, const std::vector<mpq_class>&,
                                             const std::vector<Arc<mpq_class>>&, const mpq_class&);

Membership contains_with_radii(const TargetSpec& target, const std::vector<double>& radii,
                               const std::vector<Arc<double>>& x) {
    // Distances are differences of numbers in [0,2]; a few ulps of 2 cover the rounding.
    constexpr double kMargin = 4.0 * std::numeric_limits<double>::epsilon();
    if (target.shape != Shape::Hyperboloid) return contains_arcs<double>(target, radii, x, kMargin);
    auto m = contains_arcs<double>(target, radii, x, kMargin);
    if (m == Membership::Ambiguous) return m;
    // Products of d factors add a relative error of about d ulps.
    double rel = 1.0 + 4.0 * static_cast<double>(target.dim()) * std::numeric_limits<double>::epsilon();
    std::vector<double> narrow{radii[0] / rel}, wide{radii[0] * rel};
    auto a = contains_arcs<double>(target, narrow, x, kMargin);
    auto b = contains_arcs<double>(target, wide, x, kMargin);
    return a == b ? a : Membership::Ambiguous;
}

void radii_into(const TargetSpec& target, long long n, std::vector<double>& out) {
    size_t k = target.shape == Shape::Rectangle ? target.dim() : 1;
    out.resize(k);
    for (size_t i = 0; i < k; ++i) out[i] = target.radius(i, n);
}

Membership contains(const TargetSpec& target, long long n, const std::vector<Arc<double>>& x) {
    std::vector<double> radii;
    radii_into(target, n, radii);
    return contains_with_radii(target, radii, x);
}

Membership contains_exact(const TargetSpec& target, long long n, const std::vector<Arc<mpq_class>>& x) {
    std::vector<double> rd;
    radii_into(target, n, rd);
    std::vector<mpq_class> radii(rd.begin(), rd.end());
    return contains_arcs<mpq_class>(target, radii, x, mpq_class(0));
}

Membership contains(const TargetSpec& target, long long n, const std::vector<UnitRealInterval>& x) {
    std::vector<Arc<double>> arcs;
    arcs.reserve(x.size());
    for (const auto& xi : x) arcs.push_back(xi.to_arc());
    return contains(target, n, arcs);
}

bool AccumulationSet::bounded() const {
    for (const auto& p : points)
        for (double v : p)
            if (std::isinf(v)) return false;
    return true;
}

AccumulationSet accumulation_set(const std::vector<RateFunction>& rates, long long horizon, double cluster_radius) {
    if (rates.empty()) fail(ErrorKind::InvalidInput, "accumulation set needs at least one rate");
    AccumulationSet out;
    bool any_table = false;
    for (const auto& r : rates) any_table |= r.kind == RateFunction::Kind::Table;
    if (!any_table) {
        std::vector<double> p;
        for (const auto& r : rates) p.push_back(lower_order(r).value);
        out.points.push_back(std::move(p));
        return out;
    }
    // Cluster the tail of n -> (-log psi_i(n)/n)_i greedily.
    out.symbolic = false;
    out.radius = cluster_radius;
    long long hi = horizon;
    for (const auto& r : rates)
        if (r.kind == RateFunction::Kind::Table && r.extension == RateFunction::Extension::None)
            hi = std::min<long long>(hi, static_cast<long long>(r.table.size()));
    long long lo = std::max<long long>(1, hi / 2);
    for (long long n = lo; n <= hi; ++n) {
        std::vector<double> v;
        for (const auto& r : rates) {
            if (r.kind == RateFunction::Kind::Table) v.push_back(-log_psi(r, n) / static_cast<double>(n));
            else v.push_back(lower_order(r).value);
        }
        bool placed = false;
        for (const auto& p : out.points) {
            double dist = 0.0;
            for (size_t i = 0; i < v.size(); ++i) {
                if (std::isinf(p[i]) || std::isinf(v[i])) {
                    if (std::isinf(p[i]) != std::isinf(v[i])) dist = kInf;
                    continue;
                }
                dist = std::max(dist, std::abs(p[i] - v[i]));
            }
            if (dist <= cluster_radius) {
                placed = true;
                break;
            }
        }
        if (!placed) out.points.push_back(std::move(v));
    }
    return out;
}

}  // namespace shrink
