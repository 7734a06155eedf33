#include "shrink/dimension.hpp"
#include "shrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace shrink {

namespace {

void check_moduli(const std::vector<double>& moduli) {
    if (moduli.empty()) fail(ErrorKind::InvalidInput, "empty spectrum");
    for (double b : moduli)
        if (!(b > 1.0)) fail(ErrorKind::InvalidInput, "moduli must exceed 1");
    if (!std::is_sorted(moduli.begin(), moduli.end())) fail(ErrorKind::InvalidInput, "moduli must be sorted");
}

void check_t(const std::vector<double>& moduli, const std::vector<double>& t) {
    if (t.size() != moduli.size()) fail(ErrorKind::InvalidInput, "t-vector dimension mismatch");
    for (double v : t)
        if (!(v >= 0.0)) fail(ErrorKind::InvalidInput, "t entries must be nonnegative");
}

// Weighted partition sum; weights are all 1 for theta.
double theta_weighted(size_t i, const std::vector<double>& moduli, const std::vector<double>& t,
                      const std::vector<double>* deltas, Strictness s, const std::vector<bool>* drop) {
    if (i >= moduli.size()) fail(ErrorKind::InvalidInput, "coordinate index out of range");
    if (std::isinf(t[i])) fail(ErrorKind::InfiniteCoordinate, "t_i is infinite; use unbounded_bounds");
    double li = std::log(moduli[i]);
    double den = li + t[i];
    double sum = 0.0;
    for (size_t k = 0; k < moduli.size(); ++k) {
        if (drop && (*drop)[k]) continue;
        double w = deltas ? (*deltas)[k] : 1.0;
        double lk = std::log(moduli[k]);
        bool in1 = s.k1_strict ? lk > den : lk >= den;
        bool in2 = !in1 && (s.k2_strict ? lk + t[k] < den : lk + t[k] <= den);
        if (in1) sum += w;
        else if (in2) sum += w * (1.0 - t[k] / den);
        else sum += w * lk / den;
    }
    return sum;
}

// Sup-norm Lipschitz bound of theta_i on a t-ball of radius r.
double theta_lipschitz(size_t i, const std::vector<double>& moduli, const std::vector<double>& t, double r) {
    double den = std::log(moduli[i]) + std::max(0.0, t[i] - r);
    double top = 0.0;
    for (size_t k = 0; k < moduli.size(); ++k) top += std::max(t[k] + r, std::log(moduli[k]));
    return static_cast<double>(moduli.size()) / den + top / (den * den);
}

template <class F>
DimensionReport sup_min(const std::vector<double>& moduli, const AccumulationSet& u, F theta, const char* method) {
    check_moduli(moduli);
    if (u.points.empty()) fail(ErrorKind::InvalidInput, "accumulation set is empty");
    if (!u.bounded()) fail(ErrorKind::UnboundedU, "accumulation set has infinite entries; use unbounded_bounds");
    DimensionReport rep;
    rep.method = method;
    rep.value = -1.0;
    for (const auto& t : u.points) {
        check_t(moduli, t);
        double best = kInf, lip = 0.0;
        size_t arg = 0;
        for (size_t i = 0; i < moduli.size(); ++i) {
            double th = theta(i, t);
            if (th < best) {
                best = th;
                arg = i;
            }
            if (!u.symbolic) lip = std::max(lip, theta_lipschitz(i, moduli, t, u.radius));
        }
        if (best > rep.value) {
            rep.value = best;
            rep.argmin = arg;
            rep.t = t;
            rep.error_bound = u.symbolic ? 0.0 : lip * u.radius;
        }
    }
    for (size_t i = 0; i < moduli.size(); ++i) rep.partition.push_back(partition_of(i, moduli, rep.t));
    return rep;
}

}  // namespace

Partition partition_of(size_t i, const std::vector<double>& moduli, const std::vector<double>& t, Strictness s) {
    Partition p;
    double den = std::log(moduli[i]) + t[i];
    for (size_t k = 0; k < moduli.size(); ++k) {
        double lk = std::log(moduli[k]);
        if (s.k1_strict ? lk > den : lk >= den) p.k1.push_back(k);
        else if (s.k2_strict ? lk + t[k] < den : lk + t[k] <= den) p.k2.push_back(k);
        else p.k3.push_back(k);
    }
    return p;
}

double theta_rect(size_t i, const std::vector<double>& moduli, const std::vector<double>& t, Strictness s) {
    check_moduli(moduli);
    check_t(moduli, t);
    return theta_weighted(i, moduli, t, nullptr, s, nullptr);
}

double conjectured_theta_hat(size_t i, const std::vector<double>& moduli, const std::vector<double>& t,
                             const std::vector<double>& deltas) {
    check_moduli(moduli);
    check_t(moduli, t);
    if (deltas.size() != moduli.size()) fail(ErrorKind::InvalidInput, "delta vector dimension mismatch");
    for (double dl : deltas)
        if (!(dl > 0.0 && dl <= 1.0)) fail(ErrorKind::InvalidInput, "deltas must lie in (0,1]");
    return theta_weighted(i, moduli, t, &deltas, {}, nullptr);
}

DimensionReport dim_rect(const std::vector<double>& moduli, const AccumulationSet& u) {
    return sup_min(
        moduli, u, [&](size_t i, const std::vector<double>& t) { return theta_weighted(i, moduli, t, nullptr, {}, nullptr); },
        "rect");
}

DimensionReport dim_hat(const std::vector<double>& moduli, const AccumulationSet& u, const std::vector<double>& deltas) {
    auto rep = sup_min(
        moduli, u, [&](size_t i, const std::vector<double>& t) { return conjectured_theta_hat(i, moduli, t, deltas); },
        "conj_hat");
    rep.conjectural = true;
    return rep;
}

DimensionReport dim_ball(const std::vector<double>& moduli, double lambda) {
    check_moduli(moduli);
    if (!(lambda >= 0.0)) fail(ErrorKind::InvalidInput, "lambda must be nonnegative");
    size_t d = moduli.size();
    DimensionReport rep;
    rep.method = "ball";
    if (std::isinf(lambda)) {
        rep.value = 0.0;
        rep.t.assign(d, kInf);
        return rep;
    }
    rep.value = kInf;
    for (size_t i = 0; i < d; ++i) {
        double li = std::log(moduli[i]);
        // k2: last index with log b_k <= log b_i + lambda.
        size_t k2 = 0;
        for (size_t k = 0; k < d; ++k)
            if (std::log(moduli[k]) <= li + lambda) k2 = k + 1;
        double num = static_cast<double>(i + 1) * li;
        for (size_t k = k2; k < d; ++k) num -= std::log(moduli[k]) - li - lambda;
        for (size_t k = i + 1; k < d; ++k) num += std::log(moduli[k]);
        double th = num / (lambda + li);
        if (th < rep.value) {
            rep.value = th;
            rep.argmin = i;
        }
    }
    rep.t.assign(d, lambda);
    for (size_t i = 0; i < d; ++i) rep.partition.push_back(partition_of(i, moduli, rep.t));
    return rep;
}

double dim_onedim(double beta_modulus, double lambda) {
    if (!(beta_modulus > 1.0)) fail(ErrorKind::InvalidInput, "|beta| must exceed 1");
    if (!(lambda >= 0.0)) fail(ErrorKind::InvalidInput, "lambda must be nonnegative");
    if (std::isinf(lambda)) return 0.0;
    double l = std::log(beta_modulus);
    return l / (lambda + l);
}

double dim_mult(const std::vector<double>& moduli, double lambda) {
    check_moduli(moduli);
    if (!(lambda >= 0.0)) fail(ErrorKind::InvalidInput, "lambda must be nonnegative");
    double ld = std::log(moduli.back());
    double last = std::isinf(lambda) ? 0.0 : ld / (lambda + ld);
    return static_cast<double>(moduli.size() - 1) + last;
}

double mtp_s(const MtpInput& in, size_t i) {
    size_t p = in.deltas.size();
    if (p == 0 || in.u.size() != p || in.v.size() != p) fail(ErrorKind::InvalidInput, "MTP vectors must share a nonzero length");
    for (size_t k = 0; k < p; ++k) {
        if (!(in.deltas[k] > 0.0)) fail(ErrorKind::InvalidInput, "MTP deltas must be positive");
        if (!(in.u[k] > 0.0 && in.u[k] < in.v[k])) fail(ErrorKind::InvalidInput, "MTP needs 0 < u_k < v_k");
    }
    if (i >= p) fail(ErrorKind::InvalidInput, "coordinate index out of range");
    double vi = in.v[i], s = 0.0;
    for (size_t k = 0; k < p; ++k) {
        if (in.u[k] >= vi) s += in.deltas[k];
        else if (in.v[k] <= vi) s += in.deltas[k] * (1.0 - (in.v[k] - in.u[k]) / vi);
        else s += in.u[k] * in.deltas[k] / vi;
    }
    return s;
}

double mtp_dimension(const MtpInput& in) {
    double best = kInf;
    for (size_t i = 0; i < in.deltas.size(); ++i) best = std::min(best, mtp_s(in, i));
    if (in.deltas.empty()) fail(ErrorKind::InvalidInput, "MTP input is empty");
    return best;
}

MarkovBounds markov_bounds(double beta_modulus, double lambda) {
    if (!(beta_modulus > 8.0)) fail(ErrorKind::SlopeTooSmall, "slope must exceed 8; pass a power of the map");
    if (!(lambda >= 0.0)) fail(ErrorKind::InvalidInput, "lambda must be nonnegative");
    double lb = std::log(beta_modulus);
    MarkovBounds out;
    out.dim_lb = 1.0 - std::log(8.0) / lb;
    out.dim_lambda_lb = std::isinf(lambda) ? 0.0 : out.dim_lb / (1.0 + lambda / lb);
    return out;
}

DimensionBounds unbounded_bounds(const std::vector<double>& moduli, const AccumulationSet& u) {
    check_moduli(moduli);
    if (u.points.empty()) fail(ErrorKind::InvalidInput, "accumulation set is empty");
    DimensionBounds out;
    out.lower = out.upper = -1.0;
    for (const auto& t : u.points) {
        check_t(moduli, t);
        std::vector<bool> drop(t.size());
        size_t finite = 0;
        for (size_t k = 0; k < t.size(); ++k) {
            drop[k] = std::isinf(t[k]);
            finite += !drop[k];
        }
        double lo = static_cast<double>(finite), hi = lo;
        for (size_t i = 0; i < t.size(); ++i) {
            if (drop[i]) continue;
            lo = std::min(lo, theta_weighted(i, moduli, t, nullptr, {}, &drop));
            hi = std::min(hi, theta_weighted(i, moduli, t, nullptr, {}, nullptr));
        }
        if (lo > out.lower) {
            out.lower = lo;
            out.t_lower = t;
        }
        if (hi > out.upper) {
            out.upper = hi;
            out.t_upper = t;
        }
    }
    return out;
}

const char* reduction_kind_name(ReductionOutcome::Kind k) {
    switch (k) {
        case ReductionOutcome::Kind::Empty: return "empty";
        case ReductionOutcome::Kind::FixedSlice: return "fixed_slice";
        case ReductionOutcome::Kind::IntervalSlice: return "interval_slice";
        case ReductionOutcome::Kind::ParitySplit: return "parity_split";
        case ReductionOutcome::Kind::FullSlice: return "full_slice";
        case ReductionOutcome::Kind::CountableSlice: return "countable_slice";
    }
    return "?";
}

std::string ReductionOutcome::describe() const {
    std::ostringstream os;
    os.precision(12);
    switch (kind) {
        case Kind::Empty: os << "empty set"; break;
        case Kind::FixedSlice: os << "{" << points.at(0) << "} x W(T_*)"; break;
        case Kind::IntervalSlice: os << "I x W(T_*), I = (" << lo << ", " << hi << ") or its closure"; break;
        case Kind::ParitySplit:
            os << "{" << points.at(0) << "} x W'(T_*) u {" << points.at(1) << "} x W''(T_*), even/odd times";
            break;
        case Kind::FullSlice: os << "T x W(T_*)"; break;
        case Kind::CountableSlice: os << "F x W(T_*), F = preimages of 0"; break;
    }
    return os.str();
}

double limsup_scaled_rate(const RateFunction& rate, double beta_modulus) {
    if (!(beta_modulus > 0.0 && beta_modulus < 1.0)) fail(ErrorKind::InvalidInput, "scaling needs 0 < |b| < 1");
    double g = -std::log(beta_modulus);  // psi(n)|b|^{-n} = exp(log psi(n) + n g)
    constexpr double kTie = 1e-12;
    switch (rate.kind) {
        case RateFunction::Kind::Exponential:
            if (std::abs(rate.t - g) <= kTie) return rate.c;
            return rate.t > g ? 0.0 : kInf;
        case RateFunction::Kind::PowerLaw: return kInf;
        case RateFunction::Kind::SuperExponential: return 0.0;
        case RateFunction::Kind::Table: {
            auto len = static_cast<long long>(rate.table.size());
            if (rate.extension == RateFunction::Extension::HoldLast) return kInf;
            if (rate.extension == RateFunction::Extension::Geometric) {
                double lr = std::log(rate.table[len - 1]) - std::log(rate.table[len - 2]);
                if (std::abs(lr + g) <= kTie) return rate.table.back() * std::exp(g * static_cast<double>(len));
                return lr + g < 0.0 ? 0.0 : kInf;
            }
            // Finite table: max over the tail window.
            double best = 0.0;
            for (long long n = std::max<long long>(1, len / 2); n <= len; ++n)
                best = std::max(best, std::exp(log_psi(rate, n) + g * static_cast<double>(n)));
            return best;
        }
    }
    return 0.0;
}

ReductionOutcome degenerate_reduction(const std::vector<double>& betas, const RateFunction& rate,
                                      const std::vector<double>& center) {
    if (betas.size() != center.size()) fail(ErrorKind::InvalidInput, "center dimension mismatch");
    size_t j = betas.size();
    for (size_t k = 0; k < betas.size(); ++k) {
        if (std::abs(betas[k]) <= 1.0) {
            if (j != betas.size()) fail(ErrorKind::InvalidInput, "exactly one coordinate may have |b| <= 1");
            j = k;
        }
    }
    if (j == betas.size()) fail(ErrorKind::InvalidInput, "no coordinate with |b| <= 1");
    ReductionOutcome out;
    out.coordinate = j;
    for (size_t k = 0; k < betas.size(); ++k) {
        if (k == j) continue;
        out.reduced_betas.push_back(betas[k]);
        out.reduced_center.push_back(center[k]);
    }
    double b = betas[j], a = center[j];
    constexpr double kTie = 1e-12;
    using K = ReductionOutcome::Kind;
    if (b == 1.0 || b == -1.0) {
        if (!rate_vanishes(rate)) fail(ErrorKind::RateNotVanishing, "the |b| = 1 reduction needs psi(n) -> 0");
        if (b == 1.0 || a == 0.0) {
            out.kind = K::FixedSlice;
            out.points = {a};
        } else {
            out.kind = K::ParitySplit;
            out.points = {a, 1.0 - a};
            out.squared_system = true;
        }
        return out;
    }
    if (b == 0.0) {
        out.kind = a == 0.0 ? K::FullSlice : K::Empty;
        return out;
    }
    out.tau = limsup_scaled_rate(rate, std::abs(b));
    if (b > 0.0) {
        if (a != 0.0) {
            out.kind = K::Empty;
        } else if (out.tau == 0.0) {
            out.kind = K::FixedSlice;
            out.points = {0.0};
        } else {
            out.kind = K::IntervalSlice;
            out.lo = 0.0;
            out.hi = std::min(1.0, out.tau);
        }
        return out;
    }
    double p = 1.0 / (1.0 - b);
    if (a == 0.0) {
        out.kind = K::CountableSlice;
    } else if (std::abs(a - p) > kTie) {
        out.kind = K::Empty;
    } else if (out.tau == 0.0) {
        out.kind = K::FixedSlice;
        out.points = {p};
    } else {
        out.kind = K::IntervalSlice;
        out.lo = std::max(0.0, p - out.tau);
        out.hi = std::min(1.0, p + out.tau);
    }
    return out;
}

std::vector<CoverCost> cover_cost_sequence(const std::vector<double>& moduli, const std::vector<RateFunction>& rates,
                                           size_t i, double s, long long n_first, long long n_last) {
    check_moduli(moduli);
    size_t d = moduli.size();
    if (rates.size() != d) fail(ErrorKind::InvalidInput, "one rate per coordinate required");
    if (i >= d) fail(ErrorKind::InvalidInput, "coordinate index out of range");
    if (n_first < 1 || n_last < n_first) fail(ErrorKind::InvalidInput, "bad n range");
    double sum_log = 0.0;
    for (double b : moduli) sum_log += std::log(b);
    std::vector<CoverCost> out;
    out.reserve(static_cast<size_t>(n_last - n_first + 1));
    for (long long n = n_first; n <= n_last; ++n) {
        double dn = static_cast<double>(n);
        double li = std::log(moduli[i]);
        double dcap = -log_psi(rates[i], n) / dn + li;
        double lg = std::log(dn + 3.0) / dn;
        double num = sum_log;
        for (size_t k = 0; k < d; ++k) {
            double lk = std::log(moduli[k]);
            if (-lg + lk > dcap) num += lg - lk + dcap;
            else if (-log_psi(rates[k], n) / dn + lk <= dcap) num += log_psi(rates[k], n) / dn - lk + dcap;
        }
        CoverCost c;
        c.n = n;
        c.h = num / dcap;
        c.ell = dcap * (s - c.h);
        out.push_back(c);
    }
    return out;
}

}  // namespace shrink
