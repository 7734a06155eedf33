#include "shrink/measures.hpp"
#include "shrink/cylinders.hpp"
#include "shrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace shrink {

ParryYrrapMeasure::ParryYrrapMeasure(const RealConstant& beta, double tol, int max_terms)
    : beta_const_(beta), beta_(beta.value()) {
    double ab = std::abs(beta_);
    if (ab <= 1.0) fail(ErrorKind::Precondition, "invariant measure needs |beta| > 1");
    if (!(tol > 0.0)) fail(ErrorKind::InvalidInput, "tolerance must be positive");
    // Smallest N with |beta|^{-N}/(|beta|-1) <= tol.
    double n_real = std::log(1.0 / (tol * (ab - 1.0))) / std::log(ab);
    int n_tr = std::max(1, static_cast<int>(std::ceil(n_real)));
    while (std::pow(ab, -n_tr) / (ab - 1.0) > tol) ++n_tr;
    while (n_tr > 1 && std::pow(ab, -(n_tr - 1)) / (ab - 1.0) <= tol) --n_tr;
    if (n_tr > max_terms)
        fail(ErrorKind::TolUnreachable, "truncation order " + std::to_string(n_tr) + " exceeds the cap");
    tail_bound_ = std::pow(ab, -n_tr) / (ab - 1.0);

    OrbitOfOne orbit(beta, n_tr);
    long double w = 1.0L, f = 0.0L;
    for (int n = 0; n < n_tr; ++n) {
        orbit_.push_back(orbit.value(n));
        weights_.push_back(static_cast<double>(w));
        f += w * static_cast<long double>(orbit.value(n));
        w /= beta_;
    }
    normalizer_ = static_cast<double>(f);
    if (!(normalizer_ > 0.0)) fail(ErrorKind::TolUnreachable, "normalizer is not positive");

    breaks_ = {0.0, 1.0};
    for (double v : orbit_)
        if (v > 0.0 && v < 1.0) breaks_.push_back(v);
    std::sort(breaks_.begin(), breaks_.end());
    breaks_.erase(std::unique(breaks_.begin(), breaks_.end()), breaks_.end());

    // Segment i = [b_i, b_{i+1}) carries the weights of orbit points >= b_{i+1}.
    std::vector<size_t> order(orbit_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return orbit_[a] > orbit_[b]; });
    size_t segs = breaks_.size() - 1;
    values_.assign(segs, 0.0);
    long double acc = 0.0L;
    size_t pos = 0;
    for (size_t i = segs; i-- > 0;) {
        while (pos < order.size() && orbit_[order[pos]] >= breaks_[i + 1]) acc += weights_[order[pos++]];
        values_[i] = static_cast<double>(acc / f);
    }
    cum_.assign(breaks_.size(), 0.0);
    long double c = 0.0L;
    for (size_t i = 0; i < segs; ++i) {
        cum_[i] = static_cast<double>(c);
        c += static_cast<long double>(values_[i]) * (breaks_[i + 1] - breaks_[i]);
    }
    cum_[segs] = static_cast<double>(c);
    envelope_ = *std::max_element(values_.begin(), values_.end());
}

double ParryYrrapMeasure::density(double x) const {
    if (x < 0.0 || x >= 1.0) return 0.0;
    auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    size_t i = static_cast<size_t>(it - breaks_.begin()) - 1;
    // Negative beta counts orbit points with T^n(1) >= x, so a breakpoint
    // takes the value of the segment on its left.
    if (beta_ < 0 && i > 0 && breaks_[i] == x) --i;
    return values_[std::min(i, values_.size() - 1)];
}

double ParryYrrapMeasure::measure_interval(double a, double b) const {
    auto F = [&](double x) {
        if (x <= 0.0) return 0.0;
        if (x >= 1.0) return cum_.back();
        auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
        size_t i = static_cast<size_t>(it - breaks_.begin()) - 1;
        return cum_[i] + values_[i] * (x - breaks_[i]);
    };
    if (b <= a) return 0.0;
    return F(b) - F(a);
}

double ParryYrrapMeasure::inverse_cdf(double u) const {
    if (u <= 0.0) return 0.0;
    if (u >= cum_.back()) return std::nextafter(1.0, 0.0);
    auto it = std::upper_bound(cum_.begin(), cum_.end(), u);
    size_t i = static_cast<size_t>(it - cum_.begin()) - 1;
    while (i + 1 < cum_.size() && values_[i] <= 0.0) ++i;
    double x = breaks_[i] + (u - cum_[i]) / values_[i];
    return std::clamp(x, breaks_[i], std::nextafter(breaks_[i + 1], 0.0));
}

double ParryYrrapMeasure::sample(std::mt19937_64& rng, uint64_t* proposals) const {
    for (;;) {
        double x = uniform01(rng);
        double u = uniform01(rng);
        if (proposals) ++*proposals;
        if (u * envelope_ < density(x)) return x;
    }
}

double density_bound_constant(double beta) {
    if (std::abs(beta + kGolden) < 1e-12) return 3.0 + beta;
    if (beta < -kGolden) return beta * beta / (beta * beta + beta - 1.0);
    fail(ErrorKind::Precondition, "density bound constant needs beta <= -g");
}

double SupportSet::total_length() const {
    double s = 0.0;
    for (const auto& [a, b] : intervals) s += b - a;
    return s;
}

bool SupportSet::contains(double x, double slack) const {
    for (const auto& [a, b] : intervals)
        if (x >= a - slack && x <= b + slack) return true;
    return false;
}

SupportSet support(const RealConstant& beta, double tol, double merge_gap) {
    double b = beta.value();
    if (std::abs(b) <= 1.0) fail(ErrorKind::Precondition, "support needs |beta| > 1");
    SupportSet out;
    if (b > 1.0 || b <= -kGolden + 1e-15) {
        out.intervals.push_back({0.0, 1.0});
        return out;
    }
    ParryYrrapMeasure mu(beta);
    const auto& br = mu.breakpoints();
    const auto& val = mu.step_values();
    for (size_t i = 0; i < val.size(); ++i) {
        if (val[i] <= tol) continue;
        if (!out.intervals.empty() && br[i] - out.intervals.back().second < merge_gap)
            out.intervals.back().second = br[i + 1];
        else
            out.intervals.push_back({br[i], br[i + 1]});
    }
    return out;
}

double ProductMeasure::rectangle(const std::vector<std::pair<double, double>>& rect, double* err) const {
    if (rect.size() != factors_.size()) fail(ErrorKind::InvalidInput, "rectangle dimension mismatch");
    double p = 1.0, e = 0.0;
    for (size_t i = 0; i < rect.size(); ++i) {
        p *= factors_[i].measure_interval(rect[i].first, rect[i].second);
        e += 2.0 * factors_[i].tail_bound();
    }
    if (err) *err = e;
    return p;
}

std::vector<double> ProductMeasure::sample(std::mt19937_64& rng) const {
    std::vector<double> x;
    for (const auto& f : factors_) x.push_back(f.sample(rng));
    return x;
}

}  // namespace shrink
