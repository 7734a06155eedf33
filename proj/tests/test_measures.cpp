#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "shrink/cylinders.hpp"
#include "shrink/measures.hpp"

using namespace shrink;

namespace {

const double g = (1 + std::sqrt(5.0)) / 2;

double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf) {
    std::sort(xs.begin(), xs.end());
    double n = static_cast<double>(xs.size()), d = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        double f = cdf(xs[i]);
        d = std::max({d, std::fabs(f - i / n), std::fabs((i + 1) / n - f)});
    }
    return d;
}

// Kolmogorov critical value at p = 0.01.
double ks_critical(size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

}  // namespace

TEST_CASE("density examples") {
    ParryYrrapMeasure m(-RealConstant::golden());
    CHECK(std::fabs(m.density(0.1) - 1 / (3 - g)) < 1e-10);
    CHECK(std::fabs(m.density(0.9) - g / (3 - g)) < 1e-10);
    ParryYrrapMeasure two(RealConstant::integer(2));
    for (double x : {0.0, 0.1, 0.5, 0.99}) CHECK(std::fabs(two.density(x) - 1.0) < 1e-12);
}

TEST_CASE("interval measures") {
    ParryYrrapMeasure two(RealConstant::integer(2));
    CHECK(std::fabs(two.measure_interval(0.2, 0.7) - 0.5) < 1e-12);
    ParryYrrapMeasure mg(-RealConstant::golden());
    CHECK(std::fabs(mg.measure_interval(0, 1) - 1) < 1e-12);
    // Golden Parry density is proportional to 1 + [x < 1/g]/g since T^2(1) = 0.
    ParryYrrapMeasure pg(RealConstant::golden());
    double oracle = (1 / g) * (1 + 1 / g) / (1 + 1 / (g * g));
    CHECK(std::fabs(pg.measure_interval(0, 1 / g) - oracle) < 1e-8);
}

TEST_CASE("normalization within twice the tail bound") {
    for (const char* b : {"g", "1.5", "2.7", "-g", "-2", "e", "-1.3", "sqrt(3)", "-pi"}) {
        ParryYrrapMeasure m(RealConstant::parse(b));
        CHECK(std::fabs(m.measure_interval(0, 1) - 1) <= 2 * m.tail_bound() + 1e-15);
    }
}

TEST_CASE("invariance on random intervals") {
    std::mt19937_64 rng(2024);
    for (const char* b : {"g", "1.5", "2.7", "-g", "-2"}) {
        RealConstant beta = RealConstant::parse(b);
        ParryYrrapMeasure m(beta);
        double worst = 0;
        for (int k = 0; k < 200; ++k) {
            double a = uniform01(rng);
            double r = 0.005 + 0.2 * uniform01(rng);
            double direct = 0;
            double lo = a - r, hi = a + r;
            if (lo < 0)
                direct = m.measure_interval(0, hi) + m.measure_interval(lo + 1, 1);
            else if (hi > 1)
                direct = m.measure_interval(0, hi - 1) + m.measure_interval(lo, 1);
            else
                direct = m.measure_interval(lo, hi);
            double pre = 0;
            for (const auto& p : preimage_intervals(beta, 1, a, r)) pre += m.measure_interval(p.lo, p.hi);
            worst = std::max(worst, std::fabs(pre - direct));
        }
        CHECK(worst < 1e-6);
    }
}

TEST_CASE("density bounds for beta <= -g on a grid") {
    for (double bv : {-g, -2.0, -2.7, -5.0}) {
        RealConstant beta = std::fabs(bv + g) < 1e-15 ? -RealConstant::golden() : RealConstant::parse(std::to_string(bv));
        ParryYrrapMeasure m(beta);
        double c = density_bound_constant(bv);
        double lo = 1e300, hi = 0;
        for (int i = 0; i < 10000; ++i) {
            double h = m.density((i + 0.5) / 10000);
            lo = std::min(lo, h);
            hi = std::max(hi, h);
        }
        CHECK(lo >= 1 / c - 1e-9);
        CHECK(hi <= c + 1e-9);
    }
}

TEST_CASE("support") {
    auto s3 = support(RealConstant::integer(3));
    REQUIRE(s3.intervals.size() == 1);
    CHECK(s3.intervals[0].first == 0.0);
    CHECK(s3.intervals[0].second == 1.0);
    auto sg = support(-RealConstant::golden());
    REQUIRE(sg.intervals.size() == 1);
    CHECK(sg.total_length() == doctest::Approx(1.0));

    auto s13 = support(RealConstant::parse("-1.3"));
    CHECK(s13.intervals.size() > 1);
    CHECK(s13.total_length() < 1.0);
    // Long-orbit closure oracle: a typical orbit stays in and visits every component.
    double beta = -1.3, x = 0.3141592653;
    std::vector<int> visits(s13.intervals.size(), 0);
    int outside = 0;
    for (int n = 0; n < 1000000; ++n) {
        x = beta * x - std::floor(beta * x);
        if (n < 1000) continue;
        bool in = false;
        for (size_t k = 0; k < s13.intervals.size(); ++k)
            if (x >= s13.intervals[k].first - 1e-3 && x <= s13.intervals[k].second + 1e-3) {
                ++visits[k];
                in = true;
            }
        outside += !in;
    }
    CHECK(outside == 0);
    for (int v : visits) CHECK(v > 0);
}

TEST_CASE("product measure") {
    ProductMeasure unit({ParryYrrapMeasure(RealConstant::integer(2)), ParryYrrapMeasure(RealConstant::integer(2))});
    CHECK(unit.rectangle({{0, 1}, {0, 1}}) == doctest::Approx(1.0).epsilon(1e-12));
    ProductMeasure p23({ParryYrrapMeasure(RealConstant::integer(2)), ParryYrrapMeasure(RealConstant::integer(3))});
    CHECK(p23.rectangle({{0, 0.5}, {0, 1.0 / 3}}) == doctest::Approx(1.0 / 6).epsilon(1e-12));

    ParryYrrapMeasure a(RealConstant::golden()), b(-RealConstant::golden());
    ProductMeasure pg({a, b});
    double want = a.measure_interval(0, 0.5) * b.measure_interval(0, 0.5);
    CHECK(std::fabs(pg.rectangle({{0, 0.5}, {0, 0.5}}) - want) < 1e-8);
    // Golden factor on [0, 1/2] from the closed-form density.
    double ga = 0.5 * (1 + 1 / g) / (1 + 1 / (g * g));
    CHECK(std::fabs(a.measure_interval(0, 0.5) - ga) < 1e-8);
    // Negative golden factor from the two branch values: 1/(3-g) below 2-g, g/(3-g) above.
    double gb = (2 - g) / (3 - g) + (0.5 - (2 - g)) * g / (3 - g);
    CHECK(std::fabs(b.measure_interval(0, 0.5) - gb) < 1e-8);

    // Monte Carlo under sample() within 4 standard errors.
    std::mt19937_64 rng(9);
    const int n = 200000;
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        auto x = pg.sample(rng);
        hits += x[0] < 0.5 && x[1] < 0.5;
    }
    double p = double(hits) / n, se = std::sqrt(want * (1 - want) / n);
    CHECK(std::fabs(p - want) < 4 * se);
}

TEST_CASE("sampling") {
    std::mt19937_64 rng(1);
    const size_t n = 100000;
    ParryYrrapMeasure two(RealConstant::integer(2));
    std::vector<double> xs(n);
    for (auto& x : xs) x = two.sample(rng);
    CHECK(ks_statistic(xs, [](double x) { return x; }) < ks_critical(n));

    ParryYrrapMeasure mg(-RealConstant::golden());
    for (auto& x : xs) x = mg.sample(rng);
    CHECK(ks_statistic(xs, [&](double x) { return mg.cdf(x); }) < ks_critical(n));

    ParryYrrapMeasure m15(RealConstant::parse("1.5"));
    double sup = 0;
    for (int i = 0; i < 100000; ++i) sup = std::max(sup, m15.density((i + 0.5) / 100000));
    uint64_t proposals = 0;
    for (size_t i = 0; i < n; ++i) m15.sample(rng, &proposals);
    double rate = double(n) / proposals;
    CHECK(rate >= 1 / sup - 4 * std::sqrt(rate * (1 - rate) / proposals));
}

TEST_CASE("inverse cdf is a right inverse of the cdf") {
    for (const char* b : {"g", "-g", "2.7", "-1.3"}) {
        ParryYrrapMeasure m(RealConstant::parse(b));
        for (int i = 1; i < 100; ++i) {
            double u = i / 100.0;
            CHECK(std::fabs(m.cdf(m.inverse_cdf(u)) - u) < 1e-9);
        }
    }
}

TEST_CASE("density is a finite step function with nonnegative values") {
    for (const char* b : {"g", "-g", "2.7", "-1.3"}) {
        ParryYrrapMeasure m(RealConstant::parse(b));
        const auto& br = m.breakpoints();
        CHECK(br.front() == 0.0);
        CHECK(br.back() == 1.0);
        CHECK(std::is_sorted(br.begin(), br.end()));
        // Truncation may leave values a tail bound below zero on gaps of the support.
        for (double v : m.step_values()) CHECK(v >= -2 * m.tail_bound());
        for (double v : m.step_values()) CHECK(v <= m.envelope() + 1e-12);
    }
}
