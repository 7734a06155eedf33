#include <doctest.h>

#include <cmath>
#include <random>

#include "shrink/counting.hpp"
#include "shrink/cylinders.hpp"
#include "shrink/error.hpp"

using namespace shrink;

namespace {

const double g = (1 + std::sqrt(5.0)) / 2;

TorusSystem diag(std::vector<RealConstant> b) { return DiagonalTorusSystem::make(std::move(b)); }

mpq_class frac_q(const mpq_class& x) {
    mpz_class f;
    mpz_fdiv_q(f.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
    return x - f;
}

mpq_class torus_norm_q(const mpq_class& x) {
    mpq_class t = frac_q(x);
    mpq_class u = 1 - t;
    return t < u ? t : u;
}

// Exact hit count of a rational orbit under an integer matrix in a closed ball
// with radii taken exactly from their double values.
std::vector<long long> rational_oracle(const std::vector<std::vector<long long>>& m, std::vector<mpq_class> x,
                                       const TargetSpec& t, const std::vector<long long>& checkpoints) {
    std::vector<long long> out;
    long long r = 0;
    size_t next = 0;
    long long last = checkpoints.back();
    for (long long n = 1; n <= last; ++n) {
        std::vector<mpq_class> y(x.size());
        for (size_t i = 0; i < x.size(); ++i) {
            y[i] = 0;
            for (size_t j = 0; j < x.size(); ++j) y[i] += mpq_class(static_cast<long>(m[i][j])) * x[j];
            y[i] = frac_q(y[i]);
        }
        x = y;
        mpq_class rad(t.radius(0, n));
        bool in = true;
        for (size_t i = 0; i < x.size(); ++i) in = in && torus_norm_q(x[i] - mpq_class(t.center[i])) <= rad;
        r += in;
        while (next < checkpoints.size() && checkpoints[next] == n) {
            out.push_back(r);
            ++next;
        }
    }
    return out;
}

// mu(E n T^{-n} F) through exact preimages of F, independent of sampling.
double joint_measure(const ParryYrrapMeasure& mu, const RealConstant& beta, Interval e, Interval f, int n) {
    double a = 0.5 * (f.first + f.second), r = 0.5 * (f.second - f.first);
    double s = 0;
    for (const auto& p : preimage_intervals(beta, n, a, r)) {
        double lo = std::max(p.lo, e.first), hi = std::min(p.hi, e.second);
        if (hi > lo) s += mu.measure_interval(lo, hi);
    }
    return s;
}

}  // namespace

TEST_CASE("single orbit examples") {
    auto sys = diag({RealConstant::integer(2)});
    auto t = TargetSpec::ball({0.0}, RateFunction::exponential(std::log(2.0), 0.5));
    auto r = count_hits(sys, t, ExactPoint{{0}}, {1, 10, 100, 1000});
    REQUIRE(r.checkpoints.size() == 4);
    for (const auto& c : r.checkpoints) {
        CHECK(c.r_lo == c.n);
        CHECK(c.r_hi == c.n);
    }
    auto t2 = TargetSpec::ball({0.0}, RateFunction::constant(0.25));
    auto r2 = count_hits(sys, t2, ExactPoint{{mpq_class(1, 3)}}, {1, 2, 3, 1000});
    for (const auto& c : r2.checkpoints) CHECK(c.r_hi == 0);
}

TEST_CASE("monte carlo with no steps") {
    auto sys = diag({RealConstant::integer(2), RealConstant::integer(3)});
    auto t = TargetSpec::ball({0.3, 0.7}, RateFunction::power_law(0.5, 0.25));
    auto s = monte_carlo_counting(sys, t, 1, {0}, 1);
    REQUIRE(s.samples.size() == 1);
    CHECK(s.samples[0].checkpoints[0].r_hi == 0);
    CHECK(s.phi[0] == 0.0);
}

TEST_CASE("digit engine matches an exact rational oracle") {
    std::mt19937_64 rng(3);
    std::vector<long long> cps = {10, 100, 1000, 3000};
    for (int k = 0; k < 20; ++k) {
        mpq_class x0(static_cast<long>(rng() % 99991), 99991), x1(static_cast<long>(rng() % 65521), 65521);
        auto t = TargetSpec::ball({0.3, 0.7}, RateFunction::power_law(0.5, 0.25));
        auto r = count_hits(diag({RealConstant::integer(2), RealConstant::integer(3)}), t, ExactPoint{{x0, x1}}, cps);
        CHECK(std::string(r.engine) == "digit");
        auto want = rational_oracle({{2, 0}, {0, 3}}, {x0, x1}, t, cps);
        for (size_t c = 0; c < cps.size(); ++c) {
            CHECK(r.checkpoints[c].r_lo == want[c]);
            CHECK(r.checkpoints[c].r_hi == want[c]);
        }
    }
}

TEST_CASE("rational matrix engine matches the oracle") {
    std::vector<std::vector<long long>> m = {{2, 1}, {1, 1}};
    auto sys = IntegerMatrixSystem::make(m);
    auto t = TargetSpec::ball({0.5, 0.5}, RateFunction::constant(0.2));
    std::vector<long long> cps = {50, 500};
    auto r = count_hits(TorusSystem(sys), t, ExactPoint{{mpq_class(1, 7), mpq_class(3, 11)}}, cps);
    CHECK(std::string(r.engine) == "rational");
    auto want = rational_oracle(m, {mpq_class(1, 7), mpq_class(3, 11)}, t, cps);
    for (size_t c = 0; c < cps.size(); ++c) CHECK(r.checkpoints[c].r_lo == want[c]);
}

TEST_CASE("interval engine brackets a high-precision oracle for real beta") {
    auto sys = diag({RealConstant::golden()});
    auto t = TargetSpec::ball({0.4}, RateFunction::power_law(0.4, 0.3));
    RealConstant x = RealConstant::parse("pi-3");
    const long long n = 1500;
    auto r = count_hits(sys, t, ConstantPoint{{x}}, {n});
    CHECK(std::string(r.engine) == "interval");
    // Oracle: plain MPFR iteration at a generous precision.
    const mpfr_prec_t prec = 4000;
    BigFloat beta(prec), y(prec), tmp(prec);
    BigFloat lo(prec), hi(prec);
    RealConstant::golden().enclose(prec, lo, hi);
    mpfr_set(beta.get(), lo.get(), MPFR_RNDN);
    x.enclose(prec, lo, hi);
    mpfr_set(y.get(), lo.get(), MPFR_RNDN);
    long long hits = 0;
    for (long long k = 1; k <= n; ++k) {
        mpfr_mul(y.get(), y.get(), beta.get(), MPFR_RNDN);
        mpfr_frac(y.get(), y.get(), MPFR_RNDN);
        double v = y.to_double() - 0.4;
        v -= std::floor(v);
        hits += std::min(v, 1 - v) <= t.radius(0, k);
    }
    CHECK(r.checkpoints[0].r_lo <= hits);
    CHECK(hits <= r.checkpoints[0].r_hi);
}

TEST_CASE("counts sit near Phi for a divergent series") {
    auto sys = diag({RealConstant::integer(2), RealConstant::integer(3)});
    auto t = TargetSpec::ball({0.3, 0.7}, RateFunction::power_law(0.5, 0.25));
    auto s = monte_carlo_counting(sys, t, 8, {1000, 100000}, 42, 1);
    CHECK(s.fraction_in_band >= 0.75);
    for (const auto& r : s.samples) {
        CHECK(r.ambiguous_hits <= 0.001 * r.checkpoints.back().r_hi);
        CHECK(r.checkpoints.back().r_hi - r.checkpoints.back().r_lo <= 0.001 * r.checkpoints.back().r_hi);
    }
}

TEST_CASE("counts stabilize for a convergent series") {
    auto sys = diag({RealConstant::integer(2), RealConstant::integer(3)});
    auto t = TargetSpec::ball({0.3, 0.7}, RateFunction::exponential(std::log(2.0)));
    auto s = monte_carlo_counting(sys, t, 8, {1000, 10000, 100000}, 5, 1);
    for (const auto& r : s.samples) {
        CHECK(r.checkpoints[0].r_lo == r.checkpoints[2].r_lo);
        CHECK(r.checkpoints[0].r_hi == r.checkpoints[2].r_hi);
    }
}

TEST_CASE("results do not depend on the worker count") {
    auto sys = diag({RealConstant::integer(2), RealConstant::integer(3)});
    auto t = TargetSpec::hyperboloid({0.3, 0.7}, RateFunction::power_law(0.1, 0.5));
    auto a = monte_carlo_counting(sys, t, 13, {100, 2000}, 99, 1);
    auto b = monte_carlo_counting(sys, t, 13, {100, 2000}, 99, 4);
    REQUIRE(a.samples.size() == b.samples.size());
    for (size_t i = 0; i < a.samples.size(); ++i)
        for (size_t c = 0; c < 2; ++c) {
            CHECK(a.samples[i].checkpoints[c].r_lo == b.samples[i].checkpoints[c].r_lo);
            CHECK(a.samples[i].checkpoints[c].r_hi == b.samples[i].checkpoints[c].r_hi);
        }
    auto gs = diag({RealConstant::golden()});
    auto tg = TargetSpec::ball({0.5}, RateFunction::power_law(0.3, 0.5));
    auto c1 = monte_carlo_counting(gs, tg, 5, {300}, 7, 1);
    auto c3 = monte_carlo_counting(gs, tg, 5, {300}, 7, 3);
    for (size_t i = 0; i < 5; ++i) CHECK(c1.samples[i].checkpoints[0].r_hi == c3.samples[i].checkpoints[0].r_hi);
}

TEST_CASE("normalized error") {
    CHECK(std::isnan(normalized_error(5, 2.0, 0.5)));
    double phi = 1000, e = normalized_error(1100, phi, 0.5);
    CHECK(e == doctest::Approx(100 / (std::sqrt(phi) * std::pow(std::log(phi), 2.0))));
}

TEST_CASE("correlation: exact cases") {
    ParryYrrapMeasure two(RealConstant::integer(2));
    auto p = correlation_estimate(two, {0, 0.5}, {0, 0.25}, 3, 1000, 1);
    CHECK(p.exact);
    CHECK(p.estimate == 0.0);
    auto p0 = correlation_estimate(two, {0, 0.5}, {0, 0.5}, 0, 1000, 1);
    CHECK(p0.estimate == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(correlation_estimate(two, {0, 0.5}, {0.3, 0.3}, 1, 10, 1), Error);
}

TEST_CASE("correlation estimates match exact preimage measures") {
    RealConstant beta = RealConstant::golden();
    ParryYrrapMeasure mu(beta);
    Interval e = {0.1, 0.45}, f = {0.2, 0.7};
    double mu_e = mu.measure_interval(e.first, e.second), mu_f = mu.measure_interval(f.first, f.second);
    for (int n = 1; n <= 6; ++n) {
        double exact = std::fabs(joint_measure(mu, beta, e, f, n) / mu_f - mu_e);
        auto est = correlation_estimate(mu, e, f, n, 400000, 17);
        CHECK(std::fabs(est.estimate - exact) < 4 * est.std_error + 1e-9);
    }
}

TEST_CASE("golden correlations decay exponentially on the Markov set") {
    ParryYrrapMeasure mu(RealConstant::golden());
    auto s = correlation_series(mu, {1 / g, 1}, {1 / g, 1}, 20, 200000, 4, 1, 12);
    CHECK(s.fit.gamma < 1.0);
    CHECK(s.fit.r2 > 0.9);
    CHECK(s.kappa_hat > 0);
    // Stratified estimates do not depend on the worker count.
    CorrelationOptions o3;
    o3.jobs = 3;
    auto s3 = correlation_series(mu, {1 / g, 1}, {1 / g, 1}, 20, 200000, 4, 1, 12, o3);
    for (size_t k = 0; k < s.phi_hat.size(); ++k) CHECK(s.phi_hat[k].estimate == s3.phi_hat[k].estimate);
}

TEST_CASE("exponential fit recovers a clean geometric sequence") {
    std::vector<int> n;
    std::vector<double> y;
    for (int k = 5; k <= 25; ++k) {
        n.push_back(k);
        y.push_back(0.8 * std::pow(0.6, k));
    }
    auto f = fit_exponential(n, y);
    CHECK(f.converged);
    CHECK(f.gamma == doctest::Approx(0.6).epsilon(1e-6));
    CHECK(f.c == doctest::Approx(0.8).epsilon(1e-4));
    CHECK(f.r2 > 0.999999);
}

TEST_CASE("variance check") {
    auto sys = diag({RealConstant::integer(2)});
    // Dyadic balls are independent under doubling: Var = sum mu (1 - mu).
    auto t = TargetSpec::ball({0.25}, RateFunction::constant(0.125));
    auto rep = variance_check(sys, t, 1, 20, 20000, 3, 0.0);
    double want = 20 * 0.25 * 0.75;
    CHECK(std::fabs(rep.variance - want) < 4 * rep.variance_se);
    CHECK(rep.ratio <= 1 + 4 * rep.ratio_se);

    auto single = variance_check(sys, t, 5, 5, 20000, 4, 0.0);
    CHECK(std::fabs(single.variance - 0.25 * 0.75) < 4 * single.variance_se);

    auto s23 = diag({RealConstant::integer(2), RealConstant::integer(3)});
    auto tb = TargetSpec::ball({0.3, 0.7}, RateFunction::power_law(0.5, 0.25));
    auto v = variance_check(s23, tb, 1, 100, 4000, 5, 0.1);
    CHECK(v.ratio <= 1 + 4 * v.ratio_se);

    for (double lambda : {0.25, 0.5}) {
        auto pz = paley_zygmund(v.z, lambda);
        CHECK(pz.fraction >= pz.bound - 4 * pz.std_error);
    }
}
