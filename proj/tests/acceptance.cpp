// Acceptance driver: one PASS/FAIL line per criterion, tolerances pinned below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "experiment.hpp"
#include "oracles.hpp"
#include "shrink/counting.hpp"
#include "shrink/cylinders.hpp"
#include "shrink/dimension.hpp"
#include "shrink/markov.hpp"
#include "shrink/measures.hpp"
#include "shrink/targets.hpp"

using namespace shrink;

namespace {

// Pinned tolerances and budgets.
constexpr long long kVolumeSamples = 10'000'000;
constexpr double kVolumeSigmas = 4.0;
constexpr double kVolumeSeconds = 60.0;
constexpr long long kCountHorizon = 1'000'000;
constexpr uint64_t kCountSamples = 100;
constexpr double kCountBand = 0.2;
constexpr uint64_t kCountMinInBand = 95;
constexpr double kCountSeconds = 300.0;
constexpr double kNormalizationTol = 1e-10;
constexpr double kInvarianceTol = 1e-6;
constexpr int kInvarianceIntervals = 200;
constexpr double kBranchTol = 1e-10;
constexpr int kDensityGrid = 10000;
constexpr double kFormulaTol = 1e-12;
constexpr double kCoverMargin = 0.05;
constexpr double kCoverTail = 1e-6;
constexpr long long kCoverTailStart = 1000;
constexpr long long kCoverHorizon = 20000;
constexpr int kCylinderMaxOrder = 20;
constexpr double kCylinderSeconds = 120.0;
constexpr int kWordMaxLength = 12;
constexpr uint64_t kMixingSamples = 1'000'000;
constexpr int kMixingFitLo = 5;
constexpr int kMixingFitHi = 25;
constexpr double kMixingMinR2 = 0.9;

const double g = (1 + std::sqrt(5.0)) / 2;

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failed sub-checks with a short reason.
struct Checks {
    bool ok = true;
    std::vector<std::string> failures;
    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (failures.size() < 5) failures.push_back(what);
        }
    }
    std::string failure_text() const {
        std::string s;
        for (const auto& f : failures) s += (s.empty() ? "" : "; ") + f;
        return s;
    }
};

std::string fmt(double v, int prec = 6) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

unsigned jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

TorusSystem diag23() { return DiagonalTorusSystem::make({RealConstant::integer(2), RealConstant::integer(3)}); }

std::vector<long long> log_checkpoints(long long lo, long long hi, int per_decade) {
    std::vector<long long> out;
    for (double e = std::log10(static_cast<double>(lo)); e <= std::log10(static_cast<double>(hi)) + 1e-9;
         e += 1.0 / per_decade) {
        auto n = static_cast<long long>(std::llround(std::pow(10.0, e)));
        if (out.empty() || n > out.back()) out.push_back(std::min(n, hi));
    }
    if (out.back() != hi) out.push_back(hi);
    return out;
}

// Divergent counting run shared by criteria 2 and 3.
const MonteCarloSummary& divergent_run(double* seconds = nullptr) {
    static MonteCarloSummary s;
    static double took = 0;
    static bool done = false;
    if (!done) {
        auto t0 = std::chrono::steady_clock::now();
        auto target = TargetSpec::ball({0.3, 0.7}, RateFunction::power_law(0.5, 0.25));
        s = monte_carlo_counting(diag23(), target, kCountSamples, log_checkpoints(1000, kCountHorizon, 2), 2024,
                                 jobs(), {}, kCountBand);
        took = seconds_since(t0);
        done = true;
    }
    if (seconds) *seconds = took;
    return s;
}

Outcome criterion_volume() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(17);
    Checks c;
    double worst = 0;
    for (int d : {1, 2, 3})
        for (double delta : {1e-1, 1e-2, 1e-3}) {
            double exact = hyperboloid_volume(d, delta);
            auto [p, se] = oracle::hyperboloid_mc(d, delta, kVolumeSamples, rng);
            double z = se > 0 ? std::fabs(p - exact) / se : (p == exact ? 0 : 1e300);
            worst = std::max(worst, z);
            c.require(z <= kVolumeSigmas, "d=" + std::to_string(d) + " delta=" + fmt(delta) + " z=" + fmt(z, 3));
        }
    double secs = seconds_since(t0);
    c.require(secs < kVolumeSeconds, "runtime " + fmt(secs, 3) + " s");
    return {c.ok, "worst |z| " + fmt(worst, 3) + ", " + fmt(secs, 3) + " s" +
                      (c.ok ? "" : " [" + c.failure_text() + "]")};
}

Outcome criterion_counting() {
    double secs = 0;
    const auto& s = divergent_run(&secs);
    uint64_t in_band = 0;
    for (const auto& r : s.samples) {
        const auto& last = r.checkpoints.back();
        double mid = 0.5 * static_cast<double>(last.r_lo + last.r_hi);
        in_band += std::fabs(mid / s.phi.back() - 1) <= kCountBand;
    }
    // Trajectory of max |e(N)| over the samples at each decade.
    std::string traj;
    for (size_t k = 0; k < s.phi.size(); ++k) {
        long long n = s.samples[0].checkpoints[k].n;
        double l = std::log10(static_cast<double>(n));
        if (std::fabs(l - std::round(l)) > 1e-9) continue;
        double m = 0;
        for (const auto& r : s.samples)
            if (!std::isnan(r.checkpoints[k].e)) m = std::max(m, std::fabs(r.checkpoints[k].e));
        traj += (traj.empty() ? "" : " ") + std::string("1e") + std::to_string(std::lround(l)) + ":" + fmt(m, 3);
    }
    bool ok = in_band >= kCountMinInBand && secs < kCountSeconds;
    return {ok, std::to_string(in_band) + "/" + std::to_string(kCountSamples) + " in band at N=1e6, Phi=" +
                    fmt(s.phi.back(), 7) + ", max|e(N)| " + traj + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion_dichotomy() {
    Checks c;
    auto target = TargetSpec::ball({0.3, 0.7}, RateFunction::exponential(std::log(2.0)));
    auto conv = monte_carlo_counting(diag23(), target, kCountSamples, log_checkpoints(1000, kCountHorizon, 20), 77,
                                     jobs());
    long long max_r = 0;
    for (const auto& r : conv.samples) {
        const auto& first = r.checkpoints.front();
        c.require(first.r_lo == first.r_hi, "ambiguous convergent count");
        for (const auto& cp : r.checkpoints)
            c.require(cp.r_lo == first.r_lo && cp.r_hi == first.r_hi,
                      "sample " + std::to_string(r.sample_id) + " changed at N=" + std::to_string(cp.n));
        max_r = std::max(max_r, first.r_hi);
    }
    const auto& div = divergent_run();
    size_t i5 = 0;
    for (size_t k = 0; k < div.samples[0].checkpoints.size(); ++k)
        if (div.samples[0].checkpoints[k].n == 100000) i5 = k;
    size_t grew = 0;
    for (const auto& r : div.samples) {
        bool up = r.checkpoints.back().r_lo > r.checkpoints[i5].r_hi;
        grew += up;
        c.require(up, "divergent sample " + std::to_string(r.sample_id) + " did not grow");
    }
    return {c.ok, "convergent: all " + std::to_string(conv.samples.size()) + " constant on [1e3,1e6] (max R " +
                      std::to_string(max_r) + "); divergent: " + std::to_string(grew) + "/" +
                      std::to_string(div.samples.size()) + " grew from 1e5 to 1e6" +
                      (c.ok ? "" : " [" + c.failure_text() + "]")};
}

double circle_measure(const ParryYrrapMeasure& m, double lo, double hi) {
    if (lo < 0) return m.measure_interval(0, hi) + m.measure_interval(lo + 1, 1);
    if (hi > 1) return m.measure_interval(0, hi - 1) + m.measure_interval(lo, 1);
    return m.measure_interval(lo, hi);
}

Outcome criterion_measures() {
    Checks c;
    double worst_norm = 0, worst_inv = 0, worst_branch = 0;
    std::mt19937_64 rng(4);
    for (const char* b : {"g", "1.5", "2.7", "-g", "-2"}) {
        RealConstant beta = RealConstant::parse(b);
        ParryYrrapMeasure m(beta);
        double norm = std::fabs(m.measure_interval(0, 1) - 1);
        worst_norm = std::max(worst_norm, norm);
        c.require(norm <= kNormalizationTol, std::string("normalization ") + b);
        for (int k = 0; k < kInvarianceIntervals; ++k) {
            double a = uniform01(rng), r = 0.005 + 0.2 * uniform01(rng);
            double pre = 0;
            for (const auto& p : preimage_intervals(beta, 1, a, r)) pre += m.measure_interval(p.lo, p.hi);
            double diff = std::fabs(pre - circle_measure(m, a - r, a + r));
            worst_inv = std::max(worst_inv, diff);
            c.require(diff <= kInvarianceTol, std::string("invariance ") + b);
        }
    }
    ParryYrrapMeasure mg(-RealConstant::golden());
    for (int i = 0; i < kDensityGrid; ++i) {
        double x = (i + 0.5) / kDensityGrid;
        if (std::fabs(x - (2 - g)) < 1e-9) continue;
        double want = x < 2 - g ? 1 / (3 - g) : g / (3 - g);
        double diff = std::fabs(mg.density(x) - want);
        worst_branch = std::max(worst_branch, diff);
        c.require(diff <= kBranchTol, "-g branch value at " + fmt(x));
    }
    for (double bv : {-g, -2.0, -2.7, -5.0}) {
        RealConstant beta = bv == -g ? -RealConstant::golden() : RealConstant::parse(fmt(bv, 17));
        ParryYrrapMeasure m(beta);
        double cst = density_bound_constant(bv);
        for (int i = 0; i < kDensityGrid; ++i) {
            double h = m.density((i + 0.5) / kDensityGrid);
            c.require(h >= 1 / cst - 1e-12 && h <= cst + 1e-12, "density bound beta=" + fmt(bv));
        }
    }
    return {c.ok, "normalization " + fmt(worst_norm, 3) + ", invariance " + fmt(worst_inv, 3) + ", -g branches " +
                      fmt(worst_branch, 3) + ", bounds on 4 slopes" + (c.ok ? "" : " [" + c.failure_text() + "]")};
}

std::vector<double> random_moduli(std::mt19937_64& rng, size_t d) {
    std::uniform_real_distribution<double> u(1.1, 20.0);
    std::vector<double> b(d);
    for (auto& x : b) x = u(rng);
    std::sort(b.begin(), b.end());
    return b;
}

AccumulationSet single(std::vector<double> t) {
    AccumulationSet u;
    u.points = {std::move(t)};
    return u;
}

Outcome criterion_dimension() {
    Checks c;
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> ul(0.0, 4.0);
    double worst = 0;
    auto close = [&](double a, double b, const std::string& what) {
        worst = std::max(worst, std::fabs(a - b));
        c.require(std::fabs(a - b) <= kFormulaTol, what);
    };
    for (int k = 0; k < 100; ++k) {
        size_t d = 1 + rng() % 5;
        auto b = random_moduli(rng, d);
        double lambda = ul(rng);
        close(dim_ball(b, lambda).value, dim_rect(b, single(std::vector<double>(d, lambda))).value, "ball vs rect");
        std::vector<double> t(d);
        for (auto& x : t) x = ul(rng) / 2;
        for (size_t i = 0; i < d; ++i) close(theta_rect(i, b, t), oracle::theta(i, b, t), "theta vs oracle");
    }
    std::vector<Strictness> variants = {{true, false}, {false, false}, {true, true}, {false, true}};
    for (int k = 0; k < 100; ++k) {
        size_t d = 2 + rng() % 3;
        std::vector<double> b, t(d);
        if (k % 2 == 0) {
            b.assign(d, 1.5 + static_cast<double>(rng() % 4));
            for (auto& x : t) x = static_cast<double>(rng() % 3) * 0.5;
        } else {
            b = random_moduli(rng, d);
            for (auto& x : t) x = ul(rng) / 2;
        }
        for (size_t i = 0; i < d; ++i)
            for (const auto& s : variants) close(theta_rect(i, b, t, s), theta_rect(i, b, t), "strictness");
    }
    for (int k = 0; k < 50; ++k) {
        size_t d = 1 + rng() % 4;
        auto b = random_moduli(rng, d);
        double lambda = ul(rng);
        std::vector<double> t(d, 0.0);
        t.back() = lambda;
        close(dim_mult(b, lambda), dim_rect(b, single(t)).value, "mult vs rect");
        double b1 = b.back();
        close(dim_ball({b1}, lambda).value, dim_onedim(b1, lambda), "d=1 collapse");
        close(dim_onedim(b1, lambda), std::log(b1) / (lambda + std::log(b1)), "d=1 formula");
        double tau = ul(rng);
        std::vector<double> eq(d, b1);
        double v = dim_ball(eq, tau * std::log(b1)).value;
        close(v, static_cast<double>(d) / (1 + tau), "equal moduli closed form");
        close(v, oracle::min_theta(eq, std::vector<double>(d, tau * std::log(b1))), "equal moduli oracle");
    }
    for (int k = 0; k < 50; ++k) {
        size_t p = 1 + rng() % 4;
        MtpInput in;
        for (size_t j = 0; j < p; ++j) {
            double u = 0.1 + ul(rng);
            in.deltas.push_back(0.2 + uniform01(rng));
            in.u.push_back(u);
            in.v.push_back(u + 0.05 + ul(rng));
        }
        MtpInput sc = in;
        for (auto& x : sc.u) x *= 7.3;
        for (auto& x : sc.v) x *= 7.3;
        close(mtp_dimension(in), mtp_dimension(sc), "mtp scale invariance");
        MtpInput one{{in.deltas[0]}, {in.u[0]}, {in.v[0]}};
        close(mtp_dimension(one), in.deltas[0] * (1 - (in.v[0] - in.u[0]) / in.v[0]), "mtp p=1");
    }
    auto ub = unbounded_bounds({2, 3}, single({1.0, kInf}));
    close(ub.lower, std::log(2.0) / (std::log(2.0) + 1), "unbounded lower");
    close(ub.upper, 1.0, "unbounded upper");
    return {c.ok, "worst deviation " + fmt(worst, 3) + "; unbounded example lower " + fmt(ub.lower, 6) + ", upper " +
                      fmt(ub.upper, 6) + (c.ok ? "" : " [" + c.failure_text() + "]")};
}

Outcome criterion_cover_cost() {
    Checks c;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ub(1.5, 10.0), ut(0.1, 2.0);
    double worst_tail = 0;
    long long fewest_big = kCoverHorizon;
    for (int k = 0; k < 10; ++k) {
        size_t d = 1 + rng() % 3;
        std::vector<double> b(d), t(d);
        for (auto& x : b) x = ub(rng);
        std::sort(b.begin(), b.end());
        std::vector<RateFunction> rates;
        for (auto& x : t) {
            x = ut(rng);
            rates.push_back(RateFunction::exponential(x));
        }
        for (size_t i = 0; i < d; ++i) {
            double theta = theta_rect(i, b, t);
            auto above = cover_cost_sequence(b, rates, i, theta + kCoverMargin, kCoverTailStart, kCoverHorizon);
            double tail = 0;
            for (const auto& cc : above) tail += std::exp(-static_cast<double>(cc.n) * cc.ell);
            worst_tail = std::max(worst_tail, tail);
            c.require(tail < kCoverTail, "instance " + std::to_string(k) + " tail " + fmt(tail, 3));
            auto below =
                cover_cost_sequence(b, rates, i, theta - kCoverMargin, kCoverHorizon / 2, kCoverHorizon);
            long long big = 0;
            for (const auto& cc : below) big += std::exp(-static_cast<double>(cc.n) * cc.ell) > 1.0;
            fewest_big = std::min(fewest_big, big);
            c.require(big == static_cast<long long>(below.size()), "instance " + std::to_string(k) + " below");
        }
    }
    return {c.ok, "worst tail from n=1e3 " + fmt(worst_tail, 3) + "; below theta every term > 1 on [M/2, M], M=" +
                      std::to_string(kCoverHorizon) + (c.ok ? "" : " [" + c.failure_text() + "]")};
}

Outcome criterion_cylinders() {
    auto t0 = std::chrono::steady_clock::now();
    Checks c;
    uint64_t total = 0;
    for (const char* b : {"g", "1.8", "e", "2.5"}) {
        RealConstant beta = RealConstant::parse(b);
        double m = beta.value();
        for (int n = 1; n <= kCylinderMaxOrder; ++n) {
            auto rep = full_cylinder_gap(beta, n);
            total += rep.count;
            c.require(static_cast<double>(rep.count) <= std::pow(m, n + 1) / (m - 1),
                      std::string("count bound ") + b + " n=" + std::to_string(n));
            c.require(rep.max_nonfull_run <= n, std::string("full window ") + b + " n=" + std::to_string(n));
        }
    }
    double secs = seconds_since(t0);
    c.require(secs < kCylinderSeconds, "runtime " + fmt(secs, 3) + " s");
    return {c.ok, std::to_string(total) + " cylinders enumerated, " + fmt(secs, 3) + " s" +
                      (c.ok ? "" : " [" + c.failure_text() + "]")};
}

Outcome criterion_markov() {
    Checks c;
    std::string summary;
    for (long b : {9L, 10L, 16L, 100L}) {
        auto s = build_markov(beta_map(RealConstant::integer(b)));
        auto bad = oracle::markov_violations(s);
        c.require(bad.empty(), "beta=" + std::to_string(b) + ": " + (bad.empty() ? "" : bad.front()));
        auto m = static_cast<long>(s.pieces.size());
        mpq_class base = mpq_class(b, 2) - 3, bound = m;
        for (int n = 1; n <= kWordMaxLength; ++n) {
            if (n > 1) bound *= base;
            c.require(mpq_class(word_count(s.a, n)) >= bound,
                      "word count beta=" + std::to_string(b) + " n=" + std::to_string(n));
        }
        double lb = 1 - std::log(8.0) / std::log(static_cast<double>(b));
        auto e = entropy_and_dim(s.a, static_cast<double>(b));
        c.require(e.dim >= lb - 1e-12, "entropy dimension beta=" + std::to_string(b));
        c.require(std::fabs(s.certificates.dim_lb - lb) < 1e-12, "certificate beta=" + std::to_string(b));
        summary += (summary.empty() ? "" : ", ") + std::to_string(b) + ": m=" + std::to_string(m) + " dim " +
                   fmt(e.dim, 4) + ">=" + fmt(lb, 4);
    }
    return {c.ok, summary + (c.ok ? "" : " [" + c.failure_text() + "]")};
}

Outcome criterion_mixing() {
    Checks c;
    ParryYrrapMeasure two(RealConstant::integer(2));
    struct Pair {
        Interval e, f;
        int order;
    };
    for (const auto& p : {Pair{{0, 0.5}, {0, 0.25}, 1}, Pair{{0.25, 0.5}, {0.5, 0.75}, 2},
                          Pair{{0.375, 0.5}, {0.125, 0.625}, 3}}) {
        for (int n = p.order; n <= 12; ++n) {
            auto est = correlation_estimate(two, p.e, p.f, n, 1000, 5);
            c.require(est.exact && est.estimate == 0.0, "dyadic n=" + std::to_string(n));
        }
    }
    ParryYrrapMeasure mu(RealConstant::golden());
    CorrelationOptions opt;
    opt.jobs = jobs();
    auto s = correlation_series(mu, {1 / g, 1}, {1 / g, 1}, kMixingFitHi, kMixingSamples, 8, kMixingFitLo,
                                kMixingFitHi, opt);
    c.require(s.fit.gamma < 1.0, "gamma " + fmt(s.fit.gamma));
    c.require(s.fit.r2 > kMixingMinR2, "R^2 " + fmt(s.fit.r2));
    return {c.ok, "dyadic correlations exactly 0; golden gamma " + fmt(s.fit.gamma, 4) + ", R^2 " +
                      fmt(s.fit.r2, 5) + (c.ok ? "" : " [" + c.failure_text() + "]")};
}

Outcome criterion_determinism() {
    using namespace shrink::experiment;
    Checks c;
    std::vector<ExperimentConfig> configs;
    ExperimentConfig count;
    count.command = "count";
    count.system.betas = {"2", "3"};
    count.target.center = {0.3, 0.7};
    count.target.rates = {"pow:0.5:0.25"};
    count.checkpoints = {1000, 100000};
    count.samples = 12;
    count.seed = 11;
    configs.push_back(count);
    ExperimentConfig real = count;
    real.system.betas = {"g", "e"};
    real.target.shape = "hyperboloid";
    real.target.rates = {"pow:0.2:0.5"};
    real.checkpoints = {200, 2000};
    real.measure = "parry";
    configs.push_back(real);
    ExperimentConfig mix;
    mix.command = "mixing";
    mix.beta = "g";
    mix.set_e = {1 / g, 1};
    mix.set_f = {1 / g, 1};
    mix.samples = 200000;
    mix.seed = 5;
    configs.push_back(mix);
    ExperimentConfig plain = mix;
    plain.stratified = false;
    configs.push_back(plain);
    for (const auto& cfg : configs) {
        auto ref = run(cfg, {1, false});
        for (unsigned j : {1u, 2u, 3u, 8u}) {
            auto other = run(cfg, {j, false});
            c.require(other.outputs == ref.outputs, cfg.command + " differs at jobs=" + std::to_string(j));
        }
    }
    return {c.ok, std::to_string(configs.size()) + " seeded configs byte-identical at jobs 1,2,3,8" +
                      (c.ok ? "" : " [" + c.failure_text() + "]")};
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<Outcome()> run;
    };
    std::vector<Criterion> all = {
        {"hyperboloid volume vs Monte Carlo", criterion_volume},
        {"counting band for diag(2,3)", criterion_counting},
        {"zero-one dichotomy", criterion_dichotomy},
        {"invariant measures", criterion_measures},
        {"dimension cross-checks", criterion_dimension},
        {"cover-cost diagnostic", criterion_cover_cost},
        {"cylinder facts", criterion_cylinders},
        {"Markov construction", criterion_markov},
        {"mixing estimator", criterion_mixing},
        {"determinism", criterion_determinism},
    };
    int failed = 0;
    for (size_t i = 0; i < all.size(); ++i) {
        Outcome o;
        try {
            o = all[i].run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, all[i].name, o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
