#include "shrink/counting.hpp"
#include "shrink/digit_stream.hpp"
#include "shrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace shrink {

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

void parallel_for(uint64_t count, unsigned jobs, const std::function<void(uint64_t)>& f) {
    jobs = std::max(1u, jobs);
    if (jobs == 1 || count <= 1) {
        for (uint64_t i = 0; i < count; ++i) f(i);
        return;
    }
    std::mutex mu;
    uint64_t failed_at = UINT64_MAX;
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) {
        pool.emplace_back([&, t] {
            for (uint64_t i = t; i < count; i += jobs) {
                try {
                    f(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mu);
                    if (i < failed_at) {
                        failed_at = i;
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    // The lowest failing index wins, so errors do not depend on scheduling.
    if (failure) std::rethrow_exception(failure);
}

namespace {

constexpr double kHalfPow53 = 0x1.0p-53;

bool small_rational(const mpq_class& q) { return mpz_sizeinbase(q.get_den_mpz_t(), 2) <= 62; }

mpz_class random_bits(std::mt19937_64& rng, long long bits) {
    mpz_class z = 0;
    long long left = bits;
    while (left > 0) {
        int take = static_cast<int>(std::min<long long>(left, 64));
        uint64_t r = rng();
        if (take < 64) r >>= (64 - take);
        z <<= take;
        z += mpz_class(std::to_string(r));
        left -= take;
    }
    return z;
}

// Enclosure [z, z+1] 2^-bits of a random point; the top 53 bits follow the
// measure factor when one is given.
UnitRealInterval random_interval(std::mt19937_64& rng, const ParryYrrapMeasure* mu, long long bits) {
    mpz_class z;
    if (mu) {
        double x = mu->sample(rng);
        mpz_class top(static_cast<unsigned long>(std::ldexp(x, 53)));
        if (bits >= 53) {
            z = top << static_cast<mp_bitcnt_t>(bits - 53);
            z += random_bits(rng, bits - 53);
        } else {
            z = top >> static_cast<mp_bitcnt_t>(53 - bits);
        }
    } else {
        z = random_bits(rng, bits);
    }
    auto prec = static_cast<mpfr_prec_t>(std::max<long long>(bits, 64));
    UnitRealInterval u = UnitRealInterval::from_rational(mpq_class(0), prec);
    u.lo = BigFloat(prec);
    u.hi = BigFloat(prec);
    mpfr_set_z_2exp(u.lo.get(), z.get_mpz_t(), -bits, MPFR_RNDN);
    mpz_class z1 = z + 1;
    if (mpz_sizeinbase(z1.get_mpz_t(), 2) > static_cast<size_t>(bits)) z1 = 0;  // wraps through 0
    mpfr_set_z_2exp(u.hi.get(), z1.get_mpz_t(), -bits, MPFR_RNDN);
    u.precision_bits = prec;
    return u;
}

class DigitWalker : public OrbitWalker {
public:
    DigitWalker(std::vector<DigitStream> streams, std::vector<int> signs)
        : streams_(std::move(streams)), signs_(std::move(signs)), arcs_(streams_.size()), exact_(streams_.size()) {}

    void advance() override {
        for (auto& s : streams_) s.shift(1);
        ++time_;
    }

    Membership test(const TargetSpec& target, const std::vector<double>& radii) override {
        bool flip = time_ % 2 == 1;
        for (size_t i = 0; i < streams_.size(); ++i) {
            Arc<double> a = streams_[i].arc();
            arcs_[i] = signs_[i] < 0 && flip ? normalized_arc(-a.hi, -a.lo) : a;
        }
        Membership m = contains_with_radii(target, radii, arcs_);
        if (m != Membership::Ambiguous) return m;
        // Refine with exact digits before conceding.
        for (size_t i = 0; i < streams_.size(); ++i) {
            mpq_class lo, hi;
            streams_[i].exact_enclosure(3 * streams_[i].window_digits(), lo, hi);
            if (signs_[i] < 0 && flip) exact_[i] = normalized_arc<mpq_class>(-hi, -lo);
            else exact_[i] = normalized_arc<mpq_class>(lo, hi);
        }
        qradii_.assign(radii.begin(), radii.end());
        return contains_arcs<mpq_class>(target, qradii_, exact_, mpq_class(0));
    }

    const char* engine() const override { return "digit"; }

private:
    std::vector<DigitStream> streams_;
    std::vector<int> signs_;
    std::vector<Arc<double>> arcs_;
    std::vector<Arc<mpq_class>> exact_;
    std::vector<mpq_class> qradii_;
};

class RationalWalker : public OrbitWalker {
public:
    RationalWalker(const IntegerMatrixSystem& sys, std::vector<mpq_class> x) : orbit_(sys, std::move(x)) {}

    void advance() override {
        orbit_.step();
        ++time_;
    }

    Membership test(const TargetSpec& target, const std::vector<double>& radii) override {
        const auto& x = orbit_.state();
        arcs_.resize(x.size());
        for (size_t i = 0; i < x.size(); ++i) arcs_[i] = {x[i], x[i]};
        qradii_.assign(radii.begin(), radii.end());
        return contains_arcs<mpq_class>(target, qradii_, arcs_, mpq_class(0));
    }

    const char* engine() const override { return "rational"; }

private:
    RationalOrbit orbit_;
    std::vector<Arc<mpq_class>> arcs_;
    std::vector<mpq_class> qradii_;
};

class DiagonalIntervalWalker : public OrbitWalker {
public:
    DiagonalIntervalWalker(const DiagonalTorusSystem& sys, std::vector<UnitRealInterval> x)
        : orbit_(sys, std::move(x)), arcs_(sys.dim()) {}

    void advance() override {
        orbit_.step();
        ++time_;
    }

    Membership test(const TargetSpec& target, const std::vector<double>& radii) override {
        for (size_t i = 0; i < arcs_.size(); ++i) arcs_[i] = orbit_.hull_arc(i);
        return contains_with_radii(target, radii, arcs_);
    }

    const char* engine() const override { return "interval"; }

private:
    DiagonalOrbit orbit_;
    std::vector<Arc<double>> arcs_;
};

class MatrixIntervalWalker : public OrbitWalker {
public:
    MatrixIntervalWalker(const IntegerMatrixSystem& sys, std::vector<UnitRealInterval> x)
        : orbit_(sys, std::move(x)), arcs_(sys.dim()) {}

    void advance() override {
        orbit_.step();
        ++time_;
    }

    Membership test(const TargetSpec& target, const std::vector<double>& radii) override {
        for (size_t i = 0; i < arcs_.size(); ++i) arcs_[i] = orbit_.arc(i);
        return contains_with_radii(target, radii, arcs_);
    }

    const char* engine() const override { return "interval"; }

private:
    MatrixOrbit orbit_;
    std::vector<Arc<double>> arcs_;
};

// Rational coordinates of the start point, when it has them.
bool rational_start(const StartPoint& x, std::vector<mpq_class>& out) {
    if (auto* e = std::get_if<ExactPoint>(&x)) {
        out = e->x;
        return true;
    }
    if (auto* c = std::get_if<ConstantPoint>(&x)) {
        out.clear();
        for (const auto& v : c->x) {
            if (v.kind() != RealConstant::Kind::Rational) return false;
            out.push_back(v.rational_value());
        }
        return true;
    }
    return false;
}

std::vector<UnitRealInterval> interval_start(const StartPoint& x, size_t dim, long long bits) {
    std::vector<UnitRealInterval> out;
    auto prec = static_cast<mpfr_prec_t>(bits);
    if (auto* e = std::get_if<ExactPoint>(&x)) {
        for (const auto& v : e->x) out.push_back(UnitRealInterval::from_rational(v, prec));
    } else if (auto* c = std::get_if<ConstantPoint>(&x)) {
        for (const auto& v : c->x) out.push_back(UnitRealInterval::from_constant(v, prec));
    } else {
        const auto& r = std::get<RandomPoint>(x);
        std::mt19937_64 rng(r.seed);
        if (r.measure && r.measure->dim() != dim) fail(ErrorKind::InvalidInput, "measure dimension mismatch");
        for (size_t i = 0; i < dim; ++i)
            out.push_back(random_interval(rng, r.measure ? &r.measure->factors()[i] : nullptr, bits));
    }
    if (out.size() != dim) fail(ErrorKind::InvalidInput, "point dimension mismatch");
    return out;
}

}  // namespace

std::unique_ptr<OrbitWalker> make_walker(const TorusSystem& system, const StartPoint& x, long long n_steps,
                                         long long precision_bits) {
    auto bits_needed = [&] { return precision_bits > 0 ? precision_bits : required_precision(system, n_steps); };
    if (auto* m = std::get_if<IntegerMatrixSystem>(&system)) {
        if (m->is_diagonal()) {
            std::vector<RealConstant> betas;
            for (size_t i = 0; i < m->dim(); ++i) betas.push_back(RealConstant::integer(static_cast<long>(m->matrix[i][i])));
            return make_walker(DiagonalTorusSystem::make(betas), x, n_steps, precision_bits);
        }
        std::vector<mpq_class> q;
        if (rational_start(x, q)) {
            if (q.size() != m->dim()) fail(ErrorKind::InvalidInput, "point dimension mismatch");
            return std::make_unique<RationalWalker>(*m, std::move(q));
        }
        return std::make_unique<MatrixIntervalWalker>(*m, interval_start(x, m->dim(), bits_needed()));
    }
    const auto& d = std::get<DiagonalTorusSystem>(system);
    if (d.all_integer()) {
        std::vector<mpq_class> q;
        bool rational = rational_start(x, q);
        bool usable = !rational || std::all_of(q.begin(), q.end(), small_rational);
        bool random = std::holds_alternative<RandomPoint>(x);
        if ((rational && usable) || random) {
            if (rational && q.size() != d.dim()) fail(ErrorKind::InvalidInput, "point dimension mismatch");
            std::vector<DigitStream> streams;
            std::vector<int> signs;
            for (size_t i = 0; i < d.dim(); ++i) {
                long b = d.betas[i].as_integer();
                unsigned base = static_cast<unsigned>(std::labs(b));
                if (base > 256) fail(ErrorKind::InvalidInput, "digit engine supports |beta| <= 256");
                std::unique_ptr<DigitSource> src;
                if (rational) src = std::make_unique<RationalDigits>(base, frac(q[i]));
                else src = std::make_unique<RandomDigits>(base, splitmix64(std::get<RandomPoint>(x).seed + i + 1));
                streams.emplace_back(base, std::move(src));
                signs.push_back(b < 0 ? -1 : 1);
            }
            return std::make_unique<DigitWalker>(std::move(streams), std::move(signs));
        }
    }
    return std::make_unique<DiagonalIntervalWalker>(d, interval_start(x, d.dim(), bits_needed()));
}

double normalized_error(double r_mid, double phi, double epsilon) {
    if (!(phi > std::exp(1.0))) return std::nan("");
    return (r_mid - phi) / (std::sqrt(phi) * std::pow(std::log(phi), 1.5 + epsilon));
}

CountingResult count_hits(const TorusSystem& system, const TargetSpec& target, const StartPoint& x,
                          const std::vector<long long>& checkpoints, const CountOptions& opt,
                          const std::vector<double>& phi_values) {
    std::vector<long long> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    if (cps.empty()) fail(ErrorKind::InvalidInput, "no checkpoints");
    if (cps.front() < 0) fail(ErrorKind::InvalidInput, "checkpoints must be nonnegative");
    std::vector<double> phi = phi_values;
    if (phi.empty()) phi = phi_sum(target, cps, opt.phi).values;
    if (phi.size() != cps.size()) fail(ErrorKind::InvalidInput, "Phi values do not match checkpoints");

    CountingResult res;
    res.epsilon = opt.epsilon;
    long long n_last = cps.back();
    auto walker = make_walker(system, x, std::max<long long>(n_last, 1), opt.precision_bits);
    res.engine = walker->engine();
    std::vector<double> radii;
    long long r_lo = 0, r_hi = 0;
    size_t next = 0;
    auto record = [&](long long n) {
        while (next < cps.size() && cps[next] == n) {
            CountCheckpoint c;
            c.n = n;
            c.r_lo = r_lo;
            c.r_hi = r_hi;
            c.phi = phi[next];
            c.e = normalized_error(0.5 * static_cast<double>(r_lo + r_hi), c.phi, opt.epsilon);
            res.checkpoints.push_back(c);
            ++next;
        }
    };
    record(0);
    try {
        for (long long n = 1; n <= n_last; ++n) {
            walker->advance();
            radii_into(target, n, radii);
            switch (walker->test(target, radii)) {
                case Membership::Yes: ++r_lo; ++r_hi; break;
                case Membership::Ambiguous: ++r_hi; ++res.ambiguous_hits; break;
                case Membership::No: break;
            }
            record(n);
        }
    } catch (const PrecisionExhausted& e) {
        long long last = res.checkpoints.empty() ? 0 : res.checkpoints.back().n;
        throw PrecisionExhausted(e.step(), std::string(e.what()) + "; last completed checkpoint N=" + std::to_string(last));
    }
    if (res.ambiguous_hits > 0 && static_cast<double>(res.ambiguous_hits) > opt.ambiguity_budget * static_cast<double>(r_hi))
        fail(ErrorKind::AmbiguityBudget, std::to_string(res.ambiguous_hits) + " ambiguous hits exceed the budget of " +
                                             std::to_string(opt.ambiguity_budget) + " x R_hi");
    return res;
}

MonteCarloSummary monte_carlo_counting(const TorusSystem& system, const TargetSpec& target, uint64_t samples,
                                       const std::vector<long long>& checkpoints, uint64_t seed, unsigned jobs,
                                       const CountOptions& opt, double band_tol) {
    if (samples < 1) fail(ErrorKind::InvalidInput, "need at least one sample");
    MonteCarloSummary out;
    std::vector<long long> cps = checkpoints;
    std::sort(cps.begin(), cps.end());
    out.phi = phi_sum(target, cps, opt.phi).values;
    out.band_tol = band_tol;
    out.samples.resize(samples);
    parallel_for(samples, jobs, [&](uint64_t i) {
        RandomPoint x{sample_seed(seed, i), opt.phi.measure};
        out.samples[i] = count_hits(system, target, x, cps, opt, out.phi);
        out.samples[i].sample_id = i;
    });
    uint64_t in_band = 0;
    for (const auto& s : out.samples) {
        const auto& last = s.checkpoints.back();
        double r_mid = 0.5 * static_cast<double>(last.r_lo + last.r_hi);
        if (last.phi > 0.0 && std::abs(r_mid / last.phi - 1.0) <= band_tol) ++in_band;
        for (const auto& c : s.checkpoints)
            if (!std::isnan(c.e)) out.max_abs_e = std::max(out.max_abs_e, std::abs(c.e));
    }
    out.fraction_in_band = static_cast<double>(in_band) / static_cast<double>(samples);
    return out;
}

namespace {

constexpr uint64_t kBlock = 4096;

bool in_interval(double x, Interval iv) { return x >= iv.first && x < iv.second; }

double interval_measure(const ParryYrrapMeasure& mu, Interval iv) {
    double lo = std::clamp(iv.first, 0.0, 1.0), hi = std::clamp(iv.second, 0.0, 1.0);
    return hi > lo ? mu.measure_interval(lo, hi) : 0.0;
}

// Order m of E as a union of beta-adic intervals, or -1.
int adic_order(long base, Interval e) {
    double scale = 1.0;
    for (int m = 0; m <= 40; ++m) {
        double a = e.first * scale, b = e.second * scale;
        if (std::abs(a - std::round(a)) <= 1e-9 && std::abs(b - std::round(b)) <= 1e-9) return m;
        scale *= static_cast<double>(base);
        if (scale > 1e15) break;
    }
    return -1;
}

// Counts of x in E with T^k x in F for k = 1..n_max, over all samples.
std::vector<uint64_t> joint_counts(const ParryYrrapMeasure& mu, Interval e, Interval f, int n_max, uint64_t samples,
                                   uint64_t seed, const CorrelationOptions& opt) {
    uint64_t blocks = (samples + kBlock - 1) / kBlock;
    std::vector<std::vector<uint64_t>> per_block(blocks, std::vector<uint64_t>(n_max + 1, 0));
    double beta = mu.beta();
    double inv_m = 1.0 / static_cast<double>(samples);
    parallel_for(blocks, opt.jobs, [&](uint64_t b) {
        std::mt19937_64 rng(sample_seed(seed, b));
        auto& cnt = per_block[b];
        uint64_t end = std::min(samples, (b + 1) * kBlock);
        for (uint64_t j = b * kBlock; j < end; ++j) {
            double x = opt.stratified ? mu.inverse_cdf((static_cast<double>(j) + uniform01(rng)) * inv_m) : mu.sample(rng);
            if (!in_interval(x, e)) continue;
            double y = x;
            for (int k = 1; k <= n_max; ++k) {
                double z = beta * y;
                y = z - std::floor(z);
                if (in_interval(y, f)) ++cnt[k];
            }
        }
    });
    std::vector<uint64_t> total(n_max + 1, 0);
    for (const auto& c : per_block)
        for (int k = 0; k <= n_max; ++k) total[k] += c[k];
    return total;
}

CorrelationPoint exact_point(const ParryYrrapMeasure& mu, Interval e, Interval f, int n, double mu_e, double mu_f) {
    CorrelationPoint p;
    p.n = n;
    p.exact = true;
    if (n == 0) {
        Interval both{std::max(e.first, f.first), std::min(e.second, f.second)};
        p.estimate = std::abs(interval_measure(mu, both) / mu_f - mu_e);
    }
    return p;
}

bool exact_zero(const ParryYrrapMeasure& mu, Interval e, int n) {
    const auto& b = mu.beta_constant();
    if (!b.is_integer() || n < 1) return false;
    int m = adic_order(std::labs(b.as_integer()), e);
    return m >= 0 && m <= n;
}

void check_sets(const ParryYrrapMeasure& mu, Interval e, Interval f, double& mu_e, double& mu_f) {
    if (!(e.first < e.second) || !(f.first < f.second)) fail(ErrorKind::InvalidInput, "E and F must be nonempty intervals");
    mu_e = interval_measure(mu, e);
    mu_f = interval_measure(mu, f);
    if (mu_f < 1e-6) fail(ErrorKind::DegenerateF, "mu(F) is below 1e-6");
}

}  // namespace

CorrelationPoint correlation_estimate(const ParryYrrapMeasure& mu, Interval e, Interval f, int n, uint64_t samples,
                                      uint64_t seed, const CorrelationOptions& opt) {
    double mu_e, mu_f;
    check_sets(mu, e, f, mu_e, mu_f);
    if (n < 0) fail(ErrorKind::InvalidInput, "lag must be nonnegative");
    if (n == 0 || exact_zero(mu, e, n)) return exact_point(mu, e, f, n, mu_e, mu_f);
    if (samples < 1) fail(ErrorKind::InvalidInput, "need at least one sample");
    auto counts = joint_counts(mu, e, f, n, samples, seed, opt);
    double p = static_cast<double>(counts[n]) / static_cast<double>(samples);
    CorrelationPoint out;
    out.n = n;
    out.estimate = std::abs(p / mu_f - mu_e);
    out.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(samples)) / mu_f;
    return out;
}

ExpFit fit_exponential(const std::vector<int>& n, const std::vector<double>& y) {
    ExpFit fit;
    if (n.size() != y.size() || n.size() < 2) return fit;
    double mean = 0.0, syy = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(y.size());
    double sstot = 0.0;
    for (double v : y) {
        sstot += (v - mean) * (v - mean);
        syy += v * v;
    }
    // For fixed gamma the optimal C is closed form; minimize the residual over gamma.
    auto residual = [&](double g, double* c) {
        double sxy = 0.0, sxx = 0.0;
        for (size_t k = 0; k < n.size(); ++k) {
            double p = std::pow(g, n[k]);
            sxy += y[k] * p;
            sxx += p * p;
        }
        if (c) *c = sxx > 0.0 ? sxy / sxx : 0.0;
        return sxx > 0.0 ? syy - sxy * sxy / sxx : syy;
    };
    const int grid = 4000;
    double best_g = 0.5, best_r = kInf;
    for (int k = 1; k < grid; ++k) {
        double g = static_cast<double>(k) / grid;
        double r = residual(g, nullptr);
        if (r < best_r) {
            best_r = r;
            best_g = g;
        }
    }
    double lo = std::max(1e-9, best_g - 1.0 / grid), hi = std::min(1.0 - 1e-12, best_g + 1.0 / grid);
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        double a = hi - phi * (hi - lo), b = lo + phi * (hi - lo);
        if (residual(a, nullptr) < residual(b, nullptr)) hi = b;
        else lo = a;
    }
    fit.gamma = 0.5 * (lo + hi);
    double ssres = std::max(0.0, residual(fit.gamma, &fit.c));
    fit.r2 = sstot > 0.0 ? 1.0 - ssres / sstot : 0.0;
    fit.converged = fit.c > 0.0 && fit.gamma > 1.0 / grid && fit.gamma < 1.0 - 1.0 / grid;
    return fit;
}

CorrelationSeries correlation_series(const ParryYrrapMeasure& mu, Interval e, Interval f, int n_max, uint64_t samples,
                                     uint64_t seed, int fit_lo, int fit_hi, const CorrelationOptions& opt) {
    double mu_e, mu_f;
    check_sets(mu, e, f, mu_e, mu_f);
    if (n_max < 1 || samples < 1) fail(ErrorKind::InvalidInput, "need n_max >= 1 and samples >= 1");
    auto counts = joint_counts(mu, e, f, n_max, samples, seed, opt);
    CorrelationSeries out;
    for (int n = 0; n <= n_max; ++n) {
        if (n == 0 || exact_zero(mu, e, n)) {
            out.phi_hat.push_back(exact_point(mu, e, f, n, mu_e, mu_f));
            continue;
        }
        double p = static_cast<double>(counts[n]) / static_cast<double>(samples);
        CorrelationPoint c;
        c.n = n;
        c.estimate = std::abs(p / mu_f - mu_e);
        c.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(samples)) / mu_f;
        out.phi_hat.push_back(c);
    }
    std::vector<int> ns;
    std::vector<double> ys;
    for (int n = std::max(fit_lo, 1); n <= std::min(fit_hi, n_max); ++n) {
        ns.push_back(n);
        ys.push_back(out.phi_hat[n].estimate);
    }
    out.fit = fit_exponential(ns, ys);
    int top = std::min(30, n_max);
    for (int n = 1; n <= top; ++n) out.kappa_hat += out.phi_hat[n].estimate;
    if (out.fit.converged) out.kappa_hat += out.fit.c * std::pow(out.fit.gamma, top + 1) / (1.0 - out.fit.gamma);
    return out;
}

VarianceReport variance_check(const TorusSystem& system, const TargetSpec& target, long long a, long long b,
                              uint64_t samples, uint64_t seed, double kappa_hat, unsigned jobs,
                              const CountOptions& opt) {
    if (a < 1 || b < a) fail(ErrorKind::InvalidInput, "window needs 1 <= a <= b");
    if (samples < 2) fail(ErrorKind::InvalidInput, "need at least two samples");
    VarianceReport rep;
    rep.a = a;
    rep.b = b;
    rep.kappa_hat = kappa_hat;
    for (long long n = a; n <= b; ++n) rep.measure_sum += target_measure(target, n, opt.phi);
    rep.bound = (2.0 * kappa_hat + 1.0) * rep.measure_sum;
    rep.z.assign(samples, 0);
    parallel_for(samples, jobs, [&](uint64_t i) {
        auto w = make_walker(system, RandomPoint{sample_seed(seed, i), opt.phi.measure}, b, opt.precision_bits);
        std::vector<double> radii;
        long long z = 0;
        for (long long n = 1; n <= b; ++n) {
            w->advance();
            if (n < a) continue;
            radii_into(target, n, radii);
            if (w->test(target, radii) != Membership::No) ++z;
        }
        rep.z[i] = z;
    });
    double m = static_cast<double>(samples);
    for (long long z : rep.z) rep.mean += static_cast<double>(z);
    rep.mean /= m;
    double m2 = 0.0, m4 = 0.0;
    for (long long z : rep.z) {
        double d = static_cast<double>(z) - rep.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    rep.variance = m2 / (m - 1.0);
    m2 /= m;
    m4 /= m;
    rep.variance_se = std::sqrt(std::max(0.0, m4 - m2 * m2) / m);
    rep.ratio = rep.bound > 0.0 ? rep.variance / rep.bound : kInf;
    rep.ratio_se = rep.bound > 0.0 ? rep.variance_se / rep.bound : 0.0;
    return rep;
}

PaleyZygmund paley_zygmund(const std::vector<long long>& z, double lambda) {
    PaleyZygmund pz;
    pz.lambda = lambda;
    if (z.empty()) return pz;
    double m = static_cast<double>(z.size()), ez = 0.0, ez2 = 0.0;
    for (long long v : z) {
        ez += static_cast<double>(v);
        ez2 += static_cast<double>(v) * static_cast<double>(v);
    }
    ez /= m;
    ez2 /= m;
    uint64_t above = 0;
    for (long long v : z)
        if (static_cast<double>(v) > lambda * ez) ++above;
    pz.fraction = static_cast<double>(above) / m;
    pz.bound = ez2 > 0.0 ? (1.0 - lambda) * (1.0 - lambda) * ez * ez / ez2 : 0.0;
    pz.std_error = std::sqrt(pz.fraction * (1.0 - pz.fraction) / m);
    return pz;
}

}  // namespace shrink
