#include "shrink/orbit.hpp"
#include "shrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace shrink {

mpq_class frac(const mpq_class& x) { return x - floor_of(x); }

namespace {

// Subtract floor(lo) from both ends; hi >= 1 afterwards means the arc wraps.
void reduce_mod1(BigFloat& lo, BigFloat& hi) {
    mpz_class k;
    BigFloat f(lo.prec());
    mpfr_floor(f.get(), lo.get());
    mpfr_get_z(k.get_mpz_t(), f.get(), MPFR_RNDN);
    mpfr_sub_z(lo.get(), lo.get(), k.get_mpz_t(), MPFR_RNDD);
    mpfr_sub_z(hi.get(), hi.get(), k.get_mpz_t(), MPFR_RNDU);
}

UnitRealInterval make_unit(BigFloat lo, BigFloat hi, mpfr_prec_t prec, bool& wrapped) {
    wrapped = false;
    if (mpfr_cmp_ui(hi.get(), 1) >= 0) {
        mpfr_sub_ui(hi.get(), hi.get(), 1, MPFR_RNDU);
        wrapped = true;
    }
    UnitRealInterval u;
    u.lo = std::move(lo);
    u.hi = std::move(hi);
    u.precision_bits = prec;
    return u;
}

// Lifted upper end: hi, or hi+1 for a wrapping enclosure.
BigFloat lifted_hi(const UnitRealInterval& x) {
    BigFloat h(x.hi.prec() + 2);
    mpfr_set(h.get(), x.hi.get(), MPFR_RNDU);
    if (x.wraps()) mpfr_add_ui(h.get(), h.get(), 1, MPFR_RNDU);
    return h;
}

double lifted_width(const BigFloat& lo, const BigFloat& hi) {
    BigFloat w(64);
    mpfr_sub(w.get(), hi.get(), lo.get(), MPFR_RNDU);
    return w.to_double(MPFR_RNDU);
}

void map_piece(const BetaEnclosure& b, const BigFloat& lo, const BigFloat& hi, mpfr_prec_t prec,
               BigFloat& ylo, BigFloat& yhi) {
    ylo = BigFloat(prec);
    yhi = BigFloat(prec);
    if (b.sign > 0) {
        mpfr_mul(ylo.get(), b.lo.get(), lo.get(), MPFR_RNDD);
        mpfr_mul(yhi.get(), b.hi.get(), hi.get(), MPFR_RNDU);
    } else {
        mpfr_mul(ylo.get(), b.lo.get(), hi.get(), MPFR_RNDD);
        mpfr_mul(yhi.get(), b.hi.get(), lo.get(), MPFR_RNDU);
    }
    reduce_mod1(ylo, yhi);
}

std::optional<long long> g_cap_override;

// Smallest arc containing all pieces: drop the largest uncovered gap.
Arc<double> circular_hull(std::vector<Arc<double>> arcs) {
    if (arcs.size() == 1) return arcs[0];
    std::sort(arcs.begin(), arcs.end(), [](const Arc<double>& a, const Arc<double>& b) { return a.lo < b.lo; });
    std::vector<Arc<double>> merged;
    for (const auto& a : arcs) {
        if (!merged.empty() && a.lo <= merged.back().hi)
            merged.back().hi = std::max(merged.back().hi, a.hi);
        else
            merged.push_back(a);
    }
    // Arcs reaching past 1 may swallow the first ones.
    while (merged.size() > 1 && merged.back().hi - 1.0 >= merged.front().lo) {
        merged.back().hi = std::max(merged.back().hi, merged.front().hi + 1.0);
        merged.erase(merged.begin());
    }
    if (merged.size() == 1) {
        auto a = merged[0];
        if (a.hi - a.lo >= 1.0) a.hi = a.lo + 1.0;
        return a;
    }
    size_t best = merged.size() - 1;
    double best_gap = merged.front().lo + 1.0 - merged.back().hi;
    for (size_t i = 0; i + 1 < merged.size(); ++i) {
        double gap = merged[i + 1].lo - merged[i].hi;
        if (gap > best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    size_t start = (best + 1) % merged.size();
    double lo = merged[start].lo;
    double hi = merged[best].hi;
    if (hi < lo) hi += 1.0;
    return normalized_arc(lo, hi);
}

}  // namespace

UnitRealInterval UnitRealInterval::from_constant(const RealConstant& x, mpfr_prec_t prec) {
    BigFloat lo, hi;
    x.enclose(prec, lo, hi);
    reduce_mod1(lo, hi);
    bool wrapped = false;
    return make_unit(std::move(lo), std::move(hi), prec, wrapped);
}

UnitRealInterval UnitRealInterval::from_rational(const mpq_class& x, mpfr_prec_t prec) {
    return from_constant(RealConstant::rational(x), prec);
}

double UnitRealInterval::width() const { return lifted_width(lo, lifted_hi(*this)); }

Arc<double> UnitRealInterval::to_arc() const {
    double l = lo.to_double(MPFR_RNDD);
    double h = lifted_hi(*this).to_double(MPFR_RNDU);
    return normalized_arc(l, h);
}

bool UnitRealInterval::contains(const mpq_class& x) const {
    mpq_class shifted = frac(x);
    BigFloat h = lifted_hi(*this);
    mpq_class ql, qh;
    mpfr_get_q(ql.get_mpq_t(), lo.get());
    mpfr_get_q(qh.get_mpq_t(), h.get());
    if (shifted < ql) shifted += 1;
    return ql <= shifted && shifted <= qh;
}

DiagonalTorusSystem DiagonalTorusSystem::make(std::vector<RealConstant> betas) {
    if (betas.empty()) fail(ErrorKind::InvalidInput, "diagonal system needs at least one beta");
    for (const auto& b : betas) {
        if (std::abs(b.value()) <= 1.0)
            fail(ErrorKind::Precondition,
                 "beta " + b.to_string() + " has modulus <= 1; use the degenerate reduction");
    }
    DiagonalTorusSystem s;
    s.betas = std::move(betas);
    return s;
}

DiagonalTorusSystem DiagonalTorusSystem::make_degenerate(std::vector<RealConstant> betas) {
    if (betas.empty()) fail(ErrorKind::InvalidInput, "diagonal system needs at least one beta");
    DiagonalTorusSystem s;
    s.betas = std::move(betas);
    s.degenerate = true;
    return s;
}

bool DiagonalTorusSystem::all_integer() const {
    return std::all_of(betas.begin(), betas.end(), [](const RealConstant& b) { return b.is_integer(); });
}

IntegerMatrixSystem IntegerMatrixSystem::make(std::vector<std::vector<long long>> m) {
    if (m.empty()) fail(ErrorKind::InvalidInput, "empty matrix");
    for (const auto& row : m)
        if (row.size() != m.size()) fail(ErrorKind::InvalidInput, "matrix must be square");
    IntegerMatrixSystem s;
    s.matrix = std::move(m);
    if (s.determinant() == 0) fail(ErrorKind::Singular, "matrix is singular");
    return s;
}

bool IntegerMatrixSystem::is_diagonal() const {
    for (size_t i = 0; i < dim(); ++i)
        for (size_t j = 0; j < dim(); ++j)
            if (i != j && matrix[i][j] != 0) return false;
    return true;
}

mpz_class IntegerMatrixSystem::determinant() const {
    // Bareiss fraction-free elimination.
    size_t n = dim();
    std::vector<std::vector<mpz_class>> a(n, std::vector<mpz_class>(n));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) a[i][j] = static_cast<long>(matrix[i][j]);
    mpz_class prev = 1;
    int sign = 1;
    for (size_t k = 0; k + 1 < n; ++k) {
        if (a[k][k] == 0) {
            size_t p = k + 1;
            while (p < n && a[p][k] == 0) ++p;
            if (p == n) return 0;
            std::swap(a[k], a[p]);
            sign = -sign;
        }
        for (size_t i = k + 1; i < n; ++i)
            for (size_t j = k + 1; j < n; ++j)
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
        prev = a[k][k];
    }
    return sign * a[n - 1][n - 1];
}

long long IntegerMatrixSystem::row_norm() const {
    long long best = 0;
    for (const auto& row : matrix) {
        long long s = 0;
        for (long long v : row) s += v < 0 ? -v : v;
        best = std::max(best, s);
    }
    return best;
}

BetaEnclosure::BetaEnclosure(const RealConstant& beta, mpfr_prec_t prec) {
    beta.enclose(prec, lo, hi);
    integer = beta.is_integer();
    if (integer) int_value = beta.as_integer();
    sign = beta.sign();
    log2_abs = std::log2(std::abs(beta.value()));
}

StepResult beta_step(const BetaEnclosure& b, const UnitRealInterval& x) {
    StepResult out;
    mpfr_prec_t prec = x.precision_bits;
    auto emit = [&](BigFloat ylo, BigFloat yhi) {
        if (lifted_width(ylo, yhi) > kMaxEnclosureWidth)
            throw PrecisionExhausted(-1, "enclosure width exceeds 2^-8 after beta step");
        bool wrapped = false;
        out.pieces.push_back(make_unit(std::move(ylo), std::move(yhi), prec, wrapped));
        out.straddled = out.straddled || wrapped;
    };
    BigFloat ylo, yhi;
    if (!x.wraps()) {
        map_piece(b, x.lo, x.hi, prec, ylo, yhi);
        emit(std::move(ylo), std::move(yhi));
    } else if (b.integer) {
        // Integer slopes are continuous on the circle: map the lifted arc.
        map_piece(b, x.lo, lifted_hi(x), prec, ylo, yhi);
        emit(std::move(ylo), std::move(yhi));
    } else {
        BigFloat one(1.0, prec), zero(0.0, prec);
        map_piece(b, x.lo, one, prec, ylo, yhi);
        emit(std::move(ylo), std::move(yhi));
        map_piece(b, zero, x.hi, prec, ylo, yhi);
        emit(std::move(ylo), std::move(yhi));
        out.straddled = true;
    }
    return out;
}

StepResult beta_step(const RealConstant& beta, const UnitRealInterval& x) {
    return beta_step(BetaEnclosure(beta, x.precision_bits + 64), x);
}

long long precision_cap() {
    if (g_cap_override) return *g_cap_override;
    if (const char* env = std::getenv("SHRINK_PRECISION_CAP")) {
        char* end = nullptr;
        long long v = std::strtoll(env, &end, 10);
        if (end != env && v > 0) return v;
    }
    return 1LL << 20;
}

void set_precision_cap(std::optional<long long> bits) { g_cap_override = bits; }

long long required_precision(const TorusSystem& system, long long n_steps) {
    if (n_steps < 1) fail(ErrorKind::InvalidInput, "required_precision needs N >= 1");
    BigFloat growth(128);
    if (const auto* d = std::get_if<DiagonalTorusSystem>(&system)) {
        mpfr_set_ui(growth.get(), 0, MPFR_RNDN);
        for (const auto& b : d->betas) {
            BigFloat lo, hi;
            b.abs().enclose(128, lo, hi);
            mpfr_max(growth.get(), growth.get(), hi.get(), MPFR_RNDU);
        }
    } else {
        mpfr_set_si(growth.get(), std::get<IntegerMatrixSystem>(system).row_norm(), MPFR_RNDU);
    }
    long long bits = 64;
    if (mpfr_cmp_ui(growth.get(), 1) > 0) {
        BigFloat t(128);
        mpfr_log2(t.get(), growth.get(), MPFR_RNDU);
        mpfr_mul_si(t.get(), t.get(), static_cast<long>(n_steps), MPFR_RNDU);
        mpfr_ceil(t.get(), t.get());
        bits += mpfr_get_si(t.get(), MPFR_RNDU);
    }
    if (bits > precision_cap())
        fail(ErrorKind::BudgetTooLarge, "required precision " + std::to_string(bits) +
                                            " bits exceeds the cap of " +
                                            std::to_string(precision_cap()) + " bits");
    return bits;
}

DiagonalOrbit::DiagonalOrbit(const DiagonalTorusSystem& system, std::vector<UnitRealInterval> x) {
    if (x.size() != system.dim()) fail(ErrorKind::InvalidInput, "point dimension mismatch");
    start_bits_ = 64;
    for (const auto& c : x) start_bits_ = std::max(start_bits_, c.precision_bits);
    for (const auto& b : system.betas) betas_.emplace_back(b, start_bits_ + 64);
    for (auto& c : x) coords_.push_back({std::move(c)});
}

void DiagonalOrbit::step() {
    for (size_t i = 0; i < coords_.size(); ++i) {
        double used = std::ceil((time_ + 1) * betas_[i].log2_abs);
        auto keep = static_cast<mpfr_prec_t>(
            std::clamp<double>(start_bits_ - used + 16, 64.0, static_cast<double>(start_bits_)));
        std::vector<UnitRealInterval> next;
        for (const auto& piece : coords_[i]) {
            StepResult r;
            try {
                r = beta_step(betas_[i], piece);
            } catch (const PrecisionExhausted& e) {
                throw PrecisionExhausted(time_, std::string(e.what()) + " at step " + std::to_string(time_ + 1));
            }
            for (auto& p : r.pieces) {
                p.lo.round_to(keep, MPFR_RNDD);
                p.hi.round_to(keep, MPFR_RNDU);
                if (mpfr_cmp_ui(p.hi.get(), 1) >= 0) mpfr_sub_ui(p.hi.get(), p.hi.get(), 1, MPFR_RNDU);
                p.precision_bits = keep;
                next.push_back(std::move(p));
            }
        }
        if (next.size() > kMaxPieces) {
            Arc<double> h = [&] {
                std::vector<Arc<double>> arcs;
                for (const auto& p : next) arcs.push_back(p.to_arc());
                return circular_hull(arcs);
            }();
            if (h.hi - h.lo > kMaxEnclosureWidth)
                throw PrecisionExhausted(time_, "enclosure pieces spread beyond 2^-8");
            UnitRealInterval u = UnitRealInterval::from_rational(mpq_class(h.lo), keep);
            mpfr_set_d(u.lo.get(), h.lo, MPFR_RNDD);
            mpfr_set_d(u.hi.get(), h.hi >= 1.0 ? h.hi - 1.0 : h.hi, MPFR_RNDU);
            next.clear();
            next.push_back(std::move(u));
        }
        coords_[i] = std::move(next);
    }
    ++time_;
}

Arc<double> DiagonalOrbit::hull_arc(size_t coord) const {
    std::vector<Arc<double>> arcs;
    for (const auto& p : coords_[coord]) arcs.push_back(p.to_arc());
    return circular_hull(arcs);
}

MatrixOrbit::MatrixOrbit(const IntegerMatrixSystem& system, std::vector<UnitRealInterval> x)
    : sys_(system) {
    if (x.size() != system.dim()) fail(ErrorKind::InvalidInput, "point dimension mismatch");
    start_bits_ = 64;
    for (const auto& c : x) start_bits_ = std::max(start_bits_, c.precision_bits);
    for (const auto& c : x) {
        BigFloat l(start_bits_), h(start_bits_);
        mpfr_set(l.get(), c.lo.get(), MPFR_RNDD);
        mpfr_set(h.get(), lifted_hi(c).get(), MPFR_RNDU);
        lo_.push_back(std::move(l));
        hi_.push_back(std::move(h));
    }
}

void MatrixOrbit::step() {
    double growth = std::log2(std::max<long long>(2, sys_.row_norm()));
    double used = std::ceil((time_ + 1) * growth);
    auto keep = static_cast<mpfr_prec_t>(
        std::clamp<double>(start_bits_ - used + 16, 64.0, static_cast<double>(start_bits_)));
    size_t d = sys_.dim();
    std::vector<BigFloat> nlo, nhi;
    BigFloat term(start_bits_);
    for (size_t i = 0; i < d; ++i) {
        BigFloat l(start_bits_ + 8), h(start_bits_ + 8);
        for (size_t j = 0; j < d; ++j) {
            long m = static_cast<long>(sys_.matrix[i][j]);
            if (m == 0) continue;
            const BigFloat& src_lo = m > 0 ? lo_[j] : hi_[j];
            const BigFloat& src_hi = m > 0 ? hi_[j] : lo_[j];
            mpfr_mul_si(term.get(), src_lo.get(), m, MPFR_RNDD);
            mpfr_add(l.get(), l.get(), term.get(), MPFR_RNDD);
            mpfr_mul_si(term.get(), src_hi.get(), m, MPFR_RNDU);
            mpfr_add(h.get(), h.get(), term.get(), MPFR_RNDU);
        }
        reduce_mod1(l, h);
        if (lifted_width(l, h) > kMaxEnclosureWidth)
            throw PrecisionExhausted(time_, "matrix orbit enclosure exceeds 2^-8 at step " +
                                                std::to_string(time_ + 1));
        l.round_to(keep, MPFR_RNDD);
        h.round_to(keep, MPFR_RNDU);
        nlo.push_back(std::move(l));
        nhi.push_back(std::move(h));
    }
    lo_ = std::move(nlo);
    hi_ = std::move(nhi);
    ++time_;
}

std::vector<UnitRealInterval> MatrixOrbit::state() const {
    std::vector<UnitRealInterval> out;
    for (size_t i = 0; i < lo_.size(); ++i) {
        bool wrapped = false;
        out.push_back(make_unit(lo_[i], hi_[i], lo_[i].prec(), wrapped));
    }
    return out;
}

Arc<double> MatrixOrbit::arc(size_t coord) const {
    return normalized_arc(lo_[coord].to_double(MPFR_RNDD), hi_[coord].to_double(MPFR_RNDU));
}

RationalOrbit::RationalOrbit(const IntegerMatrixSystem& system, std::vector<mpq_class> x)
    : sys_(system), x_(std::move(x)) {
    if (x_.size() != system.dim()) fail(ErrorKind::InvalidInput, "point dimension mismatch");
    for (auto& v : x_) v = frac(v);
}

void RationalOrbit::step() {
    size_t d = sys_.dim();
    std::vector<mpq_class> next(d);
    for (size_t i = 0; i < d; ++i) {
        mpq_class s = 0;
        for (size_t j = 0; j < d; ++j)
            if (sys_.matrix[i][j] != 0) s += mpq_class(mpz_class(static_cast<long>(sys_.matrix[i][j]))) * x_[j];
        next[i] = frac(s);
    }
    x_ = std::move(next);
    ++time_;
}

std::vector<std::vector<UnitRealInterval>> iterate(const DiagonalTorusSystem& system,
                                                   const std::vector<UnitRealInterval>& x,
                                                   long long n) {
    if (n < 0) fail(ErrorKind::InvalidInput, "iterate needs n >= 0");
    DiagonalOrbit orbit(system, x);
    while (orbit.time() < n) orbit.step();
    return orbit.state();
}

std::vector<UnitRealInterval> iterate(const IntegerMatrixSystem& system,
                                      const std::vector<UnitRealInterval>& x, long long n) {
    if (n < 0) fail(ErrorKind::InvalidInput, "iterate needs n >= 0");
    MatrixOrbit orbit(system, x);
    while (orbit.time() < n) orbit.step();
    return orbit.state();
}

std::vector<mpq_class> iterate_exact(const IntegerMatrixSystem& system, std::vector<mpq_class> x,
                                     long long n) {
    if (n < 0) fail(ErrorKind::InvalidInput, "iterate needs n >= 0");
    RationalOrbit orbit(system, std::move(x));
    while (orbit.time() < n) orbit.step();
    return orbit.state();
}

IntegerMatrixSystem as_integer_matrix(const DiagonalTorusSystem& system) {
    std::vector<std::vector<long long>> m(system.dim(), std::vector<long long>(system.dim(), 0));
    for (size_t i = 0; i < system.dim(); ++i) m[i][i] = system.betas[i].as_integer();
    return IntegerMatrixSystem::make(std::move(m));
}

}  // namespace shrink
