#include <doctest.h>

#include <cmath>
#include <random>

#include "shrink/cylinders.hpp"
#include "shrink/digit_stream.hpp"
#include "shrink/eigen.hpp"
#include "shrink/measures.hpp"
#include "shrink/error.hpp"
#include "shrink/orbit.hpp"

using namespace shrink;

namespace {

mpq_class q(const char* s) {
    mpq_class v(s);
    v.canonicalize();
    return v;
}

double circ_dist(double a, double b) {
    double t = std::fabs(a - b);
    t -= std::floor(t);
    return std::min(t, 1.0 - t);
}

// Exact cylinders for a positive rational beta: each node carries its left
// end, length and the exact left end of its image under T^n.
struct ExactCylinder {
    mpq_class left, length, image_lo, image_len;
};

std::vector<ExactCylinder> exact_cylinders(const mpq_class& beta, int n) {
    std::vector<ExactCylinder> cur = {{0, 1, 0, 1}};
    mpq_class scale = 1;  // beta^k
    for (int k = 0; k < n; ++k) {
        std::vector<ExactCylinder> next;
        for (const auto& c : cur) {
            mpq_class lo = c.image_lo, hi = c.image_lo + c.image_len;
            mpz_class d0, d1;
            mpq_class t = beta * lo;
            mpz_fdiv_q(d0.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
            t = beta * hi;
            mpz_cdiv_q(d1.get_mpz_t(), t.get_num_mpz_t(), t.get_den_mpz_t());
            for (mpz_class d = d0; d < d1; ++d) {
                mpq_class a = std::max<mpq_class>(lo, mpq_class(d) / beta);
                mpq_class b = std::min<mpq_class>(hi, mpq_class(d + 1) / beta);
                if (b <= a) continue;
                ExactCylinder e;
                e.left = c.left + (a - lo) / scale;
                e.length = (b - a) / scale;
                e.image_lo = beta * a - d;
                e.image_len = beta * (b - a);
                next.push_back(e);
            }
        }
        cur = std::move(next);
        scale *= beta;
    }
    return cur;
}

}  // namespace

TEST_CASE("beta_step examples") {
    auto r = beta_step(RealConstant::integer(2), UnitRealInterval::from_rational(q("1/4"), 128));
    REQUIRE(r.pieces.size() == 1);
    CHECK(r.pieces[0].contains(q("1/2")));
    CHECK(r.pieces[0].width() < 1e-30);

    r = beta_step(-RealConstant::golden(), UnitRealInterval::from_rational(0, 128));
    REQUIRE(!r.pieces.empty());
    bool has_zero = false;
    for (const auto& p : r.pieces) has_zero = has_zero || p.contains(0);
    CHECK(has_zero);

    // 3 * 7/10 = 21/10, fractional part 1/10 by rational arithmetic.
    mpq_class expect = mpq_class(3) * q("7/10");
    expect -= 2;
    r = beta_step(RealConstant::integer(3), UnitRealInterval::from_rational(q("7/10"), 128));
    REQUIRE(r.pieces.size() == 1);
    CHECK(r.pieces[0].contains(expect));
}

TEST_CASE("beta_step output width grows by at most |beta| plus rounding") {
    std::mt19937_64 rng(11);
    for (const char* b : {"g", "-g", "2.7", "-2", "pi"}) {
        RealConstant beta = RealConstant::parse(b);
        for (int k = 0; k < 50; ++k) {
            mpq_class x(static_cast<long>(rng() % 1000000), 1000000);
            auto u = UnitRealInterval::from_rational(x, 200);
            auto r = beta_step(beta, u);
            double w = 0;
            for (const auto& p : r.pieces) w = std::max(w, p.width());
            CHECK(w <= std::fabs(beta.value()) * u.width() + 1e-55);
        }
    }
}

TEST_CASE("iterate examples") {
    auto sys = DiagonalTorusSystem::make({RealConstant::integer(2), RealConstant::integer(3)});
    auto out = iterate(sys, {UnitRealInterval::from_rational(q("1/2"), 128),
                             UnitRealInterval::from_rational(q("1/3"), 128)},
                       1);
    bool zero0 = false, zero1 = false;
    for (const auto& p : out[0]) zero0 = zero0 || p.contains(0);
    for (const auto& p : out[1]) zero1 = zero1 || p.contains(0);
    CHECK(zero0);
    CHECK(zero1);

    // Matrix power mod 1 computed by an independent integer matrix product.
    auto m = IntegerMatrixSystem::make({{2, 1}, {1, 1}});
    auto x = iterate_exact(m, {q("1/5"), q("2/5")}, 2);
    // M^2 = [[5,3],[3,2]]; M^2 (1/5, 2/5) = (11/5, 7/5).
    CHECK(x[0] == q("1/5"));
    CHECK(x[1] == q("2/5"));

    // pi - 3 carried at high precision, doubled 100 times.
    auto d2 = DiagonalTorusSystem::make({RealConstant::integer(2)});
    long long bits = 2 * required_precision(TorusSystem(d2), 100);
    auto pi3 = UnitRealInterval::from_constant(RealConstant::parse("pi-3"), bits);
    auto y = iterate(d2, {pi3}, 100);
    double w = 0;
    for (const auto& p : y[0]) w = std::max(w, p.width());
    CHECK(w <= std::ldexp(1.0, -64));
    // Oracle: 2^100 (pi - 3) mod 1 at 600 bits.
    BigFloat lo(600), hi(600);
    RealConstant::parse("pi-3").enclose(600, lo, hi);
    mpfr_mul_2ui(lo.get(), lo.get(), 100, MPFR_RNDD);
    mpfr_frac(lo.get(), lo.get(), MPFR_RNDN);
    double oracle = lo.to_double();
    CHECK(circ_dist(y[0][0].lo.to_double(), oracle) < 1e-15);
}

TEST_CASE("required_precision") {
    auto d2 = DiagonalTorusSystem::make({RealConstant::integer(2)});
    CHECK(required_precision(TorusSystem(d2), 100) == 164);
    auto d3 = DiagonalTorusSystem::make({RealConstant::integer(3)});
    long long oracle = static_cast<long long>(std::ceil(1000 * std::log2(3.0))) + 64;
    CHECK(required_precision(TorusSystem(d3), 1000) == oracle);
    auto d23 = DiagonalTorusSystem::make({RealConstant::integer(2), RealConstant::integer(3)});
    set_precision_cap(std::nullopt);
    try {
        required_precision(TorusSystem(d23), 1000000);
        FAIL("expected BudgetTooLarge");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BudgetTooLarge);
    }
}

TEST_CASE("iterate at the required budget never exhausts precision") {
    for (const char* b : {"g", "-g", "e", "sqrt(7)", "-2.5"}) {
        auto sys = DiagonalTorusSystem::make({RealConstant::parse(b)});
        long long bits = required_precision(TorusSystem(sys), 400);
        auto x = UnitRealInterval::from_constant(RealConstant::parse("pi-3"), bits);
        CHECK_NOTHROW(iterate(sys, {x}, 400));
    }
}

TEST_CASE("interval soundness under recomputation with a smaller budget") {
    auto sys = DiagonalTorusSystem::make({RealConstant::golden()});
    auto x_hi = UnitRealInterval::from_constant(RealConstant::parse("e-2"), 900);
    auto x_lo = UnitRealInterval::from_constant(RealConstant::parse("e-2"), 300);
    DiagonalOrbit a(sys, {x_hi}), b(sys, {x_lo});
    for (int n = 1; n <= 150; ++n) {
        a.step();
        b.step();
        auto ah = a.hull_arc(0), bh = b.hull_arc(0);
        double amid = 0.5 * (ah.lo + ah.hi), bmid = 0.5 * (bh.lo + bh.hi);
        CHECK(circ_dist(amid, bmid) <= 0.5 * (ah.hi - ah.lo) + 0.5 * (bh.hi - bh.lo) + 1e-16);
    }
}

TEST_CASE("digit stream and interval engine agree on integer beta") {
    const long long n_max = 10000;
    const int seeds = 1000;
    int checked = 0;
    for (int s = 0; s < seeds; ++s) {
        unsigned base = 2 + s % 3;
        // Random point; the interval engine starts from its truncation to
        // horizon + 64 bits of digits, which differs by at most b^-digits.
        DigitStream ds(base, std::make_unique<RandomDigits>(base, 1000 + s));
        size_t digits = static_cast<size_t>(n_max + std::ceil(64 / std::log2(base)));
        mpq_class x, x_hi;
        ds.exact_enclosure(digits, x, x_hi);
        long long bits = static_cast<long long>(std::ceil(n_max * std::log2(base))) + 64;
        auto sys = DiagonalTorusSystem::make({RealConstant::integer(base)});
        // The interval engine is the slow side; spot-check a fraction of seeds to the full horizon.
        long long horizon = s % 100 == 0 ? n_max : 200;
        DiagonalOrbit orb(sys, {UnitRealInterval::from_rational(x, bits)});
        for (long long n = 1; n <= horizon; ++n) {
            ds.shift();
            orb.step();
            if (n % 97 == 0 || n == horizon) {
                auto a = ds.arc();
                auto b = orb.hull_arc(0);
                double amid = 0.5 * (a.lo + a.hi), bmid = 0.5 * (b.lo + b.hi);
                CHECK(circ_dist(amid, bmid) <= (a.hi - a.lo) + (b.hi - b.lo) + 1e-15);
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("eigenvalue moduli") {
    auto a = eigenvalue_moduli(std::vector<std::vector<long long>>{{2, 0}, {0, 3}});
    CHECK(a.moduli[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(a.moduli[1] == doctest::Approx(3.0).epsilon(1e-14));
    auto f = eigenvalue_moduli(std::vector<std::vector<long long>>{{0, 1}, {1, 1}});
    double g = (1 + std::sqrt(5.0)) / 2;
    CHECK(f.moduli[0] == doctest::Approx(1 / g).epsilon(1e-14));
    CHECK(f.moduli[1] == doctest::Approx(g).epsilon(1e-14));
    auto t = eigenvalue_moduli(std::vector<std::vector<long long>>{{2, 1}, {0, 3}});
    CHECK(t.moduli[0] == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(t.moduli[1] == doctest::Approx(3.0).epsilon(1e-14));
}

TEST_CASE("cylinder examples") {
    auto c2 = cylinders_of_order(RealConstant::integer(2), 3);
    CHECK(c2.size() == 8);
    for (const auto& c : c2) CHECK(c.full);

    auto cg = cylinders_of_order(RealConstant::golden(), 2);
    CHECK(cg.size() == 3);

    auto c25 = cylinders_of_order(RealConstant::parse("2.5"), 1);
    REQUIRE(c25.size() == 3);
    CHECK(c25[0].left == doctest::Approx(0.0));
    CHECK(c25[1].left == doctest::Approx(0.4));
    CHECK(c25[2].left == doctest::Approx(0.8));
    CHECK(c25[2].right == doctest::Approx(1.0));
    CHECK(!is_full_cylinder(RealConstant::parse("2.5"), c25[2]));

    auto g1 = cylinders_of_order(RealConstant::golden(), 1);
    REQUIRE(g1.size() == 2);
    CHECK(is_full_cylinder(RealConstant::golden(), g1[0]));
    CHECK(!is_full_cylinder(RealConstant::golden(), g1[1]));

    for (const auto& c : cylinders_of_order(RealConstant::integer(2), 5))
        CHECK(is_full_cylinder(RealConstant::integer(2), c));
}

TEST_CASE("cylinders match an exact rational enumeration") {
    for (const char* b : {"2.5", "1.8", "7/3"}) {
        RealConstant rc = RealConstant::parse(b);
        mpq_class beta = rc.rational_value();
        for (int n = 1; n <= 10; ++n) {
            auto lib = cylinders_of_order(rc, n);
            auto ora = exact_cylinders(beta, n);
            REQUIRE(lib.size() == ora.size());
            for (size_t k = 0; k < lib.size(); ++k) {
                CHECK(std::fabs(lib[k].left - ora[k].left.get_d()) < 1e-12);
                CHECK(std::fabs(lib[k].length() - ora[k].length.get_d()) < 1e-12);
                bool full = ora[k].image_lo == 0 && ora[k].image_len == 1;
                CHECK(lib[k].full == full);
            }
        }
    }
}

TEST_CASE("golden cylinder counts are Fibonacci numbers") {
    long long f0 = 1, f1 = 2;  // N_0 = 1, N_1 = 2
    for (int n = 1; n <= 20; ++n) {
        CHECK(full_cylinder_gap(RealConstant::golden(), n).count == static_cast<uint64_t>(f1));
        long long f2 = f0 + f1;
        f0 = f1;
        f1 = f2;
    }
}

TEST_CASE("cylinder partition, count bound and full-cylinder windows") {
    for (const char* b : {"g", "1.8", "e", "2.5", "-g", "-2.5"}) {
        RealConstant beta = RealConstant::parse(b);
        double m = std::fabs(beta.value());
        for (int n = 1; n <= 12; ++n) {
            double total = 0, prev_right = 0;
            bool contiguous = true;
            for (const auto& c : cylinders_of_order(beta, n)) {
                total += c.length();
                contiguous = contiguous && std::fabs(c.left - prev_right) < 1e-12;
                prev_right = c.right;
            }
            CHECK(contiguous);
            CHECK(std::fabs(total - 1.0) < std::ldexp(1.0, -40));
        }
        if (beta.value() < 0) continue;
        for (int n = 1; n <= 20; ++n) {
            auto g = full_cylinder_gap(beta, n);
            CHECK(static_cast<double>(g.count) <= std::pow(m, n + 1) / (m - 1));
            CHECK(g.max_nonfull_run <= n);
        }
    }
    CHECK(full_cylinder_gap(RealConstant::integer(2), 5).max_gap == 0.0);
    CHECK(full_cylinder_gap(RealConstant::golden(), 10).max_gap < 11 * std::pow(kGolden, -10));
    CHECK(full_cylinder_gap(RealConstant::parse("1.8"), 8).max_gap < 9 * std::pow(1.8, -8));
}

TEST_CASE("preimage intervals") {
    auto p = preimage_intervals(RealConstant::integer(2), 1, 0.0, 0.25);
    double total = 0;
    for (const auto& x : p) total += x.hi - x.lo;
    CHECK(total == doctest::Approx(0.5));
    bool has_mid = false;
    for (const auto& x : p)
        if (std::fabs(x.lo - 0.375) < 1e-15 && std::fabs(x.hi - 0.5) < 1e-15) has_mid = true;
    CHECK(has_mid);

    auto p0 = preimage_intervals(RealConstant::integer(2), 0, 0.3, 0.1);
    REQUIRE(p0.size() == 1);
    CHECK(p0[0].lo == doctest::Approx(0.2));
    CHECK(p0[0].hi == doctest::Approx(0.4));

    for (const char* b : {"g", "-g", "2.7"}) {
        RealConstant beta = RealConstant::parse(b);
        double m = std::fabs(beta.value());
        for (int n = 0; n <= 4; ++n) {
            double r = 0.05;
            for (const auto& x : preimage_intervals(beta, n, 0.5, r))
                CHECK(x.hi - x.lo <= 2 * r * std::pow(m, -n) * (1 + 1e-12));
        }
    }
}

TEST_CASE("preimages map into the ball") {
    std::mt19937_64 rng(5);
    for (const char* b : {"g", "-g", "2.7", "-2"}) {
        RealConstant beta = RealConstant::parse(b);
        double bv = beta.value();
        for (int k = 0; k < 50; ++k) {
            double a = (rng() >> 11) * 0x1.0p-53, r = 0.01 + 0.2 * ((rng() >> 11) * 0x1.0p-53);
            for (const auto& piece : preimage_intervals(beta, 1, a, r)) {
                double y = 0.5 * (piece.lo + piece.hi);
                double ty = bv * y - std::floor(bv * y);
                CHECK(circ_dist(ty, a) <= r + 1e-12);
            }
        }
    }
}
