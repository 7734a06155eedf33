#include "shrink/eigen.hpp"
#include "shrink/error.hpp"

#include <boost/multiprecision/cpp_complex.hpp>

#include <algorithm>
#include <cmath>

namespace shrink {

namespace {

using Real = boost::multiprecision::cpp_bin_float_50;
using Complex = boost::multiprecision::cpp_complex_50;
using Poly = std::vector<mpq_class>;  // constant term first

void trim(Poly& p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
}

Poly derivative(const Poly& p) {
    Poly d;
    for (size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<unsigned long>(i));
    trim(d);
    return d;
}

void divmod(Poly a, const Poly& b, Poly& q, Poly& r) {
    trim(a);
    q.assign(a.size() >= b.size() ? a.size() - b.size() + 1 : 0, mpq_class(0));
    while (a.size() >= b.size() && !a.empty()) {
        size_t shift = a.size() - b.size();
        mpq_class f = a.back() / b.back();
        q[shift] = f;
        for (size_t i = 0; i < b.size(); ++i) a[i + shift] -= f * b[i];
        a.pop_back();
        trim(a);
    }
    r = a;
}

Poly monic(Poly p) {
    trim(p);
    mpq_class lc = p.back();
    for (auto& c : p) c /= lc;
    return p;
}

Poly gcd(Poly a, Poly b) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Poly q, r;
        divmod(a, b, q, r);
        a = b;
        b = r;
    }
    return monic(a);
}

Poly exact_div(const Poly& a, const Poly& b) {
    Poly q, r;
    divmod(a, b, q, r);
    return q;
}

Poly sub(Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), mpq_class(0));
    for (size_t i = 0; i < b.size(); ++i) a[i] -= b[i];
    trim(a);
    return a;
}

// Yun's square-free factorization: returns (factor, multiplicity).
std::vector<std::pair<Poly, int>> squarefree(const Poly& f) {
    std::vector<std::pair<Poly, int>> out;
    Poly fp = derivative(f);
    Poly a0 = gcd(f, fp);
    Poly b = exact_div(f, a0);
    Poly c = exact_div(fp, a0);
    Poly d = sub(c, derivative(b));
    int i = 1;
    while (b.size() > 1) {
        Poly a = gcd(b, d);
        if (a.size() > 1) out.push_back({a, i});
        b = exact_div(b, a);
        c = exact_div(d, a);
        d = sub(c, derivative(b));
        ++i;
    }
    return out;
}

Complex horner(const std::vector<Complex>& p, const Complex& z) {
    Complex acc = 0;
    for (size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
    return acc;
}

// Roots of a square-free polynomial with inclusion radii.
void simple_roots(const Poly& q, std::vector<Complex>& roots, std::vector<Real>& radius) {
    size_t n = q.size() - 1;
    std::vector<Complex> p(q.size()), dp(n);
    for (size_t i = 0; i < q.size(); ++i)
        p[i] = Complex(Real(q[i].get_num().get_str()) / Real(q[i].get_den().get_str()));
    for (size_t i = 1; i < p.size(); ++i) dp[i - 1] = p[i] * Real(i);
    Real bound = 0;
    for (size_t i = 0; i < n; ++i) bound = std::max(bound, Real(abs(p[i] / p[n])));
    bound += 1;
    roots.resize(n);
    const Real two_pi = 2 * boost::math::constants::pi<Real>();
    for (size_t k = 0; k < n; ++k) {
        Real ang = two_pi * Real(k) / Real(n) + Real(0.4);
        roots[k] = Complex(bound * cos(ang), bound * sin(ang));
    }
    for (int iter = 0; iter < 500; ++iter) {
        Real worst = 0;
        for (size_t k = 0; k < n; ++k) {
            Complex pv = horner(p, roots[k]);
            Complex dv = horner(dp, roots[k]);
            if (abs(pv) == 0) continue;
            Complex w = pv / dv;
            Complex s = 0;
            for (size_t j = 0; j < n; ++j)
                if (j != k) s += Real(1) / (roots[k] - roots[j]);
            Complex step = w / (Complex(1) - w * s);
            roots[k] -= step;
            worst = std::max(worst, Real(abs(step)));
        }
        if (worst < Real("1e-45")) break;
    }
    radius.assign(n, Real(0));
    for (size_t k = 0; k < n; ++k) {
        Complex prod = p[n];
        for (size_t j = 0; j < n; ++j)
            if (j != k) prod *= roots[k] - roots[j];
        // Pad the residual by a bound on the Horner rounding error.
        Real mag = 0, zk = abs(roots[k]), zp = 1;
        for (size_t i = 0; i <= n; ++i, zp *= zk) mag += abs(p[i]) * zp;
        Real resid = abs(horner(p, roots[k])) + mag * Real("1e-45");
        radius[k] = Real(n) * resid / abs(prod);
    }
    // Disjoint disks each hold exactly one root.
    for (size_t k = 0; k < n; ++k)
        for (size_t j = k + 1; j < n; ++j)
            if (abs(roots[k] - roots[j]) <= radius[k] + radius[j])
                fail(ErrorKind::TolUnreachable, "root inclusion disks overlap");
}

}  // namespace

std::vector<mpz_class> characteristic_polynomial(const std::vector<std::vector<long long>>& m) {
    size_t n = m.size();
    using Mat = std::vector<std::vector<mpz_class>>;
    Mat a(n, std::vector<mpz_class>(n)), mk(n, std::vector<mpz_class>(n, 0));
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < n; ++j) a[i][j] = static_cast<long>(m[i][j]);
    // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{n-k+1} I, c_{n-k} = -tr(A M_k)/k.
    std::vector<mpz_class> c(n + 1, 0);
    c[n] = 1;
    for (size_t k = 1; k <= n; ++k) {
        Mat next(n, std::vector<mpz_class>(n, 0));
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) {
                mpz_class s = 0;
                for (size_t l = 0; l < n; ++l) s += a[i][l] * mk[l][j];
                next[i][j] = s;
            }
        for (size_t i = 0; i < n; ++i) next[i][i] += c[n - k + 1];
        mpz_class tr = 0;
        for (size_t i = 0; i < n; ++i)
            for (size_t l = 0; l < n; ++l) tr += a[i][l] * next[l][i];
        c[n - k] = -tr / static_cast<unsigned long>(k);
        mk = std::move(next);
    }
    return c;
}

EigenModuli eigenvalue_moduli(const std::vector<std::vector<long long>>& m) {
    if (m.empty()) fail(ErrorKind::InvalidInput, "empty matrix");
    for (const auto& row : m)
        if (row.size() != m.size()) fail(ErrorKind::InvalidInput, "matrix must be square");
    EigenModuli out;
    out.charpoly = characteristic_polynomial(m);
    if (out.charpoly[0] == 0) fail(ErrorKind::Singular, "matrix is singular (det = 0)");
    Poly f;
    for (const auto& c : out.charpoly) f.push_back(mpq_class(c));
    std::vector<std::pair<double, double>> found;
    for (const auto& [factor, mult] : squarefree(f)) {
        if (factor.size() == 2) {
            mpq_class root = -factor[0] / factor[1];
            for (int i = 0; i < mult; ++i) found.push_back({std::abs(root.get_d()), 0.0});
            continue;
        }
        std::vector<Complex> roots;
        std::vector<Real> radius;
        simple_roots(factor, roots, radius);
        for (size_t k = 0; k < roots.size(); ++k) {
            double r = static_cast<double>(radius[k]);
            if (r > 1e-12) fail(ErrorKind::TolUnreachable, "eigenvalue modulus bound above 1e-12");
            for (int i = 0; i < mult; ++i) found.push_back({static_cast<double>(abs(roots[k])), r});
        }
    }
    std::sort(found.begin(), found.end());
    for (const auto& [v, e] : found) {
        out.moduli.push_back(v);
        out.error_bound.push_back(e);
    }
    return out;
}

EigenModuli eigenvalue_moduli(const IntegerMatrixSystem& system) { return eigenvalue_moduli(system.matrix); }

}  // namespace shrink
