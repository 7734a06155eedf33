#include "shrink/markov.hpp"
#include "shrink/cylinders.hpp"
#include "shrink/error.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <string>

namespace shrink {

Interval PiecewiseLinearMap::image(size_t i) const {
    return image_of(i, breakpoints[i], breakpoints[i + 1]);
}

Interval PiecewiseLinearMap::image_of(size_t i, double lo, double hi) const {
    double y0 = left_values[i] + slopes[i] * (lo - breakpoints[i]);
    double y1 = left_values[i] + slopes[i] * (hi - breakpoints[i]);
    return {std::min(y0, y1), std::max(y0, y1)};
}

void PiecewiseLinearMap::validate() const {
    size_t m = slopes.size();
    if (m == 0 || breakpoints.size() != m + 1 || left_values.size() != m)
        fail(ErrorKind::InvalidInput, "piecewise map needs m+1 breakpoints and m slopes");
    if (breakpoints.front() != 0.0 || breakpoints.back() != 1.0)
        fail(ErrorKind::InvalidInput, "breakpoints must span [0,1]");
    for (size_t i = 0; i < m; ++i) {
        if (!(breakpoints[i] < breakpoints[i + 1])) fail(ErrorKind::InvalidInput, "breakpoints must increase");
        if (std::abs(std::abs(slopes[i]) - slope_modulus) > 1e-9 * slope_modulus)
            fail(ErrorKind::InvalidInput, "slope modulus differs between pieces");
        auto [y0, y1] = image(i);
        if (y0 < -kMarkovSlack || y1 > 1.0 + kMarkovSlack) fail(ErrorKind::InvalidInput, "piece image leaves [0,1]");
    }
}

PiecewiseLinearMap beta_map(const RealConstant& beta) { return power_map(beta, 1); }

PiecewiseLinearMap power_map(const RealConstant& beta, int k) {
    double b = beta.value();
    if (!(std::abs(b) > 1.0)) fail(ErrorKind::Precondition, "power map needs |beta| > 1");
    if (k < 1) fail(ErrorKind::InvalidInput, "power must be >= 1");
    OrbitOfOne orbit(beta, k + 1);
    PiecewiseLinearMap map;
    map.slope_modulus = std::pow(std::abs(b), k);
    map.breakpoints.push_back(0.0);
    for_each_cylinder(beta, k, [&](const CylinderLeaf& c) {
        map.breakpoints.push_back(c.left + c.length);
        map.slopes.push_back(c.orientation * map.slope_modulus);
        map.left_values.push_back(orbit.endpoint_value(c.orientation > 0 ? c.image_lo : c.image_hi));
    });
    map.breakpoints.back() = 1.0;
    return map;
}

PiecewiseLinearMap normalize_partition(const PiecewiseLinearMap& map) {
    map.validate();
    double kappa = 1.0;
    for (size_t i = 0; i < map.pieces(); ++i) kappa = std::min(kappa, map.breakpoints[i + 1] - map.breakpoints[i]);
    PiecewiseLinearMap out;
    out.slope_modulus = map.slope_modulus;
    out.breakpoints.push_back(0.0);
    for (size_t i = 0; i < map.pieces(); ++i) {
        double lo = map.breakpoints[i], hi = map.breakpoints[i + 1];
        double ratio = (hi - lo) / kappa;
        // 2^l kappa < |P| <= 2^{l+1} kappa, with a relative tolerance on ties.
        int l = 0;
        while (std::ldexp(1.0, l + 1) * (1.0 + 1e-12) < ratio) ++l;
        int parts = 1 << l;
        for (int p = 0; p < parts; ++p) {
            double x = lo + (hi - lo) * p / parts;
            out.slopes.push_back(map.slopes[i]);
            out.left_values.push_back(map.left_values[i] + map.slopes[i] * (x - lo));
            out.breakpoints.push_back(p + 1 == parts ? hi : lo + (hi - lo) * (p + 1) / parts);
        }
    }
    return out;
}

MarkovSubsystem build_markov(const PiecewiseLinearMap& map) {
    if (!(map.slope_modulus > 8.0)) fail(ErrorKind::SlopeTooSmall, "Markov construction needs slope > 8");
    MarkovSubsystem sub;
    sub.partition = normalize_partition(map);
    const auto& pm = sub.partition;
    size_t m = pm.pieces();
    sub.kappa = 1.0;
    for (size_t i = 0; i < m; ++i) sub.kappa = std::min(sub.kappa, pm.breakpoints[i + 1] - pm.breakpoints[i]);
    sub.a.assign(m, std::vector<uint8_t>(m, 0));
    sub.certificates.row_bound = static_cast<long long>(std::floor(map.slope_modulus / 2.0)) - 2;
    sub.certificates.row_min = static_cast<long long>(m);
    const auto& b = pm.breakpoints;
    for (size_t j = 0; j < m; ++j) {
        auto [y0, y1] = pm.image(j);
        // Partition pieces inside the image form a contiguous run.
        size_t lo = static_cast<size_t>(std::lower_bound(b.begin(), b.end(), y0 - kMarkovSlack) - b.begin());
        size_t hi_edge = static_cast<size_t>(std::upper_bound(b.begin(), b.end(), y1 + kMarkovSlack) - b.begin());
        if (hi_edge == 0 || lo + 1 > hi_edge - 1) fail(ErrorKind::Precondition, "piece image contains no partition piece");
        size_t last = hi_edge - 2;  // last piece index with right edge inside
        double u0 = b[lo], u1 = b[last + 1];
        double s = pm.slopes[j];
        double x0 = b[j] + ((s > 0 ? u0 : u1) - pm.left_values[j]) / s;
        double x1 = b[j] + ((s > 0 ? u1 : u0) - pm.left_values[j]) / s;
        x0 = std::clamp(x0, b[j], b[j + 1]);
        x1 = std::clamp(x1, b[j], b[j + 1]);
        if (!(x0 < x1)) fail(ErrorKind::Precondition, "empty Markov piece");
        sub.pieces.emplace_back(x0, x1);
        for (size_t k = lo; k <= last; ++k) sub.a[j][k] = 1;
        sub.certificates.row_min = std::min<long long>(sub.certificates.row_min, static_cast<long long>(last - lo + 1));
    }
    double lb = std::log(map.slope_modulus);
    sub.certificates.entropy_lb = std::log(map.slope_modulus / 2.0 - 3.0);
    sub.certificates.dim_lb = 1.0 - std::log(8.0) / lb;
    return sub;
}

std::optional<std::string> check_markov_conditions(const MarkovSubsystem& sub) {
    const auto& pm = sub.partition;
    size_t m = sub.pieces.size();
    if (m != pm.pieces() || sub.a.size() != m) return "piece count mismatch";
    for (size_t i = 0; i < m; ++i) {
        auto [lo, hi] = sub.pieces[i];
        if (!(lo < hi)) return "empty piece " + std::to_string(i);
        if (lo < pm.breakpoints[i] - kMarkovSlack || hi > pm.breakpoints[i + 1] + kMarkovSlack)
            return "piece " + std::to_string(i) + " leaves its linear domain";
        if (i + 1 < m && hi > sub.pieces[i + 1].first + kMarkovSlack) return "pieces overlap at " + std::to_string(i);
    }
    for (size_t j = 0; j < m; ++j) {
        auto [y0, y1] = pm.image_of(j, sub.pieces[j].first, sub.pieces[j].second);
        for (size_t k = 0; k < m; ++k) {
            auto [p0, p1] = sub.pieces[k];
            bool meets_interior = y0 < p1 - kMarkovSlack && y1 > p0 + kMarkovSlack;
            bool inside = p0 >= y0 - kMarkovSlack && p1 <= y1 + kMarkovSlack;
            if (meets_interior && !inside)
                return "image of piece " + std::to_string(j) + " cuts piece " + std::to_string(k);
            if (static_cast<bool>(sub.a[j][k]) != inside)
                return "transition entry (" + std::to_string(j) + "," + std::to_string(k) + ") disagrees";
        }
    }
    return std::nullopt;
}

mpz_class word_count(const BoolMatrix& a, int n) {
    if (n <= 0) return 1;
    size_t m = a.size();
    std::vector<mpz_class> v(m, 1), w(m);
    for (int step = 1; step < n; ++step) {
        for (size_t i = 0; i < m; ++i) {
            w[i] = 0;
            for (size_t j = 0; j < m; ++j)
                if (a[i][j]) w[i] += v[j];
        }
        v.swap(w);
    }
    mpz_class total = 0;
    for (const auto& x : v) total += x;
    return total;
}

namespace {

bool reaches_all(const BoolMatrix& a, bool reverse) {
    size_t m = a.size();
    std::vector<bool> seen(m, false);
    std::deque<size_t> q{0};
    seen[0] = true;
    while (!q.empty()) {
        size_t u = q.front();
        q.pop_front();
        for (size_t v = 0; v < m; ++v) {
            bool edge = reverse ? a[v][u] : a[u][v];
            if (edge && !seen[v]) {
                seen[v] = true;
                q.push_back(v);
            }
        }
    }
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

}  // namespace

Primitivity is_primitive(const BoolMatrix& a) {
    size_t m = a.size();
    Primitivity out;
    if (m == 0) return out;
    if (!reaches_all(a, false) || !reaches_all(a, true)) return out;
    // Period of an irreducible matrix: gcd of level differences along edges.
    std::vector<long> level(m, -1);
    std::deque<size_t> q{0};
    level[0] = 0;
    long period = 0;
    while (!q.empty()) {
        size_t u = q.front();
        q.pop_front();
        for (size_t v = 0; v < m; ++v) {
            if (!a[u][v]) continue;
            if (level[v] < 0) {
                level[v] = level[u] + 1;
                q.push_back(v);
            } else {
                period = std::gcd(period, std::abs(level[u] + 1 - level[v]));
            }
        }
    }
    if (period != 1) return out;
    // Smallest positive power, by boolean rows as 64-bit words.
    size_t words = (m + 63) / 64;
    std::vector<std::vector<uint64_t>> rows(m, std::vector<uint64_t>(words, 0)), p, next;
    for (size_t i = 0; i < m; ++i)
        for (size_t j = 0; j < m; ++j)
            if (a[i][j]) rows[i][j / 64] |= uint64_t{1} << (j % 64);
    p = rows;
    auto full = [&](const std::vector<std::vector<uint64_t>>& x) {
        for (const auto& r : x)
            for (size_t w = 0; w < words; ++w) {
                uint64_t want = (w + 1 == words && m % 64) ? (uint64_t{1} << (m % 64)) - 1 : ~uint64_t{0};
                if (r[w] != want) return false;
            }
        return true;
    };
    long limit = static_cast<long>((m - 1) * (m - 1) + 1);
    for (long k = 1; k <= limit; ++k) {
        if (full(p)) {
            out.primitive = true;
            out.power = static_cast<int>(k);
            return out;
        }
        next.assign(m, std::vector<uint64_t>(words, 0));
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j)
                if (p[i][j / 64] >> (j % 64) & 1)
                    for (size_t w = 0; w < words; ++w) next[i][w] |= rows[j][w];
        p.swap(next);
    }
    return out;
}

EntropyEstimate entropy_and_dim(const BoolMatrix& a, double beta_modulus) {
    size_t m = a.size();
    if (m == 0) fail(ErrorKind::InvalidInput, "empty transition matrix");
    if (!(beta_modulus > 1.0)) fail(ErrorKind::InvalidInput, "slope modulus must exceed 1");
    long long rmin = static_cast<long long>(m), rmax = 0;
    for (const auto& r : a) {
        long long s = std::accumulate(r.begin(), r.end(), 0LL);
        rmin = std::min(rmin, s);
        rmax = std::max(rmax, s);
    }
    EntropyEstimate out;
    if (rmax == 0) fail(ErrorKind::InvalidInput, "transition matrix has no admissible words");
    // Power iteration on A + I, whose Perron root dominates strictly.
    std::vector<double> x(m, 1.0), y(m);
    double cw_lo = 0.0, cw_hi = kInf, prev = -1.0, rho = 0.0;
    for (int it = 1; it <= 200000; ++it) {
        for (size_t i = 0; i < m; ++i) {
            double s = x[i];
            for (size_t j = 0; j < m; ++j)
                if (a[i][j]) s += x[j];
            y[i] = s;
        }
        double lo = kInf, hi = 0.0, num = 0.0, den = 0.0;
        for (size_t i = 0; i < m; ++i) {
            double r = y[i] / x[i];
            lo = std::min(lo, r);
            hi = std::max(hi, r);
            num += y[i] * x[i];
            den += x[i] * x[i];
        }
        cw_lo = std::max(cw_lo, lo);
        cw_hi = std::min(cw_hi, hi);
        rho = num / den;
        double norm = *std::max_element(y.begin(), y.end());
        for (size_t i = 0; i < m; ++i) x[i] = std::max(y[i] / norm, 1e-300);
        out.iterations = it;
        if (std::abs(rho - prev) < 1e-12 * rho && cw_hi - cw_lo < 1e-9 * rho) break;
        prev = rho;
    }
    double perron = std::max(rho - 1.0, 0.0);
    out.h_lower = std::max(std::log(static_cast<double>(std::max(rmin, 1LL))), std::log(std::max(cw_lo - 1.0, 1.0)));
    if (rmin == 0) out.h_lower = std::log(std::max(cw_lo - 1.0, 1e-300));
    out.h_upper = std::min(std::log(static_cast<double>(rmax)), std::log(cw_hi - 1.0));
    out.h_top = std::clamp(std::log(perron), out.h_lower, out.h_upper);
    out.dim = out.h_top / std::log(beta_modulus);
    return out;
}

namespace {

std::vector<Interval> merged(std::vector<Interval> v, double gap) {
    std::sort(v.begin(), v.end());
    std::vector<Interval> out;
    for (const auto& iv : v) {
        if (!out.empty() && iv.first <= out.back().second + gap) out.back().second = std::max(out.back().second, iv.second);
        else out.push_back(iv);
    }
    return out;
}

bool covers(const std::vector<Interval>& img, const SupportSet& k) {
    for (const auto& [lo, hi] : k.intervals) {
        bool ok = false;
        for (const auto& [a, b] : img)
            if (a <= lo + kMarkovSlack && b >= hi - kMarkovSlack) ok = true;
        if (!ok) return false;
    }
    return true;
}

}  // namespace

OntoResult eventually_onto_search(const PiecewiseLinearMap& map, Interval start, const SupportSet& target, int max_k) {
    if (!(start.first < start.second)) fail(ErrorKind::InvalidInput, "start interval must be nondegenerate");
    OntoResult out;
    std::vector<Interval> cur{start};
    const auto& b = map.breakpoints;
    for (int k = 1; k <= max_k; ++k) {
        std::vector<Interval> next;
        for (const auto& [lo, hi] : cur) {
            size_t i = static_cast<size_t>(std::upper_bound(b.begin(), b.end(), lo) - b.begin());
            i = i == 0 ? 0 : i - 1;
            for (; i < map.pieces() && b[i] < hi; ++i) {
                double x0 = std::max(lo, b[i]), x1 = std::min(hi, b[i + 1]);
                if (x0 < x1) next.push_back(map.image_of(i, x0, x1));
            }
        }
        // Seams between pieces: adjacent images touch only up to rounding.
        cur = merged(std::move(next), 1e-12);
        if (covers(cur, target)) {
            out.found = true;
            out.k = k;
            out.image = cur;
            return out;
        }
    }
    out.k = max_k;
    out.image = cur;
    return out;
}

}  // namespace shrink
