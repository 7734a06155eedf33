#include "shrink/cylinders.hpp"
#include "shrink/error.hpp"
#include "shrink/mpfr_float.hpp"

#include <algorithm>
#include <cmath>

namespace shrink {

OrbitOfOne::OrbitOfOne(const RealConstant& beta, int max_index) {
    beta_ = beta.value();
    abs_beta_ = std::abs(beta_);
    if (abs_beta_ <= 1.0) fail(ErrorKind::Precondition, "cylinders need |beta| > 1");
    double need = 256.0 + std::ceil(max_index * std::log2(abs_beta_)) * 2;
    auto prec = static_cast<mpfr_prec_t>(need);
    BigFloat lo, hi;
    beta.abs().enclose(prec, lo, hi);
    BigFloat v(1.0, prec), s(prec), r(prec), diff(prec);
    values_.push_back(1.0);
    snapped_.push_back(false);
    bool dead = false;
    for (int j = 1; j <= max_index; ++j) {
        if (dead) {
            values_.push_back(0.0);
            snapped_.push_back(true);
            continue;
        }
        mpfr_mul(s.get(), lo.get(), v.get(), MPFR_RNDN);
        mpfr_round(r.get(), s.get());
        mpfr_sub(diff.get(), s.get(), r.get(), MPFR_RNDN);
        mpfr_abs(diff.get(), diff.get(), MPFR_RNDN);
        if (mpfr_cmp_si_2exp(diff.get(), 1, -128) < 0) {
            values_.push_back(0.0);
            snapped_.push_back(true);
            dead = true;
            continue;
        }
        if (beta_ > 0) {
            mpfr_floor(r.get(), s.get());
            mpfr_sub(v.get(), s.get(), r.get(), MPFR_RNDN);
        } else {
            mpfr_ceil(r.get(), s.get());
            mpfr_sub(v.get(), r.get(), s.get(), MPFR_RNDN);
        }
        values_.push_back(v.to_double());
        snapped_.push_back(false);
    }
}

double OrbitOfOne::endpoint_value(const Endpoint& e) const {
    switch (e.kind) {
        case Endpoint::Kind::Zero: return 0.0;
        case Endpoint::Kind::One: return 1.0;
        case Endpoint::Kind::Orbit: return values_.at(e.index);
    }
    return 0.0;
}

std::string Cylinder::word_string() const {
    std::string s;
    for (uint8_t d : word) s += std::to_string(d);
    return s;
}

namespace {

struct Node {
    double left;
    double unit;  // x-length per unit of image
    int orientation;
    Endpoint lo;
    Endpoint hi;
};

// Scaled endpoint |beta|*value and whether that product is an exact integer.
struct Scaled {
    double value;
    bool exact;
};

class Enumerator {
public:
    Enumerator(const RealConstant& beta, int n) : orbit_(beta, n + 2), n_(n) {
        ab_ = orbit_.abs_beta();
        positive_ = orbit_.beta() > 0;
        pieces_ = static_cast<int>(std::ceil(ab_));
    }

    template <class Visit>
    void run(Visit&& visit) {
        Node root{0.0, 1.0, 1, {Endpoint::Kind::Zero, 0}, {Endpoint::Kind::One, 0}};
        word_.clear();
        recurse(root, 0, visit);
    }

    const std::vector<uint8_t>& word() const { return word_; }
    const OrbitOfOne& orbit() const { return orbit_; }

private:
    Scaled scaled(const Endpoint& e) const {
        switch (e.kind) {
            case Endpoint::Kind::Zero: return {0.0, true};
            case Endpoint::Kind::One: return {ab_, orbit_.snapped(1)};
            case Endpoint::Kind::Orbit: {
                double v = ab_ * orbit_.value(e.index);
                bool exact = orbit_.snapped(e.index + 1);
                return {exact ? std::round(v) : v, exact};
            }
        }
        return {0.0, true};
    }

    static Endpoint advance(const Endpoint& e) {
        if (e.kind == Endpoint::Kind::One) return {Endpoint::Kind::Orbit, 1};
        return {Endpoint::Kind::Orbit, e.index + 1};
    }

    template <class Visit>
    void recurse(const Node& node, int depth, Visit& visit) {
        if (depth == n_) {
            visit(node);
            return;
        }
        Scaled sc = scaled(node.lo);
        Scaled se = scaled(node.hi);
        int k_first = static_cast<int>(std::floor(sc.value));
        int k_last = se.exact ? static_cast<int>(se.value) - 1 : static_cast<int>(std::floor(se.value));
        k_last = std::min(k_last, pieces_ - 1);
        double c_val = orbit_.endpoint_value(node.lo);
        double e_val = orbit_.endpoint_value(node.hi);
        int count = k_last - k_first + 1;
        const Endpoint zero{Endpoint::Kind::Zero, 0};
        const Endpoint one{Endpoint::Kind::One, 0};
        for (int idx = 0; idx < count; ++idx) {
            // Children are emitted left to right in x.
            int k = node.orientation > 0 ? k_first + idx : k_last - idx;
            // Whether the child's ends are base-partition boundaries (which map
            // to 0 or 1) or the parent's own image endpoints (which advance).
            bool p_boundary = sc.exact || k > k_first;
            bool q_boundary = se.exact || k < k_last;
            double p = p_boundary ? k / ab_ : c_val;
            double q = q_boundary ? (k + 1) / ab_ : e_val;
            Node child;
            child.unit = node.unit / ab_;
            child.left = node.orientation > 0 ? node.left + (p - c_val) * node.unit
                                              : node.left + (e_val - q) * node.unit;
            if (positive_) {
                child.orientation = node.orientation;
                child.lo = p_boundary ? zero : advance(node.lo);
                child.hi = q_boundary ? one : advance(node.hi);
            } else {
                child.orientation = -node.orientation;
                child.lo = q_boundary ? zero : advance(node.hi);
                child.hi = p_boundary ? one : advance(node.lo);
            }
            word_.push_back(static_cast<uint8_t>(k));
            recurse(child, depth + 1, visit);
            word_.pop_back();
        }
    }

    OrbitOfOne orbit_;
    int n_;
    double ab_;
    bool positive_;
    int pieces_;
    std::vector<uint8_t> word_;
};

double node_length(const OrbitOfOne& orbit, const Node& node) {
    return (orbit.endpoint_value(node.hi) - orbit.endpoint_value(node.lo)) * node.unit;
}

}  // namespace

void for_each_cylinder(const RealConstant& beta, int n, const std::function<void(const CylinderLeaf&)>& visit) {
    if (n < 0) fail(ErrorKind::InvalidInput, "cylinder order must be >= 0");
    Enumerator en(beta, n);
    const OrbitOfOne& orbit = en.orbit();
    en.run([&](const Node& node) {
        CylinderLeaf leaf{node.left, node_length(orbit, node),
                          node.lo.kind == Endpoint::Kind::Zero && node.hi.kind == Endpoint::Kind::One,
                          node.orientation, node.lo, node.hi};
        visit(leaf);
    });
}

std::vector<Cylinder> cylinders_of_order(const RealConstant& beta, int n) {
    if (n < 0) fail(ErrorKind::InvalidInput, "cylinder order must be >= 0");
    Enumerator en(beta, n);
    const OrbitOfOne& orbit = en.orbit();
    std::vector<Cylinder> out;
    en.run([&](const Node& node) {
        Cylinder c;
        c.beta = orbit.beta();
        c.word = en.word();
        c.left = node.left;
        c.right = node.left + node_length(orbit, node);
        c.image_lo = node.lo;
        c.image_hi = node.hi;
        c.orientation = node.orientation;
        c.full = node.lo.kind == Endpoint::Kind::Zero && node.hi.kind == Endpoint::Kind::One;
        out.push_back(std::move(c));
    });
    // Close rounding seams so the list tiles [0,1) exactly.
    for (size_t i = 0; i + 1 < out.size(); ++i) out[i].right = out[i + 1].left;
    if (!out.empty()) out.back().right = 1.0;
    return out;
}

bool is_full_cylinder(const RealConstant& beta, const Cylinder& cyl) {
    if (cyl.image_lo.kind == Endpoint::Kind::Zero && cyl.image_hi.kind == Endpoint::Kind::One) return true;
    OrbitOfOne orbit(beta, std::max(cyl.image_lo.index, cyl.image_hi.index) + 1);
    double lo = orbit.endpoint_value(cyl.image_lo);
    double hi = orbit.endpoint_value(cyl.image_hi);
    const double tol = std::ldexp(1.0, -40);
    bool lo_near = lo <= tol;
    bool hi_near = hi >= 1.0 - tol;
    if (!lo_near || !hi_near) return false;
    fail(ErrorKind::Indeterminate, "cylinder image endpoints within 2^-40 of [0,1) but not exact");
}

GapReport full_cylinder_gap(const RealConstant& beta, int n) {
    GapReport rep;
    double run_len = 0.0;
    int run = 0;
    for_each_cylinder(beta, n, [&](const CylinderLeaf& leaf) {
        ++rep.count;
        if (leaf.full) {
            ++rep.full_count;
            rep.max_gap = std::max(rep.max_gap, run_len);
            rep.max_nonfull_run = std::max(rep.max_nonfull_run, run);
            run_len = 0.0;
            run = 0;
        } else {
            run_len += leaf.length;
            ++run;
        }
    });
    rep.max_gap = std::max(rep.max_gap, run_len);
    rep.max_nonfull_run = std::max(rep.max_nonfull_run, run);
    return rep;
}

std::vector<PreimagePiece> preimage_intervals(const RealConstant& beta, int n, double a, double r) {
    if (!(r > 0.0 && r < 0.5)) fail(ErrorKind::InvalidInput, "preimage radius must be in (0, 1/2)");
    if (!(a >= 0.0 && a < 1.0)) fail(ErrorKind::InvalidInput, "preimage center must be in [0,1)");
    std::vector<std::pair<double, double>> targets;
    double lo = a - r, hi = a + r;
    if (lo < 0.0) {
        targets.push_back({0.0, hi});
        targets.push_back({lo + 1.0, 1.0});
    } else if (hi > 1.0) {
        targets.push_back({0.0, hi - 1.0});
        targets.push_back({lo, 1.0});
    } else {
        targets.push_back({lo, hi});
    }
    std::vector<PreimagePiece> out;
    if (n == 0) {
        for (const auto& t : targets) out.push_back({t.first, t.second, 0});
        std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
        return out;
    }
    Enumerator en(beta, n);
    const OrbitOfOne& orbit = en.orbit();
    uint64_t index = 0;
    en.run([&](const Node& node) {
        double c = orbit.endpoint_value(node.lo);
        double e = orbit.endpoint_value(node.hi);
        std::vector<PreimagePiece> local;
        for (const auto& t : targets) {
            double p = std::max(c, t.first);
            double q = std::min(e, t.second);
            if (p > q || (p == q && q == e)) continue;
            double x0, x1;
            if (node.orientation > 0) {
                x0 = node.left + (p - c) * node.unit;
                x1 = node.left + (q - c) * node.unit;
            } else {
                x0 = node.left + (e - q) * node.unit;
                x1 = node.left + (e - p) * node.unit;
            }
            local.push_back({x0, x1, index});
        }
        std::sort(local.begin(), local.end(), [](const auto& x, const auto& y) { return x.lo < y.lo; });
        out.insert(out.end(), local.begin(), local.end());
        ++index;
    });
    return out;
}

}  // namespace shrink
