#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "shrink/real_constant.hpp"

namespace shrink {

// Symbolic endpoint of a cylinder image: 0, 1, or T^j(1).
struct Endpoint {
    enum class Kind : uint8_t { Zero, One, Orbit };
    Kind kind = Kind::Zero;
    int index = 0;  // j for Orbit

    bool operator==(const Endpoint& o) const { return kind == o.kind && index == o.index; }
};

// T^j(1) for j = 0..max_index, with exact-integer snapping. snapped(j) means
// |beta|*T^{j-1}(1) is an integer, so T^j(1) = 0 and the orbit stops.
class OrbitOfOne {
public:
    OrbitOfOne(const RealConstant& beta, int max_index);

    int max_index() const { return static_cast<int>(values_.size()) - 1; }
    double value(int j) const { return values_.at(j); }
    bool snapped(int j) const { return snapped_.at(j); }
    double endpoint_value(const Endpoint& e) const;
    double beta() const { return beta_; }
    double abs_beta() const { return abs_beta_; }

private:
    double beta_;
    double abs_beta_;
    std::vector<double> values_;
    std::vector<bool> snapped_;
};

struct Cylinder {
    double beta = 0.0;
    std::vector<uint8_t> word;  // order-1 piece index k = floor(|beta| y) along the orbit
    double left = 0.0;
    double right = 0.0;
    bool full = false;
    Endpoint image_lo;  // image of the cylinder under T^n is [image_lo, image_hi)
    Endpoint image_hi;
    int orientation = 1;  // +1 when T^n is increasing on the cylinder

    std::string word_string() const;
    double length() const { return right - left; }
};

// Leaf record for streaming enumeration; no word is materialized.
struct CylinderLeaf {
    double left;
    double length;
    bool full;
    int orientation;
    Endpoint image_lo;
    Endpoint image_hi;
};

// Visits every cylinder of order n from left to right.
void for_each_cylinder(const RealConstant& beta, int n, const std::function<void(const CylinderLeaf&)>& visit);

std::vector<Cylinder> cylinders_of_order(const RealConstant& beta, int n);

// Full means the order-n image is [0,1); decided on the symbolic endpoints,
// falling back to the 2^-40 tolerance on their values. Throws Indeterminate
// when the values sit inside the tolerance band without being symbolic.
bool is_full_cylinder(const RealConstant& beta, const Cylinder& cyl);

struct GapReport {
    double max_gap = 0.0;       // longest stretch of non-full cylinders
    int max_nonfull_run = 0;    // most consecutive non-full cylinders
    uint64_t count = 0;         // number of cylinders of this order
    uint64_t full_count = 0;
};

GapReport full_cylinder_gap(const RealConstant& beta, int n);

struct PreimagePiece {
    double lo;
    double hi;
    uint64_t cylinder;  // position of the containing cylinder in left-to-right order
};

// T^{-n} of the closed ball B(a, r) on the circle, one piece per cylinder
// and per arc of the ball.
std::vector<PreimagePiece> preimage_intervals(const RealConstant& beta, int n, double a, double r);

}  // namespace shrink
