#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "shrink/arc.hpp"

namespace shrink {

// Produces the base-b digits of a point of [0,1), most significant first.
class DigitSource {
public:
    virtual ~DigitSource() = default;
    virtual void fill(uint8_t* out, size_t count) = 0;
    // Exact value of the shifted point T^pos(x) when the source knows it.
    virtual bool exact_tail(size_t pos, mpq_class& value) const {
        (void)pos;
        (void)value;
        return false;
    }
    virtual std::unique_ptr<DigitSource> clone() const = 0;
};

// Independent uniform digits: the point is Lebesgue-distributed.
class RandomDigits : public DigitSource {
public:
    RandomDigits(unsigned base, uint64_t seed);
    void fill(uint8_t* out, size_t count) override;
    std::unique_ptr<DigitSource> clone() const override;

private:
    unsigned base_;
    std::mt19937_64 rng_;
    unsigned chunk_digits_;
    uint64_t chunk_limit_;  // rejection threshold, a multiple of base^chunk_digits
    uint64_t chunk_ = 0;
    uint64_t chunk_pow_ = 1;  // base^(digits left in chunk_)
    unsigned left_ = 0;
};

// Digits of p/q by long division.
class RationalDigits : public DigitSource {
public:
    RationalDigits(unsigned base, const mpq_class& x);
    void fill(uint8_t* out, size_t count) override;
    bool exact_tail(size_t pos, mpq_class& value) const override;
    std::unique_ptr<DigitSource> clone() const override;

private:
    unsigned base_;
    mpq_class x_;
    unsigned __int128 q_;
    unsigned __int128 r_;
};

// A point x = sum digits[k] b^{-k-1}; advancing the cursor by n realizes the
// map x -> b x mod 1 applied n times, exactly and in O(1) per step.
class DigitStream {
public:
    DigitStream(unsigned base, std::unique_ptr<DigitSource> source);
    DigitStream(const DigitStream& o);
    DigitStream& operator=(const DigitStream& o);
    DigitStream(DigitStream&&) = default;
    DigitStream& operator=(DigitStream&&) = default;

    unsigned base() const { return base_; }
    size_t cursor() const { return cursor_; }
    uint8_t digit(size_t k);
    void shift(size_t n = 1);

    // The shifted point lies in [window/b^K, (window+1)/b^K], K = window_digits().
    uint64_t window() const { return window_; }
    unsigned window_digits() const { return k_; }
    // Outward-padded double arc of the shifted point.
    Arc<double> arc() const;
    // Exact enclosure from `digits` digits past the cursor, or the exact point.
    void exact_enclosure(size_t digits, mpq_class& lo, mpq_class& hi);

private:
    void ensure(size_t k);

    unsigned base_;
    std::unique_ptr<DigitSource> source_;
    std::vector<uint8_t> digits_;
    size_t offset_ = 0;  // absolute index of digits_[0]
    size_t cursor_ = 0;
    unsigned k_;
    uint64_t window_ = 0;
    uint64_t top_pow_;  // b^(K-1)
    double inv_bk_;     // b^{-K}
};

// Largest K with b^K < 2^64.
unsigned window_digits_for(unsigned base);

}  // namespace shrink
