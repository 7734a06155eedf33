#include "shrink/digit_stream.hpp"
#include "shrink/error.hpp"

#include <limits>

namespace shrink {

unsigned window_digits_for(unsigned base) {
    unsigned k = 0;
    unsigned __int128 p = 1;
    const unsigned __int128 limit = static_cast<unsigned __int128>(1) << 64;
    while (p * base < limit) {
        p *= base;
        ++k;
    }
    return k;
}

namespace {

uint64_t ipow(uint64_t b, unsigned k) {
    uint64_t p = 1;
    for (unsigned i = 0; i < k; ++i) p *= b;
    return p;
}

void check_base(unsigned base) {
    if (base < 2 || base > 256) fail(ErrorKind::InvalidInput, "digit base must be in [2,256]");
}

}  // namespace

RandomDigits::RandomDigits(unsigned base, uint64_t seed) : base_(base), rng_(seed) {
    check_base(base);
    chunk_digits_ = window_digits_for(base);
    uint64_t bk = ipow(base, chunk_digits_);
    chunk_limit_ = (std::numeric_limits<uint64_t>::max() / bk) * bk;
}

void RandomDigits::fill(uint8_t* out, size_t count) {
    for (size_t i = 0; i < count; ++i) {
        if (left_ == 0) {
            uint64_t u;
            do {
                u = rng_();
            } while (u >= chunk_limit_);
            chunk_pow_ = ipow(base_, chunk_digits_);
            chunk_ = u % chunk_pow_;
            left_ = chunk_digits_;
        }
        chunk_pow_ /= base_;
        out[i] = static_cast<uint8_t>(chunk_ / chunk_pow_);
        chunk_ %= chunk_pow_;
        --left_;
    }
}

std::unique_ptr<DigitSource> RandomDigits::clone() const { return std::make_unique<RandomDigits>(*this); }

RationalDigits::RationalDigits(unsigned base, const mpq_class& x) : base_(base) {
    check_base(base);
    x_ = x - floor_of(x);
    const mpz_class& den = x_.get_den();
    if (mpz_sizeinbase(den.get_mpz_t(), 2) > 62)
        fail(ErrorKind::InvalidInput, "rational digit source needs a denominator below 2^62");
    q_ = den.get_ui();
    r_ = x_.get_num().get_ui();
}

void RationalDigits::fill(uint8_t* out, size_t count) {
    for (size_t i = 0; i < count; ++i) {
        r_ *= base_;
        out[i] = static_cast<uint8_t>(r_ / q_);
        r_ %= q_;
    }
}

bool RationalDigits::exact_tail(size_t pos, mpq_class& value) const {
    mpz_class r;
    mpz_class b(base_);
    mpz_powm_ui(r.get_mpz_t(), b.get_mpz_t(), pos, x_.get_den_mpz_t());
    r = (r * x_.get_num()) % x_.get_den();
    value = mpq_class(r, x_.get_den());
    value.canonicalize();
    return true;
}

std::unique_ptr<DigitSource> RationalDigits::clone() const { return std::make_unique<RationalDigits>(*this); }

DigitStream::DigitStream(unsigned base, std::unique_ptr<DigitSource> source)
    : base_(base), source_(std::move(source)) {
    check_base(base);
    k_ = window_digits_for(base);
    top_pow_ = ipow(base, k_ - 1);
    inv_bk_ = 1.0 / (static_cast<double>(top_pow_) * base);
    for (unsigned j = 0; j < k_; ++j) window_ = window_ * base_ + digit(j);
}

DigitStream::DigitStream(const DigitStream& o)
    : base_(o.base_),
      source_(o.source_->clone()),
      digits_(o.digits_),
      offset_(o.offset_),
      cursor_(o.cursor_),
      k_(o.k_),
      window_(o.window_),
      top_pow_(o.top_pow_),
      inv_bk_(o.inv_bk_) {}

DigitStream& DigitStream::operator=(const DigitStream& o) {
    if (this != &o) {
        DigitStream tmp(o);
        *this = std::move(tmp);
    }
    return *this;
}

void DigitStream::ensure(size_t k) {
    size_t have = offset_ + digits_.size();
    if (k < have) return;
    size_t grow = std::max<size_t>(4096, k + 1 - have);
    size_t old = digits_.size();
    digits_.resize(old + grow);
    source_->fill(digits_.data() + old, grow);
}

uint8_t DigitStream::digit(size_t k) {
    if (k < offset_) fail(ErrorKind::InvalidInput, "digit already discarded");
    ensure(k);
    return digits_[k - offset_];
}

void DigitStream::shift(size_t n) {
    for (size_t s = 0; s < n; ++s) {
        uint8_t next = digit(cursor_ + k_);
        window_ = (window_ % top_pow_) * base_ + next;
        ++cursor_;
    }
    if (cursor_ - offset_ > (1u << 16)) {
        digits_.erase(digits_.begin(), digits_.begin() + static_cast<std::ptrdiff_t>(cursor_ - offset_));
        offset_ = cursor_;
    }
}

Arc<double> DigitStream::arc() const {
    constexpr double pad = 1e-15;
    double lo = static_cast<double>(window_) * inv_bk_ - pad;
    double hi = static_cast<double>(window_ + 1) * inv_bk_ + pad;
    return normalized_arc(lo, hi);
}

void DigitStream::exact_enclosure(size_t digits, mpq_class& lo, mpq_class& hi) {
    if (source_->exact_tail(cursor_, lo)) {
        hi = lo;
        return;
    }
    mpz_class num = 0;
    for (size_t j = 0; j < digits; ++j) num = num * base_ + digit(cursor_ + j);
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), base_, digits);
    lo = mpq_class(num, den);
    hi = mpq_class(num + 1, den);
    lo.canonicalize();
    hi.canonicalize();
}

}  // namespace shrink
