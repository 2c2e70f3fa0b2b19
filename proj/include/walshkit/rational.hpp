#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace walshkit {

/**
 * Exact rational on 64-bit integers, kept reduced with a positive
 * denominator. Measures of a-adic cell sets are always of the form
 * count / a^level, so 64 bits cover every grid this library can hold;
 * overflow throws instead of silently degrading.
 */
class Rational {
public:
    Rational() = default;
    Rational(std::int64_t num, std::int64_t den = 1) : num_(num), den_(den) { normalize(); }

    std::int64_t num() const { return num_; }
    std::int64_t den() const { return den_; }

    static Rational power_of(std::int64_t base, int exp) {
        // base^exp for exp >= 0, 1/base^-exp otherwise
        std::int64_t p = 1;
        for (int i = 0; i < (exp < 0 ? -exp : exp); ++i) p = checked_mul(p, base);
        return exp < 0 ? Rational(1, p) : Rational(p, 1);
    }

    Rational operator+(const Rational& o) const {
        const std::int64_t g = std::gcd(den_, o.den_);
        const std::int64_t lhs = checked_mul(num_, o.den_ / g);
        const std::int64_t rhs = checked_mul(o.num_, den_ / g);
        return Rational(checked_add(lhs, rhs), checked_mul(den_, o.den_ / g));
    }
    Rational operator-(const Rational& o) const { return *this + Rational(-o.num_, o.den_); }
    Rational operator*(const Rational& o) const {
        const std::int64_t g1 = std::gcd(std::abs(num_), o.den_);
        const std::int64_t g2 = std::gcd(std::abs(o.num_), den_);
        return Rational(checked_mul(num_ / g1, o.num_ / g2),
                        checked_mul(den_ / g2, o.den_ / g1));
    }
    Rational operator/(const Rational& o) const {
        if (o.num_ == 0) throw std::domain_error("Rational: division by zero");
        return *this * Rational(o.den_, o.num_);
    }

    bool operator==(const Rational& o) const { return num_ == o.num_ && den_ == o.den_; }
    bool operator!=(const Rational& o) const { return !(*this == o); }
    bool operator<(const Rational& o) const {
        return (__int128)num_ * o.den_ < (__int128)o.num_ * den_;
    }
    bool operator<=(const Rational& o) const { return !(o < *this); }
    bool operator>(const Rational& o) const { return o < *this; }
    bool operator>=(const Rational& o) const { return !(*this < o); }

    double to_double() const { return double(num_) / double(den_); }

    std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

private:
    void normalize() {
        if (den_ == 0) throw std::domain_error("Rational: zero denominator");
        if (den_ < 0) { num_ = -num_; den_ = -den_; }
        const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
        if (g > 1) { num_ /= g; den_ /= g; }
    }

    static std::int64_t checked_add(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Rational add overflow");
        return r;
    }
    static std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
        std::int64_t r;
        if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Rational mul overflow");
        return r;
    }

    std::int64_t num_{0};
    std::int64_t den_{1};
};

// a^exp as int64, throwing on overflow. Used for cell counts and spectral
// index bounds, both of which must stay addressable.
inline std::int64_t checked_ipow(std::int64_t base, int exp) {
    std::int64_t r = 1;
    for (int i = 0; i < exp; ++i) {
        if (__builtin_mul_overflow(r, base, &r))
            throw std::overflow_error("integer power overflow: " + std::to_string(base) + "^" +
                                      std::to_string(exp));
    }
    return r;
}

} // namespace walshkit
