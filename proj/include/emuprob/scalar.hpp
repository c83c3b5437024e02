#pragma once

#include <compare>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>

#include <boost/multiprecision/cpp_int.hpp>

#include "emuprob/error.hpp"

namespace emuprob {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// "p/q" rendering used by every exact export, including "0/1" and "1/1".
inline std::string to_string(const Rational& r) {
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

/// Fixed 12-digit decimal rendering. Approximate by construction.
inline std::string to_decimal(const Rational& r, int digits = 12) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(digits) << r.convert_to<long double>();
    return os.str();
}

inline Rational parse_rational(const std::string& text) {
    try {
        auto slash = text.find('/');
        if (slash == std::string::npos) return Rational(BigInt(text));
        return Rational(BigInt(text.substr(0, slash)), BigInt(text.substr(slash + 1)));
    } catch (const std::exception&) {
        throw ParseError("not a rational: \"" + text + "\"");
    }
}

inline Rational pow2_inverse(std::size_t e) {
    BigInt den = 1;
    den <<= e;
    return Rational(BigInt(1), den);
}

/// Non-negative dyadic rational numerator / 2^exponent, kept canonical
/// (numerator odd, or numerator zero with exponent zero).
class Dyadic {
public:
    Dyadic() = default;
    Dyadic(BigInt numerator, std::size_t exponent) : num_(std::move(numerator)), exp_(exponent) {
        if (num_ < 0) throw DomainError("dyadic values are non-negative");
        normalize();
    }

    static Dyadic one() { return Dyadic(BigInt(1), 0); }
    static Dyadic zero() { return Dyadic(); }
    static Dyadic pow2_inverse(std::size_t e) { return Dyadic(BigInt(1), e); }

    [[nodiscard]] const BigInt& numerator() const noexcept { return num_; }
    [[nodiscard]] std::size_t exponent() const noexcept { return exp_; }
    [[nodiscard]] bool is_zero() const noexcept { return num_ == 0; }

    [[nodiscard]] Dyadic half() const { return Dyadic(num_, exp_ + 1); }

    [[nodiscard]] Rational to_rational() const {
        BigInt den = 1;
        den <<= exp_;
        return Rational(num_, den);
    }

    [[nodiscard]] double to_double() const { return to_rational().convert_to<double>(); }

    Dyadic& operator+=(const Dyadic& other) {
        if (other.exp_ > exp_) {
            num_ <<= (other.exp_ - exp_);
            exp_ = other.exp_;
            num_ += other.num_;
        } else {
            num_ += other.num_ << (exp_ - other.exp_);
        }
        normalize();
        return *this;
    }

    Dyadic& operator-=(const Dyadic& other) {
        BigInt a = num_;
        BigInt b = other.num_;
        std::size_t e = std::max(exp_, other.exp_);
        a <<= (e - exp_);
        b <<= (e - other.exp_);
        if (a < b) throw DomainError("dyadic subtraction would be negative");
        num_ = a - b;
        exp_ = e;
        normalize();
        return *this;
    }

    Dyadic& operator*=(const Dyadic& other) {
        num_ *= other.num_;
        exp_ += other.exp_;
        normalize();
        return *this;
    }

    friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
    friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
    friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

    friend bool operator==(const Dyadic&, const Dyadic&) = default;
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
        std::size_t e = std::max(a.exp_, b.exp_);
        BigInt x = a.num_ << (e - a.exp_);
        BigInt y = b.num_ << (e - b.exp_);
        if (x < y) return std::strong_ordering::less;
        if (y < x) return std::strong_ordering::greater;
        return std::strong_ordering::equal;
    }

    [[nodiscard]] std::string to_string() const { return emuprob::to_string(to_rational()); }

private:
    void normalize() {
        if (num_ == 0) {
            exp_ = 0;
            return;
        }
        std::size_t shift = std::min<std::size_t>(boost::multiprecision::lsb(num_), exp_);
        num_ >>= shift;
        exp_ -= shift;
    }

    BigInt num_{0};
    std::size_t exp_{0};
};

} // namespace emuprob
