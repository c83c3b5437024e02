#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "emuprob/error.hpp"

namespace emuprob {

/// Finite binary string; the empty string plays the role of lambda.
///
/// Bits are stored as the characters '0'/'1', so the built-in ordering is
/// lexicographic and the textual form is the storage itself.
class BitString {
public:
    BitString() = default;

    static BitString parse(std::string_view text) {
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (text[i] != '0' && text[i] != '1') {
                throw ParseError("not a bit string: \"" + std::string(text) + "\" (offset " +
                                 std::to_string(i) + ")");
            }
        }
        BitString result;
        result.bits_.assign(text);
        return result;
    }

    static BitString repeat(int bit, std::size_t count) {
        BitString result;
        result.bits_.assign(count, bit ? '1' : '0');
        return result;
    }

    /// The `length`-bit big-endian rendering of `value`; used to walk {0,1}^n
    /// in lexicographic order.
    static BitString from_index(std::uint64_t value, std::size_t length) {
        BitString result;
        result.bits_.resize(length, '0');
        for (std::size_t i = 0; i < length; ++i) {
            if ((value >> (length - 1 - i)) & 1U) result.bits_[i] = '1';
        }
        return result;
    }

    [[nodiscard]] std::uint64_t to_index() const {
        std::uint64_t value = 0;
        for (char c : bits_) value = (value << 1) | static_cast<std::uint64_t>(c == '1');
        return value;
    }

    [[nodiscard]] std::size_t size() const noexcept { return bits_.size(); }
    [[nodiscard]] bool empty() const noexcept { return bits_.empty(); }
    [[nodiscard]] int operator[](std::size_t i) const { return bits_[i] == '1' ? 1 : 0; }
    [[nodiscard]] const std::string& str() const noexcept { return bits_; }

    void push_back(int bit) { bits_.push_back(bit ? '1' : '0'); }
    void pop_back() { bits_.pop_back(); }

    [[nodiscard]] BitString prefix(std::size_t n) const {
        BitString result;
        result.bits_ = bits_.substr(0, n);
        return result;
    }

    [[nodiscard]] BitString suffix(std::size_t n) const {
        BitString result;
        result.bits_ = n >= bits_.size() ? bits_ : bits_.substr(bits_.size() - n);
        return result;
    }

    [[nodiscard]] bool all_zero() const noexcept {
        return bits_.find('1') == std::string::npos;
    }

    [[nodiscard]] bool ends_with(const BitString& tail) const noexcept {
        return bits_.size() >= tail.bits_.size() &&
               bits_.compare(bits_.size() - tail.bits_.size(), tail.bits_.size(), tail.bits_) == 0;
    }

    [[nodiscard]] bool starts_with(const BitString& head) const noexcept {
        return bits_.compare(0, head.bits_.size(), head.bits_) == 0 && bits_.size() >= head.bits_.size();
    }

    [[nodiscard]] BitString complement() const {
        BitString result = *this;
        for (char& c : result.bits_) c = c == '0' ? '1' : '0';
        return result;
    }

    friend BitString operator+(BitString lhs, const BitString& rhs) {
        lhs.bits_ += rhs.bits_;
        return lhs;
    }

    friend auto operator<=>(const BitString&, const BitString&) = default;
    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::string bits_;
};

/// Result of running a computer: a finite bit string or Undefined (the
/// non-halting value).
class Output {
public:
    Output() = default;
    explicit Output(BitString value) : value_(std::move(value)) {}

    static Output undefined() { return Output(); }
    static Output parse(std::string_view bits) { return Output(BitString::parse(bits)); }

    [[nodiscard]] bool defined() const noexcept { return value_.has_value(); }
    [[nodiscard]] const BitString& value() const {
        if (!value_) throw DomainError("value() on an Undefined output");
        return *value_;
    }

    /// "null" for Undefined, otherwise the bits (the empty string stays empty).
    [[nodiscard]] std::string to_string() const { return value_ ? value_->str() : "null"; }

    friend bool operator==(const Output&, const Output&) = default;

    // Defined outputs in shortlex order, Undefined last.
    friend std::strong_ordering operator<=>(const Output& a, const Output& b) {
        if (a.defined() != b.defined()) {
            return a.defined() ? std::strong_ordering::less : std::strong_ordering::greater;
        }
        if (!a.defined()) return std::strong_ordering::equal;
        if (auto c = a.value_->size() <=> b.value_->size(); c != 0) return c;
        return *a.value_ <=> *b.value_;
    }

private:
    std::optional<BitString> value_;
};

/// Calls f(x) for every x in {0,1}^n in lexicographic order.
template <typename F>
void for_each_string(std::size_t n, F&& f) {
    if (n >= 63) throw ResourceError("cannot enumerate {0,1}^" + std::to_string(n));
    const std::uint64_t count = std::uint64_t{1} << n;
    for (std::uint64_t i = 0; i < count; ++i) f(BitString::from_index(i, n));
}

} // namespace emuprob

template <>
struct std::hash<emuprob::BitString> {
    std::size_t operator()(const emuprob::BitString& b) const noexcept {
        return std::hash<std::string>{}(b.str());
    }
};

template <>
struct std::hash<emuprob::Output> {
    std::size_t operator()(const emuprob::Output& o) const noexcept {
        return o.defined() ? std::hash<std::string>{}(o.value().str()) : 0x9e3779b97f4a7c15ULL;
    }
};
