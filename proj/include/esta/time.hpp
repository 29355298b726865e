#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace esta {

/// Instant or duration in integer microseconds.
///
/// All planning arithmetic runs on whole microseconds so that sums such as
/// 6.0 + 0.1 compare exactly. `Micros::unreachable()` is a sentinel greater
/// than every finite value and must not take part in arithmetic.
class Micros {
public:
    constexpr Micros() = default;
    constexpr explicit Micros(std::int64_t count) : count_(count) {}

    static Micros from_seconds(double seconds) {
        return Micros{static_cast<std::int64_t>(std::llround(seconds * 1e6))};
    }
    static constexpr Micros unreachable() { return Micros{std::numeric_limits<std::int64_t>::max()}; }
    static constexpr Micros zero() { return Micros{0}; }

    constexpr std::int64_t count() const { return count_; }
    constexpr double seconds() const { return static_cast<double>(count_) * 1e-6; }
    constexpr bool is_unreachable() const { return count_ == std::numeric_limits<std::int64_t>::max(); }

    constexpr Micros& operator+=(Micros o) {
        count_ += o.count_;
        return *this;
    }
    constexpr Micros& operator-=(Micros o) {
        count_ -= o.count_;
        return *this;
    }
    friend constexpr Micros operator+(Micros a, Micros b) { return a += b; }
    friend constexpr Micros operator-(Micros a, Micros b) { return a -= b; }
    friend constexpr Micros operator*(Micros a, std::int64_t k) { return Micros{a.count_ * k}; }
    friend constexpr auto operator<=>(Micros, Micros) = default;

private:
    std::int64_t count_ = 0;
};

/// "inf" for the sentinel, otherwise seconds with exactly six decimals.
std::string format_seconds(Micros t);

}  // namespace esta
