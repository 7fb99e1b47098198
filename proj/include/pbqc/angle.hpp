#pragma once

#include <cstdint>
#include <numbers>
#include <ostream>

namespace pbqc {

/// Angle k*pi/4 stored as k in Z_8. Every protocol angle lives here; floating
/// point only appears once an angle is turned into a gate matrix.
class Angle8 {
  public:
    constexpr Angle8() = default;
    constexpr explicit Angle8(int k) : k_(static_cast<std::uint8_t>(((k % 8) + 8) % 8)) {}

    static constexpr Angle8 pi() { return Angle8(4); }

    constexpr int k() const { return k_; }
    double radians() const { return k_ * (std::numbers::pi / 4.0); }

    constexpr Angle8 operator-() const { return Angle8(-static_cast<int>(k_)); }
    constexpr Angle8 operator+(Angle8 o) const { return Angle8(k_ + o.k_); }
    constexpr Angle8 operator-(Angle8 o) const { return Angle8(k_ - o.k_); }
    constexpr Angle8 &operator+=(Angle8 o) { return *this = *this + o; }

    /// this + pi * bit
    constexpr Angle8 plus_pi_times(int bit) const { return Angle8(k_ + 4 * (bit & 1)); }
    /// (-1)^bit * this
    constexpr Angle8 signed_by(int bit) const { return (bit & 1) ? -*this : *this; }

    constexpr auto operator<=>(const Angle8 &) const = default;

  private:
    std::uint8_t k_ = 0;
};

inline std::ostream &operator<<(std::ostream &out, Angle8 a) { return out << a.k() << "pi/4"; }

}  // namespace pbqc
