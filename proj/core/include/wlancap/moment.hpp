#pragma once

#include <limits>

namespace wlancap {

/// A moment that is either a finite non-negative number or divergent.
/// Arithmetic on divergent values stays divergent.
class MomentValue {
public:
    constexpr MomentValue() = default;

    static constexpr MomentValue finite(double v) { return MomentValue(v, false); }
    static constexpr MomentValue divergent() {
        return MomentValue(std::numeric_limits<double>::infinity(), true);
    }

    constexpr bool is_finite() const { return !divergent_; }
    constexpr bool is_divergent() const { return divergent_; }

    /// The finite value, or +inf when divergent.
    constexpr double value() const { return value_; }

    friend constexpr MomentValue operator+(MomentValue a, MomentValue b) {
        if (a.divergent_ || b.divergent_) return divergent();
        return finite(a.value_ + b.value_);
    }

    friend constexpr bool operator==(MomentValue a, MomentValue b) {
        return a.divergent_ == b.divergent_ && (a.divergent_ || a.value_ == b.value_);
    }

private:
    constexpr MomentValue(double v, bool d) : value_(v), divergent_(d) {}

    double value_ = 0.0;
    bool divergent_ = false;
};

}  // namespace wlancap
