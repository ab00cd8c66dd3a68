#pragma once

#include <cmath>
#include <functional>

namespace blowup {

inline constexpr const char* version = "0.1.0";

using fn1 = std::function<double(double)>;
using fn2 = std::function<double(double, double)>;

// Neumaier-compensated accumulator: order-deterministic summation that keeps
// a running correction term, robust when addends span many magnitudes.
class compensated_sum {
public:
    void add(double v) {
        double t = s_ + v;
        if (std::abs(s_) >= std::abs(v))
            c_ += (s_ - t) + v;
        else
            c_ += (v - t) + s_;
        s_ = t;
    }
    double value() const { return s_ + c_; }

private:
    double s_ = 0.0;
    double c_ = 0.0;
};

} // namespace blowup
