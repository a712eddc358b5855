#pragma once

#include <cmath>
#include <cstdint>

namespace ldtail {

/// Compensated (Neumaier) summation. Adding terms of mixed magnitude keeps
/// the running error at O(eps) instead of O(n*eps).
class CompensatedSum {
public:
    CompensatedSum() = default;
    explicit CompensatedSum(double init) : sum_(init) {}

    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }

    CompensatedSum& operator+=(double x) noexcept {
        add(x);
        return *this;
    }

    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Running first/second moment accumulator for Monte Carlo estimates.
/// Merge order must be fixed by the caller for reproducible results.
struct MomentAccumulator {
    CompensatedSum sum;
    CompensatedSum sum_sq;
    std::uint64_t count = 0;

    void add(double x) noexcept {
        sum.add(x);
        sum_sq.add(x * x);
        ++count;
    }

    void merge(const MomentAccumulator& other) noexcept {
        sum.add(other.sum.value());
        sum_sq.add(other.sum_sq.value());
        count += other.count;
    }

    double mean() const noexcept { return count ? sum.value() / static_cast<double>(count) : 0.0; }

    /// Standard error of the mean from the sample variance.
    double std_error() const noexcept {
        if (count < 2) return 0.0;
        const double n = static_cast<double>(count);
        const double m = mean();
        double var = (sum_sq.value() - n * m * m) / (n - 1.0);
        if (var < 0.0) var = 0.0;
        return std::sqrt(var / n);
    }
};

}  // namespace ldtail
