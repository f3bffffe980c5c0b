#ifndef PMATCH_STATS_HPP
#define PMATCH_STATS_HPP

#include <cmath>
#include <cstdint>

namespace pmatch {

inline constexpr double kZ95 = 1.959963984540054;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double x) const { return lo <= x && x <= hi; }
};

// Wilson score interval for a binomial proportion.
inline Interval wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = kZ95) {
    if (trials == 0) return {0.0, 1.0};
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    double lo = center - half;
    double hi = center + half;
    if (successes == 0) lo = 0.0;
    if (successes == trials) hi = 1.0;
    return {lo < 0.0 ? 0.0 : lo, hi > 1.0 ? 1.0 : hi};
}

// Welford accumulator.
class RunningStats {
public:
    void add(double x) {
        ++count_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(count_);
        m2_ += delta * (x - mean_);
    }

    std::uint64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const { return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0; }
    double stddev() const { return std::sqrt(variance()); }
    // Standard error of the mean.
    double stderr_mean() const { return count_ > 0 ? stddev() / std::sqrt(static_cast<double>(count_)) : 0.0; }

private:
    std::uint64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

}  // namespace pmatch

#endif  // PMATCH_STATS_HPP
