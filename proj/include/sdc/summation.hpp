#pragma once

#include <cmath>
#include <limits>
#include <span>

namespace sdc {

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    CompensatedSum& operator+=(double x) {
        add(x);
        return *this;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_sum(std::span<const double> xs) {
    CompensatedSum s;
    for (double x : xs) s.add(x);
    return s.value();
}

/// log(sum exp(l_k)) in two passes over a fixed list of log-terms.
/// Terms below max + log(eps) - log(count) are dropped; their total is below
/// machine epsilon relative to the result, and the count is reported.
struct LogSum {
    double log_value = -std::numeric_limits<double>::infinity();
    std::size_t skipped = 0;
    /// Upper bound of log(total skipped mass).
    double log_skipped_bound = -std::numeric_limits<double>::infinity();

    double value() const { return std::exp(log_value); }
};

inline LogSum log_sum_exp(std::span<const double> log_terms) {
    LogSum out;
    double mx = -std::numeric_limits<double>::infinity();
    for (double l : log_terms) mx = std::max(mx, l);
    if (!std::isfinite(mx)) return out;
    const double cutoff =
        mx + std::log(std::numeric_limits<double>::epsilon()) - std::log(static_cast<double>(log_terms.size()));
    CompensatedSum s;
    for (double l : log_terms) {
        if (l < cutoff) {
            ++out.skipped;
            continue;
        }
        s.add(std::exp(l - mx));
    }
    out.log_value = mx + std::log(s.value());
    if (out.skipped > 0) out.log_skipped_bound = cutoff + std::log(static_cast<double>(out.skipped));
    return out;
}

}  // namespace sdc
