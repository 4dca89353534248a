#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "iecc/errors.hpp"

namespace iecc {

enum class WilcoxonMethod : std::uint8_t { exact, normal_approx };

inline const char* wilcoxon_method_name(WilcoxonMethod m) {
    return m == WilcoxonMethod::exact ? "exact" : "normal_approx";
}

struct TestResult {
    double statistic = 0.0; // W = min(W+, W-)
    double p_value = 1.0;   // two-sided
    int n_effective = 0;    // pairs left after zero-difference removal
    WilcoxonMethod method = WilcoxonMethod::exact;
};

namespace detail {

// Midranks of |d|, plus the tie-group sizes for the variance correction.
inline std::vector<double> midranks(const std::vector<double>& abs_d, std::vector<int>& tie_sizes) {
    const std::size_t n = abs_d.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return abs_d[a] < abs_d[b]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && abs_d[order[j + 1]] == abs_d[order[i]]) ++j;
        const double rank = (double(i + 1) + double(j + 1)) / 2.0;
        for (std::size_t t = i; t <= j; ++t) ranks[order[t]] = rank;
        tie_sizes.push_back(int(j - i + 1));
        i = j + 1;
    }
    return ranks;
}

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

} // namespace detail

// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
// are dropped; ties get midranks. Exact null distribution by enumerating all
// 2^n sign vectors for n <= 20 (or when forced), otherwise a normal
// approximation with tie and continuity corrections.
inline TestResult wilcoxon_signed_rank(const std::vector<double>& x, const std::vector<double>& y,
                                       std::optional<WilcoxonMethod> force = std::nullopt) {
    if (x.size() != y.size())
        throw degenerate_input_error("wilcoxon: sample lengths differ, " +
                                     std::to_string(x.size()) + " vs " + std::to_string(y.size()));
    if (x.empty()) throw degenerate_input_error("wilcoxon: empty samples");
    std::vector<double> abs_d;
    std::vector<int> signs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d != 0.0) {
            abs_d.push_back(std::fabs(d));
            signs.push_back(d > 0.0 ? 1 : -1);
        }
    }
    const int n = int(abs_d.size());
    if (n == 0) throw undefined_test_error("wilcoxon: all paired differences are zero");

    std::vector<int> tie_sizes;
    const std::vector<double> ranks = detail::midranks(abs_d, tie_sizes);
    double w_plus = 0.0, w_minus = 0.0;
    for (int i = 0; i < n; ++i)
        (signs[std::size_t(i)] > 0 ? w_plus : w_minus) += ranks[std::size_t(i)];
    const double w = std::min(w_plus, w_minus);

    TestResult result;
    result.statistic = w;
    result.n_effective = n;
    result.method = force ? *force
                          : (n <= 20 ? WilcoxonMethod::exact : WilcoxonMethod::normal_approx);
    if (result.method == WilcoxonMethod::exact) {
        if (n > 30) throw degenerate_input_error("wilcoxon: exact enumeration limited to n <= 30");
        const std::uint64_t total = 1ULL << n;
        std::uint64_t at_or_below = 0;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                if (mask & (1ULL << i)) sum += ranks[std::size_t(i)];
            if (sum <= w + 1e-12) ++at_or_below;
        }
        // The sign-flip bijection makes the two tails equal in mass.
        result.p_value = std::min(1.0, 2.0 * double(at_or_below) / double(total));
    } else {
        const double mean = double(n) * (n + 1) / 4.0;
        double variance = double(n) * (n + 1) * (2 * n + 1) / 24.0;
        for (int t : tie_sizes) variance -= (double(t) * t * t - t) / 48.0;
        if (variance <= 0.0)
            throw undefined_test_error("wilcoxon: zero variance under the null");
        const double z = (w - mean + 0.5) / std::sqrt(variance);
        result.p_value = std::min(1.0, 2.0 * detail::normal_cdf(z));
    }
    return result;
}

enum class MetricOrientation : std::uint8_t { lower_is_better, higher_is_better };

inline double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

struct ComparisonCell {
    double p_value = 1.0;
    bool defeated = false; // p < 0.05 and the baseline median is better
    bool undefined = false;
    WilcoxonMethod method = WilcoxonMethod::exact;
    int n_effective = 0;
};

struct AlgorithmComparison {
    std::string algorithm;
    ComparisonCell cell;
};

// Pairwise baseline-vs-others signed-rank comparison for one metric. Runs
// must be paired (same per-run seeds across algorithms) and equal in count.
inline std::vector<AlgorithmComparison>
compare_algorithms(const std::vector<std::pair<std::string, std::vector<double>>>& runs,
                   const std::string& baseline, MetricOrientation orientation) {
    if (runs.size() < 2)
        throw degenerate_input_error("compare_algorithms: need at least 2 algorithms");
    const std::vector<double>* base = nullptr;
    for (const auto& [name, values] : runs)
        if (name == baseline) base = &values;
    if (!base) throw degenerate_input_error("compare_algorithms: baseline '" + baseline +
                                            "' not among the algorithms");
    for (const auto& [name, values] : runs)
        if (values.size() != base->size())
            throw degenerate_input_error("compare_algorithms: unequal run counts for '" + name +
                                         "'");
    const double base_median = median(*base);
    std::vector<AlgorithmComparison> table;
    for (const auto& [name, values] : runs) {
        if (name == baseline) continue;
        AlgorithmComparison row;
        row.algorithm = name;
        try {
            const TestResult t = wilcoxon_signed_rank(*base, values);
            row.cell.p_value = t.p_value;
            row.cell.method = t.method;
            row.cell.n_effective = t.n_effective;
            const double other_median = median(values);
            const bool baseline_better = orientation == MetricOrientation::lower_is_better
                                             ? base_median < other_median
                                             : base_median > other_median;
            row.cell.defeated = t.p_value < 0.05 && baseline_better;
        } catch (const undefined_test_error&) {
            row.cell.undefined = true;
            row.cell.p_value = std::numeric_limits<double>::quiet_NaN();
        }
        table.push_back(std::move(row));
    }
    return table;
}

} // namespace iecc
