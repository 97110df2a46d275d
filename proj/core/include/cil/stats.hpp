#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace cil {

/// A nonempty list of finite reals, optionally with an integer count per value.
class Sample {
  public:
    explicit Sample(std::vector<double> values);
    Sample(std::vector<double> values, std::vector<std::uint64_t> counts);

    /// Values with counts expanded, in input order.
    std::span<const double> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }

    double mean() const;
    /// Unbiased (n - 1) variance; 0 for a single value.
    double variance() const;
    double sd() const;

  private:
    std::vector<double> values_;
};

/// Result of a hypothesis test.
struct TestReport {
    std::string method;
    double statistic = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    std::string note;
};

std::string to_json(const TestReport& r);

/// P[K > x] for the Kolmogorov distribution.
double kolmogorov_sf(double x);

/// One-sample Kolmogorov-Smirnov test against N(mean, sd^2), asymptotic p-value.
TestReport ks_normal(const Sample& s, double mean, double sd);

/// Type-7 (linear interpolation) sample quantile.
double quantile(std::span<const double> values, double p);

/// Percentile bootstrap over resampled index sets. `statistic` receives the
/// indices of one resample (with repetition) into a population of size n.
std::pair<double, double> bootstrap_indices(std::size_t n,
                                            const std::function<double(std::span<const std::size_t>)>& statistic,
                                            double level, int resamples, std::uint64_t seed);

/// Percentile bootstrap interval for a statistic of the sample.
std::pair<double, double> bootstrap_ci(const Sample& s,
                                       const std::function<double(std::span<const double>)>& statistic,
                                       double level, int resamples, std::uint64_t seed);

struct SlopeFit {
    double slope = 0.0;
    double std_error = 0.0;
    double intercept = 0.0;
};

/// Least-squares slope of log(value) against log(t).
SlopeFit loglog_slope(std::span<const std::pair<double, double>> points);

/// Least-squares slope of log(value) against t.
SlopeFit loglinear_slope(std::span<const std::pair<double, double>> points);

struct IndependenceReport {
    TestReport test;
    /// Correlation between increment j and increment j + 1.
    std::vector<double> rho;
};

/// `values[rep]` holds i at a_0 t, a_1 t, ..., a_k t. Correlates successive
/// increments across replications. nullopt when k = 1.
std::optional<IndependenceReport> increment_independence(const std::vector<std::vector<double>>& values);

double pearson(std::span<const double> a, std::span<const double> b);

/// Exact binomial (Clopper-Pearson) interval.
std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t n, double level = 0.95);

double normal_cdf(double z);

/// One point of an estimated series.
struct SeriesPoint {
    double t = 0.0;
    double estimate = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n = 0;
};

using Series = std::vector<SeriesPoint>;

/// Writes t,estimate,ci_low,ci_high,n.
void write_series_csv(std::ostream& out, const Series& series);

/// Whether two closed intervals intersect.
inline bool overlaps(std::pair<double, double> a, std::pair<double, double> b) {
    return a.first <= b.second && b.first <= a.second;
}

} // namespace cil
