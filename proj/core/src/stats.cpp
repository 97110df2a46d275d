#include "cil/stats.hpp"

#include "cil/rng.hpp"
#include "json.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace cil {

Sample::Sample(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("sample must be nonempty");
    for (double v : values_) {
        if (!std::isfinite(v)) throw std::invalid_argument("sample values must be finite");
    }
}

Sample::Sample(std::vector<double> values, std::vector<std::uint64_t> counts) : values_{} {
    if (values.size() != counts.size()) throw std::invalid_argument("sample: one count per value required");
    for (std::size_t i = 0; i < values.size(); ++i) values_.insert(values_.end(), counts[i], values[i]);
    *this = Sample(std::move(values_));
}

double Sample::mean() const {
    return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(values_.size());
}

double Sample::variance() const {
    if (values_.size() < 2) return 0.0;
    const double m = mean();
    double ss = 0.0;
    for (double v : values_) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values_.size() - 1);
}

double Sample::sd() const { return std::sqrt(variance()); }

std::string to_json(const TestReport& r) {
    nlohmann::json j{{"method", r.method}, {"statistic", r.statistic}, {"p", r.p_value}, {"n", r.n}};
    if (!r.note.empty()) j["note"] = r.note;
    return j.dump();
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double kolmogorov_sf(double x) {
    if (x <= 0.0) return 1.0;
    constexpr int kTerms = 100;
    constexpr double kTol = 1e-10;
    if (x < 1.0) {
        // Small-x form: 1 - sqrt(2 pi)/x * sum exp(-(2k-1)^2 pi^2 / (8 x^2)).
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double sum = 0.0;
        for (int k = 1; k <= kTerms; ++k) {
            const double term = std::exp(-(2.0 * k - 1) * (2.0 * k - 1) * pi2 / (8.0 * x * x));
            sum += term;
            if (term < kTol) break;
        }
        return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= kTerms; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < kTol) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestReport ks_normal(const Sample& s, double mean, double sd) {
    if (!(sd > 0.0)) throw std::invalid_argument("ks_normal: sd must be positive");
    if (s.size() < 100) throw std::invalid_argument("ks_normal: need n >= 100");
    std::vector<double> v(s.values().begin(), s.values().end());
    std::sort(v.begin(), v.end());
    const double n = static_cast<double>(v.size());
    double d = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double f = normal_cdf((v[i] - mean) / sd);
        d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
    }
    return TestReport{"ks_normal", d, kolmogorov_sf(std::sqrt(n) * d), v.size(), {}};
}

double quantile(std::span<const double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of an empty set");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile level outside [0, 1]");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::pair<double, double> bootstrap_indices(std::size_t n,
                                            const std::function<double(std::span<const std::size_t>)>& statistic,
                                            double level, int resamples, std::uint64_t seed) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("bootstrap: level outside (0, 1)");
    if (resamples < 1000) throw std::invalid_argument("bootstrap: need at least 1000 resamples");
    if (n == 0) throw std::invalid_argument("bootstrap: empty population");
    std::vector<double> stats(static_cast<std::size_t>(resamples));
    std::vector<std::size_t> idx(n);
    for (int b = 0; b < resamples; ++b) {
        Stream rng(derive_key(seed, 0x424f4f54ULL, static_cast<std::uint64_t>(b)));
        for (auto& i : idx) i = rng.below(n);
        stats[static_cast<std::size_t>(b)] = statistic(idx);
    }
    const double alpha = 1.0 - level;
    return {quantile(stats, alpha / 2), quantile(stats, 1.0 - alpha / 2)};
}

std::pair<double, double> bootstrap_ci(const Sample& s,
                                       const std::function<double(std::span<const double>)>& statistic,
                                       double level, int resamples, std::uint64_t seed) {
    const auto values = s.values();
    std::vector<double> buf(values.size());
    return bootstrap_indices(
        values.size(),
        [&](std::span<const std::size_t> idx) {
            for (std::size_t i = 0; i < idx.size(); ++i) buf[i] = values[idx[i]];
            return statistic(buf);
        },
        level, resamples, seed);
}

namespace {

SlopeFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0)) throw std::invalid_argument("slope fit needs at least two distinct abscissae");
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        rss += r * r;
    }
    fit.std_error = x.size() > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
    return fit;
}

} // namespace

SlopeFit loglog_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw std::invalid_argument("loglog_slope: need at least 3 points");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& [t, v] : points) {
        if (!(t > 0.0) || !(v > 0.0)) throw std::invalid_argument("loglog_slope: coordinates must be positive");
        x.push_back(std::log(t));
        y.push_back(std::log(v));
    }
    return least_squares(x, y);
}

SlopeFit loglinear_slope(std::span<const std::pair<double, double>> points) {
    if (points.size() < 3) throw std::invalid_argument("loglinear_slope: need at least 3 points");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& [t, v] : points) {
        if (!(v > 0.0)) throw std::invalid_argument("loglinear_slope: values must be positive");
        x.push_back(t);
        y.push_back(std::log(v));
    }
    return least_squares(x, y);
}

double pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size() || a.size() < 2) throw std::invalid_argument("pearson: need paired samples, n >= 2");
    const double n = static_cast<double>(a.size());
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (!(saa > 0.0) || !(sbb > 0.0)) return 0.0;
    return sab / std::sqrt(saa * sbb);
}

std::optional<IndependenceReport> increment_independence(const std::vector<std::vector<double>>& values) {
    if (values.size() < 500) throw std::invalid_argument("increment_independence: need at least 500 replications");
    const std::size_t cols = values.front().size();
    if (cols < 2) throw std::invalid_argument("increment_independence: need a_0 and at least one more grid point");
    for (const auto& row : values) {
        if (row.size() != cols) throw std::invalid_argument("increment_independence: ragged input");
    }
    const std::size_t k = cols - 1;
    if (k < 2) return std::nullopt;

    std::vector<std::vector<double>> inc(k, std::vector<double>(values.size()));
    for (std::size_t r = 0; r < values.size(); ++r) {
        for (std::size_t j = 0; j < k; ++j) inc[j][r] = values[r][j + 1] - values[r][j];
    }
    IndependenceReport out;
    double max_abs = 0.0;
    for (std::size_t j = 0; j + 1 < k; ++j) {
        out.rho.push_back(pearson(inc[j], inc[j + 1]));
        max_abs = std::max(max_abs, std::abs(out.rho.back()));
    }
    // Under exchangeability the permutation law of rho has variance 1/(n-1);
    // a normal approximation with a Sidak correction covers the max over pairs.
    const double n = static_cast<double>(values.size());
    const double p_one = 2.0 * (1.0 - normal_cdf(max_abs * std::sqrt(n - 1.0)));
    const double pairs = static_cast<double>(out.rho.size());
    const double p = -std::expm1(pairs * std::log1p(-std::min(p_one, 1.0)));
    out.test = TestReport{"increment_independence", max_abs, std::clamp(p, 0.0, 1.0), values.size(),
                          "normal approximation to the permutation distribution"};
    return out;
}

std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t n, double level) {
    if (n == 0) throw std::invalid_argument("clopper_pearson: n must be positive");
    if (successes > n) throw std::invalid_argument("clopper_pearson: successes > n");
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("clopper_pearson: level outside (0, 1)");
    const double alpha = 1.0 - level;
    const double x = static_cast<double>(successes);
    const double m = static_cast<double>(n);
    const double lo = successes == 0 ? 0.0 : boost::math::ibeta_inv(x, m - x + 1.0, alpha / 2);
    const double hi = successes == n ? 1.0 : boost::math::ibeta_inv(x + 1.0, m - x, 1.0 - alpha / 2);
    return {lo, hi};
}

void write_series_csv(std::ostream& out, const Series& series) {
    out << "t,estimate,ci_low,ci_high,n\n";
    out.precision(17);
    for (const auto& p : series) {
        out << p.t << ',' << p.estimate << ',' << p.ci_low << ',' << p.ci_high << ',' << p.n << '\n';
    }
}

} // namespace cil
