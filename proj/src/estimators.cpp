#include "lfgp/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lfgp/errors.hpp"
#include "lfgp/rng.hpp"

namespace lfgp {

StatisticKind StatisticKind::percentile(double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw std::invalid_argument("StatisticKind: percentile q must lie strictly inside (0, 1)");
    return StatisticKind(Tag::Percentile, q);
}

int StatisticKind::min_points() const {
    switch (tag_) {
        case Tag::Variance: return 2;
        case Tag::Skew: return 3;
        default: return 1;
    }
}

std::string StatisticKind::name() const {
    switch (tag_) {
        case Tag::Mean: return "mean";
        case Tag::Median: return "median";
        case Tag::Variance: return "variance";
        case Tag::Skew: return "skew";
        case Tag::Percentile: {
            std::ostringstream os;
            os << "percentile:" << q_;
            return os.str();
        }
    }
    return "?";
}

StatisticKind StatisticKind::parse(const std::string& text) {
    if (text == "mean") return mean();
    if (text == "median") return median();
    if (text == "variance") return variance();
    if (text == "skew") return skew();
    if (text.rfind("percentile:", 0) == 0) {
        const double q = std::strtod(text.c_str() + 11, nullptr);
        return percentile(q);
    }
    throw std::invalid_argument("unknown statistic '" + text +
                                "' (expected mean|median|variance|skew|percentile:<q>)");
}

namespace {

double sorted_quantile(std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = h - static_cast<double>(lo);
    return v[lo] + frac * (v[lo + 1] - v[lo]);
}

double sample_mean(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_variance(std::span<const double> v) {
    const double mu = sample_mean(v);
    double s2 = 0.0;
    for (double x : v) s2 += (x - mu) * (x - mu);
    return s2 / static_cast<double>(v.size() - 1);
}

double sample_skew(std::span<const double> v) {
    const auto n = static_cast<double>(v.size());
    const double mu = sample_mean(v);
    double m2 = 0.0, m3 = 0.0;
    for (double x : v) {
        const double dx = x - mu;
        m2 += dx * dx;
        m3 += dx * dx * dx;
    }
    m2 /= n;
    m3 /= n;
    if (m2 <= 0.0) return 0.0; // constant sample carries no asymmetry
    const double g1 = m3 / std::pow(m2, 1.5);
    return g1 * std::sqrt(n * (n - 1.0)) / (n - 2.0);
}

} // namespace

double estimate_statistic(std::span<const double> values, const StatisticKind& kind) {
    if (static_cast<int>(values.size()) < kind.min_points()) {
        throw InsufficientDataError("estimate_statistic: " + kind.name() + " needs at least " +
                                    std::to_string(kind.min_points()) + " points, got " +
                                    std::to_string(values.size()));
    }
    switch (kind.tag()) {
        case StatisticKind::Tag::Mean:
            return sample_mean(values);
        case StatisticKind::Tag::Median: {
            std::vector<double> v(values.begin(), values.end());
            std::sort(v.begin(), v.end());
            const std::size_t n = v.size();
            return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
        }
        case StatisticKind::Tag::Variance:
            return sample_variance(values);
        case StatisticKind::Tag::Skew:
            return sample_skew(values);
        case StatisticKind::Tag::Percentile: {
            std::vector<double> v(values.begin(), values.end());
            return sorted_quantile(v, kind.q());
        }
    }
    throw std::logic_error("unreachable statistic kind");
}

double estimate_variance(std::span<const double> values, const StatisticKind& kind,
                         int bootstrap_reps, std::uint64_t seed) {
    if (static_cast<int>(values.size()) < kind.min_points()) {
        throw InsufficientDataError("estimate_variance: " + kind.name() + " needs at least " +
                                    std::to_string(kind.min_points()) + " points, got " +
                                    std::to_string(values.size()));
    }
    const std::size_t n = values.size();
    if (kind.tag() == StatisticKind::Tag::Mean) {
        if (n < 2) return 0.0;
        return sample_variance(values) / static_cast<double>(n);
    }
    if (bootstrap_reps < 1)
        throw std::invalid_argument("estimate_variance: bootstrap_reps must be >= 1");

    Rng rng(seed);
    std::vector<double> resample(n);
    std::vector<double> stats(static_cast<std::size_t>(bootstrap_reps));
    for (int r = 0; r < bootstrap_reps; ++r) {
        for (std::size_t i = 0; i < n; ++i)
            resample[i] = values[static_cast<std::size_t>(rng.uniform_int(n))];
        stats[static_cast<std::size_t>(r)] = estimate_statistic(resample, kind);
    }
    if (bootstrap_reps < 2) return 0.0;
    return sample_variance(stats);
}

ClusterSummary summarize_clusters(const Dataset& data, const Clustering& clustering,
                                  const StatisticKind& kind, std::uint64_t seed,
                                  int bootstrap_reps) {
    data.validate();
    if (static_cast<Eigen::Index>(clustering.assignments.size()) != data.size())
        throw std::invalid_argument("summarize_clusters: clustering does not match dataset");

    const int m = clustering.cluster_count();
    std::vector<std::vector<double>> groups(static_cast<std::size_t>(m));
    for (int h = 0; h < m; ++h)
        groups[static_cast<std::size_t>(h)].reserve(static_cast<std::size_t>(clustering.sizes[static_cast<std::size_t>(h)]));
    for (Eigen::Index i = 0; i < data.size(); ++i)
        groups[static_cast<std::size_t>(clustering.assignments[static_cast<std::size_t>(i)])].push_back(data.y[i]);

    ClusterSummary summary;
    summary.estimates.resize(m);
    summary.variances.resize(m);
    summary.sizes = clustering.sizes;
    const Rng root(seed);
    for (int h = 0; h < m; ++h) {
        const auto& vals = groups[static_cast<std::size_t>(h)];
        summary.estimates[h] = estimate_statistic(vals, kind);
        summary.variances[h] = estimate_variance(vals, kind, bootstrap_reps,
                                                 root.stream(static_cast<std::uint64_t>(h)).next_u64());
    }
    return summary;
}

} // namespace lfgp
