#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lfgp/clustering.hpp"
#include "lfgp/dataset.hpp"

namespace lfgp {

/// Which per-cluster statistic the model represents.
class StatisticKind {
public:
    enum class Tag { Mean, Median, Variance, Skew, Percentile };

    static StatisticKind mean() { return StatisticKind(Tag::Mean, 0.0); }
    static StatisticKind median() { return StatisticKind(Tag::Median, 0.0); }
    static StatisticKind variance() { return StatisticKind(Tag::Variance, 0.0); }
    static StatisticKind skew() { return StatisticKind(Tag::Skew, 0.0); }
    static StatisticKind percentile(double q); // q strictly inside (0, 1)

    Tag tag() const { return tag_; }
    double q() const { return q_; }

    /// Fewest observations the statistic is defined for.
    int min_points() const;

    std::string name() const;
    /// Accepts "mean", "median", "variance", "skew", "percentile:<q>".
    static StatisticKind parse(const std::string& text);

    bool operator==(const StatisticKind& other) const {
        return tag_ == other.tag_ && q_ == other.q_;
    }

private:
    StatisticKind(Tag tag, double q) : tag_(tag), q_(q) {}
    Tag tag_;
    double q_;
};

/// Per-cluster estimates with their diagnostic variances; the Gaussian
/// pseudo-observations the GP is trained on.
struct ClusterSummary {
    Eigen::VectorXd estimates; // yhat, one per cluster
    Eigen::VectorXd variances; // sigma-hat^2, diagnostic only
    std::vector<int> sizes;
};

/// Plug-in estimate of the statistic on a sample. Mean/median/percentile
/// need 1 point, variance 2, skew 3; otherwise InsufficientDataError.
/// Percentile uses linear interpolation between order statistics at rank
/// q(n-1)+1; skew is the adjusted Fisher-Pearson form.
double estimate_statistic(std::span<const double> values, const StatisticKind& kind);

/// Diagnostic estimator variance: s^2/n analytically for the mean, seeded
/// nonparametric bootstrap for everything else.
double estimate_variance(std::span<const double> values, const StatisticKind& kind,
                         int bootstrap_reps, std::uint64_t seed);

/// Applies both estimators per cluster, in cluster-id order.
ClusterSummary summarize_clusters(const Dataset& data, const Clustering& clustering,
                                  const StatisticKind& kind, std::uint64_t seed,
                                  int bootstrap_reps = 200);

} // namespace lfgp
