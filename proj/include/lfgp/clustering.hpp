#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "lfgp/rbf.hpp"

namespace lfgp {

/// Distance space the clustering operates in. RescaledRbf divides every
/// coordinate by its length scale (the metric induced by the RBF exponent);
/// EuclideanBaseline is the raw squared Euclidean distance of the baseline
/// comparison.
struct ClusterMetric {
    enum class Kind { RescaledRbf, EuclideanBaseline };

    Kind kind = Kind::EuclideanBaseline;
    Eigen::VectorXd length_scales; // used by RescaledRbf only

    static ClusterMetric rescaled_rbf(Eigen::VectorXd length_scales);
    static ClusterMetric euclidean();

    void validate(Eigen::Index dim) const;
};

/// Partition of n points into m clusters plus per-cluster centroids (stored
/// in original feature units) and sizes. Cluster ids are 0-based and dense.
struct Clustering {
    std::vector<int> assignments;  // n entries in [0, m)
    Eigen::MatrixXd centroids;     // m x d
    std::vector<int> sizes;        // m entries, all positive

    int cluster_count() const { return static_cast<int>(sizes.size()); }
};

/// Result of one 2-means run: member indices per side (positions into the
/// subset handed in), the two centroids in the metric's rescaled space, and
/// the within-split objective after every Lloyd iteration.
struct TwoMeansSplit {
    std::vector<int> left;
    std::vector<int> right;
    Eigen::MatrixXd centroids;            // 2 x d, rescaled space
    std::vector<double> objective_trace;  // monotone non-increasing
};

/// Size-constrained recursive bisection: splits with 2-means while both
/// halves can keep at least n0 members, falling back to an even random split
/// when 2-means violates the minimum, and stops once 2*n0 exceeds the subset.
/// Every leaf therefore has size in [n0, 2*n0 - 1] whenever n >= n0.
/// Deterministic for fixed (X, n0, metric, seed).
Clustering recursive_cluster(const Eigen::MatrixXd& X, int n0, const ClusterMetric& metric,
                             std::uint64_t seed);

/// Lloyd's iteration with k = 2 in the metric's rescaled space until the
/// assignment reaches a fixpoint (cap 100 iterations). Initial centroids are
/// the two subset members farthest apart along the top principal direction,
/// which makes the split deterministic. Both sides are always non-empty.
TwoMeansSplit two_means_split(const Eigen::MatrixXd& X, const ClusterMetric& metric,
                              std::uint64_t seed);

/// Seeded permutation split into halves whose sizes differ by at most one.
std::pair<std::vector<int>, std::vector<int>> even_random_split(Eigen::Index count,
                                                                std::uint64_t seed);

/// Kernel-distance compactness sum |1 - k(x_i, z_h)/k(z_h, z_h)|
/// = sum |1 - exp(-A(x_i, z_h)/2)|; the amplitude cancels.
double clustering_objective(const Clustering& clustering, const Eigen::MatrixXd& X,
                            const RbfHyperparams& params);

/// Linear k-means objective: sum of A(x_i, z_h) under RescaledRbf, raw
/// squared Euclidean distances under EuclideanBaseline.
double kmeans_objective(const Clustering& clustering, const Eigen::MatrixXd& X,
                        const ClusterMetric& metric);

} // namespace lfgp
