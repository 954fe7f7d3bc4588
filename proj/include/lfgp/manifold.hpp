#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace lfgp {

/// Optional pre-embedding applied before clustering and GP training. The
/// embedding is transductive: train and prediction points are embedded
/// jointly and the mapping is recorded, there is no out-of-sample extension.
struct EmbeddingConfig {
    enum class Method { None, Lle, Isomap };

    Method method = Method::None;
    int k_neighbors = 10;
    int target_dim = 2;

    bool active() const { return method != Method::None; }
    void validate(Eigen::Index input_dim) const;

    std::string method_name() const;
    static Method parse_method(const std::string& text);
};

/// Joint embedding of every supplied point, rows aligned with the input.
struct EmbeddedSpace {
    Eigen::MatrixXd points; // n x target_dim
    Eigen::Index source_count = 0;
};

/// Classical MDS on the all-pairs geodesic (shortest-path) distances of the
/// symmetrized k-NN graph; keeps the top target_dim components.
/// Throws GraphConnectivityError when the graph splits.
EmbeddedSpace isomap_embed(const Eigen::MatrixXd& X_all, const EmbeddingConfig& config);

/// Standard locally linear embedding: barycentric reconstruction weights per
/// point, then the bottom non-constant eigenvectors of (I-W)^T (I-W), scaled
/// to zero column mean and unit column variance.
EmbeddedSpace lle_embed(const Eigen::MatrixXd& X_all, const EmbeddingConfig& config);

/// LLE reconstruction weights (n x k, aligned with each point's neighbor
/// list) and the neighbor indices they refer to. Every row sums to one.
struct LleWeights {
    Eigen::MatrixXd weights;             // n x k
    std::vector<std::vector<int>> neighbors; // n lists of k indices
};
LleWeights lle_barycentric_weights(const Eigen::MatrixXd& X_all, const EmbeddingConfig& config);

} // namespace lfgp
