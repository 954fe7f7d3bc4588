#include "lfgp/clustering.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "lfgp/rng.hpp"

namespace lfgp {

ClusterMetric ClusterMetric::rescaled_rbf(Eigen::VectorXd length_scales) {
    ClusterMetric m;
    m.kind = Kind::RescaledRbf;
    m.length_scales = std::move(length_scales);
    return m;
}

ClusterMetric ClusterMetric::euclidean() {
    ClusterMetric m;
    m.kind = Kind::EuclideanBaseline;
    return m;
}

void ClusterMetric::validate(Eigen::Index dim) const {
    if (kind == Kind::RescaledRbf) {
        if (length_scales.size() != dim)
            throw std::invalid_argument("ClusterMetric: length scale dimension mismatch");
        for (Eigen::Index j = 0; j < dim; ++j)
            if (!(length_scales[j] > 0.0) || !std::isfinite(length_scales[j]))
                throw std::invalid_argument("ClusterMetric: length scales must be positive");
    }
}

namespace {

// Rescale rows by 1/l_j for RescaledRbf; identity copy for the baseline.
Eigen::MatrixXd to_metric_space(const Eigen::MatrixXd& X, const ClusterMetric& metric) {
    if (metric.kind == ClusterMetric::Kind::RescaledRbf)
        return X * metric.length_scales.cwiseInverse().asDiagonal();
    return X;
}

double sqdist_row(const Eigen::MatrixXd& X, Eigen::Index i, const Eigen::RowVectorXd& c) {
    return (X.row(i) - c).squaredNorm();
}

// 2-means working on a row-index subset of Xs (already in metric space).
// Identical logic to the public two_means_split but without re-copying rows.
TwoMeansSplit two_means_on_indices(const Eigen::MatrixXd& Xs, const std::vector<int>& idx,
                                   std::uint64_t /*seed*/) {
    const Eigen::Index d = Xs.cols();
    const int n = static_cast<int>(idx.size());
    if (n < 2) throw std::invalid_argument("two_means_split: need at least 2 points");

    // Deterministic seeding: the pair farthest apart along the top principal
    // direction of the subset.
    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
    for (int i : idx) mean += Xs.row(i);
    mean /= static_cast<double>(n);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (int i : idx) {
        const Eigen::RowVectorXd r = Xs.row(i) - mean;
        cov.noalias() += r.transpose() * r;
    }
    cov /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::VectorXd dir = es.eigenvectors().col(d - 1);

    int lo = 0, hi = 0;
    double plo = Xs.row(idx[0]) * dir, phi = plo;
    for (int t = 1; t < n; ++t) {
        const double p = Xs.row(idx[t]) * dir;
        if (p < plo) { plo = p; lo = t; }
        if (p > phi) { phi = p; hi = t; }
    }
    if (lo == hi) hi = (lo + 1) % n; // fully degenerate subset

    Eigen::MatrixXd centroids(2, d);
    centroids.row(0) = Xs.row(idx[lo]);
    centroids.row(1) = Xs.row(idx[hi]);

    std::vector<int> assign(n, 0);
    TwoMeansSplit out;
    constexpr int kMaxIters = 100;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        bool changed = false;
        int count0 = 0;
        for (int t = 0; t < n; ++t) {
            const double d0 = sqdist_row(Xs, idx[t], centroids.row(0));
            const double d1 = sqdist_row(Xs, idx[t], centroids.row(1));
            const int a = d1 < d0 ? 1 : 0; // ties stay with side 0
            if (a != assign[t]) changed = true;
            assign[t] = a;
            count0 += a == 0 ? 1 : 0;
        }
        // Guard: an empty side gets the point farthest from the other centroid.
        if (count0 == 0 || count0 == n) {
            const int full = count0 == 0 ? 1 : 0;
            int far_t = 0;
            double far_d = -1.0;
            for (int t = 0; t < n; ++t) {
                const double dd = sqdist_row(Xs, idx[t], centroids.row(full));
                if (dd > far_d) { far_d = dd; far_t = t; }
            }
            assign[far_t] = 1 - full;
            count0 += full == 0 ? -1 : 1;
            changed = true;
        }

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(2, d);
        for (int t = 0; t < n; ++t) sums.row(assign[t]) += Xs.row(idx[t]);
        centroids.row(0) = sums.row(0) / static_cast<double>(count0);
        centroids.row(1) = sums.row(1) / static_cast<double>(n - count0);

        // Partition objective with mean centroids; non-increasing across
        // Lloyd iterations.
        double objective = 0.0;
        for (int t = 0; t < n; ++t) objective += sqdist_row(Xs, idx[t], centroids.row(assign[t]));
        out.objective_trace.push_back(objective);
        if (!changed) break;
    }

    for (int t = 0; t < n; ++t) (assign[t] == 0 ? out.left : out.right).push_back(t);
    out.centroids = std::move(centroids);
    return out;
}

struct RecursiveState {
    const Eigen::MatrixXd& X;       // original feature space
    const Eigen::MatrixXd& Xs;      // metric space
    int n0;
    std::uint64_t seed;
    std::uint64_t node_counter = 0;
    std::vector<int> assignments;
    std::vector<Eigen::RowVectorXd> centroids;
    std::vector<int> sizes;

    void emit_cluster(const std::vector<int>& members) {
        const int id = static_cast<int>(sizes.size());
        Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(X.cols());
        for (int i : members) {
            assignments[static_cast<std::size_t>(i)] = id;
            c += X.row(i);
        }
        c /= static_cast<double>(members.size());
        centroids.push_back(std::move(c));
        sizes.push_back(static_cast<int>(members.size()));
    }

    void run(std::vector<int>& members) {
        const std::uint64_t node = node_counter++;
        if (2LL * n0 > static_cast<long long>(members.size())) {
            emit_cluster(members);
            return;
        }
        TwoMeansSplit split = two_means_on_indices(Xs, members, Rng(seed).stream(node).next_u64());
        std::vector<int> left, right;
        if (static_cast<int>(std::min(split.left.size(), split.right.size())) < n0) {
            auto [l, r] = even_random_split(static_cast<Eigen::Index>(members.size()),
                                            Rng(seed).stream(node).next_u64());
            left = std::move(l);
            right = std::move(r);
        } else {
            left = std::move(split.left);
            right = std::move(split.right);
        }
        for (int& t : left) t = members[static_cast<std::size_t>(t)];
        for (int& t : right) t = members[static_cast<std::size_t>(t)];
        members.clear();
        members.shrink_to_fit();
        run(left);
        run(right);
    }
};

} // namespace

TwoMeansSplit two_means_split(const Eigen::MatrixXd& X, const ClusterMetric& metric,
                              std::uint64_t seed) {
    metric.validate(X.cols());
    const Eigen::MatrixXd Xs = to_metric_space(X, metric);
    std::vector<int> idx(static_cast<std::size_t>(X.rows()));
    std::iota(idx.begin(), idx.end(), 0);
    return two_means_on_indices(Xs, idx, seed);
}

std::pair<std::vector<int>, std::vector<int>> even_random_split(Eigen::Index count,
                                                                std::uint64_t seed) {
    if (count < 2) throw std::invalid_argument("even_random_split: need at least 2 points");
    std::vector<int> perm(static_cast<std::size_t>(count));
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    rng.shuffle(perm);
    const std::size_t half = perm.size() / 2;
    std::vector<int> left(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<int> right(perm.begin() + static_cast<std::ptrdiff_t>(half), perm.end());
    return {std::move(left), std::move(right)};
}

Clustering recursive_cluster(const Eigen::MatrixXd& X, int n0, const ClusterMetric& metric,
                             std::uint64_t seed) {
    if (X.rows() < 1) throw std::invalid_argument("recursive_cluster: empty input");
    if (n0 < 2) throw std::invalid_argument("recursive_cluster: n0 must be at least 2");
    metric.validate(X.cols());

    const Eigen::MatrixXd Xs = to_metric_space(X, metric);
    RecursiveState state{X, Xs, n0, seed};
    state.assignments.assign(static_cast<std::size_t>(X.rows()), -1);
    std::vector<int> all(static_cast<std::size_t>(X.rows()));
    std::iota(all.begin(), all.end(), 0);
    state.run(all);

    Clustering out;
    out.assignments = std::move(state.assignments);
    out.sizes = std::move(state.sizes);
    out.centroids.resize(static_cast<Eigen::Index>(out.sizes.size()), X.cols());
    for (std::size_t h = 0; h < out.sizes.size(); ++h)
        out.centroids.row(static_cast<Eigen::Index>(h)) = state.centroids[h];
    return out;
}

double clustering_objective(const Clustering& clustering, const Eigen::MatrixXd& X,
                            const RbfHyperparams& params) {
    params.validate();
    if (static_cast<Eigen::Index>(clustering.assignments.size()) != X.rows() ||
        clustering.centroids.cols() != X.cols() || params.dim() != X.cols())
        throw std::invalid_argument("clustering_objective: dimension mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int h = clustering.assignments[static_cast<std::size_t>(i)];
        const double a = rbf_scaled_sqdist(X.row(i).transpose(),
                                           clustering.centroids.row(h).transpose(),
                                           params.length_scales);
        total += std::fabs(1.0 - std::exp(-0.5 * a));
    }
    return total;
}

double kmeans_objective(const Clustering& clustering, const Eigen::MatrixXd& X,
                        const ClusterMetric& metric) {
    metric.validate(X.cols());
    if (static_cast<Eigen::Index>(clustering.assignments.size()) != X.rows() ||
        clustering.centroids.cols() != X.cols())
        throw std::invalid_argument("kmeans_objective: dimension mismatch");
    double total = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const int h = clustering.assignments[static_cast<std::size_t>(i)];
        if (metric.kind == ClusterMetric::Kind::RescaledRbf) {
            total += rbf_scaled_sqdist(X.row(i).transpose(),
                                       clustering.centroids.row(h).transpose(),
                                       metric.length_scales);
        } else {
            total += (X.row(i) - clustering.centroids.row(h)).squaredNorm();
        }
    }
    return total;
}

} // namespace lfgp
