#include "lfgp/manifold.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <vector>

#include "lfgp/errors.hpp"
#include "lfgp/parallel.hpp"
#include "lfgp/rng.hpp"

namespace lfgp {

void EmbeddingConfig::validate(Eigen::Index input_dim) const {
    if (!active()) return;
    if (k_neighbors < 1) throw std::invalid_argument("EmbeddingConfig: k_neighbors must be positive");
    if (target_dim < 1 || target_dim > input_dim)
        throw std::invalid_argument("EmbeddingConfig: target_dim must lie in [1, d]");
    if (method == Method::Lle && k_neighbors < target_dim + 1)
        throw std::invalid_argument("EmbeddingConfig: LLE needs k_neighbors >= target_dim + 1");
}

std::string EmbeddingConfig::method_name() const {
    switch (method) {
        case Method::None: return "none";
        case Method::Lle: return "lle";
        case Method::Isomap: return "isomap";
    }
    return "?";
}

EmbeddingConfig::Method EmbeddingConfig::parse_method(const std::string& text) {
    if (text == "none") return Method::None;
    if (text == "lle") return Method::Lle;
    if (text == "isomap") return Method::Isomap;
    throw std::invalid_argument("unknown embedding method '" + text + "' (none|lle|isomap)");
}

namespace {

// Per-point k nearest neighbours (self excluded), sorted by distance then
// index. Brute force with a parallel outer loop; fine at the sizes we run.
struct KnnLists {
    std::vector<std::vector<int>> idx;
    std::vector<std::vector<double>> dist;
};

KnnLists knn_neighbors(const Eigen::MatrixXd& X, int k) {
    const auto n = static_cast<std::size_t>(X.rows());
    if (k < 1 || static_cast<std::size_t>(k) >= n)
        throw std::invalid_argument("knn: need 1 <= k < n");
    KnnLists out;
    out.idx.resize(n);
    out.dist.resize(n);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        std::vector<std::pair<double, int>> cand(n - 1);
        for (std::size_t i = lo; i < hi; ++i) {
            std::size_t w = 0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double d2 = (X.row(static_cast<Eigen::Index>(i)) -
                                   X.row(static_cast<Eigen::Index>(j))).squaredNorm();
                cand[w++] = {d2, static_cast<int>(j)};
            }
            std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
            out.idx[i].resize(static_cast<std::size_t>(k));
            out.dist[i].resize(static_cast<std::size_t>(k));
            for (int t = 0; t < k; ++t) {
                out.idx[i][static_cast<std::size_t>(t)] = cand[static_cast<std::size_t>(t)].second;
                out.dist[i][static_cast<std::size_t>(t)] = std::sqrt(cand[static_cast<std::size_t>(t)].first);
            }
        }
    });
    return out;
}

// Symmetrized k-NN graph in CSR form, edge weights Euclidean.
struct CsrGraph {
    std::vector<int> offsets;
    std::vector<int> targets;
    std::vector<float> weights;
    int nodes = 0;
};

CsrGraph symmetrize(const KnnLists& knn) {
    const int n = static_cast<int>(knn.idx.size());
    std::vector<std::vector<std::pair<int, float>>> adj(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        for (std::size_t t = 0; t < knn.idx[static_cast<std::size_t>(i)].size(); ++t) {
            const int j = knn.idx[static_cast<std::size_t>(i)][t];
            const auto w = static_cast<float>(knn.dist[static_cast<std::size_t>(i)][t]);
            adj[static_cast<std::size_t>(i)].emplace_back(j, w);
            adj[static_cast<std::size_t>(j)].emplace_back(i, w);
        }
    }
    CsrGraph g;
    g.nodes = n;
    g.offsets.resize(static_cast<std::size_t>(n) + 1, 0);
    for (int i = 0; i < n; ++i) {
        auto& a = adj[static_cast<std::size_t>(i)];
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end(),
                            [](const auto& p, const auto& q) { return p.first == q.first; }),
                a.end());
        g.offsets[static_cast<std::size_t>(i) + 1] =
            g.offsets[static_cast<std::size_t>(i)] + static_cast<int>(a.size());
    }
    g.targets.resize(static_cast<std::size_t>(g.offsets.back()));
    g.weights.resize(static_cast<std::size_t>(g.offsets.back()));
    for (int i = 0; i < n; ++i) {
        int at = g.offsets[static_cast<std::size_t>(i)];
        for (const auto& [j, w] : adj[static_cast<std::size_t>(i)]) {
            g.targets[static_cast<std::size_t>(at)] = j;
            g.weights[static_cast<std::size_t>(at)] = w;
            ++at;
        }
    }
    return g;
}

// Union-find over the symmetrized neighbor lists.
int component_count_from_neighbors(const std::vector<std::vector<int>>& idx) {
    const int n = static_cast<int>(idx.size());
    std::vector<int> parent(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) parent[static_cast<std::size_t>(i)] = i;
    std::function<int(int)> find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] =
                parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    };
    for (int i = 0; i < n; ++i)
        for (int j : idx[static_cast<std::size_t>(i)]) {
            const int a = find(i), b = find(j);
            if (a != b) parent[static_cast<std::size_t>(a)] = b;
        }
    int count = 0;
    for (int i = 0; i < n; ++i) count += find(i) == i ? 1 : 0;
    return count;
}

int component_count(const CsrGraph& g) {
    std::vector<int> comp(static_cast<std::size_t>(g.nodes), -1);
    int count = 0;
    std::vector<int> stack;
    for (int s = 0; s < g.nodes; ++s) {
        if (comp[static_cast<std::size_t>(s)] >= 0) continue;
        stack.push_back(s);
        comp[static_cast<std::size_t>(s)] = count;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int e = g.offsets[static_cast<std::size_t>(u)];
                 e < g.offsets[static_cast<std::size_t>(u) + 1]; ++e) {
                const int v = g.targets[static_cast<std::size_t>(e)];
                if (comp[static_cast<std::size_t>(v)] < 0) {
                    comp[static_cast<std::size_t>(v)] = count;
                    stack.push_back(v);
                }
            }
        }
        ++count;
    }
    return count;
}

// Single-source shortest paths; lazy-deletion binary heap over (dist, node)
// packed into one u64 so the heap stores 8-byte keys.
void dijkstra_row(const CsrGraph& g, int source, float* dist_row) {
    const int n = g.nodes;
    std::fill(dist_row, dist_row + n, std::numeric_limits<float>::infinity());
    auto pack = [](float d, int v) {
        std::uint64_t bits;
        const auto u32 = std::bit_cast<std::uint32_t>(d);
        bits = (static_cast<std::uint64_t>(u32) << 32) | static_cast<std::uint32_t>(v);
        return bits;
    };
    std::priority_queue<std::uint64_t, std::vector<std::uint64_t>, std::greater<>> heap;
    dist_row[source] = 0.0f;
    heap.push(pack(0.0f, source));
    while (!heap.empty()) {
        const std::uint64_t top = heap.top();
        heap.pop();
        const float du = std::bit_cast<float>(static_cast<std::uint32_t>(top >> 32));
        const int u = static_cast<int>(top & 0xffffffffu);
        if (du > dist_row[u]) continue;
        for (int e = g.offsets[static_cast<std::size_t>(u)];
             e < g.offsets[static_cast<std::size_t>(u) + 1]; ++e) {
            const int v = g.targets[static_cast<std::size_t>(e)];
            const float nd = du + g.weights[static_cast<std::size_t>(e)];
            if (nd < dist_row[v]) {
                dist_row[v] = nd;
                heap.push(pack(nd, v));
            }
        }
    }
}

void check_finite(const Eigen::MatrixXd& Y, const char* who) {
    if (!Y.allFinite()) throw EmbeddingFailureError(std::string(who) + ": non-finite coordinates");
}

// 1 - smallest principal cosine between the spans of two orthonormal blocks;
// ~0 once the iterated subspace has settled.
double subspace_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.transpose() * b);
    return 1.0 - svd.singularValues().minCoeff();
}

} // namespace

EmbeddedSpace isomap_embed(const Eigen::MatrixXd& X_all, const EmbeddingConfig& config) {
    config.validate(X_all.cols());
    const auto n = static_cast<std::size_t>(X_all.rows());
    if (n < 2) throw std::invalid_argument("isomap_embed: need at least 2 points");

    const KnnLists knn = knn_neighbors(X_all, config.k_neighbors);
    const CsrGraph graph = symmetrize(knn);
    if (const int comps = component_count(graph); comps > 1) {
        throw GraphConnectivityError("isomap_embed: k-NN graph has " + std::to_string(comps) +
                                         " connected components; increase k_neighbors",
                                     comps);
    }

    // Squared geodesic distances, float to keep n^2 storage reasonable.
    std::vector<float> d2(n * n);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        std::vector<float> row(n);
        for (std::size_t s = lo; s < hi; ++s) {
            dijkstra_row(graph, static_cast<int>(s), row.data());
            float* out = &d2[s * n];
            for (std::size_t t = 0; t < n; ++t) out[t] = row[t] * row[t];
        }
    });

    // Double-centered Gram matrix B = -1/2 J D2 J applied implicitly; top
    // eigenpairs via deterministic subspace iteration.
    const auto nn = static_cast<Eigen::Index>(n);
    auto apply_b = [&](const Eigen::MatrixXd& V) {
        Eigen::MatrixXd W = V.rowwise() - V.colwise().mean(); // J V
        Eigen::MatrixXd T(nn, V.cols());
        parallel_for(n, [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                const float* row = &d2[i * n];
                for (Eigen::Index c = 0; c < V.cols(); ++c) {
                    double acc = 0.0;
                    const double* w = W.col(c).data();
                    for (std::size_t t = 0; t < n; ++t) acc += static_cast<double>(row[t]) * w[t];
                    T(static_cast<Eigen::Index>(i), c) = acc;
                }
            }
        });
        T = T.rowwise() - T.colwise().mean(); // J (D2 J V)
        return Eigen::MatrixXd(-0.5 * T);
    };

    const Eigen::Index p = std::min<Eigen::Index>(nn, config.target_dim + 2);
    Eigen::MatrixXd V(nn, p);
    Rng rng(0x150a9u); // fixed basis seed: embeddings are deterministic
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index c = 0; c < p; ++c) V(i, c) = rng.normal();
    V = Eigen::HouseholderQR<Eigen::MatrixXd>(V).householderQ() * Eigen::MatrixXd::Identity(nn, p);

    constexpr int kMaxIters = 200;
    for (int it = 0; it < kMaxIters; ++it) {
        const Eigen::MatrixXd BV = apply_b(V);
        Eigen::MatrixXd V_new =
            Eigen::HouseholderQR<Eigen::MatrixXd>(BV).householderQ() * Eigen::MatrixXd::Identity(nn, p);
        const double gap = subspace_gap(V, V_new);
        V = std::move(V_new);
        if (it > 2 && gap < 1e-10) break;
    }
    // Final Rayleigh-Ritz rotation so columns are individual eigenvectors.
    Eigen::VectorXd eigvals;
    {
        Eigen::MatrixXd BV = apply_b(V);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V.transpose() * BV);
        Eigen::MatrixXd rot = es.eigenvectors();
        Eigen::VectorXd vals = es.eigenvalues();
        // ascending -> descending
        rot = rot.rowwise().reverse().eval();
        vals = vals.reverse().eval();
        V = (V * rot).eval();
        eigvals = vals;
    }

    EmbeddedSpace out;
    out.source_count = nn;
    out.points.resize(nn, config.target_dim);
    for (int c = 0; c < config.target_dim; ++c)
        out.points.col(c) = V.col(c) * std::sqrt(std::max(eigvals[c], 0.0));
    check_finite(out.points, "isomap_embed");
    return out;
}

LleWeights lle_barycentric_weights(const Eigen::MatrixXd& X_all, const EmbeddingConfig& config) {
    const auto n = static_cast<std::size_t>(X_all.rows());
    const int k = config.k_neighbors;
    if (n < static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("lle weights: need more points than neighbors");
    const KnnLists knn = knn_neighbors(X_all, k);

    // Barycentric reconstruction weights: solve (G + ridge I) w = 1 per point
    // with the local Gram matrix G of neighbor offsets, then normalize to
    // sum(w) = 1.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), k);
    parallel_for(n, [&](std::size_t lo, std::size_t hi) {
        Eigen::MatrixXd offsets(k, X_all.cols());
        for (std::size_t i = lo; i < hi; ++i) {
            for (int t = 0; t < k; ++t)
                offsets.row(t) = X_all.row(knn.idx[i][static_cast<std::size_t>(t)]) -
                                 X_all.row(static_cast<Eigen::Index>(i));
            Eigen::MatrixXd gram = offsets * offsets.transpose();
            // Ridge proportional to the full trace (the convention of the
            // reference implementations); scaling it down by k destabilizes
            // the embedding at large neighborhood sizes.
            const double ridge = 1e-3 * gram.trace() + 1e-12;
            gram.diagonal().array() += ridge;
            Eigen::VectorXd w = gram.ldlt().solve(Eigen::VectorXd::Ones(k));
            const double s = w.sum();
            if (std::fabs(s) < 1e-300 || !std::isfinite(s)) {
                w.setConstant(1.0 / static_cast<double>(k));
            } else {
                w /= s;
            }
            W.row(static_cast<Eigen::Index>(i)) = w.transpose();
        }
    });
    return {std::move(W), std::move(knn.idx)};
}

EmbeddedSpace lle_embed(const Eigen::MatrixXd& X_all, const EmbeddingConfig& config) {
    config.validate(X_all.cols());
    const auto n = static_cast<std::size_t>(X_all.rows());
    const int k = config.k_neighbors;
    if (n < static_cast<std::size_t>(k) + 1)
        throw std::invalid_argument("lle_embed: need more points than neighbors");

    LleWeights lw = lle_barycentric_weights(X_all, config);
    if (const int comps = component_count_from_neighbors(lw.neighbors); comps > 1)
        throw GraphConnectivityError("lle_embed: k-NN graph has " + std::to_string(comps) +
                                         " connected components; increase k_neighbors",
                                     comps);
    const Eigen::MatrixXd& W = lw.weights;

    // M = (I - W)^T (I - W), assembled as a sparse product.
    const auto nn = static_cast<Eigen::Index>(n);
    Eigen::SparseMatrix<double> IminusW(nn, nn);
    {
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(n * static_cast<std::size_t>(k + 1));
        for (Eigen::Index i = 0; i < nn; ++i) {
            trips.emplace_back(i, i, 1.0);
            for (int t = 0; t < k; ++t)
                trips.emplace_back(
                    i, lw.neighbors[static_cast<std::size_t>(i)][static_cast<std::size_t>(t)],
                    -W(i, t));
        }
        IminusW.setFromTriplets(trips.begin(), trips.end());
    }
    Eigen::SparseMatrix<double> M = (Eigen::SparseMatrix<double>(IminusW.transpose()) * IminusW).pruned();

    // Bottom non-constant eigenvectors by block inverse iteration: factor
    // M + sigma I once, iterate, and keep everything orthogonal to the
    // constant nullvector.
    double diag_mean = 0.0;
    for (Eigen::Index i = 0; i < nn; ++i) diag_mean += M.coeff(i, i);
    diag_mean /= static_cast<double>(nn);
    const double sigma = std::max(1e-12 * diag_mean, 1e-300);
    Eigen::SparseMatrix<double> shifted = M;
    for (Eigen::Index i = 0; i < nn; ++i) shifted.coeffRef(i, i) += sigma;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(shifted);
    if (solver.info() != Eigen::Success)
        throw EmbeddingFailureError("lle_embed: sparse factorization of (I-W)^T(I-W) failed");

    const Eigen::Index p = std::min<Eigen::Index>(nn - 1, config.target_dim + 2);
    Eigen::MatrixXd V(nn, p);
    Rng rng(0x11eu); // fixed basis seed
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index c = 0; c < p; ++c) V(i, c) = rng.normal();

    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(nn, 1.0 / std::sqrt(static_cast<double>(nn)));
    auto deflate = [&](Eigen::MatrixXd& B) {
        for (Eigen::Index c = 0; c < B.cols(); ++c) B.col(c) -= ones * (ones.dot(B.col(c)));
    };
    deflate(V);
    V = Eigen::HouseholderQR<Eigen::MatrixXd>(V).householderQ() * Eigen::MatrixXd::Identity(nn, p);

    constexpr int kMaxIters = 300;
    for (int it = 0; it < kMaxIters; ++it) {
        Eigen::MatrixXd Y = solver.solve(V);
        if (solver.info() != Eigen::Success)
            throw EmbeddingFailureError("lle_embed: inverse iteration solve failed");
        deflate(Y);
        Eigen::MatrixXd V_new =
            Eigen::HouseholderQR<Eigen::MatrixXd>(Y).householderQ() * Eigen::MatrixXd::Identity(nn, p);
        const double gap = subspace_gap(V, V_new);
        V = std::move(V_new);
        if (it > 3 && gap < 1e-10) break;
    }
    // Rayleigh-Ritz on the converged block, ascending eigenvalues.
    Eigen::MatrixXd MV = M.selfadjointView<Eigen::Lower>() * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(V.transpose() * MV);
    if (es.info() != Eigen::Success) throw EmbeddingFailureError("lle_embed: dense eigensolver failed");
    V = (V * es.eigenvectors()).eval();

    EmbeddedSpace out;
    out.source_count = nn;
    out.points.resize(nn, config.target_dim);
    const double scale = std::sqrt(static_cast<double>(nn)); // unit column variance
    for (int c = 0; c < config.target_dim; ++c) {
        Eigen::VectorXd v = V.col(c);
        v -= ones * ones.dot(v); // keep the zero-mean constraint exact
        out.points.col(c) = v.normalized() * scale;
    }
    check_finite(out.points, "lle_embed");
    return out;
}

} // namespace lfgp
