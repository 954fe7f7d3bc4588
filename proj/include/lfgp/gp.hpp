#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "lfgp/estimators.hpp"
#include "lfgp/manifold.hpp"
#include "lfgp/rbf.hpp"

namespace lfgp {

/// Symmetric kernel Gram matrix with the jitter already folded into the
/// diagonal.
struct KernelMatrix {
    Eigen::MatrixXd entries; // m x m, includes jitter * I
    double jitter = 0.0;

    Eigen::Index order() const { return entries.rows(); }
};

/// Builds [K]_{s,t} = k(z_s, z_t) + jitter * 1{s==t}. Symmetric by
/// construction.
KernelMatrix kernel_matrix(const Eigen::MatrixXd& Z, const RbfHyperparams& params, double jitter);

/// Cholesky factor of K; throws IllConditionedKernelError when the matrix is
/// not numerically positive definite.
Eigen::LLT<Eigen::MatrixXd> cholesky(const KernelMatrix& K);

/// -1/2 (yhat^T K^{-1} yhat + log|K| + m log 2pi), evaluated through the
/// Cholesky factor; never forms an explicit inverse.
double log_marginal_likelihood(const Eigen::VectorXd& yhat, const KernelMatrix& K);
double log_marginal_likelihood(const Eigen::VectorXd& yhat, const KernelMatrix& K,
                               const Eigen::LLT<Eigen::MatrixXd>& llt);

/// Log marginal likelihood together with its gradient in log-parameter space
/// u = (log C, log l_1, ..., log l_d). The kernel carries jitter
/// jitter_factor * C + jitter_abs on the diagonal; the d/dlogC entry accounts
/// for the part that scales with C.
struct LmlValueGrad {
    double value;
    Eigen::VectorXd grad; // d+1 entries
};
LmlValueGrad lml_value_grad(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& Z,
                            const RbfHyperparams& params, double jitter_factor,
                            double jitter_abs = 0.0);

struct OptimizeOptions {
    int restarts = 4;            // first restart starts exactly at init
    std::uint64_t seed = 0;      // perturbation stream
    int max_iters = 200;         // L-BFGS iteration cap per restart
    double jitter_factor = 1e-8; // relative to C; escalates x10 up to 1e-2
    double noise_floor = 0.0;    // absolute diagonal term (estimator variance scale)
};

/// Multi-start quasi-Newton ascent of the log marginal likelihood in log
/// parameter space. Never returns parameters whose objective is below the
/// value at init. Requires m >= 2.
RbfHyperparams optimize_hyperparams(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& Z,
                                    const RbfHyperparams& init, const OptimizeOptions& options = {});

/// Scale-aware starting point: C = var(yhat), l_j = std of column j of Z,
/// with positive fallbacks for degenerate inputs.
RbfHyperparams default_hyperparams(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& Z);

struct PosteriorPrediction {
    double mean = 0.0;
    double variance = 0.0; // clamped to >= 0
};

/// Record of a transductive joint embedding: original coordinates and where
/// each row landed. Prediction inputs must match one of the source rows.
struct EmbeddingTable {
    EmbeddingConfig config;
    Eigen::MatrixXd source_points;   // (n + n*) x d, original space
    Eigen::MatrixXd embedded_points; // (n + n*) x target_dim

    /// Row index of x within source_points, or -1.
    Eigen::Index find(const Eigen::VectorXd& x) const;
};

/// Everything prediction needs: optimized hyperparameters, centroids,
/// pseudo-observations, and the cached Cholesky factor. Immutable once built
/// and safe to share across threads.
class LfgpModel {
public:
    /// Factors K(Z) + jitter I and caches alpha = K^{-1} yhat. Throws
    /// IllConditionedKernelError if the factorization fails at this jitter.
    static LfgpModel build(RbfHyperparams hyperparams, Eigen::MatrixXd centroids,
                           Eigen::VectorXd pseudo_observations, double jitter,
                           StatisticKind statistic,
                           std::optional<EmbeddingTable> embedding = std::nullopt);

    const RbfHyperparams& hyperparams() const { return hyperparams_; }
    const Eigen::MatrixXd& centroids() const { return centroids_; }
    const Eigen::VectorXd& pseudo_observations() const { return pseudo_observations_; }
    double jitter() const { return jitter_; }
    const StatisticKind& statistic() const { return statistic_; }
    const std::optional<EmbeddingTable>& embedding() const { return embedding_; }
    const Eigen::MatrixXd& chol_lower() const { return chol_lower_; }
    const Eigen::VectorXd& alpha_vec() const { return alpha_; }
    Eigen::Index cluster_count() const { return pseudo_observations_.size(); }
    /// Dimension of the space the GP itself lives in (post-embedding).
    Eigen::Index gp_dim() const { return centroids_.cols(); }

private:
    LfgpModel(RbfHyperparams h, Eigen::MatrixXd z, Eigen::VectorXd yhat, double jitter,
              StatisticKind statistic, std::optional<EmbeddingTable> embedding)
        : hyperparams_(std::move(h)), centroids_(std::move(z)),
          pseudo_observations_(std::move(yhat)), jitter_(jitter), statistic_(statistic),
          embedding_(std::move(embedding)) {}

    RbfHyperparams hyperparams_;
    Eigen::MatrixXd centroids_;
    Eigen::VectorXd pseudo_observations_;
    double jitter_;
    StatisticKind statistic_;
    std::optional<EmbeddingTable> embedding_;
    Eigen::MatrixXd chol_lower_;
    Eigen::VectorXd alpha_;
};

/// Posterior mean and variance at one point in the GP's own input space
/// (embedding, when any, has already been applied by the caller).
PosteriorPrediction posterior_predict(const Eigen::VectorXd& x_star, const LfgpModel& model);

/// Factor K(Z, params) with jitter = factor * C + jitter_abs, escalating the
/// factor x10 up to max_factor before giving up with
/// IllConditionedKernelError.
struct FactoredKernel {
    Eigen::LLT<Eigen::MatrixXd> llt;
    double jitter;
    double jitter_factor;
};
FactoredKernel factor_kernel_escalating(const Eigen::MatrixXd& Z, const RbfHyperparams& params,
                                        double jitter_abs = 0.0, double factor0 = 1e-8,
                                        double max_factor = 1e-2);

} // namespace lfgp
