#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lfgp/dataset.hpp"
#include "lfgp/estimators.hpp"
#include "lfgp/gp.hpp"
#include "lfgp/manifold.hpp"

namespace lfgp {

struct FitConfig {
    int n0 = 2;                  // minimum cluster size
    double epsilon = 1.0;        // convergence threshold in nats
    StatisticKind statistic = StatisticKind::mean();
    std::optional<RbfHyperparams> init_hyperparams;
    int max_outer_iters = 20;
    std::uint64_t seed = 0;
    bool euclidean_clustering = false; // baseline B instead of the rescaled metric
    EmbeddingConfig embedding;
    Eigen::MatrixXd embed_extra; // rows joint-embedded alongside X (prediction grid)
    int bootstrap_reps = 200;
    // Floor the kernel jitter at the mean estimator variance of the current
    // pseudo-observations; keeps the alternation at a fixpoint. Off = bare
    // 1e-8*C numerical jitter only.
    bool use_estimator_noise_floor = true;

    void validate() const;
};

struct FitReport {
    int repetition_count = 0;
    std::vector<double> objective_trace; // optimized log marginal per outer iteration
    double wall_time_s = 0.0;
    int cluster_count = 0;

    /// One CSV row: n,d,n0,epsilon,seed,m,repetition_count,wall_time_s,final_lml
    std::string csv_row(Eigen::Index n, Eigen::Index d, const FitConfig& config) const;
    static std::string csv_header();
};

struct FitResult {
    LfgpModel model;
    FitReport report;
};

/// Alternates size-constrained clustering and marginal-likelihood
/// maximization until the gain drops to epsilon (both likelihoods evaluated
/// on the current iteration's clustering) or the iteration cap is reached.
FitResult fit(const Dataset& data, const FitConfig& config);

/// Elementwise posterior prediction; maps inputs through the model's joint
/// embedding first when one is recorded, rejecting points that were not part
/// of it.
std::vector<PosteriorPrediction> predict_batch(const LfgpModel& model, const Eigen::MatrixXd& X_star);

} // namespace lfgp
