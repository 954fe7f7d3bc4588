#include "lfgp/trainer.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "lfgp/clustering.hpp"
#include "lfgp/errors.hpp"
#include "lfgp/rng.hpp"

namespace lfgp {

void FitConfig::validate() const {
    if (n0 < 2) throw std::invalid_argument("FitConfig: n0 must be at least 2");
    if (!(epsilon > 0.0)) throw std::invalid_argument("FitConfig: epsilon must be positive");
    if (max_outer_iters < 1) throw std::invalid_argument("FitConfig: max_outer_iters must be >= 1");
    if (bootstrap_reps < 1) throw std::invalid_argument("FitConfig: bootstrap_reps must be >= 1");
}

std::string FitReport::csv_header() {
    return "n,d,n0,epsilon,seed,m,repetition_count,wall_time_s,final_lml";
}

std::string FitReport::csv_row(Eigen::Index n, Eigen::Index d, const FitConfig& config) const {
    std::ostringstream os;
    os << n << ',' << d << ',' << config.n0 << ',' << format_double(config.epsilon) << ','
       << config.seed << ',' << cluster_count << ',' << repetition_count << ','
       << format_double(wall_time_s) << ','
       << format_double(objective_trace.empty() ? 0.0 : objective_trace.back());
    return os.str();
}

namespace {

// Dataset-level starting scales for the very first clustering pass, before
// any pseudo-observations exist.
RbfHyperparams dataset_level_init(const Dataset& data) {
    return default_hyperparams(data.y, data.X);
}

} // namespace

FitResult fit(const Dataset& data, const FitConfig& config) {
    const auto t0 = std::chrono::steady_clock::now();
    config.validate();
    data.validate();
    const Eigen::Index n = data.size();
    if (n < config.n0)
        throw InsufficientDataError("fit: dataset has " + std::to_string(n) +
                                    " points but n0 = " + std::to_string(config.n0));
    if (data.dim() < 1) throw std::invalid_argument("fit: need at least one feature dimension");

    // Optional transductive embedding of train plus prediction points.
    std::optional<EmbeddingTable> table;
    Eigen::MatrixXd Xw = data.X;
    if (config.embedding.active()) {
        if (config.embed_extra.size() > 0 && config.embed_extra.cols() != data.dim())
            throw std::invalid_argument("fit: embed_extra dimension mismatch");
        Eigen::MatrixXd X_all(n + config.embed_extra.rows(), data.dim());
        X_all.topRows(n) = data.X;
        if (config.embed_extra.rows() > 0) X_all.bottomRows(config.embed_extra.rows()) = config.embed_extra;
        const EmbeddedSpace emb = config.embedding.method == EmbeddingConfig::Method::Lle
                                      ? lle_embed(X_all, config.embedding)
                                      : isomap_embed(X_all, config.embedding);
        table = EmbeddingTable{config.embedding, std::move(X_all), emb.points};
        Xw = emb.points.topRows(n);
    }

    Dataset work;
    work.X = Xw;
    work.y = data.y;
    work.meta = data.meta;

    RbfHyperparams theta = config.init_hyperparams ? *config.init_hyperparams
                                                   : dataset_level_init(work);
    if (theta.dim() != work.dim())
        throw std::invalid_argument("fit: init hyperparameter dimension mismatch");

    const Rng root(config.seed);
    FitReport report;
    Clustering clustering;
    ClusterSummary summary;
    double final_jitter = 1e-8 * theta.amplitude;

    for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
        const RbfHyperparams theta_old = theta;

        const ClusterMetric metric = config.euclidean_clustering
                                         ? ClusterMetric::euclidean()
                                         : ClusterMetric::rescaled_rbf(theta.length_scales);
        clustering = recursive_cluster(work.X, config.n0, metric,
                                       root.stream(0x10000u + static_cast<std::uint64_t>(iter)).next_u64());
        summary = summarize_clusters(work, clustering, config.statistic,
                                     root.stream(0x20000u + static_cast<std::uint64_t>(iter)).next_u64(),
                                     config.bootstrap_reps);
        const Eigen::Index m = summary.estimates.size();

        // The diagonal gets the mean estimator variance on top of the
        // numerical jitter. With the bare 1e-8*C jitter the noiseless
        // likelihood re-purposes incidental centroid scatter in irrelevant
        // dimensions as a noise channel; those length scales then invert the
        // clustering metric and the alternation oscillates instead of
        // reaching a fixpoint.
        const double noise_floor =
            config.use_estimator_noise_floor ? std::max(0.0, summary.variances.mean()) : 0.0;

        if (m >= 2) {
            // Default optimizer start per spec: derive from the pseudo
            // observations and centroids when no explicit init was given.
            if (iter == 1 && !config.init_hyperparams) {
                theta = default_hyperparams(summary.estimates, clustering.centroids);
            }
            // Single warm-started ascent inside the alternation; global
            // multistart per outer iteration also works against the fixpoint.
            OptimizeOptions opts;
            opts.restarts = 1;
            opts.noise_floor = noise_floor;
            opts.seed = root.stream(0x30000u + static_cast<std::uint64_t>(iter)).next_u64();
            theta = optimize_hyperparams(summary.estimates, clustering.centroids, theta, opts);
        }

        // Both stopping-test likelihoods are evaluated on the current
        // clustering so their difference is meaningful.
        const FactoredKernel fk_new = factor_kernel_escalating(clustering.centroids, theta, noise_floor);
        KernelMatrix K_new = kernel_matrix(clustering.centroids, theta, fk_new.jitter);
        const double lml_new = log_marginal_likelihood(summary.estimates, K_new, fk_new.llt);
        final_jitter = fk_new.jitter;

        double lml_old = lml_new;
        if (m >= 2) {
            const FactoredKernel fk_old =
                factor_kernel_escalating(clustering.centroids, theta_old, noise_floor);
            const KernelMatrix K_old = kernel_matrix(clustering.centroids, theta_old, fk_old.jitter);
            lml_old = log_marginal_likelihood(summary.estimates, K_old, fk_old.llt);
        }

        report.objective_trace.push_back(lml_new);
        report.repetition_count = iter;
        if (m == 1 || lml_new - lml_old <= config.epsilon) break;
    }
    report.cluster_count = clustering.cluster_count();

    LfgpModel model = LfgpModel::build(theta, clustering.centroids, summary.estimates,
                                       final_jitter, config.statistic, std::move(table));
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(model), std::move(report)};
}

std::vector<PosteriorPrediction> predict_batch(const LfgpModel& model, const Eigen::MatrixXd& X_star) {
    std::vector<PosteriorPrediction> out;
    out.reserve(static_cast<std::size_t>(X_star.rows()));
    const bool embedded = model.embedding().has_value();
    if (!embedded && X_star.rows() > 0 && X_star.cols() != model.gp_dim())
        throw std::invalid_argument("predict_batch: input dimension mismatch");
    for (Eigen::Index i = 0; i < X_star.rows(); ++i) {
        Eigen::VectorXd x = X_star.row(i).transpose();
        if (embedded) {
            const Eigen::Index row = model.embedding()->find(x);
            if (row < 0)
                throw std::invalid_argument(
                    "predict_batch: row " + std::to_string(i) +
                    " was not part of the joint embedding; transductive models can only "
                    "predict points supplied at fit time");
            x = model.embedding()->embedded_points.row(row).transpose();
        }
        out.push_back(posterior_predict(x, model));
    }
    return out;
}

} // namespace lfgp
