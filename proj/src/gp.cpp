#include "lfgp/gp.hpp"

#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "lfgp/errors.hpp"
#include "lfgp/rng.hpp"

namespace lfgp {

KernelMatrix kernel_matrix(const Eigen::MatrixXd& Z, const RbfHyperparams& params, double jitter) {
    params.validate();
    if (Z.rows() < 1) throw std::invalid_argument("kernel_matrix: need at least one centroid");
    if (Z.cols() != params.dim()) throw std::invalid_argument("kernel_matrix: dimension mismatch");
    if (jitter < 0.0) throw std::invalid_argument("kernel_matrix: jitter must be non-negative");

    const Eigen::Index m = Z.rows();
    KernelMatrix K;
    K.jitter = jitter;
    K.entries.resize(m, m);
    for (Eigen::Index s = 0; s < m; ++s) {
        K.entries(s, s) = params.amplitude + jitter;
        for (Eigen::Index t = s + 1; t < m; ++t) {
            const double v = rbf_kernel(Z.row(s).transpose(), Z.row(t).transpose(), params);
            K.entries(s, t) = v;
            K.entries(t, s) = v;
        }
    }
    return K;
}

Eigen::LLT<Eigen::MatrixXd> cholesky(const KernelMatrix& K) {
    Eigen::LLT<Eigen::MatrixXd> llt(K.entries);
    if (llt.info() != Eigen::Success)
        throw IllConditionedKernelError(
            "kernel matrix of order " + std::to_string(K.order()) +
            " is not positive definite (jitter " + std::to_string(K.jitter) + ")");
    return llt;
}

double log_marginal_likelihood(const Eigen::VectorXd& yhat, const KernelMatrix& K,
                               const Eigen::LLT<Eigen::MatrixXd>& llt) {
    const Eigen::Index m = K.order();
    if (yhat.size() != m) throw std::invalid_argument("log_marginal_likelihood: dimension mismatch");
    const Eigen::VectorXd alpha = llt.solve(yhat);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    return -0.5 * (yhat.dot(alpha) + log_det +
                   static_cast<double>(m) * std::log(2.0 * std::numbers::pi));
}

double log_marginal_likelihood(const Eigen::VectorXd& yhat, const KernelMatrix& K) {
    return log_marginal_likelihood(yhat, K, cholesky(K));
}

FactoredKernel factor_kernel_escalating(const Eigen::MatrixXd& Z, const RbfHyperparams& params,
                                        double jitter_abs, double factor0, double max_factor) {
    double factor = factor0;
    for (;;) {
        const KernelMatrix K = kernel_matrix(Z, params, factor * params.amplitude + jitter_abs);
        Eigen::LLT<Eigen::MatrixXd> llt(K.entries);
        if (llt.info() == Eigen::Success) return {std::move(llt), K.jitter, factor};
        if (factor >= max_factor)
            throw IllConditionedKernelError(
                "kernel factorization failed even at jitter factor " + std::to_string(factor));
        factor *= 10.0;
    }
}

LmlValueGrad lml_value_grad(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& Z,
                            const RbfHyperparams& params, double jitter_factor,
                            double jitter_abs) {
    params.validate();
    const Eigen::Index m = Z.rows();
    const Eigen::Index d = Z.cols();
    if (yhat.size() != m) throw std::invalid_argument("lml_value_grad: dimension mismatch");

    const KernelMatrix K = kernel_matrix(Z, params, jitter_factor * params.amplitude + jitter_abs);
    const Eigen::LLT<Eigen::MatrixXd> llt = cholesky(K);
    const Eigen::VectorXd alpha = llt.solve(yhat);
    const double log_det = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();

    LmlValueGrad out;
    out.value = -0.5 * (yhat.dot(alpha) + log_det +
                        static_cast<double>(m) * std::log(2.0 * std::numbers::pi));
    out.grad.resize(d + 1);

    const Eigen::MatrixXd Kinv = llt.solve(Eigen::MatrixXd::Identity(m, m));

    // dL/du_k = 1/2 (alpha^T dK alpha - tr(K^{-1} dK)).
    // Everything except the absolute jitter scales with C, so for u_0 = log C
    // dK = K - jitter_abs * I.
    out.grad[0] = 0.5 * (alpha.dot(yhat) - jitter_abs * alpha.squaredNorm() -
                         static_cast<double>(m) + jitter_abs * Kinv.trace());
    for (Eigen::Index j = 0; j < d; ++j) {
        // dK_st / dlog l_j = k_st * ((z_sj - z_tj)/l_j)^2 (zero on the diagonal).
        double quad = 0.0, trace = 0.0;
        const double inv_lj = 1.0 / params.length_scales[j];
        for (Eigen::Index s = 0; s < m; ++s) {
            for (Eigen::Index t = s + 1; t < m; ++t) {
                const double diff = (Z(s, j) - Z(t, j)) * inv_lj;
                const double dk = (K.entries(s, t)) * diff * diff;
                quad += 2.0 * alpha[s] * dk * alpha[t];
                trace += 2.0 * Kinv(s, t) * dk;
            }
        }
        out.grad[j + 1] = 0.5 * (quad - trace);
    }
    return out;
}

namespace {

struct LogSpaceObjective {
    const Eigen::VectorXd& yhat;
    const Eigen::MatrixXd& Z;
    double jitter_factor;
    double jitter_abs;

    RbfHyperparams to_params(const Eigen::VectorXd& u) const {
        RbfHyperparams p;
        p.amplitude = std::exp(u[0]);
        p.length_scales = u.tail(u.size() - 1).array().exp();
        return p;
    }

    // Returns false when the point is unusable: out of the sane log-parameter
    // box (exp would overflow) or the kernel cannot be factored there.
    bool eval(const Eigen::VectorXd& u, double& value, Eigen::VectorXd& grad) const {
        if (!u.allFinite() || u.cwiseAbs().maxCoeff() > 46.0) return false;
        try {
            const LmlValueGrad r = lml_value_grad(yhat, Z, to_params(u), jitter_factor, jitter_abs);
            value = r.value;
            grad = r.grad;
            return std::isfinite(value) && grad.allFinite();
        } catch (const IllConditionedKernelError&) {
            return false;
        }
    }
};

// Compact L-BFGS ascent with Armijo backtracking. Monotone: the returned
// point never scores below the start.
struct LbfgsResult {
    Eigen::VectorXd u;
    double value;
    bool ok;
};

LbfgsResult lbfgs_maximize(const LogSpaceObjective& f, const Eigen::VectorXd& u0, int max_iters) {
    constexpr int kMemory = 8;
    Eigen::VectorXd u = u0;
    double fu;
    Eigen::VectorXd g;
    if (!f.eval(u, fu, g)) return {u, -std::numeric_limits<double>::infinity(), false};

    std::deque<Eigen::VectorXd> s_hist, y_hist;
    std::deque<double> rho_hist;

    for (int iter = 0; iter < max_iters; ++iter) {
        if (g.cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, std::fabs(fu))) break;

        // Two-loop recursion on the ascent direction.
        Eigen::VectorXd q = g;
        std::vector<double> alpha_coef(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            alpha_coef[i] = rho_hist[i] * s_hist[i].dot(q);
            q -= alpha_coef[i] * y_hist[i];
        }
        if (!s_hist.empty()) {
            const double gamma = s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
            q *= gamma;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            const double beta = rho_hist[i] * y_hist[i].dot(q);
            q += (alpha_coef[i] - beta) * s_hist[i];
        }
        Eigen::VectorXd dir = q;
        if (dir.dot(g) <= 0.0) dir = g; // fall back to steepest ascent

        // Backtracking line search (Armijo). The first trial step is capped
        // at one decade per coordinate so a badly scaled direction cannot
        // catapult the iterate across the landscape.
        const double slope = dir.dot(g);
        double step = std::min(1.0, std::log(10.0) / dir.cwiseAbs().maxCoeff());
        double f_new = fu;
        Eigen::VectorXd u_new = u, g_new = g;
        bool accepted = false;
        for (int ls = 0; ls < 40; ++ls) {
            u_new = u + step * dir;
            if (f.eval(u_new, f_new, g_new) && f_new >= fu + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;

        const Eigen::VectorXd s = u_new - u;
        const Eigen::VectorXd yv = g - g_new; // gradient of -f increases -> flip sign for ascent
        const double sy = s.dot(yv);
        if (sy > 1e-12 * s.norm() * yv.norm()) {
            s_hist.push_back(s);
            y_hist.push_back(yv);
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > kMemory) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
        }
        const double improvement = f_new - fu;
        u = std::move(u_new);
        fu = f_new;
        g = std::move(g_new);
        if (improvement < 1e-10 * std::max(1.0, std::fabs(fu))) break;
    }
    return {u, fu, true};
}

} // namespace

RbfHyperparams default_hyperparams(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& Z) {
    RbfHyperparams p;
    double var = 0.0;
    if (yhat.size() >= 2) {
        const double mu = yhat.mean();
        var = (yhat.array() - mu).square().sum() / static_cast<double>(yhat.size() - 1);
    }
    p.amplitude = (std::isfinite(var) && var > 0.0) ? var : 1.0;
    p.length_scales.resize(Z.cols());
    for (Eigen::Index j = 0; j < Z.cols(); ++j) {
        double sd = 0.0;
        if (Z.rows() >= 2) {
            const double mu = Z.col(j).mean();
            sd = std::sqrt((Z.col(j).array() - mu).square().sum() / static_cast<double>(Z.rows() - 1));
        }
        p.length_scales[j] = (std::isfinite(sd) && sd > 0.0) ? sd : 1.0;
    }
    return p;
}

RbfHyperparams optimize_hyperparams(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& Z,
                                    const RbfHyperparams& init, const OptimizeOptions& options) {
    init.validate();
    if (Z.rows() < 2) throw std::invalid_argument("optimize_hyperparams: need at least 2 clusters");
    if (Z.cols() != init.dim() || yhat.size() != Z.rows())
        throw std::invalid_argument("optimize_hyperparams: dimension mismatch");

    const Eigen::Index d = Z.cols();
    Eigen::VectorXd u0(d + 1);
    u0[0] = std::log(init.amplitude);
    for (Eigen::Index j = 0; j < d; ++j) u0[j + 1] = std::log(init.length_scales[j]);

    Rng rng(options.seed);
    const double gamma = std::log(10.0); // perturbation half-width: one decade each way

    bool any_ok = false;
    double best_value = -std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_u = u0;

    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        Eigen::VectorXd start = u0;
        if (r > 0)
            for (Eigen::Index j = 0; j < start.size(); ++j) start[j] += rng.uniform(-gamma, gamma);

        // Escalate the jitter factor for this restart only if its starting
        // point cannot be factored at all.
        LogSpaceObjective obj{yhat, Z, options.jitter_factor, options.noise_floor};
        {
            double v;
            Eigen::VectorXd g;
            while (!obj.eval(start, v, g) && obj.jitter_factor < 1e-2) obj.jitter_factor *= 10.0;
        }
        const LbfgsResult res = lbfgs_maximize(obj, start, options.max_iters);
        if (!res.ok) continue;
        any_ok = true;
        if (res.value > best_value) {
            best_value = res.value;
            best_u = res.u;
        }
    }
    if (!any_ok)
        throw IllConditionedKernelError("optimize_hyperparams: every restart failed to factorize");

    RbfHyperparams out;
    out.amplitude = std::exp(best_u[0]);
    out.length_scales = best_u.tail(d).array().exp();
    return out;
}

Eigen::Index EmbeddingTable::find(const Eigen::VectorXd& x) const {
    if (x.size() != source_points.cols()) return -1;
    const double tol = 1e-9 * (1.0 + x.cwiseAbs().maxCoeff());
    for (Eigen::Index i = 0; i < source_points.rows(); ++i) {
        if ((source_points.row(i).transpose() - x).cwiseAbs().maxCoeff() <= tol) return i;
    }
    return -1;
}

LfgpModel LfgpModel::build(RbfHyperparams hyperparams, Eigen::MatrixXd centroids,
                           Eigen::VectorXd pseudo_observations, double jitter,
                           StatisticKind statistic, std::optional<EmbeddingTable> embedding) {
    hyperparams.validate();
    if (centroids.rows() != pseudo_observations.size())
        throw std::invalid_argument("LfgpModel: centroid/observation count mismatch");
    if (centroids.cols() != hyperparams.dim())
        throw std::invalid_argument("LfgpModel: centroid/hyperparameter dimension mismatch");

    LfgpModel model(std::move(hyperparams), std::move(centroids), std::move(pseudo_observations),
                    jitter, statistic, std::move(embedding));
    const KernelMatrix K = kernel_matrix(model.centroids_, model.hyperparams_, jitter);
    const Eigen::LLT<Eigen::MatrixXd> llt = cholesky(K);
    model.chol_lower_ = llt.matrixL();
    model.alpha_ = llt.solve(model.pseudo_observations_);
    return model;
}

PosteriorPrediction posterior_predict(const Eigen::VectorXd& x_star, const LfgpModel& model) {
    if (x_star.size() != model.gp_dim())
        throw std::invalid_argument("posterior_predict: input dimension " +
                                    std::to_string(x_star.size()) + " does not match model (" +
                                    std::to_string(model.gp_dim()) + ")");
    const Eigen::Index m = model.cluster_count();
    Eigen::VectorXd k_star(m);
    for (Eigen::Index h = 0; h < m; ++h)
        k_star[h] = rbf_kernel(model.centroids().row(h).transpose(), x_star, model.hyperparams());

    PosteriorPrediction pred;
    pred.mean = k_star.dot(model.alpha_vec());
    const Eigen::VectorXd v =
        model.chol_lower().triangularView<Eigen::Lower>().solve(k_star);
    pred.variance = std::max(0.0, model.hyperparams().amplitude - v.squaredNorm());
    return pred;
}

} // namespace lfgp
