#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

#include "lfgp/errors.hpp"
#include "lfgp/gp.hpp"
#include "lfgp/rng.hpp"

using namespace lfgp;

namespace {

RbfHyperparams make_params(double c, std::initializer_list<double> ls) {
    RbfHyperparams p;
    p.amplitude = c;
    p.length_scales.resize(static_cast<Eigen::Index>(ls.size()));
    Eigen::Index i = 0;
    for (double v : ls) p.length_scales[i++] = v;
    return p;
}

// Dense-inverse evaluation of the log marginal likelihood; the independent
// oracle for the Cholesky path.
double lml_dense_oracle(const Eigen::VectorXd& yhat, const Eigen::MatrixXd& K) {
    const Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    const double quad = yhat.dot(lu.inverse() * yhat);
    const double log_det = std::log(lu.determinant());
    return -0.5 * (quad + log_det +
                   static_cast<double>(K.rows()) * std::log(2.0 * std::numbers::pi));
}

struct RandomInstance {
    Eigen::MatrixXd Z;
    Eigen::VectorXd yhat;
    RbfHyperparams params;
};

RandomInstance random_instance(Rng& rng, int m, int d) {
    RandomInstance inst;
    inst.Z.resize(m, d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) inst.Z(i, j) = rng.uniform(-2.0, 2.0);
    inst.yhat.resize(m);
    for (int i = 0; i < m; ++i) inst.yhat[i] = rng.normal();
    inst.params.amplitude = std::exp(rng.uniform(-1.0, 1.0));
    inst.params.length_scales.resize(d);
    for (int j = 0; j < d; ++j) inst.params.length_scales[j] = std::exp(rng.uniform(-0.7, 0.9));
    return inst;
}

} // namespace

TEST_SUITE("gp") {

TEST_CASE("rbf kernel closed-form points") {
    Eigen::VectorXd a(2), b(2);

    a << 0.3, -1.2;
    CHECK(rbf_kernel(a, a, make_params(2.5, {1.0, 3.0})) == doctest::Approx(2.5).epsilon(1e-14));

    Eigen::VectorXd s(1), t(1);
    s << 0.0;
    t << 0.7;
    CHECK(rbf_kernel(s, t, make_params(1.0, {0.7})) ==
          doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

    a << 1.0, 0.0;
    b << 0.0, 1.0;
    CHECK(rbf_kernel(a, b, make_params(1.0, {1.0, 1.0})) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
}

TEST_CASE("rbf kernel rejects bad inputs") {
    Eigen::VectorXd a(2), b(3);
    a.setZero();
    b.setZero();
    CHECK_THROWS_AS(rbf_kernel(a, b, make_params(1.0, {1.0, 1.0})), std::invalid_argument);
    CHECK_THROWS_AS(make_params(-1.0, {1.0}).validate(), std::invalid_argument);
    CHECK_THROWS_AS(make_params(1.0, {0.0}).validate(), std::invalid_argument);
}

TEST_CASE("kernel matrix basics and jitter escalation") {
    Eigen::MatrixXd Z(1, 2);
    Z << 0.5, -0.5;
    const KernelMatrix K1 = kernel_matrix(Z, make_params(1.0, {1.0, 1.0}), 0.0);
    CHECK(K1.order() == 1);
    CHECK(K1.entries(0, 0) == doctest::Approx(1.0).epsilon(1e-15));

    // Duplicate rows: singular without jitter, factorizable with it.
    Eigen::MatrixXd Zdup(2, 1);
    Zdup << 1.0, 1.0;
    const auto params = make_params(1.0, {1.0});
    CHECK_THROWS_AS(cholesky(kernel_matrix(Zdup, params, 0.0)), IllConditionedKernelError);
    CHECK_NOTHROW(cholesky(kernel_matrix(Zdup, params, 1e-6)));

    // The default first rung already factors the duplicate pair.
    const FactoredKernel fk = factor_kernel_escalating(Zdup, params);
    CHECK(fk.jitter_factor == doctest::Approx(1e-8));
    CHECK(fk.jitter == doctest::Approx(fk.jitter_factor * params.amplitude));

    // Starting below representable jitter forces the ladder to escalate.
    const FactoredKernel fk2 = factor_kernel_escalating(Zdup, params, 0.0, 1e-300);
    CHECK(fk2.jitter_factor > 1e-300);
    CHECK(fk2.jitter_factor <= 1e-2);
}

TEST_CASE("kernel matrix matches elementwise oracle and is symmetric PSD") {
    Rng rng(41);
    for (int rep = 0; rep < 12; ++rep) {
        const RandomInstance inst = random_instance(rng, 3 + static_cast<int>(rng.uniform_int(5)), 3);
        const KernelMatrix K = kernel_matrix(inst.Z, inst.params, 0.0);
        for (Eigen::Index s = 0; s < K.order(); ++s)
            for (Eigen::Index t = 0; t < K.order(); ++t) {
                const double expect =
                    rbf_kernel(inst.Z.row(s).transpose(), inst.Z.row(t).transpose(), inst.params);
                CHECK(K.entries(s, t) == doctest::Approx(expect).epsilon(1e-13));
            }
        CHECK((K.entries - K.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(K.entries);
        CHECK(es.eigenvalues().minCoeff() >= -1e-10 * inst.params.amplitude);
    }
}

TEST_CASE("log marginal likelihood scalar cases") {
    Eigen::VectorXd y1(1);
    y1 << 0.0;
    KernelMatrix K;
    K.entries.resize(1, 1);
    K.entries << 1.0;
    CHECK(log_marginal_likelihood(y1, K) ==
          doctest::Approx(-0.5 * std::log(2.0 * std::numbers::pi)).epsilon(1e-14));

    y1 << 2.0;
    K.entries << 4.0;
    const double expect = -0.5 * (1.0 + std::log(4.0) + std::log(2.0 * std::numbers::pi));
    CHECK(log_marginal_likelihood(y1, K) == doctest::Approx(expect).epsilon(1e-14));
    CHECK(expect == doctest::Approx(-2.11208).epsilon(1e-5));
}

TEST_CASE("log marginal likelihood matches dense-inverse oracle") {
    Rng rng(7);
    for (int rep = 0; rep < 20; ++rep) {
        const RandomInstance inst = random_instance(rng, 2 + static_cast<int>(rng.uniform_int(9)), 2);
        const KernelMatrix K = kernel_matrix(inst.Z, inst.params, 1e-8 * inst.params.amplitude);
        const double via_chol = log_marginal_likelihood(inst.yhat, K);
        const double via_dense = lml_dense_oracle(inst.yhat, K.entries);
        CHECK(std::fabs(via_chol - via_dense) <= 1e-8 * std::max(1.0, std::fabs(via_dense)));
    }
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(19);
    for (int rep = 0; rep < 6; ++rep) {
        const RandomInstance inst = random_instance(rng, 6, 3);
        const double jabs = rep % 2 == 0 ? 0.0 : 0.05; // both jitter paths
        const LmlValueGrad vg = lml_value_grad(inst.yhat, inst.Z, inst.params, 1e-8, jabs);

        Eigen::VectorXd u(4);
        u[0] = std::log(inst.params.amplitude);
        for (int j = 0; j < 3; ++j) u[j + 1] = std::log(inst.params.length_scales[j]);
        const double h = 1e-4;
        Eigen::VectorXd fd(4);
        for (int k = 0; k < 4; ++k) {
            auto eval = [&](double delta) {
                Eigen::VectorXd up = u;
                up[k] += delta;
                RbfHyperparams p;
                p.amplitude = std::exp(up[0]);
                p.length_scales = up.tail(3).array().exp();
                const KernelMatrix K = kernel_matrix(inst.Z, p, 1e-8 * p.amplitude + jabs);
                return log_marginal_likelihood(inst.yhat, K);
            };
            fd[k] = (eval(h) - eval(-h)) / (2.0 * h);
        }
        const double rel = (vg.grad - fd).norm() / std::max(fd.norm(), 1e-10);
        CHECK(rel <= 1e-5);
    }
}

TEST_CASE("optimizer never regresses below init") {
    Rng rng(23);
    const RandomInstance inst = random_instance(rng, 12, 2);
    OptimizeOptions opts;
    opts.seed = 5;

    auto objective = [&](const RbfHyperparams& p) {
        return lml_value_grad(inst.yhat, inst.Z, p, opts.jitter_factor).value;
    };
    const RbfHyperparams opt1 = optimize_hyperparams(inst.yhat, inst.Z, inst.params, opts);
    CHECK(objective(opt1) >= objective(inst.params) - 1e-9);

    // Re-optimizing from an optimum keeps its objective.
    const RbfHyperparams opt2 = optimize_hyperparams(inst.yhat, inst.Z, opt1, opts);
    CHECK(objective(opt2) >= objective(opt1) - 1e-9);
}

TEST_CASE("optimizer recovers generating hyperparameters within 2 nats") {
    Rng rng(31);
    const int m = 50, d = 2;
    Eigen::MatrixXd Z(m, d);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < d; ++j) Z(i, j) = rng.uniform(-2.0, 2.0);
    const RbfHyperparams truth = make_params(1.5, {0.8, 1.2});
    const KernelMatrix K = kernel_matrix(Z, truth, 1e-8 * truth.amplitude);
    const Eigen::LLT<Eigen::MatrixXd> llt = cholesky(K);
    Eigen::VectorXd z(m);
    for (int i = 0; i < m; ++i) z[i] = rng.normal();
    const Eigen::VectorXd yhat = Eigen::MatrixXd(llt.matrixL()) * z;

    const RbfHyperparams init = make_params(0.4, {2.0, 0.5});
    OptimizeOptions opts;
    opts.seed = 3;
    const RbfHyperparams fitted = optimize_hyperparams(yhat, Z, init, opts);

    const double lml_truth = log_marginal_likelihood(yhat, K);
    const double lml_fitted = lml_value_grad(yhat, Z, fitted, opts.jitter_factor).value;
    CHECK(lml_fitted >= lml_truth - 2.0);
}

TEST_CASE("optimizer preconditions") {
    Eigen::MatrixXd Z(1, 1);
    Z << 0.0;
    Eigen::VectorXd y(1);
    y << 1.0;
    CHECK_THROWS_AS(optimize_hyperparams(y, Z, make_params(1.0, {1.0})), std::invalid_argument);
}

TEST_CASE("posterior prediction at and away from centroids") {
    Eigen::MatrixXd Z(3, 1);
    Z << -5.0, 0.0, 5.0; // well separated at l = 0.5
    Eigen::VectorXd yhat(3);
    yhat << 1.0, -2.0, 0.5;
    const auto params = make_params(2.0, {0.5});
    const LfgpModel model = LfgpModel::build(params, Z, yhat, 1e-12, StatisticKind::mean());

    for (int h = 0; h < 3; ++h) {
        const PosteriorPrediction pred = posterior_predict(Z.row(h).transpose(), model);
        CHECK(pred.mean == doctest::Approx(yhat[h]).epsilon(1e-6));
        CHECK(pred.variance <= 1e-6 * params.amplitude);
    }

    Eigen::VectorXd far(1);
    far << 1e3;
    const PosteriorPrediction pred = posterior_predict(far, model);
    CHECK(std::fabs(pred.mean) <= 1e-9);
    CHECK(pred.variance == doctest::Approx(params.amplitude).epsilon(1e-9));

    Eigen::VectorXd wrong(2);
    wrong.setZero();
    CHECK_THROWS_AS(posterior_predict(wrong, model), std::invalid_argument);
}

TEST_CASE("posterior prediction matches dense-inverse oracle") {
    Rng rng(47);
    for (int rep = 0; rep < 10; ++rep) {
        const RandomInstance inst = random_instance(rng, 4, 2);
        const double jitter = 1e-8 * inst.params.amplitude;
        const LfgpModel model =
            LfgpModel::build(inst.params, inst.Z, inst.yhat, jitter, StatisticKind::mean());
        const KernelMatrix K = kernel_matrix(inst.Z, inst.params, jitter);
        const Eigen::MatrixXd Kinv = Eigen::FullPivLU<Eigen::MatrixXd>(K.entries).inverse();

        Eigen::VectorXd x(2);
        x << rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0);
        Eigen::VectorXd k_star(4);
        for (int h = 0; h < 4; ++h)
            k_star[h] = rbf_kernel(inst.Z.row(h).transpose(), x, inst.params);

        const PosteriorPrediction pred = posterior_predict(x, model);
        const double mean_oracle = k_star.dot(Kinv * inst.yhat);
        const double var_oracle = inst.params.amplitude - k_star.dot(Kinv * k_star);
        CHECK(std::fabs(pred.mean - mean_oracle) <= 1e-8 * std::max(1.0, std::fabs(mean_oracle)));
        CHECK(std::fabs(pred.variance - std::max(0.0, var_oracle)) <=
              1e-8 * std::max(1.0, std::fabs(var_oracle)));
    }
}

TEST_CASE("posterior variance stays within [0, C]") {
    Rng rng(53);
    const RandomInstance inst = random_instance(rng, 8, 3);
    const LfgpModel model = LfgpModel::build(inst.params, inst.Z, inst.yhat,
                                             1e-8 * inst.params.amplitude, StatisticKind::mean());
    for (int rep = 0; rep < 200; ++rep) {
        Eigen::VectorXd x(3);
        for (int j = 0; j < 3; ++j) x[j] = rng.uniform(-4.0, 4.0);
        const PosteriorPrediction pred = posterior_predict(x, model);
        CHECK(pred.variance >= 0.0);
        CHECK(pred.variance <= inst.params.amplitude + 1e-10);
    }
}

TEST_CASE("model build invariants") {
    Rng rng(61);
    const RandomInstance inst = random_instance(rng, 6, 2);
    const double jitter = 1e-8 * inst.params.amplitude;
    const LfgpModel model =
        LfgpModel::build(inst.params, inst.Z, inst.yhat, jitter, StatisticKind::median());
    // chol * chol^T reconstructs K + jitter I.
    const KernelMatrix K = kernel_matrix(inst.Z, inst.params, jitter);
    const Eigen::MatrixXd rebuilt = model.chol_lower() * model.chol_lower().transpose();
    CHECK((rebuilt - K.entries).cwiseAbs().maxCoeff() <= 1e-12 * inst.params.amplitude);
    // alpha solves K alpha = yhat.
    CHECK((K.entries * model.alpha_vec() - inst.yhat).cwiseAbs().maxCoeff() <= 1e-10);
}

} // TEST_SUITE
