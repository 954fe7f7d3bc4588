#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "lfgp/datasets.hpp"
#include "lfgp/errors.hpp"
#include "lfgp/manifold.hpp"
#include "lfgp/rng.hpp"

using namespace lfgp;

namespace {

// Least-squares orthogonal alignment of B onto A (both centered), returning
// the residual RMS; the yardstick for rigid-motion invariance.
double procrustes_rms(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    Eigen::MatrixXd Ac = A.rowwise() - A.colwise().mean();
    Eigen::MatrixXd Bc = B.rowwise() - B.colwise().mean();
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bc.transpose() * Ac,
                                                Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd R = svd.matrixU() * svd.matrixV().transpose();
    // optimal isotropic scale, so reflections/sign flips also align
    const double scale = (Bc * R).cwiseProduct(Ac).sum() / (Bc * R).squaredNorm();
    return std::sqrt((Bc * R * scale - Ac).squaredNorm() / static_cast<double>(A.rows()));
}

Eigen::MatrixXd random_rotation3(Rng& rng) {
    Eigen::MatrixXd M(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = rng.normal();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    Eigen::MatrixXd Q = qr.householderQ();
    if (Q.determinant() < 0) Q.col(0) *= -1.0;
    return Q;
}

double spearman_abs(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return v[a] < v[b]; });
    std::vector<double> rank(static_cast<std::size_t>(n));
    for (Eigen::Index r = 0; r < n; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = static_cast<double>(r);
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i), y = rank[static_cast<std::size_t>(i)];
        sx += x; sy += y; sxx += x * x; syy += y * y; sxy += x * y;
    }
    const double num = static_cast<double>(n) * sxy - sx * sy;
    const double den = std::sqrt((static_cast<double>(n) * sxx - sx * sx) *
                                 (static_cast<double>(n) * syy - sy * sy));
    return std::fabs(num / den);
}

} // namespace

TEST_SUITE("manifold") {

TEST_CASE("isomap reproduces a flat 2-plane embedded in R^3") {
    Rng rng(3);
    const int n = 400;
    Eigen::MatrixXd plane(n, 3);
    const Eigen::MatrixXd R = random_rotation3(rng);
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd p(3);
        p << rng.uniform(0.0, 2.0), rng.uniform(0.0, 1.0), 0.0;
        plane.row(i) = (R * p).transpose();
    }
    EmbeddingConfig cfg;
    cfg.method = EmbeddingConfig::Method::Isomap;
    cfg.k_neighbors = 32; // ample: graph paths stay close to straight lines
    cfg.target_dim = 2;
    const EmbeddedSpace emb = isomap_embed(plane, cfg);
    REQUIRE(emb.points.rows() == n);

    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; i += 7) {
        for (int j = i + 1; j < n; j += 7) {
            const double orig = (plane.row(i) - plane.row(j)).norm();
            const double got = (emb.points.row(i) - emb.points.row(j)).norm();
            num += (got - orig) * (got - orig);
            den += orig * orig;
        }
    }
    CHECK(std::sqrt(num / den) <= 0.01);
}

TEST_CASE("isomap first coordinate is monotone along the roll") {
    const Dataset d = gen_roll(2000, 4);
    EmbeddingConfig cfg;
    cfg.method = EmbeddingConfig::Method::Isomap;
    cfg.k_neighbors = 50;
    cfg.target_dim = 2;
    const EmbeddedSpace emb = isomap_embed(d.X, cfg);
    CHECK(spearman_abs(emb.points.col(0)) >= 0.99);

    // coarse block means are strictly monotone after sign normalization
    const int blocks = 40, per = 50;
    Eigen::VectorXd means(blocks);
    for (int b = 0; b < blocks; ++b)
        means[b] = emb.points.col(0).segment(b * per, per).mean();
    const double sign = means[blocks - 1] > means[0] ? 1.0 : -1.0;
    for (int b = 1; b < blocks; ++b) CHECK(sign * means[b] > sign * means[b - 1]);
}

TEST_CASE("disconnected graph raises with the component count") {
    Eigen::MatrixXd blobs(40, 2);
    Rng rng(8);
    for (int i = 0; i < 20; ++i) {
        blobs(i, 0) = rng.normal() * 0.01;
        blobs(i, 1) = rng.normal() * 0.01;
        blobs(20 + i, 0) = 1000.0 + rng.normal() * 0.01;
        blobs(20 + i, 1) = rng.normal() * 0.01;
    }
    EmbeddingConfig cfg;
    cfg.method = EmbeddingConfig::Method::Isomap;
    cfg.k_neighbors = 5;
    cfg.target_dim = 2;
    try {
        isomap_embed(blobs, cfg);
        FAIL("expected GraphConnectivityError");
    } catch (const GraphConnectivityError& e) {
        CHECK(e.components == 2);
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
    cfg.method = EmbeddingConfig::Method::Lle;
    CHECK_THROWS_AS(lle_embed(blobs, cfg), GraphConnectivityError);
}

TEST_CASE("lle output satisfies its constraints") {
    const Dataset d = gen_roll(600, 6);
    EmbeddingConfig cfg;
    cfg.method = EmbeddingConfig::Method::Lle;
    cfg.k_neighbors = 20;
    cfg.target_dim = 2;
    const EmbeddedSpace emb = lle_embed(d.X, cfg);
    REQUIRE(emb.points.rows() == 600);
    CHECK(emb.points.allFinite());
    for (int c = 0; c < 2; ++c) {
        CHECK(std::fabs(emb.points.col(c).mean()) <= 1e-9);
        const double var = emb.points.col(c).squaredNorm() / 600.0;
        CHECK(var == doctest::Approx(1.0).epsilon(1e-6));
    }

    // reconstruction weights are barycentric: every row sums to 1
    const LleWeights lw = lle_barycentric_weights(d.X, cfg);
    for (Eigen::Index i = 0; i < lw.weights.rows(); ++i)
        CHECK(lw.weights.row(i).sum() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("rigid motions do not change either embedding") {
    Rng rng(12);
    const Dataset d = gen_roll(150, 10);
    const Eigen::MatrixXd R = random_rotation3(rng);
    Eigen::RowVectorXd shift(3);
    shift << 3.0, -2.0, 11.0;
    Eigen::MatrixXd moved = d.X * R.transpose();
    moved.rowwise() += shift;

    for (auto method : {EmbeddingConfig::Method::Lle, EmbeddingConfig::Method::Isomap}) {
        EmbeddingConfig cfg;
        cfg.method = method;
        cfg.k_neighbors = 12;
        cfg.target_dim = 2;
        auto embed = [&](const Eigen::MatrixXd& pts) {
            return method == EmbeddingConfig::Method::Lle ? lle_embed(pts, cfg)
                                                          : isomap_embed(pts, cfg);
        };
        CHECK(procrustes_rms(embed(d.X).points, embed(moved).points) <= 1e-6);
    }
}

TEST_CASE("row order of the embedding matches the input order") {
    const Dataset d = gen_roll(200, 14);
    EmbeddingConfig cfg;
    cfg.method = EmbeddingConfig::Method::Lle;
    cfg.k_neighbors = 12;
    cfg.target_dim = 2;
    const EmbeddedSpace fwd = lle_embed(d.X, cfg);

    Eigen::MatrixXd reversed(d.X.rows(), 3);
    for (Eigen::Index i = 0; i < d.X.rows(); ++i) reversed.row(i) = d.X.row(d.X.rows() - 1 - i);
    const EmbeddedSpace rev = lle_embed(reversed, cfg);
    Eigen::MatrixXd rev_back(rev.points.rows(), rev.points.cols());
    for (Eigen::Index i = 0; i < rev.points.rows(); ++i)
        rev_back.row(i) = rev.points.row(rev.points.rows() - 1 - i);
    CHECK(procrustes_rms(fwd.points, rev_back) <= 1e-6);
}

TEST_CASE("config validation") {
    EmbeddingConfig cfg;
    cfg.method = EmbeddingConfig::Method::Lle;
    cfg.k_neighbors = 2;
    cfg.target_dim = 2; // LLE needs k >= target_dim + 1
    CHECK_THROWS_AS(cfg.validate(3), std::invalid_argument);
    cfg.k_neighbors = 10;
    cfg.target_dim = 5; // target_dim > d
    CHECK_THROWS_AS(cfg.validate(3), std::invalid_argument);
    CHECK(EmbeddingConfig::parse_method("isomap") == EmbeddingConfig::Method::Isomap);
    CHECK_THROWS_AS(EmbeddingConfig::parse_method("umap"), std::invalid_argument);

    Eigen::MatrixXd tiny(5, 2);
    tiny.setRandom();
    EmbeddingConfig big;
    big.method = EmbeddingConfig::Method::Isomap;
    big.k_neighbors = 10;
    big.target_dim = 2;
    CHECK_THROWS_AS(isomap_embed(tiny, big), std::invalid_argument);
}

} // TEST_SUITE
